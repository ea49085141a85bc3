use crate::error::{IsingError, Result};

/// `N x P` matrix of `-1/+1` observations, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryDataset {
    n: usize,
    p: usize,
    values: Vec<i8>,
    column_names: Option<Vec<String>>,
}

impl BinaryDataset {
    pub fn from_rows(rows: Vec<Vec<i8>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(IsingError::InvalidData("dataset needs at least one row".into()));
        }
        let p = rows[0].len();
        let mut values = Vec::with_capacity(n * p);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != p {
                return Err(IsingError::InvalidData(format!(
                    "row {r} has {} entries, expected {p}",
                    row.len()
                )));
            }
            values.extend(row);
        }
        Self::from_flat(n, p, values)
    }

    pub fn from_flat(n: usize, p: usize, values: Vec<i8>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(IsingError::InvalidData(format!(
                "dataset must be at least 1x1, got {n}x{p}"
            )));
        }
        if values.len() != n * p {
            return Err(IsingError::DimensionMismatch {
                expected: n * p,
                found: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|&v| v != -1 && v != 1) {
            return Err(IsingError::InvalidData(format!(
                "cell ({}, {}) is {}, expected -1 or +1",
                pos / p,
                pos % p,
                values[pos]
            )));
        }
        Ok(Self {
            n,
            p,
            values,
            column_names: None,
        })
    }

    pub fn with_column_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.p {
            return Err(IsingError::DimensionMismatch {
                expected: self.p,
                found: names.len(),
            });
        }
        self.column_names = Some(names);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn column_names(&self) -> Option<&[String]> {
        self.column_names.as_deref()
    }

    pub fn row(&self, r: usize) -> &[i8] {
        &self.values[r * self.p..(r + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[i8]> {
        self.values.chunks_exact(self.p)
    }

    pub fn get(&self, r: usize, j: usize) -> i8 {
        self.values[r * self.p + j]
    }

    pub fn column_f64(&self, j: usize) -> Vec<f64> {
        self.rows().map(|row| f64::from(row[j])).collect()
    }

    /// Number of `+1` entries per column.
    pub fn positive_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.p];
        for row in self.rows() {
            for (c, &v) in counts.iter_mut().zip(row) {
                *c += usize::from(v > 0);
            }
        }
        counts
    }

    /// Columns whose entries are all equal.
    pub fn constant_columns(&self) -> Vec<usize> {
        self.positive_counts()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 0 || c == self.n)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.p);
        for &r in indices {
            if r >= self.n {
                return Err(IsingError::IndexOutOfRange { index: r, p: self.n });
            }
            values.extend_from_slice(self.row(r));
        }
        let mut out = Self::from_flat(indices.len(), self.p, values)?;
        out.column_names = self.column_names.clone();
        Ok(out)
    }

    /// Column `k` of the result is column `order[k]` of `self`.
    pub fn permute_columns(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.p {
            return Err(IsingError::DimensionMismatch {
                expected: self.p,
                found: order.len(),
            });
        }
        let mut seen = vec![false; self.p];
        for &c in order {
            if c >= self.p || seen[c] {
                return Err(IsingError::InvalidConfig("order is not a permutation".into()));
            }
            seen[c] = true;
        }
        let values = self
            .rows()
            .flat_map(|row| order.iter().map(move |&c| row[c]))
            .collect();
        let mut out = Self::from_flat(self.n, self.p, values)?;
        out.column_names = self
            .column_names
            .as_ref()
            .map(|names| order.iter().map(|&c| names[c].clone()).collect());
        Ok(out)
    }

    /// Row-stacks two datasets with equal column counts.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if other.p != self.p {
            return Err(IsingError::DimensionMismatch {
                expected: self.p,
                found: other.p,
            });
        }
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        let mut out = Self::from_flat(self.n + other.n, self.p, values)?;
        out.column_names = self.column_names.clone();
        Ok(out)
    }

    pub fn default_column_names(&self) -> Vec<String> {
        (1..=self.p).map(|j| format!("x{j}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_cells_and_shapes() {
        assert!(BinaryDataset::from_rows(vec![]).is_err());
        assert!(BinaryDataset::from_rows(vec![vec![1, 0]]).is_err());
        assert!(BinaryDataset::from_rows(vec![vec![1, -1], vec![1]]).is_err());
        assert!(BinaryDataset::from_rows(vec![vec![]]).is_err());
    }

    #[test]
    fn permute_and_select() {
        let d = BinaryDataset::from_rows(vec![vec![1, -1, -1], vec![-1, -1, 1]]).unwrap();
        let q = d.permute_columns(&[2, 0, 1]).unwrap();
        assert_eq!(q.row(0), &[-1, 1, -1]);
        assert_eq!(q.row(1), &[1, -1, -1]);
        assert_eq!(d.select_rows(&[1]).unwrap().row(0), d.row(1));
        assert_eq!(d.constant_columns(), vec![1]);
        assert!(d.permute_columns(&[0, 0, 1]).is_err());
        assert_eq!(d.concat(&d).unwrap().n(), 4);
    }
}
