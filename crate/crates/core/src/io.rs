//! File formats: model JSON, dataset CSV and distribution CSV.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::BinaryDataset;
use crate::error::{IsingError, Result};
use crate::model::{IsingModel, StateDistribution, SYMMETRY_TOL};

/// On-disk model: `{"p": 3, "tau": [...], "omega": [[...]], "beta": 1.0}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ModelFile {
    pub p: usize,
    pub tau: Vec<f64>,
    pub omega: Vec<Vec<f64>>,
    #[serde(default = "default_beta")]
    pub beta: f64,
}

fn default_beta() -> f64 {
    1.0
}

impl From<&IsingModel> for ModelFile {
    fn from(m: &IsingModel) -> Self {
        ModelFile {
            p: m.p(),
            tau: m.tau().to_vec(),
            omega: matrix_rows(m.omega()),
            beta: m.beta(),
        }
    }
}

impl TryFrom<ModelFile> for IsingModel {
    type Error = IsingError;

    fn try_from(f: ModelFile) -> Result<Self> {
        if f.tau.len() != f.p {
            return Err(IsingError::DimensionMismatch {
                expected: f.p,
                found: f.tau.len(),
            });
        }
        let omega = rows_matrix(&f.omega, f.p, f.p)?;
        for i in 0..f.p {
            for j in 0..f.p {
                let asym = (omega[(i, j)] - omega[(j, i)]).abs();
                if asym > SYMMETRY_TOL {
                    return Err(IsingError::InvalidModel(format!(
                        "omega asymmetric by {asym:e} at ({i}, {j})"
                    )));
                }
            }
        }
        IsingModel::new(f.tau, omega, f.beta)
    }
}

pub(crate) fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub(crate) fn rows_matrix(rows: &[Vec<f64>], nrows: usize, ncols: usize) -> Result<DMatrix<f64>> {
    if rows.len() != nrows {
        return Err(IsingError::DimensionMismatch {
            expected: nrows,
            found: rows.len(),
        });
    }
    let mut m = DMatrix::zeros(nrows, ncols);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(IsingError::DimensionMismatch {
                expected: ncols,
                found: row.len(),
            });
        }
        for (j, &v) in row.iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

pub fn read_model_json<R: Read>(reader: R) -> Result<IsingModel> {
    let file: ModelFile = serde_json::from_reader(reader)?;
    IsingModel::try_from(file)
}

pub fn write_model_json<W: Write>(model: &IsingModel, mut writer: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, &ModelFile::from(model))?;
    writeln!(writer)?;
    Ok(())
}

/// Reads a dataset CSV with a header row. Cells are `-1/+1`, or `0/1` in which
/// case `0` is recoded to `-1`.
pub fn read_dataset_csv<R: Read>(reader: R) -> Result<BinaryDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let names: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let mut values = Vec::new();
    let mut n = 0;
    let (mut saw_zero, mut saw_minus) = (false, false);
    for record in rdr.records() {
        let record = record?;
        if record.len() != names.len() {
            return Err(IsingError::InvalidData(format!(
                "row {} has {} fields, header has {}",
                n + 1,
                record.len(),
                names.len()
            )));
        }
        for field in record.iter() {
            let v: i8 = match field {
                "1" | "+1" | "1.0" => 1,
                "-1" | "-1.0" => {
                    saw_minus = true;
                    -1
                }
                "0" | "0.0" => {
                    saw_zero = true;
                    0
                }
                other => {
                    return Err(IsingError::InvalidData(format!(
                        "row {}: unrecognised cell {other:?}",
                        n + 1
                    )))
                }
            };
            values.push(v);
        }
        n += 1;
    }
    if saw_zero && saw_minus {
        return Err(IsingError::InvalidData(
            "dataset mixes 0 and -1 codings".into(),
        ));
    }
    if saw_zero {
        log::info!("dataset uses 0/1 coding; recoding 0 to -1");
        for v in values.iter_mut() {
            if *v == 0 {
                *v = -1;
            }
        }
    }
    BinaryDataset::from_flat(n, names.len(), values)?.with_column_names(names)
}

pub fn write_dataset_csv<W: Write>(data: &BinaryDataset, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    match data.column_names() {
        Some(names) => wtr.write_record(names)?,
        None => wtr.write_record(data.default_column_names())?,
    }
    for row in data.rows() {
        wtr.write_record(row.iter().map(|v| v.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

/// `x1..xP,potential,probability`, one line per state in canonical order.
/// `decimals` rounds the numeric columns; `None` writes full precision.
pub fn write_distribution_csv<W: Write>(
    dist: &StateDistribution,
    decimals: Option<usize>,
    writer: W,
) -> Result<()> {
    let fmt = |v: f64| match decimals {
        Some(d) => format!("{v:.d$}"),
        None => v.to_string(),
    };
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = dist.nodes().iter().map(|n| format!("x{}", n + 1)).collect();
    header.push("potential".into());
    header.push("probability".into());
    wtr.write_record(&header)?;
    for (s, state) in dist.states().enumerate() {
        let mut rec: Vec<String> = state.values().iter().map(|v| v.to_string()).collect();
        rec.push(fmt(dist.potentials[s]));
        rec.push(fmt(dist.probabilities[s]));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}
