//! Exact representation of the Ising model over `{-1, +1}` variables.
//!
//! The model is
//!
//! ```text
//! Pr(X = x) = exp(-beta * H(x)) / Z,   H(x) = -sum_i tau_i x_i - sum_{i<j} omega_ij x_i x_j
//! ```
//!
//! Every pair sum in this crate iterates `i < j` exactly once. The matrix form
//! `1/2 x' Omega x` used by the MIRT bridge counts each pair twice and halves it,
//! which is the same quantity when the diagonal is zero.
//!
//! States are enumerated in a canonical order: state index `s` has node `i`
//! at `+1` iff bit `i` of `s` is set, so node 1 varies fastest and `-1` comes
//! before `+1`.

use nalgebra::DMatrix;

use crate::error::{IsingError, Result};

/// Largest node count for which exhaustive enumeration is attempted by default.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

/// Asymmetry allowed (and averaged away) when constructing from a matrix.
pub const SYMMETRY_TOL: f64 = 1e-9;

#[inline]
pub(crate) fn spin_index(v: i8) -> usize {
    usize::from(v > 0)
}

#[inline]
pub(crate) fn spin_value(idx: usize) -> i8 {
    if idx == 1 {
        1
    } else {
        -1
    }
}

/// Probability of `+1` for a `{-1,+1}` variable with natural parameter `eta`:
/// `exp(eta) / (exp(eta) + exp(-eta))`.
#[inline]
pub fn spin_up_probability(eta: f64) -> f64 {
    let t = 2.0 * eta;
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `ln(exp(eta) + exp(-eta))`, stable for large `|eta|`.
#[inline]
pub(crate) fn log_two_cosh(eta: f64) -> f64 {
    let a = eta.abs();
    a + (-2.0 * a).exp().ln_1p()
}

/// A configuration of `P` binary variables, each `-1` or `+1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryState(Vec<i8>);

impl BinaryState {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|&&v| v != -1 && v != 1) {
            return Err(IsingError::InvalidData(format!(
                "state entries must be -1 or +1, found {bad}"
            )));
        }
        Ok(Self(values))
    }

    /// The state at position `index` of the canonical enumeration over `p` nodes.
    pub fn from_index(index: usize, p: usize) -> Self {
        Self((0..p).map(|i| spin_value((index >> i) & 1)).collect())
    }

    /// Position of this state in the canonical enumeration.
    pub fn index(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &v)| acc | (spin_index(v) << i))
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|v| -v).collect())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&v| f64::from(v)).collect()
    }
}

/// Thresholds `tau`, symmetric zero-diagonal weights `omega` and inverse
/// temperature `beta`.
#[derive(Clone, Debug, PartialEq)]
pub struct IsingModel {
    tau: Vec<f64>,
    omega: DMatrix<f64>,
    beta: f64,
    enumeration_cap: usize,
}

impl IsingModel {
    /// Builds a model from thresholds and a weight matrix.
    ///
    /// The matrix must be symmetric up to [`SYMMETRY_TOL`] (it is averaged to
    /// exact symmetry) and have a zero diagonal up to the same tolerance. Use
    /// [`IsingModel::with_arbitrary_diagonal`] for matrices carrying a shifted diagonal.
    pub fn new(tau: Vec<f64>, omega: DMatrix<f64>, beta: f64) -> Result<Self> {
        let p = tau.len();
        Self::check_shape(p, &omega)?;
        for i in 0..p {
            if omega[(i, i)].abs() > SYMMETRY_TOL {
                return Err(IsingError::InvalidModel(format!(
                    "omega[{i}][{i}] = {} but the diagonal must be zero",
                    omega[(i, i)]
                )));
            }
        }
        Self::with_arbitrary_diagonal(tau, omega, beta)
    }

    /// Builds a model, discarding whatever is on the diagonal of `omega`.
    ///
    /// Since `x_i^2 = 1` the diagonal only contributes a constant that cancels
    /// in `Z`, so any diagonal describes the same distribution.
    pub fn with_arbitrary_diagonal(tau: Vec<f64>, omega: DMatrix<f64>, beta: f64) -> Result<Self> {
        let p = tau.len();
        Self::check_shape(p, &omega)?;
        if !(beta.is_finite() && beta > 0.0) {
            return Err(IsingError::InvalidModel(format!(
                "beta must be positive and finite, got {beta}"
            )));
        }
        if tau.iter().any(|t| !t.is_finite()) || omega.iter().any(|w| !w.is_finite()) {
            return Err(IsingError::InvalidModel("non-finite parameter".into()));
        }
        let mut sym = DMatrix::zeros(p, p);
        for i in 0..p {
            for j in (i + 1)..p {
                let (a, b) = (omega[(i, j)], omega[(j, i)]);
                if (a - b).abs() > SYMMETRY_TOL {
                    return Err(IsingError::InvalidModel(format!(
                        "omega is not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
                let w = 0.5 * (a + b);
                sym[(i, j)] = w;
                sym[(j, i)] = w;
            }
        }
        Ok(Self {
            tau,
            omega: sym,
            beta,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        })
    }

    fn check_shape(p: usize, omega: &DMatrix<f64>) -> Result<()> {
        if p == 0 {
            return Err(IsingError::InvalidModel("model needs at least one node".into()));
        }
        if omega.nrows() != p || omega.ncols() != p {
            return Err(IsingError::DimensionMismatch {
                expected: p,
                found: if omega.nrows() != p { omega.nrows() } else { omega.ncols() },
            });
        }
        Ok(())
    }

    /// All parameters zero: the uniform distribution over `2^p` states.
    pub fn zeros(p: usize) -> Result<Self> {
        Self::new(vec![0.0; p], DMatrix::zeros(p, p), 1.0)
    }

    /// Builds a model from thresholds and a list of `(i, j, weight)` edges.
    pub fn from_edges(tau: Vec<f64>, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let p = tau.len();
        let mut omega = DMatrix::zeros(p, p);
        for &(i, j, w) in edges {
            if i >= p || j >= p {
                return Err(IsingError::IndexOutOfRange { index: i.max(j), p });
            }
            if i == j {
                return Err(IsingError::InvalidModel(format!("self-loop on node {i}")));
            }
            omega[(i, j)] = w;
            omega[(j, i)] = w;
        }
        Self::new(tau, omega, 1.0)
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(IsingError::InvalidModel(format!(
                "beta must be positive and finite, got {beta}"
            )));
        }
        self.beta = beta;
        Ok(self)
    }

    /// Raises or lowers the node count up to which exact enumeration is allowed.
    pub fn with_enumeration_cap(mut self, cap: usize) -> Self {
        self.enumeration_cap = cap;
        self
    }

    pub fn p(&self) -> usize {
        self.tau.len()
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn omega(&self) -> &DMatrix<f64> {
        &self.omega
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn enumeration_cap(&self) -> usize {
        self.enumeration_cap
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.omega[(i, j)]
    }

    /// Same distribution with `beta` folded into the parameters.
    pub fn absorb_beta(&self) -> Self {
        Self {
            tau: self.tau.iter().map(|t| t * self.beta).collect(),
            omega: &self.omega * self.beta,
            beta: 1.0,
            enumeration_cap: self.enumeration_cap,
        }
    }

    fn check_state(&self, x: &[i8]) -> Result<()> {
        if x.len() != self.p() {
            return Err(IsingError::DimensionMismatch {
                expected: self.p(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `sum_i tau_i x_i + sum_{i<j} omega_ij x_i x_j` for a `+-1` vector.
    pub(crate) fn exponent_f64(&self, x: &[f64]) -> f64 {
        let p = self.p();
        let mut total = 0.0;
        for i in 0..p {
            let mut field = self.tau[i];
            for j in (i + 1)..p {
                field += self.omega[(i, j)] * x[j];
            }
            total += field * x[i];
        }
        total
    }

    /// Energy `H(x) = -sum_i tau_i x_i - sum_{i<j} omega_ij x_i x_j`.
    pub fn hamiltonian(&self, x: &BinaryState) -> Result<f64> {
        self.check_state(x.values())?;
        Ok(-self.exponent_f64(&x.to_f64()))
    }

    /// Natural parameter of node `i` given the full state `x` (the entry `x_i` is ignored).
    pub fn local_field(&self, i: usize, x: &[f64]) -> f64 {
        let mut eta = self.tau[i];
        for (j, &xj) in x.iter().enumerate() {
            if j != i {
                eta += self.omega[(i, j)] * xj;
            }
        }
        self.beta * eta
    }

    fn check_cap(&self) -> Result<()> {
        if self.p() > self.enumeration_cap {
            return Err(IsingError::EnumerationCapExceeded {
                p: self.p(),
                cap: self.enumeration_cap,
            });
        }
        Ok(())
    }

    /// `-beta H(x)` for every state in canonical order.
    fn log_potentials(&self) -> Result<Vec<f64>> {
        self.check_cap()?;
        let p = self.p();
        let mut x = vec![0.0; p];
        Ok((0..1usize << p)
            .map(|s| {
                for (i, xi) in x.iter_mut().enumerate() {
                    *xi = if (s >> i) & 1 == 1 { 1.0 } else { -1.0 };
                }
                self.beta * self.exponent_f64(&x)
            })
            .collect())
    }

    pub fn partition_function(&self) -> Result<f64> {
        Ok(self.log_partition_function()?.exp())
    }

    pub fn log_partition_function(&self) -> Result<f64> {
        Ok(log_sum_exp(&self.log_potentials()?))
    }

    pub fn state_probability(&self, x: &BinaryState) -> Result<f64> {
        self.check_state(x.values())?;
        let log_z = self.log_partition_function()?;
        Ok((self.beta * self.exponent_f64(&x.to_f64()) - log_z).exp())
    }

    /// Potentials and probabilities of all `2^P` states.
    pub fn full_distribution(&self) -> Result<StateDistribution> {
        let log_pot = self.log_potentials()?;
        let log_z = log_sum_exp(&log_pot);
        let potentials = log_pot.iter().map(|l| l.exp()).collect();
        let probabilities = log_pot.iter().map(|l| (l - log_z).exp()).collect();
        Ok(StateDistribution {
            nodes: (0..self.p()).collect(),
            potentials,
            probabilities,
            log_z,
        })
    }

    /// `Pr(X_i = +1 | X^-(i) = x_rest)`, where `x_rest` lists the other nodes in order.
    pub fn conditional_node(&self, i: usize, x_rest: &[i8]) -> Result<f64> {
        let p = self.p();
        if i >= p {
            return Err(IsingError::IndexOutOfRange { index: i, p });
        }
        if x_rest.len() + 1 != p {
            return Err(IsingError::DimensionMismatch {
                expected: p - 1,
                found: x_rest.len(),
            });
        }
        let rest = BinaryState::new(x_rest.to_vec())?;
        let mut full = Vec::with_capacity(p);
        full.extend(rest.values()[..i].iter().map(|&v| f64::from(v)));
        full.push(0.0);
        full.extend(rest.values()[i..].iter().map(|&v| f64::from(v)));
        Ok(spin_up_probability(self.local_field(i, &full)))
    }

    /// `Pr(X_i = +1 | rest)` read off a full state; `x_i` itself is ignored.
    pub fn conditional_in_state(&self, i: usize, x: &BinaryState) -> Result<f64> {
        self.check_state(x.values())?;
        if i >= self.p() {
            return Err(IsingError::IndexOutOfRange { index: i, p: self.p() });
        }
        Ok(spin_up_probability(self.local_field(i, &x.to_f64())))
    }

    /// Joint table of `(X_k, X_l)` given the remaining `P - 2` nodes, indexed
    /// `[x_k][x_l]` with index 0 for `-1`.
    pub fn condition_pair(&self, k: usize, l: usize, x_rest: &[i8]) -> Result<[[f64; 2]; 2]> {
        let p = self.p();
        for &idx in &[k, l] {
            if idx >= p {
                return Err(IsingError::IndexOutOfRange { index: idx, p });
            }
        }
        if k == l {
            return Err(IsingError::InvalidConfig("condition_pair needs two distinct nodes".into()));
        }
        if x_rest.len() + 2 != p {
            return Err(IsingError::DimensionMismatch {
                expected: p - 2,
                found: x_rest.len(),
            });
        }
        BinaryState::new(x_rest.to_vec())?;
        let mut x = vec![0.0; p];
        let mut rest = x_rest.iter();
        for (j, xj) in x.iter_mut().enumerate() {
            if j != k && j != l {
                *xj = f64::from(*rest.next().expect("length checked"));
            }
        }
        let mut logs = [[0.0; 2]; 2];
        for (a, row) in logs.iter_mut().enumerate() {
            for (b, cell) in row.iter_mut().enumerate() {
                x[k] = f64::from(spin_value(a));
                x[l] = f64::from(spin_value(b));
                *cell = self.beta * self.exponent_f64(&x);
            }
        }
        let flat = [logs[0][0], logs[0][1], logs[1][0], logs[1][1]];
        let norm = log_sum_exp(&flat);
        let mut table = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                table[a][b] = (logs[a][b] - norm).exp();
            }
        }
        Ok(table)
    }

    /// Shannon entropy `-sum_x p(x) ln p(x)` in nats.
    pub fn entropy(&self) -> Result<f64> {
        let log_pot = self.log_potentials()?;
        let log_z = log_sum_exp(&log_pot);
        Ok(-log_pot
            .iter()
            .map(|l| {
                let lp = l - log_z;
                let pr = lp.exp();
                if pr > 0.0 {
                    pr * lp
                } else {
                    0.0
                }
            })
            .sum::<f64>())
    }

    /// Model whose parameters are given for `{0, 1}` responses,
    /// `Pr(u) ∝ exp(sum_i t_i u_i + sum_{i<j} w_ij u_i u_j)`, expressed in `+-1` form.
    ///
    /// With `u = (x + 1) / 2` this is `omega = w / 4` and
    /// `tau_i = t_i / 2 + sum_j w_ij / 4`.
    pub fn from_zero_one(tau01: &[f64], omega01: &DMatrix<f64>) -> Result<Self> {
        let p = tau01.len();
        if omega01.nrows() != p || omega01.ncols() != p {
            return Err(IsingError::DimensionMismatch {
                expected: p,
                found: omega01.nrows(),
            });
        }
        let tau = (0..p)
            .map(|i| 0.5 * tau01[i] + 0.25 * (0..p).filter(|&j| j != i).map(|j| omega01[(i, j)]).sum::<f64>())
            .collect();
        Self::new(tau, omega01 * 0.25, 1.0)
    }

    /// Inverse of [`IsingModel::from_zero_one`] (with `beta` folded in).
    pub fn to_zero_one(&self) -> (Vec<f64>, DMatrix<f64>) {
        let m = self.absorb_beta();
        let p = m.p();
        let tau01 = (0..p)
            .map(|i| 2.0 * m.tau[i] - 2.0 * (0..p).filter(|&j| j != i).map(|j| m.omega[(i, j)]).sum::<f64>())
            .collect();
        (tau01, &m.omega * 4.0)
    }

    /// Node and pair potential functions, `phi_i(x) = exp(tau_i x)` and
    /// `phi_ij(a, b) = exp(omega_ij a b)`.
    ///
    /// `beta` is not folded in; see [`IsingModel::absorb_beta`].
    pub fn to_potentials(&self) -> PotentialSet {
        let p = self.p();
        let node = self
            .tau
            .iter()
            .map(|&t| [(-t).exp(), t.exp()])
            .collect();
        let mut pairs = Vec::with_capacity(p * p.saturating_sub(1) / 2);
        for i in 0..p {
            for j in (i + 1)..p {
                let w = self.omega[(i, j)];
                pairs.push(PairPotential {
                    i,
                    j,
                    table: [[w.exp(), (-w).exp()], [(-w).exp(), w.exp()]],
                });
            }
        }
        PotentialSet { node, pairs }
    }

    /// Inverse of [`IsingModel::to_potentials`]; the result has `beta = 1`.
    pub fn from_potentials(set: &PotentialSet) -> Result<Self> {
        const IDENT_TOL: f64 = 1e-9;
        let p = set.node.len();
        let mut tau = Vec::with_capacity(p);
        for (i, phi) in set.node.iter().enumerate() {
            if phi.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                return Err(IsingError::InvalidModel(format!(
                    "node potential {i} must be strictly positive"
                )));
            }
            if (phi[0].ln() + phi[1].ln()).abs() > IDENT_TOL {
                return Err(IsingError::InvalidModel(format!(
                    "node potential {i} violates the identification constraint"
                )));
            }
            tau.push(phi[1].ln());
        }
        let mut omega = DMatrix::zeros(p, p);
        for pair in &set.pairs {
            let (i, j) = (pair.i, pair.j);
            if i >= p || j >= p || i == j {
                return Err(IsingError::InvalidModel(format!("invalid pair ({i}, {j})")));
            }
            let t = &pair.table;
            if t.iter().flatten().any(|&v| !(v > 0.0 && v.is_finite())) {
                return Err(IsingError::InvalidModel(format!(
                    "pair potential ({i}, {j}) must be strictly positive"
                )));
            }
            let l = t.map(|row| row.map(f64::ln));
            let sums = [
                l[0][0] + l[0][1],
                l[1][0] + l[1][1],
                l[0][0] + l[1][0],
                l[0][1] + l[1][1],
            ];
            if sums.iter().any(|s| s.abs() > IDENT_TOL) {
                return Err(IsingError::InvalidModel(format!(
                    "pair potential ({i}, {j}) violates the identification constraint"
                )));
            }
            omega[(i, j)] = l[1][1];
            omega[(j, i)] = l[1][1];
        }
        Self::new(tau, omega, 1.0)
    }

    /// Expected cell counts `N Pr(X = x)` of the equivalent loglinear model.
    pub fn loglinear_view(&self, n_total: u64) -> Result<LoglinearView> {
        if n_total == 0 {
            return Err(IsingError::InvalidConfig("n_total must be at least 1".into()));
        }
        let dist = self.full_distribution()?;
        let n = n_total as f64;
        Ok(LoglinearView {
            expected: dist.probabilities.iter().map(|p| n * p).collect(),
            nu: n.ln() - dist.log_z,
        })
    }
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Exhaustive table over the states of a set of nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct StateDistribution {
    nodes: Vec<usize>,
    pub potentials: Vec<f64>,
    pub probabilities: Vec<f64>,
    log_z: f64,
}

impl StateDistribution {
    /// Original node indices covered by this table, in state-bit order.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn p(&self) -> usize {
        self.nodes.len()
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn z(&self) -> f64 {
        self.log_z.exp()
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    pub fn state(&self, index: usize) -> BinaryState {
        BinaryState::from_index(index, self.p())
    }

    pub fn states(&self) -> impl Iterator<Item = BinaryState> + '_ {
        (0..self.len()).map(|s| self.state(s))
    }

    /// Sums out every node not listed in `keep`. The result's states follow the order of `keep`.
    pub fn marginalize(&self, keep: &[usize]) -> Result<StateDistribution> {
        if keep.is_empty() {
            return Err(IsingError::InvalidConfig("marginalize needs at least one node".into()));
        }
        let mut positions = Vec::with_capacity(keep.len());
        for &node in keep {
            let pos = self
                .nodes
                .iter()
                .position(|&n| n == node)
                .ok_or(IsingError::IndexOutOfRange { index: node, p: self.p() })?;
            if positions.contains(&pos) {
                return Err(IsingError::InvalidConfig(format!("node {node} listed twice")));
            }
            positions.push(pos);
        }
        let size = 1usize << keep.len();
        let mut potentials = vec![0.0; size];
        let mut probabilities = vec![0.0; size];
        for s in 0..self.len() {
            let target = positions
                .iter()
                .enumerate()
                .fold(0, |acc, (t, &pos)| acc | (((s >> pos) & 1) << t));
            potentials[target] += self.potentials[s];
            probabilities[target] += self.probabilities[s];
        }
        Ok(StateDistribution {
            nodes: keep.to_vec(),
            potentials,
            probabilities,
            log_z: self.log_z,
        })
    }
}

/// Expected frequencies under the loglinear reading of the model.
#[derive(Clone, Debug, PartialEq)]
pub struct LoglinearView {
    pub expected: Vec<f64>,
    /// `ln N - ln Z`.
    pub nu: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairPotential {
    pub i: usize,
    pub j: usize,
    /// Indexed `[x_i][x_j]`, index 0 for `-1`.
    pub table: [[f64; 2]; 2],
}

/// Strictly positive potential functions whose product is proportional to the
/// state probability. Each node table holds `[phi(-1), phi(+1)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSet {
    pub node: Vec<[f64; 2]>,
    pub pairs: Vec<PairPotential>,
}
