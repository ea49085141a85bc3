//! Proximal Newton minimisation of a smooth convex objective plus an
//! elastic-net penalty on a subset of coordinates.
//!
//! Each outer step minimises the local quadratic model plus the penalty by
//! cyclic coordinate descent with soft-thresholding, then backtracks along
//! the resulting direction until the Armijo condition holds.

/// Twice-differentiable objective to be minimised.
pub trait SmoothObjective {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// Writes the gradient and the row-major `dim x dim` Hessian, returning the value.
    fn evaluate(&self, x: &[f64], grad: &mut [f64], hess: &mut [f64]) -> f64;
}

/// `lambda * sum_{j in mask} [(1 - alpha) x_j^2 / 2 + alpha |x_j|]`.
#[derive(Clone, Debug)]
pub struct ElasticNet<'a> {
    pub lambda: f64,
    pub alpha: f64,
    pub penalized: &'a [bool],
}

impl ElasticNet<'_> {
    pub fn value(&self, x: &[f64]) -> f64 {
        if self.lambda == 0.0 {
            return 0.0;
        }
        let s: f64 = x
            .iter()
            .zip(self.penalized)
            .filter(|(_, &p)| p)
            .map(|(v, _)| 0.5 * (1.0 - self.alpha) * v * v + self.alpha * v.abs())
            .sum();
        self.lambda * s
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 10_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverOutcome {
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
}

pub(crate) fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
const MAX_CD_SWEEPS: usize = 2000;

/// Minimises `f(x) + pen(x)` in place, starting from `x`.
pub fn minimize<F: SmoothObjective>(
    f: &F,
    pen: &ElasticNet<'_>,
    x: &mut [f64],
    opts: &SolverOptions,
) -> SolverOutcome {
    let d = f.dim();
    debug_assert_eq!(x.len(), d);
    debug_assert_eq!(pen.penalized.len(), d);
    let mut grad = vec![0.0; d];
    let mut hess = vec![0.0; d * d];
    let mut u = vec![0.0; d];
    let mut r = vec![0.0; d];
    let mut trial = vec![0.0; d];
    let l1 = pen.lambda * pen.alpha;
    let l2 = pen.lambda * (1.0 - pen.alpha);
    let inner_tol = 0.1 * opts.tol;

    let mut smooth = f.evaluate(x, &mut grad, &mut hess);
    let mut total = smooth + pen.value(x);
    for iter in 1..=opts.max_iter {
        // inner coordinate descent on the quadratic model; r = H (u - x)
        u.copy_from_slice(x);
        r.iter_mut().for_each(|v| *v = 0.0);
        for _ in 0..MAX_CD_SWEEPS {
            let mut max_change = 0.0f64;
            for j in 0..d {
                let hjj = hess[j * d + j];
                if hjj <= 0.0 {
                    continue;
                }
                let gj = grad[j] + r[j];
                let new = if pen.penalized[j] {
                    soft_threshold(hjj * u[j] - gj, l1) / (hjj + l2)
                } else {
                    u[j] - gj / hjj
                };
                let delta = new - u[j];
                if delta != 0.0 {
                    u[j] = new;
                    let row = &hess[j * d..(j + 1) * d];
                    for (rk, hk) in r.iter_mut().zip(row) {
                        *rk += hk * delta;
                    }
                    max_change = max_change.max(delta.abs());
                }
            }
            if max_change < inner_tol {
                break;
            }
        }

        // decrease predicted by the model, used by the Armijo test
        let mut predicted = pen.value(&u) - pen.value(x);
        let mut max_step = 0.0f64;
        for j in 0..d {
            let dj = u[j] - x[j];
            predicted += grad[j] * dj;
            max_step = max_step.max(dj.abs());
        }
        if max_step < opts.tol {
            return SolverOutcome {
                iterations: iter,
                converged: true,
                objective: total,
            };
        }

        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            for j in 0..d {
                trial[j] = x[j] + t * (u[j] - x[j]);
            }
            let value = f.value(&trial) + pen.value(&trial);
            if value <= total + ARMIJO * t * predicted.min(0.0) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // no descent possible at floating-point resolution
            return SolverOutcome {
                iterations: iter,
                converged: max_step * t < opts.tol.sqrt(),
                objective: total,
            };
        }
        x.copy_from_slice(&trial);
        smooth = f.evaluate(x, &mut grad, &mut hess);
        total = smooth + pen.value(x);
        if t * max_step < opts.tol {
            return SolverOutcome {
                iterations: iter,
                converged: true,
                objective: total,
            };
        }
    }
    SolverOutcome {
        iterations: opts.max_iter,
        converged: false,
        objective: total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// `0.5 (x - c)' A (x - c)`.
    struct Quadratic {
        a: Vec<f64>,
        c: Vec<f64>,
    }

    impl SmoothObjective for Quadratic {
        fn dim(&self) -> usize {
            self.c.len()
        }

        fn value(&self, x: &[f64]) -> f64 {
            let d = self.dim();
            let mut v = 0.0;
            for i in 0..d {
                for j in 0..d {
                    v += 0.5 * (x[i] - self.c[i]) * self.a[i * d + j] * (x[j] - self.c[j]);
                }
            }
            v
        }

        fn evaluate(&self, x: &[f64], grad: &mut [f64], hess: &mut [f64]) -> f64 {
            let d = self.dim();
            hess.copy_from_slice(&self.a);
            for i in 0..d {
                grad[i] = (0..d).map(|j| self.a[i * d + j] * (x[j] - self.c[j])).sum();
            }
            self.value(x)
        }
    }

    #[test]
    fn separable_lasso_is_soft_thresholding() {
        let f = Quadratic {
            a: vec![1.0, 0.0, 0.0, 1.0],
            c: vec![2.0, 0.3],
        };
        let mask = [true, true];
        let pen = ElasticNet {
            lambda: 0.5,
            alpha: 1.0,
            penalized: &mask,
        };
        let mut x = vec![0.0; 2];
        let out = minimize(&f, &pen, &mut x, &SolverOptions::default());
        assert!(out.converged);
        assert_abs_diff_eq!(x[0], 1.5, epsilon = 1e-10);
        assert_eq!(x[1], 0.0);
    }

    #[test]
    fn ridge_and_unpenalized_coordinates() {
        let f = Quadratic {
            a: vec![2.0, 0.5, 0.5, 1.0],
            c: vec![1.0, -1.0],
        };
        let mask = [false, true];
        let pen = ElasticNet {
            lambda: 1.0,
            alpha: 0.0,
            penalized: &mask,
        };
        let mut x = vec![0.0; 2];
        minimize(&f, &pen, &mut x, &SolverOptions::default());
        // stationarity: A (x - c) + (0, x_1) = 0
        let g0 = 2.0 * (x[0] - 1.0) + 0.5 * (x[1] + 1.0);
        let g1 = 0.5 * (x[0] - 1.0) + (x[1] + 1.0) + x[1];
        assert_abs_diff_eq!(g0, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(g1, 0.0, epsilon = 1e-9);
    }
}
