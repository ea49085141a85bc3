//! Gauss–Hermite rules for integrals against the weight `exp(-t^2)`.

/// Nodes and weights of the `n`-point rule, nodes in descending order.
///
/// Roots of the Hermite polynomial are refined by Newton's method on the
/// orthonormal three-term recurrence, which stays well scaled for large `n`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature needs at least one node");
    // pi^(-1/4)
    const PIM4: f64 = 0.751_125_544_464_942_5;
    let nf = n as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = 0.0_f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-0.166_67),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = PIM4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z_prev = z;
            z = z_prev - p1 / pp;
            if (z - z_prev).abs() <= 1e-15 * z_prev.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn integrates_even_moments_exactly() {
        let (x, w) = gauss_hermite(40);
        let sum: f64 = w.iter().sum();
        assert_relative_eq!(sum, PI.sqrt(), max_relative = 1e-13);
        // int t^{2k} e^{-t^2} = Gamma(k + 1/2)
        let mut gamma = PI.sqrt();
        for k in 1..20 {
            gamma *= k as f64 - 0.5;
            let m: f64 = x.iter().zip(&w).map(|(t, wi)| wi * t.powi(2 * k as i32)).sum();
            assert_relative_eq!(m, gamma, max_relative = 1e-10);
        }
        let odd: f64 = x.iter().zip(&w).map(|(t, wi)| wi * t.powi(3)).sum();
        assert!(odd.abs() < 1e-12);
    }

    #[test]
    fn exponential_tilt() {
        // int exp(-t^2 + b t) dt = sqrt(pi) exp(b^2 / 4)
        let (x, w) = gauss_hermite(40);
        for &b in &[0.3, 1.7, 4.0, -6.0] {
            let q: f64 = x.iter().zip(&w).map(|(t, wi)| wi * (b * t).exp()).sum();
            assert_relative_eq!(q, PI.sqrt() * (b * b / 4.0_f64).exp(), max_relative = 1e-12);
        }
    }

    #[test]
    fn small_rules() {
        let (x, w) = gauss_hermite(1);
        assert_eq!(x, vec![0.0]);
        assert_relative_eq!(w[0], PI.sqrt(), max_relative = 1e-14);
        let (x, w) = gauss_hermite(2);
        assert_relative_eq!(x[0], 0.5f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(w[0], PI.sqrt() / 2.0, max_relative = 1e-14);
    }
}
