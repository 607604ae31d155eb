//! Taylor majorant for iterated compositions of uniformly contracting
//! analytic maps: the coefficients of `(1 − r x) / ((1 − κ) − r x)` dominate
//! the coefficients produced by the iteration, so summability of the
//! majorant yields analyticity with convergence radius at least `(1 − κ)/r`.

use crate::error::ChainError;

/// Coefficients `d_0..=d_n_max` of `(1 − r x) / ((1 − κ) − r x)`:
/// `d_0 = 1/(1−κ)` and `d_n = κ rⁿ / (1−κ)^{n+1}` for n ≥ 1.
pub fn analyticity_majorant(r: f64, kappa: f64, n_max: usize) -> Result<Vec<f64>, ChainError> {
    if !(0.0..1.0).contains(&kappa) {
        return Err(ChainError::InvalidParameter {
            name: "kappa",
            value: kappa,
            requirement: "contraction parameter must lie in [0, 1)",
        });
    }
    if r < 0.0 {
        return Err(ChainError::InvalidParameter {
            name: "r",
            value: r,
            requirement: "growth scale must be nonnegative",
        });
    }
    let one_minus = 1.0 - kappa;
    let mut coeffs = Vec::with_capacity(n_max + 1);
    coeffs.push(1.0 / one_minus);
    let mut r_pow = 1.0;
    for n in 1..=n_max {
        r_pow *= r;
        coeffs.push(kappa * r_pow / one_minus.powi(n as i32 + 1));
    }
    Ok(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent route: multiply the geometric series of
    /// `1/((1−κ) − r x)` by `(1 − r x)` term by term.
    fn series_oracle(r: f64, kappa: f64, n_max: usize) -> Vec<f64> {
        let one_minus = 1.0 - kappa;
        // 1/((1−κ) − r x) = Σ rⁿ/(1−κ)^{n+1} xⁿ
        let geo: Vec<f64> = (0..=n_max + 1)
            .map(|n| r.powi(n as i32) / one_minus.powi(n as i32 + 1))
            .collect();
        (0..=n_max)
            .map(|n| {
                if n == 0 {
                    geo[0]
                } else {
                    geo[n] - r * geo[n - 1]
                }
            })
            .collect()
    }

    #[test]
    fn kappa_zero_is_constant_one() {
        let coeffs = analyticity_majorant(2.0, 0.0, 6).unwrap();
        assert_eq!(coeffs[0], 1.0);
        for &c in &coeffs[1..] {
            assert_eq!(c, 0.0);
        }
    }

    #[test]
    fn r_zero_is_constant() {
        let coeffs = analyticity_majorant(0.0, 0.4, 6).unwrap();
        assert!((coeffs[0] - 1.0 / 0.6).abs() < 1e-15);
        for &c in &coeffs[1..] {
            assert_eq!(c, 0.0);
        }
    }

    #[test]
    fn matches_symbolic_expansion() {
        for (r, kappa) in [(1.0, 0.5), (0.7, 0.25), (2.5, 0.9)] {
            let ours = analyticity_majorant(r, kappa, 10).unwrap();
            let oracle = series_oracle(r, kappa, 10);
            for (a, b) in ours.iter().zip(&oracle) {
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn explicit_half_case() {
        // (1 − x)/(0.5 − x) = 2 + 2x + 4x² + 8x³ + …
        let coeffs = analyticity_majorant(1.0, 0.5, 5).unwrap();
        let expect = [2.0, 2.0, 4.0, 8.0, 16.0, 32.0];
        for (c, e) in coeffs.iter().zip(&expect) {
            assert!((c - e).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_kappa_one() {
        assert!(analyticity_majorant(1.0, 1.0, 3).is_err());
        assert!(analyticity_majorant(-0.5, 0.5, 3).is_err());
    }
}
