//! Hilbert projective metric, projective diameter and contraction
//! certificates.

use crate::cone::{ConeOracle, COMPARABILITY_FLOOR};
use crate::error::ConeError;
use crate::linalg::Matrix;
use crate::operator::PositiveOperator;
use crate::optim::nelder_mead;
use crate::rng::Rng;

/// Hilbert distance between two cone points: `log(beta_min / alpha_max)`.
///
/// Infinite iff the points are not comparable; zero iff they are projectively
/// equal. Errors when either input fails the cone membership test.
pub fn hilbert_distance(cone: &dyn ConeOracle, x: &[f64], y: &[f64]) -> Result<f64, ConeError> {
    cone.require_member(x)?;
    cone.require_member(y)?;
    Ok(hilbert_distance_unchecked(cone, x, y))
}

/// Same as [`hilbert_distance`] but assumes membership was already verified.
pub fn hilbert_distance_unchecked(cone: &dyn ConeOracle, x: &[f64], y: &[f64]) -> f64 {
    let alpha = cone.alpha_max(x, y);
    let beta = cone.beta_min(x, y);
    if alpha <= COMPARABILITY_FLOOR || !beta.is_finite() {
        return f64::INFINITY;
    }
    // Guard against tiny negative values from roundoff at projective equality.
    (beta / alpha).ln().max(0.0)
}

/// Result of a projective-diameter computation.
#[derive(Debug, Clone)]
pub struct DiameterEstimate {
    pub value: f64,
    /// True when the value is exact (orthant column formula); false for a
    /// sampled lower bound.
    pub exact: bool,
    /// Pair of column/ray indices realizing the reported value, or the
    /// offending column when the diameter is infinite.
    pub witness: Option<(usize, usize)>,
}

/// Exact projective diameter of a nonnegative kernel on the orthant: the
/// image cone is spanned by the columns, so the diameter is the maximum
/// Hilbert distance over column pairs.
pub fn orthant_diameter(kernel: &Matrix) -> DiameterEstimate {
    let n = kernel.cols();
    // A zero column is an image on the cone boundary: diameter infinite.
    for j in 0..n {
        if (0..kernel.rows()).all(|i| kernel[(i, j)] <= 0.0) {
            return DiameterEstimate {
                value: f64::INFINITY,
                exact: true,
                witness: Some((j, j)),
            };
        }
    }
    let mut best = 0.0f64;
    let mut witness = None;
    for j in 0..n {
        for k in (j + 1)..n {
            let d = column_distance(kernel, j, k);
            if d > best {
                best = d;
                witness = Some((j, k));
            }
            if d.is_infinite() {
                return DiameterEstimate {
                    value: f64::INFINITY,
                    exact: true,
                    witness: Some((j, k)),
                };
            }
        }
    }
    DiameterEstimate {
        value: best,
        exact: true,
        witness,
    }
}

fn column_distance(kernel: &Matrix, j: usize, k: usize) -> f64 {
    let mut rmax = 0.0f64;
    let mut rmin = f64::INFINITY;
    for i in 0..kernel.rows() {
        let a = kernel[(i, j)];
        let b = kernel[(i, k)];
        if a > COMPARABILITY_FLOOR {
            let r = b / a;
            rmax = rmax.max(r);
            rmin = rmin.min(r);
        } else if b > COMPARABILITY_FLOOR {
            return f64::INFINITY;
        }
    }
    if rmin <= COMPARABILITY_FLOOR || rmin == f64::INFINITY {
        return f64::INFINITY;
    }
    (rmax / rmin).ln().max(0.0)
}

/// Projective diameter of an operator image.
///
/// Uses the cone's exact formula when available (the orthant), otherwise a
/// sampled lower estimate over `budget` ray pairs, flagged `exact: false`.
pub fn projective_diameter(
    op: &PositiveOperator,
    cone: &dyn ConeOracle,
    budget: usize,
    seed: u64,
) -> DiameterEstimate {
    if let Some(est) = cone.exact_operator_diameter(&op.kernel) {
        return est;
    }
    let mut rng = Rng::new(seed);
    let mut best = 0.0f64;
    let mut witness = None;
    for trial in 0..budget {
        let x = cone.sample_ray(&mut rng);
        let y = cone.sample_ray(&mut rng);
        let tx = op.apply(&x);
        let ty = op.apply(&y);
        let d = {
            let alpha = cone.alpha_max(&tx, &ty);
            let beta = cone.beta_min(&tx, &ty);
            if alpha <= COMPARABILITY_FLOOR || !beta.is_finite() {
                f64::INFINITY
            } else {
                (beta / alpha).ln().max(0.0)
            }
        };
        if d > best {
            best = d;
            witness = Some((trial, trial));
        }
        if d.is_infinite() {
            return DiameterEstimate {
                value: f64::INFINITY,
                exact: false,
                witness,
            };
        }
    }
    DiameterEstimate {
        value: best,
        exact: false,
        witness,
    }
}

/// Birkhoff contraction certificate: tanh(Δ/4), and 1 when the diameter is
/// infinite (no contraction certified).
pub fn contraction_bound(diameter: f64) -> f64 {
    if !diameter.is_finite() {
        1.0
    } else {
        (diameter / 4.0).tanh()
    }
}

/// Empirical contraction measurement over sampled comparable pairs.
#[derive(Debug, Clone)]
pub struct ContractionEstimate {
    /// sup of d(Tx, Ty) / d(x, y) over the sampled pairs.
    pub ratio: f64,
    pub pairs_used: usize,
}

pub fn measured_contraction(
    op: &PositiveOperator,
    cone: &dyn ConeOracle,
    pairs: usize,
    seed: u64,
) -> Result<ContractionEstimate, ConeError> {
    let mut rng = Rng::new(seed);
    let mut sup = 0.0f64;
    let mut used = 0;
    for _ in 0..pairs {
        let x = cone.sample_ray(&mut rng);
        let y = cone.sample_ray(&mut rng);
        let d = hilbert_distance_unchecked(cone, &x, &y);
        if !d.is_finite() || d < 1e-12 {
            continue;
        }
        let tx = op.apply(&x);
        let ty = op.apply(&y);
        let dt = hilbert_distance_unchecked(cone, &tx, &ty);
        let ratio = if dt.is_finite() { dt / d } else { f64::INFINITY };
        if ratio > sup {
            sup = ratio;
        }
        used += 1;
    }
    if used == 0 {
        return Err(ConeError::Indeterminate { attempts: pairs });
    }
    Ok(ContractionEstimate {
        ratio: sup,
        pairs_used: used,
    })
}

/// Local norm at an interior orthant point `x0` applied to a displacement:
/// `max_i(s_i / x0_i) + max_i(−s_i / x0_i)`. First-order model of the Hilbert
/// distance `d(x0, x0 + s)` for small `s`.
pub fn local_norm(x0: &[f64], s: &[f64]) -> Result<f64, ConeError> {
    if x0.len() != s.len() {
        return Err(ConeError::Dimension {
            expected: x0.len(),
            got: s.len(),
        });
    }
    let mut up = f64::NEG_INFINITY;
    let mut down = f64::NEG_INFINITY;
    for (i, (&xi, &si)) in x0.iter().zip(s).enumerate() {
        if xi <= 0.0 {
            return Err(ConeError::NotInterior {
                context: "local_norm base point".into(),
                index: i,
            });
        }
        up = up.max(si / xi);
        down = down.max(-si / xi);
    }
    Ok(up + down)
}

/// Local Lipschitz ratio of the projective map induced by `op` at interior
/// point `x` in direction `s`: `N_{Tx}(Ts) / N_x(s)` in the local norms.
fn local_ratio(op: &PositiveOperator, x: &[f64], s: &[f64]) -> f64 {
    let nx = match local_norm(x, s) {
        Ok(v) if v > 1e-14 => v,
        _ => return 0.0,
    };
    let tx = op.apply(x);
    if tx.iter().any(|&v| v <= 0.0) {
        return 0.0;
    }
    let ts = op.apply(s);
    match local_norm(&tx, &ts) {
        Ok(ntx) => ntx / nx,
        Err(_) => 0.0,
    }
}

/// Sharpened contraction measurement for orthant operators: multistart
/// Nelder-Mead over (interior point, displacement direction) maximizing the
/// local Lipschitz ratio. The supremum of this ratio over the interior is the
/// true contraction ratio, so the refined value approaches tanh(Δ/4) from
/// below.
pub fn refine_contraction_orthant(
    op: &PositiveOperator,
    restarts: usize,
    iters: usize,
    seed: u64,
) -> f64 {
    let n = op.kernel.cols();
    let mut rng = Rng::new(seed);
    let mut best = 0.0f64;
    for _ in 0..restarts {
        let x0: Vec<f64> = (0..n).map(|_| rng.range(-1.5, 1.5)).collect();
        let s0: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let start: Vec<f64> = x0.iter().chain(&s0).copied().collect();
        let objective = |p: &[f64]| -> f64 {
            let x: Vec<f64> = p[..n].iter().map(|u| u.exp()).collect();
            let s = &p[n..];
            -local_ratio(op, &x, s)
        };
        let (pbest, fbest) = nelder_mead(&objective, &start, 0.5, iters);
        let _ = pbest;
        best = best.max(-fbest);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::OrthantCone;

    fn op(rows: &[&[f64]]) -> PositiveOperator {
        PositiveOperator::new(Matrix::from_rows(rows)).unwrap()
    }

    #[test]
    fn distance_log2_example() {
        let cone = OrthantCone::new(2);
        let d = hilbert_distance(&cone, &[1.0, 1.0], &[2.0, 1.0]).unwrap();
        assert!((d - 2.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn distance_zero_on_ray() {
        let cone = OrthantCone::new(2);
        let d = hilbert_distance(&cone, &[3.0, 7.0], &[3.0, 7.0]).unwrap();
        assert_eq!(d, 0.0);
        // projective equality at different scales
        let d = hilbert_distance(&cone, &[3.0, 7.0], &[6.0, 14.0]).unwrap();
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn distance_two_log_ten() {
        let cone = OrthantCone::new(2);
        let d = hilbert_distance(&cone, &[1.0, 0.1], &[0.1, 1.0]).unwrap();
        assert!((d - 2.0 * 10.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn distance_rejects_nonmember() {
        let cone = OrthantCone::new(2);
        let err = hilbert_distance(&cone, &[1.0, -1.0], &[1.0, 1.0]).unwrap_err();
        match err {
            ConeError::NotInCone { condition, .. } => assert!(condition.contains("entry 1")),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn diameter_examples() {
        // epsilon-coupled kernel at unit diagonal weight
        let t = op(&[&[1.0, 0.1], &[0.1, 1.0]]);
        let d = orthant_diameter(&t.kernel);
        assert!(d.exact);
        assert!((d.value - 2.0 * 10.0f64.ln()).abs() < 1e-12);

        // rank-one positive matrix: all columns projectively equal
        let r1 = op(&[&[2.0, 4.0], &[1.0, 2.0]]);
        assert!(orthant_diameter(&r1.kernel).value.abs() < 1e-12);

        // identity: disjoint supports
        let id = op(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let d = orthant_diameter(&id.kernel);
        assert!(d.value.is_infinite());
        assert!(d.witness.is_some());
    }

    #[test]
    fn zero_column_reports_index() {
        let t = op(&[&[1.0, 0.0], &[2.0, 0.0]]);
        let d = orthant_diameter(&t.kernel);
        assert!(d.value.is_infinite());
        assert_eq!(d.witness, Some((1, 1)));
    }

    #[test]
    fn contraction_bound_values() {
        assert_eq!(contraction_bound(0.0), 0.0);
        assert_eq!(contraction_bound(f64::INFINITY), 1.0);
        let d = 2.0 * 10.0f64.ln();
        assert!((contraction_bound(d) - 0.9 / 1.1).abs() < 1e-12);
        assert!((contraction_bound(4.0) - 1.0f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn measured_below_birkhoff_bound() {
        let t = op(&[&[1.0, 0.1], &[0.1, 1.0]]);
        let cone = OrthantCone::new(2);
        let est = measured_contraction(&t, &cone, 10_000, 11).unwrap();
        let bound = contraction_bound(orthant_diameter(&t.kernel).value);
        assert!(est.ratio <= bound + 1e-9, "{} > {}", est.ratio, bound);
        assert!(est.ratio > 0.5 * bound);
    }

    #[test]
    fn rank_one_contracts_to_zero() {
        let t = op(&[&[2.0, 4.0], &[1.0, 2.0]]);
        let cone = OrthantCone::new(2);
        let est = measured_contraction(&t, &cone, 500, 3).unwrap();
        assert!(est.ratio < 1e-9);
    }

    #[test]
    fn refinement_approaches_bound() {
        let t = op(&[&[1.0, 0.1], &[0.1, 1.0]]);
        let bound = contraction_bound(orthant_diameter(&t.kernel).value);
        let refined = refine_contraction_orthant(&t, 8, 200, 5);
        assert!(refined <= bound + 1e-9);
        assert!(refined >= 0.9 * bound, "refined {refined} vs bound {bound}");
    }

    #[test]
    fn local_norm_examples() {
        assert_eq!(local_norm(&[1.0, 1.0], &[1.0, -1.0]).unwrap(), 2.0);
        assert_eq!(local_norm(&[1.0, 1.0], &[0.0, 0.0]).unwrap(), 0.0);
        assert!((local_norm(&[2.0, 4.0], &[1.0, -2.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(local_norm(&[1.0, 0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn local_norm_first_order_agreement() {
        let cone = OrthantCone::new(3);
        let mut rng = Rng::new(17);
        for _ in 0..200 {
            let x0 = rng.positive_vector(3, 2.0);
            let mut s: Vec<f64> = (0..3).map(|_| rng.normal()).collect();
            // scale so the local norm is at most 0.01
            let n0 = local_norm(&x0, &s).unwrap();
            if n0 < 1e-12 {
                continue;
            }
            let target = 0.01 * rng.f64();
            for v in s.iter_mut() {
                *v *= target / n0;
            }
            let nn = local_norm(&x0, &s).unwrap();
            let xs: Vec<f64> = x0.iter().zip(&s).map(|(a, b)| a + b).collect();
            let d = hilbert_distance(&cone, &x0, &xs).unwrap();
            assert!(
                (d - nn).abs() <= 0.05 * nn + 1e-14,
                "d = {d}, norm = {nn}"
            );
        }
    }
}
