//! Constructive rank-one compression of contracting operators.
//!
//! For an operator `T` with finite projective diameter Δ and any ray `y0`,
//! the operator `L = z ⊗ l` with `z = T(y0)` and a linear form `l` sandwiched
//! between the envelope functionals
//!
//! ```text
//! a(x) = max{α : α z ≤ T(x)},    b(x) = min{β : T(x) ≤ β z}
//! ```
//!
//! satisfies `d_P(T, L) ≤ 2Δ(T)`. In the discretized orthant a valid linear
//! form is the ratio of a fixed output coordinate: `l(x) = (Tx)_{i0} / z_{i0}`
//! — it is one of the coordinate ratios, hence between their minimum `a(x)`
//! and maximum `b(x)` by construction. The row `i0` maximizing `z` is used
//! for conditioning.
//!
//! For an ordered chain with `Δ(T_0) ≤ R` and every later factor
//! κ-contracting, the same construction applied to the full product carries
//! the certificate `d_P(T_{N-1}…T_0, z ⊗ l) ≤ 2 κ^{N-1} R`.

use crate::error::ConeError;
use crate::linalg::Matrix;
use crate::metric::{contraction_bound, orthant_diameter};
use crate::operator::{operator_distance_orthant, PositiveOperator};

/// Rank-one operator `x ↦ z · l(x)` with a certified distance bound to the
/// operator it approximates.
#[derive(Debug, Clone)]
pub struct RankOneOperator {
    pub z: Vec<f64>,
    /// Weight vector of the linear functional `l`.
    pub functional: Vec<f64>,
    /// Claimed bound on `d_P` to the approximated operator.
    pub certificate: f64,
}

impl RankOneOperator {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let lx = crate::linalg::dot(&self.functional, x);
        self.z.iter().map(|&zi| zi * lx).collect()
    }

    pub fn evaluate_functional(&self, x: &[f64]) -> f64 {
        crate::linalg::dot(&self.functional, x)
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.z.len(), self.functional.len(), |i, j| {
            self.z[i] * self.functional[j]
        })
    }

    pub fn as_operator(&self) -> PositiveOperator {
        PositiveOperator::new_unchecked(self.to_matrix())
    }
}

/// Envelope functionals of the rank-one construction on the orthant:
/// `(a(x), b(x))` = (min, max) over output coordinates of `(Tx)_i / z_i`.
pub fn envelopes(op: &PositiveOperator, z: &[f64], x: &[f64]) -> (f64, f64) {
    let tx = op.apply(x);
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (&ti, &zi) in tx.iter().zip(z) {
        if zi > 0.0 {
            let r = ti / zi;
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    (lo, hi)
}

/// Builds the rank-one approximation of `op` seeded at `y0`, with
/// certificate `2·Δ(op)`. Refuses when the projective diameter is infinite,
/// and verifies the certificate against the exact entrywise-ratio distance.
pub fn rank_one_approx(
    op: &PositiveOperator,
    y0: &[f64],
) -> Result<RankOneOperator, ConeError> {
    let diameter = orthant_diameter(&op.kernel);
    if !diameter.value.is_finite() {
        return Err(ConeError::InfiniteDiameter {
            witness: format!("column pair {:?}", diameter.witness),
        });
    }
    build_with_certificate(op, y0, 2.0 * diameter.value)
}

fn build_with_certificate(
    op: &PositiveOperator,
    y0: &[f64],
    certificate: f64,
) -> Result<RankOneOperator, ConeError> {
    let z = op.apply(y0);
    let (i0, zmax) = z
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .expect("nonempty output");
    if *zmax <= 0.0 {
        return Err(ConeError::NotInterior {
            context: "rank-one pivot z = T(y0)".into(),
            index: i0,
        });
    }
    let functional: Vec<f64> = op.kernel.row(i0).iter().map(|&v| v / zmax).collect();
    let approx = RankOneOperator {
        z,
        functional,
        certificate,
    };
    let measured = operator_distance_orthant(op, &approx.as_operator());
    if measured > certificate + 1e-9 {
        return Err(ConeError::CertificateFailure {
            stage: 0,
            detail: format!("measured d_P {measured:.6e} exceeds certificate {certificate:.6e}"),
        });
    }
    Ok(approx)
}

/// Rank-one approximation of the ordered product `ops[N-1] ⋯ ops[0]` with
/// certificate `2 κ^{N-1} R`.
///
/// Requires `Δ(ops[0]) ≤ r_bound` and every subsequent factor certified
/// κ-contracting via its Birkhoff bound; failures name the stage.
pub fn rank_one_chain(
    ops: &[PositiveOperator],
    r_bound: f64,
    kappa: f64,
    y0: &[f64],
) -> Result<RankOneOperator, ConeError> {
    if ops.is_empty() {
        return Err(ConeError::InvalidParameter {
            name: "ops",
            value: 0.0,
            requirement: "chain must contain at least one operator",
        });
    }
    let d0 = orthant_diameter(&ops[0].kernel).value;
    if !(d0 <= r_bound + 1e-9) {
        return Err(ConeError::CertificateFailure {
            stage: 0,
            detail: format!("diameter {d0:.6e} exceeds bound R = {r_bound:.6e}"),
        });
    }
    for (i, op) in ops.iter().enumerate().skip(1) {
        let kappa_i = contraction_bound(orthant_diameter(&op.kernel).value);
        if !(kappa_i <= kappa + 1e-9) {
            return Err(ConeError::CertificateFailure {
                stage: i,
                detail: format!(
                    "Birkhoff bound {kappa_i:.6} exceeds required contraction {kappa:.6}"
                ),
            });
        }
    }
    let mut product = ops[0].clone();
    for op in &ops[1..] {
        product = op.compose(&product);
    }
    let certificate = 2.0 * kappa.powi(ops.len() as i32 - 1) * r_bound;
    build_with_certificate(&product, y0, certificate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn op(rows: &[&[f64]]) -> PositiveOperator {
        PositiveOperator::new(Matrix::from_rows(rows)).unwrap()
    }

    #[test]
    fn exact_on_rank_one_input() {
        let t = op(&[&[2.0, 4.0], &[1.0, 2.0]]);
        let approx = rank_one_approx(&t, &[1.0, 1.0]).unwrap();
        let d = operator_distance_orthant(&t, &approx.as_operator());
        assert!(d < 1e-12, "distance {d}");
    }

    #[test]
    fn epsilon_kernel_certificate() {
        let t = op(&[&[1.0, 0.1], &[0.1, 1.0]]);
        let approx = rank_one_approx(&t, &[1.0, 1.0]).unwrap();
        let two_delta = 4.0 * 10.0f64.ln();
        assert!((approx.certificate - two_delta).abs() < 1e-12);
        let d = operator_distance_orthant(&t, &approx.as_operator());
        assert!(d <= two_delta + 1e-9);
    }

    #[test]
    fn refuses_infinite_diameter() {
        let t = op(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(
            rank_one_approx(&t, &[1.0, 1.0]),
            Err(ConeError::InfiniteDiameter { .. })
        ));
    }

    #[test]
    fn envelope_sandwich_on_random_matrices() {
        let mut rng = Rng::new(31);
        for _ in 0..20 {
            let t = PositiveOperator::new(Matrix::from_fn(4, 4, |_, _| rng.range(0.05, 1.0)))
                .unwrap();
            let approx = rank_one_approx(&t, &[1.0, 1.0, 1.0, 1.0]).unwrap();
            for _ in 0..50 {
                let x = rng.positive_vector(4, 5.0);
                let (a, b) = envelopes(&t, &approx.z, &x);
                let l = approx.evaluate_functional(&x);
                assert!(l >= 0.0);
                assert!(
                    a - 1e-12 <= l && l <= b + 1e-12,
                    "envelope violated: a={a} l={l} b={b}"
                );
            }
        }
    }

    #[test]
    fn chain_reduces_to_single_approx() {
        let t = op(&[&[1.0, 0.1], &[0.1, 1.0]]);
        let delta = orthant_diameter(&t.kernel).value;
        let kappa = contraction_bound(delta);
        let single = rank_one_approx(&t, &[1.0, 1.0]).unwrap();
        let chain = rank_one_chain(std::slice::from_ref(&t), delta, kappa, &[1.0, 1.0]).unwrap();
        assert_eq!(single.z, chain.z);
        assert_eq!(single.functional, chain.functional);
        assert!((chain.certificate - 2.0 * delta).abs() < 1e-12);
    }

    #[test]
    fn chain_certificate_decays_geometrically() {
        let t = op(&[&[1.0, 0.1], &[0.1, 1.0]]);
        let delta = orthant_diameter(&t.kernel).value;
        let kappa = contraction_bound(delta);
        let mut prev = f64::INFINITY;
        for n in 1..=10 {
            let ops: Vec<PositiveOperator> = (0..n).map(|_| t.clone()).collect();
            let approx = rank_one_chain(&ops, delta, kappa, &[1.0, 1.0]).unwrap();
            let mut product = ops[0].clone();
            for o in &ops[1..] {
                product = o.compose(&product);
            }
            let measured = operator_distance_orthant(&product, &approx.as_operator());
            assert!(measured <= approx.certificate + 1e-9);
            assert!(approx.certificate < prev);
            prev = approx.certificate;
        }
    }

    #[test]
    fn chain_failure_names_stage() {
        let good = op(&[&[1.0, 0.1], &[0.1, 1.0]]);
        let bad = op(&[&[1.0, 0.0], &[0.0, 1.0]]); // infinite diameter, not contracting
        let delta = orthant_diameter(&good.kernel).value;
        let kappa = contraction_bound(delta);
        let err = rank_one_chain(
            &[good.clone(), bad, good],
            delta,
            kappa,
            &[1.0, 1.0],
        )
        .unwrap_err();
        match err {
            ConeError::CertificateFailure { stage, .. } => assert_eq!(stage, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn random_chain_certificates_hold() {
        let mut rng = Rng::new(77);
        for _ in 0..10 {
            let ops: Vec<PositiveOperator> = (0..6)
                .map(|_| {
                    PositiveOperator::new(Matrix::from_fn(3, 3, |_, _| rng.range(0.1, 1.0)))
                        .unwrap()
                })
                .collect();
            let r = ops
                .iter()
                .map(|o| orthant_diameter(&o.kernel).value)
                .fold(0.0f64, f64::max);
            let kappa = contraction_bound(r);
            let approx = rank_one_chain(&ops, r, kappa, &[1.0, 1.0, 1.0]).unwrap();
            let mut product = ops[0].clone();
            for o in &ops[1..] {
                product = o.compose(&product);
            }
            let measured = operator_distance_orthant(&product, &approx.as_operator());
            assert!(measured <= approx.certificate + 1e-9);
        }
    }
}
