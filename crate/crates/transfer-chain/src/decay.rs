//! Two-point decay band: on a chain certified with diameter bound R and
//! contraction κ, the ratio of the joint two-point correlation to the
//! product of one-point correlations lies inside
//! `exp(±8R(κ^{K1} + κ^{K2−K1} + κ^{M−K2}))`.

use crate::chain::{ChainModel, Insertion};
use crate::error::ChainError;

#[derive(Debug, Clone)]
pub struct DecayBandReport {
    pub k1: usize,
    pub k2: usize,
    pub joint: f64,
    pub single_x: f64,
    pub single_y: f64,
    /// joint / (single_x · single_y); 1 means perfect factorization.
    pub ratio: f64,
    pub lower_band: f64,
    pub upper_band: f64,
    pub within_band: bool,
    /// Set when a one-point density vanishes and the ratio is undefined.
    pub indeterminate: bool,
}

/// A vanishing inserted bracket surfaces as an underflow in the rescaled
/// product; for correlation purposes that is an exact zero.
fn correlation_or_zero(chain: &ChainModel, insertions: &[Insertion]) -> Result<f64, ChainError> {
    match chain.correlation(insertions) {
        Ok(v) => Ok(v),
        Err(ChainError::Underflow { .. }) => Ok(0.0),
        Err(ChainError::NonPositivePartition { value }) if value == 0.0 => Ok(0.0),
        Err(e) => Err(e),
    }
}

pub fn decay_band_check(
    chain: &ChainModel,
    x: &Insertion,
    y: &Insertion,
    ) -> Result<DecayBandReport, ChainError> {
    let (k1, k2) = (x.position, y.position);
    if k1 >= k2 {
        return Err(ChainError::InvalidInsertion(format!(
            "need K1 < K2, got {k1} >= {k2}"
        )));
    }
    let m = chain.len();
    if k2 > m {
        return Err(ChainError::InvalidInsertion(format!(
            "K2 = {k2} outside chain with {m} operators"
        )));
    }
    let joint = correlation_or_zero(chain, &[x.clone(), y.clone()])?;
    let single_x = correlation_or_zero(chain, std::slice::from_ref(x))?;
    let single_y = correlation_or_zero(chain, std::slice::from_ref(y))?;

    let r = chain.diameter_bound;
    let kappa = chain.contraction;
    let exponent = 8.0
        * r
        * (kappa.powi(k1 as i32)
            + kappa.powi((k2 - k1) as i32)
            + kappa.powi((m - k2) as i32));
    let lower_band = (-exponent).exp();
    let upper_band = exponent.exp();

    if single_x <= 0.0 || single_y <= 0.0 {
        return Ok(DecayBandReport {
            k1,
            k2,
            joint,
            single_x,
            single_y,
            ratio: f64::NAN,
            lower_band,
            upper_band,
            within_band: false,
            indeterminate: true,
        });
    }
    let ratio = joint / (single_x * single_y);
    Ok(DecayBandReport {
        k1,
        k2,
        joint,
        single_x,
        single_y,
        ratio,
        lower_band,
        upper_band,
        within_band: ratio >= lower_band && ratio <= upper_band,
        indeterminate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use cone_core::linalg::Matrix;
    use cone_core::metric::{contraction_bound, orthant_diameter};
    use cone_core::operator::PositiveOperator;
    use cone_core::stats::fit_geometric_rate;

    fn two_state_chain(beta: f64, eps: f64, n_ops: usize) -> ChainModel {
        let op =
            PositiveOperator::new(Matrix::from_rows(&[&[beta, eps], &[eps, 1.0]])).unwrap();
        let delta = orthant_diameter(&op.kernel).value;
        let kappa = contraction_bound(delta);
        let ops: Vec<_> = (0..n_ops).map(|_| op.clone()).collect();
        ChainModel::new(vec![1.0, 1.0], vec![1.0, 1.0], ops, delta, kappa).unwrap()
    }

    #[test]
    fn identity_insertions_sit_at_ratio_one() {
        let chain = two_state_chain(1.0, 0.1, 20);
        let x = Insertion::identity(5, 2);
        let y = Insertion::identity(15, 2);
        let report = decay_band_check(&chain, &x, &y).unwrap();
        assert!((report.ratio - 1.0).abs() < 1e-12);
        assert!(report.within_band);
        assert!(!report.indeterminate);
    }

    #[test]
    fn band_holds_and_ratio_decays_geometrically() {
        let chain = two_state_chain(1.0, 0.1, 60);
        let x_weights = vec![1.0, 0.0];
        let mut gaps = Vec::new();
        let mut deviations = Vec::new();
        for gap in [4usize, 8, 12, 16, 20] {
            let k1 = 20;
            let k2 = k1 + gap;
            let x = Insertion::new(k1, x_weights.clone()).unwrap();
            let y = Insertion::new(k2, x_weights.clone()).unwrap();
            let report = decay_band_check(&chain, &x, &y).unwrap();
            assert!(report.within_band, "gap {gap} outside band");
            gaps.push(gap as f64);
            deviations.push((report.ratio - 1.0).abs());
        }
        let (rate, r2) = fit_geometric_rate(&gaps, &deviations, 1e-300).unwrap();
        let kappa = chain.contraction;
        assert!(r2 > 0.95, "fit too loose: R² = {r2}");
        assert!(rate <= kappa + 0.05, "rate {rate} vs κ {kappa}");
    }

    #[test]
    fn linearized_bound_holds() {
        let chain = two_state_chain(1.0, 0.1, 60);
        let w = vec![1.0, 0.0];
        for gap in [6usize, 10, 14] {
            let k1 = 20;
            let k2 = k1 + gap;
            let x = Insertion::new(k1, w.clone()).unwrap();
            let y = Insertion::new(k2, w.clone()).unwrap();
            let rep = decay_band_check(&chain, &x, &y).unwrap();
            let r = chain.diameter_bound;
            let kappa = chain.contraction;
            let m = chain.len();
            let bound = 16.0
                * r
                * (kappa.powi(k1 as i32)
                    + kappa.powi(gap as i32)
                    + kappa.powi((m - k2) as i32));
            // ‖X‖ = ‖Y‖ = 1 for indicator weights
            let diff = (rep.single_x * rep.single_y - rep.joint).abs();
            assert!(diff <= bound, "gap {gap}: |{diff}| > {bound}");
        }
    }

    #[test]
    fn degenerate_single_marks_indeterminate() {
        let chain = two_state_chain(1.0, 0.1, 10);
        let x = Insertion::new(3, vec![0.0, 0.0]).unwrap();
        let y = Insertion::new(7, vec![1.0, 1.0]).unwrap();
        let rep = decay_band_check(&chain, &x, &y).unwrap();
        assert!(rep.indeterminate);
    }
}
