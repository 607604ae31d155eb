//! Positive operators and the Hilbert distance on the operator cone.
//!
//! Order-preserving operators for a cone `C` form a cone themselves under
//! `A ≤ B ⇔ (B − A)(C) ⊆ C`, with Hilbert distance
//! `d_P(A, B) = log(min β / max α)` over `αA ≤ B ≤ βA`. On the orthant the
//! order is entrywise, so `d_P` reduces to the spread of entry ratios.

use crate::cone::{ConeOracle, COMPARABILITY_FLOOR};
use crate::error::ConeError;
use crate::linalg::Matrix;
use crate::rng::Rng;

/// Dense kernel matrix mapping grid functions to grid functions.
#[derive(Debug, Clone)]
pub struct PositiveOperator {
    pub kernel: Matrix,
}

impl PositiveOperator {
    /// Wraps a kernel, requiring entrywise nonnegativity (order preservation
    /// for the orthant; other cones must be verified separately on rays).
    pub fn new(kernel: Matrix) -> Result<Self, ConeError> {
        if !kernel.is_nonnegative() {
            return Err(ConeError::InvalidParameter {
                name: "kernel",
                value: f64::NAN,
                requirement: "all entries must be nonnegative",
            });
        }
        Ok(PositiveOperator { kernel })
    }

    /// Wraps a kernel without the sign check, for operators that are order
    /// preserving only for a non-orthant cone.
    pub fn new_unchecked(kernel: Matrix) -> Self {
        PositiveOperator { kernel }
    }

    pub fn dim_in(&self) -> usize {
        self.kernel.cols()
    }

    pub fn dim_out(&self) -> usize {
        self.kernel.rows()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.kernel.matvec(x)
    }

    /// self ∘ other (apply `other` first).
    pub fn compose(&self, other: &PositiveOperator) -> PositiveOperator {
        PositiveOperator {
            kernel: self.kernel.matmul(&other.kernel),
        }
    }

    /// Checks `T(C) ⊆ C` on `rays` sampled rays.
    pub fn verify_order_preserving(
        &self,
        cone: &dyn ConeOracle,
        rays: usize,
        seed: u64,
    ) -> Result<(), ConeError> {
        let mut rng = Rng::new(seed);
        for _ in 0..rays {
            let x = cone.sample_ray(&mut rng);
            cone.require_member(&self.apply(&x))?;
        }
        Ok(())
    }
}

/// Exact operator-cone distance for the orthant: `d_P(A, B) = log(max_ij
/// B_ij/A_ij / min_ij B_ij/A_ij)`, infinite when supports differ.
pub fn operator_distance_orthant(a: &PositiveOperator, b: &PositiveOperator) -> f64 {
    let (m, n) = (a.kernel.rows(), a.kernel.cols());
    assert_eq!((m, n), (b.kernel.rows(), b.kernel.cols()));
    let mut rmax = 0.0f64;
    let mut rmin = f64::INFINITY;
    for i in 0..m {
        for j in 0..n {
            let aij = a.kernel[(i, j)];
            let bij = b.kernel[(i, j)];
            if aij > COMPARABILITY_FLOOR {
                let r = bij / aij;
                rmax = rmax.max(r);
                rmin = rmin.min(r);
            } else if bij > COMPARABILITY_FLOOR {
                return f64::INFINITY;
            }
            // both (near) zero: unconstrained
        }
    }
    if rmin <= COMPARABILITY_FLOOR || !rmax.is_finite() || rmin == f64::INFINITY {
        return f64::INFINITY;
    }
    (rmax / rmin).ln().max(0.0)
}

/// Sampled inner estimate of `d_P(A, B)` for a general cone: over sampled
/// rays `x`, `log(sup β_min(Ax, Bx) / inf α_max(Ax, Bx))`. Converges to the
/// true distance from below as the budget grows.
pub fn operator_distance_sampled(
    a: &PositiveOperator,
    b: &PositiveOperator,
    cone: &dyn ConeOracle,
    budget: usize,
    seed: u64,
) -> f64 {
    let mut rng = Rng::new(seed);
    let mut alpha = f64::INFINITY;
    let mut beta = 0.0f64;
    for _ in 0..budget {
        let x = cone.sample_ray(&mut rng);
        let ax = a.apply(&x);
        let bx = b.apply(&x);
        alpha = alpha.min(cone.alpha_max(&ax, &bx));
        beta = beta.max(cone.beta_min(&ax, &bx));
    }
    if alpha <= COMPARABILITY_FLOOR || !beta.is_finite() {
        return f64::INFINITY;
    }
    (beta / alpha).ln().max(0.0)
}

/// Report of the product subadditivity check
/// `d_P(AB, CD) ≤ d_P(A, C) + d_P(B, D)`.
#[derive(Debug, Clone)]
pub struct SubadditivityReport {
    pub lhs: f64,
    pub rhs: f64,
    /// rhs − lhs; nonnegative (up to tolerance) when the inequality holds.
    pub slack: f64,
    pub holds: bool,
}

pub fn product_subadditivity_check(
    a: &PositiveOperator,
    b: &PositiveOperator,
    c: &PositiveOperator,
    d: &PositiveOperator,
) -> SubadditivityReport {
    let lhs = operator_distance_orthant(&a.compose(b), &c.compose(d));
    let rhs = operator_distance_orthant(a, c) + operator_distance_orthant(b, d);
    let slack = rhs - lhs;
    SubadditivityReport {
        lhs,
        rhs,
        slack,
        holds: lhs <= rhs + 1e-9,
    }
}
