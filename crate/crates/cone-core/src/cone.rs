//! Cone oracles: membership plus the two scalar envelopes that define the
//! Hilbert projective metric.
//!
//! A cone is presented through three queries:
//!
//! * `membership(x)` — is `x` in the cone (with the violated condition as a
//!   witness when not),
//! * `alpha_max(x, y) = sup{α ≥ 0 : αx ≤ y}`,
//! * `beta_min(x, y)  = inf{β > 0 : y ≤ βx}`,
//!
//! where `u ≤ v` means `v − u` is in the cone. Two cone points are
//! *comparable* when `alpha_max > 0` and `beta_min < ∞`; for comparable
//! points the Hilbert metric is `log(beta_min / alpha_max)`.

use crate::error::ConeError;
use crate::rng::Rng;

/// Values below this are treated as zero when forming envelope ratios, so
/// nearly-degenerate pairs are reported as non-comparable rather than as
/// astronomically distant.
pub const COMPARABILITY_FLOOR: f64 = 1e-300;

/// Relative tolerance for membership and envelope computations.
pub const CONE_REL_TOL: f64 = 1e-12;

/// A ray of a cone: finite list of reals, at least one entry nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjVector(pub Vec<f64>);

impl ProjVector {
    pub fn new(values: Vec<f64>) -> Result<Self, ConeError> {
        if values.iter().all(|&v| v == 0.0) {
            return Err(ConeError::InvalidParameter {
                name: "proj_vector",
                value: 0.0,
                requirement: "at least one entry must be nonzero",
            });
        }
        Ok(ProjVector(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Outcome of a membership test.
#[derive(Debug, Clone, PartialEq)]
pub enum Membership {
    Inside,
    Outside { condition: String },
}

impl Membership {
    pub fn is_inside(&self) -> bool {
        matches!(self, Membership::Inside)
    }
}

/// A cone presented by its comparability test and scalar envelope oracles.
pub trait ConeOracle {
    fn dim(&self) -> usize;

    /// Variant tag, e.g. `orthant(4)`.
    fn label(&self) -> String;

    fn membership(&self, x: &[f64]) -> Membership;

    /// sup{α ≥ 0 : αx ≤ y}. Returns 0 when no positive α works.
    fn alpha_max(&self, x: &[f64], y: &[f64]) -> f64;

    /// inf{β > 0 : y ≤ βx}. Returns ∞ when no finite β works.
    fn beta_min(&self, x: &[f64], y: &[f64]) -> f64;

    /// A random ray of the cone, used by sampled diameter and contraction
    /// estimates.
    fn sample_ray(&self, rng: &mut Rng) -> Vec<f64>;

    /// Exact projective diameter of an operator when the cone admits a
    /// closed form (the orthant does, over column pairs). `None` means
    /// callers must fall back to sampling.
    fn exact_operator_diameter(&self, _kernel: &crate::linalg::Matrix) -> Option<super::metric::DiameterEstimate> {
        None
    }

    fn require_member(&self, x: &[f64]) -> Result<(), ConeError> {
        match self.membership(x) {
            Membership::Inside => Ok(()),
            Membership::Outside { condition } => Err(ConeError::NotInCone {
                cone: self.label(),
                condition,
            }),
        }
    }
}

/// The nonnegative orthant in `R^dim`.
#[derive(Debug, Clone)]
pub struct OrthantCone {
    dim: usize,
}

impl OrthantCone {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "orthant dimension must be positive");
        OrthantCone { dim }
    }
}

impl ConeOracle for OrthantCone {
    fn dim(&self) -> usize {
        self.dim
    }

    fn label(&self) -> String {
        format!("orthant({})", self.dim)
    }

    fn membership(&self, x: &[f64]) -> Membership {
        if x.len() != self.dim {
            return Membership::Outside {
                condition: format!("dimension {} != {}", x.len(), self.dim),
            };
        }
        for (i, &v) in x.iter().enumerate() {
            if !(v >= 0.0) {
                return Membership::Outside {
                    condition: format!("entry {i} = {v} < 0"),
                };
            }
        }
        Membership::Inside
    }

    fn alpha_max(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut alpha = f64::INFINITY;
        for (&xi, &yi) in x.iter().zip(y) {
            if xi > COMPARABILITY_FLOOR {
                alpha = alpha.min(yi / xi);
            }
        }
        if alpha == f64::INFINITY {
            // x = 0 on its support: degenerate input.
            0.0
        } else {
            alpha.max(0.0)
        }
    }

    fn beta_min(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut beta = 0.0f64;
        for (&xi, &yi) in x.iter().zip(y) {
            if xi > COMPARABILITY_FLOOR {
                beta = beta.max(yi / xi);
            } else if yi > COMPARABILITY_FLOOR {
                return f64::INFINITY;
            }
        }
        beta
    }

    fn sample_ray(&self, rng: &mut Rng) -> Vec<f64> {
        rng.positive_vector(self.dim, 6.0)
    }

    fn exact_operator_diameter(
        &self,
        kernel: &crate::linalg::Matrix,
    ) -> Option<super::metric::DiameterEstimate> {
        Some(super::metric::orthant_diameter(kernel))
    }
}

/// A polyhedral cone `{x : c_j · x ≥ 0 for all j}` given by dense constraint
/// rows. Membership, `alpha_max` and `beta_min` are all exact: each
/// constraint is linear, so the admissible α interval is `[0, min_j c_j·y /
/// c_j·x]` over rows with `c_j·x > 0`.
#[derive(Debug, Clone)]
pub struct LinearCone {
    dim: usize,
    label: String,
    constraints: Vec<(String, Vec<f64>)>,
    /// Optional ray sampler hook; when absent `sample_ray` panics.
    sampler: Option<fn(&LinearCone, &mut Rng) -> Vec<f64>>,
}

impl LinearCone {
    pub fn new(dim: usize, label: String, constraints: Vec<(String, Vec<f64>)>) -> Self {
        for (_, row) in &constraints {
            assert_eq!(row.len(), dim, "constraint row dimension mismatch");
        }
        LinearCone {
            dim,
            label,
            constraints,
            sampler: None,
        }
    }

    pub fn with_sampler(mut self, sampler: fn(&LinearCone, &mut Rng) -> Vec<f64>) -> Self {
        self.sampler = Some(sampler);
        self
    }

    pub fn constraints(&self) -> &[(String, Vec<f64>)] {
        &self.constraints
    }

    /// Values `c_j · x` of every constraint row; the envelopes and Hilbert
    /// distance of a pair reduce to ratio scans over these.
    pub fn constraint_values(&self, x: &[f64]) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|(_, row)| crate::linalg::dot(row, x))
            .collect()
    }

    fn scale_of(&self, x: &[f64]) -> f64 {
        x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-30)
    }
}

/// Hilbert distance of two cone points of a [`LinearCone`] given their
/// precomputed constraint values.
pub fn distance_from_constraint_values(cx: &[f64], cy: &[f64]) -> f64 {
    let scale_x = cx.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-30);
    let scale_y = cy.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-30);
    let floor = COMPARABILITY_FLOOR * scale_x.max(scale_y);
    let tol_y = CONE_REL_TOL * scale_y;
    let mut alpha = f64::INFINITY;
    let mut beta = 0.0f64;
    for (&vx, &vy) in cx.iter().zip(cy) {
        if vx > floor {
            let r = vy / vx;
            alpha = alpha.min(r);
            beta = beta.max(r);
        } else if vy > tol_y {
            return f64::INFINITY;
        }
    }
    if alpha <= COMPARABILITY_FLOOR || alpha == f64::INFINITY || !beta.is_finite() {
        return f64::INFINITY;
    }
    (beta / alpha).ln().max(0.0)
}

impl ConeOracle for LinearCone {
    fn dim(&self) -> usize {
        self.dim
    }

    fn label(&self) -> String {
        self.label.clone()
    }

    fn membership(&self, x: &[f64]) -> Membership {
        if x.len() != self.dim {
            return Membership::Outside {
                condition: format!("dimension {} != {}", x.len(), self.dim),
            };
        }
        let tol = CONE_REL_TOL * self.scale_of(x);
        for (name, row) in &self.constraints {
            let v = crate::linalg::dot(row, x);
            if v < -tol {
                return Membership::Outside {
                    condition: name.clone(),
                };
            }
        }
        Membership::Inside
    }

    fn alpha_max(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut alpha = f64::INFINITY;
        let floor = COMPARABILITY_FLOOR * self.scale_of(x).max(self.scale_of(y));
        for (_, row) in &self.constraints {
            let cx = crate::linalg::dot(row, x);
            if cx > floor {
                let cy = crate::linalg::dot(row, y);
                alpha = alpha.min(cy / cx);
            }
        }
        if alpha == f64::INFINITY {
            0.0
        } else {
            alpha.max(0.0)
        }
    }

    fn beta_min(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut beta = 0.0f64;
        let floor = COMPARABILITY_FLOOR * self.scale_of(x).max(self.scale_of(y));
        let tol = CONE_REL_TOL * self.scale_of(y);
        for (_, row) in &self.constraints {
            let cx = crate::linalg::dot(row, x);
            let cy = crate::linalg::dot(row, y);
            if cx > floor {
                beta = beta.max(cy / cx);
            } else if cy > tol {
                return f64::INFINITY;
            }
        }
        beta
    }

    fn sample_ray(&self, rng: &mut Rng) -> Vec<f64> {
        match self.sampler {
            Some(f) => f(self, rng),
            None => panic!("LinearCone `{}` has no ray sampler attached", self.label),
        }
    }
}
