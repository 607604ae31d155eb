//! The system definition: box, charges, background and the standing
//! assumptions (bounded charges, background bounded away from zero).

use crate::background::Background;
use crate::error::JelliumError;
use crate::potential::{potential_u, potential_slope, CumulativeMoments};

/// Number of panels in the cumulative-moment tables.
const MOMENT_PANELS: usize = 2048;

/// Half-length `L`, particle count, inverse temperature, charges, background
/// density (rescaled at construction so the box is neutral) and the bounds
/// entering the assumptions.
#[derive(Debug, Clone)]
pub struct JelliumSystem {
    l: f64,
    n: usize,
    beta: f64,
    charges: Vec<f64>,
    background: Background,
    q_low: f64,
    q_high: f64,
    rho_low: f64,
    rho_high: f64,
    moments: CumulativeMoments,
    neutrality_scale: f64,
}

impl JelliumSystem {
    /// Builds the system, rescaling the background so that
    /// `∫ ρ = Σ q_i` exactly (the caller-supplied profile fixes the shape).
    pub fn new(
        l: f64,
        beta: f64,
        charges: Vec<f64>,
        background: Background,
    ) -> Result<Self, JelliumError> {
        if !(l > 0.0) {
            return Err(JelliumError::InvalidParameter {
                name: "L",
                value: l,
                requirement: "half-length must be positive",
            });
        }
        if !(beta > 0.0) {
            return Err(JelliumError::InvalidParameter {
                name: "beta",
                value: beta,
                requirement: "inverse temperature must be positive",
            });
        }
        let n = charges.len();
        if n == 0 {
            return Err(JelliumError::InvalidParameter {
                name: "N",
                value: 0.0,
                requirement: "at least one particle",
            });
        }
        let q_low = charges.iter().cloned().fold(f64::INFINITY, f64::min);
        let q_high = charges.iter().cloned().fold(0.0f64, f64::max);
        if !(q_low > 0.0) {
            return Err(JelliumError::AssumptionFailed {
                name: "H1",
                detail: format!("smallest charge {q_low:.3e} is not positive"),
            });
        }

        // Neutrality: rescale the profile so ∫ρ = Σq.
        let raw_moments = CumulativeMoments::new(&background, l, -l, l, MOMENT_PANELS);
        let raw_total = raw_moments.at(l).0;
        let total_charge: f64 = charges.iter().sum();
        if !(raw_total > 0.0) {
            return Err(JelliumError::AssumptionFailed {
                name: "H2",
                detail: format!("background integral {raw_total:.3e} is not positive"),
            });
        }
        let neutrality_scale = total_charge / raw_total;
        let background = background.scaled(neutrality_scale);

        // Density bounds from a dense sample of the rescaled profile. An H2
        // violation (density touching zero) is recorded here and surfaced by
        // `assumption_check`; construction itself only needs a positive
        // total background charge.
        let mut rho_low = f64::INFINITY;
        let mut rho_high = 0.0f64;
        let samples = 10_000;
        for k in 0..=samples {
            let t = -l + 2.0 * l * k as f64 / samples as f64;
            let r = background.eval(t, l);
            rho_low = rho_low.min(r);
            rho_high = rho_high.max(r);
        }

        let moments = CumulativeMoments::new(&background, l, -l, l, MOMENT_PANELS);
        Ok(JelliumSystem {
            l,
            n,
            beta,
            charges,
            background,
            q_low,
            q_high,
            rho_low,
            rho_high,
            moments,
            neutrality_scale,
        })
    }

    pub fn half_length(&self) -> f64 {
        self.l
    }

    pub fn n_particles(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn charges(&self) -> &[f64] {
        &self.charges
    }

    pub fn background(&self) -> &Background {
        &self.background
    }

    pub fn total_charge(&self) -> f64 {
        self.charges.iter().sum()
    }

    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        (self.q_low, self.q_high, self.rho_low, self.rho_high)
    }

    pub fn moments(&self) -> &CumulativeMoments {
        self.moments_ref()
    }

    fn moments_ref(&self) -> &CumulativeMoments {
        &self.moments
    }

    pub fn neutrality_scale(&self) -> f64 {
        self.neutrality_scale
    }

    /// Residual of the neutrality identity after rescaling.
    pub fn neutrality_residual(&self) -> f64 {
        self.moments.at(self.l).0 - self.total_charge()
    }
}

/// Margins of the standing assumptions, measured on dense samples.
#[derive(Debug, Clone)]
pub struct AssumptionReport {
    pub h1_ok: bool,
    pub q_low: f64,
    pub q_high: f64,
    pub h2_ok: bool,
    pub rho_low: f64,
    pub rho_high: f64,
    pub rho_witness: Option<f64>,
    /// min over the (i, s) sample of `U_i(s) − q_low·m·s²`.
    pub potential_margin: f64,
    pub potential_ok: bool,
    /// min over the sample of `|dU_i/ds| − q_low·m·|s|`.
    pub slope_margin: f64,
    pub slope_ok: bool,
}

/// Verifies H1/H2 on a 10^4-point sample and the potential bounds
/// `U_i(s) ≥ q_low·m·s²`, `|U_i'(s)| ≥ q_low·m·|s|` on an (i, s) grid.
pub fn assumption_check(
    system: &JelliumSystem,
    layout: &crate::equilibrium::EquilibriumLayout,
) -> AssumptionReport {
    let (q_low, q_high, m, mm) = system.bounds();
    let h1_ok = q_low > 0.0 && q_high.is_finite();

    let l = system.half_length();
    let samples = 10_000;
    let mut rho_low = f64::INFINITY;
    let mut rho_high = 0.0f64;
    let mut rho_witness = None;
    for k in 0..=samples {
        let t = -l + 2.0 * l * k as f64 / samples as f64;
        let r = system.background().eval(t, l);
        if r < rho_low {
            rho_low = r;
            if r <= 0.0 {
                rho_witness = Some(t);
            }
        }
        rho_high = rho_high.max(r);
    }
    let h2_ok = rho_low > 0.0;

    let mut potential_margin = f64::INFINITY;
    let mut slope_margin = f64::INFINITY;
    let s_probe = 3.0;
    for i in 0..system.n_particles() {
        for k in 0..=60 {
            let s = -s_probe + 2.0 * s_probe * k as f64 / 60.0;
            let u = potential_u(system, layout, i, s);
            potential_margin = potential_margin.min(u - q_low * m * s * s);
            let du = potential_slope(system, layout, i, s).abs();
            slope_margin = slope_margin.min(du - q_low * m * s.abs());
        }
    }

    AssumptionReport {
        h1_ok,
        q_low,
        q_high,
        h2_ok,
        rho_low: rho_low.min(m),
        rho_high: rho_high.max(mm),
        rho_witness,
        potential_margin,
        potential_ok: potential_margin >= -1e-12,
        slope_margin,
        slope_ok: slope_margin >= -1e-10,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::equilibrium_positions;

    #[test]
    fn neutrality_enforced_by_rescaling() {
        let system = JelliumSystem::new(
            5.0,
            1.0,
            vec![1.0; 10],
            Background::Constant { rho: 0.7 },
        )
        .unwrap();
        assert!(system.neutrality_residual().abs() < 1e-10);
        // constant 0.7 rescaled to 10/(2*5) = 1.0
        assert!((system.background().eval(0.0, 5.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_background_zero_margin() {
        let system =
            JelliumSystem::new(5.0, 1.0, vec![1.0; 10], Background::Constant { rho: 1.0 })
                .unwrap();
        let layout = equilibrium_positions(&system).unwrap();
        let report = assumption_check(&system, &layout);
        assert!(report.h1_ok && report.h2_ok && report.potential_ok);
        // U = q rho s² exactly saturates the bound
        assert!(report.potential_margin.abs() < 1e-9);
    }

    #[test]
    fn sinusoidal_bounds() {
        let system = JelliumSystem::new(
            5.0,
            1.0,
            vec![1.0; 10],
            Background::Sinusoidal {
                mean: 1.0,
                amplitude: 0.3,
                wavenumber: 1.0,
                phase: 0.0,
            },
        )
        .unwrap();
        let (_, _, m, mm) = system.bounds();
        let scale = system.neutrality_scale();
        assert!(m >= scale * 0.7 - 1e-9 && mm <= scale * 1.3 + 1e-9);
        let layout = equilibrium_positions(&system).unwrap();
        let report = assumption_check(&system, &layout);
        assert!(report.h2_ok && report.potential_ok && report.slope_ok);
    }

    #[test]
    fn vanishing_background_reported_with_witness() {
        // 1 + cos(πt/5) touches zero at the box edges
        let bg = Background::Sinusoidal {
            mean: 1.0,
            amplitude: 1.0,
            wavenumber: std::f64::consts::PI / 5.0,
            phase: std::f64::consts::PI / 2.0,
        };
        let system = JelliumSystem::new(5.0, 1.0, vec![1.0; 4], bg).unwrap();
        let layout = equilibrium_positions(&system).unwrap();
        let report = assumption_check(&system, &layout);
        assert!(!report.h2_ok);
        let witness = report.rho_witness.expect("witness location");
        assert!(witness.abs() > 4.99);
    }
}
