//! Free energy of a chain and finite-difference derivative estimates in the
//! inverse temperature.

use crate::chain::ChainModel;
use crate::error::ChainError;

/// The two normalizations in circulation: plain log-bracket per site, and
/// the Gibbs convention carrying the extra `−1/β` factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreeEnergyConvention {
    /// `(1/N) · log(u, Π T_i v)`
    LogPerSite,
    /// `−1/(Nβ) · log Z`
    GibbsPerParticle,
}

/// Free energy of the chain under the chosen convention, with `n` the
/// per-particle (or per-operator) count.
pub fn free_energy(
    chain: &ChainModel,
    n: usize,
    beta: f64,
    convention: FreeEnergyConvention,
) -> Result<f64, ChainError> {
    if n == 0 {
        return Err(ChainError::InvalidParameter {
            name: "n",
            value: 0.0,
            requirement: "particle count must be positive",
        });
    }
    let log_z = chain.log_partition_function()?;
    Ok(match convention {
        FreeEnergyConvention::LogPerSite => log_z / n as f64,
        FreeEnergyConvention::GibbsPerParticle => {
            if beta <= 0.0 {
                return Err(ChainError::InvalidParameter {
                    name: "beta",
                    value: beta,
                    requirement: "Gibbs convention needs beta > 0",
                });
            }
            -log_z / (n as f64 * beta)
        }
    })
}

/// Finite-difference estimate of one derivative order.
#[derive(Debug, Clone, Copy)]
pub struct DerivativeEstimate {
    pub order: usize,
    pub value: f64,
    pub step: f64,
    /// Set when the roundoff noise floor is comparable to the estimate.
    pub noise_flagged: bool,
}

/// Default step: `1e-3 · max(1, |β0|)`.
pub fn default_step(beta0: f64) -> f64 {
    1e-3 * beta0.abs().max(1.0)
}

/// Central-difference stencils on `2⌈k/2⌉+1` points, one Richardson
/// extrapolation, orders 1..=4. `f` is any scalar function of β (typically a
/// free energy through a chain builder).
pub fn derivatives_of_scalar(
    f: &mut dyn FnMut(f64) -> Result<f64, ChainError>,
    beta0: f64,
    k_max: usize,
    h: f64,
) -> Result<Vec<DerivativeEstimate>, ChainError> {
    if !(h > 0.0) {
        return Err(ChainError::InvalidParameter {
            name: "h",
            value: h,
            requirement: "step must be positive",
        });
    }
    if k_max == 0 || k_max > 4 {
        return Err(ChainError::InvalidParameter {
            name: "k_max",
            value: k_max as f64,
            requirement: "supported derivative orders are 1..=4",
        });
    }
    let j_max = k_max.div_ceil(2) as i64;
    // One evaluation grid at spacing h/2 serves both D(h) and D(h/2).
    let mut values = Vec::new();
    for j in -2 * j_max..=2 * j_max {
        values.push(f(beta0 + j as f64 * h / 2.0)?);
    }
    let at = |j: i64| values[(j + 2 * j_max) as usize];
    let f_scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);

    let mut out = Vec::new();
    for k in 1..=k_max {
        let stencil = central_stencil(k);
        let radius = (stencil.len() / 2) as i64;
        let eval = |spacing: i64, step: f64| -> f64 {
            let mut acc = 0.0;
            for (offset, c) in stencil.iter().enumerate() {
                let j = (offset as i64 - radius) * spacing;
                acc += c * at(j);
            }
            acc / step.powi(k as i32)
        };
        let coarse = eval(2, h);
        let fine = eval(1, h / 2.0);
        // Central differences carry O(h²) error: Richardson with factor 4.
        let value = (4.0 * fine - coarse) / 3.0;
        let coeff_sum: f64 = stencil.iter().map(|c| c.abs()).sum();
        let noise = 1e-14 * f_scale * coeff_sum / (h / 2.0).powi(k as i32);
        out.push(DerivativeEstimate {
            order: k,
            value,
            step: h,
            noise_flagged: value.abs() < 3.0 * noise,
        });
    }
    Ok(out)
}

/// Derivative estimates of the free energy of `builder(β)` around `beta0`.
pub fn derivative_estimates(
    builder: &mut dyn FnMut(f64) -> Result<ChainModel, ChainError>,
    n: usize,
    convention: FreeEnergyConvention,
    beta0: f64,
    k_max: usize,
    h: f64,
) -> Result<Vec<DerivativeEstimate>, ChainError> {
    let mut f = |beta: f64| -> Result<f64, ChainError> {
        let chain = builder(beta)?;
        free_energy(&chain, n, beta, convention)
    };
    derivatives_of_scalar(&mut f, beta0, k_max, h)
}

fn central_stencil(k: usize) -> &'static [f64] {
    match k {
        1 => &[-0.5, 0.0, 0.5],
        2 => &[1.0, -2.0, 1.0],
        3 => &[-0.5, 1.0, 0.0, -1.0, 0.5],
        4 => &[1.0, -4.0, 6.0, -4.0, 1.0],
        _ => unreachable!("orders validated"),
    }
}
