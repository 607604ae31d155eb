//! Central-limit harness: tilt the chain by `e^{α h_p}` per slot, read the
//! mean drift and the variance off the first two α-derivatives of the
//! per-site log-partition, and compare the sampled normalized sum against
//! the matching normal law by Kolmogorov-Smirnov distance.

use cone_core::operator::PositiveOperator;
use transfer_chain::{ChainMessages, ChainModel};

use crate::error::SamplingError;
use crate::ks::{ks_statistic, normal_cdf};
use crate::sampler::SampleBatch;

/// Per-site observable values on the grid, one vector per chain slot.
#[derive(Debug, Clone)]
pub struct ObservableSpec {
    pub per_site: Vec<Vec<f64>>,
}

impl ObservableSpec {
    /// Same observable at every slot.
    pub fn uniform(h: Vec<f64>, n_slots: usize) -> Self {
        ObservableSpec {
            per_site: vec![h; n_slots],
        }
    }

    pub fn validate(&self, chain: &ChainModel) -> Result<(), SamplingError> {
        if self.per_site.len() != chain.n_slots() {
            return Err(SamplingError::InvalidParameter {
                name: "observable",
                detail: format!(
                    "need {} per-site vectors, got {}",
                    chain.n_slots(),
                    self.per_site.len()
                ),
            });
        }
        for (p, h) in self.per_site.iter().enumerate() {
            if h.len() != chain.slot_dim(p) {
                return Err(SamplingError::ObservableMismatch { site: p });
            }
        }
        Ok(())
    }
}

/// Chain with each slot tilted by `e^{α h_p}`: slot 0 folds into the right
/// boundary, interior slots into the kernel consuming them, the top slot
/// into the left functional. Diagonal tilts keep every entry nonnegative.
pub fn tilted_chain(
    chain: &ChainModel,
    obs: &ObservableSpec,
    alpha: f64,
) -> Result<ChainModel, SamplingError> {
    obs.validate(chain)?;
    let m = chain.len();
    let right: Vec<f64> = chain
        .right
        .iter()
        .zip(&obs.per_site[0])
        .map(|(v, h)| v * (alpha * h).exp())
        .collect();
    let left: Vec<f64> = chain
        .left
        .iter()
        .zip(&obs.per_site[m])
        .map(|(u, h)| u * (alpha * h).exp())
        .collect();
    let mut ops = Vec::with_capacity(m);
    for (p, op) in chain.ops.iter().enumerate() {
        if p == 0 {
            ops.push(op.clone());
            continue;
        }
        let mut kernel = op.kernel.clone();
        let tilt: Vec<f64> = obs.per_site[p].iter().map(|h| (alpha * h).exp()).collect();
        for i in 0..kernel.rows() {
            let row = kernel.row_mut(i);
            for (v, t) in row.iter_mut().zip(&tilt) {
                *v *= t;
            }
        }
        ops.push(PositiveOperator::new_unchecked(kernel));
    }
    Ok(ChainModel::new(
        left,
        right,
        ops,
        chain.diameter_bound,
        chain.contraction,
    )?)
}

#[derive(Debug, Clone, Copy)]
pub struct CltOptions {
    /// Finite-difference step for the tilted free-energy derivatives.
    pub alpha_step: f64,
    /// Variance below which the statistic is treated as degenerate.
    pub variance_floor: f64,
}

impl Default for CltOptions {
    fn default() -> Self {
        CltOptions {
            alpha_step: 1e-3,
            variance_floor: 1e-12,
        }
    }
}

/// Mean drift γ, variance σ² (first and second α-derivatives of the tilted
/// per-site log-partition at α = 0), and the Kolmogorov-Smirnov distance of
/// the sampled normalized sum from Normal(0, σ²).
#[derive(Debug, Clone, Copy)]
pub struct CltReport {
    pub gamma: f64,
    pub sigma2: f64,
    pub ks: f64,
    pub n_samples: usize,
    pub n_sites: usize,
    pub degenerate: bool,
}

pub fn clt_report(
    chain: &ChainModel,
    obs: &ObservableSpec,
    batch: &SampleBatch,
    opts: &CltOptions,
) -> Result<CltReport, SamplingError> {
    obs.validate(chain)?;
    let n_sites = chain.n_slots();
    let h = opts.alpha_step;

    let g = |alpha: f64| -> Result<f64, SamplingError> {
        let tilted = tilted_chain(chain, obs, alpha)?;
        Ok(tilted.log_partition_function()? / n_sites as f64)
    };
    let g_p = g(h)?;
    let g_m = g(-h)?;
    let g_0 = g(0.0)?;
    let gamma = (g_p - g_m) / (2.0 * h);
    // Var(S) = (1/N)·d²(log Z)/dα² = d²g/dα² with g the per-site log-partition
    let sigma2 = ((g_p - 2.0 * g_0 + g_m) / (h * h)).max(0.0);
    // curvature below the finite-difference roundoff floor counts as zero
    let g_scale = g_0.abs().max(g_p.abs()).max(g_m.abs()).max(1.0);
    let curvature_noise = 16.0 * f64::EPSILON * g_scale / (h * h);

    // exact per-site means for centering
    let messages = ChainMessages::compute(chain)?;
    let log_z = messages.log_partition_at(0)?;
    let mut means = Vec::with_capacity(n_sites);
    for p in 0..n_sites {
        let fwd = &messages.fwd[p];
        let bwd = &messages.bwd[p];
        let scale = (fwd.log_scale + bwd.log_scale - log_z).exp();
        let mean: f64 = fwd
            .vec
            .iter()
            .zip(&bwd.vec)
            .zip(&obs.per_site[p])
            .map(|((f, b), hv)| f * b * hv)
            .sum::<f64>()
            * scale;
        means.push(mean);
    }

    let sqrt_n = (n_sites as f64).sqrt();
    let stats: Vec<f64> = batch
        .positions
        .iter()
        .map(|path| {
            let mut s = 0.0;
            for (p, &node) in path.iter().enumerate() {
                s += obs.per_site[p][node] - means[p];
            }
            s / sqrt_n
        })
        .collect();

    let h_scale = obs
        .per_site
        .iter()
        .flat_map(|v| v.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    let (ks, degenerate) = if sigma2 < opts.variance_floor.max(10.0 * curvature_noise) {
        // against the point mass at zero both CDFs are step functions; the
        // distance is the mass found away from the atom (up to roundoff)
        let atom_tol = 1e-9 * h_scale;
        let below = stats.iter().filter(|&&s| s < -atom_tol).count() as f64;
        let above = stats.iter().filter(|&&s| s > atom_tol).count() as f64;
        let n = stats.len() as f64;
        ((below / n).max(above / n), true)
    } else {
        let d = ks_statistic(&stats, |x| normal_cdf(x, 0.0, sigma2));
        (d, false)
    };

    Ok(CltReport {
        gamma,
        sigma2,
        ks,
        n_samples: batch.n_samples,
        n_sites,
        degenerate,
    })
}
