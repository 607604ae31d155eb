//! Assembly of the transfer chain for an N-particle system.
//!
//! The bracket runs from the top of the box downward: the right boundary
//! vector is the indicator `1{x_N < L}` in the top particle's displacement
//! frame, each kernel integrates out one particle while enforcing the
//! ordering with the particle below, and the left functional carries the
//! lowest particle's Gibbs weight together with the wall indicator
//! `1{x_1 > -L}` and the quadrature weights. Chain slot `N-1-j` therefore
//! addresses particle `j`.

use cone_core::operator::PositiveOperator;
use transfer_chain::{ChainModel, Insertion, MarginalTable};

use crate::cone::{
    calibrate_cone_parameters, certify_contraction, CalibrationOptions, CertificationReport,
    JelliumCone, JelliumConeParams,
};
use crate::equilibrium::{equilibrium_positions, EquilibriumLayout};
use crate::error::JelliumError;
use crate::grid::{build_grid, GridSpec, QuadratureGrid};
use crate::kernel::build_transfer_kernel;
use crate::potential::{integrate, potential_u};
use crate::system::JelliumSystem;

/// A chain with its grid, layout and certification data, addressable by
/// particle index.
#[derive(Debug, Clone)]
pub struct JelliumChain {
    pub chain: ChainModel,
    pub grid: QuadratureGrid,
    pub layout: EquilibriumLayout,
    pub params: JelliumConeParams,
    pub certification: CertificationReport,
    n_particles: usize,
}

impl JelliumChain {
    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    /// Chain slot carrying particle `j`'s displacement.
    pub fn site_of_particle(&self, j: usize) -> usize {
        self.n_particles - 1 - j
    }

    pub fn particle_of_site(&self, site: usize) -> usize {
        self.n_particles - 1 - site
    }

    /// log of the boundary-contracted bracket.
    pub fn log_partition(&self) -> Result<f64, JelliumError> {
        Ok(self.chain.log_partition_function()?)
    }

    /// Marginal density over particles (ascending), with axes in the given
    /// particle order. Values are densities in the displacement variable.
    pub fn particle_marginal(&self, particles: &[usize]) -> Result<MarginalTable, JelliumError> {
        if particles.windows(2).any(|w| w[0] >= w[1]) {
            return Err(JelliumError::InvalidParameter {
                name: "particles",
                value: f64::NAN,
                requirement: "particle labels must be strictly increasing",
            });
        }
        // ascending particles map to descending sites
        let sites: Vec<usize> = particles
            .iter()
            .rev()
            .map(|&j| self.site_of_particle(j))
            .collect();
        let weights: Vec<Vec<f64>> = sites.iter().map(|_| self.grid.weights.clone()).collect();
        let table = self.chain.marginal_density(&sites, &weights)?;
        Ok(reverse_axes(table))
    }

    /// Diagonal insertion of grid weights at a particle.
    pub fn particle_insertion(&self, particle: usize, weights: Vec<f64>) -> Result<Insertion, JelliumError> {
        Ok(Insertion::new(self.site_of_particle(particle), weights)?)
    }
}

/// Reverses the axis order of a marginal table (sites were fed to the chain
/// in reverse particle order).
fn reverse_axes(table: MarginalTable) -> MarginalTable {
    let k = table.dims.len();
    if k <= 1 {
        return table;
    }
    let dims_rev: Vec<usize> = table.dims.iter().rev().copied().collect();
    let mut values = vec![0.0; table.values.len()];
    let mut idx = vec![0usize; k];
    for (flat, v) in table.values.iter().enumerate() {
        // unflatten in original dims
        let mut rest = flat;
        for d in (0..k).rev() {
            idx[d] = rest % table.dims[d];
            rest /= table.dims[d];
        }
        // flatten reversed
        let mut nf = 0;
        for d in (0..k).rev() {
            nf = nf * dims_rev[k - 1 - d] + idx[d];
        }
        values[nf] = *v;
    }
    MarginalTable {
        sites: table.sites.iter().rev().copied().collect(),
        dims: dims_rev,
        values,
        weights: table.weights.iter().rev().cloned().collect(),
    }
}

/// Pipeline options for [`assemble_chain`].
#[derive(Debug, Clone)]
pub struct AssembleOptions {
    pub grid: GridSpec,
    pub calibration: CalibrationOptions,
    pub certification_pairs: usize,
    pub seed: u64,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions {
            grid: GridSpec::default(),
            calibration: CalibrationOptions::default(),
            certification_pairs: 300,
            seed: 0xC0FFEE,
        }
    }
}

/// Full pipeline: equilibrium layout, window sizing, grid with boundary and
/// kink breaks, kernels, cone calibration, contraction certificate, chain.
pub fn assemble_chain(
    system: &JelliumSystem,
    opts: &AssembleOptions,
) -> Result<JelliumChain, JelliumError> {
    let layout = equilibrium_positions(system)?;
    let grid = grid_for(system, &layout, &opts.grid)?;
    let n = system.n_particles();

    let kernels: Vec<PositiveOperator> = (1..n)
        .map(|i| build_transfer_kernel(system, &layout, &grid, i).map(|k| k.op))
        .collect::<Result<_, _>>()?;

    let (params, certification) = if n >= 2 {
        let mut calib = opts.calibration.clone();
        calib.seed ^= opts.seed;
        let params = calibrate_cone_parameters(&grid, &kernels, &calib)?;
        let cone = JelliumCone::build(&grid, &params);
        let certification =
            certify_contraction(&cone, &kernels, opts.certification_pairs, opts.seed ^ 0x9E37)?;
        (params, certification)
    } else {
        // single particle: no kernels to certify
        let params = JelliumConeParams {
            delta: 2.0 * grid.delta_half,
            a_cut: grid.a_cut,
            eps_tail: 1e-3,
            eps_prime: grid.delta_half,
            eps_ratio: vec![0.5; (grid.k_max - grid.k_min - 1).max(0) as usize],
            k_min: grid.k_min,
            k_max: grid.k_max,
        };
        let certification = CertificationReport {
            delta_estimate: 0.0,
            kappa: 0.0,
            per_op_worst: Vec::new(),
            worst_witness: (0, 0, 0),
        };
        (params, certification)
    };

    build_jellium_chain(system, &layout, grid, kernels, params, certification)
}

/// Grid with window sized from the Gaussian lower bound and kink-cascade
/// breaks for small systems.
pub fn grid_for(
    system: &JelliumSystem,
    layout: &EquilibriumLayout,
    spec: &GridSpec,
) -> Result<QuadratureGrid, JelliumError> {
    let (q_low, _, m, _) = system.bounds();
    let beta = system.beta();
    let s_max = ((1.0 / spec.tail_tolerance).ln() / (beta * q_low * m)).sqrt() * 1.05;

    let n = system.n_particles();
    let top = layout.positions[n - 1];
    let bottom = layout.positions[0];
    let c_top = system.half_length() - top;
    let b_bottom = -system.half_length() - bottom;
    let mut extra = vec![c_top, b_bottom];
    let mut z = c_top;
    for i in (1..n).rev() {
        z += layout.spacing(i);
        if z >= s_max || extra.len() >= 34 {
            break;
        }
        extra.push(z);
    }
    let mut spec = spec.clone();
    spec.extra_breaks.extend(extra);
    build_grid(layout.delta, layout.a_cut, s_max, &spec)
}

/// Assembles the [`ChainModel`] from prebuilt kernels: boundary vector
/// `1{x_N < L}`, kernels for particles `N-1` down to `1`, and the functional
/// `w · e^{-βU_0} · 1{x_1 > -L}`.
pub fn build_jellium_chain(
    system: &JelliumSystem,
    layout: &EquilibriumLayout,
    grid: QuadratureGrid,
    kernels: Vec<PositiveOperator>,
    params: JelliumConeParams,
    certification: CertificationReport,
) -> Result<JelliumChain, JelliumError> {
    let n = system.n_particles();
    if kernels.len() + 1 != n {
        return Err(JelliumError::InvalidParameter {
            name: "kernels",
            value: kernels.len() as f64,
            requirement: "need one kernel per particle above the lowest",
        });
    }
    let beta = system.beta();
    let c_top = system.half_length() - layout.positions[n - 1];
    let b_bottom = -system.half_length() - layout.positions[0];

    let right: Vec<f64> = grid
        .nodes
        .iter()
        .map(|&s| if s < c_top { 1.0 } else { 0.0 })
        .collect();
    let left: Vec<f64> = grid
        .nodes
        .iter()
        .zip(&grid.weights)
        .map(|(&s, &w)| {
            if s > b_bottom {
                w * (-beta * potential_u(system, layout, 0, s)).exp()
            } else {
                0.0
            }
        })
        .collect();

    // kernels[i-1] integrates particle i; the chain applies the top one first
    let ops: Vec<PositiveOperator> = kernels.into_iter().rev().collect();
    let chain = ChainModel::new(
        left,
        right,
        ops,
        certification.delta_estimate,
        certification.kappa,
    )?;
    Ok(JelliumChain {
        chain,
        grid,
        layout: layout.clone(),
        params,
        certification,
        n_particles: n,
    })
}

/// Classical energy of the equilibrium configuration: background-background,
/// particle-particle and background-particle terms. Only needed when the
/// absolute normalization of log Z is requested.
pub fn equilibrium_energy(system: &JelliumSystem, layout: &EquilibriumLayout) -> f64 {
    let l = system.half_length();
    let moments = system.moments();
    let f0 = |y: f64| moments.at(y).0;
    let f1 = |y: f64| moments.at(y).1;
    let (f0_l, f1_l) = moments.at(l);

    // ∬ ρρ |y−y'| = 2 ∫ ρ(y) (y F0(y) − F1(y)) dy
    let bb = 2.0
        * integrate(
            &|y: f64| system.background().eval(y, l) * (y * f0(y) - f1(y)),
            -l,
            l,
            512,
            10,
        );

    let q = system.charges();
    let x = &layout.positions;
    let mut pp = 0.0;
    for i in 0..q.len() {
        for j in 0..q.len() {
            pp += q[i] * q[j] * (x[i] - x[j]).abs();
        }
    }

    let mut bp = 0.0;
    for (i, &xi) in x.iter().enumerate() {
        let (c0_x, c1_x) = moments.at(xi);
        let left_part = xi * c0_x - c1_x;
        let right_part = (f1_l - c1_x) - xi * (f0_l - c0_x);
        bp += q[i] * (left_part + right_part);
    }

    -0.5 * bb - 0.5 * pp + bp
}

/// `log Z` including the equilibrium-energy prefactor.
pub fn log_partition_absolute(
    system: &JelliumSystem,
    jelly: &JelliumChain,
) -> Result<f64, JelliumError> {
    let bracket = jelly.log_partition()?;
    Ok(-system.beta() * equilibrium_energy(system, &jelly.layout) + bracket)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::Background;

    fn assemble(n: usize, beta: f64, background: Background) -> (JelliumSystem, JelliumChain) {
        let l = n as f64 / 2.0;
        let system = JelliumSystem::new(l, beta, vec![1.0; n], background).unwrap();
        let chain = assemble_chain(&system, &AssembleOptions::default()).unwrap();
        (system, chain)
    }

    #[test]
    fn marginals_normalized_and_positive() {
        let (_, jelly) = assemble(6, 1.0, Background::Constant { rho: 1.0 });
        for j in 0..6 {
            let table = jelly.particle_marginal(&[j]).unwrap();
            assert!((table.integral() - 1.0).abs() < 1e-8);
            assert!(table.values.iter().all(|&v| v >= 0.0));
        }
        let pair = jelly.particle_marginal(&[1, 4]).unwrap();
        assert!((pair.integral() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn pair_marginal_consistent_with_insertions() {
        let (_, jelly) = assemble(5, 1.0, Background::Constant { rho: 1.0 });
        // probability that particle 1 sits in the lower half and particle 3
        // in the upper half, two ways
        let half_low: Vec<f64> = jelly
            .grid
            .nodes
            .iter()
            .map(|&s| if s < 0.0 { 1.0 } else { 0.0 })
            .collect();
        let half_high: Vec<f64> = jelly
            .grid
            .nodes
            .iter()
            .map(|&s| if s >= 0.0 { 1.0 } else { 0.0 })
            .collect();
        // chain sites: particle 3 sits below particle 1's slot
        let ins_hi = jelly.particle_insertion(3, half_high.clone()).unwrap();
        let ins_lo = jelly.particle_insertion(1, half_low.clone()).unwrap();
        let mut insertions = vec![ins_hi, ins_lo];
        insertions.sort_by_key(|i| i.position);
        let via_corr = jelly.chain.correlation(&insertions).unwrap();

        let pair = jelly.particle_marginal(&[1, 3]).unwrap();
        let mut via_table = 0.0;
        for (a, &sa) in jelly.grid.nodes.iter().enumerate() {
            if sa >= 0.0 {
                continue;
            }
            for (b, &sb) in jelly.grid.nodes.iter().enumerate() {
                if sb < 0.0 {
                    continue;
                }
                via_table +=
                    pair.value(&[a, b]) * jelly.grid.weights[a] * jelly.grid.weights[b];
            }
        }
        assert!(
            (via_corr - via_table).abs() < 1e-10,
            "{via_corr} vs {via_table}"
        );
    }

    #[test]
    fn beta_dependence_is_monotone_for_two_particles() {
        // the bracket shrinks and the energy prefactor dominates as β grows
        let values: Vec<f64> = [1.0, 2.0, 4.0]
            .iter()
            .map(|&beta| {
                let (system, jelly) = assemble(2, beta, Background::Constant { rho: 1.0 });
                log_partition_absolute(&system, &jelly).unwrap()
                    + system.beta() * equilibrium_energy(&system, &jelly.layout)
            })
            .collect();
        // bracket log Z decreases with β (thinner wells)
        assert!(values[0] > values[1] && values[1] > values[2]);
    }

    #[test]
    fn constant_background_energy_terms() {
        let system =
            JelliumSystem::new(1.0, 1.0, vec![1.0, 1.0], Background::Constant { rho: 1.0 })
                .unwrap();
        let layout = equilibrium_positions(&system).unwrap();
        // unit charges at ±1/2 in background ρ = 1 on [-1, 1]:
        // bb: ∬|y−y'| over the square = 8/3 · L³ = 8/3
        // pp: 2·q²·|x1−x0| = 2
        // bp: Σ ∫|x̃_i − y| dy = 2·(1/4 + 9/4)/2 = 5/2
        let e = equilibrium_energy(&system, &layout);
        let expect = -0.5 * (8.0 / 3.0) - 0.5 * 2.0 + 2.5;
        assert!((e - expect).abs() < 1e-9, "{e} vs {expect}");
    }
}
