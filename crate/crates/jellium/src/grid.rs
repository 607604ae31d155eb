//! Quadrature grid for displacement profiles: Gauss-Legendre panels aligned
//! with the cone's intervals `I_k = [kδ/2, (k+1)δ/2]`, geometric tail panels
//! out to the window edge, and optional extra breaks (boundary cuts and the
//! kink cascade of small chains). Interval masses are exact weight sub-sums
//! by construction.

use crate::error::JelliumError;
use crate::potential::gauss_legendre;

#[derive(Debug, Clone, Copy)]
pub struct Panel {
    pub lo: f64,
    pub hi: f64,
    pub first_node: usize,
    pub n_nodes: usize,
}

#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub panels: Vec<Panel>,
    pub s_max: f64,
    /// Interval half-width δ/2.
    pub delta_half: f64,
    pub a_cut: f64,
    pub k_min: i64,
    pub k_max: i64,
    pub tail_tolerance: f64,
}

impl QuadratureGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.panels.first().map_or(0.0, |p| p.lo)
    }

    pub fn hi(&self) -> f64 {
        self.panels.last().map_or(0.0, |p| p.hi)
    }

    /// Node index range [start, end) of interval `I_k`.
    pub fn interval_nodes(&self, k: i64) -> (usize, usize) {
        let lo = k as f64 * self.delta_half;
        let hi = (k + 1) as f64 * self.delta_half;
        let start = self.nodes.partition_point(|&s| s < lo - 1e-14);
        let end = self.nodes.partition_point(|&s| s < hi - 1e-14);
        (start, end)
    }

    /// Quadrature mass `Σ w f` of `f` over interval `I_k`.
    pub fn interval_mass(&self, k: i64, f: &[f64]) -> f64 {
        let (a, b) = self.interval_nodes(k);
        (a..b).map(|i| self.weights[i] * f[i]).sum()
    }

    /// First node at or above `s`.
    pub fn node_at_or_above(&self, s: f64) -> usize {
        self.nodes.partition_point(|&x| x < s)
    }

    /// Index of the panel containing `s` (panels tile [lo, hi]).
    pub fn panel_containing(&self, s: f64) -> Option<usize> {
        if s < self.lo() || s > self.hi() {
            return None;
        }
        let idx = self
            .panels
            .partition_point(|p| p.hi < s)
            .min(self.panels.len() - 1);
        Some(idx)
    }
}

/// Grid construction parameters.
#[derive(Debug, Clone)]
pub struct GridSpec {
    /// Gauss-Legendre points per (sub-)panel.
    pub points_per_panel: usize,
    /// Number of equal sub-panels per interval `I_k`.
    pub subdivisions: usize,
    /// Kernel entries with single-particle weight below this fraction of the
    /// peak must fall outside the window.
    pub tail_tolerance: f64,
    /// Additional panel breaks (boundary cuts, kink cascades).
    pub extra_breaks: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points_per_panel: 6,
            subdivisions: 1,
            tail_tolerance: 1e-14,
            extra_breaks: Vec::new(),
        }
    }
}

pub fn build_grid(
    delta: f64,
    a_cut: f64,
    s_max: f64,
    spec: &GridSpec,
) -> Result<QuadratureGrid, JelliumError> {
    if !(delta > 0.0 && a_cut > 0.0 && a_cut.is_finite()) {
        return Err(JelliumError::InvalidParameter {
            name: "delta/a_cut",
            value: delta,
            requirement: "spacing and cutoff must be positive and finite",
        });
    }
    if spec.points_per_panel < 2 || spec.points_per_panel > 64 {
        return Err(JelliumError::InvalidParameter {
            name: "points_per_panel",
            value: spec.points_per_panel as f64,
            requirement: "need 2..=64 Gauss-Legendre points",
        });
    }
    let dh = 0.5 * delta;
    let ratio = a_cut / delta;
    let k_half = (2.0 * ratio).round() as i64;
    if ((2.0 * ratio) - k_half as f64).abs() > 1e-9 {
        return Err(JelliumError::InvalidParameter {
            name: "a_cut",
            value: a_cut,
            requirement: "cutoff must be an integer multiple of delta/2 of the spacing",
        });
    }
    let k_min = -k_half - 1;
    let k_max = k_half + 1;
    let s_max = s_max.max(a_cut + 2.0 * delta);

    // Breaks: interval edges, then geometric tails to ±s_max.
    let mut breaks: Vec<f64> = Vec::new();
    let sub = spec.subdivisions.max(1);
    for k in k_min..=k_max {
        let lo = k as f64 * dh;
        for j in 0..sub {
            breaks.push(lo + dh * j as f64 / sub as f64);
        }
    }
    breaks.push((k_max + 1) as f64 * dh);
    let interval_hi = (k_max + 1) as f64 * dh;
    let interval_lo = k_min as f64 * dh;
    let mut w = dh;
    let mut edge = interval_hi;
    while edge < s_max {
        edge = (edge + w).min(s_max);
        breaks.push(edge);
        w *= 1.6;
    }
    w = dh;
    edge = interval_lo;
    while edge > -s_max {
        edge = (edge - w).max(-s_max);
        breaks.push(edge);
        w *= 1.6;
    }
    for &b in &spec.extra_breaks {
        if b > -s_max && b < s_max {
            breaks.push(b);
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let (gl_nodes, gl_weights) = gauss_legendre(spec.points_per_panel);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut panels = Vec::new();
    for pair in breaks.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if hi - lo < 1e-13 {
            continue;
        }
        let first_node = nodes.len();
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        for (x, wt) in gl_nodes.iter().zip(&gl_weights) {
            nodes.push(mid + half * x);
            weights.push(wt * half);
        }
        panels.push(Panel {
            lo,
            hi,
            first_node,
            n_nodes: spec.points_per_panel,
        });
    }

    Ok(QuadratureGrid {
        nodes,
        weights,
        panels,
        s_max,
        delta_half: dh,
        a_cut,
        k_min,
        k_max,
        tail_tolerance: spec.tail_tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_masses_are_exact_subsums() {
        let grid = build_grid(0.5, 2.0, 6.0, &GridSpec::default()).unwrap();
        // integrating 1 over I_k must give the interval width δ/2
        let ones = vec![1.0; grid.len()];
        for k in grid.k_min..=grid.k_max {
            let mass = grid.interval_mass(k, &ones);
            assert!(
                (mass - 0.25).abs() < 1e-13,
                "interval {k}: mass {mass} != 0.25"
            );
        }
    }

    #[test]
    fn total_weight_covers_window() {
        let grid = build_grid(0.5, 2.0, 6.0, &GridSpec::default()).unwrap();
        let total: f64 = grid.weights.iter().sum();
        assert!((total - (grid.hi() - grid.lo())).abs() < 1e-10);
    }

    #[test]
    fn extra_breaks_preserve_interval_masses() {
        let spec = GridSpec {
            extra_breaks: vec![0.13, -1.77, 3.9],
            subdivisions: 2,
            ..GridSpec::default()
        };
        let grid = build_grid(0.5, 2.0, 6.0, &spec).unwrap();
        let ones = vec![1.0; grid.len()];
        for k in grid.k_min..=grid.k_max {
            assert!((grid.interval_mass(k, &ones) - 0.25).abs() < 1e-13);
        }
        // quadrature of a smooth function still spectrally accurate;
        // erf(6) = 1 to within 3e-17, so the full-line value serves as exact
        let f: Vec<f64> = grid.nodes.iter().map(|s| (-s * s).exp()).collect();
        let integral: f64 = grid.weights.iter().zip(&f).map(|(w, v)| w * v).sum();
        assert!((integral - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn misaligned_cutoff_rejected() {
        assert!(build_grid(0.5, 2.1, 6.0, &GridSpec::default()).is_err());
    }

    #[test]
    fn panel_lookup() {
        let grid = build_grid(0.5, 2.0, 6.0, &GridSpec::default()).unwrap();
        let p = grid.panel_containing(0.1).unwrap();
        assert!(grid.panels[p].lo <= 0.1 && 0.1 <= grid.panels[p].hi);
        assert!(grid.panel_containing(100.0).is_none());
    }
}
