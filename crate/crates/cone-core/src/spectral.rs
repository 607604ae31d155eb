//! Invariant-cone construction for a general square matrix with a simple
//! dominant eigenvalue and a spectral gap.
//!
//! After normalizing the dominant eigenvalue to 1 with eigenvector `u0`, the
//! cone is the positive span of iterated images `T^n(B(u0, r_n))` of small
//! balls around `u0`, with strictly decreasing slack `ε_n = 1/(n+2)` and
//! radii `r_n = ε(1 − ε_n)`. Reusing the same direction sample at every
//! level makes each ray's image an exact positive combination of the
//! next-level ray in the same direction and `u0` (the radii increase), so
//! invariance is verifiable by linear feasibility over the stored rays.
//! The deepest level is taken far enough that its images hug the `u0` ray
//! within the level-0 polytope.

use crate::cone::{ConeOracle, Membership};
use crate::error::ConeError;
use crate::linalg::{dominant_eigenpair, dot, normalize2, Matrix};
use crate::nnls::nnls;
use crate::rng::Rng;

/// Cone presented by sampled generating rays; membership and the Hilbert
/// envelopes are answered by small nonnegative least-squares feasibility
/// problems over the stored rays.
#[derive(Debug, Clone)]
pub struct SpectralGapCone {
    /// dim × n_rays; columns are unit-norm generating rays.
    rays: Matrix,
    dim: usize,
    feasibility_tol: f64,
}

impl SpectralGapCone {
    pub fn new(rays: Matrix) -> Self {
        let dim = rays.rows();
        SpectralGapCone {
            rays,
            dim,
            feasibility_tol: 1e-7,
        }
    }

    pub fn n_rays(&self) -> usize {
        self.rays.cols()
    }

    pub fn ray(&self, j: usize) -> Vec<f64> {
        self.rays.column(j)
    }

    fn feasible(&self, x: &[f64]) -> bool {
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return true;
        }
        let (_, resid) = nnls(&self.rays, x, 4 * self.rays.cols());
        resid <= self.feasibility_tol * scale
    }

    /// Largest t in [0, hi] with `base + t·dir` feasible, by bisection.
    fn feasibility_sup(&self, base: &[f64], dir: &[f64], hi: f64) -> f64 {
        let point = |t: f64| -> Vec<f64> {
            base.iter().zip(dir).map(|(b, d)| b + t * d).collect()
        };
        if !self.feasible(base) {
            return 0.0;
        }
        let mut lo = 0.0;
        let mut hi = hi;
        if self.feasible(&point(hi)) {
            return hi;
        }
        for _ in 0..45 {
            let mid = 0.5 * (lo + hi);
            if self.feasible(&point(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

impl ConeOracle for SpectralGapCone {
    fn dim(&self) -> usize {
        self.dim
    }

    fn label(&self) -> String {
        format!("spectral_gap({} rays)", self.rays.cols())
    }

    fn membership(&self, x: &[f64]) -> Membership {
        if x.len() != self.dim {
            return Membership::Outside {
                condition: format!("dimension {} != {}", x.len(), self.dim),
            };
        }
        if self.feasible(x) {
            Membership::Inside
        } else {
            Membership::Outside {
                condition: "not representable as nonnegative ray combination".into(),
            }
        }
    }

    fn alpha_max(&self, x: &[f64], y: &[f64]) -> f64 {
        // sup{α : y − αx ∈ C}; downward closed in α since x ∈ C.
        let neg_x: Vec<f64> = x.iter().map(|v| -v).collect();
        self.feasibility_sup(y, &neg_x, bracket_scale(x, y))
    }

    fn beta_min(&self, x: &[f64], y: &[f64]) -> f64 {
        // inf{β : βx − y ∈ C}; upward closed in β. Search t in β = hi − t.
        let hi = bracket_scale(x, y);
        let base: Vec<f64> = x.iter().zip(y).map(|(xi, yi)| hi * xi - yi).collect();
        let neg_x: Vec<f64> = x.iter().map(|v| -v).collect();
        if !self.feasible(&base) {
            return f64::INFINITY;
        }
        let t = self.feasibility_sup(&base, &neg_x, hi);
        hi - t
    }

    fn sample_ray(&self, rng: &mut Rng) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        for _ in 0..3 {
            let j = rng.usize_below(self.rays.cols());
            let w = rng.range(0.05, 1.0);
            for (xi, rij) in x.iter_mut().zip(self.rays.column(j)) {
                *xi += w * rij;
            }
        }
        x
    }
}

fn bracket_scale(x: &[f64], y: &[f64]) -> f64 {
    let nx = crate::linalg::norm2(x).max(1e-30);
    let ny = crate::linalg::norm2(y).max(1e-30);
    64.0 * ny / nx
}

/// Outcome of the cone construction.
#[derive(Debug, Clone)]
pub struct SpectralGapReport {
    pub cone: SpectralGapCone,
    /// T divided by its dominant eigenvalue.
    pub normalized: Matrix,
    pub lambda: f64,
    pub u0: Vec<f64>,
    /// Number of iteration levels retained (smallest satisfying the deflated
    /// norm threshold, before deepening for polytope coverage).
    pub n1: usize,
    /// Measured `‖(T − P)^{n1+1}‖`.
    pub deflated_norm: f64,
}

/// Builds the invariant cone for `t`.
///
/// `epsilon` is the ball-radius scale around the dominant eigenvector,
/// `n1_cap` bounds the number of iteration levels, `ray_budget` the number of
/// sampled directions per level. Refuses when the dominant eigenpair is
/// degenerate or the gap is too weak for the norm threshold within `n1_cap`
/// levels.
pub fn spectral_gap_cone(
    t: &Matrix,
    epsilon: f64,
    n1_cap: usize,
    ray_budget: usize,
    seed: u64,
) -> Result<SpectralGapReport, ConeError> {
    let n = t.rows();
    if n != t.cols() {
        return Err(ConeError::Dimension {
            expected: n,
            got: t.cols(),
        });
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(ConeError::InvalidParameter {
            name: "epsilon",
            value: epsilon,
            requirement: "must lie in (0, 1)",
        });
    }

    let (lambda, u0) = dominant_eigenpair(t, 600, 1e-8)?;
    if lambda <= 0.0 {
        return Err(ConeError::SpectralRefusal(format!(
            "dominant eigenvalue {lambda:.6e} is not positive"
        )));
    }
    let (lambda_left, w0_raw) = dominant_eigenpair(&t.transpose(), 600, 1e-8)?;
    if (lambda_left - lambda).abs() > 1e-6 * lambda.abs() {
        return Err(ConeError::SpectralRefusal(
            "left/right dominant eigenvalues disagree".into(),
        ));
    }
    let overlap = dot(&w0_raw, &u0);
    if overlap.abs() < 1e-10 {
        return Err(ConeError::SpectralRefusal(
            "left and right eigenvectors are orthogonal (defective pair)".into(),
        ));
    }
    let w0: Vec<f64> = w0_raw.iter().map(|v| v / overlap).collect();

    let normalized = t.scale(1.0 / lambda);
    // Spectral projection P = u0 w0ᵀ and the deflated part M = T̃ − P.
    let projection = Matrix::from_fn(n, n, |i, j| u0[i] * w0[j]);
    let deflated = normalized.sub(&projection);
    let complement_norm = Matrix::identity(n).sub(&projection).spectral_norm(60).max(1.0);

    // ε_n = 1/(n+2); threshold from the level-0 slack.
    let eps0 = 0.5;
    let threshold = (1.0 - eps0) / (2.0 * complement_norm);

    let mut power = deflated.clone();
    let mut n1 = None;
    for k in 0..=n1_cap {
        // power = M^{k+1}
        let norm = power.spectral_norm(60);
        if norm <= threshold {
            n1 = Some((k, norm));
            break;
        }
        power = power.matmul(&deflated);
    }
    let Some((n1, deflated_norm)) = n1 else {
        let norm = power.spectral_norm(60);
        return Err(ConeError::SpectralRefusal(format!(
            "deflated power norm {norm:.4e} still above threshold {threshold:.4e} after {n1_cap} levels"
        )));
    };

    // Deepen until top-level images hug the u0 ray inside the level-0
    // polytope (coverage factor well below the cross-polytope inradius).
    let coverage = 0.02 * epsilon * (1.0 - eps0) / (n as f64).sqrt() / complement_norm.max(1.0);
    let mut depth = n1;
    let mut deep_power = power; // M^{n1+1}
    while deep_power.spectral_norm(60) > coverage && depth < n1 + 60 {
        deep_power = deep_power.matmul(&deflated);
        depth += 1;
    }

    // Shared direction sample: ± coordinate axes plus random ± pairs.
    let mut rng = Rng::new(seed);
    let mut directions: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        directions.push(e.clone());
        e[i] = -1.0;
        directions.push(e);
    }
    while directions.len() < ray_budget.max(2 * n + 2) {
        let mut d: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        normalize2(&mut d);
        let neg: Vec<f64> = d.iter().map(|v| -v).collect();
        directions.push(d);
        directions.push(neg);
    }

    let radius = |level: usize| epsilon * (1.0 - 1.0 / (level as f64 + 2.0));
    let mut rays: Vec<Vec<f64>> = vec![u0.clone()];
    let mut images: Vec<Vec<f64>> = directions
        .iter()
        .map(|d| {
            u0.iter()
                .zip(d)
                .map(|(u, di)| u + radius(0) * di)
                .collect::<Vec<f64>>()
        })
        .collect();
    for level in 0..=depth {
        for img in &images {
            let mut r = img.clone();
            normalize2(&mut r);
            rays.push(r);
        }
        if level == depth {
            break;
        }
        // Advance every direction to the next level: T̃^{level+1}(u0 + r_{level+1} d).
        images = directions
            .iter()
            .map(|d| {
                let mut x: Vec<f64> = u0
                    .iter()
                    .zip(d)
                    .map(|(u, di)| u + radius(level + 1) * di)
                    .collect();
                for _ in 0..=level {
                    x = normalized.matvec(&x);
                }
                x
            })
            .collect();
    }

    let ray_matrix = Matrix::from_fn(n, rays.len(), |i, j| rays[j][i]);
    let cone = SpectralGapCone::new(ray_matrix);

    // Invariance check: image of every stored ray stays representable.
    for j in 0..cone.n_rays() {
        let img = normalized.matvec(&cone.ray(j));
        if !cone.feasible(&img) {
            return Err(ConeError::SpectralRefusal(format!(
                "image of generating ray {j} left the sampled cone"
            )));
        }
    }

    Ok(SpectralGapReport {
        cone,
        normalized,
        lambda,
        u0,
        n1,
        deflated_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::hilbert_distance_unchecked;

    #[test]
    fn symmetric_gap_cone_contracts() {
        // eigenvalues 1 and 0.3
        let q = [(0.8f64, 0.6f64), (-0.6, 0.8)];
        let t = Matrix::from_fn(2, 2, |i, j| {
            let (qi0, qi1) = q[i];
            let (qj0, qj1) = q[j];
            qi0 * qj0 * 1.0 + qi1 * qj1 * 0.3
        });
        let report = spectral_gap_cone(&t, 0.2, 40, 16, 9).unwrap();
        assert!((report.lambda - 1.0).abs() < 1e-8);
        let cone = &report.cone;
        let mut rng = Rng::new(4);
        let mut pairs = 0;
        for _ in 0..200 {
            let x = cone.sample_ray(&mut rng);
            let y = cone.sample_ray(&mut rng);
            let d = hilbert_distance_unchecked(cone, &x, &y);
            if !d.is_finite() || d < 1e-9 {
                continue;
            }
            let tx = report.normalized.matvec(&x);
            let ty = report.normalized.matvec(&y);
            let dt = hilbert_distance_unchecked(cone, &tx, &ty);
            assert!(dt.is_finite());
            assert!(dt / d < 1.0, "ratio {} not contracting", dt / d);
            pairs += 1;
        }
        assert!(pairs > 50);
    }

    #[test]
    fn pure_projection_diameter_zero() {
        // u0 u0ᵀ for unit u0: every image is the u0 ray.
        let u = {
            let mut v = vec![1.0, 2.0, 0.5];
            normalize2(&mut v);
            v
        };
        let t = Matrix::from_fn(3, 3, |i, j| u[i] * u[j]);
        let report = spectral_gap_cone(&t, 0.2, 40, 12, 5).unwrap();
        let cone = &report.cone;
        let mut rng = Rng::new(11);
        for _ in 0..50 {
            let x = cone.sample_ray(&mut rng);
            let y = cone.sample_ray(&mut rng);
            let tx = report.normalized.matvec(&x);
            let ty = report.normalized.matvec(&y);
            let dt = hilbert_distance_unchecked(cone, &tx, &ty);
            assert!(dt < 1e-6, "images should be projectively equal, d = {dt}");
        }
    }

    #[test]
    fn negative_entry_matrix_cone_invariant() {
        // dominant eigenpair positive, one negative off-diagonal, gap ≈ 0.5
        let t = Matrix::from_rows(&[&[1.0, -0.05], &[0.02, 0.5]]);
        let report = spectral_gap_cone(&t, 0.15, 60, 12, 3).unwrap();
        // construction already verifies invariance on stored rays
        assert!(report.deflated_norm <= 1.0);
        let cone = &report.cone;
        let mut rng = Rng::new(2);
        for _ in 0..100 {
            let x = cone.sample_ray(&mut rng);
            let img = report.normalized.matvec(&x);
            assert!(cone.membership(&img).is_inside());
        }
    }

    #[test]
    fn refuses_rotation_like_matrix() {
        // complex dominant pair
        let t = Matrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        assert!(spectral_gap_cone(&t, 0.2, 30, 8, 1).is_err());
    }
}
