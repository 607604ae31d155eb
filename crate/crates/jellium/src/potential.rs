//! Single-particle confining potentials, evaluated from cumulative moments
//! of the (extended) background density.
//!
//! With `C0(y) = ∫ ρ_ext` and `C1(y) = ∫ y ρ_ext` from a fixed base point,
//! the potential felt by particle `i` displaced by `s` from its equilibrium
//! position `x̃_i` is exactly
//!
//! ```text
//! U_i(s) = 2 q_i [ (x̃_i + s)(C0(x̃_i+s) − C0(x̃_i)) − (C1(x̃_i+s) − C1(x̃_i)) ],
//! ```
//!
//! so a single pair of cumulative tables serves every particle and every
//! displacement, with only a short in-panel quadrature per query.

use crate::background::Background;
use crate::system::JelliumSystem;

/// Nodes and weights of a `p`-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(p: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(p >= 1);
    let mut nodes = vec![0.0; p];
    let mut weights = vec![0.0; p];
    for i in 0..p.div_ceil(2) {
        // Chebyshev-based initial guess, Newton refinement.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (p as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (val, deriv) = legendre(p, x);
            dp = deriv;
            let dx = val / deriv;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[p - 1 - i] = x;
        weights[i] = w;
        weights[p - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(p: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=p {
        let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = pk;
    }
    let deriv = p as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, deriv)
}

/// Integrates `f` on [a, b] with a composite Gauss-Legendre rule.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize, p: usize) -> f64 {
    if a == b {
        return 0.0;
    }
    let (nodes, weights) = gauss_legendre(p);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        for (x, w) in nodes.iter().zip(&weights) {
            total += w * half * f(mid + half * x);
        }
    }
    total
}

#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    fn add(&mut self, term: f64) {
        let y = term - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

/// Cumulative zeroth and first moments of the extended background, tabulated
/// at panel breaks with exact in-panel completion.
#[derive(Debug, Clone)]
pub struct CumulativeMoments {
    base: f64,
    breaks: Vec<f64>,
    c0_at: Vec<f64>,
    c1_at: Vec<f64>,
    background: Background,
    l: f64,
    gl_nodes: Vec<f64>,
    gl_weights: Vec<f64>,
}

impl CumulativeMoments {
    /// Tables from `base` to `top`; queries outside use the constant
    /// extension analytically.
    pub fn new(background: &Background, l: f64, base: f64, top: f64, panels: usize) -> Self {
        let (gl_nodes, gl_weights) = gauss_legendre(10);
        let mut breaks = Vec::with_capacity(panels + 1);
        for k in 0..=panels {
            breaks.push(base + (top - base) * k as f64 / panels as f64);
        }
        // compensated accumulation keeps the tables exact to a few ulps even
        // across thousands of panels
        let mut c0_at = vec![0.0];
        let mut c1_at = vec![0.0];
        let mut c0 = Kahan::default();
        let mut c1 = Kahan::default();
        for w in breaks.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            for (x, wt) in gl_nodes.iter().zip(&gl_weights) {
                let y = mid + half * x;
                let r = background.eval(y, l);
                c0.add(wt * half * r);
                c1.add(wt * half * y * r);
            }
            c0_at.push(c0.value());
            c1_at.push(c1.value());
        }
        CumulativeMoments {
            base,
            breaks,
            c0_at,
            c1_at,
            background: background.clone(),
            l,
            gl_nodes,
            gl_weights,
        }
    }

    /// (C0(y), C1(y)) measured from the base point.
    pub fn at(&self, y: f64) -> (f64, f64) {
        let first = self.breaks[0];
        let last = *self.breaks.last().unwrap();
        if y <= first {
            // constant extension below the table
            let rho = self.background.eval(first, self.l);
            let d = y - first;
            return (rho * d, rho * 0.5 * (y * y - first * first));
        }
        if y >= last {
            let rho = self.background.eval(last, self.l);
            let d = y - last;
            let n = self.breaks.len() - 1;
            return (
                self.c0_at[n] + rho * d,
                self.c1_at[n] + rho * 0.5 * (y * y - last * last),
            );
        }
        let idx = self.breaks.partition_point(|&b| b <= y) - 1;
        let lo = self.breaks[idx];
        let mut c0 = self.c0_at[idx];
        let mut c1 = self.c1_at[idx];
        let mid = 0.5 * (lo + y);
        let half = 0.5 * (y - lo);
        for (x, wt) in self.gl_nodes.iter().zip(&self.gl_weights) {
            let t = mid + half * x;
            let r = self.background.eval(t, self.l);
            c0 += wt * half * r;
            c1 += wt * half * t * r;
        }
        (c0, c1)
    }

    pub fn base(&self) -> f64 {
        self.base
    }
}

/// `U_i(s)`: quadratic-well potential of particle `i` displaced by `s` from
/// its equilibrium position. Satisfies `U_i(0) = 0` and
/// `U_i(s) ≥ q_low · m · s²`.
pub fn potential_u(
    system: &JelliumSystem,
    layout: &crate::equilibrium::EquilibriumLayout,
    i: usize,
    s: f64,
) -> f64 {
    potential_u_at(
        system.moments(),
        system.charges()[i],
        layout.positions[i],
        s,
    )
}

pub(crate) fn potential_u_at(moments: &CumulativeMoments, q: f64, xi: f64, s: f64) -> f64 {
    let (c0_a, c1_a) = moments.at(xi);
    let (c0_b, c1_b) = moments.at(xi + s);
    2.0 * q * ((xi + s) * (c0_b - c0_a) - (c1_b - c1_a))
}

/// `dU_i/ds = 2 q_i ∫_{x̃_i}^{x̃_i+s} ρ`.
pub fn potential_slope(
    system: &JelliumSystem,
    layout: &crate::equilibrium::EquilibriumLayout,
    i: usize,
    s: f64,
) -> f64 {
    let xi = layout.positions[i];
    let (c0_a, _) = moments_pair(system.moments(), xi);
    let (c0_b, _) = moments_pair(system.moments(), xi + s);
    2.0 * system.charges()[i] * (c0_b - c0_a)
}

fn moments_pair(moments: &CumulativeMoments, y: f64) -> (f64, f64) {
    moments.at(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (nodes, weights) = gauss_legendre(6);
        // exact for degree <= 11 on [-1, 1]
        let value: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * (x.powi(10) + 2.0 * x.powi(3)))
            .sum();
        assert!((value - 2.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn composite_rule_on_sine() {
        let val = integrate(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 16, 8);
        assert!((val - 2.0).abs() < 1e-13);
    }

    #[test]
    fn moments_of_constant_background() {
        let bg = Background::Constant { rho: 2.0 };
        let m = CumulativeMoments::new(&bg, 3.0, -3.0, 3.0, 64);
        let (c0, c1) = m.at(1.5);
        assert!((c0 - 2.0 * 4.5).abs() < 1e-12);
        assert!((c1 - 2.0 * 0.5 * (1.5f64.powi(2) - 9.0)).abs() < 1e-11);
        // extension beyond the table
        let (c0, _) = m.at(4.0);
        assert!((c0 - 2.0 * 7.0).abs() < 1e-11);
    }
}
