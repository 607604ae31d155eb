//! Gridded k-point marginals of a chain, computed from forward and backward
//! messages plus rescaled middle products.

use cone_core::linalg::{dot, Matrix};

use crate::chain::{apply_rescaled, ChainModel, Scaled};
use crate::error::ChainError;

/// Cap on the total number of cells in one marginal table.
const MAX_TABLE_CELLS: usize = 20_000_000;

/// Forward partial products `fwd[p] = T_{p-1} ⋯ T_0 v` and backward partial
/// contractions `bwd[p] = uᵀ T_{M-1} ⋯ T_p`, both rescaled, for p = 0..=M.
#[derive(Debug, Clone)]
pub struct ChainMessages {
    pub fwd: Vec<Scaled>,
    pub bwd: Vec<Scaled>,
}

impl ChainMessages {
    pub fn compute(chain: &ChainModel) -> Result<Self, ChainError> {
        let m = chain.len();
        let mut fwd = Vec::with_capacity(m + 1);
        fwd.push(Scaled::plain(chain.right.clone()));
        for (stage, op) in chain.ops.iter().enumerate() {
            let prev = &fwd[stage];
            let (vec, log_scale) = apply_rescaled(op, &prev.vec, prev.log_scale, stage)?;
            fwd.push(Scaled { vec, log_scale });
        }

        let mut bwd = vec![Scaled::plain(chain.left.clone())];
        for k in 0..m {
            let stage = m - 1 - k;
            let prev = &bwd[k];
            let mut vec = chain.ops[stage].kernel.vecmat(&prev.vec);
            let mx = vec.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if mx == 0.0 || !mx.is_finite() {
                return Err(ChainError::Underflow { stage });
            }
            for v in vec.iter_mut() {
                *v /= mx;
            }
            bwd.push(Scaled {
                vec,
                log_scale: prev.log_scale + mx.ln(),
            });
        }
        bwd.reverse();
        Ok(ChainMessages { fwd, bwd })
    }

    /// log Z evaluated by pairing the messages at slot `p`; identical for
    /// every slot up to roundoff.
    pub fn log_partition_at(&self, p: usize) -> Result<f64, ChainError> {
        let z = dot(&self.bwd[p].vec, &self.fwd[p].vec);
        if z <= 0.0 || !z.is_finite() {
            return Err(ChainError::NonPositivePartition { value: z });
        }
        Ok(z.ln() + self.bwd[p].log_scale + self.fwd[p].log_scale)
    }
}

/// Gridded k-point marginal density over the chosen slots.
///
/// `values` is a row-major tensor over `dims`; entry `(a_1, …, a_k)` is the
/// density with respect to the product of the per-slot cell weights, so the
/// quadrature integral `Σ values · Π weights` is 1.
#[derive(Debug, Clone)]
pub struct MarginalTable {
    pub sites: Vec<usize>,
    pub dims: Vec<usize>,
    pub values: Vec<f64>,
    pub weights: Vec<Vec<f64>>,
}

impl MarginalTable {
    pub fn integral(&self) -> f64 {
        let mut total = 0.0;
        let mut idx = vec![0usize; self.dims.len()];
        for (flat, v) in self.values.iter().enumerate() {
            unflatten(flat, &self.dims, &mut idx);
            let mut w = 1.0;
            for (d, &i) in idx.iter().enumerate() {
                w *= self.weights[d][i];
            }
            total += v * w;
        }
        total
    }

    pub fn value(&self, idx: &[usize]) -> f64 {
        self.values[flatten(idx, &self.dims)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

pub(crate) fn flatten(idx: &[usize], dims: &[usize]) -> usize {
    let mut flat = 0;
    for (i, d) in idx.iter().zip(dims) {
        flat = flat * d + i;
    }
    flat
}

pub(crate) fn unflatten(mut flat: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = flat % dims[k];
        flat /= dims[k];
    }
}

impl ChainModel {
    /// Marginal density over the slots in `sites` (strictly increasing,
    /// at most 4 at desk scale), on the per-slot cell weights `weights`.
    ///
    /// Point evaluation uses a top-hat of one grid cell normalized by the
    /// cell weight, so the table integrates to 1 by construction; the
    /// integral is re-checked and re-normalized against roundoff.
    pub fn marginal_density(
        &self,
        sites: &[usize],
        weights: &[Vec<f64>],
    ) -> Result<MarginalTable, ChainError> {
        if sites.is_empty() {
            return Err(ChainError::InvalidInsertion("empty site set".into()));
        }
        if sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ChainError::InvalidInsertion(
                "marginal sites must be strictly increasing".into(),
            ));
        }
        if weights.len() != sites.len() {
            return Err(ChainError::InvalidInsertion(
                "one weight vector per site required".into(),
            ));
        }
        for (&p, w) in sites.iter().zip(weights) {
            if p >= self.n_slots() {
                return Err(ChainError::InvalidInsertion(format!(
                    "site {p} outside chain with {} slots",
                    self.n_slots()
                )));
            }
            if w.len() != self.slot_dim(p) {
                return Err(ChainError::InvalidInsertion(format!(
                    "weights at site {p} have wrong dimension"
                )));
            }
            if w.iter().any(|&wi| wi <= 0.0 || !wi.is_finite()) {
                return Err(ChainError::InvalidInsertion(format!(
                    "cell weights at site {p} must be strictly positive"
                )));
            }
        }
        let dims: Vec<usize> = sites.iter().map(|&p| self.slot_dim(p)).collect();
        let cells: usize = dims.iter().product();
        if cells > MAX_TABLE_CELLS {
            return Err(ChainError::TableTooLarge {
                sites: sites.len(),
                cells,
            });
        }

        let messages = ChainMessages::compute(self)?;
        let log_z = messages.log_partition_at(sites[0])?;

        // Rescaled transfer matrices between consecutive chosen slots.
        let mut middles: Vec<Scaled2> = Vec::new();
        for pair in sites.windows(2) {
            middles.push(self.middle_product(pair[0], pair[1])?);
        }

        let k = sites.len();
        let fwd = &messages.fwd[sites[0]];
        let bwd = &messages.bwd[sites[k - 1]];
        let log_common: f64 = fwd.log_scale
            + bwd.log_scale
            + middles.iter().map(|m| m.log_scale).sum::<f64>()
            - log_z;

        let mut values = vec![0.0; cells];
        let mut idx = vec![0usize; k];
        for (flat, out) in values.iter_mut().enumerate() {
            unflatten(flat, &dims, &mut idx);
            let mut acc = fwd.vec[idx[0]];
            for (step, mid) in middles.iter().enumerate() {
                acc *= mid.matrix[(idx[step + 1], idx[step])];
            }
            acc *= bwd.vec[idx[k - 1]];
            *out = acc;
        }
        // Probability of the cell tuple -> density w.r.t. cell weights.
        let scale = log_common.exp();
        for (flat, v) in values.iter_mut().enumerate() {
            unflatten(flat, &dims, &mut idx);
            let mut w = 1.0;
            for (d, &i) in idx.iter().enumerate() {
                w *= weights[d][i];
            }
            *v *= scale / w;
        }

        let mut table = MarginalTable {
            sites: sites.to_vec(),
            dims,
            values,
            weights: weights.to_vec(),
        };
        let integral = table.integral();
        if !(integral.is_finite() && integral > 0.0) {
            return Err(ChainError::NotNormalizable(integral));
        }
        debug_assert!(
            (integral - 1.0).abs() < 1e-8,
            "marginal integral {integral} drifted"
        );
        for v in table.values.iter_mut() {
            *v /= integral;
        }
        Ok(table)
    }

    /// Rescaled product `T_{q-1} ⋯ T_p` as a matrix (maps slot p to slot q).
    fn middle_product(&self, p: usize, q: usize) -> Result<Scaled2, ChainError> {
        let mut matrix = self.ops[p].kernel.clone();
        let mut log_scale = 0.0;
        let m0 = matrix.max_abs();
        if m0 == 0.0 {
            return Err(ChainError::Underflow { stage: p });
        }
        matrix = matrix.scale(1.0 / m0);
        log_scale += m0.ln();
        for stage in (p + 1)..q {
            matrix = self.ops[stage].kernel.matmul(&matrix);
            let m = matrix.max_abs();
            if m == 0.0 || !m.is_finite() {
                return Err(ChainError::Underflow { stage });
            }
            matrix = matrix.scale(1.0 / m);
            log_scale += m.ln();
        }
        Ok(Scaled2 { matrix, log_scale })
    }
}

#[derive(Debug, Clone)]
struct Scaled2 {
    matrix: Matrix,
    log_scale: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Insertion;
    use cone_core::operator::PositiveOperator;
    use cone_core::rank_one::rank_one_approx;

    fn op(rows: &[&[f64]]) -> PositiveOperator {
        PositiveOperator::new(Matrix::from_rows(rows)).unwrap()
    }

    fn two_state_chain(beta: f64, eps: f64, n_ops: usize) -> ChainModel {
        let ops: Vec<_> = (0..n_ops)
            .map(|_| op(&[&[beta, eps], &[eps, 1.0]]))
            .collect();
        ChainModel::new(vec![1.0, 1.0], vec![1.0, 1.0], ops, 0.0, 0.0).unwrap()
    }

    /// Exhaustive reference for small two-state chains: P(config) ∝
    /// v[s_0] Π K[s_{p+1}, s_p] u[s_M].
    fn brute_force_joint(chain: &ChainModel) -> Vec<f64> {
        let slots = chain.n_slots();
        let configs = 1usize << slots;
        let mut probs = vec![0.0; configs];
        let mut total = 0.0;
        for c in 0..configs {
            let state = |p: usize| (c >> p) & 1;
            let mut w = chain.right[state(0)];
            for (stage, o) in chain.ops.iter().enumerate() {
                w *= o.kernel[(state(stage + 1), state(stage))];
            }
            w *= chain.left[state(slots - 1)];
            probs[c] = w;
            total += w;
        }
        for p in probs.iter_mut() {
            *p /= total;
        }
        probs
    }

    #[test]
    fn messages_consistent_across_slots() {
        let chain = two_state_chain(1.2, 0.3, 12);
        let messages = ChainMessages::compute(&chain).unwrap();
        let z0 = messages.log_partition_at(0).unwrap();
        for p in 1..chain.n_slots() {
            let zp = messages.log_partition_at(p).unwrap();
            assert!((zp - z0).abs() < 1e-11, "slot {p}: {zp} vs {z0}");
        }
        assert!((chain.log_partition_function().unwrap() - z0).abs() < 1e-11);
    }

    #[test]
    fn single_operator_marginal_matches_direct() {
        let chain = two_state_chain(2.0, 0.5, 1);
        let w = vec![vec![1.0, 1.0]];
        let table = chain.marginal_density(&[0], &w).unwrap();
        assert!((table.integral() - 1.0).abs() < 1e-12);
        // direct: P(s_0 = a) ∝ v[a]·Σ_b u[b] K[b, a]
        let k = &chain.ops[0].kernel;
        let p0 = k[(0, 0)] + k[(1, 0)];
        let p1 = k[(0, 1)] + k[(1, 1)];
        let z = p0 + p1;
        assert!((table.value(&[0]) - p0 / z).abs() < 1e-12);
        assert!((table.value(&[1]) - p1 / z).abs() < 1e-12);
    }

    #[test]
    fn marginals_match_brute_force_enumeration() {
        let chain = two_state_chain(1.1, 0.25, 9); // 10 slots = 2^10 configs
        let probs = brute_force_joint(&chain);
        let slots = chain.n_slots();

        // one-point at slot 3
        let w1 = vec![vec![1.0, 1.0]];
        let table = chain.marginal_density(&[3], &w1).unwrap();
        for a in 0..2 {
            let mut expect = 0.0;
            for (c, &p) in probs.iter().enumerate() {
                if (c >> 3) & 1 == a {
                    expect += p;
                }
            }
            assert!((table.value(&[a]) - expect).abs() < 1e-11);
        }

        // two-point at slots (2, 6)
        let w2 = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let table = chain.marginal_density(&[2, 6], &w2).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let mut expect = 0.0;
                for (c, &p) in probs.iter().enumerate() {
                    if (c >> 2) & 1 == a && (c >> 6) & 1 == b {
                        expect += p;
                    }
                }
                assert!((table.value(&[a, b]) - expect).abs() < 1e-11);
            }
        }

        // three-point at slots (1, 4, 8)
        let w3 = vec![vec![1.0, 1.0]; 3];
        let table = chain.marginal_density(&[1, 4, 8], &w3).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                for c3 in 0..2 {
                    let mut expect = 0.0;
                    for (c, &p) in probs.iter().enumerate() {
                        if (c >> 1) & 1 == a && (c >> 4) & 1 == b && (c >> 8) & 1 == c3 {
                            expect += p;
                        }
                    }
                    assert!((table.value(&[a, b, c3]) - expect).abs() < 1e-11);
                }
            }
        }
        let _ = slots;
    }

    #[test]
    fn rank_one_cut_factorizes_pair_marginal() {
        // A rank-one operator in the middle decouples the two halves.
        let t = op(&[&[1.0, 0.1], &[0.1, 1.0]]);
        let cut = rank_one_approx(&t, &[1.0, 1.0]).unwrap().as_operator();
        let cut = PositiveOperator::new(cut.kernel.clone()).unwrap();
        let mut ops: Vec<_> = (0..8).map(|_| t.clone()).collect();
        ops[4] = cut;
        let chain = ChainModel::new(vec![1.0, 1.0], vec![1.0, 1.0], ops, 0.0, 0.0).unwrap();
        let w = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let pair = chain.marginal_density(&[2, 6], &w).unwrap();
        let one_a = chain.marginal_density(&[2], &w[..1]).unwrap();
        let one_b = chain.marginal_density(&[6], &w[..1]).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let product = one_a.value(&[a]) * one_b.value(&[b]);
                assert!(
                    (pair.value(&[a, b]) - product).abs() < 1e-10,
                    "({a},{b}): {} vs {}",
                    pair.value(&[a, b]),
                    product
                );
            }
        }
    }

    #[test]
    fn correlation_consistent_with_marginal() {
        let chain = two_state_chain(0.9, 0.2, 10);
        let x = Insertion::new(4, vec![1.0, 0.0]).unwrap();
        let via_corr = chain.correlation(std::slice::from_ref(&x)).unwrap();
        let w = vec![vec![1.0, 1.0]];
        let table = chain.marginal_density(&[4], &w).unwrap();
        assert!((via_corr - table.value(&[0])).abs() < 1e-12);
    }
}
