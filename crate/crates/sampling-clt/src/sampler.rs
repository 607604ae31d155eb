//! Exact replica sampling: the top slot is drawn from `u ⊙ m_M`, then each
//! lower slot from the kernel-row conditional by inverse CDF on the grid.
//! Replicas use independent derived streams, so batches are reproducible
//! bit-for-bit from the seed regardless of scheduling.

use cone_core::rng::Rng;
use transfer_chain::{ChainModel, Scaled};

use crate::error::SamplingError;

/// Matrix of sampled node indices, `positions[replica][slot]`.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub seed: u64,
    pub n_samples: usize,
    pub positions: Vec<Vec<usize>>,
}

impl SampleBatch {
    /// Sampled positions of one slot across replicas, mapped through node
    /// coordinates.
    pub fn slot_values(&self, slot: usize, nodes: &[f64]) -> Vec<f64> {
        self.positions.iter().map(|r| nodes[r[slot]]).collect()
    }
}

pub fn sample_positions(
    chain: &ChainModel,
    messages: &[Scaled],
    seed: u64,
    n_samples: usize,
) -> Result<SampleBatch, SamplingError> {
    let m = chain.len();
    if messages.len() != m + 1 {
        return Err(SamplingError::InvalidParameter {
            name: "messages",
            detail: format!("need {} messages, got {}", m + 1, messages.len()),
        });
    }

    // top-slot law: u ⊙ m_M
    let top: Vec<f64> = chain
        .left
        .iter()
        .zip(&messages[m].vec)
        .map(|(u, v)| u * v)
        .collect();
    let top_cdf = cumulative(&top).ok_or(SamplingError::DegenerateConditional { site: m })?;

    let mut positions = Vec::with_capacity(n_samples);
    for replica in 0..n_samples {
        let mut rng = Rng::derive(seed, replica as u64);
        let mut path = vec![0usize; m + 1];
        path[m] = draw(&top_cdf, &mut rng);
        for p in (0..m).rev() {
            let above = path[p + 1];
            let row = chain.ops[p].kernel.row(above);
            let weights: Vec<f64> = row
                .iter()
                .zip(&messages[p].vec)
                .map(|(k, msg)| k * msg)
                .collect();
            let cdf = cumulative(&weights)
                .ok_or(SamplingError::DegenerateConditional { site: p })?;
            path[p] = draw(&cdf, &mut rng);
        }
        positions.push(path);
    }
    Ok(SampleBatch {
        seed,
        n_samples,
        positions,
    })
}

fn cumulative(weights: &[f64]) -> Option<Vec<f64>> {
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for &w in weights {
        acc += w.max(0.0);
        cdf.push(acc);
    }
    if acc > 0.0 && acc.is_finite() {
        Some(cdf)
    } else {
        None
    }
}

fn draw(cdf: &[f64], rng: &mut Rng) -> usize {
    let total = *cdf.last().unwrap();
    let t = rng.f64() * total;
    cdf.partition_point(|&c| c <= t).min(cdf.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::messages::backward_messages;
    use cone_core::linalg::Matrix;
    use cone_core::operator::PositiveOperator;
    use cone_core::rank_one::rank_one_approx;

    fn two_state_chain(beta: f64, eps: f64, n_ops: usize) -> ChainModel {
        let op =
            PositiveOperator::new(Matrix::from_rows(&[&[beta, eps], &[eps, 1.0]])).unwrap();
        let ops: Vec<_> = (0..n_ops).map(|_| op.clone()).collect();
        ChainModel::new(vec![1.0, 1.0], vec![1.0, 1.0], ops, 0.0, 0.0).unwrap()
    }

    #[test]
    fn identical_seeds_reproduce_batches() {
        let chain = two_state_chain(1.2, 0.3, 8);
        let msgs = backward_messages(&chain).unwrap();
        let a = sample_positions(&chain, &msgs, 42, 200).unwrap();
        let b = sample_positions(&chain, &msgs, 42, 200).unwrap();
        assert_eq!(a.positions, b.positions);
        let c = sample_positions(&chain, &msgs, 43, 200).unwrap();
        assert_ne!(a.positions, c.positions);
    }

    #[test]
    fn single_site_histogram_matches_marginal() {
        let chain = two_state_chain(1.7, 0.4, 1);
        let msgs = backward_messages(&chain).unwrap();
        let n = 100_000;
        let batch = sample_positions(&chain, &msgs, 7, n).unwrap();
        let w = vec![vec![1.0, 1.0]];
        for slot in 0..2 {
            let table = chain.marginal_density(&[slot], &w).unwrap();
            let freq = batch
                .positions
                .iter()
                .filter(|p| p[slot] == 0)
                .count() as f64
                / n as f64;
            let expect = table.value(&[0]);
            let se = (expect * (1.0 - expect) / n as f64).sqrt();
            assert!(
                (freq - expect).abs() <= 3.0 * se + 1e-12,
                "slot {slot}: {freq} vs {expect} (se {se})"
            );
        }
    }

    #[test]
    fn pair_frequencies_match_brute_force() {
        let chain = two_state_chain(1.1, 0.25, 9);
        let msgs = backward_messages(&chain).unwrap();
        let n = 100_000;
        let batch = sample_positions(&chain, &msgs, 11, n).unwrap();
        // exhaustive reference over 2^10 configurations
        let slots = chain.n_slots();
        let mut joint = [[0.0f64; 2]; 2];
        let mut total = 0.0;
        for c in 0..(1usize << slots) {
            let state = |p: usize| (c >> p) & 1;
            let mut w = chain.right[state(0)];
            for (stage, o) in chain.ops.iter().enumerate() {
                w *= o.kernel[(state(stage + 1), state(stage))];
            }
            w *= chain.left[state(slots - 1)];
            joint[state(2)][state(7)] += w;
            total += w;
        }
        for a in 0..2 {
            for b in 0..2 {
                joint[a][b] /= total;
            }
        }
        for a in 0..2 {
            for b in 0..2 {
                let freq = batch
                    .positions
                    .iter()
                    .filter(|p| p[2] == a && p[7] == b)
                    .count() as f64
                    / n as f64;
                let se = (joint[a][b] * (1.0 - joint[a][b]) / n as f64).sqrt();
                assert!(
                    (freq - joint[a][b]).abs() <= 3.5 * se + 1e-12,
                    "({a},{b}): {freq} vs {}",
                    joint[a][b]
                );
            }
        }
    }

    #[test]
    fn decoupled_blocks_have_independent_samples() {
        let t = PositiveOperator::new(Matrix::from_rows(&[&[1.0, 0.2], &[0.2, 1.0]])).unwrap();
        let cut = rank_one_approx(&t, &[1.0, 1.0]).unwrap().as_operator();
        let cut = PositiveOperator::new(cut.kernel.clone()).unwrap();
        let mut ops: Vec<_> = (0..8).map(|_| t.clone()).collect();
        ops[4] = cut;
        let chain = ChainModel::new(vec![1.0, 1.0], vec![1.0, 1.0], ops, 0.0, 0.0).unwrap();
        let msgs = backward_messages(&chain).unwrap();
        let n = 50_000;
        let batch = sample_positions(&chain, &msgs, 3, n).unwrap();
        // empirical correlation of states across the cut
        let xs: Vec<f64> = batch.positions.iter().map(|p| p[2] as f64).collect();
        let ys: Vec<f64> = batch.positions.iter().map(|p| p[6] as f64).collect();
        let mx = xs.iter().sum::<f64>() / n as f64;
        let my = ys.iter().sum::<f64>() / n as f64;
        let mut cov = 0.0;
        let mut vx = 0.0;
        let mut vy = 0.0;
        for (x, y) in xs.iter().zip(&ys) {
            cov += (x - mx) * (y - my);
            vx += (x - mx) * (x - mx);
            vy += (y - my) * (y - my);
        }
        let corr = cov / (vx.sqrt() * vy.sqrt());
        assert!(
            corr.abs() <= 2.0 / (n as f64).sqrt() + 0.01,
            "correlation across cut: {corr}"
        );
    }

    #[test]
    fn degenerate_conditional_reports_site() {
        // A zero kernel row makes the corresponding top state unreachable,
        // so the degeneracy surfaces at the top-slot law when the boundary
        // functional insists on that state.
        let zero_row = PositiveOperator::new(Matrix::from_rows(&[&[0.0, 0.0], &[1.0, 1.0]]))
            .unwrap();
        let ok = PositiveOperator::new(Matrix::from_rows(&[&[1.0, 0.5], &[0.5, 1.0]])).unwrap();
        let chain = ChainModel::new(
            vec![1.0, 0.0], // demands the state whose row vanished
            vec![1.0, 1.0],
            vec![ok, zero_row],
            0.0,
            0.0,
        )
        .unwrap();
        let msgs = backward_messages(&chain).unwrap();
        match sample_positions(&chain, &msgs, 1, 10) {
            Err(SamplingError::DegenerateConditional { site }) => assert_eq!(site, 2),
            other => panic!("expected degenerate conditional, got {other:?}"),
        }
    }
}
