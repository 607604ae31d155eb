//! Truncated marginals via the recursion over set partitions:
//! `ρ^T_J = ρ_J − Σ over proper partitions of Π ρ^T_blocks`.
//!
//! Memoized by subset bitmask; subsets are capped at 4 sites, which keeps
//! the Bell-number growth irrelevant.

use std::collections::HashMap;

use crate::error::ChainError;
use crate::marginal::{flatten, unflatten, MarginalTable};

/// Truncated companion of a [`MarginalTable`]; values may be negative.
#[derive(Debug, Clone)]
pub struct TruncatedMarginalTable {
    pub sites: Vec<usize>,
    pub dims: Vec<usize>,
    pub values: Vec<f64>,
    pub weights: Vec<Vec<f64>>,
}

impl TruncatedMarginalTable {
    pub fn value(&self, idx: &[usize]) -> f64 {
        self.values[flatten(idx, &self.dims)]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// All partitions of `{0, …, k-1}` as block-assignment vectors in restricted
/// growth form (`assign[i]` = block index of element `i`).
pub fn set_partitions(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut assign = vec![0usize; k];
    fn rec(i: usize, max_used: usize, assign: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == assign.len() {
            out.push(assign.clone());
            return;
        }
        for b in 0..=max_used + 1 {
            assign[i] = b;
            rec(i + 1, max_used.max(b), assign, out);
        }
    }
    if k == 0 {
        out.push(Vec::new());
        return out;
    }
    rec(1, 0, &mut assign, &mut out);
    out
}

/// Truncated marginal for `target`, given plain marginals for every
/// nonempty subset of `target` (keyed by sorted site lists).
pub fn truncated_marginal(
    tables: &HashMap<Vec<usize>, MarginalTable>,
    target: &[usize],
) -> Result<TruncatedMarginalTable, ChainError> {
    if target.is_empty() || target.len() > 4 {
        return Err(ChainError::InvalidInsertion(
            "truncated marginals support 1 to 4 sites".into(),
        ));
    }
    if target.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ChainError::InvalidInsertion(
            "sites must be strictly increasing".into(),
        ));
    }
    let mut memo: HashMap<u32, TruncatedMarginalTable> = HashMap::new();
    let full_mask = (1u32 << target.len()) - 1;
    truncated_rec(tables, target, full_mask, &mut memo)?;
    Ok(memo.remove(&full_mask).expect("memoized"))
}

fn truncated_rec(
    tables: &HashMap<Vec<usize>, MarginalTable>,
    target: &[usize],
    mask: u32,
    memo: &mut HashMap<u32, TruncatedMarginalTable>,
) -> Result<(), ChainError> {
    if memo.contains_key(&mask) {
        return Ok(());
    }
    let members: Vec<usize> = (0..target.len()).filter(|i| mask >> i & 1 == 1).collect();
    let sites: Vec<usize> = members.iter().map(|&i| target[i]).collect();
    let base = tables
        .get(&sites)
        .ok_or_else(|| ChainError::MissingSubMarginal(sites.clone()))?;

    let mut values = base.values.clone();
    let k = members.len();
    for assign in set_partitions(k) {
        let n_blocks = assign.iter().copied().max().map_or(0, |b| b + 1);
        if n_blocks <= 1 {
            continue; // skip the trivial partition: it is the left-hand side
        }
        // masks of each block, in target-index space
        let mut block_masks = vec![0u32; n_blocks];
        for (i, &b) in assign.iter().enumerate() {
            block_masks[b] |= 1 << members[i];
        }
        for &bm in &block_masks {
            truncated_rec(tables, target, bm, memo)?;
        }
        // subtract the product of block truncated marginals
        let dims = &base.dims;
        let mut idx = vec![0usize; k];
        for (flat, v) in values.iter_mut().enumerate() {
            unflatten(flat, dims, &mut idx);
            let mut prod = 1.0;
            for &bm in &block_masks {
                let block = &memo[&bm];
                // indices of this block within the current subset
                let sub_idx: Vec<usize> = members
                    .iter()
                    .enumerate()
                    .filter(|(_, &m)| bm >> m & 1 == 1)
                    .map(|(pos, _)| idx[pos])
                    .collect();
                prod *= block.value(&sub_idx);
            }
            *v -= prod;
        }
    }

    memo.insert(
        mask,
        TruncatedMarginalTable {
            sites,
            dims: base.dims.clone(),
            values,
            weights: base.weights.clone(),
        },
    );
    Ok(())
}
