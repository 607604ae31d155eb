//! The chain model and its log-stabilized bracket evaluation.

use cone_core::linalg::{dot, norm_inf};
use cone_core::operator::PositiveOperator;

use crate::error::ChainError;

/// A vector carried together with the log of the normalization factor that
/// was stripped off, so `exp(log_scale) · vec` is the true value.
#[derive(Debug, Clone)]
pub struct Scaled {
    pub vec: Vec<f64>,
    pub log_scale: f64,
}

impl Scaled {
    pub fn plain(vec: Vec<f64>) -> Self {
        Scaled {
            vec,
            log_scale: 0.0,
        }
    }
}

/// Applies `op` to `f`, normalizes the image to unit max-entry and adds the
/// removed factor to `log_scale`. The identity
/// `exp(log_scale') · normalized = op(f) · exp(log_scale)` is exact.
pub fn apply_rescaled(
    op: &PositiveOperator,
    f: &[f64],
    log_scale: f64,
    stage: usize,
) -> Result<(Vec<f64>, f64), ChainError> {
    if f.len() != op.dim_in() {
        return Err(ChainError::Dimension {
            stage,
            expected: op.dim_in(),
            got: f.len(),
        });
    }
    let mut y = op.apply(f);
    let m = norm_inf(&y);
    if m == 0.0 || !m.is_finite() {
        return Err(ChainError::Underflow { stage });
    }
    for v in y.iter_mut() {
        *v /= m;
    }
    Ok((y, log_scale + m.ln()))
}

/// Diagonal observable inserted at a slot of the chain.
///
/// Slot `p` multiplies the intermediate vector after `p` operators have been
/// applied to the right boundary; entries must be nonnegative so the
/// insertion preserves positivity.
#[derive(Debug, Clone)]
pub struct Insertion {
    pub position: usize,
    pub weights: Vec<f64>,
}

impl Insertion {
    pub fn new(position: usize, weights: Vec<f64>) -> Result<Self, ChainError> {
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(ChainError::InvalidInsertion(format!(
                "weights at position {position} must be finite and nonnegative"
            )));
        }
        Ok(Insertion { position, weights })
    }

    pub fn identity(position: usize, dim: usize) -> Self {
        Insertion {
            position,
            weights: vec![1.0; dim],
        }
    }
}

/// Boundary functional `u`, boundary vector `v`, ordered operators
/// `T_0 … T_{M-1}` and the chain's contraction certificate `(R, κ)`.
#[derive(Debug, Clone)]
pub struct ChainModel {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub ops: Vec<PositiveOperator>,
    /// Common bound on the projective diameter of the operator images.
    pub diameter_bound: f64,
    /// Common contraction bound in [0, 1).
    pub contraction: f64,
}

impl ChainModel {
    pub fn new(
        left: Vec<f64>,
        right: Vec<f64>,
        ops: Vec<PositiveOperator>,
        diameter_bound: f64,
        contraction: f64,
    ) -> Result<Self, ChainError> {
        let mut dim = right.len();
        for (stage, op) in ops.iter().enumerate() {
            if op.dim_in() != dim {
                return Err(ChainError::Dimension {
                    stage,
                    expected: dim,
                    got: op.dim_in(),
                });
            }
            dim = op.dim_out();
        }
        if left.len() != dim {
            return Err(ChainError::Dimension {
                stage: ops.len(),
                expected: dim,
                got: left.len(),
            });
        }
        Ok(ChainModel {
            left,
            right,
            ops,
            diameter_bound,
            contraction,
        })
    }

    /// Number of operators.
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Number of insertion slots (`len() + 1`).
    pub fn n_slots(&self) -> usize {
        self.ops.len() + 1
    }

    /// Dimension of the intermediate vector at slot `p`.
    pub fn slot_dim(&self, p: usize) -> usize {
        if p == 0 {
            self.right.len()
        } else {
            self.ops[p - 1].dim_out()
        }
    }

    /// log`(u, T_{M-1} ⋯ T_0 v)` via rescaled products.
    pub fn log_partition_function(&self) -> Result<f64, ChainError> {
        self.log_bracket(&[])
    }

    /// log of the bracket with diagonal insertions applied at their slots.
    /// Positions must be strictly increasing.
    pub fn log_bracket(&self, insertions: &[Insertion]) -> Result<f64, ChainError> {
        self.validate_insertions(insertions)?;
        let mut by_slot: Vec<Option<&Insertion>> = vec![None; self.n_slots()];
        for ins in insertions {
            by_slot[ins.position] = Some(ins);
        }

        let mut vec = self.right.clone();
        let mut log_scale = 0.0;
        if let Some(ins) = by_slot[0] {
            apply_diagonal(&mut vec, &ins.weights, 0)?;
        }
        for (stage, op) in self.ops.iter().enumerate() {
            let (v, ls) = apply_rescaled(op, &vec, log_scale, stage)?;
            vec = v;
            log_scale = ls;
            if let Some(ins) = by_slot[stage + 1] {
                apply_diagonal(&mut vec, &ins.weights, stage + 1)?;
            }
        }
        let z = dot(&self.left, &vec);
        if z <= 0.0 || !z.is_finite() {
            return Err(ChainError::NonPositivePartition { value: z });
        }
        Ok(z.ln() + log_scale)
    }

    /// k-point correlation `ρ(X_k, …, X_1)` = inserted bracket / Z.
    /// An empty insertion list gives exactly 1.
    pub fn correlation(&self, insertions: &[Insertion]) -> Result<f64, ChainError> {
        if insertions.is_empty() {
            return Ok(1.0);
        }
        let num = self.log_bracket(insertions)?;
        let den = self.log_partition_function()?;
        Ok((num - den).exp())
    }

    fn validate_insertions(&self, insertions: &[Insertion]) -> Result<(), ChainError> {
        let mut prev: Option<usize> = None;
        for ins in insertions {
            if ins.position >= self.n_slots() {
                return Err(ChainError::InvalidInsertion(format!(
                    "position {} outside chain with {} slots",
                    ins.position,
                    self.n_slots()
                )));
            }
            if let Some(p) = prev {
                if ins.position <= p {
                    return Err(ChainError::InvalidInsertion(format!(
                        "positions must be strictly increasing, got {} after {}",
                        ins.position, p
                    )));
                }
            }
            if ins.weights.len() != self.slot_dim(ins.position) {
                return Err(ChainError::InvalidInsertion(format!(
                    "weights at position {} have dimension {}, slot has {}",
                    ins.position,
                    ins.weights.len(),
                    self.slot_dim(ins.position)
                )));
            }
            prev = Some(ins.position);
        }
        Ok(())
    }
}

fn apply_diagonal(vec: &mut [f64], weights: &[f64], slot: usize) -> Result<(), ChainError> {
    if weights.len() != vec.len() {
        return Err(ChainError::Dimension {
            stage: slot,
            expected: vec.len(),
            got: weights.len(),
        });
    }
    for (v, w) in vec.iter_mut().zip(weights) {
        *v *= w;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use cone_core::linalg::Matrix;

    fn op(rows: &[&[f64]]) -> PositiveOperator {
        PositiveOperator::new(Matrix::from_rows(rows)).unwrap()
    }

    fn two_by_two(beta: f64, eps: f64) -> PositiveOperator {
        op(&[&[beta, eps], &[eps, 1.0]])
    }

    #[test]
    fn rescale_identity_case() {
        let id = op(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let (v, ls) = apply_rescaled(&id, &[2.0, 2.0], 0.0, 0).unwrap();
        assert_eq!(v, vec![1.0, 1.0]);
        assert!((ls - 2.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn rescale_eigenvector_chain() {
        let t = op(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let mut v = vec![1.0, 1.0];
        let mut ls = 0.0;
        for stage in 0..100 {
            let (nv, nls) = apply_rescaled(&t, &v, ls, stage).unwrap();
            v = nv;
            ls = nls;
        }
        assert!((ls - 100.0 * 3.0f64.ln()).abs() < 1e-9);
        assert!((v[0] - 1.0).abs() < 1e-12 && (v[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn underflow_names_stage() {
        let z = op(&[&[0.0, 0.0], &[0.0, 0.0]]);
        match apply_rescaled(&z, &[1.0, 1.0], 0.0, 7) {
            Err(ChainError::Underflow { stage }) => assert_eq!(stage, 7),
            other => panic!("expected underflow, got {other:?}"),
        }
    }

    #[test]
    fn single_operator_partition() {
        let chain = ChainModel::new(
            vec![1.0, 1.0],
            vec![1.0, 1.0],
            vec![op(&[&[2.0, 1.0], &[1.0, 2.0]])],
            0.0,
            0.0,
        )
        .unwrap();
        let z = chain.log_partition_function().unwrap();
        assert!((z - 6.0f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn homogeneous_log_partition_approaches_eigenvalue() {
        let eps = 0.1f64;
        let beta = 1.3f64;
        let lambda = ((beta + 1.0) + ((beta - 1.0).powi(2) + 4.0 * eps * eps).sqrt()) / 2.0;
        for n in [50usize, 100, 200] {
            let ops: Vec<_> = (0..n).map(|_| two_by_two(beta, eps)).collect();
            let chain =
                ChainModel::new(vec![1.0, 1.0], vec![1.0, 1.0], ops, 0.0, 0.0).unwrap();
            let f = chain.log_partition_function().unwrap() / n as f64;
            assert!(
                (f - lambda.ln()).abs() < 3.0 / n as f64,
                "n = {n}: {f} vs {}",
                lambda.ln()
            );
        }
    }

    #[test]
    fn inhomogeneous_matches_direct_triple_product() {
        let a = op(&[&[0.3, 1.2], &[0.4, 0.9]]);
        let b = op(&[&[1.1, 0.2], &[0.6, 0.5]]);
        let c = op(&[&[0.8, 0.7], &[0.3, 1.4]]);
        let u = vec![0.5, 1.5];
        let v = vec![1.2, 0.3];
        let chain = ChainModel::new(
            u.clone(),
            v.clone(),
            vec![a.clone(), b.clone(), c.clone()],
            0.0,
            0.0,
        )
        .unwrap();
        let direct = dot(&u, &c.compose(&b).compose(&a).apply(&v));
        let z = chain.log_partition_function().unwrap();
        assert!((z - direct.ln()).abs() < 1e-12);
    }

    #[test]
    fn identity_insertion_gives_one() {
        let ops: Vec<_> = (0..8).map(|_| two_by_two(1.0, 0.1)).collect();
        let chain = ChainModel::new(vec![1.0, 1.0], vec![1.0, 1.0], ops, 0.0, 0.0).unwrap();
        for p in 0..chain.n_slots() {
            let rho = chain
                .correlation(&[Insertion::identity(p, 2)])
                .unwrap();
            assert!((rho - 1.0).abs() < 1e-12, "slot {p}: {rho}");
        }
        // zero insertions
        assert_eq!(chain.correlation(&[]).unwrap(), 1.0);
    }

    #[test]
    fn overlapping_positions_rejected() {
        let ops: Vec<_> = (0..4).map(|_| two_by_two(1.0, 0.1)).collect();
        let chain = ChainModel::new(vec![1.0, 1.0], vec![1.0, 1.0], ops, 0.0, 0.0).unwrap();
        let x = Insertion::identity(2, 2);
        let y = Insertion::identity(2, 2);
        assert!(matches!(
            chain.correlation(&[x, y]),
            Err(ChainError::InvalidInsertion(_))
        ));
    }

    #[test]
    fn far_apart_insertions_approximately_factorize() {
        let n = 40;
        let ops: Vec<_> = (0..n).map(|_| two_by_two(1.0, 0.1)).collect();
        let chain = ChainModel::new(vec![1.0, 1.0], vec![1.0, 1.0], ops, 0.0, 0.0).unwrap();
        let x = Insertion::new(10, vec![1.0, 0.0]).unwrap();
        let y = Insertion::new(30, vec![1.0, 0.0]).unwrap();
        let joint = chain.correlation(&[x.clone(), y.clone()]).unwrap();
        let px = chain.correlation(std::slice::from_ref(&x)).unwrap();
        let py = chain.correlation(std::slice::from_ref(&y)).unwrap();
        // gap 20 at κ ≈ 0.818: deviation of order κ^20 ≈ 2e-2
        assert!((joint / (px * py) - 1.0).abs() < 0.05);
    }
}
