//! Lawson-Hanson nonnegative least squares, used as the linear-feasibility
//! engine behind ray-generated cones: `x` lies in the cone spanned by the
//! columns of `A` iff `min_{λ ≥ 0} ‖Aλ − x‖` is (numerically) zero.

use crate::linalg::Matrix;

/// Solves `min ‖A λ − b‖₂` subject to `λ ≥ 0`.
/// Returns `(λ, residual_norm)`.
pub fn nnls(a: &Matrix, b: &[f64], max_iters: usize) -> (Vec<f64>, f64) {
    let m = a.rows();
    let n = a.cols();
    assert_eq!(b.len(), m);

    let mut passive = vec![false; n];
    let mut x = vec![0.0; n];
    let mut resid: Vec<f64> = b.to_vec();

    let atb_scale = (0..n)
        .map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0f64, f64::max)
        .max(1.0);
    let tol = 1e-12 * atb_scale * b.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);

    for _ in 0..max_iters {
        // gradient w = Aᵀ residual
        let w = a.vecmat(&resid);
        let mut best_j = None;
        let mut best_w = tol;
        for j in 0..n {
            if !passive[j] && w[j] > best_w {
                best_w = w[j];
                best_j = Some(j);
            }
        }
        let Some(j_enter) = best_j else { break };
        passive[j_enter] = true;

        // inner loop: solve unconstrained LS on the passive set, stepping
        // back when entries go negative
        loop {
            let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let z = solve_ls_subset(a, b, &idx);
            if z.iter().all(|&v| v > 0.0) {
                for (k, &j) in idx.iter().enumerate() {
                    x[j] = z[k];
                }
                break;
            }
            // step toward z until the first variable hits zero
            let mut alpha = f64::INFINITY;
            for (k, &j) in idx.iter().enumerate() {
                if z[k] <= 0.0 {
                    let denom = x[j] - z[k];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            for (k, &j) in idx.iter().enumerate() {
                x[j] += alpha * (z[k] - x[j]);
                if x[j] <= 1e-14 {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
            if idx.iter().all(|&j| !passive[j]) {
                break;
            }
        }

        // refresh residual
        resid = b.to_vec();
        for j in 0..n {
            if x[j] != 0.0 {
                for i in 0..m {
                    resid[i] -= a[(i, j)] * x[j];
                }
            }
        }
    }

    let rnorm = resid.iter().map(|v| v * v).sum::<f64>().sqrt();
    (x, rnorm)
}

/// Unconstrained least squares on the selected columns via normal equations
/// with a tiny ridge for rank safety.
fn solve_ls_subset(a: &Matrix, b: &[f64], idx: &[usize]) -> Vec<f64> {
    let k = idx.len();
    let m = a.rows();
    if k == 0 {
        return Vec::new();
    }
    let mut gram = Matrix::zeros(k, k);
    let mut rhs = vec![0.0; k];
    for (p, &jp) in idx.iter().enumerate() {
        for (q, &jq) in idx.iter().enumerate() {
            let mut s = 0.0;
            for i in 0..m {
                s += a[(i, jp)] * a[(i, jq)];
            }
            gram[(p, q)] = s;
        }
        let mut s = 0.0;
        for i in 0..m {
            s += a[(i, jp)] * b[i];
        }
        rhs[p] = s;
    }
    let ridge = 1e-13 * (0..k).map(|p| gram[(p, p)]).fold(0.0f64, f64::max).max(1e-30);
    for p in 0..k {
        gram[(p, p)] += ridge;
    }
    solve_dense(&mut gram, &mut rhs);
    rhs
}

/// In-place Gaussian elimination with partial pivoting.
fn solve_dense(a: &mut Matrix, b: &mut [f64]) {
    let n = b.len();
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if a[(r, col)].abs() > a[(piv, col)].abs() {
                piv = r;
            }
        }
        if piv != col {
            for c in 0..n {
                let tmp = a[(col, c)];
                a[(col, c)] = a[(piv, c)];
                a[(piv, c)] = tmp;
            }
            b.swap(col, piv);
        }
        let d = a[(col, col)];
        if d == 0.0 {
            continue;
        }
        for r in (col + 1)..n {
            let f = a[(r, col)] / d;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                let v = a[(col, c)];
                a[(r, c)] -= f * v;
            }
            b[r] -= f * b[col];
        }
    }
    for col in (0..n).rev() {
        let d = a[(col, col)];
        if d == 0.0 {
            b[col] = 0.0;
            continue;
        }
        let mut s = b[col];
        for c in (col + 1)..n {
            s -= a[(col, c)] * b[c];
        }
        b[col] = s / d;
    }
}
