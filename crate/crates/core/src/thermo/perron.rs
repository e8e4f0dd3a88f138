//! Perron eigendata of a nonnegative irreducible weight matrix.
//!
//! Power iteration accelerated by repeated squaring of the shifted matrix
//! `M + cI` (the shift makes periodic transition structures converge), with
//! a two-sided Rayleigh quotient and a residual-driven polish.

use crate::error::{Error, Result};

pub struct PerronData {
    /// Leading eigenvalue of the original (unshifted) matrix.
    pub lambda: f64,
    /// Right eigenvector, positive, L1-normalized.
    pub right: Vec<f64>,
    /// Left eigenvector, positive, normalized so that left . right = 1.
    pub left: Vec<f64>,
}

/// edges[u] lists targets of u; the weight of every edge out of u is w[u].
pub fn source_weighted(edges: &[Vec<usize>], w: &[f64]) -> Result<PerronData> {
    let n = edges.len();
    if n == 0 {
        return Err(Error::Structural("empty state graph".into()));
    }
    if !is_strongly_connected(edges) {
        return Err(Error::Structural(
            "state graph is reducible; the transition structure does not mix at this depth".into(),
        ));
    }
    if w.iter().any(|x| !x.is_finite() || *x <= 0.0) {
        return Err(Error::Numerical("matrix weights must be positive and finite".into()));
    }

    let mut dense = vec![0.0f64; n * n];
    for (u, targets) in edges.iter().enumerate() {
        for &v in targets {
            dense[u * n + v] = w[u];
        }
    }
    let max_row: f64 = (0..n)
        .map(|u| dense[u * n..(u + 1) * n].iter().sum::<f64>())
        .fold(0.0, f64::max);
    let shift = 0.125 * max_row;
    let mut b = dense.clone();
    for u in 0..n {
        b[u * n + u] += shift;
    }

    // Square until the rank-one limit stabilizes.
    let mut right = vec![1.0 / n as f64; n];
    let mut left = vec![1.0 / n as f64; n];
    for _ in 0..64 {
        b = mat_square(&b, n);
        scale_inplace(&mut b);
        right = normalize_l1(row_sums(&b, n));
        left = normalize_l1(col_sums(&b, n));
        if rayleigh_residual(&dense, n, &right, &left, shift) < 1e-15 {
            break;
        }
    }

    // Polish with plain power steps on the shifted matrix until the residual
    // of the original matrix is at machine level.
    let mut shifted = dense.clone();
    for u in 0..n {
        shifted[u * n + u] += shift;
    }
    let mut lambda = two_sided_rayleigh(&dense, n, &right, &left);
    for _ in 0..20_000 {
        let r_res = residual(&dense, n, &right, lambda, false);
        let l_res = residual(&dense, n, &left, lambda, true);
        if r_res <= 1e-14 * lambda.abs().max(1.0) && l_res <= 1e-14 * lambda.abs().max(1.0) {
            break;
        }
        right = normalize_l1(mat_vec(&shifted, n, &right, false));
        left = normalize_l1(mat_vec(&shifted, n, &left, true));
        lambda = two_sided_rayleigh(&dense, n, &right, &left);
    }
    if right.iter().chain(left.iter()).any(|x| !x.is_finite() || *x <= 0.0) {
        return Err(Error::Numerical("power iteration produced a non-positive eigenvector".into()));
    }

    // left . right = 1.
    let dot: f64 = left.iter().zip(&right).map(|(a, b)| a * b).sum();
    for x in left.iter_mut() {
        *x /= dot;
    }
    Ok(PerronData { lambda, right, left })
}

fn is_strongly_connected(edges: &[Vec<usize>]) -> bool {
    let n = edges.len();
    let mut rev = vec![Vec::new(); n];
    for (u, ts) in edges.iter().enumerate() {
        for &v in ts {
            rev[v].push(u);
        }
    }
    let reach = |adj: &[Vec<usize>]| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|b| b)
    };
    reach(edges) && reach(&rev)
}

fn mat_square(m: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let mik = m[i * n + k];
            if mik == 0.0 {
                continue;
            }
            let row_k = &m[k * n..(k + 1) * n];
            let row_out = &mut out[i * n..(i + 1) * n];
            for (o, &v) in row_out.iter_mut().zip(row_k) {
                *o += mik * v;
            }
        }
    }
    out
}

fn scale_inplace(m: &mut [f64]) {
    let max = m.iter().cloned().fold(0.0, f64::max);
    if max > 0.0 {
        for x in m.iter_mut() {
            *x /= max;
        }
    }
}

fn row_sums(m: &[f64], n: usize) -> Vec<f64> {
    (0..n).map(|i| m[i * n..(i + 1) * n].iter().sum()).collect()
}

fn col_sums(m: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            out[j] += m[i * n + j];
        }
    }
    out
}

fn normalize_l1(mut v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        for x in v.iter_mut() {
            *x /= s;
        }
    }
    v
}

fn mat_vec(m: &[f64], n: usize, v: &[f64], transpose: bool) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            if transpose {
                out[j] += m[i * n + j] * v[i];
            } else {
                out[i] += m[i * n + j] * v[j];
            }
        }
    }
    out
}

fn two_sided_rayleigh(m: &[f64], n: usize, right: &[f64], left: &[f64]) -> f64 {
    let mv = mat_vec(m, n, right, false);
    let num: f64 = left.iter().zip(&mv).map(|(a, b)| a * b).sum();
    let den: f64 = left.iter().zip(right).map(|(a, b)| a * b).sum();
    num / den
}

fn residual(m: &[f64], n: usize, v: &[f64], lambda: f64, transpose: bool) -> f64 {
    let mv = mat_vec(m, n, v, transpose);
    mv.iter()
        .zip(v)
        .map(|(a, b)| (a - lambda * b).abs())
        .fold(0.0, f64::max)
}

fn rayleigh_residual(m: &[f64], n: usize, right: &[f64], left: &[f64], _shift: f64) -> f64 {
    let lambda = two_sided_rayleigh(m, n, right, left);
    residual(m, n, right, lambda, false).max(residual(m, n, left, lambda, true))
}
