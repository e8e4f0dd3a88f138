//! Extreme cycle ratios of a source-weighted digraph.
//!
//! Every directed cycle has a ratio (sum of numerators) / (sum of
//! denominators), denominators positive. The minimum and maximum over all
//! cycles are found by a parametric search: lambda is below the maximum
//! ratio iff the graph with edge weights num(u) - lambda * den(u) still has
//! a cycle of nonnegative total weight, which Karp's cycle-mean formula
//! decides exactly in O(V * E).

/// Karp. edges[u] -> targets; weight of every edge out of u is w[u].
/// Returns the maximum (or minimum) cycle mean.
fn extreme_cycle_mean(edges: &[Vec<usize>], w: &[f64], maximize: bool) -> f64 {
    let n = edges.len();
    let inf = f64::INFINITY;
    // dist[k][v] = extreme weight of a k-edge path ending at v.
    let mut dist = vec![vec![if maximize { -inf } else { inf }; n]; n + 1];
    for v in 0..n {
        dist[0][v] = 0.0;
    }
    for k in 1..=n {
        for (u, targets) in edges.iter().enumerate() {
            let base = dist[k - 1][u];
            if !base.is_finite() {
                continue;
            }
            for &v in targets {
                let cand = base + w[u];
                let cur = dist[k][v];
                if (maximize && cand > cur) || (!maximize && cand < cur) {
                    dist[k][v] = cand;
                }
            }
        }
    }
    let mut best = if maximize { -inf } else { inf };
    for v in 0..n {
        if !dist[n][v].is_finite() {
            continue;
        }
        // max mean: max_v min_k; min mean: min_v max_k.
        let mut inner = if maximize { inf } else { -inf };
        for k in 0..n {
            if !dist[k][v].is_finite() {
                continue;
            }
            let mean = (dist[n][v] - dist[k][v]) / (n - k) as f64;
            if (maximize && mean < inner) || (!maximize && mean > inner) {
                inner = mean;
            }
        }
        if (maximize && inner > best) || (!maximize && inner < best) {
            best = inner;
        }
    }
    best
}

/// Minimum and maximum cycle ratio of (num / den) over directed cycles.
/// Denominators must be positive; the graph must contain a cycle (it does
/// for the strongly connected graphs this crate builds).
pub fn cycle_ratio_extremes(edges: &[Vec<usize>], num: &[f64], den: &[f64], tol: f64) -> (f64, f64) {
    let ratios: Vec<f64> = num.iter().zip(den).map(|(a, b)| a / b).collect();
    let lo_all = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi_all = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi_all - lo_all <= tol {
        // Every per-state ratio coincides, hence every cycle ratio does.
        return (lo_all, hi_all);
    }

    let weights_at = |lambda: f64| -> Vec<f64> {
        num.iter().zip(den).map(|(a, b)| a - lambda * b).collect()
    };

    // Max ratio: bisect on "exists a cycle with mean >= 0".
    let (mut lo, mut hi) = (lo_all, hi_all);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if extreme_cycle_mean(edges, &weights_at(mid), true) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let max_ratio = 0.5 * (lo + hi);

    // Min ratio: bisect on "exists a cycle with mean <= 0".
    let (mut lo, mut hi) = (lo_all, hi_all);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if extreme_cycle_mean(edges, &weights_at(mid), false) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let min_ratio = 0.5 * (lo + hi);

    (min_ratio, max_ratio)
}
