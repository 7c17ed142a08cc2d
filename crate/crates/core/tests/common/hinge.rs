//! Direct evaluation of the two-class hinge objective, minimized by nested
//! ternary search. Valid for one or two features, where the objective is a
//! convex function of at most two variables.

/// Smallest total hinge slack over the threshold for fixed scores. Labels
/// are 1 or 2. The slack is convex piecewise linear in the threshold, so its
/// minimum sits at a breakpoint.
pub fn min_slack(scores: &[f64], labels: &[usize]) -> f64 {
    let slack = |b: f64| -> f64 {
        scores
            .iter()
            .zip(labels)
            .map(|(&s, &l)| if l == 1 { (1.0 + s - b).max(0.0) } else { (1.0 - s + b).max(0.0) })
            .sum()
    };
    scores
        .iter()
        .zip(labels)
        .map(|(&s, &l)| if l == 1 { 1.0 + s } else { s - 1.0 })
        .map(slack)
        .fold(f64::INFINITY, f64::min)
}

/// `norm_weight·‖w‖₁ + C·min slack`.
pub fn cost(rows: &[Vec<f64>], labels: &[usize], w: &[f64], c: f64, norm_weight: f64) -> f64 {
    let scores: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().zip(w).map(|(x, w)| x * w).sum())
        .collect();
    norm_weight * w.iter().map(|v| v.abs()).sum::<f64>() + c * min_slack(&scores, labels)
}

/// Minimum of a convex function on `[lo, hi]`: `(argmin, min)`.
pub fn ternary(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    for _ in 0..200 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if f(a) <= f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let t = 0.5 * (lo + hi);
    (t, f(t))
}

/// Cost minimized over every weight except `feature`, which is fixed to `t`.
pub fn profile(rows: &[Vec<f64>], labels: &[usize], c: f64, norm_weight: f64, feature: usize, t: f64, radius: f64) -> f64 {
    let n = rows[0].len();
    assert!(n <= 2, "oracle handles at most two features");
    if n == 1 {
        return cost(rows, labels, &[t], c, norm_weight);
    }
    let other = 1 - feature;
    ternary(
        |u| {
            let mut w = [0.0; 2];
            w[feature] = t;
            w[other] = u;
            cost(rows, labels, &w, c, norm_weight)
        },
        -radius,
        radius,
    )
    .1
}

/// Global minimum of the cost.
pub fn min_cost(rows: &[Vec<f64>], labels: &[usize], c: f64, norm_weight: f64, radius: f64) -> f64 {
    ternary(|t| profile(rows, labels, c, norm_weight, 0, t, radius), -radius, radius).1
}

/// `(min |w_I|, max |w_I|)` over weights whose full cost (norm weight 1)
/// stays within `budget`, or `None` if no weight does.
pub fn relevance_bounds(rows: &[Vec<f64>], labels: &[usize], c: f64, budget: f64, feature: usize) -> Option<(f64, f64)> {
    let radius = budget.max(1e-9);
    let h = |t: f64| profile(rows, labels, c, 1.0, feature, t, radius);
    let (t_star, h_star) = ternary(h, -radius, radius);
    if h_star > budget + 1e-9 {
        return None;
    }
    // Edges of the convex sublevel set {t : h(t) ≤ budget}.
    let edge = |mut inside: f64, mut outside: f64| {
        for _ in 0..100 {
            let mid = 0.5 * (inside + outside);
            if h(mid) <= budget {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    let lo = edge(t_star, -radius);
    let hi = edge(t_star, radius);
    let lower = if lo <= 0.0 && hi >= 0.0 { 0.0 } else { lo.abs().min(hi.abs()) };
    Some((lower, lo.abs().max(hi.abs())))
}
