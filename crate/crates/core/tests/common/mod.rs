//! Test-only oracles shared by the integration suites. Nothing here calls
//! into the simplex solver.
#![allow(dead_code)]

use ordrel::lp::{LinearProgram, Relation, Sense};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Optimum of a bounded LP by enumerating every vertex: each choice of
/// `n_vars` tight hyperplanes (rows or finite bounds) with a nonsingular
/// system. Returns `None` when no vertex is feasible.
pub fn vertex_enumeration(lp: &LinearProgram, tol: f64) -> Option<(f64, Vec<f64>)> {
    let n = lp.n_vars();
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in &lp.constraints {
        planes.push((c.coeffs.clone(), c.rhs));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        if lp.lower[j].is_finite() {
            planes.push((e.clone(), lp.lower[j]));
        }
        if lp.upper[j].is_finite() {
            planes.push((e, lp.upper[j]));
        }
    }
    let sign = if lp.sense == Sense::Minimize { 1.0 } else { -1.0 };
    let mut best: Option<(f64, Vec<f64>)> = None;
    for combo in combinations(planes.len(), n) {
        let a: Vec<Vec<f64>> = combo.iter().map(|&k| planes[k].0.clone()).collect();
        let b: Vec<f64> = combo.iter().map(|&k| planes[k].1).collect();
        let Some(x) = solve_dense(a, b) else { continue };
        if violation(lp, &x) > tol {
            continue;
        }
        let obj: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        if best.as_ref().is_none_or(|(o, _)| sign * obj < sign * *o) {
            best = Some((obj, x));
        }
    }
    best
}

pub fn violation(lp: &LinearProgram, x: &[f64]) -> f64 {
    let mut worst = 0.0_f64;
    for (j, &v) in x.iter().enumerate() {
        worst = worst.max(lp.lower[j] - v).max(v - lp.upper[j]);
    }
    for c in &lp.constraints {
        let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
        worst = worst.max(match c.relation {
            Relation::Le => lhs - c.rhs,
            Relation::Ge => c.rhs - lhs,
            Relation::Eq => (lhs - c.rhs).abs(),
        });
    }
    worst
}

pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Gaussian elimination with partial pivoting; `None` if (near) singular.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Random LP with finite bounds on every variable (so the feasible region is
/// a polytope), up to `max_vars` variables and `max_rows` rows.
pub fn random_bounded_lp(rng: &mut ChaCha8Rng, max_vars: usize, max_rows: usize) -> LinearProgram {
    let n = rng.random_range(1..=max_vars);
    let rows = rng.random_range(0..=max_rows);
    let sense = if rng.random_bool(0.5) {
        Sense::Minimize
    } else {
        Sense::Maximize
    };
    let mut lp = LinearProgram::new(n, sense);
    let obj = (0..n).map(|_| rng.random_range(-5..=5) as f64).collect();
    lp.set_objective(sense, obj).unwrap();
    for j in 0..n {
        let lo = rng.random_range(-4..=1) as f64;
        let hi = lo + rng.random_range(0..=6) as f64;
        lp.set_bounds(j, lo, hi).unwrap();
    }
    for _ in 0..rows {
        let coeffs: Vec<f64> = (0..n).map(|_| rng.random_range(-4..=4) as f64).collect();
        let rel = match rng.random_range(0..10) {
            0..=4 => Relation::Le,
            5..=8 => Relation::Ge,
            _ => Relation::Eq,
        };
        let rhs = rng.random_range(-6..=6) as f64;
        lp.add_constraint(coeffs, rel, rhs).unwrap();
    }
    lp
}

pub mod hinge;
