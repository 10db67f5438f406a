//! Oracles shared by the integration tests. Written independently of the
//! library's own self-check code.
#![allow(dead_code)]

use std::collections::HashMap;

use fsts::data::{Dataset, Role, TimeSeries};

pub const H: f64 = 1e-5;

/// Central finite differences.
pub fn finite_diff(x: &[f64], f: &mut dyn FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut p = x.to_vec();
    for i in 0..x.len() {
        p[i] = x[i] + H;
        let plus = f(&p);
        p[i] = x[i] - H;
        let minus = f(&p);
        p[i] = x[i];
        out.push((plus - minus) / (2.0 * H));
    }
    out
}

/// Max over components of |a - n| / max(|a|, |n|, 1e-3).
pub fn max_rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    let mut worst = 0.0f64;
    for (a, n) in analytic.iter().zip(numeric) {
        let denom = a.abs().max(n.abs()).max(1e-3);
        worst = worst.max((a - n).abs() / denom);
    }
    worst
}

/// DTW straight from its recursive definition, memoized on (i, j).
pub fn naive_dtw(a: &[f64], b: &[f64]) -> f64 {
    fn rec(a: &[f64], b: &[f64], i: usize, j: usize, memo: &mut HashMap<(usize, usize), f64>) -> f64 {
        if i == 0 && j == 0 {
            return 0.0;
        }
        if i == 0 || j == 0 {
            return f64::INFINITY;
        }
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let best = rec(a, b, i - 1, j - 1, memo)
            .min(rec(a, b, i - 1, j, memo))
            .min(rec(a, b, i, j - 1, memo));
        let v = (a[i - 1] - b[j - 1]).abs() + best;
        memo.insert((i, j), v);
        v
    }
    rec(a, b, a.len(), b.len(), &mut HashMap::new())
}

/// Dataset with `counts[c]` members in class `c`; values are irrelevant.
pub fn labelled(name: &str, counts: &[usize], len: usize) -> Dataset {
    let mut series = Vec::new();
    for (c, &n) in counts.iter().enumerate() {
        for k in 0..n {
            series.push(TimeSeries::new(vec![(c * 1000 + k) as f32; len], c as u32));
        }
    }
    Dataset {
        name: name.into(),
        role: Role::Train,
        series,
        label_names: (0..counts.len()).map(|c| format!("c{c}")).collect(),
        l_max: len,
    }
}
