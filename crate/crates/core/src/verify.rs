//! Self-checks behind `fsts verify`: finite-difference gradient checks,
//! DTW against a memoized recursive definition, and pair balance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::baselines::{dtw_distance_with_steps, StepSet};
use crate::data::{Dataset, Role, TimeSeries};
use crate::error::Result;
use crate::nn::*;
use crate::pairs::generate_pairs;
use crate::siamese::{BlockConfig, EmbeddingConfig, SiameseNetwork};

pub const FD_STEP: f64 = 1e-5;
pub const OP_GRAD_TOLERANCE: f64 = 1e-6;
pub const NETWORK_GRAD_TOLERANCE: f64 = 1e-5;
/// Denominator floor of the relative error, so components whose true
/// gradient is ~0 are judged on absolute error.
pub const REL_ERROR_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub max_error: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "[{}] {:<34} max error {:.3e} (tolerance {:.1e}) {}\n",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.max_error,
                    c.tolerance,
                    c.detail
                )
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Test hook: run the DTW check against a step set without the diagonal
    /// move, which must be reported as a failure.
    pub corrupt_dtw: bool,
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_ERROR_FLOOR)
}

pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| relative_error(a, n))
        .fold(0.0, f64::max)
}

/// Central differences of `f` at `x`.
pub fn numeric_gradient(x: &[f64], mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + FD_STEP;
            let up = f(&probe);
            probe[i] = orig - FD_STEP;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * FD_STEP)
        })
        .collect()
}

fn random_vec(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn t(shape: &[usize], v: Vec<f64>) -> Tensor<f64> {
    Tensor::new(shape.to_vec(), v).expect("consistent test shape")
}

fn weighted(y: &Tensor<f64>, r: &[f64]) -> f64 {
    y.values().iter().zip(r).map(|(a, b)| a * b).sum()
}

/// Per-op gradient checks; returns `(op name, max relative error)`.
pub fn op_gradient_errors(seed: u64) -> Result<Vec<(String, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    // conv1d: [2, 5, 2] input, kernel 3, 3 output channels
    {
        let xs = [2, 5, 2];
        let fs = [3, 2, 3];
        let x = random_vec(&mut rng, 20);
        let f = random_vec(&mut rng, 18);
        let b = random_vec(&mut rng, 3);
        let r = random_vec(&mut rng, 30);
        let g = conv1d_backward(&t(&[2, 5, 3], r.clone()), Some(&t(&xs, x.clone())), &t(&fs, f.clone()))?;
        let loss = |x: &[f64], f: &[f64], b: &[f64]| {
            weighted(&conv1d_forward(&t(&xs, x.to_vec()), &t(&fs, f.to_vec()), &t(&[3], b.to_vec())).unwrap(), &r)
        };
        let nx = numeric_gradient(&x, |v| loss(v, &f, &b));
        let nf = numeric_gradient(&f, |v| loss(&x, v, &b));
        let nb = numeric_gradient(&b, |v| loss(&x, &f, v));
        let e = max_relative_error(g.input.values(), &nx)
            .max(max_relative_error(g.filters.values(), &nf))
            .max(max_relative_error(g.bias.values(), &nb));
        out.push(("conv1d".into(), e));
    }

    // batchnorm (train mode): [2, 4, 3]
    {
        let xs = [2, 4, 3];
        let x: Vec<f64> = random_vec(&mut rng, 24).iter().map(|v| 2.0 * v + 0.5).collect();
        let gm: Vec<f64> = random_vec(&mut rng, 3).iter().map(|v| v + 1.5).collect();
        let bt = random_vec(&mut rng, 3);
        let r = random_vec(&mut rng, 24);
        let fwd = |x: &[f64], gm: &[f64], bt: &[f64]| {
            let mut rs = RunningStats::new(3);
            batchnorm1d_train(&t(&xs, x.to_vec()), &t(&[3], gm.to_vec()), &t(&[3], bt.to_vec()), &mut rs).unwrap()
        };
        let (_, cache) = fwd(&x, &gm, &bt);
        let (dx, dg, db) = batchnorm1d_backward(&t(&xs, r.clone()), Some(&cache), &t(&[3], gm.clone()))?;
        let nx = numeric_gradient(&x, |v| weighted(&fwd(v, &gm, &bt).0, &r));
        let ng = numeric_gradient(&gm, |v| weighted(&fwd(&x, v, &bt).0, &r));
        let nb = numeric_gradient(&bt, |v| weighted(&fwd(&x, &gm, v).0, &r));
        let e = max_relative_error(dx.values(), &nx)
            .max(max_relative_error(dg.values(), &ng))
            .max(max_relative_error(db.values(), &nb));
        out.push(("batchnorm1d".into(), e));
    }

    // relu, away from the kink
    {
        let x: Vec<f64> = random_vec(&mut rng, 12)
            .into_iter()
            .map(|v| if v.abs() < 0.05 { v + 0.1 } else { v })
            .collect();
        let r = random_vec(&mut rng, 12);
        let g = relu_backward(&t(&[12], r.clone()), &t(&[12], x.clone()))?;
        let n = numeric_gradient(&x, |v| weighted(&relu(&t(&[12], v.to_vec())), &r));
        out.push(("relu".into(), max_relative_error(g.values(), &n)));
    }

    // sigmoid
    {
        let x: Vec<f64> = random_vec(&mut rng, 12).iter().map(|v| 4.0 * v).collect();
        let r = random_vec(&mut rng, 12);
        let y = sigmoid(&t(&[12], x.clone()));
        let g = sigmoid_backward(&t(&[12], r.clone()), &y)?;
        let n = numeric_gradient(&x, |v| weighted(&sigmoid(&t(&[12], v.to_vec())), &r));
        out.push(("sigmoid".into(), max_relative_error(g.values(), &n)));
    }

    // abs_diff
    {
        let a = random_vec(&mut rng, 10);
        let b: Vec<f64> = a
            .iter()
            .zip(random_vec(&mut rng, 10))
            .map(|(x, d)| x + if d.abs() < 0.05 { 0.1 } else { d })
            .collect();
        let r = random_vec(&mut rng, 10);
        let (ga, gb) = abs_diff_backward(&t(&[10], r.clone()), &t(&[10], a.clone()), &t(&[10], b.clone()))?;
        let na = numeric_gradient(&a, |v| weighted(&abs_diff(&t(&[10], v.to_vec()), &t(&[10], b.clone())).unwrap(), &r));
        let nb = numeric_gradient(&b, |v| weighted(&abs_diff(&t(&[10], a.clone()), &t(&[10], v.to_vec())).unwrap(), &r));
        out.push((
            "abs_diff".into(),
            max_relative_error(ga.values(), &na).max(max_relative_error(gb.values(), &nb)),
        ));
    }

    // dense: [3, 4] · [4, 2] + [2]
    {
        let x = random_vec(&mut rng, 12);
        let w = random_vec(&mut rng, 8);
        let b = random_vec(&mut rng, 2);
        let r = random_vec(&mut rng, 6);
        let loss = |x: &[f64], w: &[f64], b: &[f64]| {
            weighted(&dense(&t(&[3, 4], x.to_vec()), &t(&[4, 2], w.to_vec()), &t(&[2], b.to_vec())).unwrap(), &r)
        };
        let (gx, gw, gb) = dense_backward(&t(&[3, 2], r.clone()), &t(&[3, 4], x.clone()), &t(&[4, 2], w.clone()))?;
        let e = max_relative_error(gx.values(), &numeric_gradient(&x, |v| loss(v, &w, &b)))
            .max(max_relative_error(gw.values(), &numeric_gradient(&w, |v| loss(&x, v, &b))))
            .max(max_relative_error(gb.values(), &numeric_gradient(&b, |v| loss(&x, &w, v))));
        out.push(("dense".into(), e));
    }

    // maxpool: [2, 7, 2], size 3
    {
        let x = random_vec(&mut rng, 28);
        let r = random_vec(&mut rng, 8);
        let p = maxpool1d_forward(&t(&[2, 7, 2], x.clone()), 3)?;
        let g = maxpool1d_backward(&t(&[2, 2, 2], r.clone()), &p.argmax, &p.input_shape)?;
        let n = numeric_gradient(&x, |v| weighted(&maxpool1d_forward(&t(&[2, 7, 2], v.to_vec()), 3).unwrap().output, &r));
        out.push(("maxpool1d".into(), max_relative_error(g.values(), &n)));
    }

    // dropout with a fixed mask
    {
        let x = random_vec(&mut rng, 16);
        let r = random_vec(&mut rng, 16);
        let fwd = |v: &[f64]| {
            let mut mrng = ChaCha8Rng::seed_from_u64(99);
            dropout_forward(&t(&[16], v.to_vec()), 0.3, Mode::Train, &mut mrng).unwrap()
        };
        let (_, mask) = fwd(&x);
        let g = dropout_backward(&t(&[16], r.clone()), mask.as_deref())?;
        let n = numeric_gradient(&x, |v| weighted(&fwd(v).0, &r));
        out.push(("dropout".into(), max_relative_error(g.values(), &n)));
    }

    // binary cross-entropy
    {
        let p: Vec<f64> = (0..6).map(|_| rng.random_range(0.05..0.95)).collect();
        let y: Vec<f64> = (0..6).map(|i| (i % 2) as f64).collect();
        let (_, g) = bce_loss(&p, &y)?;
        let n = numeric_gradient(&p, |v| bce_loss(v, &y).unwrap().0);
        out.push(("bce_loss".into(), max_relative_error(&g, &n)));
    }

    Ok(out)
}

/// Miniature network used by the end-to-end gradient check.
pub fn miniature_config() -> EmbeddingConfig {
    EmbeddingConfig {
        blocks: vec![BlockConfig::new(4, 3, 2), BlockConfig::new(4, 3, 2)],
        dropout_rate: 0.2,
        input_length: 16,
    }
}

fn flatten(net: &SiameseNetwork<f64>) -> Vec<f64> {
    let mut net = net.clone();
    net.params
        .trainable_mut()
        .iter()
        .flat_map(|(_, t)| t.values().to_vec())
        .collect()
}

fn unflatten(net: &mut SiameseNetwork<f64>, v: &[f64]) {
    let mut off = 0;
    for (_, t) in net.params.trainable_mut() {
        let n = t.len();
        t.values_mut().copy_from_slice(&v[off..off + n]);
        off += n;
    }
}

fn flat_grads(net: &mut SiameseNetwork<f64>) -> Vec<f64> {
    net.params
        .trainable_mut()
        .iter()
        .flat_map(|(_, t)| t.grad().map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; t.len()]))
        .collect()
}

/// End-to-end check of every trainable parameter of the miniature network
/// on a batch of pairs, BCE loss, train mode with a fixed dropout mask.
pub fn network_gradient_error(seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = miniature_config();
    let mut net = SiameseNetwork::<f64>::new(config, seed)?;
    for (_, t) in net.params.trainable_mut() {
        for v in t.values_mut() {
            *v += rng.random_range(-0.1..0.1);
        }
    }
    let batch = 3;
    let left: Vec<f64> = (0..batch * 16).map(|_| rng.random_range(0.0..1.0)).collect();
    let right: Vec<f64> = (0..batch * 16).map(|_| rng.random_range(0.0..1.0)).collect();
    let labels = vec![1.0, 0.0, 1.0];
    let mask_seed = rng.random::<u64>();

    let loss_at = |net: &mut SiameseNetwork<f64>| {
        let mut drng = ChaCha8Rng::seed_from_u64(mask_seed);
        let fwd = net.forward_pairs_train(&left, &right, &mut drng).unwrap();
        bce_loss(fwd.scores(), &labels).unwrap().0
    };

    net.params.zero_grads();
    let mut drng = ChaCha8Rng::seed_from_u64(mask_seed);
    net.loss_and_grad(&left, &right, &labels, &mut drng)?;
    let analytic = flat_grads(&mut net);

    let base = flatten(&net);
    let mut probe = net.clone();
    let numeric = numeric_gradient(&base, |v| {
        unflatten(&mut probe, v);
        loss_at(&mut probe)
    });
    Ok(max_relative_error(&analytic, &numeric))
}

/// Recursive definition of DTW with memoization, used as the reference.
pub fn dtw_reference(a: &[f64], b: &[f64]) -> f64 {
    fn go(i: usize, j: usize, a: &[f64], b: &[f64], memo: &mut [Option<f64>], m: usize) -> f64 {
        if let Some(v) = memo[i * (m + 1) + j] {
            return v;
        }
        let v = match (i, j) {
            (0, 0) => 0.0,
            (0, _) | (_, 0) => f64::INFINITY,
            _ => {
                let c = (a[i - 1] - b[j - 1]).abs();
                c + go(i - 1, j, a, b, memo, m)
                    .min(go(i, j - 1, a, b, memo, m))
                    .min(go(i - 1, j - 1, a, b, memo, m))
            }
        };
        memo[i * (m + 1) + j] = Some(v);
        v
    }
    let mut memo = vec![None; (a.len() + 1) * (b.len() + 1)];
    go(a.len(), b.len(), a, b, &mut memo, b.len())
}

/// Every series over `alphabet` with length in `1..=max_len`.
pub fn all_series(alphabet: &[f64], max_len: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|s| {
                alphabet.iter().map(move |&c| {
                    let mut n = s.clone();
                    n.push(c);
                    n
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

fn check_dtw(opts: &VerifyOptions) -> Result<CheckResult> {
    let steps = if opts.corrupt_dtw {
        StepSet {
            diagonal: false,
            ..StepSet::STANDARD
        }
    } else {
        StepSet::STANDARD
    };
    let series = all_series(&[0.0, 1.0, 2.0], 6);
    let as_f32: Vec<Vec<f32>> = series.iter().map(|s| s.iter().map(|&v| v as f32).collect()).collect();
    let mut max_err: f64 = 0.0;
    let mut mismatches = 0usize;
    let mut pairs = 0usize;
    for (i, a) in series.iter().enumerate() {
        for (j, b) in series.iter().enumerate() {
            let got = dtw_distance_with_steps(&as_f32[i], &as_f32[j], None, steps)?;
            let want = dtw_reference(a, b);
            pairs += 1;
            if got != want {
                mismatches += 1;
                max_err = max_err.max(if got.is_finite() { (got - want).abs() } else { f64::INFINITY });
            }
        }
    }
    Ok(CheckResult {
        name: "dtw vs recursive definition".into(),
        passed: mismatches == 0,
        max_error: max_err,
        tolerance: 0.0,
        detail: format!("{mismatches} mismatches over {pairs} pairs"),
    })
}

fn check_pair_balance(seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0usize;
    let mut checked = 0usize;
    for round in 0..50 {
        let classes = rng.random_range(2..=5);
        let counts: Vec<usize> = (0..classes).map(|_| rng.random_range(1..=15)).collect();
        let cap = if rng.random_bool(0.5) { Some(rng.random_range(1..=30)) } else { None };
        let mut series = Vec::new();
        for (c, &n) in counts.iter().enumerate() {
            series.extend((0..n).map(|_| TimeSeries::new(vec![0.0], c as u32)));
        }
        let ds = Dataset {
            name: format!("balance-{round}"),
            role: Role::Train,
            series,
            label_names: (0..classes).map(|c| c.to_string()).collect(),
            l_max: 1,
        };
        let ps = generate_pairs(&ds, cap, rng.random())?;
        for (c, &n) in counts.iter().enumerate() {
            let expected = (n * (n.saturating_sub(1)) / 2).min(cap.unwrap_or(usize::MAX));
            let same = ps
                .pairs
                .iter()
                .filter(|p| p.label == 1 && ds.series[p.index_a].label == c as u32)
                .count();
            let diff = ps
                .pairs
                .iter()
                .filter(|p| p.label == 0 && ds.series[p.index_a].label == c as u32)
                .count();
            if same != expected || diff != expected {
                violations += 1;
            }
        }
        for p in &ps.pairs {
            checked += 1;
            let same_class = ds.series[p.index_a].label == ds.series[p.index_b].label;
            if same_class != (p.label == 1) || (p.label == 1 && p.index_a == p.index_b) {
                violations += 1;
            }
        }
    }
    Ok(CheckResult {
        name: "pair balance and labels".into(),
        passed: violations == 0,
        max_error: violations as f64,
        tolerance: 0.0,
        detail: format!("{violations} violations over {checked} pairs in 50 datasets"),
    })
}

pub fn run_all(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    for (name, err) in op_gradient_errors(opts.seed)? {
        checks.push(CheckResult {
            name: format!("gradient: {name}"),
            passed: err < OP_GRAD_TOLERANCE,
            max_error: err,
            tolerance: OP_GRAD_TOLERANCE,
            detail: String::new(),
        });
    }
    let err = network_gradient_error(opts.seed)?;
    checks.push(CheckResult {
        name: "gradient: miniature siamese".into(),
        passed: err < NETWORK_GRAD_TOLERANCE,
        max_error: err,
        tolerance: NETWORK_GRAD_TOLERANCE,
        detail: String::new(),
    });
    checks.push(check_dtw(opts)?);
    checks.push(check_pair_balance(opts.seed)?);
    Ok(VerifyReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_error_uses_floor() {
        assert_eq!(relative_error(2.0, 1.0), 0.5);
        assert!((relative_error(1e-16, 1e-11) - 1e-8).abs() < 1e-12);
    }

    #[test]
    fn numeric_gradient_of_cubic() {
        let g = numeric_gradient(&[2.0, -1.0], |v| v[0].powi(3) + 4.0 * v[1]);
        assert!((g[0] - 12.0).abs() < 1e-8);
        assert!((g[1] - 4.0).abs() < 1e-8);
    }

    #[test]
    fn reference_dtw_small_cases() {
        assert_eq!(dtw_reference(&[1.0, 2.0, 3.0], &[1.0, 2.0, 2.0, 3.0]), 0.0);
        assert_eq!(dtw_reference(&[0.0], &[1.0, 2.0]), 3.0);
        assert_eq!(all_series(&[0.0, 1.0], 3).len(), 2 + 4 + 8);
    }

    #[test]
    fn corrupted_dtw_is_reported() {
        let good = check_dtw(&VerifyOptions::default()).unwrap();
        let bad = check_dtw(&VerifyOptions { corrupt_dtw: true, ..Default::default() }).unwrap();
        assert!(good.passed);
        assert!(!bad.passed);
    }
}
