//! Full experiment on the ECG datasets: pretrain on ECG200 + ECG5000,
//! validate on ECGFiveDays + TwoLeadECG, then compare the Siamese network
//! with 1-NN ED and DTW on 5-way MIT-BIH episodes.
//!
//! Needs `FSTS_DATA_DIR` with the four UCR archives and `mitbih_test.csv`.
//! Run with `--release`; pretraining takes a long time on one core.

use std::path::PathBuf;

use fsts::baselines::{evaluate_baseline, DistanceKind};
use fsts::cli::{load_dataset, RawKind};
use fsts::data::{prepare, Dataset, Role, ScalingMode, DEFAULT_L_MAX};
use fsts::episodic::{evaluate, Protocol, DEFAULT_K_LIST};
use fsts::pairs::{generate_pairs, pair_seed, PairSource, DEFAULT_CAP_PER_CLASS};
use fsts::report::SummaryTable;
use fsts::siamese::{pretrain_with, EmbeddingConfig, TrainConfig};

fn main() -> fsts::Result<()> {
    let Some(dir) = std::env::var_os("FSTS_DATA_DIR").map(PathBuf::from) else {
        eprintln!("set FSTS_DATA_DIR to the directory holding the ECG datasets");
        std::process::exit(2);
    };
    let load = |name: &str, kind: RawKind| -> fsts::Result<Dataset> {
        let raw = load_dataset(name, kind, Some(&dir))?;
        let original = raw.max_original_length();
        let ds = prepare(&raw, DEFAULT_L_MAX, ScalingMode::PerSeries)?;
        println!("{}", ds.summary(original));
        Ok(ds)
    };
    let train = [load("ECG200", RawKind::Ucr)?, load("ECG5000", RawKind::Ucr)?];
    let val = [load("ECGFiveDays", RawKind::Ucr)?, load("TwoLeadECG", RawKind::Ucr)?].map(|d| d.with_role(Role::Validation));
    let test = load("MIT-BIH", RawKind::Mitbih)?;

    let seed = 0;
    let pairs = |d: &Dataset| generate_pairs(d, Some(DEFAULT_CAP_PER_CLASS), pair_seed(seed, &d.name));
    let tp = train.iter().map(pairs).collect::<fsts::Result<Vec<_>>>()?;
    let vp = val.iter().map(pairs).collect::<fsts::Result<Vec<_>>>()?;
    let ts: Vec<_> = train.iter().zip(&tp).map(|(dataset, pairs)| PairSource { dataset, pairs }).collect();
    let vs: Vec<_> = val.iter().zip(&vp).map(|(dataset, pairs)| PairSource { dataset, pairs }).collect();
    let (model, report) = pretrain_with(&ts, &vs, &EmbeddingConfig::default(), &TrainConfig::default(), seed, |r| {
        eprintln!("epoch {:>3}  train {:.5}  val {:.5}", r.epoch, r.train_loss, r.val_loss)
    })?;
    println!("best epoch {} of {}", report.best_epoch, report.epochs.len());

    let mut table = SummaryTable::new();
    for k in DEFAULT_K_LIST {
        let protocol = Protocol::standard(k);
        table.add(&evaluate(&model, &test, protocol, seed)?);
        table.add(&evaluate_baseline(&test, DistanceKind::Euclidean, protocol, seed)?);
        table.add(&evaluate_baseline(&test, DistanceKind::Dtw { window: None }, protocol, seed)?);
        eprintln!("K = {k} done");
    }
    print!("{}", table.render_accuracy());
    table.save_csv("summary.csv")?;
    Ok(())
}
