//! Pretraining with Adam on pair BCE and early stopping on validation BCE.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::EmbeddingConfig;
use super::model::SiameseNetwork;
use crate::error::{Error, Result};
use crate::nn::{bce_loss, AdamState, DEFAULT_LEARNING_RATE};
use crate::pairs::{PairBatcher, PairSource};
use crate::seed::{derive_seed, rng_for};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub patience: usize,
    pub max_epochs: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: DEFAULT_LEARNING_RATE,
            batch_size: 128,
            patience: 20,
            max_epochs: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Patience,
    EpochCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub stop_reason: StopReason,
    pub seed: u64,
    pub wall_time_secs: f64,
}

impl TrainReport {
    /// Equality ignoring wall-clock time.
    pub fn same_run(&self, other: &TrainReport) -> bool {
        self.epochs == other.epochs
            && self.best_epoch == other.best_epoch
            && self.stop_reason == other.stop_reason
            && self.seed == other.seed
    }

    pub fn best(&self) -> Option<&EpochRecord> {
        self.epochs.iter().find(|e| e.epoch == self.best_epoch)
    }

    /// `epoch,train_loss,val_loss` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["epoch", "train_loss", "val_loss"])?;
        for e in &self.epochs {
            w.write_record(&[e.epoch.to_string(), e.train_loss.to_string(), e.val_loss.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<train report>", e))?;
        Ok(())
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv_path = dir.join("train_report.csv");
        let f = std::fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
        self.write_csv(f)?;
        let json_path = dir.join("train_report.json");
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(&json_path, json).map_err(|e| Error::io(&json_path, e))
    }
}

/// Patience-based stopping: halt after `patience` consecutive epochs whose
/// validation loss does not strictly improve on the best seen.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    best: f64,
    best_epoch: usize,
    stale: usize,
    epoch: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        Self {
            patience,
            best: f64::INFINITY,
            best_epoch: 0,
            stale: 0,
            epoch: 0,
        }
    }

    /// Records the next epoch's validation loss. Returns `(improved, stop)`.
    pub fn observe(&mut self, val_loss: f64) -> (bool, bool) {
        self.epoch += 1;
        if val_loss < self.best {
            self.best = val_loss;
            self.best_epoch = self.epoch;
            self.stale = 0;
            (true, false)
        } else {
            self.stale += 1;
            (false, self.stale >= self.patience)
        }
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }
}

/// Mean inference-mode BCE and accuracy at threshold 0.5 over all pairs.
pub fn evaluate_pairs(model: &SiameseNetwork<f32>, batcher: &PairBatcher<'_>) -> Result<(f64, f64)> {
    let mut loss = 0.0;
    let mut correct = 0usize;
    let mut n = 0usize;
    for batch in batcher.sequential() {
        let scores = model.score_pairs(&batch.left, &batch.right)?;
        let (l, _) = bce_loss(&scores, &batch.labels)?;
        loss += l as f64 * batch.len() as f64;
        correct += scores
            .iter()
            .zip(&batch.labels)
            .filter(|(&s, &y)| (s >= 0.5) == (y == 1.0))
            .count();
        n += batch.len();
    }
    Ok((loss / n as f64, correct as f64 / n as f64))
}

fn check_disjoint(train: &[PairSource<'_>], val: &[PairSource<'_>]) -> Result<()> {
    for t in train {
        if let Some(v) = val.iter().find(|v| v.dataset.name == t.dataset.name) {
            return Err(Error::DatasetOverlap(v.dataset.name.clone()));
        }
    }
    Ok(())
}

pub fn pretrain(
    train: &[PairSource<'_>],
    val: &[PairSource<'_>],
    config: &EmbeddingConfig,
    hp: &TrainConfig,
    seed: u64,
) -> Result<(SiameseNetwork<f32>, TrainReport)> {
    pretrain_with(train, val, config, hp, seed, |_| {})
}

/// As [`pretrain`], calling `on_epoch` after every epoch. Returns the weights
/// of the epoch with the lowest validation loss.
pub fn pretrain_with(
    train: &[PairSource<'_>],
    val: &[PairSource<'_>],
    config: &EmbeddingConfig,
    hp: &TrainConfig,
    seed: u64,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<(SiameseNetwork<f32>, TrainReport)> {
    check_disjoint(train, val)?;
    if hp.patience == 0 || hp.max_epochs == 0 {
        return Err(Error::InvalidArgument("patience and epoch cap must be positive".into()));
    }
    let started = Instant::now();
    let train_batches = PairBatcher::new(train, hp.batch_size, derive_seed(seed, "train-order", &[]))?;
    let val_batches = PairBatcher::new(val, hp.batch_size, derive_seed(seed, "val-order", &[]))?;
    if train[0].dataset.l_max != config.input_length || val[0].dataset.l_max != config.input_length {
        return Err(Error::InvalidArgument(format!(
            "datasets are padded to {} but the model expects {}",
            train[0].dataset.l_max, config.input_length
        )));
    }

    let mut model = SiameseNetwork::<f32>::new(config.clone(), derive_seed(seed, "init", &[]))?;
    let mut adam = AdamState::<f32>::new(hp.learning_rate, &model.params.trainable_sizes())?;
    let mut stopper = EarlyStopping::new(hp.patience);
    let mut best = model.params.clone();
    let mut epochs = Vec::new();
    let mut stop_reason = StopReason::EpochCap;

    for epoch in 1..=hp.max_epochs {
        let mut dropout_rng = rng_for(seed, "dropout", &[epoch as u64]);
        let mut total = 0.0;
        for batch in train_batches.epoch(epoch as u64) {
            model.params.zero_grads();
            let loss = model.loss_and_grad(&batch.left, &batch.right, &batch.labels, &mut dropout_rng)?;
            total += loss as f64 * batch.len() as f64;
            let mut params = model.params.trainable_mut();
            let mut refs: Vec<(&str, &mut _)> = params.iter_mut().map(|(n, t)| (n.as_str(), &mut **t)).collect();
            adam.step(&mut refs)?;
        }
        let train_loss = total / train_batches.num_pairs() as f64;
        let (val_loss, _) = evaluate_pairs(&model, &val_batches)?;
        let record = EpochRecord {
            epoch,
            train_loss,
            val_loss,
        };
        epochs.push(record);
        on_epoch(&record);

        let (improved, stop) = stopper.observe(val_loss);
        if improved {
            best = model.params.clone();
        }
        if stop {
            stop_reason = StopReason::Patience;
            break;
        }
    }

    for (_, t) in best.named_tensors_mut() {
        t.clear_grad();
    }
    model.params = best;
    Ok((
        model,
        TrainReport {
            epochs,
            best_epoch: stopper.best_epoch(),
            stop_reason,
            seed,
            wall_time_secs: started.elapsed().as_secs_f64(),
        },
    ))
}
