//! Pretrain a small Siamese network on synthetic pairs with early stopping,
//! then save the checkpoint and training report.

use fsts::data::{prepare, Dataset, Role, ScalingMode};
use fsts::pairs::{generate_pairs, PairSource};
use fsts::siamese::{pretrain_with, save_checkpoint, BlockConfig, EmbeddingConfig, TrainConfig};
use fsts::synth::{synthetic_dataset, SyntheticSpec};

fn synth(name: &str, counts: Vec<usize>, family: u64) -> fsts::Result<Dataset> {
    let mut spec = SyntheticSpec::new(name, counts, 60, family);
    spec.ragged = 8;
    prepare(&synthetic_dataset(&spec), 64, ScalingMode::PerSeries)
}

fn main() -> fsts::Result<()> {
    let train = [synth("train-a", vec![40; 4], 1)?, synth("train-b", vec![60, 30], 2)?];
    let val = [synth("val", vec![40; 3], 3)?.with_role(Role::Validation)];
    let tp = train.iter().map(|d| generate_pairs(d, Some(500), 1)).collect::<fsts::Result<Vec<_>>>()?;
    let vp = val.iter().map(|d| generate_pairs(d, Some(500), 2)).collect::<fsts::Result<Vec<_>>>()?;
    let ts: Vec<_> = train.iter().zip(&tp).map(|(dataset, pairs)| PairSource { dataset, pairs }).collect();
    let vs: Vec<_> = val.iter().zip(&vp).map(|(dataset, pairs)| PairSource { dataset, pairs }).collect();

    let config = EmbeddingConfig {
        blocks: vec![BlockConfig::new(16, 7, 3), BlockConfig::new(16, 5, 2)],
        dropout_rate: 0.2,
        input_length: 64,
    };
    let hp = TrainConfig {
        batch_size: 64,
        patience: 5,
        max_epochs: 30,
        ..TrainConfig::default()
    };
    let (model, report) = pretrain_with(&ts, &vs, &config, &hp, 2024, |r| {
        println!("epoch {:>2}  train {:.4}  val {:.4}", r.epoch, r.train_loss, r.val_loss)
    })?;
    println!("stop: {:?}, best epoch {}", report.stop_reason, report.best_epoch);

    let dir = std::env::temp_dir().join("fsts-pretrain-example");
    save_checkpoint(&model, dir.join("checkpoint"))?;
    report.save(&dir)?;
    println!("wrote {}", dir.display());
    Ok(())
}
