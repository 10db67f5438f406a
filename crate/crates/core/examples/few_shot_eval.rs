//! N-way K-shot evaluation of a pretrained network across a K sweep, with
//! the per-task results CSV and the summary table.

use fsts::data::{prepare, Dataset, Role, ScalingMode};
use fsts::episodic::{evaluate, Protocol};
use fsts::pairs::{generate_pairs, PairSource};
use fsts::report::{write_results, SummaryTable};
use fsts::siamese::{pretrain, BlockConfig, EmbeddingConfig, TrainConfig};
use fsts::synth::{synthetic_dataset, SyntheticSpec};

fn synth(name: &str, counts: Vec<usize>, family: u64) -> fsts::Result<Dataset> {
    prepare(&synthetic_dataset(&SyntheticSpec::new(name, counts, 64, family)), 64, ScalingMode::PerSeries)
}

fn main() -> fsts::Result<()> {
    // Generalising to unseen classes needs many training classes; with only
    // a handful the learned head overfits to their shapes.
    let train = synth("train", vec![30; 24], 1)?;
    let val = synth("val", vec![50; 6], 2)?.with_role(Role::Validation);
    // Test classes come from a family never seen during pretraining.
    let test = synth("test", vec![80; 5], 3)?.with_role(Role::Test);

    let tp = generate_pairs(&train, Some(150), 1)?;
    let vp = generate_pairs(&val, Some(300), 2)?;
    let config = EmbeddingConfig {
        blocks: vec![BlockConfig::new(16, 7, 3), BlockConfig::new(16, 5, 2)],
        dropout_rate: 0.2,
        input_length: 64,
    };
    let hp = TrainConfig { batch_size: 64, patience: 4, max_epochs: 15, ..TrainConfig::default() };
    let (model, _) = pretrain(
        &[PairSource { dataset: &train, pairs: &tp }],
        &[PairSource { dataset: &val, pairs: &vp }],
        &config,
        &hp,
        7,
    )?;

    let evaluations = [1, 2, 5, 10, 20]
        .into_iter()
        .map(|k| evaluate(&model, &test, Protocol::standard(k), 11))
        .collect::<fsts::Result<Vec<_>>>()?;
    let table = SummaryTable::from_evaluations(&evaluations);
    print!("{}", table.render_accuracy());
    table.write_csv(std::io::stdout())?;

    let mut buf = Vec::new();
    write_results(&mut buf, &evaluations)?;
    println!("results CSV: {} lines", String::from_utf8_lossy(&buf).lines().count());
    Ok(())
}
