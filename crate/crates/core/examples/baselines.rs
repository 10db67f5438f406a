//! 1-NN Euclidean and DTW baselines on the same episodes, plus the raw
//! distance functions.

use fsts::baselines::{dtw_distance, euclidean_distance, evaluate_baseline, DistanceKind};
use fsts::data::{prepare, ScalingMode};
use fsts::episodic::Protocol;
use fsts::report::SummaryTable;
use fsts::synth::{synthetic_dataset, SyntheticSpec};

fn main() -> fsts::Result<()> {
    println!("ed([0,0],[3,4]) = {}", euclidean_distance(&[0.0, 0.0], &[3.0, 4.0])?);
    println!("dtw([1,2,3],[1,2,2,3]) = {}", dtw_distance(&[1.0, 2.0, 3.0], &[1.0, 2.0, 2.0, 3.0], None)?);

    let mut spec = SyntheticSpec::new("ragged", vec![60; 5], 80, 9);
    spec.ragged = 20;
    spec.jitter = 0.06;
    let raw = synthetic_dataset(&spec);
    if let Err(e) = evaluate_baseline(&raw, DistanceKind::Euclidean, Protocol::standard(1), 0) {
        println!("ED on raw data: {e}");
    }
    let ds = prepare(&raw, 80, ScalingMode::PerSeries)?;

    let mut table = SummaryTable::new();
    for k in [1, 5, 10] {
        let protocol = Protocol { n_tasks: 5, ..Protocol::standard(k) };
        table.add(&evaluate_baseline(&ds, DistanceKind::Euclidean, protocol, 3)?);
        table.add(&evaluate_baseline(&ds, DistanceKind::Dtw { window: None }, protocol, 3)?);
        table.add(&evaluate_baseline(&ds, DistanceKind::Dtw { window: Some(24) }, protocol, 3).map(|mut e| {
            e.model = "DTW-w24".into();
            e
        })?);
    }
    print!("{}", table.render_accuracy());
    Ok(())
}
