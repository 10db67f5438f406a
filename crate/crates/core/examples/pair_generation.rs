//! Balanced same/different pair generation and shuffled mini-batches.

use fsts::data::{prepare, ScalingMode};
use fsts::pairs::{generate_pairs, PairBatcher, PairSource};
use fsts::synth::{synthetic_dataset, SyntheticSpec};

fn main() -> fsts::Result<()> {
    let raw = synthetic_dataset(&SyntheticSpec::new("demo", vec![5, 12, 40], 64, 3));
    let ds = prepare(&raw, 64, ScalingMode::PerSeries)?;

    for cap in [None, Some(50)] {
        let set = generate_pairs(&ds, cap, 42)?;
        println!("cap {cap:?}: {} pairs", set.len());
        for (c, members) in ds.class_members().iter().enumerate() {
            let same = set
                .pairs
                .iter()
                .filter(|p| p.label == 1 && ds.series[p.index_a].label == c as u32)
                .count();
            println!("  class {c}: n = {:>2}, same-label pairs = {same}", members.len());
        }
    }

    let set = generate_pairs(&ds, Some(50), 42)?;
    let sources = [PairSource { dataset: &ds, pairs: &set }];
    let batcher = PairBatcher::new(&sources, 32, 7)?;
    let sizes: Vec<usize> = batcher.epoch(1).map(|b| b.len()).collect();
    println!("epoch 1 batch sizes: {sizes:?}");

    let mut csv = Vec::new();
    set.write_csv(&mut csv)?;
    let text = String::from_utf8_lossy(&csv);
    println!("pair dump starts:\n{}", text.lines().take(4).collect::<Vec<_>>().join("\n"));
    Ok(())
}
