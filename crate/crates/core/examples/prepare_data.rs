//! Parse, scale, pad and store a dataset in the canonical binary format.
//!
//! Uses `$FSTS_DATA_DIR/ECG200` when present, otherwise a synthetic
//! stand-in with the same shape.

use fsts::data::{load_canonical, load_ucr_archive, prepare, save_canonical, Delimiter, ScalingMode, DEFAULT_L_MAX};
use fsts::synth::{synthetic_dataset, SyntheticSpec};

fn main() -> fsts::Result<()> {
    let raw = match std::env::var_os("FSTS_DATA_DIR") {
        Some(dir) => load_ucr_archive(std::path::Path::new(&dir).join("ECG200"), "ECG200", Delimiter::Auto)?,
        None => synthetic_dataset(&SyntheticSpec::new("ECG200-like", vec![133, 67], 96, 1)),
    };
    let original = raw.max_original_length();
    let ready = prepare(&raw, DEFAULT_L_MAX, ScalingMode::PerSeries)?;
    println!("{}", ready.summary(original));

    let s = &ready.series[0];
    let prefix = s.prefix();
    let (lo, hi) = prefix.iter().fold((f32::MAX, f32::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    println!("first series: {} samples scaled to [{lo}, {hi}], then {} zeros", prefix.len(), s.values.len() - prefix.len());

    let path = std::env::temp_dir().join(format!("{}.fsts", ready.name));
    save_canonical(&ready, &path)?;
    assert_eq!(load_canonical(&path)?, ready);
    println!("round-tripped through {}", path.display());
    Ok(())
}
