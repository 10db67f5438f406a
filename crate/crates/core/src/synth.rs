//! Synthetic heartbeat-like datasets for demos and tests that must run
//! without the real ECG archives.
//!
//! Every class is a fixed sum of Gaussian bumps; members jitter the bump
//! positions and amplitudes and add uniform noise.

use rand::Rng;

use crate::data::{Dataset, Role, TimeSeries};
use crate::seed::rng_for;

#[derive(Debug, Clone, Copy)]
struct Bump {
    center: f64,
    width: f64,
    amplitude: f64,
}

#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub name: String,
    pub members_per_class: Vec<usize>,
    pub length: usize,
    /// Members get lengths drawn from `length - ragged ..= length`.
    pub ragged: usize,
    pub jitter: f64,
    pub noise: f64,
    /// Selects the family of class shapes; different families give unrelated
    /// classes.
    pub family: u64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(name: &str, members_per_class: Vec<usize>, length: usize, family: u64) -> Self {
        Self {
            name: name.to_string(),
            members_per_class,
            length,
            ragged: 0,
            jitter: 0.02,
            noise: 0.05,
            family,
            seed: family.wrapping_mul(31).wrapping_add(7),
        }
    }
}

fn class_shape(family: u64, class: usize) -> Vec<Bump> {
    let mut rng = rng_for(family, "synthetic-class", &[class as u64]);
    let n = rng.random_range(3..=5);
    (0..n)
        .map(|_| Bump {
            center: rng.random_range(0.1..0.9),
            width: rng.random_range(0.015..0.08),
            amplitude: rng.random_range(-1.0..1.5),
        })
        .collect()
}

/// Raw (unscaled, unpadded) dataset drawn from `spec`.
pub fn synthetic_dataset(spec: &SyntheticSpec) -> Dataset {
    let mut series = Vec::new();
    for (class, &count) in spec.members_per_class.iter().enumerate() {
        let shape = class_shape(spec.family, class);
        let mut rng = rng_for(spec.seed, "synthetic-members", &[class as u64]);
        for _ in 0..count {
            let len = spec.length - rng.random_range(0..=spec.ragged.min(spec.length - 1));
            let bumps: Vec<Bump> = shape
                .iter()
                .map(|b| Bump {
                    center: b.center + rng.random_range(-spec.jitter..=spec.jitter),
                    width: b.width,
                    amplitude: b.amplitude * rng.random_range(0.8..1.2),
                })
                .collect();
            let values = (0..len)
                .map(|t| {
                    let x = t as f64 / len as f64;
                    let clean: f64 = bumps
                        .iter()
                        .map(|b| b.amplitude * (-((x - b.center) / b.width).powi(2) / 2.0).exp())
                        .sum();
                    (clean + rng.random_range(-spec.noise..=spec.noise)) as f32
                })
                .collect();
            series.push(TimeSeries::new(values, class as u32));
        }
    }
    let l_max = series.iter().map(|s| s.values.len()).max().unwrap_or(0);
    Dataset {
        name: spec.name.clone(),
        role: Role::Train,
        series,
        label_names: (0..spec.members_per_class.len()).map(|c| c.to_string()).collect(),
        l_max,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_determinism() {
        let mut spec = SyntheticSpec::new("s", vec![3, 4], 50, 1);
        spec.ragged = 10;
        let ds = synthetic_dataset(&spec);
        assert_eq!(ds.len(), 7);
        assert_eq!(ds.num_classes(), 2);
        assert!(ds.series.iter().all(|s| (40..=50).contains(&s.values.len())));
        assert_eq!(ds, synthetic_dataset(&spec));
    }
}
