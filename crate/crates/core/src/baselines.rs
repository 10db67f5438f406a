//! 1-nearest-neighbour classifiers under Euclidean and dynamic time warping
//! distances, run on the same episodes as the Siamese network.

use rayon::prelude::*;

use crate::data::{ClassId, Dataset};
use crate::episodic::{evaluate_with, EpisodeClassifier, Evaluation, FewShotTask, Protocol};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceKind {
    /// Requires equal lengths; applied to padded series.
    Euclidean,
    /// Applied to unpadded prefixes. `window` is a Sakoe-Chiba band half-width.
    Dtw { window: Option<usize> },
}

impl DistanceKind {
    pub fn model_name(&self) -> &'static str {
        match self {
            DistanceKind::Euclidean => "ED",
            DistanceKind::Dtw { .. } => "DTW",
        }
    }

    pub fn distance(&self, a: &[f32], b: &[f32]) -> Result<f64> {
        match *self {
            DistanceKind::Euclidean => euclidean_distance(a, b),
            DistanceKind::Dtw { window } => dtw_distance(a, b, window),
        }
    }
}

pub fn euclidean_distance(a: &[f32], b: &[f32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "euclidean distance needs series of the same length, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum::<f64>()
        .sqrt())
}

/// Admissible DTW moves. The standard set allows all three.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepSet {
    pub vertical: bool,
    pub horizontal: bool,
    pub diagonal: bool,
}

impl StepSet {
    pub const STANDARD: StepSet = StepSet {
        vertical: true,
        horizontal: true,
        diagonal: true,
    };
}

/// Dynamic time warping with local cost `|a_i - b_j|` and steps
/// `(i-1, j)`, `(i, j-1)`, `(i-1, j-1)`. Returns the cumulative cost of the
/// best alignment. Memory is two rows over the shorter series.
pub fn dtw_distance(a: &[f32], b: &[f32], window: Option<usize>) -> Result<f64> {
    dtw_distance_with_steps(a, b, window, StepSet::STANDARD)
}

#[doc(hidden)]
pub fn dtw_distance_with_steps(a: &[f32], b: &[f32], window: Option<usize>, steps: StepSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("dtw of an empty series".into()));
    }
    // Rows run over the longer series so the row buffers span the shorter one.
    let (rows, cols, steps) = if a.len() >= b.len() {
        (a, b, steps)
    } else {
        (
            b,
            a,
            StepSet {
                vertical: steps.horizontal,
                horizontal: steps.vertical,
                diagonal: steps.diagonal,
            },
        )
    };
    let (n, m) = (rows.len(), cols.len());
    let w = window.unwrap_or(n.max(m));
    if w < n - m {
        return Err(Error::InvalidArgument(format!(
            "dtw window {w} cannot connect series of lengths {n} and {m}"
        )));
    }

    let inf = f64::INFINITY;
    let mut prev = vec![inf; m + 1];
    let mut curr = vec![inf; m + 1];
    prev[0] = 0.0;
    for i in 1..=n {
        curr.iter_mut().for_each(|v| *v = inf);
        let lo = i.saturating_sub(w).max(1);
        let hi = (i + w).min(m);
        let x = rows[i - 1] as f64;
        for j in lo..=hi {
            let cost = (x - cols[j - 1] as f64).abs();
            let mut best = inf;
            if steps.diagonal {
                best = best.min(prev[j - 1]);
            }
            if steps.vertical {
                best = best.min(prev[j]);
            }
            if steps.horizontal {
                best = best.min(curr[j - 1]);
            }
            curr[j] = cost + best;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[m])
}

/// Label of the closest support element; exact ties go to the lowest index.
pub fn one_nn_classify(support: &[(&[f32], ClassId)], query: &[f32], distance: DistanceKind) -> Result<ClassId> {
    let mut best: Option<(f64, ClassId)> = None;
    for &(s, label) in support {
        let d = distance.distance(s, query)?;
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, label));
        }
    }
    best.map(|(_, l)| l)
        .ok_or_else(|| Error::InvalidArgument("1-NN needs a non-empty support set".into()))
}

/// 1-NN over the full support set of an episode.
#[derive(Debug, Clone, Copy)]
pub struct NearestNeighbor {
    pub distance: DistanceKind,
}

impl NearestNeighbor {
    fn view<'a>(&self, dataset: &'a Dataset, index: usize) -> &'a [f32] {
        let s = &dataset.series[index];
        match self.distance {
            DistanceKind::Euclidean => &s.values,
            DistanceKind::Dtw { .. } => s.prefix(),
        }
    }
}

impl EpisodeClassifier for NearestNeighbor {
    fn name(&self) -> String {
        self.distance.model_name().into()
    }

    fn predict(&self, dataset: &Dataset, task: &FewShotTask) -> Result<Vec<usize>> {
        let support: Vec<(&[f32], ClassId)> = task
            .support
            .iter()
            .enumerate()
            .flat_map(|(c, members)| members.iter().map(move |&i| (i, c as ClassId)))
            .map(|(i, c)| (self.view(dataset, i), c))
            .collect();
        let queries: Vec<usize> = task.query_targets().map(|(i, _)| i).collect();
        queries
            .par_iter()
            .map(|&q| one_nn_classify(&support, self.view(dataset, q), self.distance).map(|c| c as usize))
            .collect()
    }
}

/// Evaluates a 1-NN baseline on exactly the episodes the Siamese evaluation
/// samples under the same seed.
pub fn evaluate_baseline(dataset: &Dataset, distance: DistanceKind, protocol: Protocol, seed: u64) -> Result<Evaluation> {
    if distance == DistanceKind::Euclidean {
        if let Some(s) = dataset.series.iter().find(|s| s.values.len() != dataset.series[0].values.len()) {
            return Err(Error::InvalidArgument(format!(
                "{}: euclidean distance requires equal-length series; found lengths {} and {} (pad the dataset first)",
                dataset.name,
                dataset.series[0].values.len(),
                s.values.len()
            )));
        }
    }
    evaluate_with(&NearestNeighbor { distance }, dataset, protocol, seed)
}
