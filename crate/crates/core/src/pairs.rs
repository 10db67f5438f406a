//! Balanced same-class / different-class pair generation and mini-batching
//! for Siamese pretraining.

use std::io::Write;
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_for};

pub const DEFAULT_CAP_PER_CLASS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pair {
    pub index_a: usize,
    pub index_b: usize,
    /// 1 when both series share a class, 0 otherwise.
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairSet {
    pub source: String,
    pub pairs: Vec<Pair>,
    pub seed: u64,
}

impl PairSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Writes `index_a,index_b,label` rows with a header line.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index_a", "index_b", "label"])?;
        for p in &self.pairs {
            w.write_record(&[p.index_a.to_string(), p.index_b.to_string(), p.label.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<pairs csv>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

/// Unordered pair `(i, j)`, `i < j`, of `0..n` at position `k` in
/// lexicographic order. `sorted` must be ascending.
fn decode_combinations(n: usize, sorted: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(sorted.len());
    let mut row = 0;
    let mut row_start = 0;
    for &k in sorted {
        while k >= row_start + (n - 1 - row) {
            row_start += n - 1 - row;
            row += 1;
        }
        out.push((row, row + 1 + (k - row_start)));
    }
    out
}

/// For every class with `n` members, emits `p = min(n(n-1)/2, cap)` distinct
/// same-class combinations and `p` different-class pairs, each pairing a
/// random member with a random non-member (both drawn with replacement).
pub fn generate_pairs(dataset: &Dataset, cap_per_class: Option<usize>, seed: u64) -> Result<PairSet> {
    let members = dataset.class_members();
    let populated = members.iter().filter(|m| !m.is_empty()).count();
    if populated < 2 {
        return Err(Error::InvalidArgument(format!(
            "{}: pair generation needs at least two classes, found {populated}",
            dataset.name
        )));
    }
    if cap_per_class == Some(0) {
        return Err(Error::InvalidArgument("pair cap must be positive".into()));
    }

    let mut pairs = Vec::new();
    for (class, idx) in members.iter().enumerate() {
        let n = idx.len();
        if n < 2 {
            continue;
        }
        let mut rng = rng_for(seed, "pairs", &[class as u64]);
        let total = n * (n - 1) / 2;
        let p = cap_per_class.map_or(total, |c| c.min(total));

        let combos = if p == total {
            (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect::<Vec<_>>()
        } else {
            let mut picks = index::sample(&mut rng, total, p).into_vec();
            picks.sort_unstable();
            decode_combinations(n, &picks)
        };
        pairs.extend(combos.into_iter().map(|(i, j)| Pair {
            index_a: idx[i],
            index_b: idx[j],
            label: 1,
        }));

        let others: Vec<usize> = members
            .iter()
            .enumerate()
            .filter(|&(c, _)| c != class)
            .flat_map(|(_, m)| m.iter().copied())
            .collect();
        for _ in 0..p {
            let a = idx[rng.random_range(0..n)];
            let b = others[rng.random_range(0..others.len())];
            pairs.push(Pair {
                index_a: a,
                index_b: b,
                label: 0,
            });
        }
    }

    Ok(PairSet {
        source: dataset.name.clone(),
        pairs,
        seed,
    })
}

/// One mini-batch of pair inputs, row-major `[batch, l_max]` on each side.
#[derive(Debug, Clone, PartialEq)]
pub struct PairBatch {
    pub left: Vec<f32>,
    pub right: Vec<f32>,
    pub labels: Vec<f32>,
    pub series_len: usize,
}

impl PairBatch {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// A pair set together with the dataset its indices point into.
#[derive(Debug, Clone, Copy)]
pub struct PairSource<'a> {
    pub dataset: &'a Dataset,
    pub pairs: &'a PairSet,
}

/// Shuffles the pairs of one or more sources per epoch and cuts them into
/// batches; the final short batch is kept.
#[derive(Debug)]
pub struct PairBatcher<'a> {
    sources: Vec<PairSource<'a>>,
    order: Vec<(usize, usize)>,
    batch_size: usize,
    seed: u64,
    series_len: usize,
}

impl<'a> PairBatcher<'a> {
    pub fn new(sources: &[PairSource<'a>], batch_size: usize, seed: u64) -> Result<Self> {
        if batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be at least 1".into()));
        }
        let order: Vec<(usize, usize)> = sources
            .iter()
            .enumerate()
            .flat_map(|(s, src)| (0..src.pairs.len()).map(move |p| (s, p)))
            .collect();
        if order.is_empty() {
            return Err(Error::InvalidArgument("pair set is empty".into()));
        }
        let series_len = sources[0].dataset.l_max;
        for src in sources {
            if src.pairs.source != src.dataset.name {
                return Err(Error::InvalidArgument(format!(
                    "pairs were generated from `{}` but paired with dataset `{}`",
                    src.pairs.source, src.dataset.name
                )));
            }
            if src.dataset.l_max != series_len || !src.dataset.is_padded() {
                return Err(Error::InvalidArgument(format!(
                    "dataset `{}` must be padded to the common length {series_len}",
                    src.dataset.name
                )));
            }
            if let Some(p) = src.pairs.pairs.iter().find(|p| p.index_a.max(p.index_b) >= src.dataset.len()) {
                return Err(Error::InvalidArgument(format!(
                    "pair {p:?} indexes past the {} series of `{}`",
                    src.dataset.len(),
                    src.dataset.name
                )));
            }
        }
        Ok(Self {
            sources: sources.to_vec(),
            order,
            batch_size,
            seed,
            series_len,
        })
    }

    pub fn num_pairs(&self) -> usize {
        self.order.len()
    }

    pub fn num_batches(&self) -> usize {
        self.order.len().div_ceil(self.batch_size)
    }

    /// Pair order for `epoch`, shuffled with a seed derived from the epoch.
    pub fn epoch_order(&self, epoch: u64) -> Vec<(usize, usize)> {
        let mut order = self.order.clone();
        let mut rng = rng_for(self.seed, "batches", &[epoch]);
        order.shuffle(&mut rng);
        order
    }

    /// Batches in dataset order, unshuffled. Used for validation passes.
    pub fn sequential(&self) -> impl Iterator<Item = PairBatch> + '_ {
        self.order.chunks(self.batch_size).map(move |c| self.gather(c))
    }

    pub fn epoch(&self, epoch: u64) -> impl Iterator<Item = PairBatch> + '_ {
        let order = self.epoch_order(epoch);
        let chunks: Vec<Vec<(usize, usize)>> = order.chunks(self.batch_size).map(<[_]>::to_vec).collect();
        chunks.into_iter().map(move |c| self.gather(&c))
    }

    fn gather(&self, chunk: &[(usize, usize)]) -> PairBatch {
        let mut left = Vec::with_capacity(chunk.len() * self.series_len);
        let mut right = Vec::with_capacity(chunk.len() * self.series_len);
        let mut labels = Vec::with_capacity(chunk.len());
        for &(s, p) in chunk {
            let src = &self.sources[s];
            let pair = src.pairs.pairs[p];
            left.extend_from_slice(&src.dataset.series[pair.index_a].values);
            right.extend_from_slice(&src.dataset.series[pair.index_b].values);
            labels.push(pair.label as f32);
        }
        PairBatch {
            left,
            right,
            labels,
            series_len: self.series_len,
        }
    }
}

/// Batches of a single pair set for one epoch.
pub fn batch_pairs(
    pairs: &PairSet,
    dataset: &Dataset,
    batch_size: usize,
    seed: u64,
    epoch: u64,
) -> Result<Vec<PairBatch>> {
    let batcher = PairBatcher::new(&[PairSource { dataset, pairs }], batch_size, seed)?;
    Ok(batcher.epoch(epoch).collect())
}

/// Pair-generation seed for one dataset under a master seed.
pub fn pair_seed(master: u64, dataset_name: &str) -> u64 {
    derive_seed(master, &format!("pairs/{dataset_name}"), &[])
}
