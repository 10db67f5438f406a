//! N-way K-shot episode sampling, prototype-based adaptation of the Siamese
//! network, and macro-averaged task metrics.

use rand::seq::index;
use rayon::prelude::*;
use serde::Serialize;

use crate::data::{ClassId, Dataset};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_for};
use crate::siamese::SiameseNetwork;

pub const DEFAULT_N_WAY: usize = 5;
pub const DEFAULT_QUERIES: usize = 20;
pub const DEFAULT_TASKS: usize = 20;
pub const DEFAULT_K_LIST: [usize; 10] = [1, 2, 3, 4, 5, 10, 20, 30, 40, 50];

/// One sampled episode. `support[i]` and `queries[i]` hold dataset indices
/// of task-local class `i`, which is dataset class `classes[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FewShotTask {
    pub n_way: usize,
    pub k_shot: usize,
    pub q_queries: usize,
    pub classes: Vec<ClassId>,
    pub support: Vec<Vec<usize>>,
    pub queries: Vec<Vec<usize>>,
    pub seed: u64,
}

impl FewShotTask {
    /// `(dataset index, task-local class)` of every query, class-major.
    pub fn query_targets(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.queries
            .iter()
            .enumerate()
            .flat_map(|(c, q)| q.iter().map(move |&i| (i, c)))
    }

    pub fn num_queries(&self) -> usize {
        self.queries.iter().map(Vec::len).sum()
    }
}

/// Samples `k_shot` support and `q_queries` query members from each of
/// `n_way` classes, without replacement and disjoint within a class. When the
/// dataset has more than `n_way` classes a random subset is used, kept in
/// ascending class-id order.
pub fn sample_task(
    dataset: &Dataset,
    n_way: usize,
    k_shot: usize,
    q_queries: usize,
    seed: u64,
) -> Result<FewShotTask> {
    if n_way == 0 || k_shot == 0 || q_queries == 0 {
        return Err(Error::InvalidArgument(
            "n_way, k_shot and q_queries must be positive".into(),
        ));
    }
    let members = dataset.class_members();
    let available: Vec<ClassId> = (0..members.len() as ClassId)
        .filter(|&c| !members[c as usize].is_empty())
        .collect();
    if available.len() < n_way {
        return Err(Error::InvalidArgument(format!(
            "{}: {n_way}-way tasks need {n_way} classes, dataset has {}",
            dataset.name,
            available.len()
        )));
    }
    let mut rng = rng_for(seed, "task", &[]);
    let classes: Vec<ClassId> = if available.len() == n_way {
        available
    } else {
        let mut picked: Vec<ClassId> = index::sample(&mut rng, available.len(), n_way)
            .into_iter()
            .map(|i| available[i])
            .collect();
        picked.sort_unstable();
        picked
    };

    let need = k_shot + q_queries;
    let mut support = Vec::with_capacity(n_way);
    let mut queries = Vec::with_capacity(n_way);
    for &c in &classes {
        let pool = &members[c as usize];
        if pool.len() < need {
            return Err(Error::ClassTooSmall {
                class: format!("{} (K={k_shot}, Q={q_queries})", dataset.class_name(c)),
                needed: need,
                available: pool.len(),
            });
        }
        let picks = index::sample(&mut rng, pool.len(), need).into_vec();
        support.push(picks[..k_shot].iter().map(|&i| pool[i]).collect());
        queries.push(picks[k_shot..].iter().map(|&i| pool[i]).collect());
    }
    Ok(FewShotTask {
        n_way,
        k_shot,
        q_queries,
        classes,
        support,
        queries,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskMetrics {
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    /// `confusion[true][predicted]` counts.
    pub confusion: Vec<Vec<u64>>,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Accuracy and unweighted per-class means of precision, recall and F1.
/// Every `0 / 0` is taken as 0.
pub fn macro_metrics(confusion: &[Vec<u64>]) -> Result<TaskMetrics> {
    let n = confusion.len();
    if n == 0 || confusion.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument(format!(
            "confusion matrix must be square and non-empty, got {} rows of lengths {:?}",
            n,
            confusion.iter().map(Vec::len).collect::<Vec<_>>()
        )));
    }
    let total: u64 = confusion.iter().flatten().sum();
    let trace: u64 = (0..n).map(|i| confusion[i][i]).sum();
    let (mut p_sum, mut r_sum, mut f_sum) = (0.0, 0.0, 0.0);
    for (i, row) in confusion.iter().enumerate() {
        let tp = row[i] as f64;
        let predicted: u64 = confusion.iter().map(|r| r[i]).sum();
        let actual: u64 = row.iter().sum();
        let p = ratio(tp, predicted as f64);
        let r = ratio(tp, actual as f64);
        p_sum += p;
        r_sum += r;
        f_sum += ratio(2.0 * p * r, p + r);
    }
    let k = n as f64;
    Ok(TaskMetrics {
        accuracy: ratio(trace as f64, total as f64),
        macro_precision: p_sum / k,
        macro_recall: r_sum / k,
        macro_f1: f_sum / k,
        confusion: confusion.to_vec(),
    })
}

/// Index of the largest score; ties go to the lowest index.
pub fn argmax_first<T: PartialOrd + Copy>(scores: &[T]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Anything that can label the queries of an episode from its support set.
pub trait EpisodeClassifier: Sync {
    /// Name used in result tables.
    fn name(&self) -> String;

    /// Task-local predicted class for every query, in `query_targets` order.
    fn predict(&self, dataset: &Dataset, task: &FewShotTask) -> Result<Vec<usize>>;
}

fn gather(dataset: &Dataset, idx: impl IntoIterator<Item = usize>) -> Vec<f32> {
    idx.into_iter()
        .flat_map(|i| dataset.series[i].values.iter().copied())
        .collect()
}

/// Class prototypes: the mean support embedding of each task-local class.
pub fn prototypes(model: &SiameseNetwork<f32>, dataset: &Dataset, task: &FewShotTask) -> Result<Vec<Vec<f32>>> {
    let dim = model.embedding_dim();
    task.support
        .iter()
        .map(|members| {
            let emb = model.embed_batch(&gather(dataset, members.iter().copied()))?;
            let mut mean = vec![0.0f32; dim];
            for row in emb.values().chunks(dim) {
                mean.iter_mut().zip(row).for_each(|(m, &v)| *m += v);
            }
            let k = members.len() as f32;
            mean.iter_mut().for_each(|m| *m /= k);
            Ok(mean)
        })
        .collect()
}

/// For each query embedding, the prototype with the highest similarity.
pub fn predict_from_embeddings(
    model: &SiameseNetwork<f32>,
    prototypes: &[Vec<f32>],
    queries: &[Vec<f32>],
) -> Result<Vec<usize>> {
    queries
        .iter()
        .map(|q| {
            let scores = prototypes
                .iter()
                .map(|p| model.similarity(p, q))
                .collect::<Result<Vec<_>>>()?;
            Ok(argmax_first(&scores))
        })
        .collect()
}

/// Embeds support and queries in inference mode, averages support
/// embeddings per class and assigns each query to the most similar
/// prototype.
pub fn adapt_and_predict(model: &SiameseNetwork<f32>, dataset: &Dataset, task: &FewShotTask) -> Result<Vec<usize>> {
    if dataset.l_max != model.config.input_length || !dataset.is_padded() {
        return Err(Error::ShapeMismatch {
            op: "adapt_and_predict: dataset length vs model input",
            expected: vec![model.config.input_length],
            actual: vec![dataset.l_max],
        });
    }
    let protos = prototypes(model, dataset, task)?;
    let dim = model.embedding_dim();
    let q = model.embed_batch(&gather(dataset, task.query_targets().map(|(i, _)| i)))?;
    let queries: Vec<Vec<f32>> = q.values().chunks(dim).map(<[f32]>::to_vec).collect();
    predict_from_embeddings(model, &protos, &queries)
}

/// Prototype-averaging Siamese classifier.
pub struct SiameseClassifier<'a> {
    pub model: &'a SiameseNetwork<f32>,
}

impl EpisodeClassifier for SiameseClassifier<'_> {
    fn name(&self) -> String {
        "SCNN".into()
    }

    fn predict(&self, dataset: &Dataset, task: &FewShotTask) -> Result<Vec<usize>> {
        adapt_and_predict(self.model, dataset, task)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Protocol {
    pub n_way: usize,
    pub k_shot: usize,
    pub q_queries: usize,
    pub n_tasks: usize,
}

impl Protocol {
    /// 5-way, 20 queries per class, 20 tasks.
    pub fn standard(k_shot: usize) -> Self {
        Self {
            n_way: DEFAULT_N_WAY,
            k_shot,
            q_queries: DEFAULT_QUERIES,
            n_tasks: DEFAULT_TASKS,
        }
    }
}

/// Seed of task `index` at shot count `k_shot` under `master`.
pub fn task_seed(master: u64, k_shot: usize, index: usize) -> u64 {
    derive_seed(master, "episode", &[k_shot as u64, index as u64])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub model: String,
    pub protocol_k: usize,
    /// Unweighted mean of the per-task metrics; the confusion matrix is the
    /// sum over tasks.
    pub mean: TaskMetrics,
    pub per_task: Vec<TaskMetrics>,
}

pub fn task_metrics(task: &FewShotTask, predictions: &[usize]) -> Result<TaskMetrics> {
    if predictions.len() != task.num_queries() {
        return Err(Error::shape("predictions", &[task.num_queries()], &[predictions.len()]));
    }
    let mut confusion = vec![vec![0u64; task.n_way]; task.n_way];
    for ((_, truth), &pred) in task.query_targets().zip(predictions) {
        if pred >= task.n_way {
            return Err(Error::InvalidArgument(format!("prediction {pred} outside {}-way task", task.n_way)));
        }
        confusion[truth][pred] += 1;
    }
    macro_metrics(&confusion)
}

pub fn mean_metrics(per_task: &[TaskMetrics]) -> Result<TaskMetrics> {
    let first = per_task
        .first()
        .ok_or_else(|| Error::InvalidArgument("no tasks to average".into()))?;
    let n = per_task.len() as f64;
    let avg = |f: fn(&TaskMetrics) -> f64| per_task.iter().map(f).sum::<f64>() / n;
    let mut confusion = vec![vec![0u64; first.confusion.len()]; first.confusion.len()];
    for m in per_task {
        for (row, r) in confusion.iter_mut().zip(&m.confusion) {
            row.iter_mut().zip(r).for_each(|(a, &b)| *a += b);
        }
    }
    Ok(TaskMetrics {
        accuracy: avg(|m| m.accuracy),
        macro_precision: avg(|m| m.macro_precision),
        macro_recall: avg(|m| m.macro_recall),
        macro_f1: avg(|m| m.macro_f1),
        confusion,
    })
}

/// Samples `n_tasks` episodes with per-task derived seeds, classifies every
/// query and averages the task metrics. Tasks run in parallel; results do
/// not depend on scheduling.
pub fn evaluate_with(
    classifier: &dyn EpisodeClassifier,
    dataset: &Dataset,
    protocol: Protocol,
    seed: u64,
) -> Result<Evaluation> {
    if protocol.n_tasks == 0 {
        return Err(Error::InvalidArgument("n_tasks must be at least 1".into()));
    }
    let per_task = (0..protocol.n_tasks)
        .into_par_iter()
        .map(|i| {
            let task = sample_task(
                dataset,
                protocol.n_way,
                protocol.k_shot,
                protocol.q_queries,
                task_seed(seed, protocol.k_shot, i),
            )?;
            let predictions = classifier.predict(dataset, &task)?;
            task_metrics(&task, &predictions)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Evaluation {
        model: classifier.name(),
        protocol_k: protocol.k_shot,
        mean: mean_metrics(&per_task)?,
        per_task,
    })
}

pub fn evaluate(
    model: &SiameseNetwork<f32>,
    dataset: &Dataset,
    protocol: Protocol,
    seed: u64,
) -> Result<Evaluation> {
    evaluate_with(&SiameseClassifier { model }, dataset, protocol, seed)
}
