//! Result files: per-task CSV rows and the K × model summary tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::episodic::{Evaluation, TaskMetrics};
use crate::error::{Error, Result};

type Metric = fn(&TaskMetrics) -> f64;

pub const RESULT_HEADER: [&str; 7] = [
    "model",
    "k",
    "task",
    "accuracy",
    "macro_precision",
    "macro_recall",
    "macro_f1",
];

fn metric_fields(m: &TaskMetrics) -> [String; 4] {
    [
        format!("{:.6}", m.accuracy),
        format!("{:.6}", m.macro_precision),
        format!("{:.6}", m.macro_recall),
        format!("{:.6}", m.macro_f1),
    ]
}

/// One row per (model, K, task) followed by a `mean` row per (model, K).
pub fn write_results<W: Write>(out: W, evaluations: &[Evaluation]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULT_HEADER)?;
    for e in evaluations {
        for (i, m) in e.per_task.iter().enumerate() {
            let [a, p, r, f] = metric_fields(m);
            w.write_record([e.model.clone(), e.protocol_k.to_string(), i.to_string(), a, p, r, f])?;
        }
    }
    for e in evaluations {
        let [a, p, r, f] = metric_fields(&e.mean);
        w.write_record([e.model.clone(), e.protocol_k.to_string(), "mean".into(), a, p, r, f])?;
    }
    w.flush().map_err(|e| Error::io("<results csv>", e))?;
    Ok(())
}

pub fn save_results(path: impl AsRef<Path>, evaluations: &[Evaluation]) -> Result<()> {
    let path = path.as_ref();
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_results(std::io::BufWriter::new(f), evaluations)
}

/// Mean metrics arranged by K (rows) and model (columns).
#[derive(Debug, Clone, Default)]
pub struct SummaryTable {
    models: Vec<String>,
    cells: BTreeMap<usize, BTreeMap<String, TaskMetrics>>,
}

impl SummaryTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, evaluation: &Evaluation) {
        if !self.models.contains(&evaluation.model) {
            self.models.push(evaluation.model.clone());
        }
        self.cells
            .entry(evaluation.protocol_k)
            .or_default()
            .insert(evaluation.model.clone(), evaluation.mean.clone());
    }

    pub fn from_evaluations<'a>(evaluations: impl IntoIterator<Item = &'a Evaluation>) -> Self {
        let mut t = Self::new();
        for e in evaluations {
            t.add(e);
        }
        t
    }

    pub fn get(&self, k: usize, model: &str) -> Option<&TaskMetrics> {
        self.cells.get(&k).and_then(|row| row.get(model))
    }

    fn columns(&self) -> Vec<(String, String, Metric)> {
        let metrics: [(&str, Metric); 4] = [
            ("accuracy", |m| m.accuracy),
            ("precision", |m| m.macro_precision),
            ("recall", |m| m.macro_recall),
            ("f1", |m| m.macro_f1),
        ];
        metrics
            .iter()
            .flat_map(|&(name, f)| self.models.iter().map(move |m| (name.to_string(), m.clone(), f)))
            .collect()
    }

    /// `K, accuracy:<model>..., precision:<model>..., recall:..., f1:...`
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let cols = self.columns();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["K".to_string()];
        header.extend(cols.iter().map(|(metric, model, _)| format!("{metric}:{model}")));
        w.write_record(&header)?;
        for (k, row) in &self.cells {
            let mut rec = vec![k.to_string()];
            for (_, model, f) in &cols {
                rec.push(row.get(model).map(|m| format!("{:.4}", f(m))).unwrap_or_default());
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<summary csv>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(f)
    }

    /// Accuracy table, K down the side and one column per model.
    pub fn render_accuracy(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{:>4}", "K");
        for m in &self.models {
            let _ = write!(s, " {m:>8}");
        }
        s.push('\n');
        for (k, row) in &self.cells {
            let _ = write!(s, "{k:>4}");
            for m in &self.models {
                match row.get(m) {
                    Some(v) => {
                        let _ = write!(s, " {:>8.4}", v.accuracy);
                    }
                    None => {
                        let _ = write!(s, " {:>8}", "-");
                    }
                }
            }
            s.push('\n');
        }
        s
    }
}
