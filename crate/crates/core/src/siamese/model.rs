//! Embedding module, relational head and their hand-wired backward pass.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::EmbeddingConfig;
use crate::error::{Error, Result};
use crate::nn::{
    abs_diff, abs_diff_backward, batchnorm1d_backward, batchnorm1d_infer, batchnorm1d_train,
    bce_loss, conv1d_backward, conv1d_forward, dense, dense_backward, dropout_backward,
    dropout_forward, maxpool1d_backward, maxpool1d_forward, relu, relu_backward, sigmoid,
    sigmoid_backward, sigmoid_scalar, BatchNormCache, Mode, Real, RunningStats, Tensor,
};

#[derive(Debug, Clone, PartialEq)]
pub struct BlockParams<T> {
    /// `[kernel, in_channels, filters]`
    pub filters: Tensor<T>,
    pub bias: Tensor<T>,
    pub gamma: Tensor<T>,
    pub beta: Tensor<T>,
    pub running: RunningStats<T>,
}

/// Every tensor of the network: convolution blocks plus the relational
/// head, a dense `embedding_dim → 1` map.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T = f32> {
    pub blocks: Vec<BlockParams<T>>,
    /// `[embedding_dim, 1]`
    pub head_weight: Tensor<T>,
    pub head_bias: Tensor<T>,
}

fn uniform<T: Real>(rng: &mut impl Rng, shape: Vec<usize>, bound: f64) -> Tensor<T> {
    let n: usize = shape.iter().product();
    let values = (0..n).map(|_| T::of(rng.random_range(-bound..bound))).collect();
    Tensor::new(shape, values).expect("shape matches")
}

impl<T: Real> ModelParams<T> {
    /// He-style uniform initialisation (`U(±sqrt(6 / fan_in))`), zero biases,
    /// unit gamma and zero beta.
    pub fn init(config: &EmbeddingConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut in_ch = 1;
        let mut blocks = Vec::with_capacity(config.blocks.len());
        for b in &config.blocks {
            let fan_in = (b.kernel * in_ch) as f64;
            blocks.push(BlockParams {
                filters: uniform(&mut rng, vec![b.kernel, in_ch, b.filters], (6.0 / fan_in).sqrt()),
                bias: Tensor::zeros(vec![b.filters]),
                gamma: Tensor::full(vec![b.filters], T::one()),
                beta: Tensor::zeros(vec![b.filters]),
                running: RunningStats::new(b.filters),
            });
            in_ch = b.filters;
        }
        let dim = config.embedding_dim();
        Ok(Self {
            blocks,
            head_weight: uniform(&mut rng, vec![dim, 1], (6.0 / dim as f64).sqrt()),
            head_bias: Tensor::zeros(vec![1]),
        })
    }

    /// All tensors in checkpoint order, running statistics included.
    pub fn named_tensors(&self) -> Vec<(String, &Tensor<T>)> {
        let mut out = Vec::new();
        for (i, b) in self.blocks.iter().enumerate() {
            out.push((format!("block{i}.conv.filters"), &b.filters));
            out.push((format!("block{i}.conv.bias"), &b.bias));
            out.push((format!("block{i}.bn.gamma"), &b.gamma));
            out.push((format!("block{i}.bn.beta"), &b.beta));
            out.push((format!("block{i}.bn.running_mean"), &b.running.mean));
            out.push((format!("block{i}.bn.running_var"), &b.running.var));
        }
        out.push(("head.weight".into(), &self.head_weight));
        out.push(("head.bias".into(), &self.head_bias));
        out
    }

    pub fn named_tensors_mut(&mut self) -> Vec<(String, &mut Tensor<T>)> {
        let mut out = Vec::new();
        for (i, b) in self.blocks.iter_mut().enumerate() {
            out.push((format!("block{i}.conv.filters"), &mut b.filters));
            out.push((format!("block{i}.conv.bias"), &mut b.bias));
            out.push((format!("block{i}.bn.gamma"), &mut b.gamma));
            out.push((format!("block{i}.bn.beta"), &mut b.beta));
            out.push((format!("block{i}.bn.running_mean"), &mut b.running.mean));
            out.push((format!("block{i}.bn.running_var"), &mut b.running.var));
        }
        out.push(("head.weight".into(), &mut self.head_weight));
        out.push(("head.bias".into(), &mut self.head_bias));
        out
    }

    /// Tensors updated by the optimizer.
    pub fn trainable_mut(&mut self) -> Vec<(String, &mut Tensor<T>)> {
        self.named_tensors_mut()
            .into_iter()
            .filter(|(n, _)| !n.contains("running_"))
            .collect()
    }

    pub fn trainable_sizes(&self) -> Vec<usize> {
        self.named_tensors()
            .into_iter()
            .filter(|(n, _)| !n.contains("running_"))
            .map(|(_, t)| t.len())
            .collect()
    }

    pub fn zero_grads(&mut self) {
        for (_, t) in self.named_tensors_mut() {
            t.zero_grad();
        }
    }

    pub fn cast<U: Real>(&self) -> ModelParams<U> {
        ModelParams {
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockParams {
                    filters: b.filters.cast(),
                    bias: b.bias.cast(),
                    gamma: b.gamma.cast(),
                    beta: b.beta.cast(),
                    running: RunningStats {
                        mean: b.running.mean.cast(),
                        var: b.running.var.cast(),
                        momentum: U::of(b.running.momentum.to_f64().unwrap()),
                        epsilon: U::of(b.running.epsilon.to_f64().unwrap()),
                    },
                })
                .collect(),
            head_weight: self.head_weight.cast(),
            head_bias: self.head_bias.cast(),
        }
    }
}

struct BlockCache<T> {
    conv_input: Tensor<T>,
    pre_relu: Tensor<T>,
    bn: BatchNormCache<T>,
    dropout_mask: Option<Vec<T>>,
    pool_argmax: Vec<usize>,
    pool_input_shape: Vec<usize>,
}

/// Activations saved by a train-mode pair forward.
pub struct PairForward<T> {
    blocks: Vec<BlockCache<T>>,
    embeddings: Tensor<T>,
    diff: Tensor<T>,
    scores: Tensor<T>,
    batch: usize,
}

impl<T: Real> PairForward<T> {
    pub fn scores(&self) -> &[T] {
        self.scores.values()
    }
}

/// The Siamese network: shared embedding `f` and relational head `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct SiameseNetwork<T = f32> {
    pub config: EmbeddingConfig,
    pub params: ModelParams<T>,
}

impl<T: Real> SiameseNetwork<T> {
    pub fn new(config: EmbeddingConfig, seed: u64) -> Result<Self> {
        let params = ModelParams::init(&config, seed)?;
        Ok(Self { config, params })
    }

    pub fn from_parts(config: EmbeddingConfig, params: ModelParams<T>) -> Result<Self> {
        config.validate()?;
        let expected = ModelParams::<T>::init(&config, 0)?;
        for ((n, e), (_, a)) in expected.named_tensors().iter().zip(params.named_tensors()) {
            if e.shape() != a.shape() {
                return Err(Error::ManifestMismatch(format!(
                    "{n}: expected shape {:?}, got {:?}",
                    e.shape(),
                    a.shape()
                )));
            }
        }
        if expected.blocks.len() != params.blocks.len() {
            return Err(Error::ManifestMismatch("block count differs from config".into()));
        }
        Ok(Self { config, params })
    }

    pub fn embedding_dim(&self) -> usize {
        self.config.embedding_dim()
    }

    pub fn cast<U: Real>(&self) -> SiameseNetwork<U> {
        SiameseNetwork {
            config: self.config.clone(),
            params: self.params.cast(),
        }
    }

    fn input_tensor(&self, rows: &[T]) -> Result<Tensor<T>> {
        let len = self.config.input_length;
        if rows.is_empty() || !rows.len().is_multiple_of(len) {
            return Err(Error::ShapeMismatch {
                op: "embed input",
                expected: vec![len],
                actual: vec![rows.len()],
            });
        }
        Tensor::new(vec![rows.len() / len, len, 1], rows.to_vec())
    }

    /// Inference-mode embeddings of `rows` (concatenated series of
    /// `input_length` samples each) as `[n, embedding_dim]`. Pure.
    pub fn embed_batch(&self, rows: &[T]) -> Result<Tensor<T>> {
        let mut x = self.input_tensor(rows)?;
        let n = x.shape()[0];
        for (b, p) in self.config.blocks.iter().zip(&self.params.blocks) {
            let y = relu(&conv1d_forward(&x, &p.filters, &p.bias)?);
            let y = batchnorm1d_infer(&y, &p.gamma, &p.beta, &p.running)?;
            x = maxpool1d_forward(&y, b.pool)?.output;
        }
        x.reshape(vec![n, self.embedding_dim()])
    }

    pub fn embed(&self, series: &[T]) -> Result<Vec<T>> {
        if series.len() != self.config.input_length {
            return Err(Error::ShapeMismatch {
                op: "embed",
                expected: vec![self.config.input_length],
                actual: vec![series.len()],
            });
        }
        Ok(self.embed_batch(series)?.into_values())
    }

    /// `sigmoid(w · |a - b| + bias)`; symmetric in its arguments.
    pub fn similarity(&self, a: &[T], b: &[T]) -> Result<T> {
        let dim = self.embedding_dim();
        if a.len() != dim || b.len() != dim {
            return Err(Error::ShapeMismatch {
                op: "similarity",
                expected: vec![dim, dim],
                actual: vec![a.len(), b.len()],
            });
        }
        let w = self.params.head_weight.values();
        let mut z = self.params.head_bias.values()[0];
        for ((&x, &y), &wi) in a.iter().zip(b).zip(w) {
            z = z + (x - y).abs() * wi;
        }
        Ok(sigmoid_scalar(z))
    }

    /// Train-mode forward over a batch of pairs. Left and right series are
    /// embedded together, so batch-norm statistics span both sides.
    pub fn forward_pairs_train(
        &mut self,
        left: &[T],
        right: &[T],
        rng: &mut impl Rng,
    ) -> Result<PairForward<T>> {
        if left.len() != right.len() {
            return Err(Error::shape("pair batch", &[left.len()], &[right.len()]));
        }
        let mut rows = Vec::with_capacity(left.len() * 2);
        rows.extend_from_slice(left);
        rows.extend_from_slice(right);
        let mut x = self.input_tensor(&rows)?;
        let n = x.shape()[0];
        let batch = n / 2;
        let rate = self.config.dropout_rate;

        let mut caches = Vec::with_capacity(self.config.blocks.len());
        for (b, p) in self.config.blocks.iter().zip(self.params.blocks.iter_mut()) {
            let pre_relu = conv1d_forward(&x, &p.filters, &p.bias)?;
            let act = relu(&pre_relu);
            let (normed, bn) = batchnorm1d_train(&act, &p.gamma, &p.beta, &mut p.running)?;
            let (dropped, dropout_mask) = dropout_forward(&normed, rate, Mode::Train, rng)?;
            let pooled = maxpool1d_forward(&dropped, b.pool)?;
            caches.push(BlockCache {
                conv_input: x,
                pre_relu,
                bn,
                dropout_mask,
                pool_argmax: pooled.argmax,
                pool_input_shape: pooled.input_shape,
            });
            x = pooled.output;
        }
        let dim = self.embedding_dim();
        let embeddings = x.reshape(vec![n, dim])?;
        let (ea, eb) = embeddings.values().split_at(batch * dim);
        let diff = abs_diff(
            &Tensor::new(vec![batch, dim], ea.to_vec())?,
            &Tensor::new(vec![batch, dim], eb.to_vec())?,
        )?;
        let logits = dense(&diff, &self.params.head_weight, &self.params.head_bias)?;
        let scores = sigmoid(&logits);
        Ok(PairForward {
            blocks: caches,
            embeddings,
            diff,
            scores,
            batch,
        })
    }

    /// Accumulates parameter gradients given `d loss / d score` per pair.
    pub fn backward_pairs(&mut self, cache: PairForward<T>, grad_scores: &[T]) -> Result<()> {
        let PairForward {
            blocks,
            embeddings,
            diff,
            scores,
            batch,
        } = cache;
        let dim = self.embedding_dim();
        let d_scores = Tensor::new(vec![batch, 1], grad_scores.to_vec())?;
        let d_logits = sigmoid_backward(&d_scores, &scores)?;
        let (d_diff, d_w, d_b) = dense_backward(&d_logits, &diff, &self.params.head_weight)?;
        self.params.head_weight.accumulate_grad(d_w.values())?;
        self.params.head_bias.accumulate_grad(d_b.values())?;

        let (ea, eb) = embeddings.values().split_at(batch * dim);
        let (da, db) = abs_diff_backward(
            &d_diff,
            &Tensor::new(vec![batch, dim], ea.to_vec())?,
            &Tensor::new(vec![batch, dim], eb.to_vec())?,
        )?;
        let mut d_emb = da.into_values();
        d_emb.extend_from_slice(db.values());

        let t_final = *self.config.time_extents().last().unwrap();
        let mut grad = Tensor::new(vec![2 * batch, t_final, self.config.final_channels()], d_emb)?;
        for (cache, p) in blocks.into_iter().zip(self.params.blocks.iter_mut()).rev() {
            let g = maxpool1d_backward(&grad, &cache.pool_argmax, &cache.pool_input_shape)?;
            let g = dropout_backward(&g, cache.dropout_mask.as_deref())?;
            let (g, d_gamma, d_beta) = batchnorm1d_backward(&g, Some(&cache.bn), &p.gamma)?;
            p.gamma.accumulate_grad(d_gamma.values())?;
            p.beta.accumulate_grad(d_beta.values())?;
            let g = relu_backward(&g, &cache.pre_relu)?;
            let grads = conv1d_backward(&g, Some(&cache.conv_input), &p.filters)?;
            p.filters.accumulate_grad(grads.filters.values())?;
            p.bias.accumulate_grad(grads.bias.values())?;
            grad = grads.input;
        }
        Ok(())
    }

    /// Train-mode batch loss with gradients accumulated into the parameters.
    pub fn loss_and_grad(
        &mut self,
        left: &[T],
        right: &[T],
        labels: &[T],
        rng: &mut impl Rng,
    ) -> Result<T> {
        let fwd = self.forward_pairs_train(left, right, rng)?;
        let (loss, grad) = bce_loss(fwd.scores(), labels)?;
        self.backward_pairs(fwd, &grad)?;
        Ok(loss)
    }

    /// Inference-mode similarity scores for a batch of pairs.
    pub fn score_pairs(&self, left: &[T], right: &[T]) -> Result<Vec<T>> {
        let ea = self.embed_batch(left)?;
        let eb = self.embed_batch(right)?;
        let dim = self.embedding_dim();
        ea.values()
            .chunks(dim)
            .zip(eb.values().chunks(dim))
            .map(|(a, b)| self.similarity(a, b))
            .collect()
    }
}
