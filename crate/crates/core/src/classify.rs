//! Binary scorers for understandability (VUP), sensibleness (NUP) and empathy.
//!
//! Every scorer follows the same pipeline: each token gets a learned
//! embedding plus a fixed sinusoidal position offset, the sequence is
//! max-pooled element-wise into one vector, and an affine layer followed by
//! the logistic function yields the probability of the positive class.
//! A two-way softmax over logits `(0, z)` equals `sigmoid(z)`, so the
//! logistic form is used directly.
//!
//! Training minimises binary cross-entropy with Adam on shuffled
//! mini-batches and keeps the parameters of the epoch with the lowest
//! validation loss. Everything is single-threaded and seeded, so the same
//! examples and configuration always give the same model file.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::SEP;
use crate::perturb::LabeledExample;
use crate::textio::{fmt_f64, parse_f64s, Lines};
use crate::{Error, Result};

pub const UNK: &str = "⟨unk⟩";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScorerKind {
    Vup,
    Nup,
    Empathy,
}

impl ScorerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScorerKind::Vup => "vup",
            ScorerKind::Nup => "nup",
            ScorerKind::Empathy => "empathy",
        }
    }

    pub fn header(self) -> String {
        format!("USLH-MODEL v1 {}", self.as_str())
    }
}

impl fmt::Display for ScorerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScorerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vup" => Ok(ScorerKind::Vup),
            "nup" => Ok(ScorerKind::Nup),
            "empathy" => Ok(ScorerKind::Empathy),
            _ => Err(Error::invalid(format!("unknown scorer kind `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub seed: u64,
    pub embed_dim: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub val_fraction: f64,
    /// Tokens seen fewer times than this are folded into UNK.
    pub min_count: usize,
    pub position_offsets: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            seed: 42,
            embed_dim: 64,
            epochs: 10,
            learning_rate: 1e-3,
            batch_size: 32,
            val_fraction: 0.1,
            min_count: 2,
            position_offsets: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainMeta {
    /// Epoch (1-based) whose parameters were kept; 0 for an untrained model.
    pub best_epoch: usize,
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScorerModel {
    kind: ScorerKind,
    config: TrainConfig,
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    /// Row-major `vocab.len() x embed_dim`.
    embeddings: Vec<f64>,
    weights: Vec<f64>,
    bias: f64,
    meta: TrainMeta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
}

/// Fixed sinusoidal offset of `dim` at `position`.
fn position_offset(position: usize, dim: usize, embed_dim: usize) -> f64 {
    let pair = (dim / 2) as f64;
    let angle = position as f64 / 10000f64.powf(2.0 * pair / embed_dim as f64);
    if dim.is_multiple_of(2) {
        angle.sin()
    } else {
        angle.cos()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy from a logit, stable for large |z|.
fn bce_from_logit(z: f64, label: u8) -> f64 {
    let softplus = if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    };
    softplus - if label == 1 { z } else { 0.0 }
}

struct Pooled {
    values: Vec<f64>,
    /// Row of the embedding table that won the max for each dimension.
    rows: Vec<usize>,
}

impl ScorerModel {
    /// An untrained model whose parameters are all zero; it scores every input at 0.5.
    pub fn zeroed(kind: ScorerKind, vocab: &[String], config: TrainConfig) -> Self {
        let mut v: Vec<String> = vocab.to_vec();
        v.push(UNK.to_string());
        v.push(SEP.to_string());
        v.sort();
        v.dedup();
        let index = v.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let d = config.embed_dim;
        ScorerModel {
            kind,
            embeddings: vec![0.0; v.len() * d],
            weights: vec![0.0; d],
            bias: 0.0,
            vocab: v,
            index,
            config,
            meta: TrainMeta::default(),
        }
    }

    pub fn kind(&self) -> ScorerKind {
        self.kind
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn meta(&self) -> &TrainMeta {
        &self.meta
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    fn row(&self, token: &str) -> usize {
        self.index
            .get(token)
            .copied()
            .unwrap_or_else(|| self.index[UNK])
    }

    fn rows(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.row(t)).collect()
    }

    fn pool(&self, rows: &[usize]) -> Pooled {
        let d = self.config.embed_dim;
        let mut values = vec![f64::NEG_INFINITY; d];
        let mut winners = vec![0; d];
        for (pos, &r) in rows.iter().enumerate() {
            let emb = &self.embeddings[r * d..(r + 1) * d];
            for k in 0..d {
                let mut v = emb[k];
                if self.config.position_offsets {
                    v += position_offset(pos, k, d);
                }
                if v > values[k] {
                    values[k] = v;
                    winners[k] = r;
                }
            }
        }
        Pooled {
            values,
            rows: winners,
        }
    }

    fn logit(&self, pooled: &Pooled) -> f64 {
        self.bias
            + self
                .weights
                .iter()
                .zip(&pooled.values)
                .map(|(w, h)| w * h)
                .sum::<f64>()
    }

    fn probability_of_rows(&self, rows: &[usize]) -> f64 {
        sigmoid(self.logit(&self.pool(rows)))
    }

    /// Probability of the positive class for an arbitrary token sequence.
    pub fn score_tokens(&self, tokens: &[String]) -> Result<f64> {
        if tokens.is_empty() {
            return Err(Error::invalid("cannot score an empty token sequence"));
        }
        Ok(self.probability_of_rows(&self.rows(tokens)))
    }

    /// Understandability (VUP) or empathy score of a single utterance.
    pub fn score_utterance(&self, tokens: &[String]) -> Result<f64> {
        if self.kind == ScorerKind::Nup {
            return Err(Error::invalid(
                "a next-utterance model scores pairs, not utterances",
            ));
        }
        self.score_tokens(tokens)
    }

    /// Sensibleness (NUP) score of `response` as a reply to `context`.
    pub fn score_pair(&self, context: &[String], response: &[String]) -> Result<f64> {
        if self.kind != ScorerKind::Nup {
            return Err(Error::invalid(format!(
                "a {} model cannot score pairs",
                self.kind
            )));
        }
        if context.is_empty() || response.is_empty() {
            return Err(Error::invalid(
                "context and response must both be non-empty",
            ));
        }
        let mut tokens = Vec::with_capacity(context.len() + response.len() + 1);
        tokens.extend_from_slice(context);
        tokens.push(SEP.to_string());
        tokens.extend_from_slice(response);
        self.score_tokens(&tokens)
    }

    fn mean_loss(&self, data: &[(Vec<usize>, u8)]) -> f64 {
        let total: f64 = data
            .iter()
            .map(|(rows, y)| bce_from_logit(self.logit(&self.pool(rows)), *y))
            .sum();
        total / data.len() as f64
    }

    /// Trains a scorer of the given kind on labeled examples.
    pub fn train(
        kind: ScorerKind,
        examples: &[LabeledExample],
        config: TrainConfig,
    ) -> Result<Self> {
        if examples.is_empty() {
            return Err(Error::invalid("no training examples"));
        }
        if examples.iter().all(|e| e.label == examples[0].label) {
            return Err(Error::invalid("training examples must contain both labels"));
        }
        if config.embed_dim == 0 || config.batch_size == 0 {
            return Err(Error::invalid(
                "embedding size and batch size must be positive",
            ));
        }
        if !(0.0..1.0).contains(&config.val_fraction) {
            return Err(Error::invalid("validation fraction must lie in [0, 1)"));
        }
        if config.learning_rate.is_nan() || config.learning_rate <= 0.0 {
            return Err(Error::invalid("learning rate must be positive"));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut order: Vec<usize> = (0..examples.len()).collect();
        order.shuffle(&mut rng);
        let n_val = ((examples.len() as f64) * config.val_fraction).floor() as usize;
        let n_val = n_val.min(examples.len() - 1);
        let (val_idx, train_idx) = order.split_at(n_val);

        // vocabulary from the training portion only
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for &i in train_idx {
            for t in &examples[i].tokens {
                *counts.entry(t.as_str()).or_default() += 1;
            }
        }
        let vocab: Vec<String> = counts
            .iter()
            .filter(|(_, &c)| c >= config.min_count)
            .map(|(t, _)| t.to_string())
            .collect();
        let mut model = ScorerModel::zeroed(kind, &vocab, config.clone());
        let d = config.embed_dim;
        let scale = 0.1;
        for x in model.embeddings.iter_mut() {
            *x = rng.random_range(-scale..scale);
        }
        let wscale = 1.0 / (d as f64).sqrt();
        for w in model.weights.iter_mut() {
            *w = rng.random_range(-wscale..wscale);
        }

        let encode = |idx: &[usize], m: &ScorerModel| -> Vec<(Vec<usize>, u8)> {
            idx.iter()
                .map(|&i| (m.rows(&examples[i].tokens), examples[i].label))
                .collect()
        };
        let mut train = encode(train_idx, &model);
        let val = encode(val_idx, &model);

        let mut adam = Adam::new(model.embeddings.len(), d, config.learning_rate);
        let mut best: Option<(f64, ScorerModel)> = None;
        let mut meta = TrainMeta::default();
        let mut grad_e = vec![0.0; model.embeddings.len()];
        let mut grad_w = vec![0.0; d];

        for epoch in 1..=config.epochs {
            train.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            for batch in train.chunks(config.batch_size) {
                grad_e.iter_mut().for_each(|g| *g = 0.0);
                grad_w.iter_mut().for_each(|g| *g = 0.0);
                let mut grad_b = 0.0;
                let scale = 1.0 / batch.len() as f64;
                for (rows, y) in batch {
                    let pooled = model.pool(rows);
                    let z = model.logit(&pooled);
                    epoch_loss += bce_from_logit(z, *y);
                    let g = (sigmoid(z) - f64::from(*y)) * scale;
                    grad_b += g;
                    for k in 0..d {
                        grad_w[k] += g * pooled.values[k];
                        grad_e[pooled.rows[k] * d + k] += g * model.weights[k];
                    }
                }
                adam.step(&mut model, &grad_e, &grad_w, grad_b);
            }
            let train_loss = epoch_loss / train.len() as f64;
            let val_loss = if val.is_empty() {
                train_loss
            } else {
                model.mean_loss(&val)
            };
            if !train_loss.is_finite() || !val_loss.is_finite() {
                return Err(Error::invalid(format!("non-finite loss at epoch {epoch}")));
            }
            meta.train_loss.push(train_loss);
            meta.val_loss.push(val_loss);
            if best.as_ref().is_none_or(|(b, _)| val_loss < *b) {
                meta.best_epoch = epoch;
                best = Some((val_loss, model.clone()));
            }
        }
        let mut out = best.map(|(_, m)| m).unwrap_or(model);
        out.meta = meta;
        Ok(out)
    }

    /// Versioned text serialization with round-trip exact numbers.
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        let join = |v: &[f64]| v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(" ");
        s.push_str(&self.kind.header());
        s.push('\n');
        s.push_str(&format!("seed {}\n", c.seed));
        s.push_str(&format!("embed_dim {}\n", c.embed_dim));
        s.push_str(&format!("epochs {}\n", c.epochs));
        s.push_str(&format!("learning_rate {}\n", fmt_f64(c.learning_rate)));
        s.push_str(&format!("batch_size {}\n", c.batch_size));
        s.push_str(&format!("val_fraction {}\n", fmt_f64(c.val_fraction)));
        s.push_str(&format!("min_count {}\n", c.min_count));
        s.push_str(&format!("position_offsets {}\n", c.position_offsets));
        s.push_str(&format!("best_epoch {}\n", self.meta.best_epoch));
        s.push_str(format!("train_loss {}", join(&self.meta.train_loss)).trim_end());
        s.push('\n');
        s.push_str(format!("val_loss {}", join(&self.meta.val_loss)).trim_end());
        s.push('\n');
        s.push_str(&format!("bias {}\n", fmt_f64(self.bias)));
        s.push_str(&format!("output {}\n", join(&self.weights)));
        s.push_str(&format!("vocab {}\n", self.vocab.len()));
        for (i, t) in self.vocab.iter().enumerate() {
            let row = &self.embeddings[i * c.embed_dim..(i + 1) * c.embed_dim];
            s.push_str(&format!("{t}\t{}\n", join(row)));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        let header = lines.next_line()?;
        let kind = header
            .strip_prefix("USLH-MODEL v1 ")
            .ok_or_else(|| Error::format("missing `USLH-MODEL v1` header"))?
            .parse::<ScorerKind>()
            .map_err(|_| Error::format(format!("`{header}` is not a classifier model")))?;
        let seed = lines.keyed_parse("seed")?;
        let embed_dim: usize = lines.keyed_parse("embed_dim")?;
        let epochs = lines.keyed_parse("epochs")?;
        let learning_rate = lines.keyed_parse("learning_rate")?;
        let batch_size = lines.keyed_parse("batch_size")?;
        let val_fraction = lines.keyed_parse("val_fraction")?;
        let min_count = lines.keyed_parse("min_count")?;
        let position_offsets = lines.keyed_parse("position_offsets")?;
        let best_epoch = lines.keyed_parse("best_epoch")?;
        let train_loss = lines.keyed("train_loss")?;
        let train_loss = parse_f64s(
            train_loss,
            train_loss.split(' ').filter(|t| !t.is_empty()).count(),
            &lines,
        )?;
        let val_loss = lines.keyed("val_loss")?;
        let val_loss = parse_f64s(
            val_loss,
            val_loss.split(' ').filter(|t| !t.is_empty()).count(),
            &lines,
        )?;
        let bias = lines.keyed_parse("bias")?;
        let weights = parse_f64s(lines.keyed("output")?, embed_dim, &lines)?;
        let n: usize = lines.keyed_parse("vocab")?;
        let mut vocab = Vec::with_capacity(n);
        let mut embeddings = Vec::with_capacity(n * embed_dim);
        for _ in 0..n {
            let line = lines.next_line()?;
            let (t, row) = line
                .split_once('\t')
                .ok_or_else(|| lines.bad("expected token<TAB>vector"))?;
            vocab.push(t.to_string());
            embeddings.extend(parse_f64s(row, embed_dim, &lines)?);
        }
        let index: HashMap<String, usize> = vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        if !index.contains_key(UNK) || !index.contains_key(SEP) || index.len() != vocab.len() {
            return Err(Error::format(
                "vocabulary must be unique and contain UNK and SEP",
            ));
        }
        Ok(ScorerModel {
            kind,
            config: TrainConfig {
                seed,
                embed_dim,
                epochs,
                learning_rate,
                batch_size,
                val_fraction,
                min_count,
                position_offsets,
            },
            vocab,
            index,
            embeddings,
            weights,
            bias,
            meta: TrainMeta {
                best_epoch,
                train_loss,
                val_loss,
            },
        })
    }
}

struct Adam {
    lr: f64,
    t: i32,
    m_e: Vec<f64>,
    v_e: Vec<f64>,
    m_w: Vec<f64>,
    v_w: Vec<f64>,
    m_b: f64,
    v_b: f64,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n_embed: usize, d: usize, lr: f64) -> Self {
        Adam {
            lr,
            t: 0,
            m_e: vec![0.0; n_embed],
            v_e: vec![0.0; n_embed],
            m_w: vec![0.0; d],
            v_w: vec![0.0; d],
            m_b: 0.0,
            v_b: 0.0,
        }
    }

    fn update(lr: f64, t: i32, param: &mut f64, m: &mut f64, v: &mut f64, g: f64) {
        *m = Self::BETA1 * *m + (1.0 - Self::BETA1) * g;
        *v = Self::BETA2 * *v + (1.0 - Self::BETA2) * g * g;
        let m_hat = *m / (1.0 - Self::BETA1.powi(t));
        let v_hat = *v / (1.0 - Self::BETA2.powi(t));
        *param -= lr * m_hat / (v_hat.sqrt() + Self::EPS);
    }

    fn step(&mut self, model: &mut ScorerModel, grad_e: &[f64], grad_w: &[f64], grad_b: f64) {
        self.t += 1;
        let (lr, t) = (self.lr, self.t);
        for (i, &g) in grad_e.iter().enumerate() {
            Self::update(
                lr,
                t,
                &mut model.embeddings[i],
                &mut self.m_e[i],
                &mut self.v_e[i],
                g,
            );
        }
        for (k, &g) in grad_w.iter().enumerate() {
            Self::update(
                lr,
                t,
                &mut model.weights[k],
                &mut self.m_w[k],
                &mut self.v_w[k],
                g,
            );
        }
        Self::update(lr, t, &mut model.bias, &mut self.m_b, &mut self.v_b, grad_b);
    }
}

/// Accuracy, precision and recall with `score >= threshold` predicting label 1.
///
/// Precision is 0 when nothing is predicted positive; recall is 0 when
/// there are no positive labels.
pub fn binary_metrics(scores: &[f64], labels: &[u8], threshold: f64) -> Result<ClassifierMetrics> {
    if scores.is_empty() || scores.len() != labels.len() {
        return Err(Error::invalid(
            "scores and labels must be non-empty and of equal length",
        ));
    }
    let (mut tp, mut fp, mut tn, mut fnn) = (0usize, 0usize, 0usize, 0usize);
    for (&s, &y) in scores.iter().zip(labels) {
        match (s >= threshold, y == 1) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fnn += 1,
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Ok(ClassifierMetrics {
        accuracy: ratio(tp + tn, scores.len()),
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fnn),
    })
}

pub fn evaluate_classifier(
    model: &ScorerModel,
    examples: &[LabeledExample],
    threshold: f64,
) -> Result<ClassifierMetrics> {
    let scores: Vec<f64> = examples
        .iter()
        .map(|e| model.score_tokens(&e.tokens))
        .collect::<Result<_>>()?;
    let labels: Vec<u8> = examples.iter().map(|e| e.label).collect();
    binary_metrics(&scores, &labels, threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;
    use crate::perturb::Rule;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s)
    }

    fn separable(n: usize, seed: u64) -> Vec<LabeledExample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let words = [
            "apple", "bread", "cheese", "dinner", "evening", "friend", "garden", "house",
        ];
        (0..n)
            .map(|i| {
                let len = rng.random_range(3..8);
                let mut t: Vec<String> = (0..len)
                    .map(|_| words[rng.random_range(0..words.len())].to_string())
                    .collect();
                let positive = i % 2 == 0;
                if positive {
                    let at = rng.random_range(0..=t.len());
                    t.insert(at, "zz".into());
                }
                LabeledExample::new(
                    t,
                    if positive {
                        Rule::Identity
                    } else {
                        Rule::Reorder
                    },
                )
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn zeroed_model_scores_one_half() {
        let m = ScorerModel::zeroed(ScorerKind::Vup, &toks("a b"), TrainConfig::default());
        assert_eq!(m.score_utterance(&toks("a b c")).unwrap(), 0.5);
        assert_eq!(m.score_utterance(&toks("never seen")).unwrap(), 0.5);
        assert!(m.score_utterance(&[]).is_err());
        assert!(m.score_pair(&toks("a"), &toks("b")).is_err());
    }

    #[test]
    fn separable_task_is_learned() {
        let train = separable(2000, 1);
        let test = separable(500, 2);
        let m = ScorerModel::train(ScorerKind::Vup, &train, TrainConfig::default()).unwrap();
        let metrics = evaluate_classifier(&m, &test, 0.5).unwrap();
        assert!(metrics.accuracy >= 0.95, "accuracy {}", metrics.accuracy);
        assert!(m.meta().train_loss.iter().all(|l| l.is_finite()));
        assert!(m.meta().best_epoch >= 1);
    }

    #[test]
    fn training_is_deterministic_and_file_exact() {
        let data = separable(300, 3);
        let cfg = TrainConfig {
            epochs: 3,
            ..TrainConfig::default()
        };
        let a = ScorerModel::train(ScorerKind::Empathy, &data, cfg.clone()).unwrap();
        let b = ScorerModel::train(ScorerKind::Empathy, &data, cfg).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        let back = ScorerModel::from_text(&a.to_text()).unwrap();
        assert_eq!(back, a);
        let t = toks("zz apple bread");
        assert_eq!(
            back.score_utterance(&t).unwrap().to_bits(),
            a.score_utterance(&t).unwrap().to_bits()
        );
    }

    #[test]
    fn training_input_validation() {
        assert!(ScorerModel::train(ScorerKind::Vup, &[], TrainConfig::default()).is_err());
        let one_label: Vec<LabeledExample> = (0..5)
            .map(|_| LabeledExample::new(toks("a b"), Rule::Identity).unwrap())
            .collect();
        assert!(ScorerModel::train(ScorerKind::Vup, &one_label, TrainConfig::default()).is_err());
    }

    #[test]
    fn scores_in_unit_interval_and_oov() {
        let data = separable(200, 4);
        let cfg = TrainConfig {
            epochs: 2,
            ..TrainConfig::default()
        };
        let m = ScorerModel::train(ScorerKind::Vup, &data, cfg).unwrap();
        for s in ["zz", "qqq www", "apple zz zz zz", "."] {
            let p = m.score_utterance(&toks(s)).unwrap();
            assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn permutation_invariant_without_offsets() {
        let data = separable(200, 5);
        let cfg = TrainConfig {
            epochs: 2,
            position_offsets: false,
            ..TrainConfig::default()
        };
        let m = ScorerModel::train(ScorerKind::Vup, &data, cfg).unwrap();
        let a = m.score_utterance(&toks("zz apple bread cheese")).unwrap();
        let b = m.score_utterance(&toks("cheese bread zz apple")).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn pair_scoring() {
        let m = ScorerModel::zeroed(ScorerKind::Nup, &toks("a b"), TrainConfig::default());
        assert_eq!(m.score_pair(&toks("a"), &toks("b")).unwrap(), 0.5);
        assert!(m.score_pair(&toks("b"), &toks("a")).is_ok());
        assert!(m.score_pair(&[], &toks("a")).is_err());
        assert!(m.score_pair(&toks("a"), &[]).is_err());
        assert!(m.score_utterance(&toks("a")).is_err());
    }

    #[test]
    fn metric_conventions() {
        let m = binary_metrics(&[0.9, 0.1, 0.8], &[1, 0, 1], 0.5).unwrap();
        assert_eq!((m.accuracy, m.precision, m.recall), (1.0, 1.0, 1.0));
        // constant 0.5 scorer with the >= tie rule predicts everything positive
        let m = binary_metrics(&[0.5; 4], &[1, 0, 1, 0], 0.5).unwrap();
        assert_eq!(m.accuracy, 0.5);
        let m = binary_metrics(&[0.9, 0.9], &[0, 0], 0.5).unwrap();
        assert_eq!((m.precision, m.recall), (0.0, 0.0));
        let m = binary_metrics(&[0.1, 0.1], &[0, 1], 0.5).unwrap();
        assert_eq!(m.precision, 0.0);
        assert!(binary_metrics(&[], &[], 0.5).is_err());
    }

    #[test]
    fn bce_is_stable() {
        assert!(bce_from_logit(800.0, 0).is_finite());
        assert!(bce_from_logit(-800.0, 1).is_finite());
        assert!((bce_from_logit(0.0, 1) - 2f64.ln()).abs() < 1e-15);
    }
}
