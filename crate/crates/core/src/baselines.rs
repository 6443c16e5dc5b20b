//! Reference-based baselines: BLEU, ROUGE-L and word-embedding similarities.

use std::collections::HashMap;

use crate::{Error, Result};

/// Floor applied to zero n-gram precisions in sentence-level BLEU.
pub const BLEU_EPSILON: f64 = 1e-9;

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut out = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *out.entry(w).or_default() += 1;
        }
    }
    out
}

/// Sentence BLEU with uniform weights over orders `1..=max_n` and the brevity penalty.
pub fn bleu(reference: &[String], candidate: &[String], max_n: usize) -> Result<f64> {
    if !(1..=4).contains(&max_n) {
        return Err(Error::invalid(format!("BLEU order {max_n} outside 1..=4")));
    }
    if reference.is_empty() {
        return Err(Error::invalid("BLEU needs a non-empty reference"));
    }
    if candidate.is_empty() {
        return Err(Error::invalid("BLEU needs a non-empty candidate"));
    }
    let mut log_sum = 0.0;
    for n in 1..=max_n {
        let cand = ngram_counts(candidate, n);
        let refc = ngram_counts(reference, n);
        let total: usize = cand.values().sum();
        let clipped: usize = cand
            .iter()
            .map(|(g, &c)| c.min(refc.get(g).copied().unwrap_or(0)))
            .sum();
        let p = if total == 0 {
            0.0
        } else {
            clipped as f64 / total as f64
        };
        log_sum += p.max(BLEU_EPSILON).ln();
    }
    let (c, r) = (candidate.len() as f64, reference.len() as f64);
    let bp = if c > r { 1.0 } else { (1.0 - r / c).exp() };
    Ok(bp * (log_sum / max_n as f64).exp())
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// LCS-based F1 between reference and candidate.
pub fn rouge_l(reference: &[String], candidate: &[String]) -> Result<f64> {
    if reference.is_empty() || candidate.is_empty() {
        return Err(Error::invalid(
            "ROUGE-L needs non-empty reference and candidate",
        ));
    }
    let lcs = lcs_len(reference, candidate) as f64;
    if lcs == 0.0 {
        return Ok(0.0);
    }
    let r = lcs / reference.len() as f64;
    let p = lcs / candidate.len() as f64;
    Ok(2.0 * p * r / (p + r))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordVectorTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl WordVectorTable {
    pub fn new(vectors: HashMap<String, Vec<f64>>) -> Result<Self> {
        let dim = vectors
            .values()
            .next()
            .map(Vec::len)
            .ok_or_else(|| Error::invalid("empty word-vector table"))?;
        if dim == 0 || vectors.values().any(|v| v.len() != dim) {
            return Err(Error::invalid(
                "word vectors must share one positive dimension",
            ));
        }
        Ok(WordVectorTable { dim, vectors })
    }

    /// Parses `token v1 v2 ... vd` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut vectors = HashMap::new();
        let mut dim = None;
        for (i, line) in text.lines().enumerate() {
            let mut fields = line.split_whitespace();
            let Some(token) = fields.next() else { continue };
            let bad = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            let v: Vec<f64> = fields
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad("malformed number".into()))?;
            match dim {
                None => dim = Some(v.len()),
                Some(d) if d != v.len() => {
                    return Err(bad(format!("dimension {} differs from {d}", v.len())))
                }
                _ => {}
            }
            vectors.insert(token.to_string(), v);
        }
        Self::new(vectors)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    fn lookup<'a>(&'a self, tokens: &[String], side: &str) -> Result<Vec<&'a [f64]>> {
        let v: Vec<&[f64]> = tokens.iter().filter_map(|t| self.get(t)).collect();
        if v.is_empty() {
            return Err(Error::invalid(format!(
                "no in-vocabulary token in the {side}"
            )));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingMode {
    Average,
    Greedy,
    Extrema,
}

impl EmbeddingMode {
    pub const ALL: [EmbeddingMode; 3] = [
        EmbeddingMode::Average,
        EmbeddingMode::Greedy,
        EmbeddingMode::Extrema,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EmbeddingMode::Average => "average",
            EmbeddingMode::Greedy => "greedy",
            EmbeddingMode::Extrema => "extrema",
        }
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

fn mean_vector(vs: &[&[f64]], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for v in vs {
        for (o, x) in out.iter_mut().zip(*v) {
            *o += x;
        }
    }
    out.iter_mut().for_each(|o| *o /= vs.len() as f64);
    out
}

fn extrema_vector(vs: &[&[f64]], dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|k| {
            vs.iter().map(|v| v[k]).fold(
                0.0,
                |best: f64, x| if x.abs() > best.abs() { x } else { best },
            )
        })
        .collect()
}

fn greedy_direction(from: &[&[f64]], to: &[&[f64]]) -> f64 {
    from.iter()
        .map(|a| {
            to.iter()
                .map(|b| cosine(a, b))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum::<f64>()
        / from.len() as f64
}

/// Embedding similarity between reference and candidate; OOV tokens are skipped.
pub fn embedding_metric(
    table: &WordVectorTable,
    reference: &[String],
    candidate: &[String],
    mode: EmbeddingMode,
) -> Result<f64> {
    let r = table.lookup(reference, "reference")?;
    let c = table.lookup(candidate, "candidate")?;
    let d = table.dim;
    Ok(match mode {
        EmbeddingMode::Average => cosine(&mean_vector(&r, d), &mean_vector(&c, d)),
        EmbeddingMode::Greedy => 0.5 * (greedy_direction(&r, &c) + greedy_direction(&c, &r)),
        EmbeddingMode::Extrema => cosine(&extrema_vector(&r, d), &extrema_vector(&c, d)),
    })
}
