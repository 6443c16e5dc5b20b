//! Bidirectional n-gram pseudo masked language model and the MLM score family.
//!
//! Masking position `i` and predicting the hidden word is approximated by
//! interpolating a left-to-right and a right-to-left n-gram model:
//!
//! ```text
//! p(w_i) = 1/2 * p_fwd(w_i | w_{i-n+1..i-1}) + 1/2 * p_bwd(w_i | w_{i+1..i+n-1})
//! ```
//!
//! Both directions and the unigram model use additive smoothing over the
//! vocabulary plus an unknown-word symbol, so every probability is positive.

use std::collections::{BTreeMap, HashMap};

use crate::corpus::tokenize;
use crate::textio::{fmt_f64, Lines};
use crate::{Error, Result};

const UNK: &str = "⟨unk⟩";
const BOS: &str = "⟨s⟩";
const EOS: &str = "⟨/s⟩";

pub const LM_HEADER: &str = "USLH-MODEL v1 lm";
pub const DEFAULT_ORDER: usize = 3;
pub const DEFAULT_DELTA: f64 = 0.1;

#[derive(Debug, Clone, Default, PartialEq)]
struct ContextCounts {
    total: u64,
    next: HashMap<u32, u64>,
}

type Table = HashMap<Vec<u32>, ContextCounts>;

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoLm {
    order: usize,
    delta: f64,
    vocab: Vec<String>,
    index: HashMap<String, u32>,
    unigram: Vec<u64>,
    total: u64,
    forward: Table,
    backward: Table,
}

/// Scores derived from per-token masked log-probabilities (natural log).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlmScores {
    /// Mean negative log-probability, nats per token.
    pub likelihood: f64,
    /// Summed log-probability, nats.
    pub nce: f64,
    /// `exp(likelihood)`.
    pub ppl: f64,
    /// Mean of `log p_masked - log p_unigram`, nats per token.
    pub slor: f64,
}

impl PseudoLm {
    pub fn train(utterances: &[Vec<String>], order: usize, delta: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("n-gram order must be at least 1"));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::invalid(format!(
                "smoothing constant {delta} must be positive"
            )));
        }
        let mut vocab: Vec<String> = utterances.iter().flatten().cloned().collect();
        vocab.sort();
        vocab.dedup();
        if vocab.is_empty() {
            return Err(Error::invalid(
                "cannot train a language model on an empty corpus",
            ));
        }
        let index: HashMap<String, u32> = vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        let mut lm = PseudoLm {
            order,
            delta,
            unigram: vec![0; vocab.len()],
            vocab,
            index,
            total: 0,
            forward: Table::new(),
            backward: Table::new(),
        };
        for utt in utterances {
            let ids: Vec<u32> = utt.iter().map(|t| lm.index[t]).collect();
            for (i, &id) in ids.iter().enumerate() {
                lm.unigram[id as usize] += 1;
                lm.total += 1;
                if order > 1 {
                    let f = lm.forward.entry(lm.left_context(&ids, i)).or_default();
                    f.total += 1;
                    *f.next.entry(id).or_default() += 1;
                    let b = lm.backward.entry(lm.right_context(&ids, i)).or_default();
                    b.total += 1;
                    *b.next.entry(id).or_default() += 1;
                }
            }
        }
        Ok(lm)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    fn unk(&self) -> u32 {
        self.vocab.len() as u32
    }

    fn bos(&self) -> u32 {
        self.vocab.len() as u32 + 1
    }

    fn eos(&self) -> u32 {
        self.vocab.len() as u32 + 2
    }

    /// Size of the predicted event space: vocabulary plus UNK.
    fn outcomes(&self) -> f64 {
        (self.vocab.len() + 1) as f64
    }

    fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(self.unk())
    }

    fn symbol(&self, id: u32) -> &str {
        match id {
            i if (i as usize) < self.vocab.len() => &self.vocab[i as usize],
            i if i == self.unk() => UNK,
            i if i == self.bos() => BOS,
            _ => EOS,
        }
    }

    fn left_context(&self, ids: &[u32], i: usize) -> Vec<u32> {
        let n = self.order - 1;
        (0..n)
            .map(|k| {
                let back = n - k;
                if i >= back {
                    ids[i - back]
                } else {
                    self.bos()
                }
            })
            .collect()
    }

    fn right_context(&self, ids: &[u32], i: usize) -> Vec<u32> {
        (1..self.order)
            .map(|k| ids.get(i + k).copied().unwrap_or(self.eos()))
            .collect()
    }

    fn unigram_id(&self, id: u32) -> f64 {
        let c = self.unigram.get(id as usize).copied().unwrap_or(0) as f64;
        (c + self.delta) / (self.total as f64 + self.delta * self.outcomes())
    }

    fn conditional(&self, table: &Table, ctx: &[u32], id: u32) -> f64 {
        let (c, total) = match table.get(ctx) {
            Some(cc) => (cc.next.get(&id).copied().unwrap_or(0), cc.total),
            None => (0, 0),
        };
        (c as f64 + self.delta) / (total as f64 + self.delta * self.outcomes())
    }

    /// Smoothed unigram probability; unseen tokens fall back to UNK.
    pub fn unigram_prob(&self, token: &str) -> f64 {
        self.unigram_id(self.id(token))
    }

    /// Log-probability of each token with that token masked out.
    pub fn masked_logprobs(&self, tokens: &[String]) -> Vec<f64> {
        let ids: Vec<u32> = tokens.iter().map(|t| self.id(t)).collect();
        ids.iter()
            .enumerate()
            .map(|(i, &id)| {
                let (fwd, bwd) = if self.order == 1 {
                    let p = self.unigram_id(id);
                    (p, p)
                } else {
                    (
                        self.conditional(&self.forward, &self.left_context(&ids, i), id),
                        self.conditional(&self.backward, &self.right_context(&ids, i), id),
                    )
                };
                (0.5 * fwd + 0.5 * bwd).ln()
            })
            .collect()
    }

    pub fn mlm_scores(&self, tokens: &[String]) -> Result<MlmScores> {
        if tokens.is_empty() {
            return Err(Error::invalid("cannot score an empty utterance"));
        }
        let m = tokens.len() as f64;
        let logp = self.masked_logprobs(tokens);
        let sum: f64 = logp.iter().sum();
        let uni: f64 = tokens.iter().map(|t| self.unigram_prob(t).ln()).sum();
        let likelihood = -sum / m;
        Ok(MlmScores {
            likelihood,
            nce: sum,
            ppl: likelihood.exp(),
            slor: (sum - uni) / m,
        })
    }

    /// Convenience wrapper tokenizing raw text first.
    pub fn score_text(&self, raw: &str) -> Result<MlmScores> {
        self.mlm_scores(&tokenize(raw))
    }

    fn write_table(&self, out: &mut String, name: &str, table: &Table) {
        let mut rows: BTreeMap<(String, String), u64> = BTreeMap::new();
        for (ctx, cc) in table {
            let key = ctx
                .iter()
                .map(|&i| self.symbol(i))
                .collect::<Vec<_>>()
                .join(" ");
            for (&id, &c) in &cc.next {
                rows.insert((key.clone(), self.symbol(id).to_string()), c);
            }
        }
        out.push_str(&format!("{name} {}\n", rows.len()));
        for ((ctx, tok), c) in rows {
            out.push_str(&format!("{ctx}\t{tok}\t{c}\n"));
        }
    }

    /// Versioned text serialization; identical corpora give identical bytes.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(LM_HEADER);
        out.push('\n');
        out.push_str(&format!("order {}\n", self.order));
        out.push_str(&format!("delta {}\n", fmt_f64(self.delta)));
        out.push_str(&format!("vocab {}\n", self.vocab.len()));
        for (t, c) in self.vocab.iter().zip(&self.unigram) {
            out.push_str(&format!("{t}\t{c}\n"));
        }
        self.write_table(&mut out, "forward", &self.forward);
        self.write_table(&mut out, "backward", &self.backward);
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        if lines.next_line()? != LM_HEADER {
            return Err(Error::format(format!("missing `{LM_HEADER}` header")));
        }
        let order: usize = lines.keyed_parse("order")?;
        let delta: f64 = lines.keyed_parse("delta")?;
        if order == 0 || delta.is_nan() || delta <= 0.0 {
            return Err(lines.bad("order must be >= 1 and delta > 0"));
        }
        let n: usize = lines.keyed_parse("vocab")?;
        let mut vocab = Vec::with_capacity(n);
        let mut unigram = Vec::with_capacity(n);
        for _ in 0..n {
            let line = lines.next_line()?;
            let (t, c) = line
                .split_once('\t')
                .ok_or_else(|| lines.bad("expected token<TAB>count"))?;
            vocab.push(t.to_string());
            unigram.push(c.parse::<u64>().map_err(|_| lines.bad("bad count"))?);
        }
        if vocab.is_empty() || vocab.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::format(
                "vocabulary must be non-empty, sorted and unique",
            ));
        }
        let index: HashMap<String, u32> = vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        let total = unigram.iter().sum();
        let mut lm = PseudoLm {
            order,
            delta,
            vocab,
            index,
            unigram,
            total,
            forward: Table::new(),
            backward: Table::new(),
        };
        lm.forward = lm.read_table(&mut lines, "forward")?;
        lm.backward = lm.read_table(&mut lines, "backward")?;
        Ok(lm)
    }

    fn read_table(&self, lines: &mut Lines<'_>, name: &str) -> Result<Table> {
        let rows: usize = lines.keyed_parse(name)?;
        let symbol_id = |s: &str| -> Option<u32> {
            match s {
                BOS => Some(self.bos()),
                EOS => Some(self.eos()),
                UNK => Some(self.unk()),
                t => self.index.get(t).copied(),
            }
        };
        let mut table = Table::new();
        for _ in 0..rows {
            let line = lines.next_line()?;
            let mut f = line.split('\t');
            let (Some(ctx), Some(tok), Some(c), None) = (f.next(), f.next(), f.next(), f.next())
            else {
                return Err(lines.bad("expected context<TAB>token<TAB>count"));
            };
            let ctx: Option<Vec<u32>> = ctx
                .split(' ')
                .filter(|s| !s.is_empty())
                .map(symbol_id)
                .collect();
            let ctx = ctx.ok_or_else(|| lines.bad("unknown context symbol"))?;
            if ctx.len() + 1 != self.order {
                return Err(lines.bad("context length does not match order"));
            }
            let id = symbol_id(tok).ok_or_else(|| lines.bad("unknown token"))?;
            let c: u64 = c.parse().map_err(|_| lines.bad("bad count"))?;
            let cc = table.entry(ctx).or_default();
            cc.total += c;
            cc.next.insert(id, c);
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(lines: &[&str]) -> Vec<Vec<String>> {
        lines.iter().map(|l| tokenize(l)).collect()
    }

    #[test]
    fn unigram_counts_and_normalization() {
        let lm = PseudoLm::train(&corpus(&["a a b"]), 1, 1e-12).unwrap();
        assert!((lm.unigram_prob("a") - 2.0 / 3.0).abs() < 1e-9);
        assert!((lm.unigram_prob("b") - 1.0 / 3.0).abs() < 1e-9);
        let lm = PseudoLm::train(&corpus(&["a a b", "c d a"]), 3, 0.1).unwrap();
        let total: f64 = lm.vocab().iter().map(|t| lm.unigram_prob(t)).sum::<f64>()
            + lm.unigram_prob("never-seen");
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unseen_token_is_positive() {
        let lm = PseudoLm::train(&corpus(&["a a b"]), 3, 0.1).unwrap();
        assert!(lm.unigram_prob("zzz") > 0.0);
        let lp = lm.masked_logprobs(&tokenize("zzz a"));
        assert!(lp.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn hand_computed_masked_logprobs() {
        let lm = PseudoLm::train(&corpus(&["a a b"]), 1, 1e-12).unwrap();
        let lp = lm.masked_logprobs(&tokenize("a b"));
        assert!((lp[0] - (2.0f64 / 3.0).ln()).abs() < 1e-9);
        assert!((lp[1] - (1.0f64 / 3.0).ln()).abs() < 1e-9);
        let s = lm.mlm_scores(&tokenize("a b")).unwrap();
        assert!((s.likelihood - 0.7520).abs() < 1e-4);
        assert_eq!(s.ppl, s.likelihood.exp());
        assert_eq!(s.slor, 0.0);
    }

    #[test]
    fn higher_order_both_directions() {
        // order 2, forward p(b | a) and backward p(b | </s>)
        let lm = PseudoLm::train(&corpus(&["a b", "a c"]), 2, 1.0).unwrap();
        // V' = 4 (a, b, c, unk)
        let fwd: f64 = (1.0 + 1.0) / (2.0 + 4.0);
        let bwd: f64 = (1.0 + 1.0) / (2.0 + 4.0);
        let lp = lm.masked_logprobs(&tokenize("a b"));
        assert!((lp[1] - (0.5 * fwd + 0.5 * bwd).ln()).abs() < 1e-12);
        // unseen left context (unk) falls back to uniform over V'
        let lp = lm.masked_logprobs(&tokenize("zzz b"));
        let bwd: f64 = (1.0 + 1.0) / (2.0 + 4.0);
        assert!((lp[1] - (0.5 * 0.25 + 0.5 * bwd).ln()).abs() < 1e-12);
    }

    #[test]
    fn uniform_model_perplexity() {
        let lm = PseudoLm::train(&corpus(&["a b c d e"]), 1, 1e-12).unwrap();
        let s = lm.mlm_scores(&tokenize("a c e")).unwrap();
        assert!((s.ppl - 5.0).abs() < 1e-6);
    }

    #[test]
    fn errors() {
        assert!(PseudoLm::train(&[], 3, 0.1).is_err());
        assert!(PseudoLm::train(&[vec![]], 3, 0.1).is_err());
        assert!(PseudoLm::train(&corpus(&["a"]), 0, 0.1).is_err());
        assert!(PseudoLm::train(&corpus(&["a"]), 1, 0.0).is_err());
        let lm = PseudoLm::train(&corpus(&["a"]), 1, 0.1).unwrap();
        assert!(lm.mlm_scores(&[]).is_err());
    }

    #[test]
    fn text_roundtrip_is_exact() {
        let lm = PseudoLm::train(
            &corpus(&["the cat sat .", "a dog sat down", "the dog ?"]),
            3,
            0.1,
        )
        .unwrap();
        let text = lm.to_text();
        let back = PseudoLm::from_text(&text).unwrap();
        assert_eq!(back, lm);
        assert_eq!(back.to_text(), text);
        let again = PseudoLm::train(
            &corpus(&["the cat sat .", "a dog sat down", "the dog ?"]),
            3,
            0.1,
        )
        .unwrap();
        assert_eq!(again.to_text(), text);
        assert!(PseudoLm::from_text("USLH-MODEL v1 vup\n").is_err());
    }
}
