//! Labeled training sets for the VUP, NUP and empathy classifiers.
//!
//! Valid utterances (label 1) are originals with at most a light edit:
//! trailing punctuation or stop words removed. Invalid ones (label 0) are
//! shuffled, have words dropped, or have spans repeated. Next-utterance
//! pairs take the true follow-up as positive and a random utterance from
//! the pool as negative.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::corpus::{extract_pairs, Dialogue, SEP};
use crate::{Error, Result};

/// Shipped stop-word list used by the stop-word removal rule.
pub const STOP_WORDS: [&str; 50] = [
    "a", "an", "the", "and", "or", "but", "if", "of", "at", "by", "for", "with", "about", "to",
    "from", "in", "on", "off", "over", "under", "then", "so", "than", "too", "very", "just", "is",
    "am", "are", "was", "were", "be", "been", "being", "do", "does", "did", "have", "has", "had",
    "this", "that", "these", "those", "there", "here", "it", "its", "as", "some",
];

/// Per-token drop probability for the word-drop rule.
pub const DROP_PROB: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    Identity,
    StripPunct,
    StripStopwords,
    Reorder,
    Drop,
    Repeat,
    ConsecutivePair,
    RandomPair,
    Emotion,
    NoEmotion,
}

impl Rule {
    pub const ALL: [Rule; 10] = [
        Rule::Identity,
        Rule::StripPunct,
        Rule::StripStopwords,
        Rule::Reorder,
        Rule::Drop,
        Rule::Repeat,
        Rule::ConsecutivePair,
        Rule::RandomPair,
        Rule::Emotion,
        Rule::NoEmotion,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Rule::Identity => "identity",
            Rule::StripPunct => "strip_punct",
            Rule::StripStopwords => "strip_stopwords",
            Rule::Reorder => "reorder",
            Rule::Drop => "drop",
            Rule::Repeat => "repeat",
            Rule::ConsecutivePair => "consecutive_pair",
            Rule::RandomPair => "random_pair",
            Rule::Emotion => "emotion",
            Rule::NoEmotion => "no_emotion",
        }
    }

    /// The label every example produced by this rule carries.
    pub fn label(self) -> u8 {
        match self {
            Rule::Identity
            | Rule::StripPunct
            | Rule::StripStopwords
            | Rule::ConsecutivePair
            | Rule::Emotion => 1,
            Rule::Reorder | Rule::Drop | Rule::Repeat | Rule::RandomPair | Rule::NoEmotion => 0,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Rule::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown rule `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledExample {
    pub tokens: Vec<String>,
    pub label: u8,
    pub rule: Rule,
}

impl LabeledExample {
    pub fn new(tokens: Vec<String>, rule: Rule) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::invalid("labeled example with no tokens"));
        }
        Ok(LabeledExample {
            tokens,
            label: rule.label(),
            rule,
        })
    }

    /// Context and response joined around [`SEP`].
    pub fn pair(context: &[String], response: &[String], rule: Rule) -> Result<Self> {
        let mut tokens = Vec::with_capacity(context.len() + response.len() + 1);
        tokens.extend_from_slice(context);
        tokens.push(SEP.to_string());
        tokens.extend_from_slice(response);
        Self::new(tokens, rule)
    }
}

fn is_punct(token: &str) -> bool {
    !token.is_empty() && token.chars().all(|c| c.is_ascii_punctuation())
}

fn strip_end_punct(tokens: &[String]) -> Vec<String> {
    let keep = tokens
        .iter()
        .rposition(|t| !is_punct(t))
        .map_or(0, |i| i + 1);
    tokens[..keep].to_vec()
}

fn strip_stopwords(tokens: &[String]) -> Vec<String> {
    tokens
        .iter()
        .filter(|t| !STOP_WORDS.contains(&t.as_str()))
        .cloned()
        .collect()
}

/// A valid-utterance edit chosen uniformly from the three positive rules.
pub fn vup_positive<R: Rng + ?Sized>(tokens: &[String], rng: &mut R) -> (Vec<String>, Rule) {
    let rule = [Rule::StripPunct, Rule::StripStopwords, Rule::Identity][rng.random_range(0..3)];
    let out = match rule {
        Rule::StripPunct => strip_end_punct(tokens),
        Rule::StripStopwords => strip_stopwords(tokens),
        _ => tokens.to_vec(),
    };
    if out.is_empty() {
        (tokens.to_vec(), Rule::Identity)
    } else {
        (out, rule)
    }
}

fn reorder<R: Rng + ?Sized>(tokens: &[String], rng: &mut R) -> Vec<String> {
    let mut out = tokens.to_vec();
    out.shuffle(rng);
    if out == tokens {
        // one retry, then the identity permutation is accepted
        out.shuffle(rng);
    }
    out
}

fn drop_words<R: Rng + ?Sized>(tokens: &[String], rng: &mut R) -> Vec<String> {
    loop {
        let out: Vec<String> = tokens
            .iter()
            .filter(|_| !rng.random_bool(DROP_PROB))
            .cloned()
            .collect();
        if !out.is_empty() && out.len() < tokens.len() {
            return out;
        }
    }
}

fn repeat_spans<R: Rng + ?Sized>(tokens: &[String], rng: &mut R) -> Vec<String> {
    let mut out = tokens.to_vec();
    let spans = rng.random_range(1..=2);
    for _ in 0..spans {
        let len = rng.random_range(1..=3usize).min(out.len());
        let start = rng.random_range(0..=out.len() - len);
        let times = rng.random_range(2..=3usize);
        let span: Vec<String> = out[start..start + len].to_vec();
        let insert_at = start + len;
        let copies: Vec<String> = span
            .iter()
            .cycle()
            .take(len * (times - 1))
            .cloned()
            .collect();
        out.splice(insert_at..insert_at, copies);
    }
    out
}

/// An invalid-utterance corruption chosen uniformly from reorder, drop and repeat.
pub fn vup_negative<R: Rng + ?Sized>(
    tokens: &[String],
    rng: &mut R,
) -> Result<(Vec<String>, Rule)> {
    if tokens.len() < 2 {
        return Err(Error::invalid(format!(
            "negative sampling needs at least 2 tokens, got {}",
            tokens.len()
        )));
    }
    let rule = [Rule::Reorder, Rule::Drop, Rule::Repeat][rng.random_range(0..3)];
    let out = match rule {
        Rule::Reorder => reorder(tokens, rng),
        Rule::Drop => drop_words(tokens, rng),
        _ => repeat_spans(tokens, rng),
    };
    Ok((out, rule))
}

/// One example per non-empty utterance, valid or corrupted with probability 1/2.
pub fn build_vup_dataset<R: Rng + ?Sized>(
    utterances: &[Vec<String>],
    rng: &mut R,
) -> Vec<LabeledExample> {
    let mut out = Vec::with_capacity(utterances.len());
    for tokens in utterances.iter().filter(|t| !t.is_empty()) {
        let positive = rng.random_bool(0.5) || tokens.len() < 2;
        let (toks, rule) = if positive {
            vup_positive(tokens, rng)
        } else {
            vup_negative(tokens, rng).expect("length checked above")
        };
        out.push(LabeledExample {
            tokens: toks,
            label: rule.label(),
            rule,
        });
    }
    out
}

/// For every consecutive pair, the true pair plus one random-response pair.
///
/// The negative response is drawn uniformly from every utterance of the
/// input and redrawn while it is token-equal to the true response.
pub fn build_nup_dataset<R: Rng + ?Sized>(
    dialogues: &[Dialogue],
    rng: &mut R,
) -> Result<Vec<LabeledExample>> {
    if dialogues.len() < 2 {
        return Err(Error::invalid(
            "next-utterance data needs at least 2 dialogues",
        ));
    }
    let pool: Vec<&[String]> = dialogues
        .iter()
        .flat_map(|d| d.utterances.iter())
        .filter(|u| !u.is_empty())
        .map(|u| u.tokens.as_slice())
        .collect();
    let mut out = Vec::new();
    for (id, d) in dialogues.iter().enumerate() {
        for pair in extract_pairs(d, id) {
            if pair.context.is_empty() || pair.response.is_empty() {
                continue;
            }
            let truth = pair.response.tokens.as_slice();
            if pool.iter().all(|p| *p == truth) {
                return Err(Error::invalid(
                    "utterance pool has no response distinct from the true one",
                ));
            }
            let negative = loop {
                let cand = pool[rng.random_range(0..pool.len())];
                if cand != truth {
                    break cand;
                }
            };
            out.push(LabeledExample::pair(
                &pair.context.tokens,
                truth,
                Rule::ConsecutivePair,
            )?);
            out.push(LabeledExample::pair(
                &pair.context.tokens,
                negative,
                Rule::RandomPair,
            )?);
        }
    }
    Ok(out)
}

/// One example per utterance: emotion `0` is "no emotion", anything else "has emotion".
pub fn build_empathy_dataset(dialogues: &[Dialogue]) -> Result<Vec<LabeledExample>> {
    let mut out = Vec::new();
    for (id, d) in dialogues.iter().enumerate() {
        let emotions = d
            .emotions
            .as_ref()
            .ok_or_else(|| Error::invalid(format!("dialogue {id} has no emotion labels")))?;
        for (u, &e) in d.utterances.iter().zip(emotions) {
            if u.is_empty() {
                continue;
            }
            let rule = if e == 0 {
                Rule::NoEmotion
            } else {
                Rule::Emotion
            };
            out.push(LabeledExample::new(u.tokens.clone(), rule)?);
        }
    }
    Ok(out)
}

/// Writes `label<TAB>rule<TAB>tokens` lines.
pub fn write_dataset(examples: &[LabeledExample]) -> String {
    let mut s = String::new();
    for ex in examples {
        s.push_str(&format!(
            "{}\t{}\t{}\n",
            ex.label,
            ex.rule,
            ex.tokens.join(" ")
        ));
    }
    s
}

pub fn read_dataset(text: &str) -> Result<Vec<LabeledExample>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let bad = |message: String| Error::Parse {
            line: i + 1,
            message,
        };
        let mut fields = line.splitn(3, '\t');
        let (Some(label), Some(rule), Some(tokens)) = (fields.next(), fields.next(), fields.next())
        else {
            return Err(bad("expected 3 tab-separated fields".into()));
        };
        let label: u8 = match label {
            "0" => 0,
            "1" => 1,
            other => return Err(bad(format!("label `{other}` is not 0 or 1"))),
        };
        let rule: Rule = rule.parse().map_err(|e: Error| bad(e.to_string()))?;
        if rule.label() != label {
            return Err(bad(format!(
                "rule {rule} is inconsistent with label {label}"
            )));
        }
        let tokens: Vec<String> = tokens
            .split(' ')
            .filter(|t| !t.is_empty())
            .map(String::from)
            .collect();
        if tokens.is_empty() {
            return Err(bad("no tokens".into()));
        }
        out.push(LabeledExample {
            tokens,
            label,
            rule,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_dailydialog, tokenize};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s)
    }

    #[test]
    fn positive_branches() {
        assert_eq!(strip_end_punct(&toks("i see .")), toks("i see"));
        assert_eq!(strip_end_punct(&toks("what ? !")), toks("what"));
        assert_eq!(strip_stopwords(&toks("the cat sat")), toks("cat sat"));
        assert_eq!(strip_end_punct(&toks("not really")), toks("not really"));
    }

    #[test]
    fn positive_never_empties() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..200 {
            let (out, rule) = vup_positive(&toks("the"), &mut rng);
            assert_eq!(out, toks("the"));
            assert!(matches!(rule, Rule::Identity | Rule::StripPunct));
            let (out, _) = vup_positive(&toks("?"), &mut rng);
            assert_eq!(out, toks("?"));
        }
    }

    #[test]
    fn positive_covers_all_rules() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..100 {
            seen.insert(vup_positive(&toks("the cat sat ."), &mut rng).1);
        }
        assert_eq!(seen.len(), 3);
    }

    #[test]
    fn negative_rule_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let input = toks("could you tell me the way to the station ?");
        let mut sorted_in = input.clone();
        sorted_in.sort();
        for _ in 0..500 {
            let (out, rule) = vup_negative(&input, &mut rng).unwrap();
            match rule {
                Rule::Reorder => {
                    let mut s = out.clone();
                    s.sort();
                    assert_eq!(s, sorted_in);
                }
                Rule::Drop => assert!(!out.is_empty() && out.len() < input.len()),
                Rule::Repeat => {
                    assert!(out.len() > input.len());
                    assert!(out.iter().all(|t| input.contains(t)));
                }
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn negative_needs_two_tokens() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(vup_negative(&toks("hi"), &mut rng).is_err());
        assert!(vup_negative(&toks("hi there"), &mut rng).is_ok());
    }

    #[test]
    fn vup_dataset_shape_and_balance() {
        let utts: Vec<Vec<String>> = (0..10_000)
            .map(|i| toks(&format!("word{i} is here .")))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let data = build_vup_dataset(&utts, &mut rng);
        assert_eq!(data.len(), 10_000);
        let pos = data.iter().filter(|e| e.label == 1).count() as f64 / data.len() as f64;
        assert!((0.48..=0.52).contains(&pos), "positive fraction {pos}");
        assert!(data.iter().all(|e| e.rule.label() == e.label));
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        assert_eq!(
            write_dataset(&data),
            write_dataset(&build_vup_dataset(&utts, &mut rng))
        );
    }

    #[test]
    fn short_utterances_become_positives() {
        let utts = vec![toks("yes"), toks("ok"), vec![]];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data = build_vup_dataset(&utts, &mut rng);
        assert_eq!(data.len(), 2);
        assert!(data.iter().all(|e| e.label == 1));
    }

    #[test]
    fn nup_dataset_properties() {
        let text =
            "a b __eou__ c d __eou__ e f __eou__\ng h __eou__ i j __eou__\nk __eou__ a b __eou__\n";
        let dialogues = parse_dailydialog(text, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let data = build_nup_dataset(&dialogues, &mut rng).unwrap();
        let pairs: usize = dialogues.iter().map(|d| d.utterances.len() - 1).sum();
        assert_eq!(data.len(), 2 * pairs);
        let consecutive: Vec<(Vec<String>, Vec<String>)> = dialogues
            .iter()
            .flat_map(|d| {
                d.utterances
                    .windows(2)
                    .map(|w| (w[0].tokens.clone(), w[1].tokens.clone()))
            })
            .collect();
        for pair in data.chunks(2) {
            let split = |e: &LabeledExample| {
                let at = e.tokens.iter().position(|t| t == SEP).unwrap();
                (e.tokens[..at].to_vec(), e.tokens[at + 1..].to_vec())
            };
            assert_eq!(pair[0].label, 1);
            assert!(consecutive.contains(&split(&pair[0])));
            assert_eq!(pair[1].label, 0);
            let (c0, r0) = split(&pair[0]);
            let (c1, r1) = split(&pair[1]);
            assert_eq!(c0, c1);
            assert_ne!(r0, r1);
        }
    }

    #[test]
    fn nup_needs_two_dialogues() {
        let d = parse_dailydialog("a __eou__ b __eou__", None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(build_nup_dataset(&d, &mut rng).is_err());
    }

    #[test]
    fn empathy_grouping() {
        let d = parse_dailydialog("ok . __eou__ wow ! __eou__ fine __eou__\n", Some("0 4 6\n"))
            .unwrap();
        let data = build_empathy_dataset(&d).unwrap();
        assert_eq!(data.len(), 3);
        assert_eq!(data[0].label, 0);
        assert_eq!(data[1].label, 1);
        assert_eq!(data[2].label, 1);
        let no_emotions = parse_dailydialog("ok . __eou__\n", None).unwrap();
        assert!(build_empathy_dataset(&no_emotions).is_err());
    }

    #[test]
    fn dataset_file_roundtrip_and_validation() {
        let ex = vec![
            LabeledExample::pair(&toks("hi"), &toks("hello ."), Rule::ConsecutivePair).unwrap(),
            LabeledExample::new(toks("b a"), Rule::Reorder).unwrap(),
        ];
        let text = write_dataset(&ex);
        assert_eq!(
            text,
            "1\tconsecutive_pair\thi ⟨sep⟩ hello .\n0\treorder\tb a\n"
        );
        assert_eq!(read_dataset(&text).unwrap(), ex);
        assert!(read_dataset("1\treorder\ta b\n").is_err());
        assert!(read_dataset("2\tidentity\ta\n").is_err());
        assert!(read_dataset("1\tidentity\n").is_err());
    }
}
