//! DailyDialog-style corpora: tokenization, parsing, pair extraction and splitting.
//!
//! The canonical format holds one dialogue per line, with each utterance
//! terminated by the literal marker `__eou__`. An optional emotion file holds
//! one line per dialogue with one digit in `0..=6` per utterance.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Utterance terminator used by the corpus format.
pub const EOU: &str = "__eou__";

/// Separator placed between context and response tokens in pair inputs.
pub const SEP: &str = "⟨sep⟩";

/// Symbols reserved for model inputs. [`tokenize`] never emits them.
pub const RESERVED: [&str; 4] = [SEP, "⟨unk⟩", "⟨s⟩", "⟨/s⟩"];

/// Highest DailyDialog emotion label (`0` is "no emotion").
pub const MAX_EMOTION: u8 = 6;

/// Lowercases and splits on whitespace.
///
/// DailyDialog ships with punctuation already separated by spaces, so no
/// further splitting is done. A raw token that collides with a reserved
/// symbol has its angle brackets rewritten to ASCII.
pub fn tokenize(raw: &str) -> Vec<String> {
    raw.split_whitespace()
        .map(|t| {
            let t = t.to_lowercase();
            if RESERVED.contains(&t.as_str()) {
                t.replace('⟨', "<").replace('⟩', ">")
            } else {
                t
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utterance {
    pub raw: String,
    pub tokens: Vec<String>,
}

impl Utterance {
    pub fn new(raw: impl Into<String>) -> Self {
        let raw = raw.into();
        let tokens = tokenize(&raw);
        Utterance { raw, tokens }
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dialogue {
    pub utterances: Vec<Utterance>,
    pub emotions: Option<Vec<u8>>,
}

impl Dialogue {
    pub fn new(utterances: Vec<Utterance>, emotions: Option<Vec<u8>>) -> Result<Self> {
        if utterances.is_empty() {
            return Err(Error::invalid("a dialogue needs at least one utterance"));
        }
        if let Some(e) = &emotions {
            if e.len() != utterances.len() {
                return Err(Error::invalid(format!(
                    "{} emotion labels for {} utterances",
                    e.len(),
                    utterances.len()
                )));
            }
            if let Some(bad) = e.iter().find(|&&x| x > MAX_EMOTION) {
                return Err(Error::invalid(format!("emotion label {bad} outside 0..=6")));
            }
        }
        Ok(Dialogue {
            utterances,
            emotions,
        })
    }

    /// Serializes back into one corpus line.
    pub fn to_line(&self) -> String {
        let mut s = String::new();
        for u in &self.utterances {
            s.push_str(u.raw.trim());
            s.push(' ');
            s.push_str(EOU);
            s.push(' ');
        }
        s.trim_end().to_string()
    }

    pub fn emotion_line(&self) -> Option<String> {
        self.emotions.as_ref().map(|e| {
            e.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextResponsePair {
    pub context: Utterance,
    pub response: Utterance,
    pub dialogue_id: usize,
    pub turn_index: usize,
}

fn parse_line(line: &str) -> Vec<Utterance> {
    let mut segments: Vec<&str> = line.split(EOU).collect();
    if segments.last().is_some_and(|s| s.trim().is_empty()) {
        segments.pop();
    }
    segments
        .into_iter()
        .map(|s| Utterance::new(s.trim()))
        .collect()
}

fn parse_emotions(line: &str, line_no: usize) -> Result<Vec<u8>> {
    line.split_whitespace()
        .map(|t| match t.parse::<u8>() {
            Ok(v) if v <= MAX_EMOTION => Ok(v),
            _ => Err(Error::Parse {
                line: line_no,
                message: format!("emotion label `{t}` is not a digit in 0..=6"),
            }),
        })
        .collect()
}

/// Parses a corpus and, optionally, its aligned emotion file.
///
/// Blank corpus lines are skipped; emotion lines are matched to corpus lines
/// by line number. Line numbers in errors are 1-based.
pub fn parse_dailydialog(text: &str, emotions: Option<&str>) -> Result<Vec<Dialogue>> {
    let emotion_lines: Option<Vec<&str>> = emotions.map(|e| e.lines().collect());
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = i + 1;
        let utterances = parse_line(line);
        if utterances.is_empty() {
            continue;
        }
        let emo = match &emotion_lines {
            None => None,
            Some(lines) => {
                let raw = lines.get(i).ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: "missing emotion line".into(),
                })?;
                let labels = parse_emotions(raw, line_no)?;
                if labels.len() != utterances.len() {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!(
                            "{} emotion labels for {} utterances",
                            labels.len(),
                            utterances.len()
                        ),
                    });
                }
                Some(labels)
            }
        };
        out.push(Dialogue {
            utterances,
            emotions: emo,
        });
    }
    Ok(out)
}

/// Consecutive `(u_i, u_{i+1})` pairs of one dialogue, in order.
pub fn extract_pairs(dialogue: &Dialogue, dialogue_id: usize) -> Vec<ContextResponsePair> {
    dialogue
        .utterances
        .windows(2)
        .enumerate()
        .map(|(turn_index, w)| ContextResponsePair {
            context: w[0].clone(),
            response: w[1].clone(),
            dialogue_id,
            turn_index,
        })
        .collect()
}

/// Seeded shuffle followed by an even split; the first part takes the odd one out.
pub fn split_corpus<T: Clone>(items: &[T], seed: u64) -> (Vec<T>, Vec<T>) {
    let mut order: Vec<usize> = (0..items.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let cut = items.len().div_ceil(2);
    let a = order[..cut].iter().map(|&i| items[i].clone()).collect();
    let b = order[cut..].iter().map(|&i| items[i].clone()).collect();
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_examples() {
        assert_eq!(
            tokenize("Dinner 's ready !"),
            ["dinner", "'s", "ready", "!"]
        );
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("A  B"), ["a", "b"]);
        assert!(tokenize(" \t\n").is_empty());
    }

    #[test]
    fn tokenize_never_emits_reserved() {
        assert_eq!(tokenize("x ⟨sep⟩ y"), ["x", "<sep>", "y"]);
        for r in RESERVED {
            assert!(!tokenize(&format!("a {r} b")).iter().any(|t| t == r));
        }
    }

    #[test]
    fn parse_single_dialogue() {
        let d = parse_dailydialog("Hi ! __eou__ Hello . __eou__", None).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].utterances.len(), 2);
        assert_eq!(d[0].utterances[1].tokens, ["hello", "."]);
    }

    #[test]
    fn parse_empty_stream() {
        assert!(parse_dailydialog("", None).unwrap().is_empty());
        assert!(parse_dailydialog("\n\n", None).unwrap().is_empty());
    }

    #[test]
    fn parse_with_emotions() {
        let d = parse_dailydialog("Hi ! __eou__ Great ! __eou__\n", Some("0 4\n")).unwrap();
        assert_eq!(d[0].emotions.as_deref(), Some(&[0u8, 4][..]));
    }

    #[test]
    fn emotion_count_mismatch_names_line() {
        let text = "a __eou__ b __eou__\nc __eou__ d __eou__\n";
        let err = parse_dailydialog(text, Some("0 0\n0\n")).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn emotion_digit_out_of_range() {
        let err = parse_dailydialog("a __eou__\n", Some("7\n")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn pairs_of_three() {
        let d = Dialogue::new(
            vec![
                Utterance::new("u1"),
                Utterance::new("u2"),
                Utterance::new("u3"),
            ],
            None,
        )
        .unwrap();
        let p = extract_pairs(&d, 7);
        assert_eq!(p.len(), 2);
        assert_eq!(p[0].context.raw, "u1");
        assert_eq!(p[0].response.raw, "u2");
        assert_eq!(p[1].context.raw, "u2");
        assert_eq!(p[1].response.raw, "u3");
        assert_eq!(p[1].turn_index, 1);
        assert_eq!(p[1].dialogue_id, 7);
    }

    #[test]
    fn pairs_of_one_and_five() {
        let one = Dialogue::new(vec![Utterance::new("u1")], None).unwrap();
        assert!(extract_pairs(&one, 0).is_empty());
        let five = Dialogue::new(
            (0..5).map(|i| Utterance::new(format!("u{i}"))).collect(),
            None,
        )
        .unwrap();
        assert_eq!(extract_pairs(&five, 0).len(), 4);
    }

    #[test]
    fn split_sizes_and_determinism() {
        let ten: Vec<usize> = (0..10).collect();
        let (a, b) = split_corpus(&ten, 1);
        assert_eq!((a.len(), b.len()), (5, 5));
        let eleven: Vec<usize> = (0..11).collect();
        let (a, b) = split_corpus(&eleven, 1);
        assert_eq!((a.len(), b.len()), (6, 5));
        assert_eq!(split_corpus(&eleven, 9), split_corpus(&eleven, 9));
    }

    #[test]
    fn dialogue_validation() {
        assert!(Dialogue::new(vec![], None).is_err());
        assert!(Dialogue::new(vec![Utterance::new("a")], Some(vec![0, 1])).is_err());
        assert!(Dialogue::new(vec![Utterance::new("a")], Some(vec![9])).is_err());
    }
}
