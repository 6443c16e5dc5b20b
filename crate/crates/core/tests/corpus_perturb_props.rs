use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uslh_core::corpus::*;
use uslh_core::perturb::*;

fn word() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z]{1,8}",
        Just(".".to_string()),
        Just("?".to_string()),
        Just("!".to_string()),
        Just("the".to_string()),
        Just("a".to_string()),
    ]
}

fn utterance() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(word(), 1..12)
}

fn dialogue() -> impl Strategy<Value = Vec<Vec<String>>> {
    prop::collection::vec(utterance(), 1..8)
}

fn counts(tokens: &[String]) -> BTreeMap<&str, usize> {
    let mut m = BTreeMap::new();
    for t in tokens {
        *m.entry(t.as_str()).or_default() += 1;
    }
    m
}

proptest! {
    #[test]
    fn parse_serialize_round_trip(dialogues in prop::collection::vec(dialogue(), 1..6)) {
        let text: String = dialogues
            .iter()
            .map(|d| d.iter().map(|u| format!("{} {EOU} ", u.join(" "))).collect::<String>() + "\n")
            .collect();
        let parsed = parse_dailydialog(&text, None).unwrap();
        let again: String = parsed.iter().map(|d| d.to_line() + "\n").collect();
        let reparsed = parse_dailydialog(&again, None).unwrap();
        prop_assert_eq!(parsed.len(), dialogues.len());
        for ((orig, p), r) in dialogues.iter().zip(&parsed).zip(&reparsed) {
            prop_assert_eq!(p.utterances.len(), orig.len());
            for ((o, a), b) in orig.iter().zip(&p.utterances).zip(&r.utterances) {
                prop_assert_eq!(&a.tokens, o);
                prop_assert_eq!(&a.tokens, &b.tokens);
            }
            prop_assert_eq!(extract_pairs(p, 0).len(), p.utterances.len() - 1);
        }
    }

    #[test]
    fn split_is_a_partition(n in 0usize..60, seed in any::<u64>()) {
        let items: Vec<usize> = (0..n).collect();
        let (a, b) = split_corpus(&items, seed);
        prop_assert_eq!(a.len(), n.div_ceil(2));
        prop_assert_eq!(a.len() + b.len(), n);
        let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
        all.sort();
        prop_assert_eq!(all, items.clone());
        prop_assert_eq!(split_corpus(&items, seed), (a, b));
    }

    #[test]
    fn negatives_follow_their_rule(tokens in prop::collection::vec("[a-z]{1,5}", 2..15), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (out, rule) = vup_negative(&tokens, &mut rng).unwrap();
        prop_assert_eq!(rule.label(), 0);
        match rule {
            Rule::Reorder => prop_assert_eq!(counts(&out), counts(&tokens)),
            Rule::Drop => {
                prop_assert!(!out.is_empty() && out.len() < tokens.len());
                // a subsequence of the input
                let mut it = tokens.iter();
                prop_assert!(out.iter().all(|t| it.any(|u| u == t)));
            }
            Rule::Repeat => {
                prop_assert!(out.len() > tokens.len());
                let (o, t) = (counts(&out), counts(&tokens));
                prop_assert!(t.iter().all(|(k, c)| o.get(k) >= Some(c)));
                prop_assert!(o.keys().all(|k| t.contains_key(k)));
            }
            other => prop_assert!(false, "unexpected negative rule {other}"),
        }
    }

    #[test]
    fn positives_only_remove_tokens(tokens in utterance(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (out, rule) = vup_positive(&tokens, &mut rng);
        prop_assert_eq!(rule.label(), 1);
        prop_assert!(!out.is_empty());
        let mut it = tokens.iter();
        prop_assert!(out.iter().all(|t| it.any(|u| u == t)));
        if rule == Rule::Identity {
            prop_assert_eq!(out, tokens);
        }
    }

    #[test]
    fn nup_pairs_are_balanced(dialogues in prop::collection::vec(dialogue(), 2..6), seed in any::<u64>()) {
        let ds: Vec<Dialogue> = dialogues
            .iter()
            .map(|d| Dialogue::new(d.iter().map(|u| Utterance::new(u.join(" "))).collect(), None).unwrap())
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let expected: usize = ds.iter().map(|d| d.utterances.len() - 1).sum();
        match build_nup_dataset(&ds, &mut rng) {
            Ok(ex) => {
                prop_assert_eq!(ex.len(), 2 * expected);
                for pair in ex.chunks(2) {
                    prop_assert_eq!(pair[0].label, 1);
                    prop_assert_eq!(pair[1].label, 0);
                    let sep = |e: &LabeledExample| e.tokens.iter().position(|t| t == SEP).unwrap();
                    prop_assert_eq!(&pair[0].tokens[..sep(&pair[0])], &pair[1].tokens[..sep(&pair[1])]);
                    prop_assert_ne!(&pair[0].tokens[sep(&pair[0])..], &pair[1].tokens[sep(&pair[1])..]);
                }
            }
            // only legitimate when every utterance is identical
            Err(_) => {
                let first = &ds[0].utterances[0].tokens;
                prop_assert!(ds.iter().flat_map(|d| &d.utterances).all(|u| &u.tokens == first));
            }
        }
    }

    #[test]
    fn dataset_file_round_trips(utts in prop::collection::vec(utterance(), 1..20), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = build_vup_dataset(&utts, &mut rng);
        prop_assert_eq!(read_dataset(&write_dataset(&data)).unwrap(), data);
    }
}
