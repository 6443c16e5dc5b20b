//! Hierarchical evaluation of open-domain dialogue responses.
//!
//! A response is judged on three aspects, checked in order:
//!
//! * **understandability** (`s_U`): is the utterance comprehensible on its own?
//! * **sensibleness** (`s_S`): does it make sense as a reply to the context?
//! * **likability** (`s_L`): does it carry the extra qualities a task wants,
//!   such as specificity or empathy?
//!
//! Each aspect is scored by a pluggable sub-metric and the scores are
//! composed with [`compose::usl_h`]:
//!
//! ```text
//! s = a1 * s_U + a2 * s_S + a3 * s_S * s_L
//! ```
//!
//! The crate is organised as follows:
//!
//! * [`corpus`]: DailyDialog-style parsing, tokenization, pair extraction, splitting.
//! * [`perturb`]: positive/negative sampling for the classifier training sets.
//! * [`langmodel`]: a bidirectional n-gram pseudo masked LM and the MLM score family.
//! * [`classify`]: max-pooled embedding classifiers for VUP, NUP and empathy.
//! * [`compose`]: normalization and composition of sub-scores.
//! * [`stats`]: correlations, Cohen's kappa, aspect-weight calibration, win rates.
//! * [`baselines`]: BLEU, ROUGE-L and embedding-based reference metrics.
//! * [`synth`]: a deterministic generator for DailyDialog-format sample data.
//!
//! ```
//! use uslh_core::compose::{usl_h, Alpha};
//!
//! let alpha = Alpha::equal();
//! let s = usl_h(0.6, 0.9, 0.5, &alpha).unwrap();
//! assert!((s - 0.65).abs() < 1e-12);
//! ```

pub mod baselines;
pub mod classify;
pub mod compose;
pub mod corpus;
mod error;
pub mod langmodel;
pub mod perturb;
pub mod stats;
pub mod synth;
pub(crate) mod textio;

pub use error::{Error, Result};
