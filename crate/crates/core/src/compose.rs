//! Normalization and composition of aspect scores.
//!
//! The hierarchical score gates likability on sensibleness:
//!
//! ```text
//! usl_h      = a1*sU + a2*sS + a3*sS*sL
//! usl_h_full = a1*sU + a2*sU*sS + a3*sU*sS*sL
//! usl_a      = a1*sU + a2*sS + a3*sL
//! ```
//!
//! All inputs must already lie in `[0, 1]`; raw scores are brought there by
//! a fitted [`Normalizer`], which is the only place values get clamped.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::textio::fmt_f64;
use crate::{Error, Result};

const SIMPLEX_TOL: f64 = 1e-9;

fn check_simplex<'a>(values: impl IntoIterator<Item = &'a f64>) -> Result<()> {
    let mut sum = 0.0;
    for &v in values {
        if v.is_nan() || v < 0.0 || !v.is_finite() {
            return Err(Error::NotSimplex(format!(
                "negative or non-finite weight {v}"
            )));
        }
        sum += v;
    }
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::NotSimplex(format!("weights sum to {sum}")));
    }
    Ok(())
}

fn unit(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::OutOfRange { name, value })
    }
}

/// Aspect coefficients `(a1, a2, a3)` on the probability simplex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alpha([f64; 3]);

impl Alpha {
    pub fn new(a1: f64, a2: f64, a3: f64) -> Result<Self> {
        check_simplex(&[a1, a2, a3])?;
        Ok(Alpha([a1, a2, a3]))
    }

    /// `(1/3, 1/3, 1/3)`, used when no calibration is supplied.
    pub fn equal() -> Self {
        Alpha([1.0 / 3.0; 3])
    }

    pub fn values(&self) -> [f64; 3] {
        self.0
    }
}

impl Default for Alpha {
    fn default() -> Self {
        Alpha::equal()
    }
}

/// Per-quality coefficients of the likability sum.
#[derive(Debug, Clone, PartialEq)]
pub struct Beta(BTreeMap<String, f64>);

impl Beta {
    pub fn new(weights: BTreeMap<String, f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::NotSimplex("no likability qualities".into()));
        }
        check_simplex(weights.values())?;
        Ok(Beta(weights))
    }

    /// All weight on a single quality.
    pub fn single(name: &str) -> Self {
        Beta(BTreeMap::from([(name.to_string(), 1.0)]))
    }

    pub fn weights(&self) -> &BTreeMap<String, f64> {
        &self.0
    }
}

/// Aspect scores of one response, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub su: f64,
    pub ss: f64,
    pub sl: f64,
    pub qualities: BTreeMap<String, f64>,
}

impl ScoreVector {
    /// Builds the vector, deriving `sl` from the qualities and `beta`.
    pub fn new(su: f64, ss: f64, qualities: BTreeMap<String, f64>, beta: &Beta) -> Result<Self> {
        let sl = likability(&qualities, beta)?;
        Ok(ScoreVector {
            su: unit("sU", su)?,
            ss: unit("sS", ss)?,
            sl,
            qualities,
        })
    }

    pub fn usl_h(&self, alpha: &Alpha) -> Result<f64> {
        usl_h(self.su, self.ss, self.sl, alpha)
    }
}

/// Likability as the beta-weighted sum of quality scores.
pub fn likability(qualities: &BTreeMap<String, f64>, beta: &Beta) -> Result<f64> {
    if !qualities.keys().eq(beta.0.keys()) {
        return Err(Error::invalid(format!(
            "quality names {:?} do not match weight names {:?}",
            qualities.keys().collect::<Vec<_>>(),
            beta.0.keys().collect::<Vec<_>>()
        )));
    }
    let mut s = 0.0;
    for (name, q) in qualities {
        s += beta.0[name] * unit("quality", *q)?;
    }
    Ok(s.clamp(0.0, 1.0))
}

/// Hierarchical score with understandability gating every term.
pub fn usl_h_full(su: f64, ss: f64, sl: f64, alpha: &Alpha) -> Result<f64> {
    let (su, ss, sl) = (unit("sU", su)?, unit("sS", ss)?, unit("sL", sl)?);
    let [a1, a2, a3] = alpha.0;
    Ok(a1 * su + a2 * su * ss + a3 * su * ss * sl)
}

/// Hierarchical score where sensibleness stands in for `sU * sS`.
pub fn usl_h(su: f64, ss: f64, sl: f64, alpha: &Alpha) -> Result<f64> {
    let (su, ss, sl) = (unit("sU", su)?, unit("sS", ss)?, unit("sL", sl)?);
    let [a1, a2, a3] = alpha.0;
    Ok(a1 * su + a2 * ss + a3 * ss * sl)
}

/// Flat weighted average of the three aspects.
pub fn usl_a(su: f64, ss: f64, sl: f64, alpha: &Alpha) -> Result<f64> {
    let (su, ss, sl) = (unit("sU", su)?, unit("sS", ss)?, unit("sL", sl)?);
    let [a1, a2, a3] = alpha.0;
    Ok(a1 * su + a2 * ss + a3 * sl)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanKind {
    Arithmetic,
    Geometric,
    Harmonic,
}

impl MeanKind {
    pub const ALL: [MeanKind; 3] = [
        MeanKind::Arithmetic,
        MeanKind::Geometric,
        MeanKind::Harmonic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MeanKind::Arithmetic => "arithmetic",
            MeanKind::Geometric => "geometric",
            MeanKind::Harmonic => "harmonic",
        }
    }
}

impl fmt::Display for MeanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Unweighted mean of the three aspects; geometric and harmonic are 0 if any input is 0.
pub fn composite_mean(su: f64, ss: f64, sl: f64, kind: MeanKind) -> Result<f64> {
    let v = [unit("sU", su)?, unit("sS", ss)?, unit("sL", sl)?];
    Ok(match kind {
        MeanKind::Arithmetic => v.iter().sum::<f64>() / 3.0,
        _ if v.contains(&0.0) => 0.0,
        MeanKind::Geometric => v.iter().product::<f64>().cbrt(),
        MeanKind::Harmonic => 3.0 / v.iter().map(|x| 1.0 / x).sum::<f64>(),
    })
}

/// Fitted min/max bounds per named raw score.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Normalizer {
    bounds: BTreeMap<String, (f64, f64)>,
}

impl Normalizer {
    /// Records the min and max of each named population.
    pub fn fit<'a, I, S>(raw: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, &'a [f64])>,
        S: Into<String>,
    {
        let mut bounds = BTreeMap::new();
        for (name, values) in raw {
            let name = name.into();
            if values.is_empty() {
                return Err(Error::invalid(format!("no values to fit `{name}`")));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("non-finite value in `{name}`")));
            }
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            bounds.insert(name, (min, max));
        }
        Ok(Normalizer { bounds })
    }

    pub fn from_bounds(bounds: BTreeMap<String, (f64, f64)>) -> Result<Self> {
        if let Some((n, _)) = bounds
            .iter()
            .find(|(_, (lo, hi))| lo.is_nan() || hi.is_nan() || lo > hi)
        {
            return Err(Error::invalid(format!("bounds for `{n}` have min > max")));
        }
        Ok(Normalizer { bounds })
    }

    pub fn bounds(&self, name: &str) -> Option<(f64, f64)> {
        self.bounds.get(name).copied()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.bounds.keys().map(String::as_str)
    }

    /// Min-max rescaling clamped to `[0, 1]`; a degenerate range maps to 0.5.
    pub fn normalize(&self, name: &str, x: f64) -> Result<f64> {
        let (min, max) = self
            .bounds
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownName(name.to_string()))?;
        if min == max {
            return Ok(0.5);
        }
        Ok(((x - min) / (max - min)).clamp(0.0, 1.0))
    }
}

/// Contents of a weights file: alpha, optional beta and normalizer bounds.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompositionWeights {
    pub alpha: Alpha,
    pub beta: Option<Beta>,
    pub normalizer: Normalizer,
}

impl CompositionWeights {
    /// Lines of `alpha = a1 a2 a3`, `beta.<name> = b`, `norm.<name> = min max`.
    pub fn to_text(&self) -> String {
        let [a1, a2, a3] = self.alpha.0;
        let mut s = format!("alpha = {} {} {}\n", fmt_f64(a1), fmt_f64(a2), fmt_f64(a3));
        if let Some(beta) = &self.beta {
            for (n, b) in &beta.0 {
                s.push_str(&format!("beta.{n} = {}\n", fmt_f64(*b)));
            }
        }
        for (n, (lo, hi)) in &self.normalizer.bounds {
            s.push_str(&format!("norm.{n} = {} {}\n", fmt_f64(*lo), fmt_f64(*hi)));
        }
        s
    }
}

impl FromStr for CompositionWeights {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut alpha = None;
        let mut beta = BTreeMap::new();
        let mut norm = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: &str| Error::Parse {
                line: i + 1,
                message: message.to_string(),
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad("expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            let nums: Vec<f64> = value
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad("malformed number"))?;
            if key == "alpha" {
                let [a1, a2, a3] = nums[..] else {
                    return Err(bad("alpha needs three values"));
                };
                alpha = Some(Alpha::new(a1, a2, a3)?);
            } else if let Some(name) = key.strip_prefix("beta.") {
                let [b] = nums[..] else {
                    return Err(bad("beta needs one value"));
                };
                beta.insert(name.to_string(), b);
            } else if let Some(name) = key.strip_prefix("norm.") {
                let [lo, hi] = nums[..] else {
                    return Err(bad("norm needs min and max"));
                };
                norm.insert(name.to_string(), (lo, hi));
            } else {
                return Err(bad(&format!("unknown key `{key}`")));
            }
        }
        Ok(CompositionWeights {
            alpha: alpha.unwrap_or_default(),
            beta: if beta.is_empty() {
                None
            } else {
                Some(Beta::new(beta)?)
            },
            normalizer: Normalizer::from_bounds(norm)?,
        })
    }
}
