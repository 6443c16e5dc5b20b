//! Agreement and correlation statistics for validating metrics against people.
//!
//! Human judgments are [`AnnotationRecord`]s: binary understandable /
//! sensible / specific answers plus an overall score in `0..=3`, one record
//! per (item, annotator).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::{Error, Result};

/// A correlation coefficient with its two-sided p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub r: f64,
    /// From the t approximation with `n - 2` degrees of freedom; NaN when `n < 3`.
    pub p_value: f64,
    pub n: usize,
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::invalid("correlation needs at least 2 observations"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite observation"));
    }
    Ok(())
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

fn t_test(r: f64, n: usize) -> f64 {
    if n < 3 {
        return f64::NAN;
    }
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    2.0 * (1.0 - dist.cdf(t.abs()))
}

pub fn pearson_test(x: &[f64], y: &[f64]) -> Result<Correlation> {
    let r = pearson(x, y)?;
    Ok(Correlation {
        r,
        p_value: t_test(r, x.len()),
        n: x.len(),
    })
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation: Pearson on average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

pub fn spearman_test(x: &[f64], y: &[f64]) -> Result<Correlation> {
    let r = spearman(x, y)?;
    Ok(Correlation {
        r,
        p_value: t_test(r, x.len()),
        n: x.len(),
    })
}

/// Cohen's kappa between two raters labelling the same items.
///
/// Returns 1 when chance agreement is already perfect (both raters used one
/// identical label throughout).
pub fn cohen_kappa<T: Eq + Hash>(a: &[T], b: &[T]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::invalid(
            "kappa needs two non-empty label lists of equal length",
        ));
    }
    let n = a.len() as f64;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64;
    let mut ca: HashMap<&T, f64> = HashMap::new();
    let mut cb: HashMap<&T, f64> = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        *ca.entry(x).or_default() += 1.0;
        *cb.entry(y).or_default() += 1.0;
    }
    let p_o = agree / n;
    let p_e: f64 = ca
        .iter()
        .map(|(k, c)| c / n * cb.get(k).copied().unwrap_or(0.0) / n)
        .sum();
    if p_e == 1.0 {
        return Ok(1.0);
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationRecord {
    pub item_id: String,
    pub annotator_id: String,
    pub u: u8,
    pub s: u8,
    pub l: u8,
    pub overall: u8,
}

impl AnnotationRecord {
    pub fn new(
        item_id: &str,
        annotator_id: &str,
        u: u8,
        s: u8,
        l: u8,
        overall: u8,
    ) -> Result<Self> {
        if u > 1 || s > 1 || l > 1 || overall > 3 {
            return Err(Error::invalid(format!(
                "aspect answers must be 0/1 and overall 0..=3, got ({u}, {s}, {l}, {overall})"
            )));
        }
        Ok(AnnotationRecord {
            item_id: item_id.to_string(),
            annotator_id: annotator_id.to_string(),
            u,
            s,
            l,
            overall,
        })
    }

    pub fn answer(&self, q: Question) -> u8 {
        match q {
            Question::Understandable => self.u,
            Question::Sensible => self.s,
            Question::Specific => self.l,
            Question::Overall => self.overall,
        }
    }
}

/// Parses `item_id<TAB>annotator_id<TAB>u<TAB>s<TAB>l<TAB>overall` lines.
pub fn parse_annotations(text: &str) -> Result<Vec<AnnotationRecord>> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| Error::Parse {
            line: i + 1,
            message,
        };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 6 {
            return Err(bad(format!(
                "expected 6 tab-separated fields, found {}",
                f.len()
            )));
        }
        let num = |s: &str| {
            s.trim()
                .parse::<u8>()
                .map_err(|_| bad(format!("`{s}` is not a number")))
        };
        let rec = AnnotationRecord::new(f[0], f[1], num(f[2])?, num(f[3])?, num(f[4])?, num(f[5])?)
            .map_err(|e| bad(e.to_string()))?;
        if !seen.insert((rec.item_id.clone(), rec.annotator_id.clone())) {
            return Err(bad(format!(
                "duplicate record for ({}, {})",
                rec.item_id, rec.annotator_id
            )));
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn write_annotations(records: &[AnnotationRecord]) -> String {
    records
        .iter()
        .map(|r| {
            format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                r.item_id, r.annotator_id, r.u, r.s, r.l, r.overall
            )
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Question {
    Understandable,
    Sensible,
    Specific,
    Overall,
}

impl Question {
    pub const ALL: [Question; 4] = [
        Question::Understandable,
        Question::Sensible,
        Question::Specific,
        Question::Overall,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Question::Understandable => "understandable",
            Question::Sensible => "sensible",
            Question::Specific => "specific",
            Question::Overall => "overall",
        }
    }
}

impl fmt::Display for Question {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Answers grouped by annotator, keyed by item.
fn by_annotator(records: &[AnnotationRecord]) -> BTreeMap<&str, BTreeMap<&str, &AnnotationRecord>> {
    let mut out: BTreeMap<&str, BTreeMap<&str, &AnnotationRecord>> = BTreeMap::new();
    for r in records {
        out.entry(r.annotator_id.as_str())
            .or_default()
            .insert(r.item_id.as_str(), r);
    }
    out
}

/// Mean of Cohen's kappa over all annotator pairs, each on the items both labelled.
pub fn mean_pairwise_kappa(records: &[AnnotationRecord], q: Question) -> Result<f64> {
    let groups = by_annotator(records);
    let annotators: Vec<_> = groups.values().collect();
    let mut kappas = Vec::new();
    for i in 0..annotators.len() {
        for j in i + 1..annotators.len() {
            let (a, b): (Vec<u8>, Vec<u8>) = annotators[i]
                .iter()
                .filter_map(|(item, ra)| {
                    annotators[j]
                        .get(item)
                        .map(|rb| (ra.answer(q), rb.answer(q)))
                })
                .unzip();
            if !a.is_empty() {
                kappas.push(cohen_kappa(&a, &b)?);
            }
        }
    }
    if kappas.is_empty() {
        return Err(Error::invalid("no annotator pair shares an item"));
    }
    Ok(kappas.iter().sum::<f64>() / kappas.len() as f64)
}

/// Least-squares fit of overall on `(u, s, l)` with an intercept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AspectRegression {
    pub intercept: f64,
    pub slopes: [f64; 3],
}

impl AspectRegression {
    /// Softmax over the slopes.
    pub fn weights(&self) -> AspectWeights {
        let m = self
            .slopes
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let e = self.slopes.map(|s| (s - m).exp());
        let z: f64 = e.iter().sum();
        AspectWeights {
            wu: e[0] / z,
            ws: e[1] / z,
            wl: e[2] / z,
        }
    }
}

/// Softmax-normalized aspect weights; positive and summing to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AspectWeights {
    pub wu: f64,
    pub ws: f64,
    pub wl: f64,
}

impl AspectWeights {
    pub fn as_array(&self) -> [f64; 3] {
        [self.wu, self.ws, self.wl]
    }
}

pub fn regress_aspects(records: &[AnnotationRecord]) -> Result<AspectRegression> {
    if records.len() < 4 {
        return Err(Error::invalid("aspect regression needs at least 4 records"));
    }
    let x = DMatrix::from_fn(records.len(), 4, |i, j| match j {
        0 => 1.0,
        1 => f64::from(records[i].u),
        2 => f64::from(records[i].s),
        _ => f64::from(records[i].l),
    });
    let y = DVector::from_iterator(records.len(), records.iter().map(|r| f64::from(r.overall)));
    let svd = x.svd(true, true);
    let sv = &svd.singular_values;
    let (max, min) = (sv.max(), sv.min());
    if min.is_nan() || min <= max * 1e-10 {
        return Err(Error::Singular(
            "aspect answers are constant or collinear across records".into(),
        ));
    }
    let beta = svd
        .solve(&y, 0.0)
        .map_err(|e| Error::Singular(e.to_string()))?;
    Ok(AspectRegression {
        intercept: beta[0],
        slopes: [beta[1], beta[2], beta[3]],
    })
}

/// Regression of overall on the aspects followed by a softmax over the slopes.
pub fn fit_aspect_weights(records: &[AnnotationRecord]) -> Result<AspectWeights> {
    Ok(regress_aspects(records)?.weights())
}

/// One set of weights per annotator.
pub fn fit_weights_per_annotator(
    records: &[AnnotationRecord],
) -> Result<BTreeMap<String, AspectWeights>> {
    let mut grouped: BTreeMap<&str, Vec<AnnotationRecord>> = BTreeMap::new();
    for r in records {
        grouped.entry(&r.annotator_id).or_default().push(r.clone());
    }
    grouped
        .into_iter()
        .map(|(a, recs)| Ok((a.to_string(), fit_aspect_weights(&recs)?)))
        .collect()
}

/// Mean of `f(record)` per item across annotators.
pub fn mean_by_item(
    records: &[AnnotationRecord],
    f: impl Fn(&AnnotationRecord) -> f64,
) -> BTreeMap<String, f64> {
    let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for r in records {
        let e = acc.entry(r.item_id.clone()).or_default();
        e.0 += f(r);
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(k, (s, n))| (k, s / n as f64))
        .collect()
}

/// Agreement of each annotator with the mean of the others.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HumanReference {
    pub avg: f64,
    pub max: f64,
}

/// Leave-one-annotator-out Pearson correlations, averaged and maximised.
pub fn human_reference(
    records: &[AnnotationRecord],
    f: impl Fn(&AnnotationRecord) -> f64,
) -> Result<HumanReference> {
    let groups = by_annotator(records);
    let mut rs = Vec::new();
    for (&who, mine) in &groups {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (item, rec) in mine {
            let others: Vec<f64> = groups
                .iter()
                .filter(|(a, _)| **a != who)
                .filter_map(|(_, m)| m.get(item).map(|r| f(r)))
                .collect();
            if !others.is_empty() {
                x.push(f(rec));
                y.push(others.iter().sum::<f64>() / others.len() as f64);
            }
        }
        if x.len() >= 2 {
            if let Ok(r) = pearson(&x, &y) {
                rs.push(r);
            }
        }
    }
    if rs.is_empty() {
        return Err(Error::UndefinedCorrelation(
            "no annotator overlaps with the others".into(),
        ));
    }
    Ok(HumanReference {
        avg: rs.iter().sum::<f64>() / rs.len() as f64,
        max: rs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Response groups by `(u, s, l)` pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Group {
    /// `(0, 0, x)`
    G1,
    /// `(1, 0, 0)`
    G2,
    /// `(1, 0, 1)`
    G3,
    /// `(1, 1, 0)`
    G4,
    /// `(1, 1, 1)`
    G5,
    /// `(0, 1, x)`: sensible but not understandable.
    Other,
}

impl Group {
    pub fn of(u: u8, s: u8, l: u8) -> Group {
        match (u != 0, s != 0, l != 0) {
            (false, false, _) => Group::G1,
            (true, false, false) => Group::G2,
            (true, false, true) => Group::G3,
            (true, true, false) => Group::G4,
            (true, true, true) => Group::G5,
            (false, true, _) => Group::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Group::G1 => "G1",
            Group::G2 => "G2",
            Group::G3 => "G3",
            Group::G4 => "G4",
            Group::G5 => "G5",
            Group::Other => "other",
        }
    }
}

/// Per-group count and score means.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub count: usize,
    pub means: Vec<f64>,
}

/// Partitions `(u, s, l, scores)` rows into groups and averages each score column.
///
/// Groups without members are absent from the result.
pub fn aggregate_groups<'a, I>(rows: I) -> BTreeMap<Group, GroupSummary>
where
    I: IntoIterator<Item = ((u8, u8, u8), &'a [f64])>,
{
    let mut acc: BTreeMap<Group, GroupSummary> = BTreeMap::new();
    for ((u, s, l), scores) in rows {
        let g = acc
            .entry(Group::of(u, s, l))
            .or_insert_with(|| GroupSummary {
                count: 0,
                means: vec![0.0; scores.len()],
            });
        g.count += 1;
        for (m, v) in g.means.iter_mut().zip(scores) {
            *m += v;
        }
    }
    for g in acc.values_mut() {
        let n = g.count as f64;
        g.means.iter_mut().for_each(|m| *m /= n);
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Judgment {
    AWins,
    BWins,
    Tie,
}

impl FromStr for Judgment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" | "a_wins" => Ok(Judgment::AWins),
            "b" | "b_wins" => Ok(Judgment::BWins),
            "tie" => Ok(Judgment::Tie),
            other => Err(Error::invalid(format!("unknown judgment `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WinRate {
    pub rate: f64,
    pub a_wins: usize,
    pub b_wins: usize,
    pub ties: usize,
}

/// Wins of A over decisive judgments; ties are counted but excluded.
pub fn win_rate_from_counts(a_wins: usize, b_wins: usize, ties: usize) -> Result<WinRate> {
    if a_wins + b_wins == 0 {
        if ties == 0 {
            return Err(Error::invalid("no judgments"));
        }
        return Err(Error::AllTies { ties });
    }
    Ok(WinRate {
        rate: a_wins as f64 / (a_wins + b_wins) as f64,
        a_wins,
        b_wins,
        ties,
    })
}

pub fn win_rate(judgments: &[Judgment]) -> Result<WinRate> {
    let count = |j: Judgment| judgments.iter().filter(|&&x| x == j).count();
    win_rate_from_counts(
        count(Judgment::AWins),
        count(Judgment::BWins),
        count(Judgment::Tie),
    )
}
