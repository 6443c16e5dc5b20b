//! Pipelines behind the `uslh` command: loading models, scoring batches of
//! context/response pairs, ranking response pools and correlating metric
//! columns with human judgments.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use uslh_core::baselines::{bleu, embedding_metric, rouge_l, EmbeddingMode, WordVectorTable};
use uslh_core::classify::{ScorerKind, ScorerModel};
use uslh_core::compose::{
    composite_mean, usl_a, usl_h, usl_h_full, Alpha, Beta, CompositionWeights, MeanKind, Normalizer,
};
use uslh_core::corpus::tokenize;
use uslh_core::langmodel::PseudoLm;
use uslh_core::stats::{mean_by_item, pearson_test, spearman_test, AnnotationRecord, Correlation};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] uslh_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        source: uslh_core::Error,
    },

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Process exit code: 1 for I/O failures, 2 for everything the user can fix.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { source, .. } if source.kind() != std::io::ErrorKind::NotFound => 1,
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses a file's contents, attaching the path to any error.
pub fn parse_file<T>(
    path: &Path,
    parse: impl FnOnce(&str) -> uslh_core::Result<T>,
) -> CliResult<T> {
    let text = read_file(path)?;
    parse(&text).map_err(|source| CliError::InFile {
        path: path.to_path_buf(),
        source,
    })
}

/// Raw MLM columns, all candidates for MinMax normalization.
pub const MLM_COLUMNS: [&str; 4] = ["mlm_likelihood", "mlm_nce", "mlm_ppl", "mlm_slor"];

/// Qualities that are already probabilities and skip normalization.
const PROBABILITY_QUALITIES: [&str; 1] = ["empathy"];

/// Every column `score` can emit, in output order.
pub const COLUMNS: [&str; 21] = [
    "vup",
    "nup",
    "mlm_likelihood",
    "mlm_nce",
    "mlm_ppl",
    "mlm_slor",
    "empathy",
    "s_l",
    "usl_h",
    "usl_h_full",
    "usl_a",
    "mean_arithmetic",
    "mean_geometric",
    "mean_harmonic",
    "bleu1",
    "bleu2",
    "bleu4",
    "rouge_l",
    "emb_average",
    "emb_greedy",
    "emb_extrema",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormalizerPolicy {
    /// Fit min/max on the batch being scored.
    #[default]
    Batch,
    /// Use the bounds stored in the weights file.
    File,
}

impl FromStr for NormalizerPolicy {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "batch" => Ok(NormalizerPolicy::Batch),
            "file" => Ok(NormalizerPolicy::File),
            _ => Err(CliError::Usage(format!("unknown normalizer policy `{s}`"))),
        }
    }
}

/// Everything `score` and `rank` need, resolved to paths before any work starts.
#[derive(Debug, Clone, Default)]
pub struct PipelineConfig {
    pub seed: u64,
    pub model_dir: PathBuf,
    pub vup_model: Option<PathBuf>,
    pub nup_model: Option<PathBuf>,
    pub lm_model: Option<PathBuf>,
    pub empathy_model: Option<PathBuf>,
    pub vectors: Option<PathBuf>,
    pub weights: Option<PathBuf>,
    /// Single quality used as likability; overrides any beta in the weights file.
    pub likability: Option<String>,
    pub normalizer: NormalizerPolicy,
    /// Output columns; empty means all available.
    pub metrics: Vec<String>,
}

impl PipelineConfig {
    fn resolve(&self, explicit: &Option<PathBuf>, name: &str) -> PathBuf {
        explicit
            .clone()
            .unwrap_or_else(|| self.model_dir.join(format!("{name}.model")))
    }

    pub fn vup_path(&self) -> PathBuf {
        self.resolve(&self.vup_model, "vup")
    }

    pub fn nup_path(&self) -> PathBuf {
        self.resolve(&self.nup_model, "nup")
    }

    pub fn lm_path(&self) -> PathBuf {
        self.resolve(&self.lm_model, "lm")
    }

    pub fn empathy_path(&self) -> PathBuf {
        self.resolve(&self.empathy_model, "empathy")
    }

    /// Checks names and paths; nothing is loaded or scored yet.
    pub fn validate(&self) -> CliResult<()> {
        for m in &self.metrics {
            if !COLUMNS.contains(&m.as_str()) {
                return Err(CliError::Usage(format!("unknown metric `{m}`")));
            }
        }
        if let Some(l) = &self.likability {
            if !MLM_COLUMNS.contains(&l.as_str()) && !PROBABILITY_QUALITIES.contains(&l.as_str()) {
                return Err(CliError::Usage(format!("unknown likability scorer `{l}`")));
            }
        }
        let must_exist = |p: PathBuf, what: &str| -> CliResult<()> {
            if p.is_file() {
                Ok(())
            } else {
                Err(CliError::Usage(format!(
                    "{what} not found: {}",
                    p.display()
                )))
            }
        };
        must_exist(self.vup_path(), "VUP model")?;
        must_exist(self.nup_path(), "NUP model")?;
        if let Some(p) = &self.weights {
            must_exist(p.clone(), "weights file")?;
        } else if self.normalizer == NormalizerPolicy::File {
            return Err(CliError::Usage("--normalizer file needs --weights".into()));
        }
        for p in [&self.lm_model, &self.empathy_model, &self.vectors]
            .into_iter()
            .flatten()
        {
            must_exist(p.clone(), "input")?;
        }
        Ok(())
    }

    /// Validates, then loads models and weights.
    pub fn load(&self) -> CliResult<Pipeline> {
        self.validate()?;
        let vup = load_scorer(&self.vup_path(), ScorerKind::Vup)?;
        let nup = load_scorer(&self.nup_path(), ScorerKind::Nup)?;
        let lm_path = self.lm_path();
        let lm = if self.lm_model.is_some() || lm_path.is_file() {
            Some(parse_file(&lm_path, PseudoLm::from_text)?)
        } else {
            None
        };
        let emp_path = self.empathy_path();
        let empathy = if self.empathy_model.is_some() || emp_path.is_file() {
            Some(load_scorer(&emp_path, ScorerKind::Empathy)?)
        } else {
            None
        };
        let vectors = match &self.vectors {
            Some(p) => Some(parse_file(p, WordVectorTable::parse)?),
            None => None,
        };
        let weights = match &self.weights {
            Some(p) => parse_file(p, str::parse)?,
            None => CompositionWeights::default(),
        };
        let beta = match (&self.likability, &weights.beta) {
            (Some(name), _) => Beta::single(name),
            (None, Some(b)) => b.clone(),
            (None, None) => Beta::single("mlm_likelihood"),
        };
        for q in beta.weights().keys() {
            let available = if q == "empathy" {
                empathy.is_some()
            } else if MLM_COLUMNS.contains(&q.as_str()) {
                lm.is_some()
            } else {
                false
            };
            if !available {
                let path = if q == "empathy" {
                    emp_path.clone()
                } else {
                    lm_path.clone()
                };
                return Err(CliError::Usage(format!(
                    "likability quality `{q}` needs a model at {}",
                    path.display()
                )));
            }
        }
        Ok(Pipeline {
            vup,
            nup,
            lm,
            empathy,
            vectors,
            weights,
            beta,
            policy: self.normalizer,
            metrics: self.metrics.clone(),
        })
    }
}

fn load_scorer(path: &Path, kind: ScorerKind) -> CliResult<ScorerModel> {
    let model = parse_file(path, ScorerModel::from_text)?;
    if model.kind() != kind {
        return Err(CliError::Usage(format!(
            "{} holds a {} model, expected {kind}",
            path.display(),
            model.kind()
        )));
    }
    Ok(model)
}

/// One evaluation input line.
#[derive(Debug, Clone, PartialEq)]
pub struct PairInput {
    pub item_id: String,
    pub context: String,
    pub response: String,
    pub reference: Option<String>,
}

/// Parses `item_id<TAB>context<TAB>response[<TAB>reference]` lines.
pub fn parse_pairs(text: &str) -> uslh_core::Result<Vec<PairInput>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| uslh_core::Error::Parse {
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if !(3..=4).contains(&fields.len()) {
            return Err(bad(format!(
                "expected 3 or 4 tab-separated fields, got {}",
                fields.len()
            )));
        }
        if tokenize(fields[1]).is_empty() || tokenize(fields[2]).is_empty() {
            return Err(bad("empty context or response".into()));
        }
        if !seen.insert(fields[0]) {
            return Err(bad(format!("duplicate item id `{}`", fields[0])));
        }
        out.push(PairInput {
            item_id: fields[0].to_string(),
            context: fields[1].to_string(),
            response: fields[2].to_string(),
            reference: fields
                .get(3)
                .filter(|r| !tokenize(r).is_empty())
                .map(|r| r.to_string()),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredItem {
    pub item_id: String,
    pub context: String,
    pub response: String,
    /// `vup`, `nup`, the MLM family and `empathy` when their models are loaded.
    pub raw: BTreeMap<&'static str, f64>,
    /// Likability after normalization and beta weighting.
    pub sl: f64,
    pub composed: BTreeMap<&'static str, f64>,
    pub baselines: BTreeMap<&'static str, f64>,
}

impl ScoredItem {
    fn get(&self, column: &str) -> Option<f64> {
        if column == "s_l" {
            return Some(self.sl);
        }
        self.raw
            .get(column)
            .or_else(|| self.composed.get(column))
            .or_else(|| self.baselines.get(column))
            .copied()
    }

    /// Present columns in canonical order.
    pub fn columns(&self) -> Vec<(&'static str, f64)> {
        COLUMNS
            .iter()
            .filter_map(|&c| self.get(c).map(|v| (c, v)))
            .collect()
    }
}

/// Loaded models and composition settings.
pub struct Pipeline {
    vup: ScorerModel,
    nup: ScorerModel,
    lm: Option<PseudoLm>,
    empathy: Option<ScorerModel>,
    vectors: Option<WordVectorTable>,
    weights: CompositionWeights,
    beta: Beta,
    policy: NormalizerPolicy,
    metrics: Vec<String>,
}

impl Pipeline {
    pub fn alpha(&self) -> Alpha {
        self.weights.alpha
    }

    fn raw_scores(&self, pair: &PairInput) -> CliResult<BTreeMap<&'static str, f64>> {
        let context = tokenize(&pair.context);
        let response = tokenize(&pair.response);
        let mut raw = BTreeMap::new();
        raw.insert("vup", self.vup.score_utterance(&response)?);
        raw.insert("nup", self.nup.score_pair(&context, &response)?);
        if let Some(lm) = &self.lm {
            let s = lm.mlm_scores(&response)?;
            raw.insert("mlm_likelihood", s.likelihood);
            raw.insert("mlm_nce", s.nce);
            raw.insert("mlm_ppl", s.ppl);
            raw.insert("mlm_slor", s.slor);
        }
        if let Some(e) = &self.empathy {
            raw.insert("empathy", e.score_utterance(&response)?);
        }
        Ok(raw)
    }

    fn baselines(&self, pair: &PairInput) -> CliResult<BTreeMap<&'static str, f64>> {
        let mut out = BTreeMap::new();
        let Some(reference) = &pair.reference else {
            return Ok(out);
        };
        let r = tokenize(reference);
        let c = tokenize(&pair.response);
        out.insert("bleu1", bleu(&r, &c, 1)?);
        out.insert("bleu2", bleu(&r, &c, 2)?);
        out.insert("bleu4", bleu(&r, &c, 4)?);
        out.insert("rouge_l", rouge_l(&r, &c)?);
        if let Some(table) = &self.vectors {
            for (name, mode) in [
                ("emb_average", EmbeddingMode::Average),
                ("emb_greedy", EmbeddingMode::Greedy),
                ("emb_extrema", EmbeddingMode::Extrema),
            ] {
                // all-OOV sides leave the column out for this item
                if let Ok(v) = embedding_metric(table, &r, &c, mode) {
                    out.insert(name, v);
                }
            }
        }
        Ok(out)
    }

    fn normalizer_for(&self, raws: &[BTreeMap<&'static str, f64>]) -> CliResult<Normalizer> {
        match self.policy {
            NormalizerPolicy::File => Ok(self.weights.normalizer.clone()),
            NormalizerPolicy::Batch => {
                let mut cols: Vec<(&str, Vec<f64>)> = Vec::new();
                for name in MLM_COLUMNS {
                    let values: Vec<f64> =
                        raws.iter().filter_map(|r| r.get(name).copied()).collect();
                    if !values.is_empty() {
                        cols.push((name, values));
                    }
                }
                Ok(Normalizer::fit(
                    cols.iter().map(|(n, v)| (*n, v.as_slice())),
                )?)
            }
        }
    }

    fn likability(&self, raw: &BTreeMap<&'static str, f64>, norm: &Normalizer) -> CliResult<f64> {
        let mut sl = 0.0;
        for (q, b) in self.beta.weights() {
            let x = raw.get(q.as_str()).copied().ok_or_else(|| {
                CliError::Usage(format!("likability quality `{q}` has no loaded model"))
            })?;
            let v = if PROBABILITY_QUALITIES.contains(&q.as_str()) {
                x
            } else {
                norm.normalize(q, x)?
            };
            sl += b * v;
        }
        Ok(sl.clamp(0.0, 1.0))
    }

    /// Scores every pair; returns the items and the normalizer that was applied.
    pub fn score_batch(&self, pairs: &[PairInput]) -> CliResult<(Vec<ScoredItem>, Normalizer)> {
        if pairs.is_empty() {
            return Ok((Vec::new(), self.weights.normalizer.clone()));
        }
        let raws: Vec<_> = pairs
            .iter()
            .map(|p| self.raw_scores(p))
            .collect::<CliResult<_>>()?;
        let norm = self.normalizer_for(&raws)?;
        let alpha = self.weights.alpha;
        let mut items = Vec::with_capacity(pairs.len());
        for (pair, raw) in pairs.iter().zip(raws) {
            let (su, ss) = (raw["vup"], raw["nup"]);
            let sl = self.likability(&raw, &norm)?;
            let mut composed = BTreeMap::new();
            composed.insert("usl_h", usl_h(su, ss, sl, &alpha)?);
            composed.insert("usl_h_full", usl_h_full(su, ss, sl, &alpha)?);
            composed.insert("usl_a", usl_a(su, ss, sl, &alpha)?);
            for kind in MeanKind::ALL {
                let name = match kind {
                    MeanKind::Arithmetic => "mean_arithmetic",
                    MeanKind::Geometric => "mean_geometric",
                    MeanKind::Harmonic => "mean_harmonic",
                };
                composed.insert(name, composite_mean(su, ss, sl, kind)?);
            }
            items.push(ScoredItem {
                item_id: pair.item_id.clone(),
                context: pair.context.clone(),
                response: pair.response.clone(),
                raw,
                sl,
                composed,
                baselines: self.baselines(pair)?,
            });
        }
        Ok((items, norm))
    }

    /// The weights that reproduce this run: alpha, beta and the applied bounds.
    pub fn applied_weights(&self, norm: &Normalizer) -> CompositionWeights {
        CompositionWeights {
            alpha: self.weights.alpha,
            beta: Some(self.beta.clone()),
            normalizer: norm.clone(),
        }
    }

    /// `item_id<TAB>metric<TAB>value` lines restricted to the selected metrics.
    pub fn render_scores(&self, items: &[ScoredItem]) -> String {
        let mut out = String::new();
        for item in items {
            for (name, v) in item.columns() {
                if self.metrics.is_empty() || self.metrics.iter().any(|m| m == name) {
                    out.push_str(&format!("{}\t{name}\t{v:.6}\n", item.item_id));
                }
            }
        }
        out
    }

    /// Scores each response against `context` and ranks by `metric`.
    pub fn rank_responses(
        &self,
        context: &str,
        pool: &[String],
        metric: &str,
    ) -> CliResult<Ranking> {
        if pool.is_empty() {
            return Err(CliError::Usage("empty response pool".into()));
        }
        let pairs: Vec<PairInput> = pool
            .iter()
            .enumerate()
            .map(|(i, r)| PairInput {
                item_id: i.to_string(),
                context: context.to_string(),
                response: r.clone(),
                reference: None,
            })
            .collect();
        let (items, _) = self.score_batch(&pairs)?;
        let scores: Vec<f64> = items
            .iter()
            .map(|it| it.get(metric))
            .collect::<Option<_>>()
            .ok_or_else(|| {
                CliError::Usage(format!("metric `{metric}` is not available for ranking"))
            })?;
        Ok(Ranking {
            order: rank_by_score(&scores),
            scores,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    /// Pool indices, best first.
    pub order: Vec<usize>,
    /// Scores in pool order.
    pub scores: Vec<f64>,
}

impl Ranking {
    pub fn best(&self) -> usize {
        self.order[0]
    }
}

/// Indices sorted by descending score; ties keep pool order.
pub fn rank_by_score(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}

/// Scores file contents keyed by item, then metric.
pub type ScoreTable = BTreeMap<String, BTreeMap<String, f64>>;

pub fn parse_scores(text: &str) -> uslh_core::Result<ScoreTable> {
    let mut out: ScoreTable = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: &str| uslh_core::Error::Parse {
            line: i + 1,
            message: message.to_string(),
        };
        let [item, metric, value] = line.split('\t').collect::<Vec<_>>()[..] else {
            return Err(bad("expected item_id, metric and value"));
        };
        let v: f64 = value.parse().map_err(|_| bad("malformed value"))?;
        if out
            .entry(item.to_string())
            .or_default()
            .insert(metric.to_string(), v)
            .is_some()
        {
            return Err(bad("duplicate item/metric"));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HumanTarget {
    /// Mean overall rating per item.
    Vanilla,
    /// Hierarchical composite of the mean aspect answers per item.
    UslH,
}

impl fmt::Display for HumanTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HumanTarget::Vanilla => "vanilla",
            HumanTarget::UslH => "usl_h",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub metric: String,
    pub target: HumanTarget,
    pub pearson: Option<Correlation>,
    pub spearman: Option<Correlation>,
}

/// Human targets per item.
pub fn human_targets(
    records: &[AnnotationRecord],
    alpha: &Alpha,
) -> uslh_core::Result<BTreeMap<String, (f64, f64)>> {
    let overall = mean_by_item(records, |r| f64::from(r.overall));
    let u = mean_by_item(records, |r| f64::from(r.u));
    let s = mean_by_item(records, |r| f64::from(r.s));
    let l = mean_by_item(records, |r| f64::from(r.l));
    overall
        .into_iter()
        .map(|(item, o)| {
            let h = usl_h(u[&item], s[&item], l[&item], alpha)?;
            Ok((item, (o, h)))
        })
        .collect()
}

/// Pearson and Spearman of each metric against both human targets.
///
/// Constant columns leave the correlation empty rather than failing the report.
pub fn evaluate_metrics(
    scores: &ScoreTable,
    records: &[AnnotationRecord],
    metrics: &[String],
    alpha: &Alpha,
) -> CliResult<Vec<ReportRow>> {
    let human = human_targets(records, alpha)?;
    let joined: Vec<_> = scores
        .iter()
        .filter_map(|(item, cols)| human.get(item).map(|h| (cols, *h)))
        .collect();
    if joined.len() < 2 {
        return Err(CliError::Usage(format!(
            "only {} scored item(s) have annotations; need at least 2",
            joined.len()
        )));
    }
    let mut rows = Vec::new();
    for metric in metrics {
        let mut x = Vec::new();
        let mut vanilla = Vec::new();
        let mut hier = Vec::new();
        for (cols, (o, h)) in &joined {
            if let Some(v) = cols.get(metric) {
                x.push(*v);
                vanilla.push(*o);
                hier.push(*h);
            }
        }
        if x.is_empty() {
            return Err(CliError::Usage(format!(
                "metric `{metric}` not found in scores"
            )));
        }
        for (target, y) in [(HumanTarget::Vanilla, &vanilla), (HumanTarget::UslH, &hier)] {
            rows.push(ReportRow {
                metric: metric.clone(),
                target,
                pearson: pearson_test(&x, y).ok(),
                spearman: spearman_test(&x, y).ok(),
            });
        }
    }
    Ok(rows)
}

pub fn render_report(rows: &[ReportRow]) -> String {
    let cell = |c: &Option<Correlation>| match c {
        Some(c) => (format!("{:.6}", c.r), format!("{:.6}", c.p_value), c.n),
        None => ("nan".into(), "nan".into(), 0),
    };
    let mut out = String::from("metric\ttarget\tn\tpearson\tpearson_p\tspearman\tspearman_p\n");
    for row in rows {
        let (pr, pp, n) = cell(&row.pearson);
        let (sr, sp, _) = cell(&row.spearman);
        out.push_str(&format!(
            "{}\t{}\t{n}\t{pr}\t{pp}\t{sr}\t{sp}\n",
            row.metric, row.target
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranking_examples() {
        assert_eq!(rank_by_score(&[0.2, 0.9, 0.5]), vec![1, 2, 0]);
        assert_eq!(rank_by_score(&[0.4, 0.4, 0.4])[0], 0);
        assert_eq!(rank_by_score(&[0.1, 0.7, 0.7, 0.3]), vec![1, 2, 3, 0]);
    }

    #[test]
    fn pairs_parsing() {
        let p = parse_pairs("a\thi there\thello\nb\thow are you ?\tfine .\tgood .\n").unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p[0].reference, None);
        assert_eq!(p[1].reference.as_deref(), Some("good ."));
        assert!(parse_pairs("a\thi\n").is_err());
        assert!(parse_pairs("a\thi\t \n").is_err());
        assert!(parse_pairs("a\thi\tyo\na\thi\tyo\n").is_err());
    }

    #[test]
    fn scores_parsing() {
        let t = parse_scores("x\tusl_h\t0.500000\nx\tvup\t1.000000\ny\tusl_h\t0.25\n").unwrap();
        assert_eq!(t["x"]["vup"], 1.0);
        assert_eq!(t["y"]["usl_h"], 0.25);
        assert!(parse_scores("x\tusl_h\t0.5\nx\tusl_h\t0.5\n").is_err());
        assert!(parse_scores("x\tusl_h\n").is_err());
    }

    fn records() -> Vec<AnnotationRecord> {
        let mut out = Vec::new();
        for (i, (u, s, l, o)) in [(0, 0, 0, 0), (1, 0, 0, 1), (1, 1, 0, 2), (1, 1, 1, 3)]
            .into_iter()
            .enumerate()
        {
            for a in ["a1", "a2"] {
                out.push(AnnotationRecord::new(&format!("i{i}"), a, u, s, l, o).unwrap());
            }
        }
        out
    }

    fn table(values: &[f64]) -> ScoreTable {
        values
            .iter()
            .enumerate()
            .map(|(i, v)| (format!("i{i}"), BTreeMap::from([("m".to_string(), *v)])))
            .collect()
    }

    #[test]
    fn evaluate_perfect_and_inverse() {
        let alpha = Alpha::equal();
        let rows = evaluate_metrics(
            &table(&[0.0, 1.0, 2.0, 3.0]),
            &records(),
            &["m".into()],
            &alpha,
        )
        .unwrap();
        assert_eq!(rows.len(), 2);
        assert!((rows[0].pearson.unwrap().r - 1.0).abs() < 1e-12);
        let rows = evaluate_metrics(
            &table(&[0.0, -1.0, -2.0, -3.0]),
            &records(),
            &["m".into()],
            &alpha,
        )
        .unwrap();
        assert!((rows[0].pearson.unwrap().r + 1.0).abs() < 1e-12);
        // human usl_h for the four patterns is 0, 1/3, 2/3, 1
        let rows = evaluate_metrics(
            &table(&[0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]),
            &records(),
            &["m".into()],
            &alpha,
        )
        .unwrap();
        assert!((rows[1].pearson.unwrap().r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evaluate_needs_a_join() {
        let alpha = Alpha::equal();
        let mut t = table(&[1.0]);
        t.insert("zz".into(), BTreeMap::from([("m".to_string(), 0.0)]));
        assert!(evaluate_metrics(&t, &records(), &["m".into()], &alpha).is_err());
        assert!(
            evaluate_metrics(&table(&[0.0, 1.0]), &records(), &["other".into()], &alpha).is_err()
        );
    }

    #[test]
    fn constant_column_reports_nan() {
        let rows = evaluate_metrics(
            &table(&[0.5; 4]),
            &records(),
            &["m".into()],
            &Alpha::equal(),
        )
        .unwrap();
        assert!(rows[0].pearson.is_none());
        assert!(render_report(&rows).contains("nan"));
    }
}
