use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use uslh_cli::*;
use uslh_core::classify::{evaluate_classifier, ScorerKind, ScorerModel, TrainConfig};
use uslh_core::compose::{Alpha, CompositionWeights};
use uslh_core::corpus::{parse_dailydialog, split_corpus, Dialogue};
use uslh_core::langmodel::{PseudoLm, DEFAULT_DELTA, DEFAULT_ORDER};
use uslh_core::perturb::{
    build_empathy_dataset, build_nup_dataset, build_vup_dataset, read_dataset, write_dataset,
};
use uslh_core::stats::{
    fit_aspect_weights, fit_weights_per_annotator, human_reference, mean_pairwise_kappa,
    parse_annotations, write_annotations, Question,
};
use uslh_core::synth;

#[derive(Parser)]
#[command(
    name = "uslh",
    version,
    about = "Hierarchical dialogue response evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a labeled training set from a dialogue corpus.
    BuildData(BuildData),
    /// Train a sub-metric model.
    Train(Train),
    /// Score context/response pairs.
    Score(Score),
    /// Rank response pools by a composed score.
    Rank(Rank),
    /// Fit aspect weights from annotations.
    Calibrate(Calibrate),
    /// Correlate metric columns with human judgments.
    Evaluate(Evaluate),
    /// Inter-annotator agreement per question.
    Agreement(Agreement),
    /// Write a synthetic DailyDialog-format sample.
    SampleData(SampleData),
}

#[derive(Clone, Copy, ValueEnum)]
enum DataKind {
    Vup,
    Nup,
    Empathy,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Vup,
    Nup,
    Empathy,
    Lm,
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum Part {
    /// The half reserved for training metrics.
    #[default]
    Metric,
    /// The half reserved for response generators.
    Generation,
    All,
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    emotions: Option<PathBuf>,
    /// Which half of the seeded split to use.
    #[arg(long, value_enum, default_value_t)]
    part: Part,
}

impl CorpusArgs {
    fn load(&self, seed: u64) -> CliResult<Vec<Dialogue>> {
        let emotions = self.emotions.as_deref().map(read_file).transpose()?;
        let dialogues = parse_file(&self.corpus, |t| parse_dailydialog(t, emotions.as_deref()))?;
        Ok(match self.part {
            Part::All => dialogues,
            Part::Metric => split_corpus(&dialogues, seed).1,
            Part::Generation => split_corpus(&dialogues, seed).0,
        })
    }
}

#[derive(Args)]
struct BuildData {
    #[arg(value_enum)]
    kind: DataKind,
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Train {
    #[arg(value_enum)]
    kind: ModelKind,
    /// Labeled dataset from `build-data` (classifiers).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Dialogue corpus (language model).
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    part: Part,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "models")]
    model_dir: PathBuf,
    /// Defaults to `<model-dir>/<kind>.model`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    embed_dim: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    val_fraction: Option<f64>,
    #[arg(long)]
    min_count: Option<usize>,
    #[arg(long)]
    no_position_offsets: bool,
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    order: usize,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "models")]
    model_dir: PathBuf,
    #[arg(long)]
    vup_model: Option<PathBuf>,
    #[arg(long)]
    nup_model: Option<PathBuf>,
    #[arg(long)]
    lm_model: Option<PathBuf>,
    #[arg(long)]
    empathy_model: Option<PathBuf>,
    /// Word vectors for the embedding baselines.
    #[arg(long)]
    vectors: Option<PathBuf>,
    #[arg(long)]
    weights: Option<PathBuf>,
    /// `mlm_likelihood` (default), another MLM score, or `empathy`.
    #[arg(long)]
    likability: Option<String>,
    #[arg(long, default_value = "batch")]
    normalizer: String,
    /// Comma-separated output columns.
    #[arg(long, value_delimiter = ',')]
    metrics: Vec<String>,
}

impl ModelArgs {
    fn config(&self) -> CliResult<PipelineConfig> {
        Ok(PipelineConfig {
            seed: self.seed,
            model_dir: self.model_dir.clone(),
            vup_model: self.vup_model.clone(),
            nup_model: self.nup_model.clone(),
            lm_model: self.lm_model.clone(),
            empathy_model: self.empathy_model.clone(),
            vectors: self.vectors.clone(),
            weights: self.weights.clone(),
            likability: self.likability.clone(),
            normalizer: self.normalizer.parse()?,
            metrics: self.metrics.clone(),
        })
    }
}

#[derive(Args)]
struct Score {
    /// `item_id<TAB>context<TAB>response[<TAB>reference]` lines.
    #[arg(long)]
    pairs: PathBuf,
    #[command(flatten)]
    models: ModelArgs,
    /// Scores file; the applied weights go to `<out>.weights`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Rank {
    /// `pool_id<TAB>context<TAB>response` lines.
    #[arg(long)]
    pool: PathBuf,
    #[arg(long, default_value = "usl_h")]
    metric: String,
    #[command(flatten)]
    models: ModelArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Calibrate {
    #[arg(long)]
    annotations: PathBuf,
    /// Existing weights whose beta and bounds are kept.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long)]
    per_annotator: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Evaluate {
    #[arg(long)]
    scores: PathBuf,
    #[arg(long)]
    annotations: PathBuf,
    /// Alpha for the human composite; equal weights when absent.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    metrics: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Agreement {
    #[arg(long)]
    annotations: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleData {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 200)]
    dialogues: usize,
    /// Contexts in the evaluation set; each gets five candidates.
    #[arg(long, default_value_t = 50)]
    contexts: usize,
    #[arg(long, default_value_t = 4)]
    annotators: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn build_data(args: &BuildData) -> CliResult<()> {
    let dialogues = args.corpus.load(args.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let examples = match args.kind {
        DataKind::Vup => {
            let utterances: Vec<Vec<String>> = dialogues
                .iter()
                .flat_map(|d| d.utterances.iter().map(|u| u.tokens.clone()))
                .collect();
            build_vup_dataset(&utterances, &mut rng)
        }
        DataKind::Nup => build_nup_dataset(&dialogues, &mut rng)?,
        DataKind::Empathy => {
            if args.corpus.emotions.is_none() {
                return Err(CliError::Usage("empathy data needs --emotions".into()));
            }
            build_empathy_dataset(&dialogues)?
        }
    };
    let positives = examples.iter().filter(|e| e.label == 1).count();
    eprintln!("{} examples ({positives} positive)", examples.len());
    write_file(&args.out, &write_dataset(&examples))
}

fn train(args: &Train) -> CliResult<()> {
    let (name, text) = match args.kind {
        ModelKind::Lm => {
            let corpus = args
                .corpus
                .as_ref()
                .ok_or_else(|| CliError::Usage("train lm needs --corpus".into()))?;
            let dialogues = CorpusArgs {
                corpus: corpus.clone(),
                emotions: None,
                part: args.part,
            }
            .load(args.seed)?;
            let utterances: Vec<Vec<String>> = dialogues
                .iter()
                .flat_map(|d| d.utterances.iter().map(|u| u.tokens.clone()))
                .collect();
            let lm = PseudoLm::train(&utterances, args.order, args.delta)?;
            eprintln!("lm: {} types, order {}", lm.vocab().len(), lm.order());
            ("lm", lm.to_text())
        }
        kind => {
            let kind = match kind {
                ModelKind::Vup => ScorerKind::Vup,
                ModelKind::Nup => ScorerKind::Nup,
                _ => ScorerKind::Empathy,
            };
            let data = args
                .data
                .as_ref()
                .ok_or_else(|| CliError::Usage(format!("train {kind} needs --data")))?;
            let examples = parse_file(data, read_dataset)?;
            let d = TrainConfig::default();
            let config = TrainConfig {
                seed: args.seed,
                embed_dim: args.embed_dim.unwrap_or(d.embed_dim),
                epochs: args.epochs.unwrap_or(d.epochs),
                learning_rate: args.lr.unwrap_or(d.learning_rate),
                batch_size: args.batch_size.unwrap_or(d.batch_size),
                val_fraction: args.val_fraction.unwrap_or(d.val_fraction),
                min_count: args.min_count.unwrap_or(d.min_count),
                position_offsets: !args.no_position_offsets,
            };
            let model = ScorerModel::train(kind, &examples, config)?;
            let m = model.meta();
            let fit = evaluate_classifier(&model, &examples, 0.5)?;
            eprintln!(
                "{kind}: best epoch {} (val loss {:.4}), accuracy on all data {:.3}",
                m.best_epoch,
                m.val_loss
                    .get(m.best_epoch.saturating_sub(1))
                    .copied()
                    .unwrap_or(f64::NAN),
                fit.accuracy
            );
            (kind.as_str(), model.to_text())
        }
    };
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| args.model_dir.join(format!("{name}.model")));
    write_file(&out, &text)
}

fn weights_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".weights");
    PathBuf::from(s)
}

fn score(args: &Score) -> CliResult<()> {
    let config = args.models.config()?;
    let pipeline = config.load()?;
    let pairs = parse_file(&args.pairs, parse_pairs)?;
    let (items, norm) = pipeline.score_batch(&pairs)?;
    write_file(&args.out, &pipeline.render_scores(&items))?;
    write_file(
        &weights_path(&args.out),
        &pipeline.applied_weights(&norm).to_text(),
    )?;
    eprintln!("scored {} item(s)", items.len());
    Ok(())
}

fn rank(args: &Rank) -> CliResult<()> {
    let pipeline = args.models.config()?.load()?;
    let text = read_file(&args.pool)?;
    // pools in order of first appearance
    let mut pools: Vec<(String, String, Vec<String>)> = Vec::new();
    for (i, line) in text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
    {
        let [id, context, response] = line.split('\t').collect::<Vec<_>>()[..] else {
            return Err(CliError::InFile {
                path: args.pool.clone(),
                source: uslh_core::Error::Parse {
                    line: i + 1,
                    message: "expected pool_id, context and response".into(),
                },
            });
        };
        match pools.iter_mut().find(|(p, _, _)| p == id) {
            Some((_, c, rs)) if c == context => rs.push(response.to_string()),
            Some(_) => {
                return Err(CliError::Usage(format!(
                    "pool `{id}` has more than one context"
                )));
            }
            None => pools.push((
                id.to_string(),
                context.to_string(),
                vec![response.to_string()],
            )),
        }
    }
    let mut out = String::new();
    for (id, context, responses) in &pools {
        let ranking = pipeline.rank_responses(context, responses, &args.metric)?;
        for (r, &i) in ranking.order.iter().enumerate() {
            out.push_str(&format!(
                "{id}\t{}\t{i}\t{:.6}\t{}\n",
                r + 1,
                ranking.scores[i],
                responses[i]
            ));
        }
        println!("{id}\t{}", responses[ranking.best()]);
    }
    write_file(&args.out, &out)
}

fn calibrate(args: &Calibrate) -> CliResult<()> {
    let records = parse_file(&args.annotations, parse_annotations)?;
    let w = fit_aspect_weights(&records)?;
    let mut weights = match &args.weights {
        Some(p) => parse_file(p, str::parse)?,
        None => CompositionWeights::default(),
    };
    weights.alpha = Alpha::new(w.wu, w.ws, w.wl)?;
    println!("all\t{:.4}\t{:.4}\t{:.4}", w.wu, w.ws, w.wl);
    if args.per_annotator {
        for (who, w) in fit_weights_per_annotator(&records)? {
            println!("{who}\t{:.4}\t{:.4}\t{:.4}", w.wu, w.ws, w.wl);
        }
    }
    write_file(&args.out, &weights.to_text())
}

fn evaluate(args: &Evaluate) -> CliResult<()> {
    let scores = parse_file(&args.scores, parse_scores)?;
    let records = parse_file(&args.annotations, parse_annotations)?;
    let alpha = match &args.weights {
        Some(p) => parse_file(p, str::parse::<CompositionWeights>)?.alpha,
        None => Alpha::equal(),
    };
    let metrics = if args.metrics.is_empty() {
        let present: BTreeMap<&str, ()> = scores
            .values()
            .flat_map(|c| c.keys().map(|k| (k.as_str(), ())))
            .collect();
        let mut m: Vec<String> = COLUMNS
            .iter()
            .filter(|c| present.contains_key(*c))
            .map(|c| c.to_string())
            .collect();
        m.extend(
            present
                .keys()
                .filter(|k| !COLUMNS.contains(k))
                .map(|k| k.to_string()),
        );
        m
    } else {
        args.metrics.clone()
    };
    let rows = evaluate_metrics(&scores, &records, &metrics, &alpha)?;
    emit(args.out.as_deref(), &render_report(&rows))
}

fn agreement(args: &Agreement) -> CliResult<()> {
    let records = parse_file(&args.annotations, parse_annotations)?;
    let mut out = String::from("question\tmean_pairwise_kappa\n");
    for q in Question::ALL {
        out.push_str(&format!("{q}\t{:.6}\n", mean_pairwise_kappa(&records, q)?));
    }
    let h = human_reference(&records, |r| f64::from(r.overall))?;
    out.push_str(&format!(
        "human_avg\t{:.6}\nhuman_max\t{:.6}\n",
        h.avg, h.max
    ));
    emit(args.out.as_deref(), &out)
}

fn sample_data(args: &SampleData) -> CliResult<()> {
    let dir = &args.out_dir;
    let (text, emotions) = synth::render(&synth::dialogues(args.dialogues, args.seed));
    write_file(&dir.join("dialogues.txt"), &text)?;
    write_file(&dir.join("emotions.txt"), &emotions)?;
    let (items, records) =
        synth::eval_set(args.contexts, args.annotators, args.seed.wrapping_add(1));
    write_file(&dir.join("pairs.tsv"), &synth::render_pairs(&items))?;
    write_file(&dir.join("annotations.tsv"), &write_annotations(&records))?;
    write_file(
        &dir.join("vectors.txt"),
        &synth::word_vectors(32, args.seed),
    )?;
    write_file(
        &dir.join("pools.tsv"),
        &synth::response_pools(5, 20, args.seed.wrapping_add(2)),
    )
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::BuildData(a) => build_data(a),
        Command::Train(a) => train(a),
        Command::Score(a) => score(a),
        Command::Rank(a) => rank(a),
        Command::Calibrate(a) => calibrate(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Agreement(a) => agreement(a),
        Command::SampleData(a) => sample_data(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
