//! Command-line front end. Exit status: 0 success, 1 usage error, 2 data
//! error. Reports go to stdout (or `--output`); diagnostics to stderr.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::corpus::{
    compare_configs_with, evaluate_corpus_with, evaluate_topic, load_corpus_with,
    load_manifest_with, Aggregation, CorpusLayout, SystemReport, TopicScore,
};
use crate::error::{Error, Result};
use crate::lemma::{
    lemmatize_document, load_lexicon_with, LemmaLexicon, LexiconLemmatizer, RuleSet,
};
use crate::lemma::{DEFAULT_PREFIXES, DEFAULT_SUFFIXES};
use crate::report::{render, MetricSection, OutputFormat};
use crate::rouge::{EvalConfig, Granularity};
use crate::text::{Document, NormalizeOptions, TextPipeline};

pub const LEXICON_ENV: &str = "LEMMA_ROUGE_LEXICON";

#[derive(Debug, Parser)]
#[command(
    name = "lemma-rouge",
    version,
    about = "Lemma-aware ROUGE-N / ROUGE-S summary evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score one candidate summary against one or more references.
    Score(ScoreArgs),
    /// Evaluate and rank every system in a corpus.
    Eval(EvalArgs),
    /// Print the lemma sequence of a file, one sentence per line.
    Lemmatize(LemmatizeArgs),
}

#[derive(Debug, Args)]
struct TextArgs {
    /// Fold ta marbuta (ة) to ha (ه).
    #[arg(long)]
    fold_ta_marbuta: bool,
    /// Fold alef maqsura (ى) to ya (ي).
    #[arg(long)]
    fold_alef_maqsura: bool,
    /// Lowercase cased letters.
    #[arg(long)]
    case_fold: bool,
}

impl TextArgs {
    fn pipeline(&self) -> TextPipeline {
        TextPipeline::new(NormalizeOptions {
            fold_ta_marbuta: self.fold_ta_marbuta,
            fold_alef_maqsura: self.fold_alef_maqsura,
            case_fold: self.case_fold,
        })
    }
}

#[derive(Debug, Args)]
struct LemmaArgs {
    /// surface<TAB>lemma lexicon consulted before the affix rules.
    #[arg(long, env = LEXICON_ENV)]
    lexicon: Option<PathBuf>,
    /// Shortest stem the affix rules may leave.
    #[arg(long, default_value_t = 2)]
    min_stem_len: usize,
    /// Strip affixes repeatedly instead of at most one prefix and one suffix.
    #[arg(long)]
    iterative_stripping: bool,
}

impl LemmaArgs {
    fn lemmatizer(
        &self,
        options: &NormalizeOptions,
        err: &mut dyn Write,
    ) -> Result<LexiconLemmatizer> {
        let rules = RuleSet::new(DEFAULT_PREFIXES, DEFAULT_SUFFIXES, self.min_stem_len)?
            .iterative(self.iterative_stripping);
        let lexicon = match &self.lexicon {
            Some(path) => {
                let lexicon = load_lexicon_with(path, options)?;
                if lexicon.duplicate_count() > 0 {
                    let _ = writeln!(
                        err,
                        "warning: {}: {} duplicate surface forms, last entry kept",
                        path.display(),
                        lexicon.duplicate_count()
                    );
                }
                lexicon
            }
            None => LemmaLexicon::new(),
        };
        Ok(LexiconLemmatizer::new(lexicon, rules))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GranularityArg {
    Token,
    Character,
}

impl From<GranularityArg> for Granularity {
    fn from(g: GranularityArg) -> Self {
        match g {
            GranularityArg::Token => Granularity::Token,
            GranularityArg::Character => Granularity::Character,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AggregationArg {
    Macro,
    Micro,
}

/// `rouge<N>`, `rougeS` or `rougeS<D>` (case-insensitive).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MetricArg {
    RougeN(usize),
    RougeS(Option<usize>),
}

fn parse_metric(s: &str) -> std::result::Result<MetricArg, String> {
    let lower = s.to_ascii_lowercase();
    let rest = lower
        .strip_prefix("rouge")
        .ok_or_else(|| format!("unknown metric {s:?}; expected rouge<N>, rougeS or rougeS<D>"))?;
    if let Some(skip) = rest.strip_prefix('s') {
        if skip.is_empty() {
            return Ok(MetricArg::RougeS(None));
        }
        return skip
            .parse()
            .map(|d| MetricArg::RougeS(Some(d)))
            .map_err(|_| format!("invalid skip distance in {s:?}"));
    }
    match rest.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(MetricArg::RougeN(n)),
        _ => Err(format!(
            "unknown metric {s:?}; expected rouge<N>, rougeS or rougeS<D>"
        )),
    }
}

#[derive(Debug, Args)]
struct MetricArgs {
    /// Metric to compute; repeatable (rouge1, rouge2, rougeS, rougeS4, ...).
    #[arg(long = "metric", required = true, value_parser = parse_metric)]
    metrics: Vec<MetricArg>,
    /// Match on lemmas instead of normalized surface forms.
    #[arg(long)]
    lemma: bool,
    #[arg(long, value_enum, default_value = "token")]
    granularity: GranularityArg,
    /// Gap limit for rougeS; absent means arbitrary gaps.
    #[arg(long)]
    max_skip: Option<usize>,
    /// F-measure weight.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, value_enum, default_value = "table")]
    format: OutputFormat,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

impl MetricArgs {
    fn configs(&self, lemma: bool, granularity: Granularity) -> Result<Vec<EvalConfig>> {
        self.metrics
            .iter()
            .map(|m| {
                let base = match *m {
                    MetricArg::RougeN(n) => EvalConfig::rouge_n(n),
                    MetricArg::RougeS(skip) => EvalConfig::rouge_s(skip.or(self.max_skip)),
                };
                let config = base
                    .with_lemma(lemma)
                    .with_granularity(granularity)
                    .with_beta(self.beta);
                config.validate()?;
                Ok(config)
            })
            .collect()
    }
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    candidate: PathBuf,
    /// Reference summary; repeatable.
    #[arg(long = "reference", required = true)]
    references: Vec<PathBuf>,
    #[command(flatten)]
    metrics: MetricArgs,
    #[command(flatten)]
    lemma: LemmaArgs,
    #[command(flatten)]
    text: TextArgs,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["corpus", "manifest"])))]
struct EvalArgs {
    /// Corpus root containing topics/<topic>/{systems,references}/*.txt.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// JSON manifest mapping topics to system and reference files.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Also score without lemmas and report lemma vs native F per system.
    #[arg(long)]
    compare_native: bool,
    /// Granularity of the native side of --compare-native (defaults to --granularity).
    #[arg(long, value_enum)]
    native_granularity: Option<GranularityArg>,
    #[arg(long, value_enum, default_value = "macro")]
    aggregation: AggregationArg,
    #[command(flatten)]
    metrics: MetricArgs,
    #[command(flatten)]
    lemma: LemmaArgs,
    #[command(flatten)]
    text: TextArgs,
}

#[derive(Debug, Args)]
struct LemmatizeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "table")]
    format: OutputFormat,
    #[command(flatten)]
    lemma: LemmaArgs,
    #[command(flatten)]
    text: TextArgs,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                1
            } else {
                let _ = write!(out, "{}", e.render());
                0
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Score(args) => run_score(args, err),
        Command::Eval(args) => run_eval(args, err),
        Command::Lemmatize(args) => run_lemmatize(args, err),
    };
    let (text, output) = match result {
        Ok(ok) => ok,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return if e.is_usage() { 1 } else { 2 };
        }
    };
    match output {
        Some(path) => {
            if let Err(e) = fs::write(&path, text) {
                let _ = writeln!(err, "error: {}", Error::io(&path, e));
                return 2;
            }
        }
        None => {
            if let Err(e) = out.write_all(text.as_bytes()) {
                let _ = writeln!(err, "error: writing report: {e}");
                return 2;
            }
        }
    }
    0
}

fn read_document(pipeline: &TextPipeline, path: &Path) -> Result<Document> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("candidate")
        .to_owned();
    pipeline
        .build_document_from_bytes(id, &bytes)
        .map_err(|e| match e {
            Error::InvalidUtf8 { offset } => Error::FileEncoding {
                path: path.to_owned(),
                offset,
            },
            other => other,
        })
}

type Rendered = (String, Option<PathBuf>);

fn run_score(args: &ScoreArgs, err: &mut dyn Write) -> Result<Rendered> {
    let configs = args
        .metrics
        .configs(args.metrics.lemma, args.metrics.granularity.into())?;
    let pipeline = args.text.pipeline();
    let lemmatizer = args.lemma.lemmatizer(&pipeline.options, err)?;
    let candidate = read_document(&pipeline, &args.candidate)?;
    let references = args
        .references
        .iter()
        .map(|p| read_document(&pipeline, p))
        .collect::<Result<Vec<_>>>()?;

    let mut sections = Vec::new();
    for config in configs {
        let score = evaluate_topic(&candidate, &references, &config, &lemmatizer)?;
        let report = SystemReport {
            system: candidate.id.clone(),
            metric: config.metric.label(),
            precision: score.precision,
            recall: score.recall,
            f_measure: score.f_measure,
            topics: vec![TopicScore {
                topic: candidate.id.clone(),
                score,
            }],
            config,
            aggregation: Aggregation::Macro,
        };
        sections.push(MetricSection {
            metric: config.metric,
            reports: vec![report],
            comparison: None,
        });
    }
    Ok((
        render(&sections, args.metrics.format),
        args.metrics.output.clone(),
    ))
}

fn load_layout(args: &EvalArgs, pipeline: &TextPipeline) -> Result<CorpusLayout> {
    match (&args.corpus, &args.manifest) {
        (Some(root), _) => load_corpus_with(root, pipeline),
        (None, Some(manifest)) => load_manifest_with(manifest, pipeline),
        (None, None) => Err(Error::InvalidConfig(
            "one of --corpus or --manifest is required".into(),
        )),
    }
}

fn run_eval(args: &EvalArgs, err: &mut dyn Write) -> Result<Rendered> {
    let granularity: Granularity = args.metrics.granularity.into();
    let lemma_on = args.metrics.lemma || args.compare_native;
    let configs = args.metrics.configs(lemma_on, granularity)?;
    let native_configs = if args.compare_native {
        let native_granularity = args
            .native_granularity
            .map(Into::into)
            .unwrap_or(granularity);
        Some(args.metrics.configs(false, native_granularity)?)
    } else {
        None
    };
    let aggregation = match args.aggregation {
        AggregationArg::Macro => Aggregation::Macro,
        AggregationArg::Micro => Aggregation::Micro,
    };

    let pipeline = args.text.pipeline();
    let lemmatizer = args.lemma.lemmatizer(&pipeline.options, err)?;
    let layout = load_layout(args, &pipeline)?;
    for warning in &layout.warnings {
        let _ = writeln!(err, "warning: {warning}");
    }

    let mut sections = Vec::new();
    for (i, config) in configs.iter().enumerate() {
        let reports = evaluate_corpus_with(&layout, config, &lemmatizer, aggregation)?;
        let comparison = match &native_configs {
            Some(native) => Some(compare_configs_with(
                &layout,
                &native[i],
                config,
                &lemmatizer,
                aggregation,
            )?),
            None => None,
        };
        sections.push(MetricSection {
            metric: config.metric,
            reports,
            comparison,
        });
    }
    Ok((
        render(&sections, args.metrics.format),
        args.metrics.output.clone(),
    ))
}

#[derive(Serialize)]
struct LemmaEntry<'a> {
    surface: &'a str,
    lemma: &'a str,
}

fn run_lemmatize(args: &LemmatizeArgs, err: &mut dyn Write) -> Result<Rendered> {
    let pipeline = args.text.pipeline();
    let lemmatizer = args.lemma.lemmatizer(&pipeline.options, err)?;
    let doc = lemmatize_document(&read_document(&pipeline, &args.input)?, &lemmatizer);
    let sentences: Vec<Vec<LemmaEntry<'_>>> = doc
        .sentences
        .iter()
        .map(|s| {
            s.tokens
                .iter()
                .map(|t| LemmaEntry {
                    surface: t.surface(),
                    lemma: t.lemma().unwrap_or_default(),
                })
                .collect()
        })
        .collect();
    let text = match args.format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&sentences).expect("lemmas serialize");
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer
                .write_record(["sentence", "surface", "lemma"])
                .expect("in-memory csv write");
            for (i, sentence) in sentences.iter().enumerate() {
                for entry in sentence {
                    writer
                        .write_record([(i + 1).to_string().as_str(), entry.surface, entry.lemma])
                        .expect("in-memory csv write");
                }
            }
            String::from_utf8(writer.into_inner().expect("in-memory csv flush"))
                .expect("csv is utf-8")
        }
        OutputFormat::Table => sentences
            .iter()
            .map(|s| {
                let mut line = s.iter().map(|e| e.lemma).collect::<Vec<_>>().join(" ");
                line.push('\n');
                line
            })
            .collect(),
    };
    Ok((text, None))
}
