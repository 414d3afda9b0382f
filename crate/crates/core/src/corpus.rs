//! Multi-topic corpus loading and per-system evaluation.
//!
//! Directory layout:
//!
//! ```text
//! <root>/topics/<topic_id>/systems/<system_id>.txt
//! <root>/topics/<topic_id>/references/<ref_id>.txt
//! ```
//!
//! or a JSON manifest mapping each topic to `{"systems": {id: path},
//! "references": {id: path}}`, with paths relative to the manifest.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lemma::{lemmatize_document, Lemmatizer};
use crate::rouge::{self, score_tables, CountTable, EvalConfig, RougeScore};
use crate::text::{Document, TextPipeline};

#[derive(Debug, Clone, PartialEq)]
pub struct Topic {
    pub id: String,
    pub references: Vec<Document>,
    /// Keyed by system id.
    pub candidates: BTreeMap<String, Document>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusLayout {
    pub root: PathBuf,
    pub topics: Vec<Topic>,
    /// Every system that has a summary for at least one topic.
    pub systems: Vec<String>,
    /// One line per (system, topic) pair with no candidate.
    pub warnings: Vec<String>,
}

impl CorpusLayout {
    /// Assembles a layout from in-memory topics, sorting topics and
    /// collecting systems and coverage warnings.
    pub fn from_topics(root: impl Into<PathBuf>, mut topics: Vec<Topic>) -> Result<Self> {
        let root = root.into();
        if topics.is_empty() {
            return Err(Error::EmptyCorpus { path: root });
        }
        if let Some(t) = topics.iter().find(|t| t.references.is_empty()) {
            return Err(Error::TopicWithoutReferences {
                path: root.join(&t.id),
            });
        }
        topics.sort_by(|a, b| a.id.cmp(&b.id));
        let systems: Vec<String> = topics
            .iter()
            .flat_map(|t| t.candidates.keys().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut warnings = Vec::new();
        for system in &systems {
            for topic in topics.iter().filter(|t| !t.candidates.contains_key(system)) {
                warnings.push(format!(
                    "system {system} has no summary for topic {}; excluded from its average",
                    topic.id
                ));
            }
        }
        Ok(CorpusLayout {
            root,
            topics,
            systems,
            warnings,
        })
    }

    pub fn topic(&self, id: &str) -> Option<&Topic> {
        self.topics.iter().find(|t| t.id == id)
    }

    /// The same corpus without one topic.
    pub fn without_topic(&self, id: &str) -> Result<Self> {
        let topics = self.topics.iter().filter(|t| t.id != id).cloned().collect();
        CorpusLayout::from_topics(self.root.clone(), topics)
    }
}

fn read_document(pipeline: &TextPipeline, id: String, path: &Path) -> Result<Document> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
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

/// `.txt` files in `dir`, as (file stem, path), sorted by stem.
fn text_files(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if !path.is_file() || path.extension().and_then(|e| e.to_str()) != Some("txt") {
            continue;
        }
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            files.push((stem.to_owned(), path.clone()));
        }
    }
    files.sort();
    Ok(files)
}

fn subdirectories(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut dirs = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            if let Some(name) = path.file_name().and_then(|s| s.to_str()) {
                dirs.push((name.to_owned(), path.clone()));
            }
        }
    }
    dirs.sort();
    Ok(dirs)
}

pub fn load_corpus(root: impl AsRef<Path>) -> Result<CorpusLayout> {
    load_corpus_with(root, &TextPipeline::default())
}

pub fn load_corpus_with(root: impl AsRef<Path>, pipeline: &TextPipeline) -> Result<CorpusLayout> {
    let root = root.as_ref();
    let topics_dir = root.join("topics");
    if !topics_dir.is_dir() {
        return Err(Error::EmptyCorpus {
            path: root.to_owned(),
        });
    }
    let mut topics = Vec::new();
    for (topic_id, topic_dir) in subdirectories(&topics_dir)? {
        let refs_dir = topic_dir.join("references");
        let ref_files = if refs_dir.is_dir() {
            text_files(&refs_dir)?
        } else {
            Vec::new()
        };
        if ref_files.is_empty() {
            return Err(Error::TopicWithoutReferences { path: topic_dir });
        }
        let references = ref_files
            .into_iter()
            .map(|(id, path)| read_document(pipeline, format!("{topic_id}/{id}"), &path))
            .collect::<Result<Vec<_>>>()?;

        let systems_dir = topic_dir.join("systems");
        let mut candidates = BTreeMap::new();
        if systems_dir.is_dir() {
            for (system_id, path) in text_files(&systems_dir)? {
                let doc = read_document(pipeline, format!("{topic_id}/{system_id}"), &path)?;
                candidates.insert(system_id, doc);
            }
        }
        topics.push(Topic {
            id: topic_id,
            references,
            candidates,
        });
    }
    if topics.is_empty() {
        return Err(Error::EmptyCorpus {
            path: root.to_owned(),
        });
    }
    CorpusLayout::from_topics(root, topics)
}

#[derive(Debug, Deserialize)]
struct ManifestTopic {
    #[serde(default)]
    systems: BTreeMap<String, PathBuf>,
    #[serde(default)]
    references: BTreeMap<String, PathBuf>,
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<CorpusLayout> {
    load_manifest_with(path, &TextPipeline::default())
}

pub fn load_manifest_with(path: impl AsRef<Path>, pipeline: &TextPipeline) -> Result<CorpusLayout> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let manifest: BTreeMap<String, ManifestTopic> =
        serde_json::from_slice(&bytes).map_err(|source| Error::Manifest {
            path: path.to_owned(),
            source,
        })?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut topics = Vec::new();
    for (topic_id, entry) in manifest {
        if entry.references.is_empty() {
            return Err(Error::TopicWithoutReferences {
                path: path.join(&topic_id),
            });
        }
        let references = entry
            .references
            .iter()
            .map(|(id, p)| read_document(pipeline, format!("{topic_id}/{id}"), &base.join(p)))
            .collect::<Result<Vec<_>>>()?;
        let candidates = entry
            .systems
            .iter()
            .map(|(id, p)| {
                read_document(pipeline, format!("{topic_id}/{id}"), &base.join(p))
                    .map(|d| (id.clone(), d))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        topics.push(Topic {
            id: topic_id,
            references,
            candidates,
        });
    }
    CorpusLayout::from_topics(path, topics)
}

fn prepare<L: Lemmatizer + ?Sized>(
    doc: &Document,
    config: &EvalConfig,
    lemmatizer: &L,
) -> Result<CountTable> {
    if config.lemma_enabled {
        rouge::gram_table(&lemmatize_document(doc, lemmatizer), config)
    } else {
        rouge::gram_table(doc, config)
    }
}

/// Scores one candidate, lemmatizing candidate and references first when
/// the config asks for lemma matching.
pub fn evaluate_topic<L: Lemmatizer + ?Sized>(
    candidate: &Document,
    references: &[Document],
    config: &EvalConfig,
    lemmatizer: &L,
) -> Result<RougeScore> {
    config.validate()?;
    if references.is_empty() {
        return Err(Error::NoReferences);
    }
    let cand = prepare(candidate, config, lemmatizer)?;
    let refs = references
        .iter()
        .map(|r| prepare(r, config, lemmatizer))
        .collect::<Result<Vec<_>>>()?;
    score_tables(&cand, &refs, config.beta)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Mean of per-topic precision, recall and F.
    #[default]
    Macro,
    /// Pool match and gram counts over topics, then score once.
    Micro,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicScore {
    pub topic: String,
    pub score: RougeScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemReport {
    pub system: String,
    pub metric: String,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub topics: Vec<TopicScore>,
    pub config: EvalConfig,
    pub aggregation: Aggregation,
}

fn aggregate(topics: &[TopicScore], beta: f64, aggregation: Aggregation) -> (f64, f64, f64) {
    let n = topics.len() as f64;
    match aggregation {
        Aggregation::Macro => {
            let sum =
                |f: fn(&RougeScore) -> f64| topics.iter().map(|t| f(&t.score)).sum::<f64>() / n;
            (
                sum(|s| s.precision),
                sum(|s| s.recall),
                sum(|s| s.f_measure),
            )
        }
        Aggregation::Micro => {
            let matches: usize = topics.iter().map(|t| t.score.match_count).sum();
            let ref_total: usize = topics.iter().map(|t| t.score.reference_total).sum();
            let cand_total: usize = topics
                .iter()
                .map(|t| t.score.reference_count * t.score.candidate_total)
                .sum();
            let recall = matches as f64 / ref_total as f64;
            let precision = if cand_total == 0 {
                0.0
            } else {
                matches as f64 / cand_total as f64
            };
            (precision, recall, rouge::f_measure(precision, recall, beta))
        }
    }
}

/// Highest F first; ties by system id.
fn rank(reports: &mut [SystemReport]) {
    reports.sort_by(|a, b| {
        b.f_measure
            .total_cmp(&a.f_measure)
            .then_with(|| a.system.cmp(&b.system))
    });
}

pub fn evaluate_corpus<L: Lemmatizer + ?Sized>(
    layout: &CorpusLayout,
    config: &EvalConfig,
    lemmatizer: &L,
) -> Result<Vec<SystemReport>> {
    evaluate_corpus_with(layout, config, lemmatizer, Aggregation::Macro)
}

/// One report per system, ranked. Topics are scored in parallel; the
/// reduction runs in topic order so the result does not depend on
/// scheduling.
pub fn evaluate_corpus_with<L: Lemmatizer + ?Sized>(
    layout: &CorpusLayout,
    config: &EvalConfig,
    lemmatizer: &L,
    aggregation: Aggregation,
) -> Result<Vec<SystemReport>> {
    config.validate()?;
    let per_topic: Vec<Vec<(String, RougeScore)>> = layout
        .topics
        .par_iter()
        .map(|topic| {
            let refs = topic
                .references
                .iter()
                .map(|r| prepare(r, config, lemmatizer))
                .collect::<Result<Vec<_>>>()?;
            topic
                .candidates
                .iter()
                .map(|(system, doc)| {
                    let cand = prepare(doc, config, lemmatizer)?;
                    Ok((system.clone(), score_tables(&cand, &refs, config.beta)?))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut by_system: BTreeMap<String, Vec<TopicScore>> = BTreeMap::new();
    for (topic, scores) in layout.topics.iter().zip(per_topic) {
        for (system, score) in scores {
            by_system.entry(system).or_default().push(TopicScore {
                topic: topic.id.clone(),
                score,
            });
        }
    }

    let mut reports: Vec<SystemReport> = by_system
        .into_iter()
        .map(|(system, topics)| {
            let (precision, recall, f_measure) = aggregate(&topics, config.beta, aggregation);
            SystemReport {
                system,
                metric: config.metric.label(),
                precision,
                recall,
                f_measure,
                topics,
                config: *config,
                aggregation,
            }
        })
        .collect();
    rank(&mut reports);
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigDelta {
    pub system: String,
    pub base_f: f64,
    pub variant_f: f64,
    pub delta: f64,
}

pub fn compare_configs<L: Lemmatizer + ?Sized>(
    layout: &CorpusLayout,
    base: &EvalConfig,
    variant: &EvalConfig,
    lemmatizer: &L,
) -> Result<Vec<ConfigDelta>> {
    compare_configs_with(layout, base, variant, lemmatizer, Aggregation::Macro)
}

/// Per-system F under `base` and `variant`, ranked by the variant's F.
/// The two configs may differ only in lemma matching and granularity.
pub fn compare_configs_with<L: Lemmatizer + ?Sized>(
    layout: &CorpusLayout,
    base: &EvalConfig,
    variant: &EvalConfig,
    lemmatizer: &L,
    aggregation: Aggregation,
) -> Result<Vec<ConfigDelta>> {
    if base.metric != variant.metric || base.beta != variant.beta {
        return Err(Error::InvalidConfig(
            "compared configs may differ only in lemma matching and granularity".into(),
        ));
    }
    let base_reports = evaluate_corpus_with(layout, base, lemmatizer, aggregation)?;
    let variant_reports = evaluate_corpus_with(layout, variant, lemmatizer, aggregation)?;
    let base_f: BTreeMap<&str, f64> = base_reports
        .iter()
        .map(|r| (r.system.as_str(), r.f_measure))
        .collect();
    Ok(variant_reports
        .iter()
        .map(|r| {
            let base_f = base_f[r.system.as_str()];
            ConfigDelta {
                system: r.system.clone(),
                base_f,
                variant_f: r.f_measure,
                delta: r.f_measure - base_f,
            }
        })
        .collect())
}
