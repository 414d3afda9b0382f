//! Gram extraction, clipped counting and the ROUGE-N / ROUGE-S scores.
//!
//! Multi-reference aggregation sums numerators and denominators over all
//! references:
//!
//! ```text
//! recall    = Σ_refs clipped(cand, ref) / Σ_refs |ref|
//! precision = Σ_refs clipped(cand, ref) / (|refs| · |cand|)
//! ```
//!
//! where `|x|` is the number of grams in a table. Grams never cross sentence
//! boundaries. In lemma mode each token contributes its lemma as the gram
//! part instead of its normalized surface; gram totals are therefore the
//! same in both modes and only the match counts can differ.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{Document, Sentence, Token};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GramKey(Vec<String>);

impl GramKey {
    pub fn new<I, S>(parts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let parts: Vec<String> = parts.into_iter().map(Into::into).collect();
        debug_assert!(!parts.is_empty() && parts.iter().all(|p| !p.is_empty()));
        GramKey(parts)
    }

    pub fn parts(&self) -> &[String] {
        &self.0
    }
}

impl fmt::Display for GramKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.join(","))
    }
}

/// Multiset of grams.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountTable {
    counts: BTreeMap<GramKey, usize>,
    total: usize,
}

impl CountTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: GramKey) {
        self.add_n(key, 1);
    }

    pub fn add_n(&mut self, key: GramKey, n: usize) {
        if n == 0 {
            return;
        }
        *self.counts.entry(key).or_insert(0) += n;
        self.total += n;
    }

    pub fn get(&self, key: &GramKey) -> usize {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// Number of distinct grams.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GramKey, usize)> {
        self.counts.iter().map(|(k, &v)| (k, v))
    }

    pub fn merge(&mut self, other: &CountTable) {
        for (key, count) in other.iter() {
            match self.counts.entry(key.clone()) {
                Entry::Occupied(mut e) => *e.get_mut() += count,
                Entry::Vacant(e) => {
                    e.insert(count);
                }
            }
        }
        self.total += other.total;
    }
}

impl FromIterator<GramKey> for CountTable {
    fn from_iter<I: IntoIterator<Item = GramKey>>(iter: I) -> Self {
        let mut table = CountTable::new();
        for key in iter {
            table.add(key);
        }
        table
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    Token,
    Character,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    RougeN {
        n: usize,
    },
    /// `max_skip: None` allows arbitrary gaps.
    RougeS {
        max_skip: Option<usize>,
    },
}

impl Metric {
    /// Short machine label: `rouge2`, `rougeS`, `rougeS4`.
    pub fn label(&self) -> String {
        match self {
            Metric::RougeN { n } => format!("rouge{n}"),
            Metric::RougeS { max_skip: None } => "rougeS".to_owned(),
            Metric::RougeS { max_skip: Some(d) } => format!("rougeS{d}"),
        }
    }

    /// Display name used in table headers: `Rouge2`, `RougeS`.
    pub fn display_name(&self) -> String {
        let label = self.label();
        format!("R{}", &label[1..])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub metric: Metric,
    pub granularity: Granularity,
    pub lemma_enabled: bool,
    pub beta: f64,
}

impl EvalConfig {
    pub fn rouge_n(n: usize) -> Self {
        EvalConfig {
            metric: Metric::RougeN { n },
            granularity: Granularity::Token,
            lemma_enabled: false,
            beta: 1.0,
        }
    }

    pub fn rouge_s(max_skip: Option<usize>) -> Self {
        EvalConfig {
            metric: Metric::RougeS { max_skip },
            ..EvalConfig::rouge_n(1)
        }
    }

    pub fn with_lemma(mut self, on: bool) -> Self {
        self.lemma_enabled = on;
        self
    }

    pub fn with_granularity(mut self, granularity: Granularity) -> Self {
        self.granularity = granularity;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Metric::RougeN { n: 0 } = self.metric {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "beta must be a positive number, got {}",
                self.beta
            )));
        }
        if self.granularity == Granularity::Character {
            if self.lemma_enabled {
                return Err(Error::InvalidConfig(
                    "character granularity cannot be combined with lemma matching".into(),
                ));
            }
            if let Metric::RougeS { .. } = self.metric {
                return Err(Error::InvalidConfig(
                    "character granularity is only defined for rouge-n".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeScore {
    pub match_count: usize,
    pub candidate_total: usize,
    pub reference_total: usize,
    pub reference_count: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

fn key_of(token: &Token, use_lemma: bool) -> Result<&str> {
    if use_lemma {
        token.lemma().ok_or_else(|| Error::MissingLemma {
            token: token.surface().to_owned(),
        })
    } else {
        Ok(token.normalized())
    }
}

fn sentence_keys(sentence: &Sentence, use_lemma: bool) -> Result<Vec<&str>> {
    sentence
        .tokens
        .iter()
        .map(|t| key_of(t, use_lemma))
        .collect()
}

/// Contiguous token n-grams, per sentence.
pub fn extract_token_ngrams(doc: &Document, n: usize, use_lemma: bool) -> Result<CountTable> {
    if n == 0 {
        return Err(Error::InvalidConfig("n must be at least 1".into()));
    }
    let mut table = CountTable::new();
    for sentence in &doc.sentences {
        let keys = sentence_keys(sentence, use_lemma)?;
        for window in keys.windows(n) {
            table.add(GramKey::new(window.iter().copied()));
        }
    }
    Ok(table)
}

/// Character n-grams of each token's normalized form. Grams stay inside a
/// token; a token shorter than `n` contributes itself as a single gram.
pub fn extract_char_ngrams(doc: &Document, n: usize) -> Result<CountTable> {
    if n == 0 {
        return Err(Error::InvalidConfig("n must be at least 1".into()));
    }
    let mut table = CountTable::new();
    for token in doc.tokens() {
        let chars: Vec<String> = token.normalized().chars().map(String::from).collect();
        if chars.len() < n {
            table.add(GramKey::new([token.normalized()]));
        } else {
            for window in chars.windows(n) {
                table.add(GramKey::new(window.iter().cloned()));
            }
        }
    }
    Ok(table)
}

/// Ordered token pairs `(i, j)`, `i < j`, within each sentence. With
/// `max_skip = Some(d)` only pairs with at most `d` tokens between them.
pub fn extract_skip_bigrams(
    doc: &Document,
    use_lemma: bool,
    max_skip: Option<usize>,
) -> Result<CountTable> {
    let mut table = CountTable::new();
    for sentence in &doc.sentences {
        let keys = sentence_keys(sentence, use_lemma)?;
        for (i, first) in keys.iter().enumerate() {
            let end = match max_skip {
                Some(d) => keys.len().min(i + d + 2),
                None => keys.len(),
            };
            for second in &keys[i + 1..end] {
                table.add(GramKey::new([*first, *second]));
            }
        }
    }
    Ok(table)
}

/// Σ over shared grams of min(candidate count, reference count).
pub fn clipped_match_count(candidate: &CountTable, reference: &CountTable) -> usize {
    let (small, large) = if candidate.len() <= reference.len() {
        (candidate, reference)
    } else {
        (reference, candidate)
    };
    small
        .iter()
        .map(|(key, count)| count.min(large.get(key)))
        .sum()
}

pub fn f_measure(precision: f64, recall: f64, beta: f64) -> f64 {
    if precision + recall == 0.0 {
        return 0.0;
    }
    let beta2 = beta * beta;
    (1.0 + beta2) * precision * recall / (recall + beta2 * precision)
}

/// The gram table `config` scores on.
pub fn gram_table(doc: &Document, config: &EvalConfig) -> Result<CountTable> {
    match (config.metric, config.granularity) {
        (Metric::RougeN { n }, Granularity::Token) => {
            extract_token_ngrams(doc, n, config.lemma_enabled)
        }
        (Metric::RougeN { n }, Granularity::Character) => extract_char_ngrams(doc, n),
        (Metric::RougeS { max_skip }, _) => {
            extract_skip_bigrams(doc, config.lemma_enabled, max_skip)
        }
    }
}

/// Scores precomputed tables.
pub fn score_tables(
    candidate: &CountTable,
    references: &[CountTable],
    beta: f64,
) -> Result<RougeScore> {
    if references.is_empty() {
        return Err(Error::NoReferences);
    }
    let reference_total: usize = references.iter().map(CountTable::total).sum();
    if reference_total == 0 {
        return Err(Error::UndefinedScore);
    }
    let match_count: usize = references
        .iter()
        .map(|r| clipped_match_count(candidate, r))
        .sum();
    let candidate_total = candidate.total();
    let reference_count = references.len();

    let recall = match_count as f64 / reference_total as f64;
    let precision = if candidate_total == 0 {
        0.0
    } else {
        match_count as f64 / (reference_count * candidate_total) as f64
    };
    Ok(RougeScore {
        match_count,
        candidate_total,
        reference_total,
        reference_count,
        precision,
        recall,
        f_measure: f_measure(precision, recall, beta),
    })
}

/// Scores `candidate` against `references` with whichever metric `config`
/// names. Documents must already carry lemmas when lemma matching is on.
pub fn score(
    candidate: &Document,
    references: &[Document],
    config: &EvalConfig,
) -> Result<RougeScore> {
    config.validate()?;
    if references.is_empty() {
        return Err(Error::NoReferences);
    }
    let cand = gram_table(candidate, config)?;
    let refs = references
        .iter()
        .map(|r| gram_table(r, config))
        .collect::<Result<Vec<_>>>()?;
    score_tables(&cand, &refs, config.beta)
}

pub fn rouge_n_score(
    candidate: &Document,
    references: &[Document],
    config: &EvalConfig,
) -> Result<RougeScore> {
    match config.metric {
        Metric::RougeN { .. } => score(candidate, references, config),
        Metric::RougeS { .. } => Err(Error::InvalidConfig("expected a rouge-n config".into())),
    }
}

pub fn rouge_s_score(
    candidate: &Document,
    references: &[Document],
    config: &EvalConfig,
) -> Result<RougeScore> {
    match config.metric {
        Metric::RougeS { .. } => score(candidate, references, config),
        Metric::RougeN { .. } => Err(Error::InvalidConfig("expected a rouge-s config".into())),
    }
}
