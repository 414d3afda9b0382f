//! ROUGE-N and ROUGE-S summary evaluation with token-level, lemma-aware
//! matching.
//!
//! The pipeline is: [`text`] turns raw UTF-8 into normalized, tokenized
//! [`Document`]s; [`lemma`] optionally attaches a canonical lemma to every
//! token; [`rouge`] extracts grams and scores a candidate against its
//! references; [`corpus`] runs that over a multi-topic, multi-system corpus
//! and [`report`] renders the rankings.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod lemma;
pub mod report;
pub mod rouge;
pub mod text;

pub use corpus::{
    compare_configs, evaluate_corpus, evaluate_topic, load_corpus, load_manifest, Aggregation,
    ConfigDelta, CorpusLayout, SystemReport,
};
pub use error::{Error, Result};
pub use lemma::{
    lemmatize_document, lemmatize_token, load_lexicon, IdentityLemmatizer, LemmaLexicon,
    Lemmatizer, LexiconLemmatizer, RuleSet,
};
pub use report::{emit_report, OutputFormat};
pub use rouge::{
    clipped_match_count, f_measure, rouge_n_score, rouge_s_score, CountTable, EvalConfig, GramKey,
    Granularity, Metric, RougeScore,
};
pub use text::{
    build_document, normalize_text, split_sentences, tokenize, Document, Sentence, Token,
};
