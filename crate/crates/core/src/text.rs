//! Raw text to tokenized documents: normalization, sentence splitting and
//! tokenization.
//!
//! Normalization targets Arabic orthographic noise that would otherwise
//! defeat surface matching: short-vowel diacritics, tatweel and the hamza
//! carrying alef variants. Everything else (Latin case included) is left
//! alone unless a [`NormalizeOptions`] flag asks for it.

use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

const TATWEEL: char = '\u{0640}';
const BARE_ALEF: char = '\u{0627}';
const TA_MARBUTA: char = '\u{0629}';
const HA: char = '\u{0647}';
const ALEF_MAQSURA: char = '\u{0649}';
const YA: char = '\u{064A}';

const SENTENCE_TERMINATORS: &[char] = &['.', '!', '?', '\u{061F}', '\u{06D4}', '\n'];

/// Arabic harakat, tanwin, shadda, sukun and the extended marks up to
/// U+065F, plus the superscript alef.
pub fn is_arabic_diacritic(c: char) -> bool {
    matches!(c, '\u{064B}'..='\u{065F}' | '\u{0670}')
}

/// أ إ آ ٱ
pub fn is_alef_variant(c: char) -> bool {
    matches!(c, '\u{0623}' | '\u{0625}' | '\u{0622}' | '\u{0671}')
}

/// Optional foldings. All default to off: ة/ه and ى/ي distinguish lemmas,
/// and Latin case is treated as significant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizeOptions {
    pub fold_ta_marbuta: bool,
    pub fold_alef_maqsura: bool,
    pub case_fold: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    surface: String,
    normalized: String,
    lemma: Option<String>,
}

impl Token {
    pub fn new(surface: impl Into<String>, normalized: impl Into<String>) -> Self {
        Token {
            surface: surface.into(),
            normalized: normalized.into(),
            lemma: None,
        }
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }

    pub fn normalized(&self) -> &str {
        &self.normalized
    }

    pub fn lemma(&self) -> Option<&str> {
        self.lemma.as_deref()
    }

    pub fn set_lemma(&mut self, lemma: impl Into<String>) {
        self.lemma = Some(lemma.into());
    }

    pub fn with_lemma(mut self, lemma: impl Into<String>) -> Self {
        self.set_lemma(lemma);
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Sentence { tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// One summary: an id and its sentences in source order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<Sentence>,
}

impl Document {
    pub fn new(id: impl Into<String>, sentences: Vec<Sentence>) -> Self {
        Document {
            id: id.into(),
            sentences,
        }
    }

    /// All tokens in document order, ignoring sentence boundaries.
    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flat_map(|s| s.tokens.iter())
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.token_count() == 0
    }
}

/// Normalizes with the default options.
pub fn normalize_text(raw: &str) -> String {
    normalize_with(raw, &NormalizeOptions::default())
}

pub fn normalize_with(raw: &str, options: &NormalizeOptions) -> String {
    let composed: String = raw.nfc().collect();
    let mut folded = String::with_capacity(composed.len());
    for c in composed.chars() {
        if is_arabic_diacritic(c) || c == TATWEEL {
            continue;
        }
        let c = match c {
            c if is_alef_variant(c) => BARE_ALEF,
            TA_MARBUTA if options.fold_ta_marbuta => HA,
            ALEF_MAQSURA if options.fold_alef_maqsura => YA,
            c => c,
        };
        if options.case_fold && c.is_uppercase() {
            folded.extend(c.to_lowercase());
        } else {
            folded.push(c);
        }
    }
    // Dropping marks can leave a base and a later mark adjacent; recompose.
    let recomposed: String = folded.nfc().collect();
    collapse_whitespace(&recomposed)
}

/// Decodes UTF-8 and normalizes with the default options.
pub fn decode_and_normalize(raw: &[u8]) -> Result<String> {
    Ok(normalize_text(decode(raw)?))
}

pub(crate) fn decode(raw: &[u8]) -> Result<&str> {
    std::str::from_utf8(raw).map_err(|e| Error::InvalidUtf8 {
        offset: e.valid_up_to(),
    })
}

fn collapse_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split(char::is_whitespace).filter(|w| !w.is_empty()) {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Splits on `. ! ? ؟ ۔` and newline. Terminators are dropped, segments
/// are trimmed and empty segments discarded.
pub fn split_sentences(normalized: &str) -> Vec<String> {
    normalized
        .split(SENTENCE_TERMINATORS)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

fn is_token_char(c: char) -> bool {
    c.is_alphanumeric() || is_combining_mark(c)
}

/// Splits on whitespace, punctuation and symbols. Separators never become
/// tokens; letters, digits and combining marks do.
pub fn tokenize(sentence: &str) -> Vec<Token> {
    sentence
        .split(|c: char| !is_token_char(c))
        .filter(|s| !s.is_empty())
        .map(|s| Token::new(s, s))
        .collect()
}

/// normalize, split into sentences, tokenize. Sentences without tokens
/// are dropped.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextPipeline {
    pub options: NormalizeOptions,
}

impl TextPipeline {
    pub fn new(options: NormalizeOptions) -> Self {
        TextPipeline { options }
    }

    pub fn normalize(&self, raw: &str) -> String {
        normalize_with(raw, &self.options)
    }

    pub fn build_document(&self, id: impl Into<String>, raw: &str) -> Document {
        let normalized = self.normalize(raw);
        let sentences = split_sentences(&normalized)
            .iter()
            .map(|s| Sentence::new(tokenize(s)))
            .filter(|s| !s.is_empty())
            .collect();
        Document::new(id, sentences)
    }

    pub fn build_document_from_bytes(&self, id: impl Into<String>, raw: &[u8]) -> Result<Document> {
        Ok(self.build_document(id, decode(raw)?))
    }
}

/// [`TextPipeline::build_document`] with default options.
pub fn build_document(id: impl Into<String>, raw: &str) -> Document {
    TextPipeline::default().build_document(id, raw)
}
