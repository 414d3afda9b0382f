//! Lemmatization: maps each token to the key it is matched on in lemma mode.
//!
//! [`Lemmatizer`] is the plug point. Two implementations ship:
//! [`IdentityLemmatizer`] for native (surface) scoring and
//! [`LexiconLemmatizer`], which consults a surface→lemma table first and
//! falls back to light proclitic/suffix stripping.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::text::{normalize_with, Document, NormalizeOptions, Token};

pub trait Lemmatizer: Send + Sync {
    /// Lemma for a normalized surface form. Must be a pure function of its
    /// input and never return an empty string for non-empty input.
    fn lemma(&self, normalized: &str) -> String;

    fn lemmatize_token(&self, token: &Token) -> String {
        self.lemma(token.normalized())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityLemmatizer;

impl Lemmatizer for IdentityLemmatizer {
    fn lemma(&self, normalized: &str) -> String {
        normalized.to_owned()
    }
}

/// Adapts a closure. Handy for tests and for wiring external analyzers.
pub struct FnLemmatizer<F>(pub F);

impl<F> Lemmatizer for FnLemmatizer<F>
where
    F: Fn(&str) -> String + Send + Sync,
{
    fn lemma(&self, normalized: &str) -> String {
        (self.0)(normalized)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LemmaLexicon {
    entries: HashMap<String, String>,
    source_path: Option<PathBuf>,
    duplicates: usize,
}

impl LemmaLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a lexicon from in-memory pairs, normalizing both sides.
    /// Pairs that normalize to an empty side are skipped.
    pub fn from_pairs<I, S, L>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, L)>,
        S: AsRef<str>,
        L: AsRef<str>,
    {
        let options = NormalizeOptions::default();
        let mut lexicon = LemmaLexicon::new();
        for (surface, lemma) in pairs {
            let surface = normalize_with(surface.as_ref(), &options);
            let lemma = normalize_with(lemma.as_ref(), &options);
            if !surface.is_empty() && !lemma.is_empty() {
                lexicon.insert(surface, lemma);
            }
        }
        lexicon
    }

    fn insert(&mut self, surface: String, lemma: String) {
        if self.entries.insert(surface, lemma).is_some() {
            self.duplicates += 1;
        }
    }

    pub fn get(&self, normalized: &str) -> Option<&str> {
        self.entries.get(normalized).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn source_path(&self) -> Option<&Path> {
        self.source_path.as_deref()
    }

    /// Number of lines whose surface form repeated an earlier key.
    pub fn duplicate_count(&self) -> usize {
        self.duplicates
    }
}

/// Loads a `surface<TAB>lemma` file with default normalization.
pub fn load_lexicon(path: impl AsRef<Path>) -> Result<LemmaLexicon> {
    load_lexicon_with(path, &NormalizeOptions::default())
}

/// Both columns are normalized with `options`, which should match the
/// options used to build the documents being scored. Blank lines and lines
/// starting with `#` are skipped; on duplicate surfaces the last line wins.
pub fn load_lexicon_with(
    path: impl AsRef<Path>,
    options: &NormalizeOptions,
) -> Result<LemmaLexicon> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Error::FileEncoding {
        path: path.to_owned(),
        offset: e.valid_up_to(),
    })?;
    let mut lexicon = parse_lexicon(text, path, options)?;
    lexicon.source_path = Some(path.to_owned());
    Ok(lexicon)
}

fn parse_lexicon(text: &str, path: &Path, options: &NormalizeOptions) -> Result<LemmaLexicon> {
    let mut lexicon = LemmaLexicon::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let columns: Vec<&str> = line.split('\t').collect();
        if columns.len() != 2 {
            return Err(Error::MalformedLexiconLine {
                path: path.to_owned(),
                line: line_no,
                found: columns.len(),
            });
        }
        let surface = normalize_with(columns[0], options);
        let lemma = normalize_with(columns[1], options);
        if surface.is_empty() || lemma.is_empty() {
            return Err(Error::EmptyLexiconField {
                path: path.to_owned(),
                line: line_no,
            });
        }
        lexicon.insert(surface, lemma);
    }
    Ok(lexicon)
}

pub const DEFAULT_PREFIXES: &[&str] = &[
    "وال", "فال", "بال", "كال", "ولل", "ال", "لل", "و", "ف", "ب", "ك", "ل",
];

pub const DEFAULT_SUFFIXES: &[&str] = &[
    "كما", "هما", "تين", "تان", "ات", "ان", "ون", "ين", "ية", "ها", "هم", "هن", "كم", "كن", "نا",
    "ني", "وا", "ة", "ه", "ك", "ي", "ا", "ت", "ن",
];

/// Affix stripping rules. Lengths are counted in characters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    prefixes: Vec<String>,
    suffixes: Vec<String>,
    min_stem_len: usize,
    iterative: bool,
}

impl Default for RuleSet {
    fn default() -> Self {
        RuleSet::new(DEFAULT_PREFIXES, DEFAULT_SUFFIXES, 2).expect("default rules are valid")
    }
}

impl RuleSet {
    /// Affix lists are re-sorted longest-first (stable, so equal-length
    /// affixes keep their given order). Empty affixes are ignored.
    pub fn new<P, S>(prefixes: &[P], suffixes: &[S], min_stem_len: usize) -> Result<Self>
    where
        P: AsRef<str>,
        S: AsRef<str>,
    {
        if min_stem_len == 0 {
            return Err(Error::InvalidConfig(
                "min_stem_len must be at least 1".into(),
            ));
        }
        Ok(RuleSet {
            prefixes: longest_first(prefixes),
            suffixes: longest_first(suffixes),
            min_stem_len,
            iterative: false,
        })
    }

    /// No affixes: the rule fallback becomes the identity.
    pub fn empty() -> Self {
        RuleSet {
            prefixes: Vec::new(),
            suffixes: Vec::new(),
            min_stem_len: 1,
            iterative: false,
        }
    }

    /// Repeat prefix stripping, then suffix stripping, until nothing more
    /// applies, instead of stripping at most one of each.
    pub fn iterative(mut self, on: bool) -> Self {
        self.iterative = on;
        self
    }

    pub fn prefixes(&self) -> &[String] {
        &self.prefixes
    }

    pub fn suffixes(&self) -> &[String] {
        &self.suffixes
    }

    pub fn min_stem_len(&self) -> usize {
        self.min_stem_len
    }

    /// Strips the longest matching prefix, then the longest matching
    /// suffix. An affix is only removed when the remainder keeps at least
    /// `min_stem_len` characters; a shorter affix is not tried in its place.
    pub fn apply(&self, word: &str) -> String {
        let mut stem = word;
        while let Some(rest) = self.strip_prefix(stem) {
            stem = rest;
            if !self.iterative {
                break;
            }
        }
        while let Some(rest) = self.strip_suffix(stem) {
            stem = rest;
            if !self.iterative {
                break;
            }
        }
        stem.to_owned()
    }

    fn strip_prefix<'a>(&self, word: &'a str) -> Option<&'a str> {
        let affix = self
            .prefixes
            .iter()
            .find(|p| word.starts_with(p.as_str()))?;
        let rest = &word[affix.len()..];
        (rest.chars().count() >= self.min_stem_len).then_some(rest)
    }

    fn strip_suffix<'a>(&self, word: &'a str) -> Option<&'a str> {
        let affix = self.suffixes.iter().find(|s| word.ends_with(s.as_str()))?;
        let rest = &word[..word.len() - affix.len()];
        (rest.chars().count() >= self.min_stem_len).then_some(rest)
    }
}

fn longest_first<A: AsRef<str>>(affixes: &[A]) -> Vec<String> {
    let mut out: Vec<String> = affixes
        .iter()
        .map(|a| a.as_ref().to_owned())
        .filter(|a| !a.is_empty())
        .collect();
    out.sort_by_key(|a| std::cmp::Reverse(a.chars().count()));
    out
}

/// Lexicon lookup, falling back to [`RuleSet::apply`].
#[derive(Debug, Clone, Default)]
pub struct LexiconLemmatizer {
    pub lexicon: LemmaLexicon,
    pub rules: RuleSet,
}

impl LexiconLemmatizer {
    pub fn new(lexicon: LemmaLexicon, rules: RuleSet) -> Self {
        LexiconLemmatizer { lexicon, rules }
    }
}

impl Lemmatizer for LexiconLemmatizer {
    fn lemma(&self, normalized: &str) -> String {
        match self.lexicon.get(normalized) {
            Some(lemma) => lemma.to_owned(),
            None => self.rules.apply(normalized),
        }
    }
}

pub fn lemmatize_token(token: &Token, lexicon: &LemmaLexicon, rules: &RuleSet) -> String {
    match lexicon.get(token.normalized()) {
        Some(lemma) => lemma.to_owned(),
        None => rules.apply(token.normalized()),
    }
}

/// Returns a copy of `doc` with every token's lemma set. Sentence and token
/// structure is untouched.
pub fn lemmatize_document<L: Lemmatizer + ?Sized>(doc: &Document, lemmatizer: &L) -> Document {
    let mut out = doc.clone();
    for sentence in &mut out.sentences {
        for token in &mut sentence.tokens {
            let lemma = lemmatizer.lemmatize_token(token);
            token.set_lemma(lemma);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::build_document;
    use proptest::prelude::*;
    use std::io::Write;

    fn lexicon_file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn organize_lexicon() -> LemmaLexicon {
        let f = lexicon_file("organizes\torganize\norganizing\torganize");
        load_lexicon(f.path()).unwrap()
    }

    fn lemma_of(word: &str, lexicon: &LemmaLexicon, rules: &RuleSet) -> String {
        lemmatize_token(&Token::new(word, word), lexicon, rules)
    }

    #[test]
    fn load_examples() {
        let lex = organize_lexicon();
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.get("organizing"), Some("organize"));

        let empty = lexicon_file("");
        assert!(load_lexicon(empty.path()).unwrap().is_empty());

        let bad = lexicon_file("a\tb\tc\n");
        match load_lexicon(bad.path()).unwrap_err() {
            Error::MalformedLexiconLine { line, found, .. } => {
                assert_eq!((line, found), (1, 3));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn load_skips_comments_and_normalizes() {
        let f = lexicon_file("# header\n\nكُتُب\tكِتَاب\r\nأقلام\tقلم\n");
        let lex = load_lexicon(f.path()).unwrap();
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.get("كتب"), Some("كتاب"));
        assert_eq!(lex.get("اقلام"), Some("قلم"));
        assert_eq!(lex.source_path(), Some(f.path()));
    }

    #[test]
    fn duplicate_surface_last_wins() {
        let f = lexicon_file("a\tx\nb\ty\na\tz\n");
        let lex = load_lexicon(f.path()).unwrap();
        assert_eq!(lex.get("a"), Some("z"));
        assert_eq!(lex.duplicate_count(), 1);
    }

    #[test]
    fn load_errors() {
        assert!(matches!(
            load_lexicon("/nonexistent/lexicon.tsv"),
            Err(Error::Io { .. })
        ));
        let f = lexicon_file("ok\tok\nnotab\n");
        assert!(matches!(
            load_lexicon(f.path()),
            Err(Error::MalformedLexiconLine {
                line: 2,
                found: 1,
                ..
            })
        ));
        let f = lexicon_file("\u{064E}\tx\n");
        assert!(matches!(
            load_lexicon(f.path()),
            Err(Error::EmptyLexiconField { line: 1, .. })
        ));
    }

    #[test]
    fn default_rules_are_sorted_longest_first() {
        let rules = RuleSet::default();
        for list in [rules.prefixes(), rules.suffixes()] {
            let lens: Vec<usize> = list.iter().map(|a| a.chars().count()).collect();
            assert!(lens.windows(2).all(|w| w[0] >= w[1]), "{lens:?}");
        }
        assert_eq!(rules.prefixes().len(), DEFAULT_PREFIXES.len());
        assert_eq!(rules.suffixes().len(), DEFAULT_SUFFIXES.len());
        assert!(RuleSet::new(&["a"], &["b"], 0).is_err());
    }

    #[test]
    fn lemmatize_examples() {
        let rules = RuleSet::default();
        assert_eq!(
            lemma_of("organizes", &organize_lexicon(), &rules),
            "organize"
        );
        assert_eq!(lemma_of("ها", &LemmaLexicon::new(), &rules), "ها");
        // ال stripped; كتاب ends in ب, which no suffix matches
        assert_eq!(lemma_of("الكتاب", &LemmaLexicon::new(), &rules), "كتاب");
    }

    #[test]
    fn rule_cascade() {
        let rules = RuleSet::default();
        let lex = LemmaLexicon::new();
        // وال + مدرس + ون
        assert_eq!(lemma_of("والمدرسون", &lex, &rules), "مدرس");
        // ال + مكتب + ات
        assert_eq!(lemma_of("المكتبات", &lex, &rules), "مكتب");
        // بال would leave one letter, so nothing is stripped from the front
        assert_eq!(lemma_of("بالغ", &lex, &rules), "بالغ");
        assert_eq!(lemma_of("word", &lex, &rules), "word");
    }

    #[test]
    fn iterative_stripping_is_opt_in() {
        let lex = LemmaLexicon::new();
        let single = RuleSet::default();
        let iterative = RuleSet::default().iterative(true);
        // و + ال + كتاب: single pass removes only وال
        assert_eq!(lemma_of("والكتابات", &lex, &single), "كتاب");
        assert_eq!(lemma_of("فبالمدرسة", &lex, &single), "بالمدرس");
        assert_eq!(lemma_of("فبالمدرسة", &lex, &iterative), "مدرس");
    }

    #[test]
    fn lexicon_takes_precedence_over_rules() {
        // rules alone would strip ال
        let lex = LemmaLexicon::from_pairs([("الكتاب", "الكتاب")]);
        assert_eq!(lemma_of("الكتاب", &lex, &RuleSet::default()), "الكتاب");
        let lemmatizer = LexiconLemmatizer::new(lex, RuleSet::default());
        assert_eq!(lemmatizer.lemma("الكتاب"), "الكتاب");
        assert_eq!(lemmatizer.lemma("القلم"), "قلم");
    }

    #[test]
    fn lemmatize_document_examples() {
        let lemmatizer = LexiconLemmatizer::new(organize_lexicon(), RuleSet::default());
        let empty = Document::new("e", vec![]);
        assert_eq!(lemmatize_document(&empty, &lemmatizer), empty);

        let a = lemmatize_document(&build_document("a", "we organize"), &lemmatizer);
        let b = lemmatize_document(&build_document("b", "we organizes"), &lemmatizer);
        let lemmas = |d: &Document| {
            d.tokens()
                .map(|t| t.lemma().unwrap().to_owned())
                .collect::<Vec<_>>()
        };
        assert_eq!(lemmas(&a), lemmas(&b));
        assert_eq!(a.token_count(), 2);
    }

    #[test]
    fn identity_and_closure_lemmatizers() {
        assert_eq!(IdentityLemmatizer.lemma("كتب"), "كتب");
        let upper = FnLemmatizer(|s: &str| s.to_uppercase());
        assert_eq!(upper.lemma("abc"), "ABC");
    }

    fn arabic_words() -> impl Strategy<Value = Vec<String>> {
        let letters: Vec<char> = "ابتثجحخدذرزسشصضطظعغفقكلمنهويةى".chars().collect();
        proptest::collection::vec(
            proptest::collection::vec(prop::sample::select(letters), 1..9)
                .prop_map(|cs| cs.into_iter().collect::<String>()),
            0..20,
        )
    }

    proptest! {
        #[test]
        fn structure_is_preserved(words in arabic_words()) {
            let doc = build_document("p", &words.join(" . "));
            let out = lemmatize_document(&doc, &LexiconLemmatizer::default());
            prop_assert_eq!(out.sentences.len(), doc.sentences.len());
            for (a, b) in out.sentences.iter().zip(&doc.sentences) {
                prop_assert_eq!(a.len(), b.len());
                for (x, y) in a.tokens.iter().zip(&b.tokens) {
                    prop_assert_eq!(x.normalized(), y.normalized());
                    prop_assert!(x.lemma().is_some());
                }
            }
        }

        #[test]
        fn lemma_length_floor(words in arabic_words(), min_len in 1usize..4) {
            let rules = RuleSet::new(DEFAULT_PREFIXES, DEFAULT_SUFFIXES, min_len).unwrap();
            for w in &words {
                let lemma = rules.apply(w);
                prop_assert!(!lemma.is_empty());
                prop_assert!(lemma.chars().count() >= min_len.min(w.chars().count()));
            }
        }

        #[test]
        fn equal_surfaces_equal_lemmas(words in arabic_words()) {
            let lemmatizer = LexiconLemmatizer::default();
            let doc = lemmatize_document(&build_document("p", &words.join(" ")), &lemmatizer);
            let mut seen = HashMap::new();
            for t in doc.tokens() {
                let prev = seen.insert(t.normalized().to_owned(), t.lemma().unwrap().to_owned());
                if let Some(prev) = prev {
                    prop_assert_eq!(prev.as_str(), t.lemma().unwrap());
                }
            }
        }
    }
}
