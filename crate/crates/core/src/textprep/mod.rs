//! Text normalization: noise removal, normalization, tokenization, stop words,
//! lemmatization with stemming fallback, and n-grams.

mod noise;
mod normalize;
mod resources;
mod stem;

use serde::{Deserialize, Serialize};

use crate::corpus::RawPost;

pub use noise::{is_emoji, remove_noise};
pub use normalize::normalize;
pub use resources::{LemmaTable, StopWordList};
pub use stem::{light_stem_arabic, stem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Lang {
    English,
    Arabic,
}

impl Lang {
    /// Maps a BCP-47-ish tag to a supported language.
    pub fn from_tag(tag: &str) -> Option<Lang> {
        let primary = tag.split(['-', '_']).next()?.to_ascii_lowercase();
        match primary.as_str() {
            "en" | "eng" => Some(Lang::English),
            "ar" | "ara" => Some(Lang::Arabic),
            _ => None,
        }
    }

    /// Resolves an optional tag, falling back to English with a warning.
    pub fn resolve(tag: Option<&str>) -> Lang {
        match tag {
            None => Lang::English,
            Some(t) => Lang::from_tag(t).unwrap_or_else(|| {
                log::warn!("unsupported language `{t}`, using English rules");
                Lang::English
            }),
        }
    }

    /// Script wins over the post-level tag: Arabic letters get Arabic rules.
    pub fn for_token(token: &str, fallback: Lang) -> Lang {
        if token.chars().any(normalize::is_arabic_char) {
            Lang::Arabic
        } else {
            fallback
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanPost {
    #[serde(flatten)]
    pub post: RawPost,
    pub cleaned_text: String,
    pub tokens: Vec<String>,
    pub ngrams: Vec<String>,
    pub token_count: usize,
}

impl CleanPost {
    /// Tokens followed by n-grams.
    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.tokens
            .iter()
            .chain(self.ngrams.iter())
            .map(String::as_str)
    }
}

fn is_residue(token: &str) -> bool {
    token.chars().all(|c| matches!(c, '#' | '_' | '\''))
}

/// Splits on whitespace. Hashtags keep their `#`; bare markers are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| t.trim_matches('\''))
        .filter(|t| !t.is_empty() && !is_residue(t))
        .map(str::to_string)
        .collect()
}

pub fn is_hashtag(token: &str) -> bool {
    token.starts_with('#')
}

/// Drops stop words. Hashtags are never removed. Tokens in Arabic script are
/// checked against the Arabic list regardless of `lang`; an unknown `lang`
/// falls back to English.
pub fn filter_stopwords(tokens: &[String], stoplist: &StopWordList, lang: Option<&str>) -> Vec<String> {
    let fallback = Lang::resolve(lang);
    tokens
        .iter()
        .filter(|t| is_hashtag(t) || !stoplist.contains(Lang::for_token(t, fallback), t))
        .cloned()
        .collect()
}

/// Table lookup, falling back to the stemmer on a miss. Hashtags are atomic.
pub fn lemmatize(token: &str, table: &LemmaTable, lang: Lang) -> String {
    if is_hashtag(token) {
        return token.to_string();
    }
    match table.get(lang, token) {
        Some(lemma) => lemma.to_string(),
        None => stem(token, lang),
    }
}

/// Contiguous bigrams followed by trigrams, space-joined.
pub fn ngrams(tokens: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(tokens.len().saturating_sub(1) * 2);
    for n in [2, 3] {
        out.extend(tokens.windows(n).map(|w| w.join(" ")));
    }
    out
}

/// The full preprocessing chain with its language resources.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    pub stopwords: StopWordList,
    pub lemmas: LemmaTable,
}

impl Default for Preprocessor {
    fn default() -> Self {
        Preprocessor {
            stopwords: StopWordList::bundled(),
            lemmas: LemmaTable::bundled(),
        }
    }
}

impl Preprocessor {
    pub fn new(stopwords: StopWordList, lemmas: LemmaTable) -> Self {
        Preprocessor { stopwords, lemmas }
    }

    /// `remove_noise` then `normalize`, whitespace-collapsed.
    pub fn clean_text(&self, text: &str, lang: Option<&str>) -> String {
        noise::collapse_whitespace(&normalize(&remove_noise(text), lang))
    }

    /// Stop-word filtering and lemmatization over already-cleaned text.
    pub fn terms_of(&self, cleaned: &str, lang: Option<&str>) -> Vec<String> {
        let fallback = Lang::resolve(lang);
        let raw = tokenize(cleaned);
        // A lemma can itself be a stop word ("being" -> "be"), so filter again.
        filter_stopwords(&raw, &self.stopwords, lang)
            .iter()
            .map(|t| lemmatize(t, &self.lemmas, Lang::for_token(t, fallback)))
            .filter(|t| {
                is_hashtag(t) || !self.stopwords.contains(Lang::for_token(t, fallback), t)
            })
            .collect()
    }

    pub fn preprocess(&self, post: &RawPost) -> CleanPost {
        let lang = post.lang_hint.as_deref().filter(|t| Lang::from_tag(t).is_some());
        let cleaned_text = self.clean_text(&post.text, lang);
        let tokens = self.terms_of(&cleaned_text, lang);
        let ngrams = ngrams(&tokens);
        CleanPost {
            post: post.clone(),
            token_count: tokens.len(),
            cleaned_text,
            tokens,
            ngrams,
        }
    }

    /// Canonical term form of a free-text phrase (lexicon entry, city name,
    /// sentiment word): the same chain posts go through, space-joined.
    pub fn term_form(&self, phrase: &str) -> String {
        let cleaned = self.clean_text(phrase, None);
        self.terms_of(&cleaned, None).join(" ")
    }
}
