//! Country and topic filtering of preprocessed posts.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textprep::{normalize, remove_noise, CleanPost, Preprocessor};

const BUNDLED_LEXICON: &str = include_str!("../data/sustainability_lexicon.txt");
const NAME_DIRECTIVE: &str = "#lexicon-name:";

fn norm_key(s: &str) -> String {
    normalize(s.trim(), None)
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

fn hashtag_key(s: &str) -> String {
    norm_key(s.trim().trim_start_matches('#'))
}

/// Lowercase-normalized hashtags of a post, from both the `hashtags` field and
/// `#` tokens in the text. Returned without the `#`.
fn post_hashtags(post: &CleanPost) -> BTreeSet<String> {
    post.post
        .hashtags
        .iter()
        .map(|h| hashtag_key(h))
        .chain(
            post.tokens
                .iter()
                .filter_map(|t| t.strip_prefix('#'))
                .map(str::to_string),
        )
        .filter(|h| !h.is_empty())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryFilterSpec {
    pub geo_names: BTreeSet<String>,
    pub hashtag_keys: BTreeSet<String>,
    pub city_names: BTreeSet<String>,
    /// City names in post-token form (stemmed), for text mentions.
    city_terms: BTreeSet<String>,
}

impl Default for CountryFilterSpec {
    fn default() -> Self {
        Self::new(
            ["saudi arabia", "ksa"],
            ["ksa", "saudi"],
            ["riyadh", "jeddah", "dammam", "mecca", "medina", "neom"],
            &Preprocessor::default(),
        )
    }
}

impl CountryFilterSpec {
    pub fn new<G, H, C>(geo_names: G, hashtag_keys: H, city_names: C, pre: &Preprocessor) -> Self
    where
        G: IntoIterator,
        G::Item: AsRef<str>,
        H: IntoIterator,
        H::Item: AsRef<str>,
        C: IntoIterator,
        C::Item: AsRef<str>,
    {
        let geo_names = geo_names.into_iter().map(|s| norm_key(s.as_ref())).collect();
        let hashtag_keys = hashtag_keys
            .into_iter()
            .map(|s| hashtag_key(s.as_ref()))
            .collect();
        let city_names: BTreeSet<String> = city_names
            .into_iter()
            .map(|s| norm_key(s.as_ref()))
            .collect();
        let city_terms = city_names
            .iter()
            .flat_map(|c| [c.clone(), pre.term_form(c)])
            .filter(|t| !t.is_empty())
            .collect();
        CountryFilterSpec {
            geo_names,
            hashtag_keys,
            city_names,
            city_terms,
        }
    }

    pub fn matches(&self, post: &CleanPost) -> bool {
        if let Some(geo) = &post.post.geo {
            if self.geo_names.contains(&norm_key(geo)) {
                return true;
            }
        }
        let tags = post_hashtags(post);
        if tags
            .iter()
            .any(|t| self.hashtag_keys.contains(t) || self.city_names.contains(t))
        {
            return true;
        }
        post.terms().any(|t| self.city_terms.contains(t))
    }
}

/// Keeps posts attributable to the country; returns them with the number dropped.
pub fn country_filter(posts: Vec<CleanPost>, spec: &CountryFilterSpec) -> (Vec<CleanPost>, usize) {
    let before = posts.len();
    let kept: Vec<CleanPost> = posts.into_iter().filter(|p| spec.matches(p)).collect();
    let dropped = before - kept.len();
    (kept, dropped)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconEntry {
    /// Canonical term form, as posts' tokens/n-grams/hashtags spell it.
    pub term: String,
    /// The entry as written in the lexicon source.
    pub label: String,
}

impl LexiconEntry {
    pub fn is_hashtag(&self) -> bool {
        self.term.starts_with('#')
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicLexicon {
    pub name: String,
    entries: BTreeMap<String, LexiconEntry>,
}

impl TopicLexicon {
    pub fn new(name: impl Into<String>) -> Self {
        TopicLexicon {
            name: name.into(),
            entries: BTreeMap::new(),
        }
    }

    pub fn bundled(pre: &Preprocessor) -> Self {
        Self::parse(BUNDLED_LEXICON, pre)
    }

    pub fn load(path: &Path, pre: &Preprocessor) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let lex = Self::parse(&text, pre);
        if lex.is_empty() {
            return Err(Error::Config(format!(
                "lexicon {} has no entries",
                path.display()
            )));
        }
        Ok(lex)
    }

    /// One entry per line; `#lexicon-name:` sets the name. An entry may carry
    /// an alias in parentheses, e.g. `Saudi Green Initiative (SGI)`.
    pub fn parse(text: &str, pre: &Preprocessor) -> Self {
        let mut lex = TopicLexicon::new("lexicon");
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix(NAME_DIRECTIVE) {
                lex.name = name.trim().to_string();
                continue;
            }
            for part in split_aliases(line) {
                lex.insert(&part, pre);
            }
        }
        lex
    }

    /// Adds one entry; returns false when it reduces to nothing.
    pub fn insert(&mut self, raw: &str, pre: &Preprocessor) -> bool {
        let raw = raw.trim();
        let term = if raw.starts_with('#') {
            let body: String = normalize(&remove_noise(raw.trim_start_matches('#')), None)
                .chars()
                .filter(|c| c.is_alphanumeric() || *c == '_')
                .collect();
            if body.is_empty() {
                String::new()
            } else {
                format!("#{body}")
            }
        } else {
            pre.term_form(raw)
        };
        if term.is_empty() {
            log::warn!("lexicon entry `{raw}` has no content words, skipped");
            return false;
        }
        self.entries.entry(term.clone()).or_insert(LexiconEntry {
            term,
            label: raw.to_string(),
        });
        true
    }

    pub fn entries(&self) -> impl Iterator<Item = &LexiconEntry> {
        self.entries.values()
    }

    pub fn get(&self, term: &str) -> Option<&LexiconEntry> {
        self.entries.get(term)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries present in a post. Entries longer than a trigram match as a
    /// contiguous token run.
    pub fn matches_in<'a>(&'a self, post: &CleanPost) -> Vec<&'a LexiconEntry> {
        let terms: HashSet<&str> = post.terms().collect();
        let tags = post_hashtags(post);
        self.entries
            .values()
            .filter(|e| {
                if let Some(tag) = e.term.strip_prefix('#') {
                    tags.contains(tag)
                } else if terms.contains(e.term.as_str()) {
                    true
                } else {
                    let words: Vec<&str> = e.term.split(' ').collect();
                    words.len() > 3
                        && post
                            .tokens
                            .windows(words.len())
                            .any(|w| w.iter().zip(&words).all(|(a, b)| a == b))
                }
            })
            .collect()
    }
}

fn split_aliases(line: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut main = String::new();
    let mut rest = line;
    while let Some(open) = rest.find('(') {
        main.push_str(&rest[..open]);
        match rest[open..].find(')') {
            Some(close) => {
                parts.push(rest[open + 1..open + close].trim().to_string());
                rest = &rest[open + close + 1..];
            }
            None => {
                rest = &rest[open + 1..];
            }
        }
    }
    main.push_str(rest);
    let mut out = vec![main.trim().to_string()];
    out.extend(parts);
    out.retain(|s| !s.is_empty());
    out
}

/// Per-entry, per-year post hit counts. Merging is associative and commutative.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordHits {
    pub counts: BTreeMap<String, BTreeMap<i32, usize>>,
}

impl KeywordHits {
    pub fn record(&mut self, term: &str, year: i32) {
        *self
            .counts
            .entry(term.to_string())
            .or_default()
            .entry(year)
            .or_insert(0) += 1;
    }

    pub fn merge(mut self, other: KeywordHits) -> KeywordHits {
        for (term, years) in other.counts {
            let slot = self.counts.entry(term).or_default();
            for (y, n) in years {
                *slot.entry(y).or_insert(0) += n;
            }
        }
        self
    }

    pub fn total(&self, term: &str) -> usize {
        self.counts.get(term).map_or(0, |m| m.values().sum())
    }

    pub fn grand_total(&self) -> usize {
        self.counts.values().flat_map(|m| m.values()).sum()
    }
}

#[derive(Debug, Clone)]
pub struct TopicFilterOutcome {
    pub kept: Vec<CleanPost>,
    pub dropped: usize,
    pub hits: KeywordHits,
}

/// Keeps posts whose tokens, n-grams or hashtags hit the lexicon.
pub fn topic_filter(posts: Vec<CleanPost>, lexicon: &TopicLexicon) -> Result<TopicFilterOutcome> {
    if lexicon.is_empty() {
        return Err(Error::Config(format!(
            "topic lexicon `{}` is empty",
            lexicon.name
        )));
    }
    let mut hits = KeywordHits::default();
    let mut kept = Vec::new();
    let mut dropped = 0;
    for post in posts {
        let matched = lexicon.matches_in(&post);
        if matched.is_empty() {
            dropped += 1;
            continue;
        }
        let year = post.post.year();
        for e in matched {
            hits.record(&e.term, year);
        }
        kept.push(post);
    }
    Ok(TopicFilterOutcome {
        kept,
        dropped,
        hits,
    })
}

/// Percentage in tenths of a percent, rounded half up, computed exactly.
pub fn percent_tenths(kept: usize, total: usize) -> Option<u64> {
    if total == 0 {
        return None;
    }
    let (k, t) = (kept as u128, total as u128);
    Some(((2000 * k + t) / (2 * t)) as u64)
}

pub fn format_percent(tenths: u64) -> String {
    format!("{}.{}", tenths / 10, tenths % 10)
}

/// Share of sustainability posts per year, to one decimal. Years with no
/// posts are omitted.
pub fn sustainability_share(
    corpus_by_year: &BTreeMap<i32, usize>,
    kept_by_year: &BTreeMap<i32, usize>,
) -> Result<BTreeMap<i32, f64>> {
    let mut out = BTreeMap::new();
    for (&year, &kept) in kept_by_year {
        let total = corpus_by_year.get(&year).copied().unwrap_or(0);
        if kept > total {
            return Err(Error::InvalidInput(format!(
                "year {year}: {kept} kept posts exceed {total} total"
            )));
        }
    }
    for (&year, &total) in corpus_by_year {
        let kept = kept_by_year.get(&year).copied().unwrap_or(0);
        if let Some(t) = percent_tenths(kept, total) {
            out.insert(year, t as f64 / 10.0);
        }
    }
    Ok(out)
}
