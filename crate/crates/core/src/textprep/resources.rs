//! Stop-word lists and lemma tables, bundled and file-loaded.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use super::{normalize, Lang};
use crate::error::{Error, Result};

const STOPWORDS_EN: &str = include_str!("../../data/stopwords_en.txt");
const STOPWORDS_AR: &str = include_str!("../../data/stopwords_ar.txt");
const LEMMAS_EN: &str = include_str!("../../data/lemmas_en.tsv");
const LEMMAS_AR: &str = include_str!("../../data/lemmas_ar.tsv");

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StopWordList {
    sets: BTreeMap<Lang, HashSet<String>>,
}

impl StopWordList {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The bundled English and Arabic lists.
    pub fn bundled() -> Self {
        let mut list = Self::empty();
        list.extend_from_str(Lang::English, STOPWORDS_EN);
        list.extend_from_str(Lang::Arabic, STOPWORDS_AR);
        list
    }

    /// Adds entries from the one-word-per-line format (`#` starts a comment line).
    pub fn extend_from_str(&mut self, lang: Lang, contents: &str) {
        let set = self.sets.entry(lang).or_default();
        for line in contents.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let w = normalize(line, None);
            if !w.is_empty() {
                set.insert(w);
            }
        }
    }

    pub fn extend_from_file(&mut self, lang: Lang, path: &Path) -> Result<()> {
        let contents = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.extend_from_str(lang, &contents);
        Ok(())
    }

    pub fn insert(&mut self, lang: Lang, word: &str) {
        self.sets
            .entry(lang)
            .or_default()
            .insert(normalize(word, None));
    }

    pub fn contains(&self, lang: Lang, word: &str) -> bool {
        self.sets.get(&lang).is_some_and(|s| s.contains(word))
    }

    pub fn len(&self, lang: Lang) -> usize {
        self.sets.get(&lang).map_or(0, HashSet::len)
    }
}

/// Surface form to dictionary form, per language.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LemmaTable {
    maps: BTreeMap<Lang, HashMap<String, String>>,
}

impl LemmaTable {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn bundled() -> Self {
        let mut t = Self::empty();
        t.extend_from_str(Lang::English, LEMMAS_EN)
            .expect("bundled English lemma table is valid");
        t.extend_from_str(Lang::Arabic, LEMMAS_AR)
            .expect("bundled Arabic lemma table is valid");
        t
    }

    /// Parses `surface<TAB>lemma` lines; `#` starts a comment line.
    pub fn extend_from_str(&mut self, lang: Lang, contents: &str) -> Result<()> {
        for (i, line) in contents.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (surface, lemma) = trimmed.split_once('\t').ok_or_else(|| {
                Error::InvalidInput(format!("lemma table line {}: expected surface<TAB>lemma", i + 1))
            })?;
            self.insert(lang, surface.trim(), lemma.trim());
        }
        self.validate(lang)
    }

    pub fn extend_from_file(&mut self, lang: Lang, path: &Path) -> Result<()> {
        let contents = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.extend_from_str(lang, &contents)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
    }

    pub fn insert(&mut self, lang: Lang, surface: &str, lemma: &str) {
        self.maps
            .entry(lang)
            .or_default()
            .insert(normalize(surface, None), normalize(lemma, None));
    }

    /// Every lemma must be its own lemma (or absent as a key).
    pub fn validate(&self, lang: Lang) -> Result<()> {
        let Some(map) = self.maps.get(&lang) else {
            return Ok(());
        };
        let mut bad: Vec<_> = map
            .iter()
            .filter(|(_, lemma)| map.get(*lemma).is_some_and(|l2| l2 != *lemma))
            .map(|(s, l)| format!("{s}->{l}"))
            .collect();
        if bad.is_empty() {
            Ok(())
        } else {
            bad.sort();
            Err(Error::InvalidInput(format!(
                "lemma chains are not allowed: {}",
                bad.join(", ")
            )))
        }
    }

    pub fn get(&self, lang: Lang, surface: &str) -> Option<&str> {
        self.maps.get(&lang)?.get(surface).map(String::as_str)
    }
}
