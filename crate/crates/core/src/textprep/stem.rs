use std::sync::LazyLock;

use rust_stemmers::{Algorithm, Stemmer};

use super::Lang;

static ENGLISH: LazyLock<Stemmer> = LazyLock::new(|| Stemmer::create(Algorithm::English));

const MIN_STEM_INPUT: usize = 3;

/// Reduces a normalized token to its stem. Tokens shorter than three letters
/// and hashtags are returned unchanged.
pub fn stem(token: &str, lang: Lang) -> String {
    if token.chars().count() < MIN_STEM_INPUT || token.starts_with('#') {
        return token.to_string();
    }
    match lang {
        Lang::English => ENGLISH.stem(token).into_owned(),
        Lang::Arabic => light_stem_arabic(token),
    }
}

// Article forms, longest first. Bare ب/ك/ل/ف prefixes are only stripped as
// part of an article: on their own they are too often the first root letter.
const ARTICLES: [&str; 6] = ["وال", "بال", "كال", "فال", "لل", "ال"];
const SUFFIXES: [&str; 7] = ["ها", "ان", "ات", "ون", "ين", "ه", "ة"];

/// Light-10 style affix stripping over normalized Arabic text.
pub fn light_stem_arabic(token: &str) -> String {
    let mut w: Vec<char> = token.chars().collect();
    if w.len() < MIN_STEM_INPUT {
        return token.to_string();
    }
    if w[0] == 'و' && w.len() > 3 {
        w.remove(0);
    }
    for art in ARTICLES {
        let a: Vec<char> = art.chars().collect();
        if w.starts_with(&a) && w.len() - a.len() >= 2 {
            w.drain(..a.len());
            break;
        }
    }
    for suf in SUFFIXES {
        let s: Vec<char> = suf.chars().collect();
        if w.ends_with(&s) && w.len() - s.len() >= 2 {
            w.truncate(w.len() - s.len());
        }
    }
    w.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn english_inflections_reduce_to_write() {
        assert_eq!(stem("writing", Lang::English), "write");
        assert_eq!(stem("writes", Lang::English), "write");
    }

    #[test]
    fn english_without_suffix_unchanged() {
        assert_eq!(stem("solar", Lang::English), "solar");
    }

    #[test]
    fn short_tokens_and_hashtags_untouched() {
        assert_eq!(stem("is", Lang::English), "is");
        assert_eq!(stem("#writing", Lang::English), "#writing");
        assert_eq!(stem("ال", Lang::Arabic), "ال");
    }

    #[test]
    fn arabic_article_and_plural_suffix() {
        // ال + طاق + ات
        assert_eq!(stem("الطاقات", Lang::Arabic), "طاق");
        // folded ta marbuta arrives as ه
        assert_eq!(stem("الطاقه", Lang::Arabic), "طاق");
    }

    #[test]
    fn arabic_conjunction_and_prepositional_article() {
        assert_eq!(stem("والمشاريع", Lang::Arabic), "مشاريع");
        assert_eq!(stem("بالطاقه", Lang::Arabic), "طاق");
    }

    #[test]
    fn arabic_keeps_two_letter_minimum() {
        // stripping ال would leave a single letter
        assert_eq!(stem("الم", Lang::Arabic), "الم");
    }
}
