//! Sentiment scoring (lexicon baseline or externally produced scores), the
//! seeded train/validation/test split, and evaluation against gold labels.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::seeded_hash;
use crate::textprep::{CleanPost, Lang, Preprocessor};

pub const DEFAULT_TAU: f64 = 0.1;

const LEXICON_EN: &str = include_str!("../data/sentiment_en.tsv");
const LEXICON_AR: &str = include_str!("../data/sentiment_ar.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentLabel {
    Positive,
    Negative,
    Neutral,
}

impl SentimentLabel {
    pub const ALL: [SentimentLabel; 3] = [
        SentimentLabel::Positive,
        SentimentLabel::Negative,
        SentimentLabel::Neutral,
    ];

    /// `score > tau` is positive, `score < -tau` negative, otherwise neutral.
    pub fn from_score(score: f64, tau: f64) -> Self {
        if score > tau {
            SentimentLabel::Positive
        } else if score < -tau {
            SentimentLabel::Negative
        } else {
            SentimentLabel::Neutral
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SentimentLabel::Positive => "positive",
            SentimentLabel::Negative => "negative",
            SentimentLabel::Neutral => "neutral",
        }
    }

    fn index(&self) -> usize {
        match self {
            SentimentLabel::Positive => 0,
            SentimentLabel::Negative => 1,
            SentimentLabel::Neutral => 2,
        }
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SentimentLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" | "pos" => Ok(SentimentLabel::Positive),
            "negative" | "neg" => Ok(SentimentLabel::Negative),
            "neutral" | "neu" => Ok(SentimentLabel::Neutral),
            other => Err(Error::InvalidInput(format!("unknown sentiment label `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentResult {
    pub post_id: String,
    pub label: SentimentLabel,
    pub score: f64,
}

impl SentimentResult {
    pub fn new(post_id: impl Into<String>, score: f64, tau: f64) -> Self {
        SentimentResult {
            post_id: post_id.into(),
            label: SentimentLabel::from_score(score, tau),
            score,
        }
    }
}

/// Term polarity weights per language.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SentimentLexicon {
    weights: BTreeMap<Lang, HashMap<String, f64>>,
}

impl SentimentLexicon {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn bundled(pre: &Preprocessor) -> Self {
        let mut lex = Self::empty();
        lex.extend_from_str(Lang::English, LEXICON_EN, pre)
            .expect("bundled English sentiment lexicon is valid");
        lex.extend_from_str(Lang::Arabic, LEXICON_AR, pre)
            .expect("bundled Arabic sentiment lexicon is valid");
        lex
    }

    /// Inserts a term already in post-token form.
    pub fn insert_term(&mut self, lang: Lang, term: &str, weight: f64) -> Result<()> {
        if !(-1.0..=1.0).contains(&weight) {
            return Err(Error::InvalidInput(format!(
                "sentiment weight {weight} for `{term}` outside [-1, 1]"
            )));
        }
        self.weights
            .entry(lang)
            .or_default()
            .insert(term.to_string(), weight);
        Ok(())
    }

    /// Parses `term<TAB>weight` lines, mapping each term through the
    /// preprocessing chain so it matches post tokens.
    pub fn extend_from_str(&mut self, lang: Lang, text: &str, pre: &Preprocessor) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (term, w) = line.split_once('\t').ok_or_else(|| {
                Error::InvalidInput(format!("sentiment lexicon line {}: expected term<TAB>weight", i + 1))
            })?;
            let weight: f64 = w.trim().parse().map_err(|_| {
                Error::InvalidInput(format!("sentiment lexicon line {}: bad weight `{w}`", i + 1))
            })?;
            let form = pre.term_form(term);
            if form.is_empty() {
                continue;
            }
            if self.weight(&form).is_some() {
                log::warn!("sentiment term `{term}` collides with an earlier entry; keeping the first");
                continue;
            }
            self.insert_term(lang, &form, weight)?;
        }
        Ok(())
    }

    pub fn extend_from_file(&mut self, lang: Lang, path: &Path, pre: &Preprocessor) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.extend_from_str(lang, &text, pre)
    }

    pub fn weight(&self, term: &str) -> Option<f64> {
        self.weights.values().find_map(|m| m.get(term).copied())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, f64)> {
        self.weights
            .values()
            .flat_map(|m| m.iter().map(|(k, v)| (k.as_str(), *v)))
    }
}

/// Sum of matched term weights over the post's token count, clamped to [-1, 1].
/// Matches are summed per distinct term in sorted order so that the score,
/// and hence the label at the τ boundary, does not depend on word order.
pub fn score_lexicon(post: &CleanPost, lexicon: &SentimentLexicon, tau: f64) -> SentimentResult {
    let mut matched: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for t in post.terms() {
        if let Some(w) = lexicon.weight(t) {
            matched.entry(t).or_insert((w, 0)).1 += 1;
        }
    }
    let sum: f64 = matched.values().map(|&(w, n)| w * n as f64).sum();
    let score = (sum / post.token_count.max(1) as f64).clamp(-1.0, 1.0);
    SentimentResult::new(post.post.id.clone(), score, tau)
}

/// Reads `post_id<TAB>score` rows (further columns are ignored); labels are
/// recomputed from the scores.
pub fn load_external_scores(path: &Path, expected_ids: &[String], tau: f64) -> Result<Vec<SentimentResult>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = i + 1;
        let bad = |m: &str| Error::InvalidInput(format!("{} row {row}: {m}", path.display()));
        let mut cols = line.split('\t');
        let (id, s) = match (cols.next(), cols.next()) {
            (Some(id), Some(s)) => (id, s),
            _ => return Err(bad("expected post_id<TAB>score")),
        };
        let score: f64 = s.trim().parse().map_err(|_| bad("score is not a number"))?;
        if !(-1.0..=1.0).contains(&score) {
            return Err(bad(&format!("score {score} outside [-1, 1]")));
        }
        out.push(SentimentResult::new(id.trim(), score, tau));
    }
    let have: BTreeSet<&str> = out.iter().map(|r| r.post_id.as_str()).collect();
    let missing = expected_ids.iter().filter(|id| !have.contains(id.as_str())).count();
    if missing > 0 {
        log::warn!("{}: {missing} expected ids have no score", path.display());
    }
    Ok(out)
}

pub fn load_gold_labels(path: &Path) -> Result<BTreeMap<String, SentimentLabel>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (id, label) = line.split_once('\t').ok_or_else(|| {
            Error::InvalidInput(format!("{} row {}: expected post_id<TAB>label", path.display(), i + 1))
        })?;
        out.insert(id.trim().to_string(), label.parse()?);
    }
    Ok(out)
}

/// Writes `post_id<TAB>score<TAB>label` rows, readable by [`load_external_scores`].
pub fn write_scores_tsv(results: &[SentimentResult], path: &Path) -> Result<()> {
    let mut buf = String::new();
    for r in results {
        buf.push_str(&format!("{}\t{:?}\t{}\n", r.post_id, r.score, r.label));
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalSplit {
    pub train_ids: Vec<String>,
    pub validation_ids: Vec<String>,
    pub test_ids: Vec<String>,
}

/// Largest-remainder apportionment of `n` items over `ratios`.
pub fn apportion(n: usize, ratios: &[f64]) -> Vec<usize> {
    let quotas: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut sizes: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..ratios.len()).collect();
    // larger fractional part first, earlier slot on ties
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &i in order.iter().cycle().take(n.saturating_sub(assigned)) {
        sizes[i] += 1;
    }
    sizes
}

/// Deterministic split keyed on `hash(seed, id)`, independent of input order.
pub fn make_split(labeled_ids: &[String], ratios: (f64, f64, f64), seed: u64) -> Result<EvalSplit> {
    let uniq: BTreeSet<&str> = labeled_ids.iter().map(String::as_str).collect();
    if uniq.len() != labeled_ids.len() {
        return Err(Error::InvalidInput("labeled ids contain duplicates".into()));
    }
    if labeled_ids.len() < 10 {
        return Err(Error::InvalidInput(format!(
            "need at least 10 labeled ids for a split, got {}",
            labeled_ids.len()
        )));
    }
    let r = [ratios.0, ratios.1, ratios.2];
    if r.iter().any(|x| *x < 0.0) || (r.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Parameter(format!("split ratios {r:?} must be non-negative and sum to 1")));
    }
    let mut keyed: Vec<(u64, &str)> = uniq.iter().map(|id| (seeded_hash(seed, id), *id)).collect();
    keyed.sort_unstable();
    let sizes = apportion(keyed.len(), &r);
    let ids: Vec<String> = keyed.into_iter().map(|(_, id)| id.to_string()).collect();
    let (train, rest) = ids.split_at(sizes[0]);
    let (validation, test) = rest.split_at(sizes[1]);
    Ok(EvalSplit {
        train_ids: train.to_vec(),
        validation_ids: validation.to_vec(),
        test_ids: test.to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub n: usize,
    pub accuracy: f64,
    pub per_class: BTreeMap<SentimentLabel, ClassMetrics>,
    /// Rows are gold labels, columns predictions, both in positive/negative/neutral order.
    pub confusion: [[usize; 3]; 3],
}

/// Scores predictions on the test partition only.
pub fn evaluate(
    results: &[SentimentResult],
    gold: &BTreeMap<String, SentimentLabel>,
    split: &EvalSplit,
) -> Result<EvalMetrics> {
    let predicted: HashMap<&str, SentimentLabel> =
        results.iter().map(|r| (r.post_id.as_str(), r.label)).collect();
    let mut confusion = [[0usize; 3]; 3];
    for id in &split.test_ids {
        let g = gold
            .get(id)
            .ok_or_else(|| Error::InvalidInput(format!("no gold label for test id `{id}`")))?;
        let p = predicted
            .get(id.as_str())
            .ok_or_else(|| Error::InvalidInput(format!("no prediction for test id `{id}`")))?;
        confusion[g.index()][p.index()] += 1;
    }
    let n = split.test_ids.len();
    let correct: usize = (0..3).map(|i| confusion[i][i]).sum();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let per_class = SentimentLabel::ALL
        .iter()
        .map(|&l| {
            let i = l.index();
            let tp = confusion[i][i];
            let support: usize = confusion[i].iter().sum();
            let predicted: usize = (0..3).map(|g| confusion[g][i]).sum();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            (l, ClassMetrics { precision, recall, f1, support })
        })
        .collect();
    Ok(EvalMetrics {
        n,
        accuracy: ratio(correct, n),
        per_class,
        confusion,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentShares {
    pub positive: f64,
    pub negative: f64,
    pub neutral: f64,
    pub n: usize,
}

pub fn sentiment_distribution(results: &[SentimentResult]) -> Result<SentimentShares> {
    if results.is_empty() {
        return Err(Error::InvalidInput("sentiment distribution of zero results".into()));
    }
    let mut counts = [0usize; 3];
    for r in results {
        counts[r.label.index()] += 1;
    }
    let n = results.len() as f64;
    Ok(SentimentShares {
        positive: counts[0] as f64 / n,
        negative: counts[1] as f64 / n,
        neutral: counts[2] as f64 / n,
        n: results.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_timestamp, ObservedEngagement, Platform, RawPost};
    use crate::textprep::ngrams;
    use proptest::prelude::*;
    use std::io::Write;

    fn post_with_tokens(tokens: &[&str]) -> CleanPost {
        let tokens: Vec<String> = tokens.iter().map(|s| s.to_string()).collect();
        CleanPost {
            post: RawPost {
                id: "p".into(),
                platform: Platform::X,
                timestamp: parse_timestamp("2020-01-01").unwrap(),
                text: tokens.join(" "),
                geo: None,
                hashtags: vec![],
                engagement: ObservedEngagement::default(),
                lang_hint: None,
            },
            cleaned_text: tokens.join(" "),
            ngrams: ngrams(&tokens),
            token_count: tokens.len(),
            tokens,
        }
    }

    fn lex(entries: &[(&str, f64)]) -> SentimentLexicon {
        let mut l = SentimentLexicon::empty();
        for (t, w) in entries {
            l.insert_term(Lang::English, t, *w).unwrap();
        }
        l
    }

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("id{i:04}")).collect()
    }

    #[test]
    fn empty_post_is_neutral_zero() {
        let r = score_lexicon(&post_with_tokens(&[]), &lex(&[("great", 1.0)]), DEFAULT_TAU);
        assert_eq!((r.score, r.label), (0.0, SentimentLabel::Neutral));
    }

    #[test]
    fn lexicon_score_examples() {
        let r = score_lexicon(&post_with_tokens(&["great", "solar"]), &lex(&[("great", 1.0)]), 0.1);
        assert_eq!((r.score, r.label), (0.5, SentimentLabel::Positive));
        let r = score_lexicon(
            &post_with_tokens(&["terrible", "delay"]),
            &lex(&[("terrible", -1.0), ("delay", -0.5)]),
            0.1,
        );
        assert_eq!((r.score, r.label), (-0.75, SentimentLabel::Negative));
    }

    #[test]
    fn score_is_clamped() {
        let l = lex(&[("great", 1.0), ("great great", 1.0)]);
        let r = score_lexicon(&post_with_tokens(&["great", "great"]), &l, 0.1);
        assert_eq!(r.score, 1.0);
    }

    #[test]
    fn bundled_lexicon_matches_stemmed_tokens() {
        let pre = Preprocessor::default();
        let l = SentimentLexicon::bundled(&pre);
        assert_eq!(l.weight(&pre.term_form("terrible")), Some(-1.0));
        assert_eq!(l.weight(&pre.term_form("مشكلة")), Some(-0.6));
        assert!(l.terms().all(|(_, w)| (-1.0..=1.0).contains(&w)));
    }

    #[test]
    fn weight_out_of_range_rejected() {
        assert!(SentimentLexicon::empty().insert_term(Lang::English, "x", 1.5).is_err());
    }

    fn tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn external_scores_relabelled() {
        let f = tmp("a\t0.9\nb\t0.05\n");
        let r = load_external_scores(f.path(), &[], 0.1).unwrap();
        assert_eq!(r[0].label, SentimentLabel::Positive);
        assert_eq!(r[1].label, SentimentLabel::Neutral);
    }

    #[test]
    fn external_score_out_of_range_fatal() {
        let f = tmp("a\t0.2\nb\t1.7\n");
        let err = load_external_scores(f.path(), &[], 0.1).unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
    }

    #[test]
    fn split_100_is_exact() {
        let s = make_split(&ids(100), (0.8, 0.1, 0.1), 42).unwrap();
        assert_eq!(
            (s.train_ids.len(), s.validation_ids.len(), s.test_ids.len()),
            (80, 10, 10)
        );
    }

    #[test]
    fn split_101_uses_largest_remainder() {
        // quotas 80.8 / 10.1 / 10.1 -> floors 80/10/10, the spare unit goes to train
        let s = make_split(&ids(101), (0.8, 0.1, 0.1), 42).unwrap();
        assert_eq!(
            (s.train_ids.len(), s.validation_ids.len(), s.test_ids.len()),
            (81, 10, 10)
        );
    }

    #[test]
    fn split_is_deterministic_and_order_free() {
        let a = make_split(&ids(57), (0.8, 0.1, 0.1), 9).unwrap();
        let mut rev = ids(57);
        rev.reverse();
        let b = make_split(&rev, (0.8, 0.1, 0.1), 9).unwrap();
        assert_eq!(a, b);
        let c = make_split(&ids(57), (0.8, 0.1, 0.1), 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn split_too_small_fails() {
        assert!(make_split(&ids(9), (0.8, 0.1, 0.1), 1).is_err());
    }

    fn results_from(labels: &[(&str, SentimentLabel)]) -> Vec<SentimentResult> {
        labels
            .iter()
            .map(|(id, l)| SentimentResult {
                post_id: id.to_string(),
                label: *l,
                score: 0.0,
            })
            .collect()
    }

    #[test]
    fn evaluate_perfect() {
        use SentimentLabel::*;
        let ids = ["a", "b", "c"];
        let gold: BTreeMap<String, SentimentLabel> =
            ids.iter().zip([Positive, Negative, Neutral]).map(|(i, l)| (i.to_string(), l)).collect();
        let res = results_from(&[("a", Positive), ("b", Negative), ("c", Neutral)]);
        let split = EvalSplit {
            train_ids: vec![],
            validation_ids: vec![],
            test_ids: ids.iter().map(|s| s.to_string()).collect(),
        };
        let m = evaluate(&res, &gold, &split).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.confusion, [[1, 0, 0], [0, 1, 0], [0, 0, 1]]);
    }

    #[test]
    fn evaluate_all_neutral_on_50_30_20() {
        use SentimentLabel::*;
        let mut gold = BTreeMap::new();
        let mut res = Vec::new();
        for i in 0..10 {
            let g = if i < 5 { Positive } else if i < 8 { Negative } else { Neutral };
            gold.insert(format!("{i}"), g);
            res.push(SentimentResult { post_id: format!("{i}"), label: Neutral, score: 0.0 });
        }
        let split = EvalSplit { train_ids: vec![], validation_ids: vec![], test_ids: gold.keys().cloned().collect() };
        let m = evaluate(&res, &gold, &split).unwrap();
        assert!((m.accuracy - 0.2).abs() < 1e-12);
    }

    #[test]
    fn evaluate_hand_computed_ten_items() {
        use SentimentLabel::*;
        // gold:  P P P P N N N U U U
        // pred:  P P P N N N P U N U
        let gold_l = [Positive, Positive, Positive, Positive, Negative, Negative, Negative, Neutral, Neutral, Neutral];
        let pred_l = [Positive, Positive, Positive, Negative, Negative, Negative, Positive, Neutral, Negative, Neutral];
        let gold: BTreeMap<String, SentimentLabel> =
            gold_l.iter().enumerate().map(|(i, l)| (format!("{i}"), *l)).collect();
        let res: Vec<SentimentResult> = pred_l
            .iter()
            .enumerate()
            .map(|(i, l)| SentimentResult { post_id: format!("{i}"), label: *l, score: 0.0 })
            .collect();
        let split = EvalSplit { train_ids: vec![], validation_ids: vec![], test_ids: gold.keys().cloned().collect() };
        let m = evaluate(&res, &gold, &split).unwrap();
        // by hand: confusion rows gold P/N/U, cols pred P/N/U
        assert_eq!(m.confusion, [[3, 1, 0], [1, 2, 0], [0, 1, 2]]);
        assert!((m.accuracy - 0.7).abs() < 1e-12);
        let p = m.per_class[&Positive];
        assert!((p.precision - 0.75).abs() < 1e-12);
        assert!((p.recall - 0.75).abs() < 1e-12);
        let n = m.per_class[&Negative];
        assert!((n.precision - 0.5).abs() < 1e-12);
        assert!((n.recall - 2.0 / 3.0).abs() < 1e-12);
        assert!((n.f1 - 4.0 / 7.0).abs() < 1e-12);
        let u = m.per_class[&Neutral];
        assert!((u.precision - 1.0).abs() < 1e-12);
        assert!((u.f1 - 0.8).abs() < 1e-12);
    }

    #[test]
    fn evaluate_missing_gold_fatal() {
        let split = EvalSplit { train_ids: vec![], validation_ids: vec![], test_ids: vec!["x".into()] };
        assert!(evaluate(&[], &BTreeMap::new(), &split).is_err());
    }

    #[test]
    fn distribution_examples() {
        use SentimentLabel::*;
        let mut v = vec![];
        for (l, n) in [(Positive, 5), (Negative, 3), (Neutral, 2)] {
            for i in 0..n {
                v.push(SentimentResult { post_id: format!("{l}{i}"), label: l, score: 0.0 });
            }
        }
        let s = sentiment_distribution(&v).unwrap();
        assert_eq!((s.positive, s.negative, s.neutral), (0.5, 0.3, 0.2));
        v.reverse();
        assert_eq!(sentiment_distribution(&v).unwrap(), s);
        let all_pos = results_from(&[("a", Positive)]);
        let s = sentiment_distribution(&all_pos).unwrap();
        assert_eq!((s.positive, s.negative, s.neutral), (1.0, 0.0, 0.0));
        assert!(sentiment_distribution(&[]).is_err());
    }

    proptest! {
        #![proptest_config(crate::proptest_cases(200))]

        #[test]
        fn labels_recompute_from_scores(score in -1.0f64..=1.0, tau in 0.0f64..0.5) {
            let r = SentimentResult::new("x", score, tau);
            prop_assert_eq!(SentimentLabel::from_score(r.score, tau), r.label);
            match r.label {
                SentimentLabel::Positive => prop_assert!(score > tau),
                SentimentLabel::Negative => prop_assert!(score < -tau),
                SentimentLabel::Neutral => prop_assert!(score.abs() <= tau),
            }
        }

        #[test]
        fn lexicon_score_is_order_free(
            words in prop::collection::vec(prop::sample::select(vec!["great", "bad", "solar", "delay", "wind"]), 0..12),
            seed in any::<u64>(),
        ) {
            let l = lex(&[("great", 0.9), ("bad", -0.7), ("delay", -0.5)]);
            let a = score_lexicon(&post_with_tokens(&words), &l, 0.1);
            let mut shuffled = words.clone();
            let k = if shuffled.is_empty() { 0 } else { (seed as usize) % shuffled.len() };
            shuffled.rotate_left(k);
            shuffled.reverse();
            let b = score_lexicon(&post_with_tokens(&shuffled), &l, 0.1);
            prop_assert!((a.score - b.score).abs() < 1e-12);
            prop_assert_eq!(a.label, b.label);
        }

        #[test]
        fn split_partitions_labeled_set(n in 10usize..400, seed in any::<u64>()) {
            let all = ids(n);
            let s = make_split(&all, (0.8, 0.1, 0.1), seed).unwrap();
            let mut union: Vec<String> = s.train_ids.iter().chain(&s.validation_ids).chain(&s.test_ids).cloned().collect();
            union.sort();
            prop_assert_eq!(union, all);
            for (got, r) in [(s.train_ids.len(), 0.8), (s.validation_ids.len(), 0.1), (s.test_ids.len(), 0.1)] {
                prop_assert!((got as f64 - r * n as f64).abs() <= 1.0);
            }
        }

        #[test]
        fn split_ignores_swaps(n in 10usize..100, i in 0usize..100, j in 0usize..100, seed in any::<u64>()) {
            let a = ids(n);
            let mut b = a.clone();
            b.swap(i % n, j % n);
            prop_assert_eq!(make_split(&a, (0.8, 0.1, 0.1), seed).unwrap(), make_split(&b, (0.8, 0.1, 0.1), seed).unwrap());
        }

        #[test]
        fn shares_sum_to_one(labels in prop::collection::vec(0usize..3, 1..200)) {
            let v: Vec<SentimentResult> = labels.iter().enumerate().map(|(i, l)| SentimentResult {
                post_id: i.to_string(), label: SentimentLabel::ALL[*l], score: 0.0 }).collect();
            let s = sentiment_distribution(&v).unwrap();
            prop_assert!((s.positive + s.negative + s.neutral - 1.0).abs() < 1e-9);
        }
    }
}
