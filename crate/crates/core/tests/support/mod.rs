//! Property checks shared by the `properties` and `acceptance` test targets.
//! Each check runs a deterministic proptest runner for the given number of
//! cases and returns the first counterexample as an error message.

#![allow(dead_code)]

use std::collections::BTreeMap;

use chrono::{TimeZone, Utc};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestError, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use trendmine::clustering::{hdbscan, HdbscanParams};
use trendmine::corpus::{clean_hashtag, EngagementMetrics, ObservedEngagement, Platform, RawPost};
use trendmine::features::{embed_all, fit_vocabulary, l2};
use trendmine::filtering::{country_filter, topic_filter, CountryFilterSpec, TopicLexicon};
use trendmine::sentiment::SentimentResult;
use trendmine::textprep::{ngrams, CleanPost, Preprocessor};
use trendmine::trends::{build_series, Bucket, Period};

pub fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn report<T: std::fmt::Debug>(r: Result<(), TestError<T>>) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

pub fn raw_post(id: &str, text: &str, geo: Option<&str>, year: i32, day: u32) -> RawPost {
    RawPost {
        id: id.to_string(),
        platform: Platform::X,
        timestamp: Utc.with_ymd_and_hms(year, 1 + (day % 12), 1 + (day % 28), 12, 0, 0).unwrap(),
        text: text.to_string(),
        geo: geo.map(str::to_string),
        hashtags: text.split_whitespace().filter(|w| w.starts_with('#')).filter_map(clean_hashtag).collect(),
        engagement: ObservedEngagement::complete(EngagementMetrics { likes: day as u64, comments: 1, shares: 0, saves: 0 }),
        lang_hint: Some("en".into()),
    }
}

/// Words mixing topic vocabulary, country markers and filler.
fn word() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec![
        "solar", "wind", "energy", "renewable", "#KSA", "#Saudi", "Riyadh", "Jeddah", "trees", "carbon", "capture",
        "vision", "2030", "football", "coffee", "#NetZero2060", "#CleanEnergy", "the", "and", "great", "panels",
        "الطاقة", "الشمسية",
    ])
}

fn text() -> impl Strategy<Value = String> {
    prop::collection::vec(word(), 0..14).prop_map(|w| w.join(" "))
}

fn posts(max: usize) -> impl Strategy<Value = Vec<CleanPost>> {
    prop::collection::vec(
        (text(), prop::option::of(prop::sample::select(vec!["Saudi Arabia", "Egypt", "KSA", "India"])), 2018i32..2025, 0u32..400),
        0..max,
    )
    .prop_map(|rows| {
        let pre = Preprocessor::default();
        rows.iter()
            .enumerate()
            .map(|(i, (t, g, y, d))| pre.preprocess(&raw_post(&format!("p{i:03}"), t, *g, *y, *d)))
            .collect()
    })
}

/// `ngrams` has max(0, n−1) + max(0, n−2) entries for raw token lists and
/// for the full preprocessing chain.
pub fn ngram_count_identity(cases: u32) -> Result<(), String> {
    let strategy = (prop::collection::vec("[a-z]{1,6}", 0..40), text());
    report(runner(cases).run(&strategy, |(tokens, t)| {
        let n = tokens.len();
        prop_assert_eq!(ngrams(&tokens).len(), n.saturating_sub(1) + n.saturating_sub(2));
        let clean = Preprocessor::default().preprocess(&raw_post("x", &t, None, 2020, 1));
        let n = clean.tokens.len();
        prop_assert_eq!(clean.ngrams.len(), n.saturating_sub(1) + n.saturating_sub(2));
        prop_assert_eq!(clean.token_count, n);
        Ok(())
    }))
}

/// Adding a lexicon entry never shrinks the kept set, and the country filter
/// is idempotent.
pub fn filter_monotone_idempotent(cases: u32) -> Result<(), String> {
    let strategy = (posts(25), prop::collection::vec(word(), 1..4), word());
    report(runner(cases).run(&strategy, |(posts, base, extra)| {
        let pre = Preprocessor::default();
        let spec = CountryFilterSpec::default();
        let (once, _) = country_filter(posts.clone(), &spec);
        let (twice, dropped) = country_filter(once.clone(), &spec);
        prop_assert_eq!(dropped, 0);
        prop_assert_eq!(&twice, &once);

        let mut lex = TopicLexicon::new("base");
        for w in &base {
            lex.insert(w, &pre);
        }
        let Ok(small) = topic_filter(posts.clone(), &lex) else {
            // entries that normalize to nothing leave an empty lexicon
            return Ok(());
        };
        lex.insert(extra, &pre);
        let large = topic_filter(posts, &lex).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let large_ids: Vec<&str> = large.kept.iter().map(|p| p.post.id.as_str()).collect();
        for p in &small.kept {
            prop_assert!(large_ids.contains(&p.post.id.as_str()), "{} dropped after adding {extra}", p.post.id);
        }
        Ok(())
    }))
}

/// Vector norms are 0 or 1 (±1e-9), and permuting the corpus never changes
/// any post's vector.
pub fn embedding_norm_and_permutation(cases: u32) -> Result<(), String> {
    let strategy = (posts(20).prop_filter("non-empty", |p| !p.is_empty()), any::<u64>(), 2usize..300);
    report(runner(cases).run(&strategy, |(posts, seed, dim)| {
        let stats = fit_vocabulary(&posts).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let vectors = embed_all(&posts, &stats, dim).map_err(|e| TestCaseError::fail(e.to_string()))?;
        for v in &vectors {
            prop_assert_eq!(v.values.len(), dim);
            let n = l2(&v.values);
            prop_assert!(n == 0.0 || (n - 1.0).abs() <= 1e-9, "norm {n}");
        }
        let mut shuffled = posts.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.gen_range(0..=i));
        }
        let stats2 = fit_vocabulary(&shuffled).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let moved = embed_all(&shuffled, &stats2, dim).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let by_id: BTreeMap<&str, &Vec<f64>> = vectors.iter().map(|v| (v.post_id.as_str(), &v.values)).collect();
        for v in &moved {
            let orig = by_id[v.post_id.as_str()];
            prop_assert!(orig.iter().zip(&v.values).all(|(a, b)| a.to_bits() == b.to_bits()), "{}", v.post_id);
        }
        Ok(())
    }))
}

/// Points drawn around `k` separated centres.
pub fn blobs(seed: u64, k: usize, per: usize, dim: usize, spread: f64, sd: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sd).unwrap();
    let mut pts = Vec::new();
    let mut truth = Vec::new();
    for c in 0..k {
        let centre: Vec<f64> = (0..dim).map(|d| if d == c % dim { spread * (1 + c / dim) as f64 } else { 0.0 }).collect();
        for _ in 0..per {
            pts.push(centre.iter().map(|x| x + noise.sample(&mut rng)).collect());
            truth.push(c);
        }
    }
    (pts, truth)
}

/// True when the labelings agree up to renaming, with noise kept as noise.
pub fn same_partition(a: &[i64], b: &[i64]) -> bool {
    let mut fwd = BTreeMap::new();
    let mut back = BTreeMap::new();
    a.len() == b.len()
        && a.iter().zip(b).all(|(&x, &y)| {
            (x < 0) == (y < 0) && *fwd.entry(x).or_insert(y) == y && *back.entry(y).or_insert(x) == x
        })
}

/// Scaling every coordinate by a power of two leaves the cluster partition
/// unchanged up to renaming.
pub fn scaling_invariance(cases: u32) -> Result<(), String> {
    let strategy = (any::<u64>(), 2usize..5, 10usize..25, 2usize..5, 3usize..9, (-6i32..=6).prop_filter("non-identity", |k| *k != 0));
    report(runner(cases).run(&strategy, |(seed, k, per, dim, mcs, exp)| {
        let (pts, _) = blobs(seed, k, per, dim, 6.0, 1.0);
        let factor = 2f64.powi(exp);
        let scaled: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|x| x * factor).collect()).collect();
        let params = HdbscanParams::new(mcs);
        let a = hdbscan(&pts, &params).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let b = hdbscan(&scaled, &params).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(same_partition(&a.labels, &b.labels), "factor {factor}: {:?} vs {:?}", a.labels, b.labels);
        Ok(())
    }))
}

/// Every bucket mean lies within the min/max of the scores it averages, the
/// counts match, and noise posts never contribute.
pub fn bucket_mean_bounds(cases: u32) -> Result<(), String> {
    let row = (2018i32..2025, 0u32..400, -1.0f64..=1.0, -1i64..3);
    let strategy = (prop::collection::vec(row, 1..60), prop::bool::ANY);
    report(runner(cases).run(&strategy, |(rows, monthly)| {
        let bucket = if monthly { Bucket::Month } else { Bucket::Year };
        let pre = Preprocessor::default();
        let posts: Vec<CleanPost> = rows
            .iter()
            .enumerate()
            .map(|(i, (y, d, _, _))| pre.preprocess(&raw_post(&format!("p{i}"), "solar", None, *y, *d)))
            .collect();
        let sentiments: Vec<SentimentResult> =
            rows.iter().enumerate().map(|(i, r)| SentimentResult::new(format!("p{i}"), r.2, 0.1)).collect();
        let labels: Vec<i64> = rows.iter().map(|r| r.3).collect();
        let Ok(series) = build_series(&posts, &sentiments, &labels, bucket) else {
            prop_assert!(labels.iter().all(|l| *l < 0), "build_series failed with clustered posts");
            return Ok(());
        };
        let mut seen = 0;
        for s in &series {
            prop_assert!(s.cluster_id >= 0);
            for pt in &s.points {
                let scores: Vec<f64> = posts
                    .iter()
                    .zip(&rows)
                    .filter(|(p, r)| r.3 == s.cluster_id && Period::of(&p.post.timestamp, bucket) == pt.period)
                    .map(|(_, r)| r.2)
                    .collect();
                prop_assert_eq!(pt.post_count, scores.len());
                seen += scores.len();
                match pt.mean_sentiment {
                    Some(m) => {
                        let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
                        let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                        prop_assert!(lo <= m && m <= hi, "mean {m} outside [{lo}, {hi}]");
                    }
                    None => prop_assert!(scores.is_empty()),
                }
            }
        }
        prop_assert_eq!(seen, labels.iter().filter(|l| **l >= 0).count());
        Ok(())
    }))
}
