//! Fixed-dimension post vectors: signed feature hashing over TF-IDF weights,
//! or vectors produced elsewhere and loaded from file.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::{fnv1a64, mix64};
use crate::textprep::CleanPost;

pub const DEFAULT_DIMENSION: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub post_id: String,
    pub values: Vec<f64>,
    pub norm: f64,
}

impl FeatureVector {
    pub fn new(post_id: impl Into<String>, values: Vec<f64>) -> Self {
        let norm = l2(&values);
        FeatureVector {
            post_id: post_id.into(),
            values,
            norm,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

pub fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (l2(a), l2(b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb)
}

/// Document frequencies over tokens and n-grams.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VocabularyStats {
    pub df: HashMap<String, usize>,
    pub n_docs: usize,
}

impl VocabularyStats {
    pub fn df(&self, term: &str) -> usize {
        self.df.get(term).copied().unwrap_or(0)
    }

    /// `1 + ln(N / df)`, with unseen terms treated as df = 1.
    pub fn idf(&self, term: &str) -> f64 {
        let df = self.df(term).max(1);
        1.0 + (self.n_docs.max(1) as f64 / df as f64).ln()
    }

    fn merge(mut self, other: VocabularyStats) -> VocabularyStats {
        for (t, n) in other.df {
            *self.df.entry(t).or_insert(0) += n;
        }
        self.n_docs += other.n_docs;
        self
    }
}

pub fn fit_vocabulary(posts: &[CleanPost]) -> Result<VocabularyStats> {
    if posts.is_empty() {
        return Err(Error::InvalidInput(
            "cannot fit a vocabulary on zero posts".into(),
        ));
    }
    Ok(posts
        .par_iter()
        .fold(VocabularyStats::default, |mut acc, p| {
            let uniq: HashSet<&str> = p.terms().collect();
            for t in uniq {
                *acc.df.entry(t.to_string()).or_insert(0) += 1;
            }
            acc.n_docs += 1;
            acc
        })
        .reduce(VocabularyStats::default, VocabularyStats::merge))
}

/// Bucket index and sign for a term.
pub fn hash_slot(term: &str, dim: usize) -> (usize, f64) {
    let h = fnv1a64(term.as_bytes());
    let idx = (h % dim as u64) as usize;
    let sign = if mix64(h) >> 63 == 0 { 1.0 } else { -1.0 };
    (idx, sign)
}

/// Signed hashed TF-IDF vector, L2-normalized (zero stays zero).
pub fn embed_hashed_tfidf(post: &CleanPost, stats: &VocabularyStats, dim: usize) -> Result<FeatureVector> {
    if dim < 2 {
        return Err(Error::Parameter(format!("embedding dimension must be >= 2, got {dim}")));
    }
    let mut tf: BTreeMap<&str, usize> = BTreeMap::new();
    for t in post.terms() {
        *tf.entry(t).or_insert(0) += 1;
    }
    let mut values = vec![0.0; dim];
    for (term, count) in tf {
        let (idx, sign) = hash_slot(term, dim);
        values[idx] += sign * count as f64 * stats.idf(term);
    }
    let norm = l2(&values);
    if norm > 0.0 {
        values.iter_mut().for_each(|v| *v /= norm);
    }
    Ok(FeatureVector::new(post.post.id.clone(), values))
}

pub fn embed_all(posts: &[CleanPost], stats: &VocabularyStats, dim: usize) -> Result<Vec<FeatureVector>> {
    posts
        .par_iter()
        .map(|p| embed_hashed_tfidf(p, stats, dim))
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoveragePolicy {
    #[default]
    Warn,
    Fail,
}

#[derive(Debug, Clone, Default)]
pub struct ExternalVectors {
    pub vectors: BTreeMap<String, FeatureVector>,
    pub missing: Vec<String>,
    pub extra: Vec<String>,
    pub dim: usize,
}

#[derive(Deserialize)]
struct VecRow {
    id: String,
    vec: Vec<f64>,
}

/// Loads vectors computed outside this crate: TSV `id<TAB>v1,v2,...` or JSONL
/// `{"id":..,"vec":[..]}`, chosen by file extension.
pub fn load_external_vectors(
    path: &Path,
    expected_ids: &[String],
    policy: CoveragePolicy,
) -> Result<ExternalVectors> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let jsonl = matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("jsonl" | "json" | "ndjson")
    );
    let mut rows: Vec<(usize, String, Vec<f64>)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |msg: String| Error::InvalidInput(format!("{} line {line_no}: {msg}", path.display()));
        let (id, vec) = if jsonl {
            let r: VecRow = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
            (r.id, r.vec)
        } else {
            let (id, rest) = line
                .split_once('\t')
                .ok_or_else(|| bad("expected id<TAB>values".into()))?;
            let vec = rest
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| bad(e.to_string()))?;
            (id.trim().to_string(), vec)
        };
        if vec.iter().any(|v| !v.is_finite()) {
            return Err(bad("non-finite value".into()));
        }
        rows.push((line_no, id, vec));
    }

    let dim = rows.first().map_or(0, |r| r.2.len());
    if let Some((line, _, v)) = rows.iter().find(|r| r.2.len() != dim) {
        return Err(Error::InvalidInput(format!(
            "{} line {line}: dimension {} differs from {dim}",
            path.display(),
            v.len()
        )));
    }

    let expected: BTreeSet<&str> = expected_ids.iter().map(String::as_str).collect();
    let mut out = ExternalVectors {
        dim,
        ..Default::default()
    };
    for (_, id, vec) in rows {
        if expected.contains(id.as_str()) {
            out.vectors.insert(id.clone(), FeatureVector::new(id, vec));
        } else {
            out.extra.push(id);
        }
    }
    out.missing = expected
        .iter()
        .filter(|id| !out.vectors.contains_key(**id))
        .map(|s| s.to_string())
        .collect();

    if !out.extra.is_empty() {
        log::warn!(
            "{}: ignoring {} vectors for unknown ids",
            path.display(),
            out.extra.len()
        );
    }
    if !out.missing.is_empty() {
        let msg = format!(
            "{}: {} of {} expected ids have no vector (first: {})",
            path.display(),
            out.missing.len(),
            expected.len(),
            out.missing[0]
        );
        match policy {
            CoveragePolicy::Warn => log::warn!("{msg}"),
            CoveragePolicy::Fail => return Err(Error::InvalidInput(msg)),
        }
    }
    Ok(out)
}

/// Writes vectors as TSV in the external-vector format.
pub fn write_vectors_tsv(vectors: &[FeatureVector], path: &Path) -> Result<()> {
    let mut buf = String::new();
    for v in vectors {
        buf.push_str(&v.post_id);
        buf.push('\t');
        let vals: Vec<String> = v.values.iter().map(|x| format!("{x:?}")).collect();
        buf.push_str(&vals.join(","));
        buf.push('\n');
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_timestamp, ObservedEngagement, Platform, RawPost};
    use crate::textprep::Preprocessor;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use std::io::Write;

    fn clean(id: &str, text: &str) -> CleanPost {
        let raw = RawPost {
            id: id.into(),
            platform: Platform::X,
            timestamp: parse_timestamp("2021-05-05").unwrap(),
            text: text.into(),
            geo: None,
            hashtags: vec![],
            engagement: ObservedEngagement::default(),
            lang_hint: None,
        };
        Preprocessor::default().preprocess(&raw)
    }

    fn tmp(contents: &str, ext: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(ext).tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn vocabulary_examples() {
        let s = fit_vocabulary(&[clean("a", "solar"), clean("b", "solar panels")]).unwrap();
        assert_eq!((s.df("solar"), s.n_docs), (2, 2));
        let s = fit_vocabulary(&[clean("a", "wind"), clean("b", "x"), clean("c", "y")]).unwrap();
        assert_eq!((s.df("wind"), s.n_docs), (1, 3));
        assert!(fit_vocabulary(&[]).is_err());
    }

    #[test]
    fn empty_post_embeds_to_zero() {
        let stats = fit_vocabulary(&[clean("a", "solar")]).unwrap();
        let v = embed_hashed_tfidf(&clean("e", ""), &stats, 64).unwrap();
        assert!(v.values.iter().all(|&x| x == 0.0));
        assert_eq!(v.norm, 0.0);
    }

    #[test]
    fn identical_posts_identical_vectors() {
        let posts = [clean("a", "solar wind farm"), clean("b", "solar wind farm")];
        let stats = fit_vocabulary(&posts).unwrap();
        let a = embed_hashed_tfidf(&posts[0], &stats, 256).unwrap();
        let b = embed_hashed_tfidf(&posts[1], &stats, 256).unwrap();
        assert_eq!(a.values, b.values);
        assert!((a.norm - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dimension_below_two_rejected() {
        let stats = fit_vocabulary(&[clean("a", "solar")]).unwrap();
        assert!(embed_hashed_tfidf(&clean("a", "solar"), &stats, 1).is_err());
    }

    #[test]
    fn disjoint_vocabularies_are_nearly_orthogonal() {
        // Oracle: draw disjoint random vocabularies and measure cosine empirically.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let word = |rng: &mut rand_chacha::ChaCha8Rng, prefix: char| -> String {
            let body: String = (0..6).map(|_| rng.gen_range(b'a'..=b'z') as char).collect();
            format!("{prefix}{body}")
        };
        let trials = 200;
        let mut below = 0;
        for i in 0..trials {
            let a: Vec<String> = (0..8).map(|_| word(&mut rng, 'q')).collect();
            let b: Vec<String> = (0..8).map(|_| word(&mut rng, 'z')).collect();
            let pa = clean(&format!("a{i}"), &a.join(" "));
            let pb = clean(&format!("b{i}"), &b.join(" "));
            let stats = fit_vocabulary(&[pa.clone(), pb.clone()]).unwrap();
            let va = embed_hashed_tfidf(&pa, &stats, 4096).unwrap();
            let vb = embed_hashed_tfidf(&pb, &stats, 4096).unwrap();
            if cosine(&va.values, &vb.values).abs() < 0.1 {
                below += 1;
            }
        }
        assert!(below as f64 / trials as f64 >= 0.99, "{below}/{trials}");
    }

    #[test]
    fn hash_slots_are_fixed_constants() {
        // Frozen so vectors stay bit-reproducible across releases.
        assert_eq!(hash_slot("solar", 256), hash_slot("solar", 256));
        let (i, _) = hash_slot("foobar", 1 << 16);
        assert_eq!(i as u64, 0x8594_4171_f739_67e8 % (1 << 16));
    }

    #[test]
    fn external_tsv_roundtrip() {
        let f = tmp("a\t0.1,0.2,0.3\nb\t1,2,3\nc\t0,0,1\n", ".tsv");
        let ids: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let ev = load_external_vectors(f.path(), &ids, CoveragePolicy::Warn).unwrap();
        assert_eq!(ev.vectors.len(), 3);
        assert_eq!(ev.dim, 3);
        assert!((ev.vectors["b"].norm - 14f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn external_jsonl_dimension_mismatch_fatal() {
        let f = tmp(
            "{\"id\":\"a\",\"vec\":[1,2,3]}\n{\"id\":\"b\",\"vec\":[1,2]}\n",
            ".jsonl",
        );
        let ids = vec!["a".to_string(), "b".to_string()];
        let err = load_external_vectors(f.path(), &ids, CoveragePolicy::Warn).unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn external_coverage_warn_or_fail() {
        let f = tmp("a\t1,0\nb\t0,1\nc\t1,1\nd\t0,0\nz\t1,1\n", ".tsv");
        let ids: Vec<String> = ["a", "b", "c", "d", "e"].iter().map(|s| s.to_string()).collect();
        let ev = load_external_vectors(f.path(), &ids, CoveragePolicy::Warn).unwrap();
        assert_eq!(ev.missing, vec!["e".to_string()]);
        assert_eq!(ev.extra, vec!["z".to_string()]);
        assert_eq!(ev.vectors.len(), 4);
        assert!(load_external_vectors(f.path(), &ids, CoveragePolicy::Fail).is_err());
    }

    fn text_strategy() -> impl Strategy<Value = String> {
        prop::collection::vec(
            prop::sample::select(vec![
                "solar", "wind", "energy", "renewable", "green", "vision", "2030", "#ksa",
                "carbon", "capture", "plant", "the", "growth", "afforestation", "net", "zero",
            ]),
            0..12,
        )
        .prop_map(|v| v.join(" "))
    }

    proptest! {
        #![proptest_config(crate::proptest_cases(128))]

        #[test]
        fn df_never_exceeds_n(texts in prop::collection::vec(text_strategy(), 1..25)) {
            let posts: Vec<CleanPost> = texts.iter().enumerate().map(|(i, t)| clean(&i.to_string(), t)).collect();
            let stats = fit_vocabulary(&posts).unwrap();
            prop_assert_eq!(stats.n_docs, posts.len());
            for &df in stats.df.values() {
                prop_assert!(df >= 1 && df <= stats.n_docs);
            }
        }

        #[test]
        fn norm_is_zero_or_one(texts in prop::collection::vec(text_strategy(), 1..15), dim in 2usize..300) {
            let posts: Vec<CleanPost> = texts.iter().enumerate().map(|(i, t)| clean(&i.to_string(), t)).collect();
            let stats = fit_vocabulary(&posts).unwrap();
            for v in embed_all(&posts, &stats, dim).unwrap() {
                prop_assert_eq!(v.dim(), dim);
                prop_assert!((v.norm - l2(&v.values)).abs() < 1e-9);
                prop_assert!(v.norm == 0.0 || (v.norm - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn permutation_does_not_change_vectors(
            texts in prop::collection::vec(text_strategy(), 2..15),
            rot in 0usize..15,
        ) {
            let posts: Vec<CleanPost> = texts.iter().enumerate().map(|(i, t)| clean(&i.to_string(), t)).collect();
            let stats = fit_vocabulary(&posts).unwrap();
            let mut shuffled = posts.clone();
            shuffled.rotate_left(rot % posts.len());
            shuffled.reverse();
            let stats2 = fit_vocabulary(&shuffled).unwrap();
            prop_assert_eq!(&stats.df, &stats2.df);
            let a: BTreeMap<String, Vec<f64>> = embed_all(&posts, &stats, 64).unwrap().into_iter().map(|v| (v.post_id, v.values)).collect();
            let b: BTreeMap<String, Vec<f64>> = embed_all(&shuffled, &stats2, 64).unwrap().into_iter().map(|v| (v.post_id, v.values)).collect();
            prop_assert_eq!(a, b);
        }
    }
}
