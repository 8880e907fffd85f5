//! End-to-end orchestration and the individual stages the CLI exposes.
//!
//! Order: ingest → impute → preprocess → country filter → topic filter →
//! embed → sentiment → cluster → label → trends → forecasts → emissions.
//! Artifacts are written with a `.partial` suffix and renamed once every
//! stage has succeeded; the run report is written last.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::clustering::{hdbscan, label_clusters, ClusterModel};
use crate::config::Config;
use crate::corpus::{impute_missing, ingest_with_range, write_jsonl, Corpus, RawPost};
use crate::error::{Error, Result, StageExt};
use crate::features::{embed_all, fit_vocabulary, load_external_vectors, write_vectors_tsv, FeatureVector};
use crate::filtering::{country_filter, topic_filter, CountryFilterSpec, TopicFilterOutcome, TopicLexicon};
use crate::report::{
    assign_keywords, cluster_rows, emit_cluster_table, emit_json, emit_keyword_frequency, emit_yearly_table,
    keyword_frequency_rows, yearly_table, RunReport, StageCounts, YearlyTable,
};
use crate::sentiment::{
    evaluate, load_external_scores, load_gold_labels, make_split, score_lexicon, sentiment_distribution,
    write_scores_tsv, EvalMetrics, SentimentLexicon, SentimentResult,
};
use crate::textprep::{CleanPost, Lang, Preprocessor};
use crate::trends::{build_series, forecast_all, write_trends_csv, Forecast, TrendSeries};

pub const POSTS_FILE: &str = "posts.jsonl";
pub const CLEAN_FILE: &str = "clean_posts.jsonl";
pub const FILTERED_FILE: &str = "filtered_posts.jsonl";
pub const VECTORS_FILE: &str = "vectors.tsv";
pub const SENTIMENT_FILE: &str = "sentiment.tsv";
pub const SENTIMENT_SHARES_FILE: &str = "sentiment_distribution.json";
pub const EVALUATION_FILE: &str = "sentiment_evaluation.json";
pub const MODEL_FILE: &str = "cluster_model.json";
pub const ASSIGNMENTS_FILE: &str = "cluster_assignments.tsv";
pub const CLUSTERS_FILE: &str = "clusters.csv";
pub const TRENDS_FILE: &str = "trends.csv";
pub const KEYWORDS_CSV: &str = "keyword_frequency.csv";
pub const KEYWORDS_JSON: &str = "keyword_frequency.json";
pub const YEARLY_FILE: &str = "yearly_table.csv";
pub const REPORT_FILE: &str = "run_report.json";

/// Ingests the configured corpus and fills missing fields.
pub fn ingest_stage(cfg: &Config) -> Result<(Corpus, BTreeMap<String, usize>)> {
    let input = cfg
        .input
        .as_ref()
        .ok_or_else(|| Error::Config("no input corpus configured (`input` key or --input)".into()))?;
    let mut corpus = ingest_with_range(input, cfg.input_format()?, &cfg.range()?).stage("ingest")?;
    let imputed = impute_missing(&mut corpus, &cfg.impute_fields().stage("impute")?)
        .into_iter()
        .map(|(f, n)| (format!("{f:?}").to_lowercase(), n))
        .collect();
    Ok((corpus, imputed))
}

/// Bundled language resources plus any configured extensions.
pub fn preprocessor(cfg: &Config) -> Result<Preprocessor> {
    let mut pre = Preprocessor::default();
    for (lang, path) in [(Lang::English, &cfg.stopwords_en), (Lang::Arabic, &cfg.stopwords_ar)] {
        if let Some(p) = path {
            pre.stopwords.extend_from_file(lang, p)?;
        }
    }
    for (lang, path) in [(Lang::English, &cfg.lemmas_en), (Lang::Arabic, &cfg.lemmas_ar)] {
        if let Some(p) = path {
            pre.lemmas.extend_from_file(lang, p)?;
        }
    }
    Ok(pre)
}

pub fn preprocess_stage(pre: &Preprocessor, posts: &[RawPost]) -> Vec<CleanPost> {
    posts.par_iter().map(|p| pre.preprocess(p)).collect()
}

pub fn country_spec(cfg: &Config, pre: &Preprocessor) -> CountryFilterSpec {
    CountryFilterSpec::new(&cfg.geo_names, &cfg.hashtag_keys, &cfg.city_names, pre)
}

pub fn topic_lexicon(cfg: &Config, pre: &Preprocessor) -> Result<TopicLexicon> {
    match &cfg.lexicon {
        Some(p) => TopicLexicon::load(p, pre),
        None => Ok(TopicLexicon::bundled(pre)),
    }
}

pub struct FilterOutcome {
    pub country_kept: usize,
    pub topic: TopicFilterOutcome,
    pub lexicon: TopicLexicon,
}

pub fn filter_stage(cfg: &Config, pre: &Preprocessor, posts: Vec<CleanPost>) -> Result<FilterOutcome> {
    let (kept, _) = country_filter(posts, &country_spec(cfg, pre));
    let country_kept = kept.len();
    let lexicon = topic_lexicon(cfg, pre).stage("topic_filter")?;
    let topic = topic_filter(kept, &lexicon).stage("topic_filter")?;
    Ok(FilterOutcome { country_kept, topic, lexicon })
}

/// Hashed TF-IDF vectors, or configured external vectors. Posts with no
/// external vector get `None`.
pub fn embed_stage(cfg: &Config, posts: &[CleanPost]) -> Result<Vec<Option<FeatureVector>>> {
    match &cfg.external_vectors {
        Some(path) => {
            let ids: Vec<String> = posts.iter().map(|p| p.post.id.clone()).collect();
            let mut ext = load_external_vectors(path, &ids, cfg.coverage()?)?;
            Ok(ids.iter().map(|id| ext.vectors.remove(id)).collect())
        }
        None => {
            if posts.is_empty() {
                return Ok(Vec::new());
            }
            let stats = fit_vocabulary(posts)?;
            Ok(embed_all(posts, &stats, cfg.dimension)?.into_iter().map(Some).collect())
        }
    }
}

pub fn sentiment_lexicon(cfg: &Config, pre: &Preprocessor) -> Result<SentimentLexicon> {
    let mut lex = SentimentLexicon::bundled(pre);
    if let Some(p) = &cfg.sentiment_lexicon {
        let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
        let mut extra = SentimentLexicon::empty();
        extra.extend_from_str(Lang::English, &text, pre)?;
        for (term, w) in extra.terms() {
            lex.insert_term(Lang::for_token(term, Lang::English), term, w)?;
        }
    }
    Ok(lex)
}

/// Sentiment per post, aligned with `posts`.
pub fn sentiment_stage(cfg: &Config, pre: &Preprocessor, posts: &[CleanPost]) -> Result<Vec<SentimentResult>> {
    match &cfg.external_scores {
        Some(path) => {
            let ids: Vec<String> = posts.iter().map(|p| p.post.id.clone()).collect();
            let by_id: BTreeMap<String, SentimentResult> = load_external_scores(path, &ids, cfg.tau)?
                .into_iter()
                .map(|r| (r.post_id.clone(), r))
                .collect();
            Ok(ids
                .into_iter()
                .map(|id| {
                    by_id
                        .get(&id)
                        .cloned()
                        .unwrap_or_else(|| SentimentResult::new(id, 0.0, cfg.tau))
                })
                .collect())
        }
        None => {
            let lex = sentiment_lexicon(cfg, pre)?;
            Ok(posts.par_iter().map(|p| score_lexicon(p, &lex, cfg.tau)).collect())
        }
    }
}

/// Scores the test partition of the configured gold labels, if any.
pub fn evaluation_stage(cfg: &Config, results: &[SentimentResult]) -> Result<Option<EvalMetrics>> {
    let Some(path) = &cfg.gold_sentiment else {
        return Ok(None);
    };
    let gold = load_gold_labels(path)?;
    let scored: BTreeSet<&str> = results.iter().map(|r| r.post_id.as_str()).collect();
    let ids: Vec<String> = gold.keys().filter(|id| scored.contains(id.as_str())).cloned().collect();
    let split = make_split(&ids, cfg.split_ratios(), cfg.seed)?;
    evaluate(results, &gold, &split).map(Some)
}

/// Clusters the posts that have vectors; the others are labelled noise.
pub fn cluster_stage(cfg: &Config, posts: &[CleanPost], vectors: &[Option<FeatureVector>]) -> Result<ClusterModel> {
    let params = cfg.hdbscan()?;
    let present: Vec<usize> = (0..vectors.len()).filter(|&i| vectors[i].is_some()).collect();
    let data: Vec<Vec<f64>> = present
        .iter()
        .map(|&i| vectors[i].as_ref().expect("present").values.clone())
        .collect();
    let mut model = hdbscan(&data, &params).stage("cluster")?;
    if present.len() != vectors.len() {
        let mut labels = vec![-1; vectors.len()];
        for (k, &i) in present.iter().enumerate() {
            labels[i] = model.labels[k];
        }
        model.labels = labels;
    }
    model.summaries = label_clusters(posts, &model.labels, cfg.top_k).stage("label")?;
    Ok(model)
}

pub fn trends_stage(
    cfg: &Config,
    posts: &[CleanPost],
    sentiments: &[SentimentResult],
    labels: &[i64],
) -> Result<(Vec<TrendSeries>, Vec<Forecast>)> {
    let series = build_series(posts, sentiments, labels, cfg.bucket()?).stage("trends")?;
    let forecasts = forecast_all(&series, &cfg.forecast()?, cfg.seed).stage("forecasts")?;
    Ok((series, forecasts))
}

/// Writes JSON lines of preprocessed posts.
pub fn write_clean_posts(posts: &[CleanPost], path: &Path) -> Result<()> {
    let mut buf = String::new();
    for p in posts {
        buf.push_str(&serde_json::to_string(p).map_err(|e| Error::Internal(e.to_string()))?);
        buf.push('\n');
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn read_clean_posts(path: &Path) -> Result<Vec<CleanPost>> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::InvalidInput(format!("{} line {}: {e}", path.display(), i + 1)))?,
        );
    }
    Ok(out)
}

pub fn write_assignments(posts: &[CleanPost], labels: &[i64], path: &Path) -> Result<()> {
    let mut buf = String::new();
    for (p, l) in posts.iter().zip(labels) {
        buf.push_str(&format!("{}\t{l}\n", p.post.id));
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Collects artifact files under their `.partial` names and publishes them
/// together.
pub struct ArtifactSet {
    dir: PathBuf,
    names: Vec<String>,
}

impl ArtifactSet {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(ArtifactSet { dir: dir.to_path_buf(), names: Vec::new() })
    }

    /// The temporary path to write `name` to.
    pub fn partial(&mut self, name: &str) -> PathBuf {
        self.names.push(name.to_string());
        self.dir.join(format!("{name}.partial"))
    }

    /// Renames every partial file to its final name.
    pub fn commit(mut self) -> Result<Vec<String>> {
        let names = std::mem::take(&mut self.names);
        for (k, name) in names.iter().enumerate() {
            let from = self.dir.join(format!("{name}.partial"));
            let to = self.dir.join(name);
            if let Err(e) = fs::rename(&from, &to) {
                self.names = names[k..].to_vec();
                return Err(Error::io(&to, e));
            }
        }
        Ok(names)
    }
}

/// Partial files of a set that was never committed (a failed run) are removed.
impl Drop for ArtifactSet {
    fn drop(&mut self) {
        for name in &self.names {
            let _ = fs::remove_file(self.dir.join(format!("{name}.partial")));
        }
    }
}

fn kept_by_year(posts: &[CleanPost]) -> BTreeMap<i32, usize> {
    let mut m = BTreeMap::new();
    for p in posts {
        *m.entry(p.post.year()).or_insert(0) += 1;
    }
    m
}

/// Yearly table and keyword frequencies from the corpus and topic-filter outcome.
pub fn emit_filter_reports(
    corpus_counts: &BTreeMap<i32, usize>,
    filter: &FilterOutcome,
    arts: &mut ArtifactSet,
) -> Result<YearlyTable> {
    let table = yearly_table(corpus_counts, &kept_by_year(&filter.topic.kept))?;
    emit_yearly_table(&table, &arts.partial(YEARLY_FILE))?;
    let years: BTreeSet<i32> = corpus_counts.keys().copied().collect();
    let rows = keyword_frequency_rows(&filter.topic.hits, &filter.lexicon, &years);
    let csv = arts.partial(KEYWORDS_CSV);
    let json = arts.partial(KEYWORDS_JSON);
    emit_keyword_frequency(&rows, &csv, &json)?;
    Ok(table)
}

/// Runs every stage and writes all artifacts into `out`.
pub fn run_pipeline(cfg: &Config, out: &Path) -> Result<RunReport> {
    cfg.validate()?;
    let mut arts = ArtifactSet::new(out)?;

    let (corpus, imputed) = ingest_stage(cfg)?;
    log::info!("ingested {} posts ({} rejected)", corpus.len(), corpus.rejects.len());
    write_jsonl(&corpus.posts, &arts.partial(POSTS_FILE)).stage("ingest")?;

    let pre = preprocessor(cfg).stage("preprocess")?;
    let clean = preprocess_stage(&pre, &corpus.posts);

    let filter = filter_stage(cfg, &pre, clean).stage("country_filter")?;
    log::info!(
        "country filter kept {}, topic filter kept {}",
        filter.country_kept,
        filter.topic.kept.len()
    );
    let posts = &filter.topic.kept;
    write_clean_posts(posts, &arts.partial(FILTERED_FILE)).stage("topic_filter")?;

    let vectors = embed_stage(cfg, posts).stage("embed")?;
    let present: Vec<FeatureVector> = vectors.iter().flatten().cloned().collect();
    write_vectors_tsv(&present, &arts.partial(VECTORS_FILE)).stage("embed")?;

    let sentiments = sentiment_stage(cfg, &pre, posts).stage("sentiment")?;
    write_scores_tsv(&sentiments, &arts.partial(SENTIMENT_FILE)).stage("sentiment")?;
    let shares = sentiment_distribution(&sentiments).stage("sentiment")?;
    emit_json(&shares, &arts.partial(SENTIMENT_SHARES_FILE)).stage("sentiment")?;
    let evaluation = evaluation_stage(cfg, &sentiments).stage("sentiment")?;
    if let Some(ev) = &evaluation {
        emit_json(ev, &arts.partial(EVALUATION_FILE)).stage("sentiment")?;
    }

    let model = cluster_stage(cfg, posts, &vectors).stage("cluster")?;
    model.write_json(&arts.partial(MODEL_FILE)).stage("cluster")?;
    write_assignments(posts, &model.labels, &arts.partial(ASSIGNMENTS_FILE)).stage("cluster")?;
    let assignment = assign_keywords(posts, &model.labels, &filter.lexicon);
    let clusters = cluster_rows(&model.summaries, &assignment);
    emit_cluster_table(&clusters, &arts.partial(CLUSTERS_FILE)).stage("label")?;

    let (series, forecasts) = trends_stage(cfg, posts, &sentiments, &model.labels)?;
    write_trends_csv(&series, &forecasts, &arts.partial(TRENDS_FILE)).stage("forecasts")?;

    let yearly = emit_filter_reports(&corpus.counts, &filter, &mut arts).stage("emit")?;
    let noise = model.noise_count();
    let counts = StageCounts {
        ingested: corpus.len(),
        rejected: corpus.rejects.len(),
        country_kept: filter.country_kept,
        topic_kept: posts.len(),
        clustered: posts.len() - noise,
        noise,
    };
    let mut artifacts = arts.commit().stage("emit")?;
    artifacts.push(REPORT_FILE.to_string());
    let report = RunReport {
        config: cfg.clone(),
        counts,
        imputed,
        yearly,
        sentiment: shares,
        evaluation,
        clusters,
        artifacts,
    };
    let report_path = out.join(REPORT_FILE);
    let partial = out.join(format!("{REPORT_FILE}.partial"));
    emit_json(&report, &partial).stage("emit")?;
    fs::rename(&partial, &report_path).map_err(|e| Error::io(&report_path, e))?;
    Ok(report)
}

/// Reads `id<TAB>label` cluster assignments.
pub fn read_assignments(path: &Path) -> Result<BTreeMap<String, i64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Error::InvalidInput(format!("{} line {}: expected `id<TAB>label`", path.display(), i + 1));
        let (id, label) = line.split_once('\t').ok_or_else(bad)?;
        let label: i64 = label.trim().parse().map_err(|_| bad())?;
        out.insert(id.to_string(), label);
    }
    Ok(out)
}
