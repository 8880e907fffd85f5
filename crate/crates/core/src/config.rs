//! Run configuration: a flat TOML document whose keys all have defaults.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::clustering::{HdbscanParams, Metric};
use crate::corpus::{CorpusRange, ImputeField, InputFormat};
use crate::error::{Error, Result};
use crate::features::CoveragePolicy;
use crate::trends::{Bucket, ForecastModel, ForecastSettings, LstmConfig, Period};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Corpus file (JSONL or CSV).
    pub input: Option<PathBuf>,
    /// `jsonl` or `csv`; inferred from the extension when absent.
    pub input_format: Option<String>,
    pub range_start: String,
    pub range_end: String,
    pub seed: u64,
    /// Fields to fill when missing: `geo`, `likes`, `comments`, `shares`, `saves`, or `engagement`.
    pub impute_fields: Vec<String>,
    pub stopwords_en: Option<PathBuf>,
    pub stopwords_ar: Option<PathBuf>,
    pub lemmas_en: Option<PathBuf>,
    pub lemmas_ar: Option<PathBuf>,
    pub geo_names: Vec<String>,
    pub hashtag_keys: Vec<String>,
    pub city_names: Vec<String>,
    /// Topic lexicon file; the bundled sustainability lexicon when absent.
    pub lexicon: Option<PathBuf>,
    pub dimension: usize,
    /// Precomputed post vectors (TSV or JSONL) used instead of hashed TF-IDF.
    pub external_vectors: Option<PathBuf>,
    pub coverage: String,
    pub tau: f64,
    /// Extra `term<TAB>weight` entries merged over the bundled sentiment lexicon.
    pub sentiment_lexicon: Option<PathBuf>,
    /// Precomputed `post_id<TAB>score` sentiment used instead of the lexicon.
    pub external_scores: Option<PathBuf>,
    /// `post_id<TAB>label` gold sentiment for the evaluation split.
    pub gold_sentiment: Option<PathBuf>,
    pub split_train: f64,
    pub split_validation: f64,
    pub split_test: f64,
    pub min_cluster_size: usize,
    pub min_samples: Option<usize>,
    pub metric: String,
    pub lambda_epsilon: f64,
    pub top_k: usize,
    pub bucket: String,
    pub horizon: usize,
    pub horizon_start: Option<String>,
    pub forecast_model: String,
    pub lr: f64,
    pub epochs: usize,
    pub window: usize,
    pub hidden: usize,
    pub clip_norm: f64,
}

impl Default for Config {
    fn default() -> Self {
        let lstm = LstmConfig::default();
        let hd = HdbscanParams::default();
        Config {
            input: None,
            input_format: None,
            range_start: "2018-01-01".into(),
            range_end: "2024-12-31".into(),
            seed: DEFAULT_SEED,
            impute_fields: vec!["engagement".into()],
            stopwords_en: None,
            stopwords_ar: None,
            lemmas_en: None,
            lemmas_ar: None,
            geo_names: vec!["saudi arabia".into(), "ksa".into()],
            hashtag_keys: vec!["ksa".into(), "saudi".into()],
            city_names: ["riyadh", "jeddah", "dammam", "mecca", "medina", "neom"]
                .map(String::from)
                .to_vec(),
            lexicon: None,
            dimension: crate::features::DEFAULT_DIMENSION,
            external_vectors: None,
            coverage: "warn".into(),
            tau: crate::sentiment::DEFAULT_TAU,
            sentiment_lexicon: None,
            external_scores: None,
            gold_sentiment: None,
            split_train: 0.8,
            split_validation: 0.1,
            split_test: 0.1,
            min_cluster_size: hd.min_cluster_size,
            min_samples: None,
            metric: "euclidean".into(),
            lambda_epsilon: hd.lambda_epsilon,
            top_k: crate::clustering::DEFAULT_TOP_K,
            bucket: "year".into(),
            horizon: crate::trends::DEFAULT_HORIZON,
            horizon_start: None,
            forecast_model: "ols".into(),
            lr: lstm.learning_rate,
            epochs: lstm.epochs,
            window: lstm.window,
            hidden: lstm.hidden,
            clip_norm: lstm.clip_norm,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file. Relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let Some(base) = path.parent() {
            cfg.resolve_paths(base);
        }
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        for p in [
            &mut self.input,
            &mut self.stopwords_en,
            &mut self.stopwords_ar,
            &mut self.lemmas_en,
            &mut self.lemmas_ar,
            &mut self.lexicon,
            &mut self.external_vectors,
            &mut self.sentiment_lexicon,
            &mut self.external_scores,
            &mut self.gold_sentiment,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    /// Sets one key from its textual form: a TOML literal (`15`, `0.2`,
    /// `["a", "b"]`) or, failing that, a bare string. Unknown keys and
    /// ill-typed values are configuration errors; `self` is unchanged then.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let base = toml::Table::try_from(&*self).map_err(|e| Error::Internal(format!("serializing config: {e}")))?;
        let with = |v: toml::Value| -> std::result::Result<Config, toml::de::Error> {
            let mut table = base.clone();
            table.insert(key.to_string(), v);
            toml::Value::Table(table).try_into()
        };
        let literal = toml::from_str::<toml::Table>(&format!("v = {value}"))
            .ok()
            .and_then(|mut t| t.remove("v"));
        let updated = match literal.map(&with) {
            Some(Ok(c)) => Ok(c),
            _ => with(toml::Value::String(value.to_string())),
        };
        *self = updated.map_err(|e| Error::Config(format!("`{key}`: {e}")))?;
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Internal(format!("serializing config: {e}")))
    }

    pub fn input_format(&self) -> Result<InputFormat> {
        match (&self.input_format, &self.input) {
            (Some(f), _) => f.parse().map_err(|_| Error::Config(format!("unknown input_format `{f}`"))),
            (None, Some(p)) => InputFormat::from_path(p)
                .ok_or_else(|| Error::Config(format!("cannot infer input format of {}", p.display()))),
            (None, None) => Ok(InputFormat::Jsonl),
        }
    }

    pub fn range(&self) -> Result<CorpusRange> {
        let parse = |s: &str| {
            chrono::NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d")
                .map_err(|_| Error::Config(format!("bad date `{s}` (expected YYYY-MM-DD)")))
        };
        let (start, end) = (parse(&self.range_start)?, parse(&self.range_end)?);
        if end < start {
            return Err(Error::Config("range_end precedes range_start".into()));
        }
        Ok(CorpusRange { start, end })
    }

    pub fn impute_fields(&self) -> Result<Vec<ImputeField>> {
        let mut out = Vec::new();
        for f in &self.impute_fields {
            match f.trim() {
                "engagement" => out.extend(ImputeField::ENGAGEMENT),
                "all" => out.extend(ImputeField::ALL),
                other => out.push(other.parse()?),
            }
        }
        Ok(out)
    }

    pub fn coverage(&self) -> Result<CoveragePolicy> {
        match self.coverage.trim().to_ascii_lowercase().as_str() {
            "warn" => Ok(CoveragePolicy::Warn),
            "fail" => Ok(CoveragePolicy::Fail),
            other => Err(Error::Config(format!("unknown coverage policy `{other}`"))),
        }
    }

    pub fn hdbscan(&self) -> Result<HdbscanParams> {
        let metric: Metric = self.metric.parse()?;
        Ok(HdbscanParams {
            min_cluster_size: self.min_cluster_size,
            min_samples: self.min_samples,
            metric,
            lambda_epsilon: self.lambda_epsilon,
        })
    }

    pub fn bucket(&self) -> Result<Bucket> {
        self.bucket.parse()
    }

    pub fn forecast(&self) -> Result<ForecastSettings> {
        let bucket = self.bucket()?;
        let lstm = LstmConfig {
            window: self.window,
            hidden: self.hidden,
            learning_rate: self.lr,
            epochs: self.epochs,
            clip_norm: self.clip_norm,
            seed: self.seed,
        };
        lstm.validate()?;
        Ok(ForecastSettings {
            horizon: self.horizon,
            horizon_start: self.horizon_start.as_deref().map(|s| Period::parse(s, bucket)).transpose()?,
            model: self.forecast_model.parse::<ForecastModel>()?,
            lstm,
        })
    }

    pub fn split_ratios(&self) -> (f64, f64, f64) {
        (self.split_train, self.split_validation, self.split_test)
    }

    /// Checks every derived setting so bad values fail before any work starts.
    pub fn validate(&self) -> Result<()> {
        self.input_format()?;
        self.range()?;
        self.impute_fields()?;
        self.coverage()?;
        self.hdbscan()?;
        self.forecast()?;
        if self.dimension < 2 {
            return Err(Error::Config(format!("dimension must be >= 2, got {}", self.dimension)));
        }
        if !(0.0..1.0).contains(&self.tau) {
            return Err(Error::Config(format!("tau must be in [0, 1), got {}", self.tau)));
        }
        if self.top_k == 0 {
            return Err(Error::Config("top_k must be positive".into()));
        }
        let (a, b, c) = self.split_ratios();
        if [a, b, c].iter().any(|r| *r < 0.0) || (a + b + c - 1.0).abs() > 1e-9 {
            return Err(Error::Config("split ratios must be non-negative and sum to 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_parses_literals_and_strings() {
        let mut c = Config::default();
        c.set("min_cluster_size", "20").unwrap();
        c.set("tau", "0.25").unwrap();
        c.set("metric", "cosine").unwrap();
        c.set("range_start", "2019-01-01").unwrap();
        c.set("impute_fields", r#"["all"]"#).unwrap();
        c.set("input", "data/posts.csv").unwrap();
        assert_eq!(c.min_cluster_size, 20);
        assert_eq!(c.tau, 0.25);
        assert_eq!(c.metric, "cosine");
        assert_eq!(c.range_start, "2019-01-01");
        assert_eq!(c.impute_fields, ["all"]);
        assert_eq!(c.input.as_deref(), Some(Path::new("data/posts.csv")));
        let before = c.clone();
        assert!(matches!(c.set("no_such_key", "1"), Err(Error::Config(_))));
        assert!(matches!(c.set("min_cluster_size", "many"), Err(Error::Config(_))));
        assert_eq!(c, before);
    }

    #[test]
    fn empty_document_gives_defaults() {
        let c = Config::from_toml("").unwrap();
        assert_eq!(c, Config::default());
        c.validate().unwrap();
        assert_eq!(c.dimension, 256);
        assert_eq!(c.tau, 0.1);
        assert_eq!(c.min_cluster_size, 15);
        assert_eq!(c.hdbscan().unwrap().min_samples(), 15);
        assert_eq!(c.forecast().unwrap().horizon, 3);
        assert_eq!(c.lambda_epsilon, 1e-12);
    }

    #[test]
    fn overrides_apply() {
        let c = Config::from_toml("tau = 0.2\nmin_samples = 5\nbucket = \"month\"\nhorizon_start = \"2024-01\"\n").unwrap();
        c.validate().unwrap();
        assert_eq!(c.tau, 0.2);
        assert_eq!(c.hdbscan().unwrap().min_samples(), 5);
        assert_eq!(c.forecast().unwrap().horizon_start.unwrap().to_string(), "2024-01");
    }

    #[test]
    fn unknown_key_rejected() {
        let e = Config::from_toml("dimensoin = 3").unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn bad_values_rejected() {
        for doc in ["metric = \"manhattan\"", "bucket = \"week\"", "dimension = 1", "split_test = 0.5", "coverage = \"maybe\""] {
            let c = Config::from_toml(doc).unwrap();
            assert!(c.validate().is_err(), "{doc}");
        }
    }

    #[test]
    fn round_trips_through_toml() {
        let c = Config { seed: 9, input: Some("corpus.jsonl".into()), ..Config::default() };
        assert_eq!(Config::from_toml(&c.to_toml().unwrap()).unwrap(), c);
    }

    #[test]
    fn relative_paths_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "input = \"data/c.jsonl\"\n").unwrap();
        let c = Config::load(&path).unwrap();
        assert_eq!(c.input.unwrap(), dir.path().join("data/c.jsonl"));
    }
}
