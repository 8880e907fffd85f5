//! Per-cluster time series of sentiment and engagement, with linear and
//! LSTM forecasts.

mod lstm;
mod ols;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, Datelike, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::seeded_hash;
use crate::sentiment::SentimentResult;
use crate::textprep::CleanPost;
pub use lstm::{forecast_lstm, train_lstm, windows, LstmConfig, LstmModel, Sample, Scaler};
pub use ols::{fit_ols, forecast_ols, OlsFit};

pub const DEFAULT_HORIZON: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bucket {
    #[default]
    Year,
    Month,
}

impl FromStr for Bucket {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "year" | "yearly" => Ok(Bucket::Year),
            "month" | "monthly" => Ok(Bucket::Month),
            other => Err(Error::Config(format!("unknown bucket `{other}` (expected year or month)"))),
        }
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Bucket::Year => "year",
            Bucket::Month => "month",
        })
    }
}

/// A calendar year, or a month counted as `year·12 + (month − 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Period {
    pub bucket: Bucket,
    pub index: i64,
}

impl Period {
    pub fn of(ts: &DateTime<Utc>, bucket: Bucket) -> Self {
        let index = match bucket {
            Bucket::Year => ts.year() as i64,
            Bucket::Month => ts.year() as i64 * 12 + ts.month0() as i64,
        };
        Period { bucket, index }
    }

    pub fn offset(&self, k: i64) -> Self {
        Period { bucket: self.bucket, index: self.index + k }
    }

    /// Parses `2024` or `2024-03`.
    pub fn parse(s: &str, bucket: Bucket) -> Result<Self> {
        let bad = || Error::Config(format!("cannot parse period `{s}` for {bucket} buckets"));
        match bucket {
            Bucket::Year => Ok(Period { bucket, index: s.trim().parse().map_err(|_| bad())? }),
            Bucket::Month => {
                let (y, m) = s.trim().split_once('-').ok_or_else(bad)?;
                let y: i64 = y.parse().map_err(|_| bad())?;
                let m: i64 = m.parse().map_err(|_| bad())?;
                if !(1..=12).contains(&m) {
                    return Err(bad());
                }
                Ok(Period { bucket, index: y * 12 + m - 1 })
            }
        }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.bucket {
            Bucket::Year => write!(f, "{}", self.index),
            Bucket::Month => write!(f, "{}-{:02}", self.index.div_euclid(12), self.index.rem_euclid(12) + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub period: Period,
    /// Absent for periods without posts.
    pub mean_sentiment: Option<f64>,
    pub post_count: usize,
    pub engagement_total: u64,
    pub engagement_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSeries {
    pub cluster_id: i64,
    pub bucket: Bucket,
    pub points: Vec<TrendPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendMetric {
    Sentiment,
    PostCount,
    EngagementTotal,
    EngagementMean,
}

impl TrendMetric {
    pub const FORECAST: [TrendMetric; 3] = [
        TrendMetric::Sentiment,
        TrendMetric::EngagementTotal,
        TrendMetric::EngagementMean,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TrendMetric::Sentiment => "sentiment",
            TrendMetric::PostCount => "post_count",
            TrendMetric::EngagementTotal => "engagement_total",
            TrendMetric::EngagementMean => "engagement_mean",
        }
    }

    fn bounds(&self) -> (f64, f64) {
        match self {
            TrendMetric::Sentiment => (-1.0, 1.0),
            _ => (0.0, f64::INFINITY),
        }
    }

    pub fn value(&self, p: &TrendPoint) -> Option<f64> {
        match self {
            TrendMetric::Sentiment => p.mean_sentiment,
            TrendMetric::PostCount => Some(p.post_count as f64),
            TrendMetric::EngagementTotal => Some(p.engagement_total as f64),
            TrendMetric::EngagementMean => p.engagement_mean,
        }
    }
}

#[derive(Default)]
struct Bin {
    scores: Vec<f64>,
    engagement: u64,
}

/// Aggregates clustered posts per cluster and period. Noise (label −1) is
/// skipped; gaps between the first and last occupied period are filled with
/// empty points.
pub fn build_series(
    posts: &[CleanPost],
    sentiments: &[SentimentResult],
    labels: &[i64],
    bucket: Bucket,
) -> Result<Vec<TrendSeries>> {
    if posts.len() != sentiments.len() || posts.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "series inputs disagree in length: {} posts, {} sentiments, {} labels",
            posts.len(),
            sentiments.len(),
            labels.len()
        )));
    }
    let mut by_cluster: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, (post, s)) in posts.iter().zip(sentiments).enumerate() {
        if post.post.id != s.post_id {
            return Err(Error::InvalidInput(format!(
                "sentiment for `{}` is aligned with post `{}`",
                s.post_id, post.post.id
            )));
        }
        if labels[i] >= 0 {
            by_cluster.entry(labels[i]).or_default().push(i);
        }
    }
    if by_cluster.is_empty() {
        log::warn!("no clustered posts; trend series are empty");
        return Ok(Vec::new());
    }
    let groups: Vec<(i64, Vec<usize>)> = by_cluster.into_iter().collect();
    Ok(groups
        .into_par_iter()
        .map(|(cluster_id, members)| {
            let mut bins: BTreeMap<Period, Bin> = BTreeMap::new();
            for i in members {
                let bin = bins.entry(Period::of(&posts[i].post.timestamp, bucket)).or_default();
                bin.scores.push(sentiments[i].score);
                bin.engagement = bin
                    .engagement
                    .saturating_add(u64::try_from(posts[i].post.engagement.observed_total()).unwrap_or(u64::MAX));
            }
            let first = *bins.keys().next().expect("cluster has members");
            let last = *bins.keys().next_back().expect("cluster has members");
            let points = (first.index..=last.index)
                .map(|index| {
                    let period = Period { bucket, index };
                    match bins.get(&period) {
                        Some(bin) => {
                            let n = bin.scores.len();
                            let lo = bin.scores.iter().copied().fold(f64::INFINITY, f64::min);
                            let hi = bin.scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                            let mean = (bin.scores.iter().sum::<f64>() / n as f64).clamp(lo, hi);
                            TrendPoint {
                                period,
                                mean_sentiment: Some(mean),
                                post_count: n,
                                engagement_total: bin.engagement,
                                engagement_mean: Some(bin.engagement as f64 / n as f64),
                            }
                        }
                        None => TrendPoint {
                            period,
                            mean_sentiment: None,
                            post_count: 0,
                            engagement_total: 0,
                            engagement_mean: None,
                        },
                    }
                })
                .collect();
            TrendSeries { cluster_id, bucket, points }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ols,
    Lstm,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Ols => "ols",
            ModelKind::Lstm => "lstm",
        }
    }
}

/// Which forecasters a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForecastModel {
    #[default]
    Ols,
    Lstm,
    Both,
}

impl FromStr for ForecastModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ols" | "linear" => Ok(ForecastModel::Ols),
            "lstm" => Ok(ForecastModel::Lstm),
            "both" => Ok(ForecastModel::Both),
            other => Err(Error::Config(format!("unknown forecast model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub cluster_id: i64,
    pub metric: TrendMetric,
    pub model: ModelKind,
    pub periods: Vec<Period>,
    pub values: Vec<f64>,
    /// Number of history values the model was fitted on.
    pub history_len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastSettings {
    pub horizon: usize,
    /// First forecast period; defaults to the period after the history.
    pub horizon_start: Option<Period>,
    pub model: ForecastModel,
    pub lstm: LstmConfig,
}

impl Default for ForecastSettings {
    fn default() -> Self {
        ForecastSettings {
            horizon: DEFAULT_HORIZON,
            horizon_start: None,
            model: ForecastModel::Ols,
            lstm: LstmConfig::default(),
        }
    }
}

fn ols_forecast(
    series: &TrendSeries,
    metric: TrendMetric,
    history: &[(f64, f64)],
    start: Period,
    horizon: usize,
) -> Option<Forecast> {
    let first = series.points.first()?.period;
    let fit = match fit_ols(history) {
        Ok(f) => f,
        Err(e) => {
            log::warn!("cluster {} {}: no linear forecast ({e})", series.cluster_id, metric.as_str());
            return None;
        }
    };
    let last_x = (start.index - first.index - 1) as f64;
    Some(Forecast {
        cluster_id: series.cluster_id,
        metric,
        model: ModelKind::Ols,
        periods: (0..horizon as i64).map(|k| start.offset(k)).collect(),
        values: forecast_ols(&fit, last_x, horizon, Some(metric.bounds())),
        history_len: history.len(),
    })
}

/// Forecasts sentiment and engagement for one series. Periods without posts
/// contribute no sentiment observation. An LSTM on a too-short series falls
/// back to a linear forecast.
pub fn forecast_series(series: &TrendSeries, settings: &ForecastSettings, seed: u64) -> Result<Vec<Forecast>> {
    let Some(last) = series.points.last() else {
        return Ok(Vec::new());
    };
    let first = series.points[0].period;
    let start = settings.horizon_start.unwrap_or(last.period.offset(1));
    let mut out = Vec::new();
    for metric in TrendMetric::FORECAST {
        let history: Vec<(f64, f64)> = series
            .points
            .iter()
            .filter_map(|p| metric.value(p).map(|v| ((p.period.index - first.index) as f64, v)))
            .collect();
        let want_ols = matches!(settings.model, ForecastModel::Ols | ForecastModel::Both);
        let want_lstm = matches!(settings.model, ForecastModel::Lstm | ForecastModel::Both);
        if want_ols {
            out.extend(ols_forecast(series, metric, &history, start, settings.horizon));
        }
        if want_lstm {
            let values: Vec<f64> = history.iter().map(|p| p.1).collect();
            let config = LstmConfig {
                seed: seeded_hash(seed, &format!("{}/{}", series.cluster_id, metric.as_str())),
                ..settings.lstm
            };
            match train_lstm(&values, &config) {
                Ok(model) => out.push(Forecast {
                    cluster_id: series.cluster_id,
                    metric,
                    model: ModelKind::Lstm,
                    periods: (0..settings.horizon as i64).map(|k| start.offset(k)).collect(),
                    values: forecast_lstm(&model, &values, settings.horizon, Some(metric.bounds()))?,
                    history_len: values.len(),
                }),
                Err(Error::SeriesTooShort { needed, got }) => {
                    log::warn!(
                        "cluster {} {}: {got} values is too short for the LSTM (needs {needed}); using a linear forecast",
                        series.cluster_id,
                        metric.as_str()
                    );
                    if !want_ols {
                        out.extend(ols_forecast(series, metric, &history, start, settings.horizon));
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

/// Forecasts every series; clusters train independently in parallel.
pub fn forecast_all(series: &[TrendSeries], settings: &ForecastSettings, seed: u64) -> Result<Vec<Forecast>> {
    let per: Vec<Result<Vec<Forecast>>> = series.par_iter().map(|s| forecast_series(s, settings, seed)).collect();
    let mut out = Vec::new();
    for r in per {
        out.extend(r?);
    }
    Ok(out)
}

fn fmt_value(v: f64) -> String {
    format!("{v}")
}

/// Long-format rows `cluster_id,period,metric,value,kind,model`: history
/// first, then forecasts, per cluster.
pub fn write_trends_csv(series: &[TrendSeries], forecasts: &[Forecast], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Internal(format!("{}: {e}", path.display())))?;
    let csv_err = |e: csv::Error| Error::Internal(format!("{}: {e}", path.display()));
    w.write_record(["cluster_id", "period", "metric", "value", "kind", "model"]).map_err(csv_err)?;
    let mut by_cluster: BTreeMap<i64, Vec<&Forecast>> = BTreeMap::new();
    for f in forecasts {
        by_cluster.entry(f.cluster_id).or_default().push(f);
    }
    for s in series {
        let cid = s.cluster_id.to_string();
        for p in &s.points {
            let period = p.period.to_string();
            for metric in [
                TrendMetric::Sentiment,
                TrendMetric::PostCount,
                TrendMetric::EngagementTotal,
                TrendMetric::EngagementMean,
            ] {
                if let Some(v) = metric.value(p) {
                    w.write_record([&cid, &period, metric.as_str(), &fmt_value(v), "history", ""])
                        .map_err(csv_err)?;
                }
            }
        }
        let mut fs = by_cluster.remove(&s.cluster_id).unwrap_or_default();
        fs.sort_by_key(|f| (f.metric, f.model));
        for f in fs {
            for (p, v) in f.periods.iter().zip(&f.values) {
                w.write_record([&cid, &p.to_string(), f.metric.as_str(), &fmt_value(*v), "forecast", f.model.as_str()])
                    .map_err(csv_err)?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}
