//! Post data model, file ingestion (JSONL / CSV) and missing-value imputation.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, Datelike, NaiveDate, NaiveDateTime, TimeZone, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fraction of malformed records above which ingestion gives up.
pub const MAX_REJECT_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Platform {
    X,
    Facebook,
    Instagram,
    TikTok,
    GoogleNews,
    Reddit,
    Other,
}

impl Platform {
    pub fn as_str(&self) -> &'static str {
        match self {
            Platform::X => "x",
            Platform::Facebook => "facebook",
            Platform::Instagram => "instagram",
            Platform::TikTok => "tiktok",
            Platform::GoogleNews => "googlenews",
            Platform::Reddit => "reddit",
            Platform::Other => "other",
        }
    }
}

impl fmt::Display for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Platform {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_alphanumeric())
            .flat_map(char::to_lowercase)
            .collect();
        Ok(match key.as_str() {
            "x" | "twitter" => Platform::X,
            "facebook" | "fb" => Platform::Facebook,
            "instagram" | "ig" => Platform::Instagram,
            "tiktok" => Platform::TikTok,
            "googlenews" | "news" => Platform::GoogleNews,
            "reddit" => Platform::Reddit,
            _ => Platform::Other,
        })
    }
}

/// Complete engagement counts for one post.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngagementMetrics {
    pub likes: u64,
    pub comments: u64,
    pub shares: u64,
    pub saves: u64,
}

impl EngagementMetrics {
    pub fn total(&self) -> u128 {
        self.likes as u128 + self.comments as u128 + self.shares as u128 + self.saves as u128
    }
}

/// Engagement as observed in the source file; any count may be missing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservedEngagement {
    pub likes: Option<u64>,
    pub comments: Option<u64>,
    pub shares: Option<u64>,
    pub saves: Option<u64>,
}

impl ObservedEngagement {
    pub fn complete(m: EngagementMetrics) -> Self {
        ObservedEngagement {
            likes: Some(m.likes),
            comments: Some(m.comments),
            shares: Some(m.shares),
            saves: Some(m.saves),
        }
    }

    /// `Some` only when every count is present.
    pub fn metrics(&self) -> Option<EngagementMetrics> {
        Some(EngagementMetrics {
            likes: self.likes?,
            comments: self.comments?,
            shares: self.shares?,
            saves: self.saves?,
        })
    }

    /// Total over the counts that are present.
    pub fn observed_total(&self) -> u128 {
        [self.likes, self.comments, self.shares, self.saves]
            .iter()
            .flatten()
            .map(|&v| v as u128)
            .sum()
    }

    fn get(&self, field: ImputeField) -> Option<u64> {
        match field {
            ImputeField::Likes => self.likes,
            ImputeField::Comments => self.comments,
            ImputeField::Shares => self.shares,
            ImputeField::Saves => self.saves,
            ImputeField::Geo => None,
        }
    }

    fn slot(&mut self, field: ImputeField) -> Option<&mut Option<u64>> {
        match field {
            ImputeField::Likes => Some(&mut self.likes),
            ImputeField::Comments => Some(&mut self.comments),
            ImputeField::Shares => Some(&mut self.shares),
            ImputeField::Saves => Some(&mut self.saves),
            ImputeField::Geo => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawPost {
    pub id: String,
    pub platform: Platform,
    pub timestamp: DateTime<Utc>,
    pub text: String,
    pub geo: Option<String>,
    /// Lowercase, without the leading `#`.
    pub hashtags: Vec<String>,
    pub engagement: ObservedEngagement,
    pub lang_hint: Option<String>,
}

impl RawPost {
    pub fn year(&self) -> i32 {
        self.timestamp.year()
    }
}

/// Inclusive date window a corpus must fall in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRange {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl Default for CorpusRange {
    fn default() -> Self {
        CorpusRange {
            start: NaiveDate::from_ymd_opt(2018, 1, 1).unwrap(),
            end: NaiveDate::from_ymd_opt(2024, 12, 31).unwrap(),
        }
    }
}

impl CorpusRange {
    pub fn contains(&self, ts: &DateTime<Utc>) -> bool {
        let d = ts.date_naive();
        d >= self.start && d <= self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Jsonl,
    Csv,
}

impl InputFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "jsonl" | "ndjson" | "json" => Some(InputFormat::Jsonl),
            "csv" => Some(InputFormat::Csv),
            _ => None,
        }
    }
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "ndjson" => Ok(InputFormat::Jsonl),
            "csv" => Ok(InputFormat::Csv),
            other => Err(Error::Config(format!("unknown input format `{other}`"))),
        }
    }
}

/// A record that could not be turned into a post.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedRecord {
    /// 1-based line number in the source file.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub sources: Vec<PathBuf>,
    pub ingested_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub posts: Vec<RawPost>,
    pub provenance: Provenance,
    pub counts: BTreeMap<i32, usize>,
    pub rejects: Vec<RejectedRecord>,
}

impl Corpus {
    pub fn from_posts(posts: Vec<RawPost>) -> Self {
        let counts = count_years(&posts);
        Corpus {
            posts,
            provenance: Provenance {
                sources: Vec::new(),
                ingested_at: Utc::now(),
            },
            counts,
            rejects: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }
}

fn count_years(posts: &[RawPost]) -> BTreeMap<i32, usize> {
    let mut counts = BTreeMap::new();
    for p in posts {
        *counts.entry(p.year()).or_insert(0) += 1;
    }
    counts
}

pub fn yearly_counts(corpus: &Corpus) -> BTreeMap<i32, usize> {
    count_years(&corpus.posts)
}

/// Parses an ISO-8601 timestamp. Inputs without an offset are taken as UTC and
/// fractional seconds are dropped.
pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    let dt = if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        dt.with_timezone(&Utc)
    } else if let Ok(dt) = DateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f%z") {
        dt.with_timezone(&Utc)
    } else {
        let naive = ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M"]
            .iter()
            .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
            .or_else(|| {
                NaiveDate::parse_from_str(s, "%Y-%m-%d")
                    .ok()
                    .and_then(|d| d.and_hms_opt(0, 0, 0))
            })?;
        Utc.from_utc_datetime(&naive)
    };
    dt.with_nanosecond(0)
}

/// Lowercases and strips leading `#` marks; `None` when nothing remains.
pub fn clean_hashtag(tag: &str) -> Option<String> {
    let t = tag.trim().trim_start_matches('#').trim().to_lowercase();
    (!t.is_empty()).then_some(t)
}

/// Field values shared by both input formats before validation.
#[derive(Debug, Default, Deserialize)]
struct RawRecord {
    id: Option<String>,
    platform: Option<String>,
    timestamp: Option<String>,
    text: Option<String>,
    geo: Option<String>,
    #[serde(default)]
    hashtags: Option<Vec<String>>,
    likes: Option<i64>,
    comments: Option<i64>,
    shares: Option<i64>,
    saves: Option<i64>,
    lang: Option<String>,
}

fn count_field(name: &str, v: Option<i64>) -> std::result::Result<Option<u64>, String> {
    match v {
        None => Ok(None),
        Some(n) if n < 0 => Err(format!("negative `{name}` count {n}")),
        Some(n) => Ok(Some(n as u64)),
    }
}

fn non_empty(v: Option<String>) -> Option<String> {
    v.map(|s| s.trim().to_string()).filter(|s| !s.is_empty())
}

impl RawRecord {
    fn into_post(self, range: &CorpusRange) -> std::result::Result<RawPost, String> {
        let id = non_empty(self.id).ok_or("missing `id`")?;
        let ts_raw = non_empty(self.timestamp).ok_or("missing `timestamp`")?;
        let timestamp =
            parse_timestamp(&ts_raw).ok_or_else(|| format!("unparseable timestamp `{ts_raw}`"))?;
        if !range.contains(&timestamp) {
            return Err(format!(
                "timestamp {ts_raw} outside {}..{}",
                range.start, range.end
            ));
        }
        let platform = self
            .platform
            .as_deref()
            .map(|p| p.parse().unwrap())
            .unwrap_or(Platform::Other);
        let engagement = ObservedEngagement {
            likes: count_field("likes", self.likes)?,
            comments: count_field("comments", self.comments)?,
            shares: count_field("shares", self.shares)?,
            saves: count_field("saves", self.saves)?,
        };
        Ok(RawPost {
            id,
            platform,
            timestamp,
            text: self.text.unwrap_or_default(),
            geo: non_empty(self.geo),
            hashtags: self
                .hashtags
                .unwrap_or_default()
                .iter()
                .filter_map(|t| clean_hashtag(t))
                .collect(),
            engagement,
            lang_hint: non_empty(self.lang),
        })
    }
}

/// Reads a corpus file. Malformed records are collected in `Corpus::rejects`;
/// ingestion fails only on I/O errors or when more than half the records are bad.
pub fn ingest(path: &Path, format: InputFormat) -> Result<Corpus> {
    ingest_with_range(path, format, &CorpusRange::default())
}

pub fn ingest_with_range(path: &Path, format: InputFormat, range: &CorpusRange) -> Result<Corpus> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let records = match format {
        InputFormat::Jsonl => parse_jsonl(&bytes),
        InputFormat::Csv => parse_csv(&bytes),
    };

    let total = records.len();
    let mut posts = Vec::with_capacity(total);
    let mut rejects = Vec::new();
    let mut seen: HashSet<String> = HashSet::with_capacity(total);
    for (line, rec) in records {
        match rec.and_then(|r| r.into_post(range)) {
            Ok(post) => {
                if seen.insert(post.id.clone()) {
                    posts.push(post);
                } else {
                    rejects.push(RejectedRecord {
                        line,
                        reason: format!("duplicate id `{}`", post.id),
                    });
                }
            }
            Err(reason) => rejects.push(RejectedRecord { line, reason }),
        }
    }

    if total == 0 {
        log::warn!("{}: no records found", path.display());
    }
    if total > 0 && rejects.len() as f64 > MAX_REJECT_FRACTION * total as f64 {
        let samples = rejects
            .iter()
            .take(3)
            .map(|r| format!("line {}: {}", r.line, r.reason))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::Schema {
            path: path.to_path_buf(),
            rejected: rejects.len(),
            total,
            samples,
        });
    }
    if !rejects.is_empty() {
        log::warn!(
            "{}: rejected {} of {} records",
            path.display(),
            rejects.len(),
            total
        );
    }

    let counts = count_years(&posts);
    Ok(Corpus {
        posts,
        provenance: Provenance {
            sources: vec![path.to_path_buf()],
            ingested_at: Utc::now(),
        },
        counts,
        rejects,
    })
}

type ParsedRecord = (usize, std::result::Result<RawRecord, String>);

fn parse_jsonl(bytes: &[u8]) -> Vec<ParsedRecord> {
    let text = String::from_utf8_lossy(bytes);
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let rec = serde_json::from_str::<RawRecord>(l).map_err(|e| format!("bad json: {e}"));
            (i + 1, rec)
        })
        .collect()
}

fn parse_csv(bytes: &[u8]) -> Vec<ParsedRecord> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(bytes);
    let headers = match rdr.headers() {
        Ok(h) => h.clone(),
        Err(e) => return vec![(1, Err(format!("bad header: {e}")))],
    };
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let cols: HashMap<&str, Option<usize>> = [
        "id",
        "platform",
        "timestamp",
        "text",
        "geo",
        "hashtags",
        "likes",
        "comments",
        "shares",
        "saves",
        "lang",
    ]
    .into_iter()
    .map(|k| (k, col(k)))
    .collect();

    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let fallback_line = i + 2;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                let line = e
                    .position()
                    .map(|p| p.line() as usize)
                    .unwrap_or(fallback_line);
                out.push((line, Err(format!("bad csv row: {e}"))));
                continue;
            }
        };
        let line = row
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(fallback_line);
        if row.len() != headers.len() {
            out.push((
                line,
                Err(format!(
                    "expected {} fields, found {}",
                    headers.len(),
                    row.len()
                )),
            ));
            continue;
        }
        let get = |k: &str| -> Option<String> {
            cols[k]
                .and_then(|c| row.get(c))
                .map(str::to_string)
                .filter(|s| !s.trim().is_empty())
        };
        let int = |k: &str| -> std::result::Result<Option<i64>, String> {
            get(k)
                .map(|s| {
                    s.trim()
                        .parse::<i64>()
                        .map_err(|_| format!("`{k}` is not an integer: `{s}`"))
                })
                .transpose()
        };
        let rec = (|| {
            Ok(RawRecord {
                id: get("id"),
                platform: get("platform"),
                timestamp: get("timestamp"),
                text: get("text"),
                geo: get("geo"),
                hashtags: get("hashtags").map(|h| h.split('|').map(str::to_string).collect()),
                likes: int("likes")?,
                comments: int("comments")?,
                shares: int("shares")?,
                saves: int("saves")?,
                lang: get("lang"),
            })
        })();
        out.push((line, rec));
    }
    out
}

/// Serializes posts back to the JSONL input schema.
pub fn write_jsonl(posts: &[RawPost], path: &Path) -> Result<()> {
    let mut buf = String::new();
    for p in posts {
        buf.push_str(&to_record_json(p).to_string());
        buf.push('\n');
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn to_record_json(p: &RawPost) -> serde_json::Value {
    serde_json::json!({
        "id": p.id,
        "platform": p.platform.as_str(),
        "timestamp": p.timestamp.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
        "text": p.text,
        "geo": p.geo,
        "hashtags": p.hashtags,
        "likes": p.engagement.likes,
        "comments": p.engagement.comments,
        "shares": p.engagement.shares,
        "saves": p.engagement.saves,
        "lang": p.lang_hint,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImputeField {
    Geo,
    Likes,
    Comments,
    Shares,
    Saves,
}

impl ImputeField {
    pub const ALL: [ImputeField; 5] = [
        ImputeField::Geo,
        ImputeField::Likes,
        ImputeField::Comments,
        ImputeField::Shares,
        ImputeField::Saves,
    ];

    pub const ENGAGEMENT: [ImputeField; 4] = [
        ImputeField::Likes,
        ImputeField::Comments,
        ImputeField::Shares,
        ImputeField::Saves,
    ];
}

impl FromStr for ImputeField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().trim_start_matches("engagement.") {
            "geo" => Ok(ImputeField::Geo),
            "likes" => Ok(ImputeField::Likes),
            "comments" => Ok(ImputeField::Comments),
            "shares" => Ok(ImputeField::Shares),
            "saves" => Ok(ImputeField::Saves),
            other => Err(Error::Config(format!("unknown imputation field `{other}`"))),
        }
    }
}

/// Most frequent value; ties go to the smallest value.
fn mode<T: Ord + Clone + std::hash::Hash>(values: impl IntoIterator<Item = T>) -> Option<T> {
    let mut freq: HashMap<T, usize> = HashMap::new();
    for v in values {
        *freq.entry(v).or_insert(0) += 1;
    }
    freq.into_iter()
        .max_by(|(a, ca), (b, cb)| ca.cmp(cb).then_with(|| b.cmp(a)))
        .map(|(v, _)| v)
}

/// Fills missing fields with the per-platform mode, falling back to the global
/// mode. Engagement counts with no observations anywhere become 0; geo stays
/// absent. Returns the number of imputed values per field.
pub fn impute_missing(
    corpus: &mut Corpus,
    fields: &[ImputeField],
) -> BTreeMap<ImputeField, usize> {
    let mut report = BTreeMap::new();
    let fields: std::collections::BTreeSet<ImputeField> = fields.iter().copied().collect();
    for field in fields {
        let n = if field == ImputeField::Geo {
            impute_geo(&mut corpus.posts)
        } else {
            impute_count(&mut corpus.posts, field)
        };
        report.insert(field, n);
    }
    report
}

fn impute_geo(posts: &mut [RawPost]) -> usize {
    let mut by_platform: BTreeMap<Platform, Vec<String>> = BTreeMap::new();
    for p in posts.iter() {
        if let Some(g) = &p.geo {
            by_platform.entry(p.platform).or_default().push(g.clone());
        }
    }
    let global = mode(by_platform.values().flatten().cloned());
    let modes: BTreeMap<Platform, String> = by_platform
        .into_iter()
        .filter_map(|(k, v)| mode(v).map(|m| (k, m)))
        .collect();

    let mut n = 0;
    for p in posts.iter_mut().filter(|p| p.geo.is_none()) {
        if let Some(v) = modes.get(&p.platform).or(global.as_ref()) {
            p.geo = Some(v.clone());
            n += 1;
        }
    }
    n
}

fn impute_count(posts: &mut [RawPost], field: ImputeField) -> usize {
    let mut by_platform: BTreeMap<Platform, Vec<u64>> = BTreeMap::new();
    for p in posts.iter() {
        if let Some(v) = p.engagement.get(field) {
            by_platform.entry(p.platform).or_default().push(v);
        }
    }
    let global = mode(by_platform.values().flatten().copied()).unwrap_or(0);
    let modes: BTreeMap<Platform, u64> = by_platform
        .into_iter()
        .filter_map(|(k, v)| mode(v).map(|m| (k, m)))
        .collect();

    let mut n = 0;
    for p in posts.iter_mut() {
        let fill = *modes.get(&p.platform).unwrap_or(&global);
        if let Some(slot) = p.engagement.slot(field) {
            if slot.is_none() {
                *slot = Some(fill);
                n += 1;
            }
        }
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn post(id: &str, platform: Platform, likes: Option<u64>) -> RawPost {
        RawPost {
            id: id.into(),
            platform,
            timestamp: parse_timestamp("2022-06-01T00:00:00Z").unwrap(),
            text: String::new(),
            geo: None,
            hashtags: vec![],
            engagement: ObservedEngagement {
                likes,
                ..Default::default()
            },
            lang_hint: None,
        }
    }

    fn write_tmp(contents: &str, ext: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(ext).tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn jsonl_line(id: Option<&str>, year: i32) -> String {
        let mut v = serde_json::json!({
            "platform": "x",
            "timestamp": format!("{year}-03-04T05:06:07Z"),
            "text": "solar",
            "geo": null,
            "hashtags": ["#KSA"],
            "likes": 1, "comments": null, "shares": 0, "saves": 2,
            "lang": "en"
        });
        if let Some(id) = id {
            v["id"] = id.into();
        }
        v.to_string()
    }

    #[test]
    fn ingest_three_valid_lines() {
        let body = (0..3)
            .map(|i| jsonl_line(Some(&format!("p{i}")), 2020))
            .collect::<Vec<_>>()
            .join("\n");
        let f = write_tmp(&body, ".jsonl");
        let c = ingest(f.path(), InputFormat::Jsonl).unwrap();
        assert_eq!(c.len(), 3);
        assert!(c.rejects.is_empty());
        assert_eq!(c.posts[0].hashtags, vec!["ksa".to_string()]);
        assert_eq!(c.posts[0].engagement.comments, None);
        assert_eq!(c.posts[2].id, "p2");
    }

    #[test]
    fn ingest_empty_file() {
        let f = write_tmp("", ".jsonl");
        let c = ingest(f.path(), InputFormat::Jsonl).unwrap();
        assert!(c.is_empty());
        assert!(c.counts.is_empty());
    }

    #[test]
    fn ingest_rejects_missing_ids_with_line_numbers() {
        // lines 3 and 8 lack an id
        let body = (1..=10)
            .map(|i| {
                let id = format!("p{i}");
                jsonl_line((i != 3 && i != 8).then_some(id.as_str()), 2019)
            })
            .collect::<Vec<_>>()
            .join("\n");
        let f = write_tmp(&body, ".jsonl");
        let c = ingest(f.path(), InputFormat::Jsonl).unwrap();
        assert_eq!(c.len(), 8);
        let lines: Vec<usize> = c.rejects.iter().map(|r| r.line).collect();
        assert_eq!(lines, vec![3, 8]);
    }

    #[test]
    fn ingest_mostly_malformed_is_fatal() {
        let body = ["{", "not json", &jsonl_line(Some("a"), 2020)].join("\n");
        let f = write_tmp(&body, ".jsonl");
        let err = ingest(f.path(), InputFormat::Jsonl).unwrap_err();
        match err {
            Error::Schema {
                rejected, total, samples, ..
            } => {
                assert_eq!((rejected, total), (2, 3));
                assert!(samples.contains("line 1"));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn ingest_missing_file_is_io_error() {
        let err = ingest(Path::new("/nonexistent/x.jsonl"), InputFormat::Jsonl).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn ingest_csv_with_pipe_hashtags() {
        let body = "id,platform,timestamp,text,geo,hashtags,likes,comments,shares,saves,lang\n\
                    a,Instagram,2021-01-02 03:04:05.789,\"Solar, wind\",Saudi Arabia,#KSA|Riyadh,3,,1,0,en\n\
                    b,reddit,2023-05-06,hi,,,,,,,\n";
        let f = write_tmp(body, ".csv");
        let c = ingest(f.path(), InputFormat::Csv).unwrap();
        assert_eq!(c.len(), 2);
        let a = &c.posts[0];
        assert_eq!(a.platform, Platform::Instagram);
        assert_eq!(a.text, "Solar, wind");
        assert_eq!(a.hashtags, vec!["ksa", "riyadh"]);
        assert_eq!(a.engagement.comments, None);
        assert_eq!(a.timestamp.to_rfc3339(), "2021-01-02T03:04:05+00:00");
        assert_eq!(c.posts[1].geo, None);
    }

    #[test]
    fn out_of_range_and_duplicate_records_rejected() {
        let body = [
            jsonl_line(Some("a"), 2017),
            jsonl_line(Some("b"), 2020),
            jsonl_line(Some("b"), 2021),
            jsonl_line(Some("c"), 2024),
        ]
        .join("\n");
        let f = write_tmp(&body, ".jsonl");
        let c = ingest(f.path(), InputFormat::Jsonl).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.rejects.len(), 2);
    }

    #[test]
    fn timestamps_without_zone_are_utc_and_truncated() {
        let t = parse_timestamp("2020-02-03T04:05:06.999").unwrap();
        assert_eq!(t.to_rfc3339(), "2020-02-03T04:05:06+00:00");
        let t = parse_timestamp("2020-02-03T04:05:06+03:00").unwrap();
        assert_eq!(t.to_rfc3339(), "2020-02-03T01:05:06+00:00");
    }

    #[test]
    fn impute_unique_mode() {
        let mut c = Corpus::from_posts(vec![
            post("a", Platform::X, Some(3)),
            post("b", Platform::X, Some(3)),
            post("c", Platform::X, Some(7)),
            post("d", Platform::X, None),
        ]);
        let rep = impute_missing(&mut c, &[ImputeField::Likes]);
        assert_eq!(c.posts[3].engagement.likes, Some(3));
        assert_eq!(rep[&ImputeField::Likes], 1);
    }

    #[test]
    fn impute_tie_takes_smallest() {
        let mut c = Corpus::from_posts(vec![
            post("a", Platform::X, Some(5)),
            post("b", Platform::X, Some(2)),
            post("c", Platform::X, Some(5)),
            post("d", Platform::X, Some(2)),
            post("e", Platform::X, None),
        ]);
        impute_missing(&mut c, &[ImputeField::Likes]);
        assert_eq!(c.posts[4].engagement.likes, Some(2));
    }

    #[test]
    fn impute_falls_back_to_global_then_zero() {
        let mut c = Corpus::from_posts(vec![
            post("a", Platform::X, Some(9)),
            post("b", Platform::Reddit, None),
        ]);
        impute_missing(&mut c, &ImputeField::ENGAGEMENT);
        assert_eq!(c.posts[1].engagement.likes, Some(9));
        assert_eq!(c.posts[1].engagement.saves, Some(0));
        assert!(c.posts.iter().all(|p| p.engagement.metrics().is_some()));
    }

    #[test]
    fn impute_geo_absent_everywhere_stays_absent() {
        let mut c = Corpus::from_posts(vec![post("a", Platform::X, None)]);
        let rep = impute_missing(&mut c, &[ImputeField::Geo]);
        assert_eq!(c.posts[0].geo, None);
        assert_eq!(rep[&ImputeField::Geo], 0);
    }

    #[test]
    fn impute_geo_string_tie_is_lexicographic() {
        let mut posts = vec![
            post("a", Platform::X, None),
            post("b", Platform::X, None),
            post("c", Platform::X, None),
        ];
        posts[0].geo = Some("Saudi Arabia".into());
        posts[1].geo = Some("Egypt".into());
        let mut c = Corpus::from_posts(posts);
        impute_missing(&mut c, &[ImputeField::Geo]);
        assert_eq!(c.posts[2].geo.as_deref(), Some("Egypt"));
    }

    #[test]
    fn yearly_counts_examples() {
        assert!(yearly_counts(&Corpus::from_posts(vec![])).is_empty());
        let c = Corpus::from_posts(vec![post("a", Platform::X, None)]);
        assert_eq!(yearly_counts(&c), BTreeMap::from([(2022, 1)]));
    }

    #[test]
    fn engagement_total_is_wide() {
        let m = EngagementMetrics {
            likes: u64::MAX,
            comments: u64::MAX,
            shares: 1,
            saves: 0,
        };
        assert_eq!(m.total(), 2 * u64::MAX as u128 + 1);
    }

    #[test]
    fn platform_aliases() {
        assert_eq!("Twitter".parse::<Platform>().unwrap(), Platform::X);
        assert_eq!("Tik-tok".parse::<Platform>().unwrap(), Platform::TikTok);
        assert_eq!("Google News".parse::<Platform>().unwrap(), Platform::GoogleNews);
        assert_eq!("myspace".parse::<Platform>().unwrap(), Platform::Other);
    }
}
