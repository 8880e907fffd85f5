//! Report tables and plot-ready data files, and the run summary.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::clustering::ClusterSummary;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::filtering::{format_percent, percent_tenths, KeywordHits, TopicLexicon};
use crate::sentiment::{EvalMetrics, SentimentShares};
use crate::textprep::CleanPost;

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Internal(format!("{}: {e}", path.display()))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Internal(format!("{}: {e}", path.display())))?;
    s.push('\n');
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordRow {
    pub keyword: String,
    pub year: i32,
    pub count: usize,
}

/// Long-format keyword counts: every lexicon entry for every covered year
/// (zeros included), keywords by total descending then alphabetically.
pub fn keyword_frequency_rows(hits: &KeywordHits, lexicon: &TopicLexicon, years: &BTreeSet<i32>) -> Vec<KeywordRow> {
    let mut keywords: Vec<(usize, &str)> = lexicon
        .entries()
        .map(|e| (hits.total(&e.term), e.term.as_str()))
        .collect();
    keywords.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    let mut rows = Vec::with_capacity(keywords.len() * years.len());
    for (_, kw) in keywords {
        let per_year = hits.counts.get(kw);
        for &year in years {
            rows.push(KeywordRow {
                keyword: kw.to_string(),
                year,
                count: per_year.and_then(|m| m.get(&year)).copied().unwrap_or(0),
            });
        }
    }
    rows
}

/// Writes `keyword,year,count` CSV and the same rows as a JSON array.
pub fn emit_keyword_frequency(rows: &[KeywordRow], csv_path: &Path, json_path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(csv_path).map_err(csv_err(csv_path))?;
    w.write_record(["keyword", "year", "count"]).map_err(csv_err(csv_path))?;
    for r in rows {
        w.write_record([r.keyword.as_str(), &r.year.to_string(), &r.count.to_string()])
            .map_err(csv_err(csv_path))?;
    }
    w.flush().map_err(|e| Error::io(csv_path, e))?;
    write_json(&rows, json_path)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearRow {
    pub year: i32,
    pub total: usize,
    /// Kept share in percent, one decimal, rounded half up.
    pub pct: String,
    pub kept: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearlyTable {
    pub rows: Vec<YearRow>,
    pub total: usize,
    pub kept: usize,
    pub pct: String,
}

pub fn yearly_table(corpus_counts: &BTreeMap<i32, usize>, kept_counts: &BTreeMap<i32, usize>) -> Result<YearlyTable> {
    if let Some(y) = kept_counts.keys().find(|y| !corpus_counts.contains_key(y)) {
        return Err(Error::InvalidInput(format!("kept posts in {y} but no corpus posts that year")));
    }
    let mut rows = Vec::new();
    for (&year, &total) in corpus_counts {
        let kept = kept_counts.get(&year).copied().unwrap_or(0);
        if kept > total {
            return Err(Error::InvalidInput(format!("year {year}: {kept} kept exceeds {total} total")));
        }
        let pct = percent_tenths(kept, total).map(format_percent).unwrap_or_else(|| "0.0".into());
        rows.push(YearRow { year, total, pct, kept });
    }
    let total: usize = rows.iter().map(|r| r.total).sum();
    let kept: usize = rows.iter().map(|r| r.kept).sum();
    let pct = percent_tenths(kept, total).map(format_percent).unwrap_or_else(|| "0.0".into());
    Ok(YearlyTable { rows, total, kept, pct })
}

/// `year,total,pct,kept` rows plus a `total` footer row.
pub fn emit_yearly_table(table: &YearlyTable, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["year", "total", "pct", "kept"]).map_err(csv_err(path))?;
    for r in &table.rows {
        w.write_record([r.year.to_string(), r.total.to_string(), r.pct.clone(), r.kept.to_string()])
            .map_err(csv_err(path))?;
    }
    w.write_record(["total".to_string(), table.total.to_string(), table.pct.clone(), table.kept.to_string()])
        .map_err(csv_err(path))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// A cluster row: summary plus the lexicon entries whose matching posts
/// fall mostly in this cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRow {
    pub cluster_id: i64,
    pub name: String,
    pub size: usize,
    pub top_terms: Vec<String>,
    pub keywords_assigned: Vec<String>,
}

/// Assigns each lexicon entry to the cluster holding most of the clustered
/// posts that match it (ties: lowest cluster id). Entries without clustered
/// matches are left out.
pub fn assign_keywords(posts: &[CleanPost], labels: &[i64], lexicon: &TopicLexicon) -> BTreeMap<String, i64> {
    let mut counts: BTreeMap<&str, BTreeMap<i64, usize>> = BTreeMap::new();
    for (post, &label) in posts.iter().zip(labels) {
        if label < 0 {
            continue;
        }
        for e in lexicon.matches_in(post) {
            *counts.entry(e.term.as_str()).or_default().entry(label).or_insert(0) += 1;
        }
    }
    counts
        .into_iter()
        .filter_map(|(term, per)| {
            let best = per.iter().max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))?;
            Some((term.to_string(), *best.0))
        })
        .collect()
}

pub fn cluster_rows(summaries: &[ClusterSummary], assignment: &BTreeMap<String, i64>) -> Vec<ClusterRow> {
    summaries
        .iter()
        .map(|s| ClusterRow {
            cluster_id: s.cluster_id,
            name: s.name.clone(),
            size: s.size,
            top_terms: s.top_terms.iter().map(|(t, _)| t.clone()).collect(),
            keywords_assigned: assignment
                .iter()
                .filter(|(_, c)| **c == s.cluster_id)
                .map(|(k, _)| k.clone())
                .collect(),
        })
        .collect()
}

/// `cluster_id,name,size,top_terms,keywords_assigned` with `; `-joined lists.
pub fn emit_cluster_table(rows: &[ClusterRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["cluster_id", "name", "size", "top_terms", "keywords_assigned"])
        .map_err(csv_err(path))?;
    for r in rows {
        w.write_record([
            r.cluster_id.to_string(),
            r.name.clone(),
            r.size.to_string(),
            r.top_terms.join("; "),
            r.keywords_assigned.join("; "),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn emit_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    write_json(value, path)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub ingested: usize,
    pub rejected: usize,
    pub country_kept: usize,
    pub topic_kept: usize,
    pub clustered: usize,
    pub noise: usize,
}

impl StageCounts {
    /// ingested ≥ country-kept ≥ topic-kept ≥ clustered + noise.
    pub fn is_monotone(&self) -> bool {
        self.ingested >= self.country_kept
            && self.country_kept >= self.topic_kept
            && self.topic_kept >= self.clustered + self.noise
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: Config,
    pub counts: StageCounts,
    pub imputed: BTreeMap<String, usize>,
    pub yearly: YearlyTable,
    pub sentiment: SentimentShares,
    pub evaluation: Option<EvalMetrics>,
    pub clusters: Vec<ClusterRow>,
    /// Emitted files, relative to the output directory.
    pub artifacts: Vec<String>,
}
