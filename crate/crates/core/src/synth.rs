//! Deterministic labeled synthetic corpus.
//!
//! Posts are assembled from per-topic keyword pools (the bundled lexicon's
//! four keyword groups), topic context words, neutral filler, and sentiment
//! words. Yearly totals and relevant-post counts, the sentiment mix, and the
//! topic of every relevant post are fixed by the spec, so the full pipeline
//! can be checked quantitatively against known aggregates. Every generated
//! post is checked against the bundled filters and sentiment lexicon and
//! regenerated if it would land in the wrong bucket.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, NaiveDate, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{write_jsonl, EngagementMetrics, ObservedEngagement, Platform, RawPost};
use crate::error::{Error, Result};
use crate::filtering::{CountryFilterSpec, TopicLexicon};
use crate::sentiment::{apportion, score_lexicon, SentimentLabel, SentimentLexicon, DEFAULT_TAU};
use crate::textprep::Preprocessor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearSpec {
    pub year: i32,
    pub total: usize,
    /// Fraction of the year's posts that are relevant (country and topic).
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Template {
    pub name: String,
    /// Lexicon entries as written in the lexicon file.
    pub keywords: Vec<String>,
    pub context: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub seed: u64,
    pub years: Vec<YearSpec>,
    /// Positive, negative, neutral fractions of the relevant posts.
    pub sentiment_mix: (f64, f64, f64),
    pub templates: Vec<Template>,
    /// Fraction of irrelevant posts that use topic vocabulary but come from
    /// outside the country.
    pub noise_fraction: f64,
}

/// Context words drawn per topical post.
const CONTEXT_WORDS: usize = 8;

fn strs(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// The four keyword groups of the bundled sustainability lexicon.
pub fn default_templates() -> Vec<Template> {
    vec![
        Template {
            name: "Renewable Energy Initiatives".into(),
            keywords: strs(&[
                "#RenewableEnergy",
                "#CleanEnergy",
                "#SolarPower",
                "Renewable energy",
                "Solar power",
                "Wind energy",
                "Sakaka solar plant",
                "Dumat Al Jandal wind farm",
                "NEOM eco-city project",
                "#الطاقة_المتجددة",
                "#الطاقة_النظيفة",
                "#الطاقة_الشمسية",
            ]),
            context: strs(&[
                "panels", "turbines", "megawatts", "grid", "photovoltaic", "electricity", "capacity",
                "installation", "generation", "rooftop",
            ]),
        },
        Template {
            name: "Vision 2030 and Economic Growth".into(),
            keywords: strs(&[
                "#Vision2030",
                "Vision 2030",
                "National Transformation Program",
                "Economic diversification",
                "Sustainable growth",
                "Green economy transition",
                "#رؤية_2030",
                "#نيوم",
                "#الاقتصاد_الأخضر",
            ]),
            context: strs(&[
                "investment", "reform", "jobs", "tourism", "privatization", "entrepreneurs", "industry",
                "startups", "gdp", "exports",
            ]),
        },
        Template {
            name: "Environmental Protection".into(),
            keywords: strs(&[
                "#SaudiGreenInitiative",
                "#SGI",
                "Saudi Green Initiative",
                "#GreenSaudi",
                "#SustainableSaudi",
                "Afforestation",
                "#AfforestationProject",
                "#DesertificationControl",
                "#Desertification",
                "#LandAndSeaProtection",
                "#30LandAndSeaProtectionBy2030",
                "#10BillionTreesPlantingInitiative",
                "#NewAfforestationCampaign",
                "#المبادرة_السعودية_الخضراء",
                "#استدامة_السعودية",
            ]),
            context: strs(&[
                "trees", "seedlings", "mangroves", "reserves", "wildlife", "habitat", "planting",
                "biodiversity", "rangelands", "conservation",
            ]),
        },
        Template {
            name: "Climate Action and Carbon Reduction".into(),
            keywords: strs(&[
                "#ClimateAction",
                "#CircularCarbonEconomy",
                "Circular Carbon Economy",
                "#NetZero2060",
                "#CarbonCapture",
                "Carbon capture and storage",
                "CCS",
                "Emissions reduction",
                "#ClimateChangeMitigation",
                "Climate change mitigation",
                "Net zero emissions by 2060",
                "#الاقتصاد_الدائري_للكربون",
                "#صافي_الصفير_2060",
            ]),
            context: strs(&[
                "hydrogen", "methane", "footprint", "decarbonization", "sequestration", "offsets",
                "warming", "temperatures", "flaring", "pledges",
            ]),
        },
    ]
}

impl Default for SynthSpec {
    fn default() -> Self {
        let rows = [
            (2018, 3000, 0.08),
            (2019, 3500, 0.10),
            (2020, 4000, 0.12),
            (2021, 5000, 0.15),
            (2022, 5500, 0.18),
            (2023, 4500, 0.20),
            (2024, 4500, 0.22),
        ];
        SynthSpec {
            seed: crate::config::DEFAULT_SEED,
            years: rows
                .iter()
                .map(|&(year, total, share)| YearSpec { year, total, share })
                .collect(),
            sentiment_mix: (0.5, 0.3, 0.2),
            templates: default_templates(),
            noise_fraction: 0.2,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.templates.len() < 2 {
            return Err(Error::InvalidInput("need at least 2 templates".into()));
        }
        if let Some(t) = self.templates.iter().find(|t| t.keywords.len() < 2 || t.context.len() < 3) {
            return Err(Error::InvalidInput(format!(
                "template `{}` needs at least 2 keywords and 3 context words",
                t.name
            )));
        }
        if let Some(y) = self.years.iter().find(|y| !(0.0..=1.0).contains(&y.share)) {
            return Err(Error::InvalidInput(format!("share {} for {} is outside [0, 1]", y.share, y.year)));
        }
        let (p, n, u) = self.sentiment_mix;
        if [p, n, u].iter().any(|x| *x < 0.0) || (p + n + u - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput("sentiment mix must be non-negative and sum to 1".into()));
        }
        if !(0.0..=1.0).contains(&self.noise_fraction) {
            return Err(Error::InvalidInput("noise_fraction must be in [0, 1]".into()));
        }
        Ok(())
    }

    /// Relevant posts per year: `total · share`, rounded half up.
    pub fn relevant_per_year(&self) -> BTreeMap<i32, usize> {
        self.years
            .iter()
            .map(|y| (y.year, (y.total as f64 * y.share + 0.5 + 1e-9).floor() as usize))
            .collect()
    }
}

const POSITIVE: &[&str] = &[
    "excellent", "great", "amazing", "proud", "inspiring", "brilliant", "wonderful", "thrilled", "impressive",
    "love", "happy", "success",
];
const NEGATIVE: &[&str] = &[
    "terrible", "awful", "failure", "corruption", "useless", "disappointing", "crisis", "angry",
];
const FILLER: &[&str] = &[
    "today", "people", "news", "week", "update", "thread", "watch", "read", "story", "morning", "community",
    "local", "public", "plan", "report", "announced", "discussed", "shared", "latest", "details",
];
const OFF_TOPIC: &[&str] = &[
    "football", "match", "coffee", "restaurant", "traffic", "weather", "concert", "shopping", "movie", "festival",
    "weekend", "family", "travel", "beach", "league", "goal", "recipe", "dinner", "mall", "holiday", "phone",
    "game", "music", "fashion", "car", "school", "exam", "birthday", "wedding", "camel",
];
const OFF_TOPIC_AR: &[&str] = &["كرة", "مباراة", "قهوة", "مطعم", "زحمة", "طقس", "حفلة", "تسوق", "فيلم", "عائلة"];
const CITIES: &[&str] = &["Riyadh", "Jeddah", "Dammam", "Mecca", "Medina"];
const SAUDI_TAGS: &[&str] = &["#KSA", "#Saudi"];
const FOREIGN_GEO: &[&str] = &["United Arab Emirates", "Egypt", "United Kingdom", "India", "United States", "Jordan"];
const PLATFORMS: &[Platform] = &[Platform::X, Platform::Instagram, Platform::Facebook, Platform::TikTok, Platform::GoogleNews];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Relevant { template: usize, sentiment: SentimentLabel },
    NearMiss,
    LocalOffTopic,
    ForeignOffTopic,
}

/// A generated corpus with its gold annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub posts: Vec<RawPost>,
    pub gold_sentiment: BTreeMap<String, SentimentLabel>,
    /// Template index per relevant post.
    pub gold_clusters: BTreeMap<String, usize>,
    pub template_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthPaths {
    pub corpus: PathBuf,
    pub gold_sentiment: PathBuf,
    pub gold_clusters: PathBuf,
}

impl SynthCorpus {
    /// Writes `corpus.jsonl`, `gold_sentiment.tsv` and `gold_clusters.tsv`.
    pub fn write(&self, dir: &Path) -> Result<SynthPaths> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let paths = SynthPaths {
            corpus: dir.join("corpus.jsonl"),
            gold_sentiment: dir.join("gold_sentiment.tsv"),
            gold_clusters: dir.join("gold_clusters.tsv"),
        };
        write_jsonl(&self.posts, &paths.corpus)?;
        let mut s = String::new();
        for (id, l) in &self.gold_sentiment {
            s.push_str(&format!("{id}\t{l}\n"));
        }
        fs::write(&paths.gold_sentiment, s).map_err(|e| Error::io(&paths.gold_sentiment, e))?;
        let mut s = String::new();
        for (id, t) in &self.gold_clusters {
            s.push_str(&format!("{id}\t{t}\n"));
        }
        fs::write(&paths.gold_clusters, s).map_err(|e| Error::io(&paths.gold_clusters, e))?;
        Ok(paths)
    }
}

/// Reads `post_id<TAB>template` rows.
pub fn load_gold_clusters(path: &Path) -> Result<BTreeMap<String, usize>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let bad = || Error::InvalidInput(format!("{} row {}: expected post_id<TAB>template", path.display(), i + 1));
            let (id, t) = l.split_once('\t').ok_or_else(bad)?;
            Ok((id.to_string(), t.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

struct Checker {
    pre: Preprocessor,
    country: CountryFilterSpec,
    topic: TopicLexicon,
    sentiment: SentimentLexicon,
}

impl Checker {
    fn new() -> Self {
        let pre = Preprocessor::default();
        Checker {
            country: CountryFilterSpec::default(),
            topic: TopicLexicon::bundled(&pre),
            sentiment: SentimentLexicon::bundled(&pre),
            pre,
        }
    }

    fn accepts(&self, post: &RawPost, kind: Kind) -> bool {
        let clean = self.pre.preprocess(post);
        let relevant = self.country.matches(&clean) && !self.topic.matches_in(&clean).is_empty();
        match kind {
            Kind::Relevant { sentiment, .. } => {
                relevant && score_lexicon(&clean, &self.sentiment, DEFAULT_TAU).label == sentiment
            }
            _ => !relevant,
        }
    }
}

/// The template's own slice of a shared word pool (every `n`-th word), so
/// that topics do not share incidental vocabulary; the whole pool when the
/// slice would hold fewer than `min` words.
fn share_of<'a>(pool: &[&'a str], template: usize, n: usize, min: usize) -> Vec<&'a str> {
    let slice: Vec<&str> = pool.iter().skip(template % n).step_by(n).copied().collect();
    if slice.len() >= min {
        slice
    } else {
        pool.to_vec()
    }
}

fn pick<'a, R: Rng>(rng: &mut R, pool: &'a [&'a str]) -> &'a str {
    pool[rng.gen_range(0..pool.len())]
}

fn hashtags_of(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|w| w.strip_prefix('#'))
        .map(|w| w.to_lowercase())
        .collect()
}

fn timestamp<R: Rng>(rng: &mut R, year: i32) -> DateTime<Utc> {
    let start = NaiveDate::from_ymd_opt(year, 1, 1).expect("valid year");
    let end = NaiveDate::from_ymd_opt(year + 1, 1, 1).expect("valid year");
    let secs = (end - start).num_seconds();
    let t = start.and_hms_opt(0, 0, 0).expect("midnight") + Duration::seconds(rng.gen_range(0..secs));
    t.and_utc()
}

fn engagement<R: Rng>(rng: &mut R, year: i32, relevant: bool) -> ObservedEngagement {
    let growth = 1.0 + 0.35 * (year - 2018) as f64;
    let base = if relevant { 80.0 } else { 40.0 } * growth;
    let m = EngagementMetrics {
        likes: rng.gen_range(0.0..base).round() as u64,
        comments: rng.gen_range(0.0..base / 6.0).round() as u64,
        shares: rng.gen_range(0.0..base / 4.0).round() as u64,
        saves: rng.gen_range(0.0..base / 8.0).round() as u64,
    };
    let mut e = ObservedEngagement::complete(m);
    if rng.gen_bool(0.02) {
        match rng.gen_range(0..4) {
            0 => e.likes = None,
            1 => e.comments = None,
            2 => e.shares = None,
            _ => e.saves = None,
        }
    }
    e
}

/// Builds one post of the given kind; the caller checks it.
fn compose<R: Rng>(rng: &mut R, spec: &SynthSpec, kind: Kind) -> (String, Option<String>, Option<String>) {
    let mut pieces: Vec<String> = Vec::new();
    let mut geo = None;
    let mut lang = Some("en".to_string());
    let topic_words = |rng: &mut R, pieces: &mut Vec<String>, t: &Template, foreign: bool| {
        let pool: Vec<&String> = t
            .keywords
            .iter()
            .filter(|k| !foreign || !k.to_lowercase().contains("neom") && !k.contains("نيوم"))
            .collect();
        let mut ks: Vec<&String> = pool.choose_multiple(rng, 2).copied().collect();
        ks.shuffle(rng);
        pieces.extend(ks.into_iter().cloned());
        // context words keep the template's order so posts share phrases
        let mut ctx: Vec<usize> = rand::seq::index::sample(rng, t.context.len(), CONTEXT_WORDS.min(t.context.len())).into_vec();
        ctx.sort_unstable();
        pieces.extend(ctx.into_iter().map(|i| t.context[i].clone()));
    };
    match kind {
        Kind::Relevant { template, sentiment } => {
            let n = spec.templates.len();
            topic_words(rng, &mut pieces, &spec.templates[template], false);
            pieces.push(pick(rng, &share_of(FILLER, template, n, 1)).to_string());
            let polar = match sentiment {
                SentimentLabel::Positive => share_of(POSITIVE, template, n, 2),
                SentimentLabel::Negative => share_of(NEGATIVE, template, n, 2),
                SentimentLabel::Neutral => Vec::new(),
            };
            pieces.extend(polar.choose_multiple(rng, 2).map(|s| s.to_string()));
            match rng.gen_range(0..100) {
                0..=59 => geo = Some("Saudi Arabia".to_string()),
                60..=84 => pieces.push(pick(rng, SAUDI_TAGS).to_string()),
                _ => pieces.push(pick(rng, CITIES).to_string()),
            }
        }
        Kind::NearMiss => {
            let t = &spec.templates[rng.gen_range(0..spec.templates.len())];
            topic_words(rng, &mut pieces, t, true);
            pieces.push(pick(rng, FILLER).to_string());
            geo = Some(pick(rng, FOREIGN_GEO).to_string());
        }
        Kind::LocalOffTopic => {
            if rng.gen_bool(0.2) {
                pieces.extend(OFF_TOPIC_AR.choose_multiple(rng, 4).map(|s| s.to_string()));
                lang = Some("ar".to_string());
            } else {
                pieces.extend(OFF_TOPIC.choose_multiple(rng, 4).map(|s| s.to_string()));
                pieces.push(pick(rng, FILLER).to_string());
            }
            if rng.gen_bool(0.7) {
                geo = Some("Saudi Arabia".to_string());
            } else {
                pieces.push(pick(rng, SAUDI_TAGS).to_string());
            }
        }
        Kind::ForeignOffTopic => {
            pieces.extend(OFF_TOPIC.choose_multiple(rng, 4).map(|s| s.to_string()));
            pieces.push(pick(rng, FILLER).to_string());
            if rng.gen_bool(0.8) {
                geo = Some(pick(rng, FOREIGN_GEO).to_string());
            }
        }
    }
    if !matches!(kind, Kind::Relevant { .. }) {
        pieces.shuffle(rng);
    }
    (pieces.join(" "), geo, lang)
}

/// Generates the corpus described by `spec`.
pub fn generate(spec: &SynthSpec) -> Result<SynthCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let checker = Checker::new();
    let relevant_by_year = spec.relevant_per_year();
    let n_relevant: usize = relevant_by_year.values().sum();

    // topics: equal shares by largest remainder, randomly placed
    let t = spec.templates.len();
    let mut templates: Vec<usize> = apportion(n_relevant, &vec![1.0 / t as f64; t])
        .into_iter()
        .enumerate()
        .flat_map(|(i, n)| std::iter::repeat_n(i, n))
        .collect();
    templates.shuffle(&mut rng);

    // sentiment: exact mix; positive labels drift toward later years
    let (p, n, _) = spec.sentiment_mix;
    let sizes = apportion(n_relevant, &[p, n, 1.0 - p - n]);
    let mut labels: Vec<(f64, SentimentLabel)> = SentimentLabel::ALL
        .iter()
        .zip(&sizes)
        .flat_map(|(l, &k)| std::iter::repeat_n(*l, k))
        .map(|l| {
            let bias = match l {
                SentimentLabel::Positive => 0.25,
                SentimentLabel::Negative => -0.25,
                SentimentLabel::Neutral => 0.0,
            };
            (rng.gen_range(0.0..1.0) + bias, l)
        })
        .collect();
    labels.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut slots: Vec<(i32, Kind)> = Vec::new();
    let mut relevant_slot = 0;
    for y in &spec.years {
        let kept = relevant_by_year[&y.year];
        if kept > y.total {
            return Err(Error::InvalidInput(format!("{}: {kept} relevant of {} total", y.year, y.total)));
        }
        for _ in 0..kept {
            slots.push((
                y.year,
                Kind::Relevant { template: templates[relevant_slot], sentiment: labels[relevant_slot].1 },
            ));
            relevant_slot += 1;
        }
        let others = y.total - kept;
        let near = (others as f64 * spec.noise_fraction).round() as usize;
        for k in 0..others {
            let kind = if k < near {
                Kind::NearMiss
            } else if (k - near).is_multiple_of(2) {
                Kind::LocalOffTopic
            } else {
                Kind::ForeignOffTopic
            };
            slots.push((y.year, kind));
        }
    }

    let mut drafts: Vec<(RawPost, Kind)> = Vec::with_capacity(slots.len());
    for (year, kind) in slots {
        let relevant = matches!(kind, Kind::Relevant { .. });
        let mut accepted = None;
        for _ in 0..100 {
            let (text, geo, lang) = compose(&mut rng, spec, kind);
            let post = RawPost {
                id: String::new(),
                platform: *PLATFORMS.choose(&mut rng).expect("non-empty"),
                timestamp: timestamp(&mut rng, year),
                hashtags: hashtags_of(&text),
                text,
                geo,
                engagement: engagement(&mut rng, year, relevant),
                lang_hint: lang,
            };
            if checker.accepts(&post, kind) {
                accepted = Some(post);
                break;
            }
        }
        let post = accepted.ok_or_else(|| {
            Error::Internal(format!("could not compose a {kind:?} post for {year} that passes the checks"))
        })?;
        drafts.push((post, kind));
    }

    // ids follow time order
    drafts.sort_by_key(|a| a.0.timestamp);
    let mut gold_sentiment = BTreeMap::new();
    let mut gold_clusters = BTreeMap::new();
    let width = drafts.len().to_string().len().max(5);
    let posts = drafts
        .into_iter()
        .enumerate()
        .map(|(i, (mut post, kind))| {
            post.id = format!("syn-{:0width$}", i + 1);
            if let Kind::Relevant { template, sentiment } = kind {
                gold_sentiment.insert(post.id.clone(), sentiment);
                gold_clusters.insert(post.id.clone(), template);
            }
            post
        })
        .collect();
    Ok(SynthCorpus {
        posts,
        gold_sentiment,
        gold_clusters,
        template_names: spec.templates.iter().map(|t| t.name.clone()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec(seed: u64) -> SynthSpec {
        SynthSpec {
            seed,
            years: vec![
                YearSpec { year: 2018, total: 200, share: 0.1 },
                YearSpec { year: 2019, total: 300, share: 0.2 },
            ],
            ..SynthSpec::default()
        }
    }

    #[test]
    fn default_relevant_counts() {
        let r = SynthSpec::default().relevant_per_year();
        assert_eq!(r.values().copied().collect::<Vec<_>>(), [240, 350, 480, 750, 990, 900, 990]);
        assert_eq!(r.values().sum::<usize>(), 4700);
    }

    #[test]
    fn small_corpus_counts_and_gold() {
        let c = generate(&small_spec(1)).unwrap();
        assert_eq!(c.posts.len(), 500);
        assert_eq!(c.gold_sentiment.len(), 80);
        assert_eq!(c.gold_clusters.len(), 80);
        let mut per_t = [0usize; 4];
        for t in c.gold_clusters.values() {
            per_t[*t] += 1;
        }
        assert_eq!(per_t, [20, 20, 20, 20]);
        let pos = c.gold_sentiment.values().filter(|l| **l == SentimentLabel::Positive).count();
        assert_eq!(pos, 40);
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = generate(&small_spec(5)).unwrap();
        assert_eq!(a, generate(&small_spec(5)).unwrap());
        let b = generate(&small_spec(6)).unwrap();
        assert_ne!(a.posts, b.posts);
        assert_eq!(a.gold_sentiment.len(), b.gold_sentiment.len());
    }

    #[test]
    fn infeasible_share_rejected() {
        let mut s = small_spec(1);
        s.years[0].share = 1.5;
        assert!(generate(&s).is_err());
        let mut s = small_spec(1);
        s.sentiment_mix = (0.5, 0.5, 0.5);
        assert!(generate(&s).is_err());
        let mut s = small_spec(1);
        s.templates.truncate(1);
        assert!(generate(&s).is_err());
    }

    #[test]
    fn written_files_round_trip() {
        let c = generate(&small_spec(2)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = c.write(dir.path()).unwrap();
        let corpus = crate::corpus::ingest(&paths.corpus, crate::corpus::InputFormat::Jsonl).unwrap();
        assert_eq!(corpus.len(), 500);
        assert!(corpus.rejects.is_empty());
        assert_eq!(load_gold_clusters(&paths.gold_clusters).unwrap(), c.gold_clusters);
        assert_eq!(crate::sentiment::load_gold_labels(&paths.gold_sentiment).unwrap(), c.gold_sentiment);
    }
}
