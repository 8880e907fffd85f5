use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use trendmine::clustering::ClusterModel;
use trendmine::config::Config;
use trendmine::corpus::write_jsonl;
use trendmine::features::{write_vectors_tsv, FeatureVector};
use trendmine::pipeline::{self as pl, ArtifactSet};
use trendmine::report::{emit_json, RunReport};
use trendmine::sentiment::{load_external_scores, sentiment_distribution, write_scores_tsv};
use trendmine::synth::{generate, SynthSpec};
use trendmine::trends::write_trends_csv;
use trendmine::{Error, Result};

#[derive(Parser)]
#[command(name = "trendmine", version, about = "Topic, sentiment and trend mining for social-media corpora")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the configured input corpus.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage and write all artifacts.
    Run,
    /// Load, validate and impute the corpus.
    Ingest,
    /// Normalize, tokenize and lemmatize the corpus.
    Preprocess,
    /// Apply the country and topic filters; writes the yearly table.
    Filter,
    /// Embed filtered posts.
    Embed {
        /// Filtered posts (JSON lines); defaults to `<out>/filtered_posts.jsonl`.
        #[arg(long)]
        posts: Option<PathBuf>,
    },
    /// Score sentiment of filtered posts.
    Sentiment {
        #[arg(long)]
        posts: Option<PathBuf>,
    },
    /// Cluster filtered posts and label the clusters.
    Cluster {
        #[arg(long)]
        posts: Option<PathBuf>,
    },
    /// Build per-cluster time series and forecasts.
    Trends {
        #[arg(long)]
        posts: Option<PathBuf>,
        /// Sentiment scores; defaults to `<out>/sentiment.tsv`.
        #[arg(long)]
        scores: Option<PathBuf>,
        /// Cluster assignments; defaults to `<out>/cluster_assignments.tsv`.
        #[arg(long)]
        assignments: Option<PathBuf>,
    },
    /// Summarize a finished run.
    Report,
    /// Generate a synthetic corpus with gold labels.
    Synth,
}

fn load_config(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(input) = &cli.input {
        cfg.input = Some(input.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn posts_path(cli: &Cli, given: &Option<PathBuf>) -> PathBuf {
    given.clone().unwrap_or_else(|| cli.out.join(pl::FILTERED_FILE))
}

fn finish(arts: ArtifactSet, out: &Path) -> Result<()> {
    for name in arts.commit()? {
        println!("{}", out.join(name).display());
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let out = &cli.out;
    match &cli.command {
        Command::Run => {
            let report = pl::run_pipeline(&cfg, out)?;
            print_summary(&report);
        }
        Command::Ingest => {
            let (corpus, imputed) = pl::ingest_stage(&cfg)?;
            let mut arts = ArtifactSet::new(out)?;
            write_jsonl(&corpus.posts, &arts.partial(pl::POSTS_FILE))?;
            eprintln!(
                "{} posts ingested, {} rejected, imputed {:?}",
                corpus.len(),
                corpus.rejects.len(),
                imputed
            );
            finish(arts, out)?;
        }
        Command::Preprocess => {
            let (corpus, _) = pl::ingest_stage(&cfg)?;
            let pre = pl::preprocessor(&cfg)?;
            let clean = pl::preprocess_stage(&pre, &corpus.posts);
            let mut arts = ArtifactSet::new(out)?;
            pl::write_clean_posts(&clean, &arts.partial(pl::CLEAN_FILE))?;
            finish(arts, out)?;
        }
        Command::Filter => {
            let (corpus, _) = pl::ingest_stage(&cfg)?;
            let pre = pl::preprocessor(&cfg)?;
            let clean = pl::preprocess_stage(&pre, &corpus.posts);
            let filter = pl::filter_stage(&cfg, &pre, clean)?;
            let mut arts = ArtifactSet::new(out)?;
            pl::write_clean_posts(&filter.topic.kept, &arts.partial(pl::FILTERED_FILE))?;
            let table = pl::emit_filter_reports(&corpus.counts, &filter, &mut arts)?;
            eprintln!(
                "country filter kept {}, topic filter kept {} of {} ({}%)",
                filter.country_kept, table.kept, table.total, table.pct
            );
            finish(arts, out)?;
        }
        Command::Embed { posts } => {
            let posts = pl::read_clean_posts(&posts_path(cli, posts))?;
            let vectors = pl::embed_stage(&cfg, &posts)?;
            let present: Vec<FeatureVector> = vectors.into_iter().flatten().collect();
            let mut arts = ArtifactSet::new(out)?;
            write_vectors_tsv(&present, &arts.partial(pl::VECTORS_FILE))?;
            finish(arts, out)?;
        }
        Command::Sentiment { posts } => {
            let posts = pl::read_clean_posts(&posts_path(cli, posts))?;
            let pre = pl::preprocessor(&cfg)?;
            let results = pl::sentiment_stage(&cfg, &pre, &posts)?;
            let mut arts = ArtifactSet::new(out)?;
            write_scores_tsv(&results, &arts.partial(pl::SENTIMENT_FILE))?;
            emit_json(&sentiment_distribution(&results)?, &arts.partial(pl::SENTIMENT_SHARES_FILE))?;
            if let Some(ev) = pl::evaluation_stage(&cfg, &results)? {
                emit_json(&ev, &arts.partial(pl::EVALUATION_FILE))?;
            }
            finish(arts, out)?;
        }
        Command::Cluster { posts } => {
            let posts = pl::read_clean_posts(&posts_path(cli, posts))?;
            let vectors = pl::embed_stage(&cfg, &posts)?;
            let model = pl::cluster_stage(&cfg, &posts, &vectors)?;
            let mut arts = ArtifactSet::new(out)?;
            model.write_json(&arts.partial(pl::MODEL_FILE))?;
            pl::write_assignments(&posts, &model.labels, &arts.partial(pl::ASSIGNMENTS_FILE))?;
            eprintln!("{} clusters, {} noise points", model.n_clusters(), model.noise_count());
            finish(arts, out)?;
        }
        Command::Trends { posts, scores, assignments } => {
            let posts = pl::read_clean_posts(&posts_path(cli, posts))?;
            let ids: Vec<String> = posts.iter().map(|p| p.post.id.clone()).collect();
            let scores_path = scores.clone().unwrap_or_else(|| out.join(pl::SENTIMENT_FILE));
            let by_id: std::collections::BTreeMap<String, _> = load_external_scores(&scores_path, &ids, cfg.tau)?
                .into_iter()
                .map(|r| (r.post_id.clone(), r))
                .collect();
            let assign_path = assignments.clone().unwrap_or_else(|| out.join(pl::ASSIGNMENTS_FILE));
            let assigned = pl::read_assignments(&assign_path)?;
            let mut sentiments = Vec::with_capacity(ids.len());
            let mut labels = Vec::with_capacity(ids.len());
            for id in &ids {
                let missing = |what: &str| Error::InvalidInput(format!("post {id} has no {what}"));
                sentiments.push(by_id.get(id).cloned().ok_or_else(|| missing("sentiment score"))?);
                labels.push(*assigned.get(id).ok_or_else(|| missing("cluster assignment"))?);
            }
            let (series, forecasts) = pl::trends_stage(&cfg, &posts, &sentiments, &labels)?;
            let mut arts = ArtifactSet::new(out)?;
            write_trends_csv(&series, &forecasts, &arts.partial(pl::TRENDS_FILE))?;
            finish(arts, out)?;
        }
        Command::Report => {
            let path = out.join(pl::REPORT_FILE);
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let report: RunReport = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
            print_summary(&report);
            let model_path = out.join(pl::MODEL_FILE);
            if model_path.exists() {
                let model = ClusterModel::read_json(&model_path)?;
                println!("cluster sizes: {:?}", model.cluster_sizes());
            }
        }
        Command::Synth => {
            let spec = SynthSpec { seed: cfg.seed, ..SynthSpec::default() };
            let corpus = generate(&spec)?;
            let paths = corpus.write(out)?;
            for p in [paths.corpus, paths.gold_sentiment, paths.gold_clusters] {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn print_summary(r: &RunReport) {
    let c = &r.counts;
    println!(
        "ingested {} (rejected {}), country {}, topic {}, clustered {}, noise {}",
        c.ingested, c.rejected, c.country_kept, c.topic_kept, c.clustered, c.noise
    );
    println!("year,total,pct,kept");
    for y in &r.yearly.rows {
        println!("{},{},{},{}", y.year, y.total, y.pct, y.kept);
    }
    println!("total,{},{},{}", r.yearly.total, r.yearly.pct, r.yearly.kept);
    let s = &r.sentiment;
    println!(
        "sentiment: positive {:.1}%, negative {:.1}%, neutral {:.1}% (n={})",
        100.0 * s.positive,
        100.0 * s.negative,
        100.0 * s.neutral,
        s.n
    );
    if let Some(ev) = &r.evaluation {
        println!("test accuracy {:.3} on {} posts", ev.accuracy, ev.n);
    }
    for cl in &r.clusters {
        println!("cluster {} [{}] size {}: {}", cl.cluster_id, cl.name, cl.size, cl.keywords_assigned.join(", "));
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
