use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn trendmine(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trendmine"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

const TOPICS: [(&str, [&str; 6]); 3] = [
    ("solar power", ["panels", "grid", "megawatts", "rooftop", "capacity", "electricity"]),
    ("afforestation", ["trees", "seedlings", "mangroves", "planting", "reserves", "habitat"]),
    ("carbon capture and storage", ["hydrogen", "methane", "footprint", "offsets", "flaring", "pledges"]),
];

/// 72 Saudi posts over three topics plus 18 posts that the filters drop.
fn write_corpus(dir: &Path) {
    let mut lines = String::new();
    let mut id = 0;
    for year in 2019..=2024 {
        for (t, (kw, ctx)) in TOPICS.iter().enumerate() {
            for k in 0..4 {
                id += 1;
                let words: Vec<&str> = (0..4).map(|j| ctx[(k + j) % 6]).collect();
                let mood = ["great progress", "terrible delays", "update"][(id + t) % 3];
                lines.push_str(&format!(
                    r#"{{"id":"p{id:03}","platform":"x","timestamp":"{year}-0{}-1{}T08:00:00Z","text":"{kw} {} {mood}","geo":"Saudi Arabia","likes":{},"comments":2,"shares":1,"saves":0,"lang":"en"}}"#,
                    1 + k,
                    t,
                    words.join(" "),
                    10 + id
                ));
                lines.push('\n');
            }
        }
        for k in 0..3 {
            id += 1;
            let (text, geo) = if k == 0 { ("solar power panels grid", "Egypt") } else { ("football match tonight", "Saudi Arabia") };
            lines.push_str(&format!(
                r#"{{"id":"p{id:03}","platform":"facebook","timestamp":"{year}-06-0{}T08:00:00Z","text":"{text}","geo":"{geo}","likes":3,"comments":0,"shares":0,"saves":0}}"#,
                1 + k
            ));
            lines.push('\n');
        }
    }
    fs::write(dir.join("posts.jsonl"), lines).unwrap();
    fs::write(dir.join("run.toml"), "input = \"posts.jsonl\"\nmin_cluster_size = 5\n").unwrap();
}

fn partial_files(dir: &Path) -> Vec<String> {
    fs::read_dir(dir)
        .map(|rd| {
            rd.filter_map(|e| e.ok())
                .map(|e| e.file_name().to_string_lossy().into_owned())
                .filter(|n| n.ends_with(".partial"))
                .collect()
        })
        .unwrap_or_default()
}

#[test]
fn full_run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    write_corpus(dir.path());
    let out = trendmine(dir.path(), &["--config", "run.toml", "--out", "out", "run"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("ingested 90 (rejected 0), country 84, topic 72"), "{stdout}");
    let o = dir.path().join("out");
    for name in [
        "posts.jsonl",
        "filtered_posts.jsonl",
        "vectors.tsv",
        "sentiment.tsv",
        "sentiment_distribution.json",
        "cluster_model.json",
        "cluster_assignments.tsv",
        "clusters.csv",
        "trends.csv",
        "keyword_frequency.csv",
        "keyword_frequency.json",
        "yearly_table.csv",
        "run_report.json",
    ] {
        assert!(o.join(name).exists(), "missing {name}");
    }
    assert!(partial_files(&o).is_empty());
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(o.join("run_report.json")).unwrap()).unwrap();
    let counts = &report["counts"];
    let clustered = counts["clustered"].as_u64().unwrap();
    let noise = counts["noise"].as_u64().unwrap();
    assert_eq!(clustered + noise, 72);
    assert!(report["artifacts"].as_array().unwrap().iter().all(|a| !a.as_str().unwrap().contains('/')));
    let yearly = fs::read_to_string(o.join("yearly_table.csv")).unwrap();
    assert!(yearly.ends_with("total,90,80.0,72\n"), "{yearly}");

    let summary = trendmine(dir.path(), &["--out", "out", "report"]);
    assert_eq!(code(&summary), 0);
    assert!(String::from_utf8_lossy(&summary.stdout).contains("cluster sizes"));
}

#[test]
fn stages_chain_through_files() {
    let dir = tempfile::tempdir().unwrap();
    write_corpus(dir.path());
    let base = ["--config", "run.toml", "--out", "stages"];
    for stage in ["ingest", "preprocess", "filter", "embed", "sentiment", "cluster", "trends"] {
        let args: Vec<&str> = base.iter().copied().chain([stage]).collect();
        let out = trendmine(dir.path(), &args);
        assert_eq!(code(&out), 0, "{stage}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let o = dir.path().join("stages");
    let filtered = fs::read_to_string(o.join("filtered_posts.jsonl")).unwrap();
    assert_eq!(filtered.lines().count(), 72);
    assert_eq!(fs::read_to_string(o.join("vectors.tsv")).unwrap().lines().count(), 72);
    assert_eq!(fs::read_to_string(o.join("sentiment.tsv")).unwrap().lines().count(), 72);
    let trends = fs::read_to_string(o.join("trends.csv")).unwrap();
    assert!(trends.starts_with("cluster_id,period,metric,value,kind,model\n"));
    assert!(trends.contains(",forecast,ols"));
    assert!(partial_files(&o).is_empty());
}

#[test]
fn synth_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let a = trendmine(dir.path(), &["--seed", "7", "--out", "a", "synth"]);
    let b = trendmine(dir.path(), &["--seed", "7", "--out", "b", "synth"]);
    let c = trendmine(dir.path(), &["--seed", "8", "--out", "c", "synth"]);
    assert!([&a, &b, &c].iter().all(|o| code(o) == 0));
    let read = |d: &str| fs::read(dir.path().join(d).join("corpus.jsonl")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&trendmine(dir.path(), &[])), 1);
    assert_eq!(code(&trendmine(dir.path(), &["run", "--no-such-flag"])), 1);
    assert_eq!(code(&trendmine(dir.path(), &["--help"])), 0);
    // no input configured
    assert_eq!(code(&trendmine(dir.path(), &["run"])), 1);
    fs::write(dir.path().join("bad.toml"), "min_cluster_size = 0\n").unwrap();
    assert_eq!(code(&trendmine(dir.path(), &["--config", "bad.toml", "run"])), 1);
    fs::write(dir.path().join("unknown.toml"), "colour = \"blue\"\n").unwrap();
    let out = trendmine(dir.path(), &["--config", "unknown.toml", "run"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn data_errors_exit_2_and_leave_no_partials() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&trendmine(dir.path(), &["--input", "missing.jsonl", "run"])), 2);

    fs::write(dir.path().join("junk.jsonl"), "not json\n{also not}\n").unwrap();
    let out = trendmine(dir.path(), &["--input", "junk.jsonl", "--out", "junk", "ingest"]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));

    write_corpus(dir.path());
    fs::write(dir.path().join("gold.toml"), "input = \"posts.jsonl\"\nmin_cluster_size = 5\ngold_sentiment = \"nope.tsv\"\n").unwrap();
    let out = trendmine(dir.path(), &["--config", "gold.toml", "--out", "failed", "run"]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    let o = dir.path().join("failed");
    assert!(partial_files(&o).is_empty());
    assert!(!o.join("run_report.json").exists());
    assert!(!o.join("posts.jsonl").exists());
}
