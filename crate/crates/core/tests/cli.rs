use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const TOY: &str = "f1\ta1\nf1\ta2\nf1\ta3\nf2\ta1\nf2\ta2\nf3\ta1\nf3\ta3\n";

fn fanseg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fanseg"))
        .args(args)
        .env_remove("FANSEG_THREADS")
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_toy(dir: &TempDir) -> std::path::PathBuf {
    let path = dir.path().join("toy.tsv");
    std::fs::write(&path, TOY).unwrap();
    path
}

#[test]
fn project_toy_min_weight_one_gives_three_edges() {
    let dir = TempDir::new().unwrap();
    let input = write_toy(&dir);
    let out = dir.path().join("fans.tsv");
    let o = fanseg(&["project", path_str(&input), "--side", "left", "--min-weight", "1", "-o", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text, "f1\tf2\t2\nf1\tf3\t2\nf2\tf3\t1\n");
    assert!(String::from_utf8_lossy(&o.stdout).contains("edges 3"));
}

#[test]
fn project_toy_min_weight_three_gives_no_edges() {
    let dir = TempDir::new().unwrap();
    let input = write_toy(&dir);
    let out = dir.path().join("fans.tsv");
    let o = fanseg(&["project", path_str(&input), "--side", "fans", "--min-weight", "3", "-o", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "");
    assert!(String::from_utf8_lossy(&o.stdout).contains("edges 0"));
}

#[test]
fn missing_input_exits_one_and_names_the_path() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.tsv");
    let out = dir.path().join("x.tsv");
    let o = fanseg(&["project", path_str(&missing), "--side", "left", "-o", path_str(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.tsv"));
    assert!(!out.exists());
}

#[test]
fn malformed_input_exits_one_with_line_number() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("bad.tsv");
    std::fs::write(&input, "f1\ta1\nonly-one-field\n").unwrap();
    let out = dir.path().join("x.tsv");
    let o = fanseg(&["project", path_str(&input), "--side", "left", "-o", path_str(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    assert!(!out.exists(), "partial output left behind");
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let input = write_toy(&dir);
    let out = dir.path().join("x.tsv");
    assert_eq!(fanseg(&["project", path_str(&input), "--side", "middle", "-o", path_str(&out)]).status.code(), Some(2));
    assert_eq!(fanseg(&["project", path_str(&input), "--side", "left", "--min-weight", "0", "-o", path_str(&out)]).status.code(), Some(2));
    assert_eq!(fanseg(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(fanseg(&["--threads", "0", "project", path_str(&input), "--side", "left", "-o", path_str(&out)]).status.code(), Some(2));
}

#[test]
fn every_subcommand_has_help() {
    for sub in [
        vec!["--help"],
        vec!["synth", "--help"],
        vec!["synth", "market", "--help"],
        vec!["synth", "planted", "--help"],
        vec!["project", "--help"],
        vec!["communities", "--help"],
        vec!["pagerank", "--help"],
        vec!["degrees", "--help"],
        vec!["analyze", "--help"],
    ] {
        let o = fanseg(&sub);
        assert_eq!(o.status.code(), Some(0), "{sub:?}");
        assert!(String::from_utf8_lossy(&o.stdout).contains("Usage"), "{sub:?}");
    }
}

#[test]
fn synth_market_is_reproducible_and_seed_sensitive() {
    let dir = TempDir::new().unwrap();
    let gen = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = fanseg(&[
            "synth", "market", "--fans", "300", "--artists", "40", "--memberships", "3", "--bias", "1.2", "--genres", "2",
            "--affinity", "0.8", "--seed", seed, "-o", path_str(&out),
        ]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(out).unwrap()
    };
    let a = gen("a.tsv", "4");
    let b = gen("b.tsv", "4");
    let c = gen("c.tsv", "5");
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn synth_invalid_config_exits_two() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("m.tsv");
    let o = fanseg(&["synth", "market", "--affinity", "1.5", "-o", path_str(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let o = fanseg(&["synth", "planted", "--blocks", "5,5", "--p-in", "0.1", "--p-out", "0.5", "-o", path_str(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn planted_communities_and_pagerank_round_trip() {
    let dir = TempDir::new().unwrap();
    let graph = dir.path().join("g.tsv");
    let truth = dir.path().join("truth.tsv");
    let o = fanseg(&[
        "synth", "planted", "--blocks", "15,15", "--p-in", "0.7", "--p-out", "0.02", "--seed", "1", "-o",
        path_str(&graph), "--truth-out", path_str(&truth),
    ]);
    assert_eq!(o.status.code(), Some(0));

    let parts = dir.path().join("parts.tsv");
    let graphml = dir.path().join("g.graphml");
    let o = fanseg(&["communities", path_str(&graph), "-o", path_str(&parts), "--graphml", path_str(&graphml)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("communities 2"));
    let labels: Vec<String> = std::fs::read_to_string(&parts).unwrap().lines().map(|l| l.to_string()).collect();
    assert_eq!(labels.len(), 30);
    assert!(std::fs::read_to_string(&graphml).unwrap().contains("<graphml"));

    let ranks = dir.path().join("ranks.tsv");
    let o = fanseg(&["pagerank", path_str(&graph), "-o", path_str(&ranks)]);
    assert_eq!(o.status.code(), Some(0));
    let total: f64 = std::fs::read_to_string(&ranks)
        .unwrap()
        .lines()
        .map(|l| l.split('\t').nth(1).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn degrees_writes_histogram() {
    let dir = TempDir::new().unwrap();
    let input = write_toy(&dir);
    let out = dir.path().join("deg.tsv");
    let o = fanseg(&["degrees", path_str(&input), "--side", "artists", "-o", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "degree\tcount\n2\t2\n3\t1\n");
}

#[test]
fn analyze_empty_input_exits_one() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("empty.tsv");
    std::fs::write(&input, "# nothing here\n").unwrap();
    let out = dir.path().join("run");
    let o = fanseg(&["analyze", path_str(&input), "-o", path_str(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.join("report.json").exists());
}

#[test]
fn analyze_bad_config_exits_two() {
    let dir = TempDir::new().unwrap();
    let input = write_toy(&dir);
    let config = dir.path().join("c.toml");
    std::fs::write(&config, "resolution = -1.0\n").unwrap();
    let o = fanseg(&["analyze", path_str(&input), "--config", path_str(&config), "-o", path_str(&dir.path().join("r"))]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(&config, "no_such_key = 1\n").unwrap();
    let o = fanseg(&["analyze", path_str(&input), "--config", path_str(&config), "-o", path_str(&dir.path().join("r"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn analyze_then_replay_reproduces_the_report() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("m.tsv");
    let genres = dir.path().join("genres.tsv");
    let o = fanseg(&[
        "synth", "market", "--fans", "800", "--artists", "60", "--memberships", "4", "--bias", "0.5", "--genres", "2",
        "--affinity", "0.9", "--seed", "3", "-o", path_str(&input), "--genres-out", path_str(&genres),
    ]);
    assert_eq!(o.status.code(), Some(0));

    let config = dir.path().join("run.toml");
    std::fs::write(&config, "fan_min_weight = 2\nartist_min_weight = 2\ngraphml = true\n").unwrap();
    let run = dir.path().join("run");
    let o = fanseg(&[
        "analyze", path_str(&input), "--config", path_str(&config), "--genres", path_str(&genres), "--top-k", "5", "-o",
        path_str(&run),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("concordance: agreement"));
    for file in ["report.json", "community_sizes.tsv", "artist_pagerank.tsv", "degrees_fans.tsv", "artist_projection.graphml"] {
        assert!(run.join(file).exists(), "{file}");
    }
    let first = std::fs::read(run.join("report.json")).unwrap();
    let report: serde_json::Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["manifest"]["params"]["top_k"], 5);
    assert!(report["communities"][0]["genre_purity"].is_number());

    let saved = dir.path().join("first.json");
    std::fs::write(&saved, &first).unwrap();
    let o = fanseg(&["analyze", "--replay", path_str(&saved), "-o", path_str(&run)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(run.join("report.json")).unwrap(), first);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("m.tsv");
    assert_eq!(
        fanseg(&["synth", "market", "--fans", "600", "--artists", "50", "--memberships", "4", "--seed", "9", "-o", path_str(&input)])
            .status
            .code(),
        Some(0)
    );
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("p{threads}.tsv"));
        let o = fanseg(&["--threads", threads, "project", path_str(&input), "--side", "left", "--min-weight", "2", "-o", path_str(&out)]);
        assert_eq!(o.status.code(), Some(0));
        outputs.push(std::fs::read(out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn in_process_entry_point_matches_exit_codes() {
    assert_eq!(fanseg::cli::run(["fanseg", "--version"]), 0);
    assert_eq!(fanseg::cli::run(["fanseg", "project"]), 2);
}
