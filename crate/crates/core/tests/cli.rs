mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;

use alignscore::config::ENDPOINT_ENV;
use alignscore::scorer::{AlignRequest, AlignResponse};
use sha2::{Digest, Sha256};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alignscore"))
        .args(args)
        .env_remove(ENDPOINT_ENV)
        .output()
        .unwrap()
}

fn cli_env(args: &[&str], endpoint: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alignscore"))
        .args(args)
        .env(ENDPOINT_ENV, endpoint)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn score_files(dir: &Path, contexts: &str, claims: &str) -> (String, String) {
    (
        write(dir, "ctx.txt", contexts),
        write(dir, "claims.txt", claims),
    )
}

#[test]
fn identical_pair_scores_high() {
    let dir = tempfile::tempdir().unwrap();
    let (ctx, claims) = score_files(
        dir.path(),
        "The cat sat on the mat.\n",
        "The cat sat on the mat.\n",
    );
    let out = cli(&["score", "--context", &ctx, "--claims", &claims]);
    assert!(out.status.success());
    let score: f64 = stdout(&out).trim().parse().unwrap();
    assert!(score >= 0.99);
}

#[test]
fn score_output_is_deterministic_and_mirrored_as_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let contexts = "Paris is the capital of France. It is large.\nDogs bark.\nThe sun is hot.\n";
    let claims = "Paris is in France.\nCats meow.\nThe sun is a star.\n";
    let (ctx, cl) = score_files(dir.path(), contexts, claims);
    let jsonl = dir.path().join("out.jsonl");
    let jsonl = jsonl.to_str().unwrap();
    let one = cli(&[
        "score",
        "--context",
        &ctx,
        "--claims",
        &cl,
        "--workers",
        "1",
        "--jsonl",
        jsonl,
    ]);
    let four = cli(&[
        "score",
        "--context",
        &ctx,
        "--claims",
        &cl,
        "--workers",
        "4",
    ]);
    assert!(one.status.success());
    assert_eq!(stdout(&one), stdout(&four));
    assert_eq!(stdout(&one).lines().count(), 3);
    let rows: Vec<serde_json::Value> = fs::read_to_string(jsonl)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2]["index"], 2);
}

#[test]
fn empty_claim_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let (ctx, claims) = score_files(dir.path(), "Some context.\n", "   \n");
    let out = cli(&["score", "--context", &ctx, "--claims", &claims]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn line_count_mismatch_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let (ctx, claims) = score_files(dir.path(), "One.\nTwo.\n", "One.\n");
    let out = cli(&["score", "--context", &ctx, "--claims", &claims]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_mode_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let (ctx, claims) = score_files(dir.path(), "One.\n", "One.\n");
    let out = cli(&[
        "score",
        "--context",
        &ctx,
        "--claims",
        &claims,
        "--mode",
        "diagonal",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreachable_backend_is_a_backend_error() {
    let dir = tempfile::tempdir().unwrap();
    let (ctx, claims) = score_files(dir.path(), "One.\n", "One.\n");
    let out = cli(&[
        "score",
        "--context",
        &ctx,
        "--claims",
        &claims,
        "--scorer",
        "remote",
        "--endpoint",
        "http://127.0.0.1:9",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn missing_fixture_entry_is_a_backend_error() {
    let dir = tempfile::tempdir().unwrap();
    let (ctx, claims) = score_files(dir.path(), "One.\n", "Two.\n");
    let table = write(dir.path(), "table.jsonl", "");
    let out = cli(&[
        "score",
        "--context",
        &ctx,
        "--claims",
        &claims,
        "--scorer",
        "fixture",
        "--fixture",
        &table,
    ]);
    assert_eq!(out.status.code(), Some(3));
}

fn fixture_line(a: &str, b: &str, v: f64) -> String {
    let j = common::uniform(v);
    serde_json::json!({"a": a, "b": b, "p3": j.p3, "pbin": j.pbin, "reg": j.reg}).to_string() + "\n"
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let (ctx, claims) = score_files(dir.path(), "The cat sat.\n", "The cat sat.\n");
    write(
        dir.path(),
        "table.jsonl",
        &fixture_line("The cat sat.", "The cat sat.", 0.25),
    );
    // The fixture path resolves against the config file's directory.
    let config = write(
        dir.path(),
        "run.conf",
        "# fixture run\nscorer = fixture\nfixture = table.jsonl\n",
    );
    let from_file = cli(&[
        "score",
        "--context",
        &ctx,
        "--claims",
        &claims,
        "--config",
        &config,
    ]);
    assert!(
        from_file.status.success(),
        "{}",
        String::from_utf8_lossy(&from_file.stderr)
    );
    assert_eq!(stdout(&from_file), "0.250000\n");
    let flag_wins = cli(&[
        "score",
        "--context",
        &ctx,
        "--claims",
        &claims,
        "--config",
        &config,
        "--scorer",
        "lexical",
    ]);
    assert!(stdout(&flag_wins).trim().parse::<f64>().unwrap() >= 0.99);

    let bad = write(dir.path(), "bad.conf", "colour = blue\n");
    assert_eq!(
        cli(&[
            "score",
            "--context",
            &ctx,
            "--claims",
            &claims,
            "--config",
            &bad
        ])
        .status
        .code(),
        Some(2)
    );
}

fn constant_backend(v: f64) -> common::MockBackend {
    common::MockBackend::start(
        2,
        Arc::new(move |body: &str| {
            let request: AlignRequest = serde_json::from_str(body).unwrap();
            let judgments = request.pairs.iter().map(|_| common::uniform(v)).collect();
            (
                200,
                serde_json::to_string(&AlignResponse { judgments }).unwrap(),
            )
        }),
    )
}

#[test]
fn endpoint_precedence_is_flag_env_file() {
    let dir = tempfile::tempdir().unwrap();
    let (ctx, claims) = score_files(dir.path(), "One.\n", "One.\n");
    let env_backend = constant_backend(0.125);
    let flag_backend = constant_backend(0.375);
    let config = write(
        dir.path(),
        "run.conf",
        "scorer = remote\nendpoint = http://127.0.0.1:9\n",
    );
    let base = [
        "score",
        "--context",
        ctx.as_str(),
        "--claims",
        claims.as_str(),
        "--config",
        config.as_str(),
    ];

    assert_eq!(cli(&base).status.code(), Some(3));
    let env = cli_env(&base, &env_backend.endpoint);
    assert_eq!(stdout(&env), "0.125000\n");
    let mut with_flag = base.to_vec();
    with_flag.extend(["--endpoint", flag_backend.endpoint.as_str()]);
    assert_eq!(
        stdout(&cli_env(&with_flag, &env_backend.endpoint)),
        "0.375000\n"
    );
}

fn corpus_line(label: &str) -> String {
    serde_json::json!({
        "text_a": "A man sleeps.", "text_b": "A person rests.", "label_scheme": "3way",
        "label": label, "task": "nli", "dataset": "snli", "split": "train"
    })
    .to_string()
}

#[test]
fn validate_reports_violations_by_line() {
    let dir = tempfile::tempdir().unwrap();
    let good = corpus_line("aligned");
    let path = write(
        dir.path(),
        "c.jsonl",
        &format!("{good}\n{good}\n{}\n", corpus_line("maybe")),
    );
    let out = cli(&["validate", &path]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).starts_with("line 3:"), "{}", stdout(&out));

    let ok = write(dir.path(), "ok.jsonl", &format!("{good}\n"));
    assert_eq!(cli(&["validate", &ok]).status.code(), Some(0));
}

#[test]
fn convert_then_validate() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = common::data_dir().join("corpus/manifest.json");
    let output = dir.path().join("corpus.jsonl");
    let out = cli(&[
        "convert",
        "--manifest",
        manifest.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
        "--exclude-task",
        "sts",
        "--workers",
        "4",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).ends_with("total: 497\n"), "{}", stdout(&out));
    assert!(dir.path().join("corpus.jsonl.report.json").exists());
    assert_eq!(
        cli(&["validate", output.to_str().unwrap()]).status.code(),
        Some(0)
    );
}

#[test]
fn synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let source = write(
        dir.path(),
        "wiki.txt",
        "The big city grew quickly after the war ended in the north.\nA small town built a famous bridge.\n",
    );
    let digest = |seed: &str| {
        let out = cli(&[
            "synth",
            "--source",
            &source,
            "--perturbation",
            "mask",
            "--seed",
            seed,
        ]);
        assert!(out.status.success());
        Sha256::digest(&out.stdout)
    };
    assert_eq!(digest("3"), digest("3"));
    assert_ne!(digest("3"), digest("4"));

    let out = cli(&["synth", "--source", &source, "--perturbation", "paraphrase"]);
    let line: serde_json::Value =
        serde_json::from_str(stdout(&out).lines().next().unwrap()).unwrap();
    assert_eq!(line["label"], "aligned");
    assert_eq!(line["dataset"], "wiki");
}

#[test]
fn bench_writes_reports_matching_golden() {
    let dir = tempfile::tempdir().unwrap();
    let data = common::data_dir().join("bench/true");
    let out_dir = dir.path().join("out");
    let out = cli(&[
        "bench",
        "--data",
        data.to_str().unwrap(),
        "--kind",
        "true",
        "--out",
        out_dir.to_str().unwrap(),
        "--workers",
        "8",
    ]);
    assert!(out.status.success());
    let golden = |ext: &str| {
        fs::read_to_string(common::data_dir().join(format!("bench/golden/true.{ext}"))).unwrap()
    };
    assert_eq!(
        fs::read_to_string(out_dir.join("report.json")).unwrap(),
        golden("json")
    );
    assert_eq!(stdout(&out), golden("txt"));
}

#[test]
fn bench_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let data = common::data_dir().join("bench/true");
    let unknown = cli(&[
        "bench",
        "--data",
        data.to_str().unwrap(),
        "--kind",
        "nope",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(unknown.status.code(), Some(2));

    // Test split only: the summac protocol needs validation data.
    let summac = dir.path().join("summac");
    fs::create_dir(&summac).unwrap();
    write(
        &summac,
        "manifest.json",
        r#"[{"dataset":"A","path":"a.jsonl"}]"#,
    );
    let rows: String = (0..4)
        .map(|i| format!("{{\"context\":\"The sky is blue.\",\"claim\":\"Claim {i}.\",\"label\":{},\"dataset\":\"A\",\"split\":\"test\"}}\n", i % 2))
        .collect();
    write(&summac, "a.jsonl", &rows);
    let missing = cli(&[
        "bench",
        "--data",
        summac.to_str().unwrap(),
        "--kind",
        "summac",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn bench_quality_gate() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    fs::create_dir(&data).unwrap();
    write(
        &data,
        "manifest.json",
        r#"[{"dataset":"A","path":"a.jsonl"}]"#,
    );
    let rows: String = (0..10)
        .map(|i| format!("{{\"context\":\"Context {i} holds.\",\"claim\":\"Claim {i} holds.\",\"label\":{},\"dataset\":\"A\",\"split\":\"test\"}}\n", i % 2))
        .collect();
    write(&data, "a.jsonl", &rows);
    // Only eight of ten pairs have fixture entries: 20% fail.
    let table: String = (2..10)
        .map(|i| {
            fixture_line(
                &format!("Context {i} holds."),
                &format!("Claim {i} holds."),
                0.5,
            )
        })
        .collect();
    let table = write(dir.path(), "table.jsonl", &table);
    let out = cli(&[
        "bench",
        "--data",
        data.to_str().unwrap(),
        "--kind",
        "true",
        "--out",
        dir.path().join("out").to_str().unwrap(),
        "--scorer",
        "fixture",
        "--fixture",
        &table,
    ]);
    assert_eq!(
        out.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
