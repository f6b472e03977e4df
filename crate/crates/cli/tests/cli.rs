//! End-to-end checks of the `tmr` binary: exit codes, stdout byte
//! stability, and the documented behavior of every subcommand.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn tmr(args: &[&str]) -> Output {
    tmr_env(args, &[])
}

fn tmr_env(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tmr"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("spawning the binary succeeds")
}

fn out_str(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("stdout is utf-8")
}

fn err_str(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).expect("stderr is utf-8")
}

fn write(path: &Path, content: &str) {
    fs::write(path, content).expect("fixture write");
}

/// Small two-domain memory used by most retrieval tests.
fn build_index(dir: &Path) -> PathBuf {
    let src_med = dir.join("src_med.txt");
    let tgt_med = dir.join("tgt_med.txt");
    let src_law = dir.join("src_law.txt");
    let tgt_law = dir.join("tgt_law.txt");
    write(
        &src_med,
        "the cat sat on the mat\na dog barked loudly\nthe cat sat on a rug\n",
    );
    write(
        &tgt_med,
        "le chat assis sur le tapis\nun chien aboyait fort\nle chat assis sur une carpette\n",
    );
    write(&src_law, "tax law is complex\n");
    write(&tgt_law, "le droit fiscal est complexe\n");
    let index = dir.join("idx.tmr");
    let out = tmr(&[
        "build",
        "--corpus",
        src_med.to_str().unwrap(),
        tgt_med.to_str().unwrap(),
        "medical",
        "--corpus",
        src_law.to_str().unwrap(),
        tgt_law.to_str().unwrap(),
        "law",
        "--out",
        index.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "build failed: {}", err_str(&out));
    index
}

#[test]
fn build_reports_stats_and_rebuilds_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("s.txt");
    let tgt = dir.path().join("t.txt");
    write(&src, "one two\nthree\nfour five six\n");
    write(&tgt, "un deux\ntrois\nquatre cinq six\n");
    let idx_a = dir.path().join("a.tmr");
    let idx_b = dir.path().join("b.tmr");
    let run = |out: &Path| {
        tmr(&[
            "build",
            "--corpus",
            src.to_str().unwrap(),
            tgt.to_str().unwrap(),
            "main",
            "--out",
            out.to_str().unwrap(),
        ])
    };
    let first = run(&idx_a);
    assert!(first.status.success());
    let text = out_str(&first);
    assert!(text.contains("units: 3"), "stats missing: {text}");
    assert!(text.contains("mean source tokens: 2.00"));

    let second = run(&idx_b);
    assert!(second.status.success());
    assert_eq!(fs::read(&idx_a).unwrap(), fs::read(&idx_b).unwrap());
}

#[test]
fn build_rejects_mismatched_line_counts_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("s.txt");
    let tgt = dir.path().join("t.txt");
    write(&src, "one\ntwo\nthree\n");
    write(&tgt, "un\ndeux\ntrois\nquatre\n");
    let out = tmr(&[
        "build",
        "--corpus",
        src.to_str().unwrap(),
        tgt.to_str().unwrap(),
        "main",
        "--out",
        dir.path().join("x.tmr").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(err_str(&out).contains("line count"), "{}", err_str(&out));
}

#[test]
fn verbatim_query_scores_one_point_zero_first() {
    let dir = tempfile::tempdir().unwrap();
    let index = build_index(dir.path());
    let queries = dir.path().join("q.txt");
    write(&queries, "the cat sat on the mat\n");
    let out = tmr(&[
        "retrieve",
        "--index",
        index.to_str().unwrap(),
        "--queries",
        queries.to_str().unwrap(),
        "--k",
        "3",
    ]);
    assert!(out.status.success());
    let line = out_str(&out);
    assert!(
        line.starts_with("{\"query\":\"the cat sat on the mat\",\"domain\":null,\"matches\":[{\"uid\":0,"),
        "unexpected record: {line}"
    );
    assert!(line.contains("\"base_score\":1.000000"));
}

#[test]
fn ngm_filter_drops_long_query_with_only_a_trigram_match() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("s.txt");
    let tgt = dir.path().join("t.txt");
    write(&src, "alpha beta gamma\n");
    write(&tgt, "a b c\n");
    let index = dir.path().join("i.tmr");
    assert!(tmr(&[
        "build",
        "--corpus",
        src.to_str().unwrap(),
        tgt.to_str().unwrap(),
        "main",
        "--out",
        index.to_str().unwrap(),
    ])
    .status
    .success());

    // 20 tokens, 3 of which are the memory sentence: shared n-gram length 3
    // misses 0.3 * 20 = 6, so the filtered run returns nothing.
    let query: Vec<&str> = "alpha beta gamma q4 q5 q6 q7 q8 q9 q10 q11 q12 q13 q14 q15 q16 q17 q18 q19 q20"
        .split(' ')
        .collect();
    assert_eq!(query.len(), 20);
    let queries = dir.path().join("q.txt");
    write(&queries, &format!("{}\n", query.join(" ")));

    let base = [
        "retrieve",
        "--index",
        index.to_str().unwrap(),
        "--queries",
        queries.to_str().unwrap(),
        "--tau",
        "0.3",
    ];
    let none = tmr(&[&base[..], &["--filter", "none"]].concat());
    let ngm = tmr(&[&base[..], &["--filter", "ngm"]].concat());
    assert!(none.status.success() && ngm.status.success());
    assert!(
        out_str(&none).contains("\"uid\":0"),
        "unfiltered run must return the match: {}",
        out_str(&none)
    );
    assert!(
        out_str(&ngm).contains("\"matches\":[]"),
        "filtered run must return nothing: {}",
        out_str(&ngm)
    );

    // A 5-token query clears the same relative threshold (3 >= 1.5).
    write(&queries, "alpha beta gamma q4 q5\n");
    let short = tmr(&[&base[..], &["--filter", "ngm"]].concat());
    assert!(out_str(&short).contains("\"uid\":0"));
}

#[test]
fn contrast_zero_is_byte_identical_to_no_contrast() {
    let dir = tempfile::tempdir().unwrap();
    let index = build_index(dir.path());
    let queries = dir.path().join("q.txt");
    write(&queries, "the cat sat on the mat\ntax law is complex\n");
    let base = [
        "retrieve",
        "--index",
        index.to_str().unwrap(),
        "--queries",
        queries.to_str().unwrap(),
        "--k",
        "2",
    ];
    let plain = tmr(&base);
    let zero = tmr(&[&base[..], &["--contrast", "0"]].concat());
    assert!(plain.status.success() && zero.status.success());
    assert_eq!(plain.stdout, zero.stdout);
}

#[test]
fn thread_count_does_not_change_output_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let index = build_index(dir.path());
    let queries = dir.path().join("q.txt");
    write(&queries, "the cat sat on the mat\na dog barked\ntax law\n");
    let args = [
        "retrieve",
        "--index",
        index.to_str().unwrap(),
        "--queries",
        queries.to_str().unwrap(),
        "--contrast",
        "0.3",
    ];
    let one = tmr_env(&args, &[("TMR_THREADS", "1")]);
    let eight = tmr_env(&args, &[("TMR_THREADS", "8")]);
    assert!(one.status.success() && eight.status.success());
    assert_eq!(one.stdout, eight.stdout);
}

#[test]
fn unknown_query_domain_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let index = build_index(dir.path());
    let queries = dir.path().join("q.txt");
    write(&queries, "the cat\tbogus\n");
    let out = tmr(&[
        "retrieve",
        "--index",
        index.to_str().unwrap(),
        "--queries",
        queries.to_str().unwrap(),
        "--domain-policy",
        "in-domain",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(err_str(&out).contains("bogus"));
}

#[test]
fn corrupt_and_wrong_version_indexes_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let index = build_index(dir.path());
    let queries = dir.path().join("q.txt");
    write(&queries, "anything\n");

    let truncated = dir.path().join("trunc.tmr");
    let bytes = fs::read(&index).unwrap();
    fs::write(&truncated, &bytes[..bytes.len() / 2]).unwrap();
    let out = tmr(&[
        "retrieve",
        "--index",
        truncated.to_str().unwrap(),
        "--queries",
        queries.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", err_str(&out));

    let wrong_version = dir.path().join("ver.tmr");
    let mut bumped = bytes.clone();
    bumped[4] = bumped[4].wrapping_add(1);
    fs::write(&wrong_version, &bumped).unwrap();
    let out = tmr(&[
        "retrieve",
        "--index",
        wrong_version.to_str().unwrap(),
        "--queries",
        queries.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", err_str(&out));
}

#[test]
fn exclude_self_skips_the_query_line_uid() {
    let dir = tempfile::tempdir().unwrap();
    let index = build_index(dir.path());
    let queries = dir.path().join("q.txt");
    // Line 0 == unit 0's source; leave-one-out must surface unit 2 instead.
    write(&queries, "the cat sat on the mat\n");
    let out = tmr(&[
        "retrieve",
        "--index",
        index.to_str().unwrap(),
        "--queries",
        queries.to_str().unwrap(),
        "--exclude-self",
        "--k",
        "1",
    ]);
    assert!(out.status.success());
    let text = out_str(&out);
    assert!(text.contains("\"uid\":2"), "{text}");
    assert!(!text.contains("\"uid\":0,"));
}

#[test]
fn metrics_on_self_retrieval_reports_full_coverage() {
    let dir = tempfile::tempdir().unwrap();
    let index = build_index(dir.path());
    let queries = dir.path().join("q.txt");
    write(&queries, "the cat sat on the mat\n");
    let matches = dir.path().join("m.jsonl");
    let run = tmr(&[
        "retrieve",
        "--index",
        index.to_str().unwrap(),
        "--queries",
        queries.to_str().unwrap(),
        "--k",
        "1",
    ]);
    fs::write(&matches, &run.stdout).unwrap();
    let out = tmr(&[
        "metrics",
        "--matches",
        matches.to_str().unwrap(),
        "--queries",
        queries.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = out_str(&out);
    let json: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(json["bow"]["coverage"], 1.0);
    assert_eq!(json["modified"]["coverage"], 1.0);
    assert_eq!(json["bow"]["relevance"], 1.0);
    assert!(text.contains("macro"));
}

#[test]
fn metrics_hand_fixture_matches_hand_computed_fractions() {
    let dir = tempfile::tempdir().unwrap();
    let queries = dir.path().join("q.txt");
    write(&queries, "a b c d\na b\n");
    let matches = dir.path().join("m.jsonl");
    let rec = |query: &str, sources: &[&str]| {
        let matches: Vec<String> = sources
            .iter()
            .enumerate()
            .map(|(i, s)| {
                format!(
                    "{{\"uid\":{i},\"source\":\"{s}\",\"target\":\"t\",\"base_score\":0.500000,\"adjusted_score\":0.500000}}"
                )
            })
            .collect();
        format!(
            "{{\"query\":\"{query}\",\"domain\":null,\"matches\":[{}],\"exhausted\":false}}\n",
            matches.join(",")
        )
    };
    fs::write(
        &matches,
        format!("{}{}", rec("a b c d", &["a b x"]), rec("a b", &["a b", "x y"])),
    )
    .unwrap();
    let out = tmr(&[
        "metrics",
        "--matches",
        matches.to_str().unwrap(),
        "--queries",
        queries.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", err_str(&out));
    let text = out_str(&out);
    let json: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    // Query 1: coverage 2/4, relevance 2/3. Query 2: coverage 1, relevance
    // mean(1, 0) = 1/2. Single domain, so the macro mean averages the two.
    assert_eq!(json["bow"]["coverage"], 0.75);
    let rel = json["bow"]["relevance"].as_f64().unwrap();
    assert!((rel - (2.0 / 3.0 + 0.5) / 2.0).abs() < 1e-12);
    assert_eq!(json["bow"]["mean_example_length"], 2.5);
    assert_eq!(json["modified"]["coverage"], 0.75);
}

#[test]
fn metrics_rejects_mismatched_inputs_and_accepts_empty_ones() {
    let dir = tempfile::tempdir().unwrap();
    let queries = dir.path().join("q.txt");
    let matches = dir.path().join("m.jsonl");
    write(&queries, "a b\n");
    fs::write(&matches, "").unwrap();
    let out = tmr(&[
        "metrics",
        "--matches",
        matches.to_str().unwrap(),
        "--queries",
        queries.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // Same count but different text is also a correspondence error.
    fs::write(
        &matches,
        "{\"query\":\"different\",\"domain\":null,\"matches\":[],\"exhausted\":true}\n",
    )
    .unwrap();
    let out = tmr(&[
        "metrics",
        "--matches",
        matches.to_str().unwrap(),
        "--queries",
        queries.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(err_str(&out).contains("correspond"));

    write(&queries, "");
    fs::write(&matches, "").unwrap();
    let out = tmr(&[
        "metrics",
        "--matches",
        matches.to_str().unwrap(),
        "--queries",
        queries.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let json: serde_json::Value =
        serde_json::from_str(out_str(&out).lines().next().unwrap()).unwrap();
    assert_eq!(json["bow"]["n_queries"], 0);
    assert_eq!(json["bow"]["coverage"], 0.0);
}

#[test]
fn prompts_command_expands_the_template() {
    let dir = tempfile::tempdir().unwrap();
    let matches = dir.path().join("m.jsonl");
    fs::write(
        &matches,
        "{\"query\":\"the query\",\"domain\":null,\"matches\":[{\"uid\":0,\"source\":\"s one\",\"target\":\"t one\",\"base_score\":0.900000,\"adjusted_score\":0.900000}],\"exhausted\":false}\n",
    )
    .unwrap();
    let out = tmr(&[
        "prompts",
        "--matches",
        matches.to_str().unwrap(),
        "--shots",
        "1",
    ]);
    assert!(out.status.success());
    let json: serde_json::Value =
        serde_json::from_str(out_str(&out).lines().next().unwrap()).unwrap();
    let prompt = json["prompt"].as_str().unwrap();
    assert_eq!(
        prompt,
        "[src]: s one. =[trg]: t one\n[src]: the query. =[trg]:"
    );
    assert_eq!(json["short"], false);

    // Asking for more shots than available marks the record.
    let out = tmr(&[
        "prompts",
        "--matches",
        matches.to_str().unwrap(),
        "--shots",
        "3",
    ]);
    let json: serde_json::Value =
        serde_json::from_str(out_str(&out).lines().next().unwrap()).unwrap();
    assert_eq!(json["short"], true);
    assert_eq!(json["examples"], 1);
}

#[test]
fn density_reports_components_and_percent() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.txt");
    // Exactly one linked pair among three sentences: density 1 - 1/2.
    write(&corpus, "a b c d\na b c e\nz y x w\n");
    let out = tmr(&["density", "--corpus", corpus.to_str().unwrap(), "--mode", "exact"]);
    assert!(out.status.success());
    let text = out_str(&out);
    assert!(text.contains("sentences: 3"), "{text}");
    assert!(text.contains("ncc: 2"));
    assert!(text.contains("density: 50.00%"));
    assert!(text.contains("threshold: 0.4"));
    assert!(text.contains("mode: exact"));

    let pre = tmr(&[
        "density",
        "--corpus",
        corpus.to_str().unwrap(),
        "--mode",
        "prefiltered",
    ]);
    let pre_text = out_str(&pre);
    assert!(pre_text.contains("ncc: 2"));
    assert!(pre_text.contains("mode: prefiltered"));

    // Degenerate corpus warns and reports density 1.
    write(&corpus, "only one\n");
    let out = tmr(&["density", "--corpus", corpus.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out_str(&out).contains("density: 100.00%"));
    assert!(err_str(&out).contains("fewer than 2"));
}

#[test]
fn timing_goes_to_stderr_and_leaves_stdout_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let index = build_index(dir.path());
    let queries = dir.path().join("q.txt");
    write(&queries, "the cat sat on the mat\n");
    let args = [
        "retrieve",
        "--index",
        index.to_str().unwrap(),
        "--queries",
        queries.to_str().unwrap(),
    ];
    let plain = tmr(&args);
    let timed = tmr(&[&args[..], &["--timing"]].concat());
    assert_eq!(plain.stdout, timed.stdout);
    assert!(err_str(&timed).contains("timing: queries=1"));
    assert!(err_str(&plain).is_empty());
}

#[test]
fn tsv_format_flattens_one_match_per_row() {
    let dir = tempfile::tempdir().unwrap();
    let index = build_index(dir.path());
    let queries = dir.path().join("q.txt");
    write(&queries, "the cat sat on the mat\n");
    let out = tmr(&[
        "retrieve",
        "--index",
        index.to_str().unwrap(),
        "--queries",
        queries.to_str().unwrap(),
        "--format",
        "tsv",
        "--k",
        "2",
    ]);
    assert!(out.status.success());
    let text = out_str(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "query_id\tquery\tdomain\trank\tuid\tsource\ttarget\tbase_score\tadjusted_score"
    );
    let first = lines.next().unwrap();
    assert!(first.starts_with("0\tthe cat sat on the mat\t\t1\t0\t"));
    assert!(first.ends_with("1.000000\t1.000000"));
}
