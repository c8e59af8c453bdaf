use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_genusforge"))
}

fn run(args: &[&str]) -> (String, String, i32) {
    let out = bin().args(args).output().expect("spawn genusforge");
    (
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
        out.status.code().unwrap_or(-1),
    )
}

#[test]
fn enumerate_rank1_det1_has_two_records() {
    let (stdout, _, code) = run(&["enumerate", "--rank", "1", "--det", "1"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.lines().count(), 2);
}

#[test]
fn enumerate_even_contains_hyperbolic_plane() {
    let (stdout, _, code) = run(&["enumerate", "--rank", "2", "--det", "1", "--even"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("sig(1,1); 2:[0^+2_0:II]"), "{stdout}");
}

#[test]
fn symbol_representative_roundtrip() {
    let dir = std::env::temp_dir().join("genusforge-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let gram = dir.join("id2.json");
    std::fs::write(&gram, r#"{"gram": [[1,0],[0,1]]}"#).unwrap();
    let (text, _, code) = run(&["symbol", gram.to_str().unwrap()]);
    assert_eq!(code, 0);
    let symbol = text.trim();
    assert_eq!(symbol, "sig(2,0); 2:[0^+2_2:I]");

    let (json, _, code) = run(&["representative", symbol]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(json.trim()).unwrap();
    assert_eq!(v["verified"], serde_json::Value::Bool(true));
    // feed the produced gram back through `symbol`
    let back = dir.join("back.json");
    std::fs::write(&back, format!(r#"{{"gram": {}}}"#, v["gram"])).unwrap();
    let (text2, _, code) = run(&["symbol", back.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(text2.trim(), symbol);
}

#[test]
fn maximal_produces_certificates() {
    let dir = std::env::temp_dir().join("genusforge-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let gram = dir.join("d22.json");
    std::fs::write(&gram, r#"{"gram": [[2,0],[0,-2]]}"#).unwrap();
    let (json, _, code) = run(&["maximal", gram.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(json.trim()).unwrap();
    assert!(!v["certificates"].as_array().unwrap().is_empty());
    assert_eq!(v["gram"][0].as_array().unwrap().len(), 2);
}

#[test]
fn parse_errors_exit_2() {
    let (_, stderr, code) = run(&["representative", "sig(2,0); 2:[0^?2]"]);
    assert_eq!(code, 2, "{stderr}");
    let (_, _, code) = run(&["enumerate", "--rank", "2"]);
    assert_eq!(code, 2);
    let (_, _, code) = run(&["no-such-command"]);
    assert_eq!(code, 2);
}

#[test]
fn count_rows_match_exact_counts() {
    let (stdout, _, code) = run(&["count", "--rank", "5", "--prime", "3", "--k-max", "2"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = stdout.trim().lines().collect();
    assert_eq!(lines[0], "n,D,p,k,exact,series,asym,lower,upper,fD");
    assert!(lines[1].starts_with("5,1,3,0,1,1"));
    assert!(lines[2].starts_with("5,3,3,1,2,2"));
    assert!(lines[3].starts_with("5,9,3,2,4,4"));
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let args = [
        "enumerate",
        "--rank",
        "2",
        "--max-det",
        "6",
        "--with-representatives",
        "--seed",
        "99",
    ];
    let (a, _, ca) = run(&args);
    let mut with_jobs = args.to_vec();
    with_jobs.extend_from_slice(&["--jobs", "2"]);
    let (b, _, cb) = run(&with_jobs);
    assert_eq!(ca, 0);
    assert_eq!(cb, 0);
    assert_eq!(a, b, "outputs must be byte-identical regardless of --jobs");
}

#[test]
fn env_seed_is_honored() {
    let out1 = bin()
        .args(["representative", "sig(1,1); 2:[0^+2_0:II]"])
        .env("GENUSFORGE_SEED", "7")
        .output()
        .unwrap();
    let out2 = bin()
        .args(["representative", "sig(1,1); 2:[0^+2_0:II]"])
        .env("GENUSFORGE_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(out1.stdout, out2.stdout);
}
