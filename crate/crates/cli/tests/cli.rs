use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use seedscan::ga::{GeneratorOracle, MockOracle};
use seedscan::stats::{synthetic_pairs, write_pairs_csv};
use seedscan::{randn, read_npy, write_npy, Seed};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_seedscan"));
    c.env_remove("SEEDSCAN_WORKERS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const PREFIX: &str = "a lighthouse at dusk";

fn vocab_csv(dir: &Path) -> PathBuf {
    let path = dir.join("vocab.csv");
    let mut text = String::from("modifier,frequency\n");
    for i in 0..20 {
        text.push_str(&format!("style {i},0.05\n"));
    }
    text.push_str("rare,0.001\n");
    std::fs::write(&path, text).unwrap();
    path
}

fn planted_target(dir: &Path, shape: &[usize], seed: u64) -> PathBuf {
    let oracle = MockOracle::new(shape).unwrap();
    let mods: Vec<String> = ["style 2", "style 7", "style 11"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let path = dir.join("target.npy");
    write_npy(&oracle.generate(PREFIX, &mods, Seed(seed)).unwrap(), &path).unwrap();
    path
}

#[test]
fn gen_noise_writes_truncation_equivalent_files() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.npy"), dir.path().join("b.npy"));
    assert_eq!(
        code(&run(&[
            "gen-noise",
            "--seed",
            "42",
            "--shape",
            "16x64x64",
            "--out",
            p(&a)
        ])),
        0
    );
    assert_eq!(
        code(&run(&[
            "gen-noise",
            "--seed",
            "4294967338",
            "--shape",
            "16x64x64",
            "--out",
            p(&b)
        ])),
        0
    );
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let v = read_npy(&a).unwrap();
    assert_eq!(v.shape(), [16, 64, 64]);
    assert!(v.bit_eq(&randn(Seed(42), &[16, 64, 64]).unwrap()));
}

#[test]
fn gen_noise_flag_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("n.npy");
    assert_eq!(
        code(&run(&["gen-noise", "--secure", "--shape", "4x4", "--out", p(&out)])),
        2
    );
    assert_eq!(
        code(&run(&["gen-noise", "--seed", "1", "--shape", "4x0", "--out", p(&out)])),
        2
    );
    assert_eq!(
        code(&run(&[
            "gen-noise",
            "--secure",
            "--key",
            "abc",
            "--shape",
            "4",
            "--out",
            p(&out)
        ])),
        2
    );
    let missing = dir.path().join("no/such/dir/n.npy");
    assert_eq!(
        code(&run(&[
            "gen-noise",
            "--seed",
            "1",
            "--shape",
            "4",
            "--out",
            p(&missing)
        ])),
        1
    );
    let key = "00".repeat(32);
    assert_eq!(
        code(&run(&[
            "gen-noise",
            "--secure",
            "--key",
            &key,
            "--shape",
            "4x4",
            "--out",
            p(&out)
        ])),
        0
    );
    assert_eq!(read_npy(&out).unwrap().shape(), [4, 4]);
}

#[test]
fn recover_seed_range_finds_the_planted_seed() {
    let dir = tempfile::tempdir().unwrap();
    let target = planted_target(dir.path(), &[4, 32, 32], 61_234);
    let rep = dir.path().join("r.json");
    let o = run(&[
        "recover-seed",
        "--target",
        p(&target),
        "--mode",
        "range",
        "--lo",
        "0",
        "--hi",
        "100000",
        "--report",
        p(&rep),
        "--workers",
        "2",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(&rep);
    assert_eq!(r["results"]["best_seed"], 61_234);
    assert_eq!(r["results"]["evaluated"], 100_000);
    assert_eq!(r["results"]["low_confidence"], false);
    assert!(r["results"]["wall_seconds"].as_f64().unwrap() > 0.0);
    assert!(r["results"]["z_score"].as_f64().unwrap() > 10.0);
    assert_eq!(r["config"]["search"]["workers"], 2);
    assert!(r["version"].is_string() && r["command"].is_array());
    assert!(String::from_utf8_lossy(&o.stdout).contains("best seed 61234"));
}

#[test]
fn recover_seed_rerun_from_config_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let target = planted_target(dir.path(), &[4, 32, 32], 3_000);
    let (r1, r2) = (dir.path().join("1.json"), dir.path().join("2.json"));
    let args = |rep: &Path, workers: &str| {
        vec![
            "recover-seed".to_string(),
            "--target".into(),
            p(&target).into(),
            "--mode".into(),
            "full32".into(),
            "--subrange-bits".into(),
            "14".into(),
            "--stage1-len".into(),
            "512".into(),
            "--stage1-keep".into(),
            "256".into(),
            "--stage2-len".into(),
            "2048".into(),
            "--report".into(),
            p(rep).into(),
            "--workers".into(),
            workers.into(),
        ]
    };
    assert_eq!(code(&bin().args(args(&r1, "1")).output().unwrap()), 0);
    assert_eq!(code(&bin().args(args(&r2, "3")).output().unwrap()), 0);
    let strip = |mut v: Value| {
        v["results"]
            .as_object_mut()
            .unwrap()
            .retain(|k, _| !k.contains("seconds") && k != "stats");
        v["results"].clone()
    };
    let (a, b) = (report(&r1), report(&r2));
    assert_eq!(
        a["config"]["search"]["mode"],
        serde_json::json!({"kind": "range", "lo": 0, "hi": 16384})
    );
    assert_eq!(a["results"]["stats"]["stage1_reads"], 16_384 * 512);
    assert_eq!(strip(a), strip(b));
}

#[test]
fn recover_seed_usage_and_confidence_errors() {
    let dir = tempfile::tempdir().unwrap();
    let target = planted_target(dir.path(), &[4, 32, 32], 500_000);
    let rep = dir.path().join("r.json");
    let t = p(&target);
    let r = p(&rep);
    assert_eq!(
        code(&run(&[
            "recover-seed",
            "--target",
            t,
            "--mode",
            "full32",
            "--lo",
            "0",
            "--report",
            r
        ])),
        2
    );
    assert_eq!(
        code(&run(&[
            "recover-seed",
            "--target",
            t,
            "--mode",
            "range",
            "--lo",
            "0",
            "--report",
            r
        ])),
        2
    );
    assert_eq!(
        code(&run(&[
            "recover-seed",
            "--target",
            t,
            "--mode",
            "range",
            "--lo",
            "0",
            "--hi",
            "9",
            "--subrange-bits",
            "4",
            "--report",
            r
        ])),
        2
    );
    assert_eq!(
        code(&run(&[
            "recover-seed",
            "--target",
            "/no/such.npy",
            "--mode",
            "range",
            "--lo",
            "0",
            "--hi",
            "9",
            "--report",
            r
        ])),
        1
    );
    // The planted seed lies outside the scanned range.
    let o = run(&[
        "recover-seed",
        "--target",
        t,
        "--mode",
        "range",
        "--lo",
        "0",
        "--hi",
        "20000",
        "--report",
        r,
    ]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert_eq!(report(&rep)["results"]["low_confidence"], true);
    let o = bin()
        .args([
            "recover-seed",
            "--target",
            t,
            "--mode",
            "range",
            "--lo",
            "0",
            "--hi",
            "10",
            "--report",
            r,
        ])
        .env("SEEDSCAN_WORKERS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

fn ga_args<'a>(target: &'a str, vocab: &'a str, rep: &'a str, oracle: &'a str) -> Vec<&'a str> {
    vec![
        "ga-recover",
        "--target",
        target,
        "--prefix",
        PREFIX,
        "--seed",
        "77",
        "--vocab",
        vocab,
        "--oracle",
        oracle,
        "--population",
        "20",
        "--generations",
        "5",
        "--rng-seed",
        "3",
        "--report",
        rep,
    ]
}

#[test]
fn ga_recover_mock_smoke_run() {
    let dir = tempfile::tempdir().unwrap();
    let target = planted_target(dir.path(), &[4, 16, 16], 77);
    let vocab = vocab_csv(dir.path());
    let rep = dir.path().join("ga.json");
    let o = run(&ga_args(p(&target), p(&vocab), p(&rep), "mock"));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(&rep);
    let trace: Vec<f64> = r["results"]["trace"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(trace.len(), 5);
    assert!(trace.windows(2).all(|w| w[1] <= w[0]));
    let prompt = r["results"]["prompt"].as_str().unwrap();
    assert!(prompt.starts_with(&format!("{PREFIX}, ")));
    let best: Vec<&str> = r["results"]["best"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(prompt, format!("{PREFIX}, {}", best.join(", ")));
    assert!(!best.contains(&"rare"));
    assert_eq!(r["config"]["ga"]["population"], 20);
}

#[test]
fn ga_recover_exec_oracle_matches_mock() {
    let dir = tempfile::tempdir().unwrap();
    let target = planted_target(dir.path(), &[4, 16, 16], 77);
    let vocab = vocab_csv(dir.path());
    let (mock_rep, exec_rep) = (dir.path().join("m.json"), dir.path().join("e.json"));
    assert_eq!(code(&run(&ga_args(p(&target), p(&vocab), p(&mock_rep), "mock"))), 0);
    let latents = dir.path().join("latents");
    let oracle = format!(
        "exec:'{}' serve-mock-oracle --shape 4x16x16 --out-dir '{}'",
        env!("CARGO_BIN_EXE_seedscan"),
        latents.display()
    );
    let o = run(&ga_args(p(&target), p(&vocab), p(&exec_rep), &oracle));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (m, e) = (report(&mock_rep), report(&exec_rep));
    assert_eq!(m["results"]["best"], e["results"]["best"]);
    assert_eq!(m["results"]["trace"], e["results"]["trace"]);
}

#[test]
fn ga_recover_wrong_shape_oracle_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let target = planted_target(dir.path(), &[4, 16, 16], 77);
    let vocab = vocab_csv(dir.path());
    let rep = dir.path().join("ga.json");
    let oracle = format!(
        "exec:'{}' serve-mock-oracle --shape 4x8x8 --out-dir '{}'",
        env!("CARGO_BIN_EXE_seedscan"),
        dir.path().join("latents").display()
    );
    let o = run(&ga_args(p(&target), p(&vocab), p(&rep), &oracle));
    assert_eq!(code(&o), 4);
    let err = stderr(&o);
    assert!(err.contains("shape contract"), "{err}");
    assert!(err.contains("last exchange"), "{err}");

    let o = run(&ga_args(p(&target), p(&vocab), p(&rep), "exec:exit 7"));
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    assert_eq!(code(&run(&ga_args(p(&target), p(&vocab), p(&rep), "telepathy"))), 2);
}

#[test]
fn mock_oracle_server_answers_every_request_once() {
    use std::io::{BufRead, BufReader, Write};
    let dir = tempfile::tempdir().unwrap();
    let mut child = bin()
        .args(["serve-mock-oracle", "--shape", "4x4", "--out-dir", p(dir.path())])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    let mut stdin = child.stdin.take().unwrap();
    let mut lines = BufReader::new(child.stdout.take().unwrap()).lines();
    for id in 0..100u64 {
        let mods: Vec<String> = (0..id % 4).map(|m| format!("m{m}")).collect();
        let req = serde_json::json!({"id": id * 3, "prefix": "p", "modifiers": mods, "seed": id});
        writeln!(stdin, "{req}").unwrap();
        let resp: Value = serde_json::from_str(&lines.next().unwrap().unwrap()).unwrap();
        assert_eq!(resp["id"], id * 3);
        let z = read_npy(resp["latent_path"].as_str().unwrap()).unwrap();
        assert_eq!(z.shape(), [4, 4]);
    }
    writeln!(stdin, "{{\"id\": 5, \"prefix\": 1}}").unwrap();
    let resp: Value = serde_json::from_str(&lines.next().unwrap().unwrap()).unwrap();
    assert_eq!(resp["id"], 5);
    assert!(resp["error"].as_str().unwrap().contains("malformed"));
    drop(stdin);
    assert!(child.wait().unwrap().success());
}

#[test]
fn stats_pairs_and_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = dir.path().join("pairs.csv");
    write_pairs_csv(&pairs, &synthetic_pairs(200, 1)).unwrap();
    let rep = dir.path().join("s.json");
    let o = run(&["stats", "--pairs", p(&pairs), "--report", p(&rep)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(&rep);
    assert!(r["results"]["wilcoxon"]["p_value"].as_f64().unwrap() < 1e-4);
    assert_eq!(r["results"]["wilcoxon"]["method"], "normal-approximation");

    let seeds = dir.path().join("seeds.csv");
    let mut text = String::from("seed\n");
    for i in 0..95u64 {
        text.push_str(&format!("{}\n", i * 40_000_000));
    }
    for i in 0..5u64 {
        text.push_str(&format!("{}\n", (1u64 << 42) + i * (1 << 45)));
    }
    std::fs::write(&seeds, text).unwrap();
    assert_eq!(code(&run(&["stats", "--seeds", p(&seeds), "--report", p(&rep)])), 0);
    assert_eq!(report(&rep)["results"]["effective32_fraction"], 0.95);
}

#[test]
fn stats_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("s.json");
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(code(&run(&["stats", "--pairs", p(&empty), "--report", p(&rep)])), 2);
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "label,ssdm,dssm\na,0.2,1.0\nb,0.3,oops\n").unwrap();
    let o = run(&["stats", "--pairs", p(&bad), "--report", p(&rep)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    assert_eq!(code(&run(&["stats", "--report", p(&rep)])), 2);
    assert_eq!(
        code(&run(&[
            "stats",
            "--pairs",
            p(&bad),
            "--seeds",
            p(&bad),
            "--report",
            p(&rep)
        ])),
        2
    );
    assert_eq!(
        code(&run(&["stats", "--pairs", "/no/such.csv", "--report", p(&rep)])),
        1
    );
}
