use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::Serialize;
use serde_json::json;

use seedscan::ga::{
    evolve, EvolveResult, ExecOracle, GaConfig, GeneratorOracle, MockOracle, ModifierVocabulary, OracleRequest,
    OracleResponse,
};
use seedscan::search::{
    confidence_gap, scan_range, two_stage_search, SearchConfig, SearchMode, SearchReport, SearchStats, FULL32,
};
use seedscan::stats::{read_pairs_csv, read_seeds_csv, seed_histogram, ssdm_dssm_summary};
use seedscan::tensor::parse_shape;
use seedscan::{chacha_randn, randn, read_npy, write_npy, SecureSeed, Seed};

use crate::args::{GaRecoverArgs, GenNoiseArgs, Mode, RecoverSeedArgs, ServeMockArgs, StatsArgs};
use crate::error::CliError;
use crate::report::RunReport;

type CmdResult = Result<(), CliError>;

pub fn gen_noise(a: &GenNoiseArgs) -> CmdResult {
    let shape = parse_shape(&a.shape)?;
    let noise = match (&a.key, a.seed) {
        (Some(key), _) => chacha_randn(&key.parse::<SecureSeed>()?, &shape)?,
        (None, Some(seed)) => randn(Seed(seed), &shape)?,
        (None, None) => return Err(CliError::Usage("--seed or --secure --key is required".into())),
    };
    write_npy(&noise, &a.out)?;
    println!("wrote {} elements {:?} to {}", noise.len(), shape, a.out.display());
    Ok(())
}

#[derive(Serialize)]
struct RecoverConfig<'a> {
    target: &'a Path,
    search: SearchConfig,
    /// Range mode scans every seed on the full latent; full32 mode runs the
    /// two-stage filter.
    two_stage: bool,
    min_z: f64,
}

#[derive(Serialize)]
struct RecoverResults {
    #[serde(flatten)]
    report: SearchReport,
    low_confidence: bool,
    stats: SearchStats,
}

fn search_config(a: &RecoverSeedArgs, workers: usize) -> Result<SearchConfig, CliError> {
    let mode = match a.mode {
        Mode::Range => {
            if a.subrange_bits.is_some() {
                return Err(CliError::Usage("--subrange-bits applies to full32 mode only".into()));
            }
            match (a.lo, a.hi) {
                (Some(lo), Some(hi)) => SearchMode::Range { lo, hi },
                _ => return Err(CliError::Usage("range mode needs --lo and --hi".into())),
            }
        }
        Mode::Full32 => {
            if a.lo.is_some() || a.hi.is_some() {
                return Err(CliError::Usage(
                    "--lo/--hi conflict with full32 mode; use --subrange-bits".into(),
                ));
            }
            match a.subrange_bits {
                Some(32) | None => SearchMode::Full32,
                Some(b) => SearchMode::Range { lo: 0, hi: 1 << b },
            }
        }
    };
    let d = SearchConfig::default();
    Ok(SearchConfig {
        mode,
        chunk_size: a.chunk_size.unwrap_or(d.chunk_size),
        stage1_len: a.stage1_len.unwrap_or(d.stage1_len),
        stage1_keep: a.stage1_keep.unwrap_or(d.stage1_keep),
        stage2_len: a.stage2_len.unwrap_or(d.stage2_len),
        finalists: a.finalists.unwrap_or(d.finalists),
        baseline_sample: a.baseline_sample.unwrap_or(d.baseline_sample),
        workers,
    })
}

pub fn recover_seed(a: &RecoverSeedArgs, workers: usize) -> CmdResult {
    let search = search_config(a, workers)?;
    let target = read_npy(&a.target)?;
    let started = Instant::now();
    let two_stage = a.mode == Mode::Full32;
    let ranking = if two_stage {
        two_stage_search(&target, &search)?
    } else {
        let (lo, hi) = search.mode.bounds();
        scan_range(&target, Seed(lo), Seed(hi), workers)?
    };
    let wall = started.elapsed().as_secs_f64();
    let (gap, z) = confidence_gap(&ranking);
    let low_confidence = z.is_nan() || z < a.min_z;
    let results = RecoverResults {
        report: ranking.report(wall),
        low_confidence,
        stats: ranking.stats,
    };
    let evaluated = ranking.evaluated;
    RunReport::new(
        RecoverConfig {
            target: &a.target,
            search,
            two_stage,
            min_z: a.min_z,
        },
        results,
        wall,
    )
    .write(&a.report)?;

    println!(
        "best seed {} (loss {:.4}), second {} (loss {:.4}), mean {:.4}",
        ranking.best.seed.raw(),
        ranking.best.loss,
        ranking.second_best.seed.raw(),
        ranking.second_best.loss,
        ranking.mean_loss
    );
    println!("gap ratio {gap:.3}, z-score {z:.2}, {evaluated} seeds in {wall:.2} s");
    if two_stage && evaluated < FULL32 {
        let full = wall * FULL32 as f64 / evaluated as f64;
        println!("linear extrapolation to 2^32 seeds: {:.1} min", full / 60.0);
    }
    if low_confidence {
        return Err(CliError::LowConfidence { z, min_z: a.min_z });
    }
    Ok(())
}

#[derive(Serialize)]
struct GaRecoverConfig<'a> {
    target: &'a Path,
    prefix: &'a str,
    seed: u64,
    vocab: &'a Path,
    threshold: f64,
    oracle: &'a str,
    ga: &'a GaConfig,
}

#[derive(Serialize)]
struct GaRecoverResults {
    prompt: String,
    #[serde(flatten)]
    run: EvolveResult,
}

fn ga_config(a: &GaRecoverArgs, workers: usize) -> GaConfig {
    let d = GaConfig::default();
    GaConfig {
        population: a.population.unwrap_or(d.population),
        generations: a.generations.unwrap_or(d.generations),
        tournament_size: a.tournament_size.unwrap_or(d.tournament_size),
        p_replace: a.p_replace.unwrap_or(d.p_replace),
        p_insert: a.p_insert.unwrap_or(d.p_insert),
        p_delete: a.p_delete.unwrap_or(d.p_delete),
        elite_fraction: a.elite_fraction.unwrap_or(d.elite_fraction),
        rng_seed: Seed(a.rng_seed),
        workers,
    }
}

fn open_oracle(choice: &str, shape: &[usize], timeout: f64) -> Result<Box<dyn GeneratorOracle>, CliError> {
    if choice == "mock" {
        return Ok(Box::new(MockOracle::new(shape)?));
    }
    let Some(cmd) = choice.strip_prefix("exec:") else {
        return Err(CliError::Usage(format!(
            "--oracle must be `mock` or `exec:COMMAND`, got `{choice}`"
        )));
    };
    if !(timeout > 0.0 && timeout.is_finite()) {
        return Err(CliError::Usage("--oracle-timeout must be positive".into()));
    }
    Ok(Box::new(ExecOracle::spawn(cmd, Duration::from_secs_f64(timeout))?))
}

pub fn ga_recover(a: &GaRecoverArgs, workers: usize) -> CmdResult {
    let cfg = ga_config(a, workers);
    cfg.validate()?;
    let target = read_npy(&a.target)?;
    let vocab = ModifierVocabulary::from_csv(&a.vocab, a.threshold)?;
    let oracle = open_oracle(&a.oracle, target.shape(), a.oracle_timeout)?;
    let started = Instant::now();
    let run = evolve(&target, &a.prefix, Seed(a.seed), &vocab, oracle.as_ref(), &cfg)?;
    let wall = started.elapsed().as_secs_f64();
    let prompt = run.best.prompt(&a.prefix);
    println!(
        "best fitness {:.6} after {} generations",
        run.best_fitness,
        run.trace.len()
    );
    println!(
        "{} oracle calls, {} cache hits, {wall:.2} s",
        run.evaluations, run.cache_hits
    );
    println!("prompt: {prompt}");
    RunReport::new(
        GaRecoverConfig {
            target: &a.target,
            prefix: &a.prefix,
            seed: a.seed,
            vocab: &a.vocab,
            threshold: a.threshold,
            oracle: &a.oracle,
            ga: &cfg,
        },
        GaRecoverResults { prompt, run },
        wall,
    )
    .write(&a.report)
}

pub fn stats(a: &StatsArgs) -> CmdResult {
    let started = Instant::now();
    let (config, results) = match (&a.input.pairs, &a.input.seeds) {
        (Some(path), _) => {
            let summary = ssdm_dssm_summary(&read_pairs_csv(path)?)?;
            println!(
                "n = {}, median ssdm {:.4}, median dssm {:.4}, median delta {:.4}",
                summary.n, summary.median_ssdm, summary.median_dssm, summary.median_delta
            );
            println!(
                "signed-rank W = {}, p = {:.3e} ({:?})",
                summary.wilcoxon.statistic, summary.wilcoxon.p_value, summary.wilcoxon.method
            );
            (
                json!({ "pairs": path }),
                serde_json::to_value(summary).expect("summary serializes"),
            )
        }
        (None, Some(path)) => {
            let records = read_seeds_csv(path)?;
            let h = seed_histogram(&records.seeds, records.cpu_flags.as_deref())?;
            println!(
                "{} seeds, effective 32-bit fraction {:.4}",
                h.total, h.effective32_fraction
            );
            for (b, &c) in h.buckets.iter().enumerate().filter(|(_, &c)| c > 0) {
                println!("  2^{b:<2} {c}");
            }
            (
                json!({ "seeds": path }),
                serde_json::to_value(h).expect("histogram serializes"),
            )
        }
        (None, None) => return Err(CliError::Usage("--pairs or --seeds is required".into())),
    };
    RunReport::new(config, results, started.elapsed().as_secs_f64()).write(&a.report)
}

fn mock_reply(oracle: &MockOracle, dir: &Path, line: &str) -> OracleResponse {
    let req: OracleRequest = match serde_json::from_str(line) {
        Ok(r) => r,
        Err(e) => {
            let id = serde_json::from_str::<serde_json::Value>(line)
                .ok()
                .and_then(|v| v.get("id").and_then(|i| i.as_u64()))
                .unwrap_or(0);
            return OracleResponse {
                id,
                latent_path: None,
                error: Some(format!("malformed request: {e}")),
            };
        }
    };
    let path: PathBuf = dir.join(format!("latent_{}.npy", req.id));
    let outcome = oracle
        .generate(&req.prefix, &req.modifiers, req.seed)
        .and_then(|z| write_npy(&z, &path));
    match outcome {
        Ok(()) => OracleResponse {
            id: req.id,
            latent_path: Some(path.display().to_string()),
            error: None,
        },
        Err(e) => OracleResponse {
            id: req.id,
            latent_path: None,
            error: Some(e.to_string()),
        },
    }
}

pub fn serve_mock_oracle(a: &ServeMockArgs) -> CmdResult {
    let oracle = MockOracle::new(&parse_shape(&a.shape)?)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|e| CliError::io(&a.out_dir, e))?;
    let stdin = std::io::stdin();
    let mut out = std::io::stdout().lock();
    for line in stdin.lock().lines() {
        let line = line.map_err(|e| CliError::io(Path::new("<stdin>"), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = serde_json::to_string(&mock_reply(&oracle, &a.out_dir, &line)).expect("reply serializes");
        writeln!(out, "{reply}")
            .and_then(|_| out.flush())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
    }
    Ok(())
}
