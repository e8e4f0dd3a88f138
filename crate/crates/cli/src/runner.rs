//! Command dispatch, worker pool, CSV emission and the run manifest.
//!
//! Every output file is written atomically (temp + rename) and hashed into
//! manifest.csv. Report cells are independent jobs executed on a bounded
//! pool and collected in input order, so equal configs and seeds produce
//! byte-identical data CSVs at any worker count (the manifest also records
//! wall time, which is the one intentionally non-reproducible field).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use orbitlab::dimlab::{self, CoveringCache, ReportParams, Verdict};
use orbitlab::hitting;
use orbitlab::markov::word_string;
use orbitlab::orbit::ItineraryStream;
use orbitlab::rat;
use orbitlab::thermo::{self, GibbsModel, Potential, Spectrum};

use crate::config::{self, LoadedConfig, OrbitKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Validate,
    Spectrum,
    Hitstats,
    Recurrence,
    Coverage,
    Report,
}

impl CommandKind {
    fn name(&self) -> &'static str {
        match self {
            CommandKind::Validate => "validate",
            CommandKind::Spectrum => "spectrum",
            CommandKind::Hitstats => "hitstats",
            CommandKind::Recurrence => "recurrence",
            CommandKind::Coverage => "coverage",
            CommandKind::Report => "report",
        }
    }
}

pub struct RunOptions {
    pub config_path: PathBuf,
    pub out_dir: Option<PathBuf>,
    pub seeds: Option<Vec<u64>>,
    pub workers: usize,
    pub budget: Option<u64>,
}

/// Exit codes: 0 ok, 1 config error, 2 budget/partial, 3 internal.
pub fn run(cmd: CommandKind, opts: &RunOptions) -> i32 {
    match run_inner(cmd, opts) {
        Ok(partial) => {
            if partial {
                2
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let text = format!("{e:#}");
            if text.contains("config")
                || text.contains("parse")
                || text.contains("axiom")
                || text.contains("domain error")
                || text.contains("requires a potential")
            {
                1
            } else {
                3
            }
        }
    }
}

fn run_inner(cmd: CommandKind, opts: &RunOptions) -> Result<bool> {
    let started = Instant::now();
    let text = std::fs::read_to_string(&opts.config_path)
        .with_context(|| format!("config {:?}", opts.config_path))?;
    let mut cfg = config::parse_config(&text)?;
    if let Some(seeds) = &opts.seeds {
        cfg.orbit.seeds = seeds.clone();
    }
    if let Some(budget) = opts.budget {
        cfg.experiment.budget = Some(budget);
    }
    let out_dir = opts
        .out_dir
        .clone()
        .or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out_dir).with_context(|| format!("output dir {out_dir:?}"))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .context("worker pool")?;

    let mut files: Vec<(String, String)> = Vec::new();
    let partial = pool.install(|| match cmd {
        CommandKind::Validate => cmd_validate(&cfg, &mut files),
        CommandKind::Spectrum => cmd_spectrum(&cfg, &mut files),
        CommandKind::Hitstats => cmd_hitstats(&cfg, &mut files),
        CommandKind::Recurrence => cmd_recurrence(&cfg, &mut files),
        CommandKind::Coverage => cmd_coverage(&cfg, &mut files),
        CommandKind::Report => cmd_report(&cfg, &mut files),
    })?;

    let mut manifest = String::from("key,value\n");
    let _ = writeln!(manifest, "artifact_version,{}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(manifest, "command,{}", cmd.name());
    let _ = writeln!(manifest, "config_sha256,{}", hex_digest(cfg.raw.as_bytes()));
    let _ = writeln!(
        manifest,
        "seeds,{}",
        cfg.orbit.seeds.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
    );
    let _ = writeln!(manifest, "workers,{}", opts.workers.max(1));
    for (name, content) in &files {
        let _ = writeln!(manifest, "file:{name},{}", hex_digest(content.as_bytes()));
    }
    let _ = writeln!(manifest, "wall_ms,{}", started.elapsed().as_millis());

    for (name, content) in &files {
        write_atomic(&out_dir.join(name), content.as_bytes())?;
    }
    write_atomic(&out_dir.join("manifest.csv"), manifest.as_bytes())?;
    Ok(partial)
}

fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes).with_context(|| format!("writing {tmp:?}"))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming into {path:?}"))?;
    Ok(())
}

fn require_potential(cfg: &LoadedConfig) -> Result<Potential> {
    cfg.potential
        .clone()
        .ok_or_else(|| anyhow!("this command requires a potential section in the config"))
}

fn spectrum_of(cfg: &LoadedConfig) -> Result<Spectrum> {
    let pot = require_potential(cfg)?;
    Spectrum::compute(Arc::clone(&cfg.map), pot).map_err(|e| anyhow!("{e}"))
}

fn stream_for_seed(cfg: &LoadedConfig, model: &GibbsModel, seed: u64) -> Result<ItineraryStream> {
    match &cfg.orbit.kind {
        OrbitKind::Sampled => Ok(ItineraryStream::sample(model, seed)),
        OrbitKind::Explicit { preperiod, period } => {
            ItineraryStream::explicit(cfg.map.as_ref(), preperiod, period).map_err(|e| anyhow!("{e}"))
        }
    }
}

fn cmd_validate(cfg: &LoadedConfig, files: &mut Vec<(String, String)>) -> Result<bool> {
    let mut csv = String::from("axiom,passed,detail\n");
    for check in &cfg.validation.checks {
        println!(
            "axiom ({}) {}: {}",
            check.axiom,
            if check.passed { "pass" } else { "FAIL" },
            check.detail
        );
        let _ = writeln!(csv, "{},{},{}", check.axiom, check.passed, check.detail.replace(',', ";"));
    }
    if let Some(c) = &cfg.validation.constants {
        let rows = [
            ("rho", rat::format(&c.expansion)),
            ("distortion_L", rat::format(&c.distortion)),
            ("scale_to_generation_L_prime", format!("{}", c.scale_to_generation)),
            ("generation_margin", format!("{}", c.generation_margin)),
            ("mixing_horizon_R", format!("{}", c.mixing_horizon)),
        ];
        for (k, v) in rows {
            println!("{k} = {v}");
            let _ = writeln!(csv, "constant,{k},{v}");
        }
    }
    files.push(("validation.csv".into(), csv));
    Ok(false)
}

fn q_grid(cfg: &LoadedConfig) -> Vec<f64> {
    if let Some(grid) = &cfg.experiment.q_grid {
        return grid.clone();
    }
    let lo = cfg.experiment.q_min.unwrap_or(-5.0);
    let hi = cfg.experiment.q_max.unwrap_or(5.0);
    let step = cfg.experiment.q_step.unwrap_or(0.25);
    let mut grid = Vec::new();
    let mut i = 0usize;
    loop {
        let q = lo + step * i as f64;
        if q > hi + 1e-12 {
            break;
        }
        grid.push(q);
        i += 1;
    }
    grid
}

fn cmd_spectrum(cfg: &LoadedConfig, files: &mut Vec<(String, String)>) -> Result<bool> {
    let spectrum = spectrum_of(cfg)?;
    let curve = spectrum.sample(&q_grid(cfg)).map_err(|e| anyhow!("{e}"))?;
    let mut csv = String::from("q,eta,alpha,D\n");
    for p in &curve.points {
        let _ = writeln!(csv, "{},{},{},{}", p.q, p.eta, p.alpha, p.dimension);
    }
    files.push(("spectrum.csv".into(), csv));
    let mut scalars = String::from("name,value\n");
    let rows = [
        ("alpha_minus", spectrum.alpha_minus),
        ("alpha_plus", spectrum.alpha_plus),
        ("alpha_max", spectrum.alpha_max),
        ("dim_mu", spectrum.dim_mu),
        ("gamma", spectrum.model().gamma()),
        ("raw_pressure", spectrum.model().raw_pressure()),
    ];
    for (k, v) in rows {
        let _ = writeln!(scalars, "{k},{v}");
    }
    files.push(("spectrum_scalars.csv".into(), scalars));
    println!(
        "alpha_minus = {}, dim_mu = {}, alpha_max = {}, alpha_plus = {}",
        spectrum.alpha_minus, spectrum.dim_mu, spectrum.alpha_max, spectrum.alpha_plus
    );
    Ok(false)
}

fn cmd_hitstats(cfg: &LoadedConfig, files: &mut Vec<(String, String)>) -> Result<bool> {
    match cfg.experiment.mode.as_deref().unwrap_or("ball") {
        "ball" => hitstats_ball(cfg, files),
        "cylinder" => hitstats_cylinder(cfg, files),
        other => bail!("config error: hitstats mode must be ball or cylinder, got {other:?}"),
    }
}

fn hitstats_ball(cfg: &LoadedConfig, files: &mut Vec<(String, String)>) -> Result<bool> {
    let spectrum = spectrum_of(cfg)?;
    let map = Arc::clone(&cfg.map);
    let y_source = cfg.experiment.y_source.as_deref().unwrap_or("phi").to_string();
    let phi = require_potential(cfg)?;
    let psi = match y_source.as_str() {
        "phi" => phi.clone(),
        "lebesgue" => thermo::normalize(&map, &Potential::log_derivative(&map))
            .map_err(|e| anyhow!("{e}"))?,
        other => bail!("config error: y_source must be phi or lebesgue, got {other:?}"),
    };
    let y_model = GibbsModel::new(Arc::clone(&map), psi.clone()).map_err(|e| anyhow!("{e}"))?;
    let expected = 1.0 / thermo::delta_exponent(&map, &phi, &psi).map_err(|e| anyhow!("{e}"))?;

    let pairs = cfg.experiment.pairs.unwrap_or(50);
    let window = cfg.experiment.ball_window.map(|w| (w[0], w[1])).unwrap_or((15, 17));
    let budget = cfg.experiment.budget.unwrap_or(1 << 22);
    let base = cfg.orbit.seeds.first().copied().unwrap_or(1);

    let results: Vec<Result<(u64, u64, hitting::ExponentEstimate)>> = (0..pairs)
        .into_par_iter()
        .map(|i| {
            let x_seed = base + 2 * i as u64;
            let y_seed = base + 2 * i as u64 + 1;
            let x_stream = ItineraryStream::sample(spectrum.model(), x_seed);
            let y_stream = ItineraryStream::sample(&y_model, y_seed);
            let eps = rat::pow2(-(window.1 as i32 + 8));
            let enc = orbitlab::orbit::reconstruct(&map, &y_stream, 0, &eps)
                .map_err(|e| anyhow!("{e}"))?;
            let est = hitting::hitting_exponent(&map, &x_stream, &enc.midpoint(), window, budget)
                .map_err(|e| anyhow!("{e}"))?;
            Ok((x_seed, y_seed, est))
        })
        .collect();

    let mut csv = String::from("pair,x_seed,y_seed,y_source,estimate,censored\n");
    let mut samples = String::from("pair,n,tau\n");
    let mut estimates = Vec::new();
    let mut censored_any = false;
    for (i, r) in results.into_iter().enumerate() {
        let (x_seed, y_seed, est) = r?;
        let est_str = est.estimate.map(|e| e.to_string()).unwrap_or_default();
        let _ = writeln!(csv, "{i},{x_seed},{y_seed},{y_source},{est_str},{}", est.censored);
        for (n, tau) in &est.samples {
            let t = tau.map(|t| t.to_string()).unwrap_or_default();
            let _ = writeln!(samples, "{i},{n},{t}");
        }
        censored_any |= est.censored;
        estimates.push(est.estimate);
    }
    let median = hitting::median_of(estimates.into_iter());
    let mut summary = String::from("y_source,pairs,window_lo,window_hi,median,expected\n");
    let _ = writeln!(
        summary,
        "{y_source},{pairs},{},{},{},{expected}",
        window.0,
        window.1,
        median.map(|m| m.to_string()).unwrap_or_default()
    );
    files.push(("hitstats.csv".into(), csv));
    files.push(("hitstats_samples.csv".into(), samples));
    files.push(("hitstats_summary.csv".into(), summary));
    println!("median hitting exponent = {median:?}, expected ~ {expected}");
    Ok(censored_any)
}

fn hitstats_cylinder(cfg: &LoadedConfig, files: &mut Vec<(String, String)>) -> Result<bool> {
    let spectrum = spectrum_of(cfg)?;
    let scale = cfg.experiment.scale.unwrap_or(8);
    let budget = cfg.experiment.budget.unwrap_or(1 << 20);
    let covering = cfg.map.scale_covering(scale);
    let mut partial = false;
    for &seed in &cfg.orbit.seeds {
        let stream = stream_for_seed(cfg, spectrum.model(), seed)?;
        let profile =
            hitting::tau_cylinder_profile(&stream, &covering, cfg.map.cell_count(), budget)
                .map_err(|e| anyhow!("{e}"))?;
        let mut csv = String::from("word,lo,hi,tau,horizon,seed\n");
        for (member, tau) in covering.members.iter().zip(&profile.first_hit) {
            let t = tau.map(|t| t.to_string()).unwrap_or_default();
            let _ = writeln!(
                csv,
                "{},{},{},{t},{budget},{seed}",
                word_string(&member.word),
                rat::format(&member.lo),
                rat::format(&member.hi)
            );
            partial |= tau.is_none();
        }
        files.push((format!("hitprofile_{seed}.csv"), csv));
    }
    Ok(partial)
}

fn expanded_seeds(cfg: &LoadedConfig) -> Vec<u64> {
    match cfg.experiment.seed_count {
        None => cfg.orbit.seeds.clone(),
        Some(count) => {
            let base = cfg.orbit.seeds.first().copied().unwrap_or(1);
            (0..count as u64).map(|i| base + i).collect()
        }
    }
}

fn cmd_recurrence(cfg: &LoadedConfig, files: &mut Vec<(String, String)>) -> Result<bool> {
    let spectrum = spectrum_of(cfg)?;
    let window = cfg.experiment.ball_window.map(|w| (w[0], w[1])).unwrap_or((15, 17));
    let budget = cfg.experiment.budget.unwrap_or(1 << 22);
    let seeds = expanded_seeds(cfg);
    let summary =
        hitting::recurrence_exponent(spectrum.model(), spectrum.dim_mu, &seeds, window, budget)
            .map_err(|e| anyhow!("{e}"))?;
    let mut csv = String::from("seed,estimate,censored\n");
    let mut censored_any = false;
    for (seed, est) in &summary.per_seed {
        let e = est.estimate.map(|e| e.to_string()).unwrap_or_default();
        let _ = writeln!(csv, "{seed},{e},{}", est.censored);
        censored_any |= est.censored;
    }
    files.push(("recurrence.csv".into(), csv));
    let mut s = String::from("seeds,window_lo,window_hi,median,expected\n");
    let _ = writeln!(
        s,
        "{},{},{},{},{}",
        seeds.len(),
        window.0,
        window.1,
        summary.median.map(|m| m.to_string()).unwrap_or_default(),
        summary.expected
    );
    files.push(("recurrence_summary.csv".into(), s));
    println!("median self-hitting exponent = {:?}, expected ~ {}", summary.median, summary.expected);
    Ok(censored_any)
}

fn cmd_coverage(cfg: &LoadedConfig, files: &mut Vec<(String, String)>) -> Result<bool> {
    let spectrum = spectrum_of(cfg)?;
    let grid = cfg
        .experiment
        .inv_delta_grid
        .clone()
        .ok_or_else(|| anyhow!("config error: coverage requires inv_delta_grid"))?;
    let (n_start, n_end) = cfg
        .experiment
        .coverage_range
        .map(|r| (r[0], r[1]))
        .unwrap_or((1_000, 1_000_000));
    let seeds = expanded_seeds(cfg);
    let jobs: Vec<(f64, u64)> = grid
        .iter()
        .flat_map(|&s| seeds.iter().map(move |&seed| (s, seed)))
        .collect();
    let results: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(inv_delta, seed)| {
            let stream = ItineraryStream::sample(spectrum.model(), seed);
            dimlab::lebesgue_coverage(&cfg.map, &stream, 1.0 / inv_delta, n_start, n_end)
                .map_err(|e| anyhow!("{e}"))
        })
        .collect();
    let mut csv = String::from("inv_delta,delta,seed,n_start,n_end,coverage\n");
    for ((inv_delta, seed), result) in jobs.iter().zip(results) {
        let c = result?;
        let _ = writeln!(csv, "{inv_delta},{},{seed},{n_start},{n_end},{c}", 1.0 / inv_delta);
    }
    files.push(("coverage.csv".into(), csv));
    Ok(false)
}

fn report_params(cfg: &LoadedConfig) -> ReportParams {
    let e = &cfg.experiment;
    ReportParams {
        inv_delta_grid: e.inv_delta_grid.clone().unwrap_or_else(|| vec![0.7, 1.0, 1.3, 1.5, 1.8]),
        seeds: expanded_seeds(cfg),
        n_window: e.n_window.map(|w| (w[0], w[1])).unwrap_or((8, 14)),
        coverage_range: e.coverage_range.map(|r| (r[0], r[1])).unwrap_or((1_000, 1_000_000)),
        coverage_threshold: e.coverage_threshold.unwrap_or(0.99),
        max_hit_scale: e.max_hit_scale.unwrap_or(12),
        budget: e.budget.unwrap_or(1 << 22),
        tolerance: e.tolerance.unwrap_or(0.1),
    }
}

fn cmd_report(cfg: &LoadedConfig, files: &mut Vec<(String, String)>) -> Result<bool> {
    let spectrum = spectrum_of(cfg)?;
    let params = report_params(cfg);
    let csv = render_report(&spectrum, &params)?;
    let partial = csv.contains(",censored");
    files.push(("report.csv".into(), csv));
    Ok(partial)
}

/// Build the full dimension report CSV; exposed for the acceptance suite.
pub fn render_report(spectrum: &Spectrum, params: &ReportParams) -> Result<String> {
    let mut scales = dimlab::report_scales(params);
    // The max-hit budget is the dominant cost; report cells share coverings.
    scales.sort_unstable();
    let cache = CoveringCache::build(spectrum, scales);
    let cells = dimlab::report_cells(spectrum, params).map_err(|e| anyhow!("{e}"))?;
    let results: Vec<Result<dimlab::CellResult>> = cells
        .par_iter()
        .map(|cell| dimlab::run_cell(spectrum, &cache, params, cell).map_err(|e| anyhow!("{e}")))
        .collect();
    let mut csv = String::from(
        "delta,inv_delta,region,pred_dim_L,pred_dim_F,pred_leb,proxy_name,seed,slope_or_value,predicted,tolerance,verdict\n",
    );
    for r in results {
        let cell = r?;
        let p = &cell.prediction;
        let dim_f = p.dim_f.map(|d| d.to_string()).unwrap_or_else(|| "empty".into());
        let seed = cell.cell.seed.map(|s| s.to_string()).unwrap_or_default();
        let value = cell.value.map(|v| v.to_string()).unwrap_or_default();
        let predicted = cell.predicted.map(|v| v.to_string()).unwrap_or_default();
        let verdict = match (cell.verdict, p.boundary) {
            (Verdict::Info, Some(b)) => format!("open-in-paper:{b}"),
            (v, _) => v.to_string(),
        };
        let _ = writeln!(
            csv,
            "{},{},{},{},{dim_f},{},{},{seed},{value},{predicted},{},{verdict}",
            p.delta,
            p.inv_delta,
            p.region,
            p.dim_l,
            p.lebesgue,
            cell.cell.kind.name(),
            cell.tolerance,
        );
    }
    Ok(csv)
}
