mod grid;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use fading_grand::calib::{self, CalibrationStore};
use fading_grand::channel::{ChannelConfig, Combiner};
use fading_grand::codes::{self, Codebook, Family};
use fading_grand::sim::{self, DecoderSpec, SimJob, StopRule, ThresholdRule};

use grid::parse_list;
use output::{json_sibling, write_atomic, Provenance};

#[derive(Parser)]
#[command(
    name = "fgrand",
    version,
    about = "Fading-GRAND code construction, calibration and Monte Carlo simulation"
)]
struct Cli {
    /// Worker threads for frame simulation; results do not depend on it.
    #[arg(long, global = true, env = "FGRAND_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a code and write it as JSON.
    MakeCode(MakeCodeArgs),
    /// Sweep thresholds at several Eb/N0 points and fit the threshold line.
    Calibrate(CalibrateArgs),
    /// FER versus threshold at one Eb/N0.
    SweepThreshold(SweepThresholdArgs),
    /// FER, BER and average queries over an Eb/N0 grid.
    Simulate(SimulateArgs),
}

#[derive(Args, Serialize)]
struct MakeCodeArgs {
    /// bch, crc or rlc
    family: String,
    n: usize,
    k: usize,
    /// CRC generator polynomial (hex); leading x^(n-k) term may be omitted.
    #[arg(long, default_value = "0xB2B117")]
    poly: String,
    /// RLC generator seed.
    #[arg(long, default_value_t = codes::DEFAULT_RLC_SEED)]
    seed: u64,
    /// Output path; defaults to <family>-<n>-<k>.json
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize, Clone)]
struct ChannelArgs {
    /// Code JSON written by make-code.
    #[arg(long)]
    code: PathBuf,
    /// none, sc or mrc; defaults to none for L=1.
    #[arg(long)]
    combiner: Option<String>,
    /// Diversity branches.
    #[arg(long = "L", default_value_t = 1)]
    branches: usize,
    /// Maximum TEP Hamming weight; defaults to the code's evaluation value.
    #[arg(long)]
    ab: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Serialize)]
struct CalibrateArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Eb/N0 points in dB: list or start:step:stop.
    #[arg(long)]
    ebn0: String,
    /// Threshold grid.
    #[arg(long, default_value = "0:0.05:2")]
    grid: String,
    #[arg(long, default_value_t = calib::CALIBRATION_STOP.min_frame_errors)]
    min_errors: u64,
    #[arg(long, default_value_t = calib::CALIBRATION_STOP.max_frames)]
    max_frames: u64,
    /// Calibration store to create or update.
    #[arg(long, default_value = "calibration.json")]
    store: PathBuf,
}

#[derive(Args, Serialize)]
struct SweepThresholdArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long)]
    ebn0: f64,
    #[arg(long, default_value = "0:0.05:2")]
    grid: String,
    #[arg(long, default_value_t = calib::CALIBRATION_STOP.min_frame_errors)]
    min_errors: u64,
    #[arg(long, default_value_t = calib::CALIBRATION_STOP.max_frames)]
    max_frames: u64,
    /// CSV output; a JSON mirror is written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// grandab, fading-grand or bm
    #[arg(long)]
    decoder: String,
    /// Eb/N0 grid in dB.
    #[arg(long)]
    ebn0: String,
    /// Fixed Fading-GRAND threshold instead of the calibration line.
    #[arg(long)]
    delta: Option<f64>,
    /// Calibration store; the published lines are used when omitted.
    #[arg(long)]
    calibration: Option<PathBuf>,
    #[arg(long, default_value_t = sim::DEFAULT_MIN_FRAME_ERRORS)]
    min_errors: u64,
    #[arg(long, default_value_t = sim::DEFAULT_MAX_FRAMES)]
    max_frames: u64,
    /// CSV output; a JSON mirror is written next to it.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers {
        if w == 0 {
            bail!("--workers must be at least 1");
        }
        pool = pool.num_threads(w);
    }
    let pool = pool.build().context("building worker pool")?;
    pool.install(|| match &cli.command {
        Command::MakeCode(a) => make_code(a),
        Command::Calibrate(a) => calibrate(a),
        Command::SweepThreshold(a) => sweep_threshold(a),
        Command::Simulate(a) => simulate(a),
    })
}

fn parse_poly(s: &str) -> Result<u64> {
    let digits = s.trim_start_matches("0x").trim_start_matches("0X");
    u64::from_str_radix(digits, 16).with_context(|| format!("bad polynomial '{s}'"))
}

fn make_code(a: &MakeCodeArgs) -> Result<()> {
    let code = match a.family.to_ascii_lowercase().as_str() {
        "bch" => codes::make_bch(a.n, a.k)?,
        "crc" => codes::make_crc(a.n, a.k, parse_poly(&a.poly)?)?,
        "rlc" => codes::make_rlc(a.n, a.k, a.seed)?,
        other => bail!("unknown code family '{other}' (expected bch, crc or rlc)"),
    };
    let out = a
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.json", code.id())));
    write_atomic(&out, &(code.to_json()? + "\n"))?;
    println!("n = {}", code.n());
    println!("k = {}", code.k());
    println!("R = {:.6}", code.rate());
    println!("family = {}", code.family());
    println!("parity bits = {}", code.n() - code.k());
    let md = code.metadata();
    if let Some(p) = &md.generator_poly {
        println!("generator polynomial = {p}");
    }
    if let Some(t) = md.designed_t {
        println!("designed t = {t}");
    }
    if let Some(s) = md.seed {
        println!("seed = {s}");
    }
    println!("wrote {}", out.display());
    Ok(())
}

struct Setup {
    code: Codebook,
    combiner: Combiner,
    ab: usize,
}

fn setup(a: &ChannelArgs) -> Result<Setup> {
    let code = Codebook::load(&a.code)?;
    let combiner = match &a.combiner {
        Some(c) => c.parse::<Combiner>()?,
        None if a.branches == 1 => Combiner::None,
        None => bail!("--combiner (sc or mrc) is required when L > 1"),
    };
    ChannelConfig::new(0.0, a.branches, combiner, code.rate())?;
    let ab =
        a.ab.unwrap_or_else(|| codes::default_abandonment_weight(&code));
    Ok(Setup { code, combiner, ab })
}

fn calibrate(a: &CalibrateArgs) -> Result<()> {
    let s = setup(&a.channel)?;
    let ebn0 = parse_list(&a.ebn0)?;
    let grid = parse_list(&a.grid)?;
    let stop = StopRule::new(a.min_errors, a.max_frames);
    let result = calib::calibrate(
        &s.code,
        s.combiner,
        a.channel.branches,
        &ebn0,
        &grid,
        s.ab,
        stop,
        a.channel.seed,
    )?;
    for (sweep, &(x, best)) in result.sweeps.iter().zip(&result.line.points) {
        let at_edge = best == grid[0] || best == grid[grid.len() - 1];
        println!("Eb/N0 {x} dB: optimal threshold {best}");
        if grid.len() == 1 {
            eprintln!("warning: single-point grid, threshold {best} is degenerate");
        } else if at_edge {
            eprintln!("warning: optimal threshold {best} at {x} dB lies on the grid boundary");
        }
        let best_fer = sweep
            .grid
            .iter()
            .find(|p| p.delta == best)
            .map(|p| p.fer)
            .unwrap_or(f64::NAN);
        println!("  FER at optimum {best_fer:e}");
    }
    println!("fit: m = {}, b = {}", result.line.m, result.line.b);
    let mut store = if a.store.exists() {
        CalibrationStore::load(&a.store)?
    } else {
        CalibrationStore::default()
    };
    store.upsert(result.line);
    write_atomic(&a.store, &(store.to_json()? + "\n"))?;
    println!("wrote {}", a.store.display());
    Ok(())
}

#[derive(Serialize)]
struct SweepOutput<'a, C: Serialize> {
    provenance: Provenance<'a, C>,
    sweep: &'a calib::ThresholdSweepResult,
    optimal_threshold: f64,
}

fn sweep_threshold(a: &SweepThresholdArgs) -> Result<()> {
    let s = setup(&a.channel)?;
    let grid = parse_list(&a.grid)?;
    let cfg = ChannelConfig::new(a.ebn0, a.channel.branches, s.combiner, s.code.rate())?;
    let stop = StopRule::new(a.min_errors, a.max_frames);
    let sweep = calib::sweep_threshold(&s.code, &cfg, &grid, s.ab, stop, a.channel.seed)?;
    let best = calib::optimal_threshold(&sweep)?;
    let mut csv = String::from("delta,fer,frames,frame_errors\n");
    for p in &sweep.grid {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            p.delta, p.fer, p.frames, p.frame_errors
        ));
    }
    let json = serde_json::to_string_pretty(&SweepOutput {
        provenance: Provenance::new("sweep-threshold", a),
        sweep: &sweep,
        optimal_threshold: best,
    })?;
    write_outputs(&a.out, &csv, &json)?;
    println!("optimal threshold {best}");
    Ok(())
}

#[derive(Serialize)]
struct SimOutput<'a, C: Serialize> {
    provenance: Provenance<'a, C>,
    jobs: &'a [SimJob],
    results: &'a [sim::SimResult],
}

fn decoder_spec(a: &SimulateArgs, s: &Setup) -> Result<DecoderSpec> {
    Ok(match a.decoder.to_ascii_lowercase().as_str() {
        "grandab" => DecoderSpec::Grandab { ab: s.ab },
        "fading-grand" | "fading_grand" | "fgrand" => {
            let threshold = match a.delta {
                Some(d) if d >= 0.0 => ThresholdRule::Fixed(d),
                Some(d) => bail!("--delta must be non-negative, got {d}"),
                None => {
                    let store = match &a.calibration {
                        Some(p) => CalibrationStore::load(p)?,
                        None => CalibrationStore::published(),
                    };
                    let line = store.get(&s.code.id(), s.combiner, a.channel.branches)?;
                    ThresholdRule::Line(line.clone())
                }
            };
            DecoderSpec::FadingGrand {
                ab: s.ab,
                threshold,
            }
        }
        "bm" => {
            if s.code.family() != Family::Bch {
                bail!("B-M decoding requires a BCH code, got {}", s.code.id());
            }
            DecoderSpec::Bm
        }
        other => bail!("unknown decoder '{other}' (expected grandab, fading-grand or bm)"),
    })
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let s = setup(&a.channel)?;
    let decoder = decoder_spec(a, &s)?;
    let ebn0 = parse_list(&a.ebn0)?;
    if ebn0.is_empty() {
        bail!("empty Eb/N0 grid");
    }
    let stop = StopRule::new(a.min_errors, a.max_frames);
    let jobs = ebn0
        .iter()
        .map(|&x| {
            Ok(SimJob {
                code_id: s.code.id(),
                decoder: decoder.clone(),
                channel: ChannelConfig::new(x, a.channel.branches, s.combiner, s.code.rate())?,
                stop,
                seed: a.channel.seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let results = sim::sweep(&jobs, &s.code)?;
    let csv = sim::to_csv(&results)?;
    let json = serde_json::to_string_pretty(&SimOutput {
        provenance: Provenance::new("simulate", a),
        jobs: &jobs,
        results: &results,
    })?;
    write_outputs(&a.out, &csv, &json)?;
    print!("{csv}");
    Ok(())
}

fn write_outputs(csv_path: &Path, csv: &str, json: &str) -> Result<()> {
    write_atomic(&json_sibling(csv_path), &(json.to_string() + "\n"))?;
    write_atomic(csv_path, csv)?;
    Ok(())
}
