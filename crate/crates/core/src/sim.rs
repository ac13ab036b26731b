//! Monte Carlo estimation of FER, BER and average membership queries.
//!
//! Frame `f` of a job draws everything (message, fading, noise) from a
//! ChaCha8 stream keyed by `(seed, f)`. Frames are evaluated in parallel
//! batches and folded strictly in frame order, stopping at the first frame
//! where the stop rule is met, so results never depend on worker count or
//! batch size.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bm::bm_decode;
use crate::calib::CalibrationLine;
use crate::channel::{transmit, ChannelConfig};
use crate::codes::{Codebook, Family};
use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::grand::{fading_grand_decode, grandab_decode, DecodeOutcome, DecodeStatus};

/// Default stop rule: 100 frame errors or 10^6 frames.
pub const DEFAULT_MIN_FRAME_ERRORS: u64 = 100;
pub const DEFAULT_MAX_FRAMES: u64 = 1_000_000;

/// How Fading-GRAND picks its threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    Fixed(f64),
    Line(CalibrationLine),
}

impl ThresholdRule {
    pub fn threshold_at(&self, ebn0_db: f64) -> f64 {
        match self {
            ThresholdRule::Fixed(d) => *d,
            ThresholdRule::Line(line) => line.threshold_at(ebn0_db),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DecoderSpec {
    Grandab { ab: usize },
    FadingGrand { ab: usize, threshold: ThresholdRule },
    Bm,
}

impl DecoderSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DecoderSpec::Grandab { .. } => "grandab",
            DecoderSpec::FadingGrand { .. } => "fading-grand",
            DecoderSpec::Bm => "bm",
        }
    }

    fn counts_queries(&self) -> bool {
        !matches!(self, DecoderSpec::Bm)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopRule {
    pub min_frame_errors: u64,
    pub max_frames: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            min_frame_errors: DEFAULT_MIN_FRAME_ERRORS,
            max_frames: DEFAULT_MAX_FRAMES,
        }
    }
}

impl StopRule {
    pub fn new(min_frame_errors: u64, max_frames: u64) -> Self {
        Self {
            min_frame_errors,
            max_frames,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.min_frame_errors == 0 || self.max_frames == 0 {
            return Err(Error::InvalidJob(
                "stop rule needs at least one frame error and one frame".into(),
            ));
        }
        Ok(())
    }

    fn reached(&self, frames: u64, frame_errors: u64) -> bool {
        frames >= self.max_frames || frame_errors >= self.min_frame_errors
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimJob {
    pub code_id: String,
    pub decoder: DecoderSpec,
    pub channel: ChannelConfig,
    pub stop: StopRule,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub ebn0_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub fer: f64,
    pub ber: f64,
    /// `None` for algebraic decoders.
    pub avg_queries: Option<f64>,
    pub abandonments: u64,
    pub stderr_fer: f64,
    /// Threshold used by Fading-GRAND at this point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default)]
struct FrameStats {
    error: bool,
    abandoned: bool,
    bit_errors: u64,
    queries: u64,
}

#[derive(Clone, Debug, Default)]
struct Accumulator {
    frames: u64,
    frame_errors: u64,
    bit_errors: u64,
    queries: u128,
    abandonments: u64,
    done: bool,
}

impl Accumulator {
    fn push(&mut self, s: &FrameStats) {
        self.frames += 1;
        self.frame_errors += s.error as u64;
        self.abandonments += s.abandoned as u64;
        self.bit_errors += s.bit_errors;
        self.queries += s.queries as u128;
    }

    fn finish(&self, job: &SimJob, k: usize, delta: Option<f64>) -> SimResult {
        let frames = self.frames.max(1) as f64;
        let fer = self.frame_errors as f64 / frames;
        SimResult {
            ebn0_db: job.channel.ebn0_db,
            frames: self.frames,
            frame_errors: self.frame_errors,
            bit_errors: self.bit_errors,
            fer,
            ber: self.bit_errors as f64 / (frames * k as f64),
            avg_queries: job
                .decoder
                .counts_queries()
                .then(|| self.queries as f64 / frames),
            abandonments: self.abandonments,
            stderr_fer: (fer * (1.0 - fer) / frames).sqrt(),
            delta,
        }
    }
}

/// Per-frame RNG keyed by `(seed, frame)`.
pub fn frame_rng(seed: u64, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame);
    rng
}

fn check_job(job: &SimJob, code: &Codebook) -> Result<()> {
    if job.code_id != code.id() {
        return Err(Error::InvalidJob(format!(
            "job targets code {} but {} was supplied",
            job.code_id,
            code.id()
        )));
    }
    job.channel.validate()?;
    if (job.channel.rate - code.rate()).abs() > 1e-12 {
        return Err(Error::InvalidJob(format!(
            "channel rate {} differs from code rate {}",
            job.channel.rate,
            code.rate()
        )));
    }
    job.stop.validate()?;
    match &job.decoder {
        DecoderSpec::Bm if code.family() != Family::Bch => Err(Error::NotBch(code.id())),
        DecoderSpec::FadingGrand { threshold, .. }
            if !(threshold.threshold_at(job.channel.ebn0_db) >= 0.0) =>
        {
            Err(Error::InvalidJob("threshold must be non-negative".into()))
        }
        _ => Ok(()),
    }
}

/// Decodes one observation and scores it against the sent message.
fn score(
    outcome: &DecodeOutcome,
    sent: &BitVector,
    fallback: impl FnOnce() -> BitVector,
) -> FrameStats {
    match outcome.status {
        DecodeStatus::Decoded => {
            let msg = outcome
                .message
                .as_ref()
                .expect("decoded outcome carries a message");
            let bit_errors = msg.distance(sent) as u64;
            FrameStats {
                error: bit_errors > 0,
                abandoned: false,
                bit_errors,
                queries: outcome.queries,
            }
        }
        // Abandoned frames are errors; BER uses the uncorrected word's message.
        DecodeStatus::Abandoned => FrameStats {
            error: true,
            abandoned: true,
            bit_errors: fallback().distance(sent) as u64,
            queries: outcome.queries,
        },
    }
}

struct PreparedDecoder {
    spec: DecoderSpec,
    delta: Option<f64>,
}

fn simulate_frame(
    code: &Codebook,
    channel: &ChannelConfig,
    decoders: &[&PreparedDecoder],
    seed: u64,
    frame: u64,
) -> Vec<FrameStats> {
    let mut rng = frame_rng(seed, frame);
    let bits: Vec<u8> = (0..code.k()).map(|_| rng.random::<bool>() as u8).collect();
    let message = BitVector::from_bits(&bits);
    let codeword = code.encode(&message);
    let obs = transmit(&codeword, channel, &mut rng);
    decoders
        .iter()
        .map(|d| {
            let outcome = match &d.spec {
                DecoderSpec::Grandab { ab } => grandab_decode(&obs.hard_bits, code, *ab),
                DecoderSpec::FadingGrand { ab, .. } => {
                    fading_grand_decode(&obs, code, *ab, d.delta.expect("threshold resolved"))
                }
                DecoderSpec::Bm => bm_decode(&obs.hard_bits, code).expect("checked BCH family"),
            };
            score(&outcome, &message, || code.recover(&obs.hard_bits))
        })
        .collect()
}

/// Runs several jobs over one shared frame sequence.
///
/// All jobs must share seed and channel; each keeps its own decoder and stop
/// rule. Every result equals what [`run`] returns for that job alone.
pub fn run_shared(jobs: &[SimJob], code: &Codebook) -> Result<Vec<SimResult>> {
    let Some(first) = jobs.first() else {
        return Err(Error::InvalidJob("no jobs".into()));
    };
    for job in jobs {
        check_job(job, code)?;
        if job.seed != first.seed || job.channel != first.channel {
            return Err(Error::InvalidJob(
                "shared runs need a common seed and channel".into(),
            ));
        }
    }
    let prepared: Vec<PreparedDecoder> = jobs
        .iter()
        .map(|job| PreparedDecoder {
            delta: match &job.decoder {
                DecoderSpec::FadingGrand { threshold, .. } => {
                    Some(threshold.threshold_at(job.channel.ebn0_db))
                }
                _ => None,
            },
            spec: job.decoder.clone(),
        })
        .collect();
    let mut acc = vec![Accumulator::default(); jobs.len()];
    let mut next_frame = 0u64;
    let max_frames = jobs.iter().map(|j| j.stop.max_frames).max().unwrap_or(0);

    while acc.iter().any(|a| !a.done) {
        let active: Vec<usize> = (0..jobs.len()).filter(|&i| !acc[i].done).collect();
        let batch = next_batch_size(jobs, &acc, &active, next_frame, max_frames);
        let decoders: Vec<&PreparedDecoder> = active.iter().map(|&i| &prepared[i]).collect();
        let stats: Vec<Vec<FrameStats>> = (next_frame..next_frame + batch)
            .into_par_iter()
            .map(|f| simulate_frame(code, &first.channel, &decoders, first.seed, f))
            .collect();
        for frame_stats in &stats {
            for (slot, &i) in active.iter().enumerate() {
                let a = &mut acc[i];
                if a.done {
                    continue;
                }
                a.push(&frame_stats[slot]);
                if jobs[i].stop.reached(a.frames, a.frame_errors) {
                    a.done = true;
                }
            }
        }
        next_frame += batch;
    }
    Ok(jobs
        .iter()
        .zip(&acc)
        .zip(&prepared)
        .map(|((job, a), p)| a.finish(job, code.k(), p.delta))
        .collect())
}

/// Frames to evaluate next. Sized from the current error rate so batches
/// rarely overshoot the stop rule by much; never affects results.
fn next_batch_size(
    jobs: &[SimJob],
    acc: &[Accumulator],
    active: &[usize],
    done: u64,
    max_frames: u64,
) -> u64 {
    const MIN_BATCH: u64 = 64;
    const MAX_BATCH: u64 = 1 << 16;
    let wanted = active
        .iter()
        .map(|&i| {
            let a = &acc[i];
            let stop = &jobs[i].stop;
            let by_frames = stop.max_frames - a.frames;
            let by_errors = if a.frame_errors == 0 {
                (a.frames.max(MIN_BATCH / 2)) * 2
            } else {
                let missing = stop.min_frame_errors - a.frame_errors;
                (missing as f64 * a.frames as f64 / a.frame_errors as f64 * 1.1).ceil() as u64
            };
            by_frames.min(by_errors)
        })
        .min()
        .unwrap_or(MIN_BATCH);
    wanted
        .clamp(MIN_BATCH, MAX_BATCH)
        .min(max_frames - done)
        .max(1)
}

/// Runs a single job.
pub fn run(job: &SimJob, code: &Codebook) -> Result<SimResult> {
    Ok(run_shared(std::slice::from_ref(job), code)?.remove(0))
}

/// Runs each job in order; one result per job.
pub fn sweep(jobs: &[SimJob], code: &Codebook) -> Result<Vec<SimResult>> {
    if jobs.is_empty() {
        return Err(Error::InvalidJob("empty Eb/N0 grid".into()));
    }
    jobs.iter().map(|job| run(job, code)).collect()
}

pub const CSV_HEADER: [&str; 8] = [
    "ebn0_db",
    "fer",
    "ber",
    "avg_queries",
    "frames",
    "frame_errors",
    "abandonments",
    "stderr_fer",
];

/// CSV table, one row per result; `avg_queries` is empty when not applicable.
pub fn to_csv(results: &[SimResult]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::InvalidJob(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in results {
        w.write_record([
            r.ebn0_db.to_string(),
            r.fer.to_string(),
            r.ber.to_string(),
            r.avg_queries.map(|q| q.to_string()).unwrap_or_default(),
            r.frames.to_string(),
            r.frame_errors.to_string(),
            r.abandonments.to_string(),
            r.stderr_fer.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidJob(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
