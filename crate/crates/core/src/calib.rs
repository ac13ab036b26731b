//! Threshold calibration: sweep Δ at fixed Eb/N0, take the FER-minimizing
//! Δ̃, fit Δ̃ = m·(Eb/N0) + b over several Eb/N0 points and keep the lines in
//! a JSON lookup table keyed by (code, combiner, L).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelConfig, Combiner};
use crate::codes::Codebook;
use crate::error::{Error, Result};
use crate::sim::{run_shared, DecoderSpec, SimJob, StopRule, ThresholdRule};

/// Published lines, one entry per (code, combiner, L).
pub const PUBLISHED_TABLE_JSON: &str = include_str!("../data/published_lines.json");

/// Per-point calibration budget: 100 frame errors or 2·10^5 frames.
pub const CALIBRATION_STOP: StopRule = StopRule {
    min_frame_errors: 100,
    max_frames: 200_000,
};

/// Default Δ grid, 0 to 2 in steps of 0.05.
pub fn default_grid() -> Vec<f64> {
    (0..=40).map(|i| i as f64 * 0.05).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub delta: f64,
    pub fer: f64,
    pub frames: u64,
    pub frame_errors: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSweepResult {
    pub ebn0_db: f64,
    pub grid: Vec<SweepPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationLine {
    pub code: String,
    pub combiner: Combiner,
    pub branches: usize,
    /// Slope per dB.
    pub m: f64,
    pub b: f64,
    /// (Eb/N0 dB, Δ̃) points the line was fitted to.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub residuals: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl CalibrationLine {
    pub fn new(
        code: impl Into<String>,
        combiner: Combiner,
        branches: usize,
        m: f64,
        b: f64,
    ) -> Self {
        Self {
            code: code.into(),
            combiner,
            branches,
            m,
            b,
            points: Vec::new(),
            residuals: Vec::new(),
            grid: Vec::new(),
            seeds: Vec::new(),
            source: None,
        }
    }

    /// LUT lookup, `max(0, m·x + b)`.
    pub fn threshold_at(&self, ebn0_db: f64) -> f64 {
        (self.m * ebn0_db + self.b).max(0.0)
    }

    fn matches(&self, code: &str, combiner: Combiner, branches: usize) -> bool {
        self.code == code && self.combiner == combiner && self.branches == branches
    }
}

/// Free-function form of [`CalibrationLine::threshold_at`].
pub fn lut_lookup(line: &CalibrationLine, ebn0_db: f64) -> f64 {
    line.threshold_at(ebn0_db)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LineFit {
    pub m: f64,
    pub b: f64,
    pub residuals: Vec<f64>,
}

/// Ordinary least squares over `(x, y)` points; residuals are `y - (m·x + b)`.
pub fn fit_line(points: &[(f64, f64)]) -> Result<LineFit> {
    let first = points.first().map(|p| p.0);
    if points.len() < 2 || points.iter().all(|p| Some(p.0) == first) {
        return Err(Error::Calibration(
            "need ≥2 distinct Eb/N0 points to fit a line".into(),
        ));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let m = sxy / sxx;
    let b = mean_y - m * mean_x;
    let residuals = points.iter().map(|p| p.1 - (m * p.0 + b)).collect();
    Ok(LineFit { m, b, residuals })
}

/// FER of Fading-GRAND at every grid threshold, all on the same frames.
pub fn sweep_threshold(
    code: &Codebook,
    cfg: &ChannelConfig,
    grid: &[f64],
    ab: usize,
    stop: StopRule,
    seed: u64,
) -> Result<ThresholdSweepResult> {
    if grid.is_empty() {
        return Err(Error::Calibration("threshold grid is empty".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Calibration(
            "threshold grid must be strictly increasing".into(),
        ));
    }
    if grid[0] < 0.0 {
        return Err(Error::Calibration("thresholds must be non-negative".into()));
    }
    if stop.min_frame_errors == 0 || stop.max_frames == 0 {
        return Err(Error::Calibration("zero frame budget".into()));
    }
    let jobs: Vec<SimJob> = grid
        .iter()
        .map(|&delta| SimJob {
            code_id: code.id(),
            decoder: DecoderSpec::FadingGrand {
                ab,
                threshold: ThresholdRule::Fixed(delta),
            },
            channel: *cfg,
            stop,
            seed,
        })
        .collect();
    let results = run_shared(&jobs, code)?;
    Ok(ThresholdSweepResult {
        ebn0_db: cfg.ebn0_db,
        grid: grid
            .iter()
            .zip(results)
            .map(|(&delta, r)| SweepPoint {
                delta,
                fer: r.fer,
                frames: r.frames,
                frame_errors: r.frame_errors,
            })
            .collect(),
    })
}

/// Grid Δ with the lowest FER; ties go to the smaller Δ.
pub fn optimal_threshold(sweep: &ThresholdSweepResult) -> Result<f64> {
    let mut best: Option<&SweepPoint> = None;
    for p in sweep.grid.iter().filter(|p| p.frames > 0) {
        if best.is_none_or(|b| p.fer < b.fer) {
            best = Some(p);
        }
    }
    best.map(|p| p.delta)
        .ok_or_else(|| Error::Calibration("sweep has no simulated frames".into()))
}

/// Everything a calibration run produced.
#[derive(Clone, Debug)]
pub struct Calibration {
    pub line: CalibrationLine,
    pub sweeps: Vec<ThresholdSweepResult>,
}

/// Sweeps every Eb/N0 point, picks Δ̃ at each and fits the line.
#[allow(clippy::too_many_arguments)]
pub fn calibrate(
    code: &Codebook,
    combiner: Combiner,
    branches: usize,
    ebn0_points: &[f64],
    grid: &[f64],
    ab: usize,
    stop: StopRule,
    seed: u64,
) -> Result<Calibration> {
    let distinct = ebn0_points.iter().any(|&x| x != ebn0_points[0]);
    if ebn0_points.len() < 2 || !distinct {
        return Err(Error::Calibration(
            "need ≥2 distinct Eb/N0 points to fit a line".into(),
        ));
    }
    let mut sweeps = Vec::with_capacity(ebn0_points.len());
    let mut points = Vec::with_capacity(ebn0_points.len());
    for &ebn0 in ebn0_points {
        let cfg = ChannelConfig::new(ebn0, branches, combiner, code.rate())?;
        let sweep = sweep_threshold(code, &cfg, grid, ab, stop, seed)?;
        points.push((ebn0, optimal_threshold(&sweep)?));
        sweeps.push(sweep);
    }
    let fit = fit_line(&points)?;
    let mut line = CalibrationLine::new(code.id(), combiner, branches, fit.m, fit.b);
    line.points = points;
    line.residuals = fit.residuals;
    line.grid = grid.to_vec();
    line.seeds = vec![seed; ebn0_points.len()];
    line.source = Some("calibrated".into());
    Ok(Calibration { line, sweeps })
}

/// The lookup table of calibration lines.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CalibrationStore {
    pub entries: Vec<CalibrationLine>,
}

impl CalibrationStore {
    /// Store preloaded with the published Fading-GRAND lines.
    pub fn published() -> Self {
        serde_json::from_str(PUBLISHED_TABLE_JSON).expect("bundled calibration table parses")
    }

    pub fn get(&self, code: &str, combiner: Combiner, branches: usize) -> Result<&CalibrationLine> {
        self.entries
            .iter()
            .find(|l| l.matches(code, combiner, branches))
            .ok_or_else(|| Error::MissingCalibration {
                code: code.to_string(),
                combiner: combiner.to_string(),
                branches,
            })
    }

    /// Inserts `line`, replacing any entry with the same key.
    pub fn upsert(&mut self, line: CalibrationLine) {
        match self
            .entries
            .iter_mut()
            .find(|l| l.matches(&line.code, line.combiner, line.branches))
        {
            Some(slot) => *slot = line,
            None => self.entries.push(line),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Calibration(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}
