//! BPSK over slow flat Rayleigh fading with L receive branches.
//!
//! Energy accounting: E_b = 1 per information bit, so each coded bit carries
//! E_c = R and the complex noise on every branch has variance N_0/2 per
//! dimension with N_0 = 10^(-Eb/N0 [dB] / 10). Bit 0 maps to +√E_c and bit 1
//! to -√E_c. Gains are drawn independently for every coded bit and branch
//! (perfect interleaving) and are known exactly at the receiver.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::BitVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combiner {
    /// Single branch, no combining.
    None,
    /// Selection combining: strongest branch per bit.
    Sc,
    /// Maximal ratio combining: conjugate-weighted sum of all branches.
    Mrc,
}

impl fmt::Display for Combiner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Combiner::None => "none",
            Combiner::Sc => "sc",
            Combiner::Mrc => "mrc",
        })
    }
}

impl FromStr for Combiner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "rayleigh" => Ok(Combiner::None),
            "sc" => Ok(Combiner::Sc),
            "mrc" => Ok(Combiner::Mrc),
            other => Err(Error::InvalidChannel(format!("unknown combiner '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    /// Eb/N0 in dB; `+inf` gives a noiseless channel.
    pub ebn0_db: f64,
    pub branches: usize,
    pub combiner: Combiner,
    /// Code rate k/n.
    pub rate: f64,
}

impl ChannelConfig {
    pub fn new(ebn0_db: f64, branches: usize, combiner: Combiner, rate: f64) -> Result<Self> {
        let cfg = Self {
            ebn0_db,
            branches,
            combiner,
            rate,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.branches == 0 {
            return Err(Error::InvalidChannel("need at least one branch".into()));
        }
        if (self.combiner == Combiner::None) != (self.branches == 1) {
            return Err(Error::InvalidChannel(format!(
                "combiner {} is incompatible with L={}",
                self.combiner, self.branches
            )));
        }
        if !(self.rate > 0.0 && self.rate <= 1.0) {
            return Err(Error::InvalidChannel(format!(
                "rate {} outside (0,1]",
                self.rate
            )));
        }
        if self.ebn0_db.is_nan() {
            return Err(Error::InvalidChannel("Eb/N0 is NaN".into()));
        }
        Ok(())
    }

    /// Noise spectral density N_0 for unit E_b.
    pub fn n0(&self) -> f64 {
        10f64.powf(-self.ebn0_db / 10.0)
    }

    /// Standard deviation per real dimension, √(N_0/2).
    pub fn noise_sigma(&self) -> f64 {
        (self.n0() / 2.0).sqrt()
    }

    /// Average SNR per coded bit per branch, γ̄ = R·Eb/N0.
    pub fn mean_snr(&self) -> f64 {
        self.rate * 10f64.powf(self.ebn0_db / 10.0)
    }
}

/// Per-bit, per-branch complex gains, `n × L` row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FadingRealization {
    n: usize,
    branches: usize,
    gains: Vec<Complex64>,
}

impl FadingRealization {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn branches(&self) -> usize {
        self.branches
    }

    /// Gains seen by coded bit `i` on every branch.
    pub fn bit(&self, i: usize) -> &[Complex64] {
        &self.gains[i * self.branches..(i + 1) * self.branches]
    }

    pub fn gains(&self) -> &[Complex64] {
        &self.gains
    }
}

#[inline]
fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Draws h = (X + jY)/√2 independently for every bit and branch.
pub fn draw_fading<R: Rng + ?Sized>(n: usize, branches: usize, rng: &mut R) -> FadingRealization {
    assert!(n >= 1 && branches >= 1, "fading needs n, L >= 1");
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let gains = (0..n * branches)
        .map(|_| complex_normal(rng) * scale)
        .collect();
    FadingRealization { n, branches, gains }
}

/// Hard decisions plus per-bit CSI weights.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameObservation {
    pub hard_bits: BitVector,
    pub csi_weights: Vec<f64>,
}

/// Sends codeword `c` through a fresh fading realization.
pub fn transmit<R: Rng + ?Sized>(
    c: &BitVector,
    cfg: &ChannelConfig,
    rng: &mut R,
) -> FrameObservation {
    let fading = draw_fading(c.len(), cfg.branches, rng);
    transmit_over(c, cfg, &fading, rng)
}

/// Sends `c` through the given fading realization, drawing only the noise.
pub fn transmit_over<R: Rng + ?Sized>(
    c: &BitVector,
    cfg: &ChannelConfig,
    fading: &FadingRealization,
    rng: &mut R,
) -> FrameObservation {
    assert_eq!(
        fading.n(),
        c.len(),
        "fading realization length differs from codeword"
    );
    assert_eq!(
        fading.branches(),
        cfg.branches,
        "fading branch count differs from config"
    );
    let amplitude = cfg.rate.sqrt();
    let sigma = cfg.noise_sigma();
    let mut hard_bits = BitVector::zeros(c.len());
    let mut csi_weights = Vec::with_capacity(c.len());
    let mut received = vec![Complex64::new(0.0, 0.0); cfg.branches];

    for i in 0..c.len() {
        let s = if c.get(i) { -amplitude } else { amplitude };
        let gains = fading.bit(i);
        for (y, h) in received.iter_mut().zip(gains) {
            *y = h * s + complex_normal(rng) * sigma;
        }
        let (statistic, weight) = combine(cfg.combiner, gains, &received);
        if statistic.re < 0.0 {
            hard_bits.set(i, true);
        }
        csi_weights.push(weight);
    }
    FrameObservation {
        hard_bits,
        csi_weights,
    }
}

/// Combined decision statistic and CSI weight for one coded bit.
///
/// SC derotates the strongest branch by its conjugate gain; MRC sums
/// `h_l^* · y_l` over all branches without normalization, since any positive
/// scale leaves the sign test unchanged.
pub fn combine(
    combiner: Combiner,
    gains: &[Complex64],
    received: &[Complex64],
) -> (Complex64, f64) {
    match combiner {
        Combiner::None => (gains[0].conj() * received[0], gains[0].norm()),
        Combiner::Sc => {
            let best = (1..gains.len()).fold(0, |b, j| {
                if gains[j].norm_sqr() > gains[b].norm_sqr() {
                    j
                } else {
                    b
                }
            });
            (gains[best].conj() * received[best], gains[best].norm())
        }
        Combiner::Mrc => {
            let combined: Complex64 = gains.iter().zip(received).map(|(h, y)| h.conj() * y).sum();
            let mean_mag = gains.iter().map(|h| h.norm()).sum::<f64>() / gains.len() as f64;
            (combined, mean_mag)
        }
    }
}

/// Reliable positions `{ i : w_i ≥ delta }`, ascending.
pub fn reliable_set(obs: &FrameObservation, delta: f64) -> Vec<usize> {
    assert!(delta >= 0.0, "threshold must be non-negative");
    obs.csi_weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w >= delta)
        .map(|(i, _)| i)
        .collect()
}

/// Closed-form BPSK bit error probability on a single Rayleigh branch.
pub fn rayleigh_bpsk_ber(mean_snr: f64) -> f64 {
    0.5 * (1.0 - (mean_snr / (1.0 + mean_snr)).sqrt())
}
