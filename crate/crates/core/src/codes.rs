//! Code construction: BCH(127,k), CRC-based (128,104) and random linear codes.
//!
//! Bit layouts:
//! - BCH: position `i` carries the coefficient of `x^i`. Systematic, parity in
//!   positions `0..n-k`, message in `n-k..n`. Codewords are multiples of g(x).
//! - CRC: message first (MSB-first, position 0 is the highest degree), then the
//!   remainder of `u(x)·x^(n-k)` mod g(x), highest degree first.
//! - RLC: `[I_k | P]` with `P` uniform random from a seeded ChaCha stream.

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bm::field::{minimal_polynomial, ORDER};
use crate::error::{Error, Result};
use crate::gf2::{
    parity_check_from_generator, right_inverse, syndrome, BitMatrix, BitVector, SyndromeMasks,
};

/// Generator polynomial of the CRC(128,104) code, normal notation with the
/// leading x^24 term implicit.
pub const CRC_128_104_POLY: u64 = 0xB2B117;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Bch,
    Crc,
    Rlc,
    /// Any other linear code given directly by its generator matrix.
    Linear,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Bch => "bch",
            Family::Crc => "crc",
            Family::Rlc => "rlc",
            Family::Linear => "linear",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CodeMetadata {
    /// Generator polynomial, bit d = coefficient of x^d, leading term included.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator_poly: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub designed_t: Option<usize>,
}

/// An (n, k) binary linear block code.
#[derive(Clone, Debug)]
pub struct Codebook {
    n: usize,
    k: usize,
    family: Family,
    metadata: CodeMetadata,
    g: BitMatrix,
    h: BitMatrix,
    ginv: BitMatrix,
    masks: SyndromeMasks,
}

impl Codebook {
    /// Assembles a codebook from `G` and `H`, checking `H·Gᵀ = 0` and ranks.
    pub fn new(family: Family, g: BitMatrix, h: BitMatrix, metadata: CodeMetadata) -> Result<Self> {
        let (k, n) = (g.rows(), g.cols());
        if k >= n {
            return Err(Error::InvalidCodebook(format!("need k < n, got ({n},{k})")));
        }
        if h.cols() != n || h.rows() != n - k {
            return Err(Error::InvalidCodebook(format!(
                "H is {}x{}, expected {}x{n}",
                h.rows(),
                h.cols(),
                n - k
            )));
        }
        if !h.mul(&g.transpose()).is_zero() {
            return Err(Error::InvalidCodebook("H·Gᵀ ≠ 0".into()));
        }
        if h.rank() != n - k {
            return Err(Error::InvalidCodebook("H is rank deficient".into()));
        }
        let ginv = right_inverse(&g)?;
        let masks = SyndromeMasks::new(&h)?;
        Ok(Self {
            n,
            k,
            family,
            metadata,
            g,
            h,
            ginv,
            masks,
        })
    }

    /// Code spanned by the rows of `g`; `H` is derived from it.
    pub fn from_generator(family: Family, g: BitMatrix, metadata: CodeMetadata) -> Result<Self> {
        let h = parity_check_from_generator(&g)?;
        Self::new(family, g, h, metadata)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn metadata(&self) -> &CodeMetadata {
        &self.metadata
    }

    pub fn generator(&self) -> &BitMatrix {
        &self.g
    }

    pub fn parity_check(&self) -> &BitMatrix {
        &self.h
    }

    pub fn right_inverse(&self) -> &BitMatrix {
        &self.ginv
    }

    pub fn syndrome_masks(&self) -> &SyndromeMasks {
        &self.masks
    }

    /// Identifier used as the calibration-store key, e.g. `rlc-128-104`.
    pub fn id(&self) -> String {
        format!("{}-{}-{}", self.family, self.n, self.k)
    }

    pub fn encode(&self, message: &BitVector) -> BitVector {
        self.g.vec_mul(message)
    }

    /// Message recovered from a codeword via `Ginv`.
    pub fn recover(&self, codeword: &BitVector) -> BitVector {
        self.ginv.vec_mul(codeword)
    }

    pub fn syndrome(&self, v: &BitVector) -> BitVector {
        syndrome(&self.h, v)
    }

    pub fn is_codeword(&self, v: &BitVector) -> bool {
        self.masks.syndrome(v) == 0
    }

    pub fn to_file(&self) -> CodebookFile {
        CodebookFile {
            n: self.n,
            k: self.k,
            family: self.family,
            metadata: self.metadata.clone(),
            g: self.g.to_hex_rows(),
            h: self.h.to_hex_rows(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CodebookFile = serde_json::from_str(text)?;
        file.into_codebook()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidCodebook(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// JSON exchange form of a [`Codebook`]: hex rows of `G` and `H`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodebookFile {
    pub n: usize,
    pub k: usize,
    pub family: Family,
    pub metadata: CodeMetadata,
    pub g: Vec<String>,
    pub h: Vec<String>,
}

impl CodebookFile {
    pub fn into_codebook(self) -> Result<Codebook> {
        if self.g.len() != self.k || self.h.len() + self.k != self.n {
            return Err(Error::InvalidCodebook(format!(
                "row counts G={}, H={} do not match (n,k)=({},{})",
                self.g.len(),
                self.h.len(),
                self.n,
                self.k
            )));
        }
        let g = BitMatrix::from_hex_rows(&self.g, self.n)?;
        let h = BitMatrix::from_hex_rows(&self.h, self.n)?;
        Codebook::new(self.family, g, h, self.metadata)
    }
}

#[inline]
fn degree(poly: u128) -> usize {
    assert!(poly != 0, "degree of zero polynomial");
    127 - poly.leading_zeros() as usize
}

/// Remainder of `a` modulo `m` over GF(2).
fn poly_mod(mut a: u128, m: u128) -> u128 {
    let dm = degree(m);
    while a != 0 && degree(a) >= dm {
        a ^= m << (degree(a) - dm);
    }
    a
}

fn poly_mul(a: u128, b: u128) -> u128 {
    let mut acc = 0u128;
    for d in 0..128 {
        if b >> d & 1 == 1 {
            acc ^= a << d;
        }
    }
    acc
}

/// Generator polynomial of the narrow-sense binary BCH code of length 127
/// with designed correction radius `t`.
pub fn bch_generator_polynomial(t: usize) -> u128 {
    let mut g: u128 = 1;
    let mut used: Vec<u128> = Vec::new();
    for i in 1..=2 * t {
        let m = minimal_polynomial(i % ORDER);
        if !used.contains(&m) {
            used.push(m);
            g = poly_mul(g, m);
        }
    }
    g
}

/// Binary BCH code (127, k) for k ∈ {106, 113}.
pub fn make_bch(n: usize, k: usize) -> Result<Codebook> {
    let t = match (n, k) {
        (127, 113) => 2,
        (127, 106) => 3,
        _ => {
            return Err(Error::UnsupportedCode {
                family: "bch".into(),
                n,
                k,
            })
        }
    };
    let gpoly = bch_generator_polynomial(t);
    let r = n - k;
    assert_eq!(degree(gpoly), r, "BCH generator degree");
    let mut g = BitMatrix::zeros(k, n);
    for i in 0..k {
        let rem = poly_mod(1u128 << (r + i), gpoly);
        g.set(i, r + i, true);
        for d in 0..r {
            if rem >> d & 1 == 1 {
                g.set(i, d, true);
            }
        }
    }
    Codebook::from_generator(
        Family::Bch,
        g,
        CodeMetadata {
            generator_poly: Some(format!("{gpoly:#x}")),
            designed_t: Some(t),
            ..Default::default()
        },
    )
}

/// Resolves a CRC polynomial to full form (leading term included). Accepts
/// either the full polynomial (degree n-k) or normal notation with the
/// leading x^(n-k) implicit.
pub fn full_crc_polynomial(poly: u64, parity: usize) -> Result<u128> {
    let err = Error::PolynomialDegree { poly, parity };
    if poly == 0 || parity == 0 || parity > 64 {
        return Err(err);
    }
    let p = poly as u128;
    match degree(p) {
        d if d == parity => Ok(p),
        d if d + 1 == parity => Ok(p | (1u128 << parity)),
        _ => Err(err),
    }
}

/// CRC code used as an (n, k) block code with generator polynomial `poly`.
pub fn make_crc(n: usize, k: usize, poly: u64) -> Result<Codebook> {
    if k == 0 || k >= n {
        return Err(Error::UnsupportedCode {
            family: "crc".into(),
            n,
            k,
        });
    }
    let r = n - k;
    let gpoly = full_crc_polynomial(poly, r)?;
    let mut g = BitMatrix::zeros(k, n);
    let mut rem = poly_mod(1u128 << r, gpoly);
    // Row k-1 holds x^0 · x^r; each earlier row multiplies by x.
    for i in (0..k).rev() {
        g.set(i, i, true);
        for d in 0..r {
            if rem >> d & 1 == 1 {
                g.set(i, k + (r - 1 - d), true);
            }
        }
        rem = poly_mod(rem << 1, gpoly);
    }
    Codebook::from_generator(
        Family::Crc,
        g,
        CodeMetadata {
            generator_poly: Some(format!("{gpoly:#x}")),
            ..Default::default()
        },
    )
}

/// Systematic random linear code `[I_k | P]`.
pub fn make_rlc(n: usize, k: usize, seed: u64) -> Result<Codebook> {
    if k == 0 || k >= n {
        return Err(Error::UnsupportedCode {
            family: "rlc".into(),
            n,
            k,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = BitMatrix::zeros(k, n);
    for i in 0..k {
        g.set(i, i, true);
        for c in k..n {
            if rng.random::<bool>() {
                g.set(i, c, true);
            }
        }
    }
    Codebook::from_generator(
        Family::Rlc,
        g,
        CodeMetadata {
            seed: Some(seed),
            ..Default::default()
        },
    )
}

/// Seed used for the default RLC(128,104) instance.
pub const DEFAULT_RLC_SEED: u64 = 1;

/// AB (maximum TEP weight) used with each code in the evaluation.
pub fn default_abandonment_weight(code: &Codebook) -> usize {
    match (code.family(), code.n(), code.k()) {
        (Family::Bch, 127, 113) => 3,
        _ => 4,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_message(rng: &mut impl Rng, k: usize) -> BitVector {
        let bits: Vec<u8> = (0..k).map(|_| rng.random::<bool>() as u8).collect();
        BitVector::from_bits(&bits)
    }

    #[test]
    fn bch_designed_radius() {
        let c113 = make_bch(127, 113).unwrap();
        assert_eq!(c113.metadata().designed_t, Some(2));
        assert_eq!(degree(bch_generator_polynomial(2)), 14);
        let c106 = make_bch(127, 106).unwrap();
        assert_eq!(c106.metadata().designed_t, Some(3));
        assert_eq!(degree(bch_generator_polynomial(3)), 21);
    }

    #[test]
    fn bch_rejects_other_parameters() {
        assert!(matches!(
            make_bch(127, 100),
            Err(Error::UnsupportedCode { .. })
        ));
        assert!(make_bch(63, 51).is_err());
    }

    #[test]
    fn bch_codes_are_cyclic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for code in [make_bch(127, 113).unwrap(), make_bch(127, 106).unwrap()] {
            for _ in 0..50 {
                let c = code.encode(&random_message(&mut rng, code.k()));
                let mut shifted = c.clone();
                for _ in 0..7 {
                    shifted = shifted.rotate_right_one();
                    assert!(code.is_codeword(&shifted));
                }
            }
        }
    }

    /// Bitwise shift-register CRC, independent of the generator matrix.
    fn crc_long_division(message: &BitVector, gpoly: u128, r: usize) -> Vec<u8> {
        let mut reg: u128 = 0;
        let top = 1u128 << r;
        for i in 0..message.len() {
            let feedback = ((reg >> (r - 1)) & 1) ^ message.get(i) as u128;
            reg = (reg << 1) & (top - 1);
            if feedback == 1 {
                reg ^= gpoly & (top - 1);
            }
        }
        (0..r).rev().map(|d| (reg >> d & 1) as u8).collect()
    }

    #[test]
    fn crc_parity_matches_long_division() {
        let code = make_crc(128, 104, CRC_128_104_POLY).unwrap();
        let gpoly = full_crc_polynomial(CRC_128_104_POLY, 24).unwrap();
        assert_eq!(gpoly, 0x1B2B117);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let u = random_message(&mut rng, 104);
            let c = code.encode(&u);
            let bits = c.to_bits();
            assert_eq!(&bits[..104], &u.to_bits()[..]);
            assert_eq!(&bits[104..], &crc_long_division(&u, gpoly, 24)[..]);
        }
    }

    #[test]
    fn crc_zero_message_and_single_flips() {
        let code = make_crc(128, 104, CRC_128_104_POLY).unwrap();
        let zero = code.encode(&BitVector::zeros(104));
        assert!(zero.is_zero());
        assert!(code.syndrome(&zero).is_zero());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = code.encode(&random_message(&mut rng, 104));
        for j in 0..128 {
            let mut y = c.clone();
            y.flip(j);
            assert!(!code.syndrome(&y).is_zero(), "flip at {j} undetected");
        }
    }

    #[test]
    fn crc_degree_mismatch() {
        assert!(matches!(
            make_crc(128, 104, 0x1021),
            Err(Error::PolynomialDegree { .. })
        ));
        // The explicit full form is accepted too.
        assert!(make_crc(128, 104, 0x1B2B117).is_ok());
    }

    #[test]
    fn rlc_determinism_and_seed_sensitivity() {
        let a = make_rlc(128, 104, 7).unwrap();
        let b = make_rlc(128, 104, 7).unwrap();
        assert_eq!(a.generator(), b.generator());
        let s1 = make_rlc(128, 104, 1).unwrap();
        let s2 = make_rlc(128, 104, 2).unwrap();
        assert_ne!(s1.generator(), s2.generator());
        assert_eq!(s1.metadata().seed, Some(1));
        // H = [Pᵀ | I]
        let h = s1.parity_check();
        for r in 0..24 {
            for i in 0..104 {
                assert_eq!(h.get(r, i), s1.generator().get(i, 104 + r));
            }
            for c in 0..24 {
                assert_eq!(h.get(r, 104 + c), r == c);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let code = make_crc(128, 104, CRC_128_104_POLY).unwrap();
        let text = code.to_json().unwrap();
        let back = Codebook::from_json(&text).unwrap();
        assert_eq!(back.generator(), code.generator());
        assert_eq!(back.parity_check(), code.parity_check());
        assert_eq!(back.metadata(), code.metadata());
        assert_eq!(back.id(), "crc-128-104");
    }

    #[test]
    fn json_rejects_inconsistent_matrices() {
        let code = make_rlc(16, 8, 3).unwrap();
        let mut file = code.to_file();
        file.h[0] = "0001".into();
        assert!(file.into_codebook().is_err());
    }

    #[test]
    fn abandonment_weights() {
        assert_eq!(default_abandonment_weight(&make_bch(127, 113).unwrap()), 3);
        assert_eq!(default_abandonment_weight(&make_bch(127, 106).unwrap()), 4);
        assert_eq!(
            default_abandonment_weight(&make_rlc(128, 104, 1).unwrap()),
            4
        );
    }
}
