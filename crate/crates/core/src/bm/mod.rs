//! Bounded-distance Berlekamp-Massey decoding of the binary BCH codes.

pub mod field;

use crate::codes::{Codebook, Family};
use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::grand::DecodeOutcome;

use field::{GFElement, ORDER};

/// Syndromes `S_j = y(α^j)` for `j = 1..=2t`, position `i` read as the
/// coefficient of `x^i`.
pub fn bch_syndromes(yhat: &BitVector, t: usize) -> Vec<GFElement> {
    assert_eq!(yhat.len(), ORDER, "BCH syndromes need a length-127 word");
    let ones: Vec<usize> = yhat.ones().collect();
    (1..=2 * t)
        .map(|j| {
            ones.iter().fold(GFElement::ZERO, |acc, &i| {
                acc + GFElement::alpha_pow((i * j) as i64)
            })
        })
        .collect()
}

/// Error-locator polynomial Λ(x), lowest degree first, Λ(0) = 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorLocator {
    coefficients: Vec<GFElement>,
}

impl ErrorLocator {
    pub fn coefficients(&self) -> &[GFElement] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients
            .iter()
            .rposition(|c| !c.is_zero())
            .unwrap_or(0)
    }

    pub fn eval(&self, x: GFElement) -> GFElement {
        self.coefficients
            .iter()
            .rev()
            .fold(GFElement::ZERO, |acc, &c| acc * x + c)
    }

    /// Chien search: positions `p` with Λ(α^-p) = 0.
    pub fn error_positions(&self) -> Vec<usize> {
        (0..ORDER)
            .filter(|&p| self.eval(GFElement::alpha_pow(-(p as i64))).is_zero())
            .collect()
    }
}

/// Shortest LFSR generating the syndrome sequence.
pub fn berlekamp_massey(syndromes: &[GFElement]) -> ErrorLocator {
    let mut c = vec![GFElement::ONE];
    let mut b = vec![GFElement::ONE];
    let mut len = 0usize;
    let mut shift = 1usize;
    let mut last_discrepancy = GFElement::ONE;

    for step in 0..syndromes.len() {
        let mut d = syndromes[step];
        for i in 1..=len.min(c.len() - 1) {
            d = d + c[i] * syndromes[step - i];
        }
        if d.is_zero() {
            shift += 1;
            continue;
        }
        let scale = d * last_discrepancy.inverse();
        let previous = c.clone();
        if c.len() < b.len() + shift {
            c.resize(b.len() + shift, GFElement::ZERO);
        }
        for (i, &bi) in b.iter().enumerate() {
            c[i + shift] = c[i + shift] + scale * bi;
        }
        if 2 * len <= step {
            len = step + 1 - len;
            b = previous;
            last_discrepancy = d;
            shift = 1;
        } else {
            shift += 1;
        }
    }
    c.truncate(len + 1);
    c.resize(len + 1, GFElement::ZERO);
    ErrorLocator { coefficients: c }
}

/// Hard-decision B-M decoding; fails (Abandoned) when the locator has more
/// than `t` roots claimed, or fewer distinct roots than its degree.
pub fn bm_decode(yhat: &BitVector, code: &Codebook) -> Result<DecodeOutcome> {
    let t = match (code.family(), code.metadata().designed_t) {
        (Family::Bch, Some(t)) if code.n() == ORDER => t,
        _ => return Err(Error::NotBch(code.id())),
    };
    assert_eq!(
        yhat.len(),
        code.n(),
        "hard decision length differs from code length"
    );
    let syndromes = bch_syndromes(yhat, t);
    if syndromes.iter().all(|s| s.is_zero()) {
        return Ok(DecodeOutcome::decoded(code, yhat.clone(), 0));
    }
    let locator = berlekamp_massey(&syndromes);
    let degree = locator.degree();
    if degree == 0 || degree > t {
        return Ok(DecodeOutcome::abandoned(0));
    }
    let positions = locator.error_positions();
    if positions.len() != degree {
        return Ok(DecodeOutcome::abandoned(0));
    }
    let mut c = yhat.clone();
    for p in positions {
        c.flip(p);
    }
    if !code.is_codeword(&c) {
        return Ok(DecodeOutcome::abandoned(0));
    }
    Ok(DecodeOutcome::decoded(code, c, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{make_bch, make_rlc};
    use crate::grand::{grandab_decode, DecodeStatus};
    use rand::seq::index::sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_codeword(code: &Codebook, rng: &mut impl Rng) -> BitVector {
        let bits: Vec<u8> = (0..code.k()).map(|_| rng.random::<bool>() as u8).collect();
        code.encode(&BitVector::from_bits(&bits))
    }

    #[test]
    fn codeword_syndromes_vanish() {
        let code = make_bch(127, 106).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let c = random_codeword(&code, &mut rng);
            assert!(bch_syndromes(&c, 3).iter().all(|s| s.is_zero()));
        }
    }

    #[test]
    fn single_error_closed_form() {
        let code = make_bch(127, 113).unwrap();
        let c = random_codeword(&code, &mut ChaCha8Rng::seed_from_u64(2));
        for p in [0usize, 1, 64, 126] {
            let mut y = c.clone();
            y.flip(p);
            let s = bch_syndromes(&y, 2);
            for (j, sj) in s.iter().enumerate() {
                assert_eq!(*sj, GFElement::alpha_pow((p * (j + 1)) as i64));
            }
            assert_eq!(s[1], s[0] * s[0]);
        }
    }

    #[test]
    fn syndromes_match_polynomial_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let support: Vec<usize> = sample(&mut rng, 127, 3).into_vec();
            let e = BitVector::from_support(127, &support);
            let s = bch_syndromes(&e, 3);
            for j in 1..=6usize {
                // Horner evaluation of e(x) at α^j, highest degree first.
                let x = GFElement::alpha_pow(j as i64);
                let mut acc = GFElement::ZERO;
                for i in (0..127).rev() {
                    acc = acc * x
                        + if e.get(i) {
                            GFElement::ONE
                        } else {
                            GFElement::ZERO
                        };
                }
                assert_eq!(s[j - 1], acc);
            }
        }
    }

    #[test]
    fn zero_error_input() {
        let code = make_bch(127, 113).unwrap();
        let c = random_codeword(&code, &mut ChaCha8Rng::seed_from_u64(4));
        let out = bm_decode(&c, &code).unwrap();
        assert_eq!(out.codeword, Some(c));
    }

    #[test]
    fn rejects_non_bch() {
        let code = make_rlc(128, 104, 1).unwrap();
        assert!(matches!(
            bm_decode(&BitVector::zeros(128), &code),
            Err(Error::NotBch(_))
        ));
    }

    #[test]
    fn beyond_radius_never_returns_invalid_codeword() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (code, t) in [
            (make_bch(127, 113).unwrap(), 2),
            (make_bch(127, 106).unwrap(), 3),
        ] {
            let mut failures = 0;
            for _ in 0..2000 {
                let c = random_codeword(&code, &mut rng);
                let mut y = c.clone();
                for p in sample(&mut rng, 127, t + 1).into_iter() {
                    y.flip(p);
                }
                let out = bm_decode(&y, &code).unwrap();
                match out.status {
                    DecodeStatus::Decoded => {
                        let d = out.codeword.unwrap();
                        assert!(code.is_codeword(&d));
                        assert_ne!(d, c);
                    }
                    DecodeStatus::Abandoned => failures += 1,
                }
            }
            assert!(failures > 0);
        }
    }

    #[test]
    fn agrees_with_grandab_inside_packing_radius() {
        let code = make_bch(127, 113).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let c = random_codeword(&code, &mut rng);
            let w = rng.random_range(0..=2);
            let mut y = c.clone();
            for p in sample(&mut rng, 127, w).into_iter() {
                y.flip(p);
            }
            let bm = bm_decode(&y, &code).unwrap();
            let gr = grandab_decode(&y, &code, 3);
            assert_eq!(bm.codeword, gr.codeword);
            assert_eq!(bm.codeword, Some(c));
        }
    }
}
