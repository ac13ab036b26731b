//! GF(2^7) arithmetic through log/antilog tables.

use std::fmt;
use std::ops::{Add, Mul};
use std::sync::OnceLock;

/// x^7 + x^3 + 1
pub const PRIMITIVE_POLY: u16 = 0x89;
pub const FIELD_BITS: u32 = 7;
/// Multiplicative group order, 2^7 - 1.
pub const ORDER: usize = 127;

struct Tables {
    exp: [u8; 2 * ORDER],
    log: [u8; ORDER + 1],
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut exp = [0u8; 2 * ORDER];
        let mut log = [0u8; ORDER + 1];
        let mut x: u16 = 1;
        for i in 0..ORDER {
            exp[i] = x as u8;
            exp[i + ORDER] = x as u8;
            log[x as usize] = i as u8;
            x <<= 1;
            if x & (1 << FIELD_BITS) != 0 {
                x ^= PRIMITIVE_POLY;
            }
        }
        Tables { exp, log }
    })
}

/// An element of GF(2^7), stored as its polynomial-basis bit pattern.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct GFElement(u8);

impl GFElement {
    pub const ZERO: GFElement = GFElement(0);
    pub const ONE: GFElement = GFElement(1);

    pub fn new(value: u8) -> Self {
        assert!(value < 128, "GF(2^7) element out of range: {value}");
        GFElement(value)
    }

    /// α^e for any integer exponent, reduced mod 127.
    pub fn alpha_pow(e: i64) -> Self {
        let e = e.rem_euclid(ORDER as i64) as usize;
        GFElement(tables().exp[e])
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Discrete log base α; `None` for zero.
    pub fn log(self) -> Option<usize> {
        (self.0 != 0).then(|| tables().log[self.0 as usize] as usize)
    }

    pub fn inverse(self) -> Self {
        let l = self.log().expect("zero has no inverse");
        GFElement(tables().exp[(ORDER - l) % ORDER])
    }

    pub fn pow(self, e: usize) -> Self {
        match self.log() {
            None if e == 0 => GFElement::ONE,
            None => GFElement::ZERO,
            Some(l) => GFElement(tables().exp[(l * e) % ORDER]),
        }
    }
}

impl Add for GFElement {
    type Output = GFElement;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        GFElement(self.0 ^ rhs.0)
    }
}

impl Mul for GFElement {
    type Output = GFElement;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        if self.0 == 0 || rhs.0 == 0 {
            return GFElement::ZERO;
        }
        let t = tables();
        GFElement(t.exp[t.log[self.0 as usize] as usize + t.log[rhs.0 as usize] as usize])
    }
}

impl fmt::Debug for GFElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.log() {
            Some(l) => write!(f, "a^{l}"),
            None => write!(f, "0"),
        }
    }
}

/// Minimal polynomial of α^i over GF(2), as a bit mask (bit d = coefficient of x^d).
pub fn minimal_polynomial(i: usize) -> u128 {
    // Cyclotomic coset of i under doubling mod 127.
    let mut coset = vec![i % ORDER];
    let mut j = (2 * i) % ORDER;
    while j != i % ORDER {
        coset.push(j);
        j = (2 * j) % ORDER;
    }
    // Expand prod (x + α^j) with GF(2^7) coefficients, lowest degree first.
    let mut poly = vec![GFElement::ONE];
    for &j in &coset {
        let root = GFElement::alpha_pow(j as i64);
        let mut next = vec![GFElement::ZERO; poly.len() + 1];
        for (d, &c) in poly.iter().enumerate() {
            next[d + 1] = next[d + 1] + c;
            next[d] = next[d] + c * root;
        }
        poly = next;
    }
    poly.iter().enumerate().fold(0u128, |acc, (d, c)| {
        assert!(c.0 <= 1, "minimal polynomial coefficient outside GF(2)");
        acc | ((c.0 as u128) << d)
    })
}
