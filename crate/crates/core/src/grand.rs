//! Hard-input GRAND decoding.
//!
//! Test error patterns (TEPs) are generated in ascending Hamming weight
//! `1..=ab`; inside a weight class supports follow lexicographic order on
//! sorted index tuples. Fading-GRAND drops every TEP touching a reliable
//! position (CSI weight at or above the threshold).
//!
//! Query accounting: the membership test of the unmodified hard decision is
//! query 1 and every TEP tested adds one, so an abandoned decode performs
//! exactly `1 + Σ_{i=1}^{ab} C(n - |I|, i)` queries.

use crate::channel::{reliable_set, FrameObservation};
use crate::codes::Codebook;
use crate::gf2::BitVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodeStatus {
    Decoded,
    Abandoned,
}

/// Result of a single decode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub status: DecodeStatus,
    /// Present iff decoded.
    pub message: Option<BitVector>,
    /// Present iff decoded.
    pub codeword: Option<BitVector>,
    /// Codebook-membership queries performed. Algebraic decoders report 0.
    pub queries: u64,
}

impl DecodeOutcome {
    pub fn decoded(code: &Codebook, codeword: BitVector, queries: u64) -> Self {
        Self {
            status: DecodeStatus::Decoded,
            message: Some(code.recover(&codeword)),
            codeword: Some(codeword),
            queries,
        }
    }

    pub fn abandoned(queries: u64) -> Self {
        Self {
            status: DecodeStatus::Abandoned,
            message: None,
            codeword: None,
            queries,
        }
    }

    pub fn is_decoded(&self) -> bool {
        self.status == DecodeStatus::Decoded
    }
}

/// Which TEPs to generate: weights `1..=ab` over positions outside `excluded`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TepSchedule {
    n: usize,
    ab: usize,
    excluded: Vec<bool>,
}

impl TepSchedule {
    pub fn new(n: usize, ab: usize, excluded: &[usize]) -> Self {
        let mut mask = vec![false; n];
        for &i in excluded {
            assert!(i < n, "excluded index {i} out of range for n={n}");
            mask[i] = true;
        }
        Self {
            n,
            ab,
            excluded: mask,
        }
    }

    pub fn unrestricted(n: usize, ab: usize) -> Self {
        Self::new(n, ab, &[])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ab(&self) -> usize {
        self.ab
    }

    /// Positions TEPs may flip, ascending.
    pub fn allowed(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| !self.excluded[i]).collect()
    }

    /// Σ_{i=1}^{ab} C(n - |I|, i)
    pub fn count(&self) -> u64 {
        tep_count(self.allowed().len(), self.ab)
    }
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Number of TEPs of weight 1..=ab over `free` positions.
pub fn tep_count(free: usize, ab: usize) -> u64 {
    (1..=ab).map(|w| binomial(free, w)).sum()
}

/// Worst-case membership queries, including the initial check.
pub fn worst_case_queries(free: usize, ab: usize) -> u64 {
    1 + tep_count(free, ab)
}

/// Stream of TEPs in schedule order.
pub fn enumerate_teps(schedule: &TepSchedule) -> TepIter {
    let allowed = schedule.allowed();
    let max_weight = schedule.ab.min(allowed.len());
    TepIter {
        n: schedule.n,
        allowed,
        max_weight,
        current: Vec::new(),
        started: false,
    }
}

/// Iterator returned by [`enumerate_teps`].
#[derive(Clone, Debug)]
pub struct TepIter {
    n: usize,
    allowed: Vec<usize>,
    max_weight: usize,
    /// Indices into `allowed`, strictly increasing.
    current: Vec<usize>,
    started: bool,
}

impl TepIter {
    fn advance(&mut self) -> bool {
        let m = self.allowed.len();
        if !self.started {
            self.started = true;
            if self.max_weight == 0 {
                return false;
            }
            self.current = vec![0];
            return true;
        }
        let w = self.current.len();
        // Rightmost index that can still move.
        if let Some(d) = (0..w).rev().find(|&d| self.current[d] < m - w + d) {
            self.current[d] += 1;
            for j in d + 1..w {
                self.current[j] = self.current[j - 1] + 1;
            }
            return true;
        }
        if w < self.max_weight {
            self.current = (0..w + 1).collect();
            return true;
        }
        false
    }

    /// Support of the current TEP as positions in `0..n`.
    fn support(&self) -> Vec<usize> {
        self.current.iter().map(|&j| self.allowed[j]).collect()
    }
}

impl Iterator for TepIter {
    type Item = BitVector;

    fn next(&mut self) -> Option<BitVector> {
        if self.advance() {
            Some(BitVector::from_support(self.n, &self.support()))
        } else {
            None
        }
    }
}

/// Outcome of the TEP search on packed syndromes: the flipped positions on
/// success, plus the query count.
struct Search {
    flips: Option<Vec<usize>>,
    queries: u64,
}

/// Walks the schedule over `allowed` positions looking for the first TEP
/// whose syndrome cancels `s0`. Partial syndromes of each prefix of the
/// support are carried down the recursion, so each query costs one XOR.
fn search(s0: u128, columns: &[u128], allowed: &[usize], ab: usize) -> Search {
    let mut queries = 1u64;
    if s0 == 0 {
        return Search {
            flips: Some(Vec::new()),
            queries,
        };
    }
    let m = columns.len();
    let mut chosen = Vec::with_capacity(ab);
    for w in 1..=ab.min(m) {
        if descend(s0, columns, w, 0, &mut chosen, &mut queries) {
            return Search {
                flips: Some(chosen.iter().map(|&j| allowed[j]).collect()),
                queries,
            };
        }
    }
    Search {
        flips: None,
        queries,
    }
}

fn descend(
    partial: u128,
    columns: &[u128],
    w: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    queries: &mut u64,
) -> bool {
    let m = columns.len();
    if w == 1 {
        for (j, &col) in columns.iter().enumerate().skip(start) {
            if partial ^ col == 0 {
                *queries += (j - start + 1) as u64;
                chosen.push(j);
                return true;
            }
        }
        *queries += (m - start) as u64;
        return false;
    }
    for j in start..=m - w {
        chosen.push(j);
        if descend(partial ^ columns[j], columns, w - 1, j + 1, chosen, queries) {
            return true;
        }
        chosen.pop();
    }
    false
}

fn guess(yhat: &BitVector, code: &Codebook, ab: usize, allowed: &[usize]) -> DecodeOutcome {
    assert_eq!(
        yhat.len(),
        code.n(),
        "hard decision length differs from code length"
    );
    let masks = code.syndrome_masks();
    let s0 = masks.syndrome(yhat);
    let columns: Vec<u128> = allowed.iter().map(|&i| masks.column(i)).collect();
    let found = search(s0, &columns, allowed, ab);
    match found.flips {
        Some(flips) => {
            let mut c = yhat.clone();
            for p in flips {
                c.flip(p);
            }
            DecodeOutcome::decoded(code, c, found.queries)
        }
        None => DecodeOutcome::abandoned(found.queries),
    }
}

/// GRAND with abandonment after all TEPs of weight ≤ `ab` fail.
pub fn grandab_decode(yhat: &BitVector, code: &Codebook, ab: usize) -> DecodeOutcome {
    let allowed: Vec<usize> = (0..code.n()).collect();
    guess(yhat, code, ab, &allowed)
}

/// Fading-GRAND: GRANDAB restricted to positions whose CSI weight is below `delta`.
pub fn fading_grand_decode(
    obs: &FrameObservation,
    code: &Codebook,
    ab: usize,
    delta: f64,
) -> DecodeOutcome {
    assert!(delta >= 0.0, "threshold must be non-negative");
    let reliable = reliable_set(obs, delta);
    let schedule = TepSchedule::new(code.n(), ab, &reliable);
    guess(&obs.hard_bits, code, ab, &schedule.allowed())
}

/// GRAND over an explicit schedule, for callers that build `I` themselves.
pub fn guess_with_schedule(
    yhat: &BitVector,
    code: &Codebook,
    schedule: &TepSchedule,
) -> DecodeOutcome {
    assert_eq!(
        schedule.n(),
        code.n(),
        "schedule length differs from code length"
    );
    guess(yhat, code, schedule.ab(), &schedule.allowed())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{make_rlc, Family};
    use crate::gf2::BitMatrix;

    #[test]
    fn figure_one_counts() {
        assert_eq!(enumerate_teps(&TepSchedule::unrestricted(6, 4)).count(), 56);
        let restricted = TepSchedule::new(6, 4, &[2]);
        let teps: Vec<_> = enumerate_teps(&restricted).collect();
        assert_eq!(teps.len(), 30);
        assert!(teps.iter().all(|e| !e.get(2)));
        assert_eq!(restricted.count(), 30);
    }

    #[test]
    fn n128_count() {
        assert_eq!(TepSchedule::unrestricted(128, 4).count(), 11_017_632);
        assert_eq!(binomial(128, 4), 10_668_000);
    }

    #[test]
    fn order_is_ascending_weight_then_lexicographic() {
        let teps: Vec<Vec<usize>> = enumerate_teps(&TepSchedule::unrestricted(5, 3))
            .map(|e| e.ones().collect())
            .collect();
        assert_eq!(teps[0], vec![0]);
        assert_eq!(teps[4], vec![4]);
        assert_eq!(teps[5], vec![0, 1]);
        assert_eq!(teps[6], vec![0, 2]);
        assert_eq!(teps[14], vec![3, 4]);
        assert_eq!(teps[15], vec![0, 1, 2]);
        assert_eq!(teps.last().unwrap(), &vec![2, 3, 4]);
        for pair in teps.windows(2) {
            assert!(
                pair[0].len() < pair[1].len()
                    || (pair[0].len() == pair[1].len() && pair[0] < pair[1])
            );
        }
    }

    #[test]
    fn empty_schedules() {
        assert_eq!(enumerate_teps(&TepSchedule::unrestricted(6, 0)).count(), 0);
        assert_eq!(
            enumerate_teps(&TepSchedule::new(3, 2, &[0, 1, 2])).count(),
            0
        );
    }

    /// (6,3) code with generator [I | P].
    fn toy_code() -> Codebook {
        let g =
            BitMatrix::from_rows(&[[1u8, 0, 0, 1, 1, 0], [0, 1, 0, 1, 0, 1], [0, 0, 1, 0, 1, 1]]);
        Codebook::from_generator(Family::Linear, g, Default::default()).unwrap()
    }

    #[test]
    fn codeword_input_costs_one_query() {
        let code = make_rlc(128, 104, 1).unwrap();
        let c = code.encode(&BitVector::from_support(104, &[3, 50]));
        let out = grandab_decode(&c, &code, 4);
        assert!(out.is_decoded());
        assert_eq!(out.queries, 1);
        assert_eq!(out.codeword.as_ref(), Some(&c));
    }

    #[test]
    fn single_flip_found_in_weight_one_sweep() {
        let code = make_rlc(128, 104, 1).unwrap();
        let u = BitVector::from_support(104, &[0, 9, 77]);
        let c = code.encode(&u);
        for j in [0, 17, 127] {
            let mut y = c.clone();
            y.flip(j);
            let out = grandab_decode(&y, &code, 4);
            assert_eq!(out.codeword.as_ref(), Some(&c));
            assert_eq!(out.message.as_ref(), Some(&u));
            assert!(out.queries <= 1 + 128);
        }
    }

    #[test]
    fn exclusion_blocks_correction() {
        let code = toy_code();
        let c = code.encode(&BitVector::from_bits(&[1, 0, 1]));
        let mut y = c.clone();
        y.flip(2);
        assert_eq!(grandab_decode(&y, &code, 1).codeword, Some(c));
        let blocked = guess_with_schedule(&y, &code, &TepSchedule::new(6, 1, &[2]));
        assert_eq!(blocked.status, DecodeStatus::Abandoned);
        assert_eq!(blocked.queries, 1 + 5);
    }
}
