//! Post-selected search and counting over a marked set.
//!
//! Counting runs entirely through `f(z)`: the phase-kickback circuit leaves a
//! flag qubit in `cos(t)|0> + sin(t)|1>` with `tan(t) = M / (N - M)`, and
//! repeated squaring by post-selection pushes the pair towards whichever
//! coefficient is larger. A padded oracle turns "is `M > T`" into "is the
//! padded count above half", and binary search over `T` recovers `M`.

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::bits;
use crate::error::{invalid, Error, Result};
use crate::statevec::{PostSelection, StateVector};

/// Closeness of the amplified pair to `(1/sqrt 2, 1/sqrt 2)` reported as a tie.
pub const BALANCE_TOL: f64 = 1e-6;

/// Extra squaring rounds beyond `ceil(log2 N)`.
pub const EXTRA_SQUARINGS: u32 = 4;

/// A marked subset of `{0,1}^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedOracle {
    k: usize,
    marked: BTreeSet<u64>,
}

impl MarkedOracle {
    pub fn new(k: usize, marked: impl IntoIterator<Item = u64>) -> Result<Self> {
        if k == 0 || k > 20 {
            return Err(invalid("k", format!("{k} not in 1..=20")));
        }
        let marked: BTreeSet<u64> = marked.into_iter().collect();
        if let Some(&z) = marked.iter().find(|&&z| z >> k != 0) {
            return Err(Error::IndexOutOfRange { index: z as usize, len: 1 << k });
        }
        Ok(MarkedOracle { k, marked })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Domain size `N = 2^k`.
    pub fn domain(&self) -> u64 {
        1 << self.k
    }

    /// `f(z)`.
    pub fn f(&self, z: u64) -> bool {
        self.marked.contains(&z)
    }

    /// `M`. Protocol code goes through [`f`](Self::f); this is for reporting
    /// and test oracles.
    pub fn cardinality(&self) -> usize {
        self.marked.len()
    }

    pub fn marked(&self) -> impl Iterator<Item = u64> + '_ {
        self.marked.iter().copied()
    }

    /// Parses `oracle <k>` followed by one marked `k`-bit string per line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut k = None;
        let mut marked = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let perr = |message: String| Error::Parse { line, message };
            match k {
                None => {
                    let toks: Vec<&str> = body.split_whitespace().collect();
                    if toks.len() != 2 || toks[0] != "oracle" {
                        return Err(perr("expected header `oracle <k>`".into()));
                    }
                    k = Some(toks[1].parse::<usize>().map_err(|_| perr(format!("bad k {:?}", toks[1])))?);
                }
                Some(k) => {
                    if body.len() != k {
                        return Err(perr(format!("{body:?} is not a {k}-bit string")));
                    }
                    marked.push(bits::parse(body).map_err(|e| perr(e.to_string()))?);
                }
            }
        }
        let k = k.ok_or(Error::Parse { line: 0, message: "missing header".into() })?;
        MarkedOracle::new(k, marked)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("oracle {}\n", self.k);
        for z in &self.marked {
            out.push_str(&bits::format(*z, self.k));
            out.push('\n');
        }
        out
    }
}

/// Normalized nonnegative pair `(cos t, sin t)`, held as log-magnitudes so
/// that squaring `2^k` times cannot underflow the comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaPair {
    log_c: f64,
    log_s: f64,
}

impl ThetaPair {
    pub fn new(c: f64, s: f64) -> Result<Self> {
        if c < 0.0 || s < 0.0 || !c.is_finite() || !s.is_finite() {
            return Err(invalid("pair", format!("({c}, {s}) must be finite and nonnegative")));
        }
        Self::from_logs(c.ln(), s.ln())
    }

    fn from_logs(log_c: f64, log_s: f64) -> Result<Self> {
        let top = log_c.max(log_s);
        if top == f64::NEG_INFINITY || top.is_nan() {
            return Err(Error::DegeneratePair);
        }
        // normalize: c^2 + s^2 = 1. Shift by `top` before adding the O(1)
        // correction, which would otherwise be lost against a huge `top`.
        let (lc, ls) = (log_c - top, log_s - top);
        let norm = 0.5 * ((2.0 * lc).exp() + (2.0 * ls).exp()).ln();
        Ok(ThetaPair { log_c: lc - norm, log_s: ls - norm })
    }

    pub fn c(&self) -> f64 {
        self.log_c.exp()
    }

    pub fn s(&self) -> f64 {
        self.log_s.exp()
    }

    /// `ln tan t`.
    pub fn log_tan(&self) -> f64 {
        self.log_s - self.log_c
    }

    /// Within [`BALANCE_TOL`] of `t = pi/4`.
    pub fn is_balanced(&self) -> bool {
        (self.c() - self.s()).abs() <= BALANCE_TOL
    }
}

impl fmt::Display for ThetaPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.12}, {:.12})", self.c(), self.s())
    }
}

fn check_register(k: usize) -> Result<()> {
    if k + 1 > crate::statevec::MAX_QUBITS {
        return Err(Error::QubitCeiling { n: k + 1, limit: crate::statevec::MAX_QUBITS });
    }
    Ok(())
}

/// Runs `sum_z |z>|f(z)>` and post-selects the flag on 1. Returns the
/// resulting distribution over the `2^k` strings.
pub fn grover_one_call(oracle: &MarkedOracle) -> Result<Vec<f64>> {
    let k = oracle.k;
    check_register(k)?;
    let mut state = StateVector::zero_state(k + 1)?;
    for q in 0..k {
        state.apply_h(q)?;
    }
    state.apply_xor_oracle(k, |z| oracle.f(z & ((1 << k) - 1)))?;
    let (post, _) = state.postselect(&PostSelection::new(vec![k], vec![true])?)?;
    Ok(post.probabilities())
}

/// Phase kickback with post-selection onto `|s>`: from `|s>|+>`, apply
/// `(-1)^{f(z) * flag}`, project the register onto `|s>` (Hadamards then
/// select all zeros), and Hadamard the flag.
fn phase_overlap<F: Fn(u64) -> bool + Sync>(k: usize, f: F) -> Result<ThetaPair> {
    check_register(k)?;
    let mut state = StateVector::uniform_state(k + 1)?;
    let flag = 1u64 << k;
    state.apply_sign_flip(|z| z & flag != 0 && f(z & (flag - 1)));
    for q in 0..k {
        state.apply_h(q)?;
    }
    let (mut reduced, _) = state.postselect(&PostSelection::zeros((0..k).collect())?)?;
    reduced.apply_h(0)?;
    let (a0, a1) = (reduced.amplitude(0)?, reduced.amplitude(1)?);
    if a0.im.abs() > 1e-12 || a1.im.abs() > 1e-12 || a0.re < -1e-12 || a1.re < -1e-12 {
        return Err(invalid("pair", format!("unexpected amplitudes ({a0}, {a1})")));
    }
    ThetaPair::new(a0.re.max(0.0), a1.re.max(0.0))
}

/// The flag state `cos t |0> + sin t |1>` with `tan t = M / (N - M)`.
pub fn phase_overlap_state(oracle: &MarkedOracle) -> Result<ThetaPair> {
    phase_overlap(oracle.k, |z| oracle.f(z))
}

/// One squaring step on the state vector: two copies, CNOT, post-select the
/// target on 0. This is the projection onto `span{|00>, |11>}` followed by
/// CNOT and discarding the second qubit.
pub fn squaring_step(pair: &ThetaPair) -> Result<ThetaPair> {
    let (c, s) = (Complex64::new(pair.c(), 0.0), Complex64::new(pair.s(), 0.0));
    let mut two = StateVector::from_amplitudes(vec![c, s])?;
    two.push_qubit(c, s)?;
    two.apply_cnot(0, 1)?;
    let (one, _) = two.postselect(&PostSelection::zeros(vec![1])?)?;
    ThetaPair::new(one.amplitude(0)?.re, one.amplitude(1)?.re)
}

/// `(c^{2^k}, s^{2^k})` renormalized. The first step is executed on the
/// state vector and checked against the analytic square; the remaining
/// steps are analytic.
pub fn amplify(pair: &ThetaPair, steps: u32) -> Result<ThetaPair> {
    if steps == 0 {
        return Ok(*pair);
    }
    let analytic = ThetaPair::from_logs(2.0 * pair.log_c, 2.0 * pair.log_s)?;
    // the circuit step is only meaningful while both amplitudes are representable
    if pair.c() > 1e-150 && pair.s() > 1e-150 {
        let circuit = squaring_step(pair)?;
        let dev = (circuit.c() - analytic.c()).abs().max((circuit.s() - analytic.s()).abs());
        if dev > 1e-10 {
            return Err(invalid("amplify", format!("circuit squaring deviates by {dev:.3e}")));
        }
    }
    let factor = 2f64.powi(steps as i32);
    ThetaPair::from_logs(factor * pair.log_c, factor * pair.log_s)
}

/// Result of comparing a count against a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Threshold {
    Greater,
    LessOrEqual,
    EqualBoundary,
}

fn squarings_for(domain: u64) -> u32 {
    64 - (domain - 1).leading_zeros() + EXTRA_SQUARINGS
}

fn decide(pair: &ThetaPair, domain: u64) -> Result<Threshold> {
    let amplified = amplify(pair, squarings_for(domain))?;
    Ok(if amplified.is_balanced() {
        Threshold::EqualBoundary
    } else if amplified.log_tan() > 0.0 {
        Threshold::Greater
    } else {
        Threshold::LessOrEqual
    })
}

/// Three-way comparison of `M` with `N/2`: `Greater` when `M > N/2`,
/// `EqualBoundary` when `M = N/2`, `LessOrEqual` otherwise.
pub fn majority_test(oracle: &MarkedOracle) -> Result<Threshold> {
    decide(&phase_overlap_state(oracle)?, oracle.domain())
}

/// Decides `M > T` using only `f`.
///
/// The register grows by two bits: a duplication bit `d` and a half bit `h`.
/// On `h = 0` the padded oracle is `f(z)` for both values of `d`, so the
/// original marks count twice. On `h = 1` it marks the first `2N - 2T - 1`
/// addresses. The padded count `2M + 2N - 2T - 1` exceeds half of `4N`
/// exactly when `M > T`, and being odd it can never sit on the boundary.
pub fn threshold_test(oracle: &MarkedOracle, t: u64) -> Result<Threshold> {
    let n = oracle.domain();
    if t >= n {
        return Err(invalid("T", format!("{t} not in 0..{n}")));
    }
    let k = oracle.k;
    let low = (1u64 << k) - 1;
    let synthetic = 2 * n - 2 * t - 1;
    let padded = |z: u64| {
        let d = (z >> k) & 1;
        if (z >> (k + 1)) & 1 == 0 {
            oracle.f(z & low)
        } else {
            (z & low) | (d << k) < synthetic
        }
    };
    let outcome = decide(&phase_overlap(k + 2, padded)?, 4 * n)?;
    match outcome {
        // cannot happen for integer M; report the conservative side
        Threshold::EqualBoundary => Ok(Threshold::LessOrEqual),
        other => Ok(other),
    }
}

/// Recovers `M` by binary search over thresholds, `O(log N)` calls.
pub fn count_marked(oracle: &MarkedOracle) -> Result<u64> {
    let (mut lo, mut hi) = (0u64, oracle.domain());
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match threshold_test(oracle, mid)? {
            Threshold::Greater => lo = mid + 1,
            _ => hi = mid,
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn oracle(k: usize, marked: &[u64]) -> MarkedOracle {
        MarkedOracle::new(k, marked.iter().copied()).unwrap()
    }

    #[test]
    fn grover_examples() {
        let point = grover_one_call(&oracle(3, &[0b101])).unwrap();
        assert!((point[0b101] - 1.0).abs() < 1e-12);
        let all = grover_one_call(&oracle(3, &(0..8).collect::<Vec<_>>())).unwrap();
        assert!(all.iter().all(|p| (p - 0.125).abs() < 1e-12));
        assert!(matches!(grover_one_call(&oracle(3, &[])), Err(Error::PostSelectionImpossible(_))));
    }

    #[test]
    fn theta_pair_examples() {
        let none = phase_overlap_state(&oracle(3, &[])).unwrap();
        assert!((none.c() - 1.0).abs() < 1e-12 && none.s() < 1e-12);
        let half = phase_overlap_state(&oracle(2, &[0, 3])).unwrap();
        assert!((half.c() - FRAC_PI_4.cos()).abs() < 1e-12);
        assert!((half.s() - FRAC_PI_4.sin()).abs() < 1e-12);
        let three = phase_overlap_state(&oracle(4, &[1, 6, 9])).unwrap();
        assert!((three.s() / three.c() - 3.0 / 13.0).abs() < 1e-10);
        let full = phase_overlap_state(&oracle(2, &[0, 1, 2, 3])).unwrap();
        assert!(full.c() < 1e-12 && (full.s() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn amplify_examples() {
        let balanced = ThetaPair::new(1.0, 1.0).unwrap();
        for k in [1, 5, 30] {
            let a = amplify(&balanced, k).unwrap();
            assert!((a.c() - balanced.c()).abs() < 1e-12);
        }
        let lean = ThetaPair::new(0.8, 0.6).unwrap();
        let a = amplify(&lean, 10).unwrap();
        assert!((a.c() - 1.0).abs() < 1e-6 && a.s() < 1e-6);
        let step = squaring_step(&ThetaPair::new(0.31, 0.7).unwrap()).unwrap();
        let norm = (0.31f64.powi(4) + 0.7f64.powi(4)).sqrt();
        assert!((step.c() - 0.31 * 0.31 / norm).abs() < 1e-10);
        assert!((step.s() - 0.7 * 0.7 / norm).abs() < 1e-10);
        assert!(matches!(ThetaPair::new(0.0, 0.0), Err(Error::DegeneratePair)));
    }

    #[test]
    fn amplify_log_tan_scales() {
        let pair = phase_overlap_state(&oracle(5, &[1, 2, 3, 4, 5, 6, 7])).unwrap();
        let want = (7.0f64 / 25.0).ln() * 2f64.powi(12);
        let got = amplify(&pair, 12).unwrap().log_tan();
        assert!(((got - want) / want).abs() < 1e-8);
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(threshold_test(&oracle(3, &[]), 0).unwrap(), Threshold::LessOrEqual);
        assert_eq!(threshold_test(&oracle(3, &[0, 1, 2, 3, 4]), 4).unwrap(), Threshold::Greater);
        assert_eq!(threshold_test(&oracle(3, &[0, 2, 5, 7]), 4).unwrap(), Threshold::LessOrEqual);
        assert!(threshold_test(&oracle(3, &[]), 8).is_err());
    }

    #[test]
    fn majority_detects_boundary() {
        assert_eq!(majority_test(&oracle(3, &[0, 1, 2, 3])).unwrap(), Threshold::EqualBoundary);
        assert_eq!(majority_test(&oracle(3, &[0, 1, 2, 3, 4])).unwrap(), Threshold::Greater);
        assert_eq!(majority_test(&oracle(3, &[0, 1, 2])).unwrap(), Threshold::LessOrEqual);
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_marked(&oracle(4, &[])).unwrap(), 0);
        assert_eq!(count_marked(&oracle(3, &(0..8).collect::<Vec<_>>())).unwrap(), 8);
        assert_eq!(count_marked(&oracle(4, &[3, 9, 10])).unwrap(), 3);
    }

    #[test]
    fn oracle_file_format() {
        let o = MarkedOracle::parse("oracle 3\n101\n# comment\n000\n").unwrap();
        assert_eq!(o.cardinality(), 2);
        assert!(o.f(bits::parse("101").unwrap()));
        assert_eq!(MarkedOracle::parse(&o.to_text()).unwrap(), o);
        assert!(MarkedOracle::parse("oracle 3\n10\n").is_err());
        assert!(MarkedOracle::parse("3\n").is_err());
    }
}
