//! Dense state-vector simulation.
//!
//! Basis index `z` has qubit 0 in the least significant bit, matching the
//! bit-string convention in [`crate::bits`].

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::csp::CspInstance;
use crate::error::{invalid, Error, Result};

/// Default qubit ceiling for dense simulation.
pub const MAX_QUBITS: usize = 24;

/// Probability mass below which a post-selection is treated as impossible.
pub const POSTSELECT_FLOOR: f64 = 1e-300;

const UNITARY_TOL: f64 = 1e-12;
const PHASE_TOL: f64 = 1e-12;
const PAR_THRESHOLD: usize = 1 << 14;

pub type Matrix2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Hadamard.
pub fn hadamard() -> Matrix2 {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

/// `exp(-i theta sigma_x)`.
pub fn rx_exp(theta: f64) -> Matrix2 {
    let c = Complex64::new(theta.cos(), 0.0);
    let s = Complex64::new(0.0, -theta.sin());
    [[c, s], [s, c]]
}

/// `H~ = exp(-i pi/4 sigma_x)`, the QAOA mixer layer at `beta = pi/4`.
pub fn h_tilde() -> Matrix2 {
    rx_exp(std::f64::consts::FRAC_PI_4)
}

/// `exp(i theta sigma_z)`.
pub fn rz_exp(theta: f64) -> Matrix2 {
    [[Complex64::from_polar(1.0, theta), ZERO], [ZERO, Complex64::from_polar(1.0, -theta)]]
}

pub fn matmul2(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn unitarity_defect(u: &Matrix2) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let dot = u[0][i].conj() * u[0][j] + u[1][i].conj() * u[1][j];
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((dot - target).norm());
        }
    }
    worst
}

fn ensure_distinct(qubits: &[usize]) -> Result<()> {
    match qubits.iter().enumerate().find(|(i, q)| qubits[..*i].contains(q)) {
        Some((_, q)) => Err(invalid("qubits", format!("qubit {q} listed twice"))),
        None => Ok(()),
    }
}

/// Qubits to condition on and their required values.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PostSelection {
    qubits: Vec<usize>,
    targets: Vec<bool>,
}

impl PostSelection {
    pub fn new(qubits: Vec<usize>, targets: Vec<bool>) -> Result<Self> {
        if qubits.len() != targets.len() {
            return Err(Error::LengthMismatch { expected: qubits.len(), got: targets.len() });
        }
        ensure_distinct(&qubits)?;
        Ok(PostSelection { qubits, targets })
    }

    /// Selects every listed qubit onto `|0>`.
    pub fn zeros(qubits: Vec<usize>) -> Result<Self> {
        let targets = vec![false; qubits.len()];
        PostSelection::new(qubits, targets)
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn targets(&self) -> &[bool] {
        &self.targets
    }

    pub fn is_empty(&self) -> bool {
        self.qubits.is_empty()
    }

    fn masks(&self) -> (u64, u64) {
        self.qubits.iter().zip(&self.targets).fold((0, 0), |(m, v), (&q, &t)| (m | 1 << q, v | (t as u64) << q))
    }
}

/// Normalized pure state on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    fn check_ceiling(n: usize) -> Result<()> {
        if n > MAX_QUBITS {
            Err(Error::QubitCeiling { n, limit: MAX_QUBITS })
        } else {
            Ok(())
        }
    }

    /// `|z>` on `n` qubits.
    pub fn basis_state(n: usize, z: u64) -> Result<Self> {
        Self::check_ceiling(n)?;
        if z >> n != 0 {
            return Err(Error::IndexOutOfRange { index: z as usize, len: 1 << n });
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[z as usize] = ONE;
        Ok(StateVector { n, amps })
    }

    /// `|0^n>`.
    pub fn zero_state(n: usize) -> Result<Self> {
        Self::basis_state(n, 0)
    }

    /// `|s> = 2^{-n/2} sum_z |z>`.
    pub fn uniform_state(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "need at least one qubit"));
        }
        Self::check_ceiling(n)?;
        let a = Complex64::new((0.5f64).powf(n as f64 / 2.0), 0.0);
        Ok(StateVector { n, amps: vec![a; 1 << n] })
    }

    /// Wraps raw amplitudes; the length must be a power of two and the norm 1
    /// within `1e-10`.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(invalid("amplitudes", format!("length {len} is not a power of two")));
        }
        let n = len.trailing_zeros() as usize;
        Self::check_ceiling(n)?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(invalid("amplitudes", format!("norm {norm} is not 1")));
        }
        Ok(StateVector { n, amps })
    }

    /// Normalizes and wraps raw amplitudes.
    pub fn normalized(mut amps: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(invalid("amplitudes", "zero vector"));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(amps)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn amplitude(&self, z: u64) -> Result<Complex64> {
        self.amps.get(z as usize).copied().ok_or(Error::IndexOutOfRange { index: z as usize, len: self.amps.len() })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `|amp(z)|^2` for every basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            Err(Error::IndexOutOfRange { index: q, len: self.n })
        } else {
            Ok(())
        }
    }

    /// Applies a 2x2 unitary to `qubit`.
    pub fn apply_single_qubit(&mut self, qubit: usize, u: &Matrix2) -> Result<()> {
        self.check_qubit(qubit)?;
        let defect = unitarity_defect(u);
        if defect > UNITARY_TOL {
            return Err(Error::NonUnitary(defect));
        }
        let u = *u;
        let half = 1usize << qubit;
        let kernel = move |block: &mut [Complex64]| {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = u[0][0] * x + u[0][1] * y;
                *b = u[1][0] * x + u[1][1] * y;
            }
        };
        if self.amps.len() >= PAR_THRESHOLD && half < self.amps.len() / 2 {
            self.amps.par_chunks_mut(2 * half).for_each(kernel);
        } else {
            self.amps.chunks_mut(2 * half).for_each(kernel);
        }
        Ok(())
    }

    pub fn apply_h(&mut self, qubit: usize) -> Result<()> {
        self.apply_single_qubit(qubit, &hadamard())
    }

    pub fn apply_h_tilde(&mut self, qubit: usize) -> Result<()> {
        self.apply_single_qubit(qubit, &h_tilde())
    }

    /// Multiplies `amp(z)` by `exp(-i gamma C(z))`.
    pub fn apply_cost_phase(&mut self, instance: &CspInstance, gamma: f64) -> Result<()> {
        if instance.n() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: instance.n() });
        }
        self.amps.par_iter_mut().enumerate().for_each(|(z, a)| {
            *a *= Complex64::from_polar(1.0, -gamma * instance.cost_of(z as u64) as f64);
        });
        Ok(())
    }

    /// Same as [`apply_cost_phase`](Self::apply_cost_phase) with precomputed
    /// costs.
    pub fn apply_cost_phase_table(&mut self, costs: &[u32], gamma: f64) -> Result<()> {
        if costs.len() != self.amps.len() {
            return Err(Error::LengthMismatch { expected: self.amps.len(), got: costs.len() });
        }
        // one phase per distinct cost keeps the diagonal exactly norm preserving
        let max = costs.iter().copied().max().unwrap_or(0) as usize;
        let phases: Vec<Complex64> = (0..=max).map(|c| Complex64::from_polar(1.0, -gamma * c as f64)).collect();
        self.amps.par_iter_mut().zip(costs.par_iter()).for_each(|(a, &c)| *a *= phases[c as usize]);
        Ok(())
    }

    /// `exp(-i beta B)` with `B = sum_i sigma_x^(i)`, applied as a product of
    /// single-qubit rotations.
    pub fn apply_mixer(&mut self, beta: f64) -> Result<()> {
        let u = rx_exp(beta);
        for q in 0..self.n {
            self.apply_single_qubit(q, &u)?;
        }
        Ok(())
    }

    /// Multiplies each amplitude by `phases[p]`, where `p` is its restriction
    /// to `qubits` (bit `i` of `p` is the value of `qubits[i]`).
    pub fn apply_diagonal(&mut self, qubits: &[usize], phases: &[Complex64]) -> Result<()> {
        for &q in qubits {
            self.check_qubit(q)?;
        }
        ensure_distinct(qubits)?;
        if phases.len() != 1 << qubits.len() {
            return Err(Error::LengthMismatch { expected: 1 << qubits.len(), got: phases.len() });
        }
        if let Some((index, p)) = phases.iter().enumerate().find(|(_, p)| (p.norm() - 1.0).abs() > PHASE_TOL) {
            return Err(Error::NonUnitPhase { index, modulus: p.norm() });
        }
        self.amps.par_iter_mut().enumerate().for_each(|(z, a)| {
            let p = qubits.iter().enumerate().fold(0usize, |acc, (i, &q)| acc | ((z >> q) & 1) << i);
            *a *= phases[p];
        });
        Ok(())
    }

    /// Multiplies `amp(z)` by `-1` wherever `predicate(z)` holds.
    pub fn apply_sign_flip<F>(&mut self, predicate: F)
    where
        F: Fn(u64) -> bool + Sync,
    {
        self.amps.par_iter_mut().enumerate().for_each(|(z, a)| {
            if predicate(z as u64) {
                *a = -*a;
            }
        });
    }

    /// XORs `predicate` of the other qubits into `target`: the reversible
    /// classical oracle `|x>|t> -> |x>|t xor f(x)>`.
    pub fn apply_xor_oracle<F>(&mut self, target: usize, predicate: F) -> Result<()>
    where
        F: Fn(u64) -> bool,
    {
        self.check_qubit(target)?;
        let bit = 1usize << target;
        for z in 0..self.amps.len() {
            if z & bit == 0 && predicate(z as u64) {
                self.amps.swap(z, z | bit);
            }
        }
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        if control == target {
            return Err(invalid("target", "control and target coincide"));
        }
        self.apply_xor_oracle(target, |z| (z >> control) & 1 == 1)
    }

    /// Appends a new highest qubit in the normalized state `(a0, a1)`.
    pub fn push_qubit(&mut self, a0: Complex64, a1: Complex64) -> Result<()> {
        Self::check_ceiling(self.n + 1)?;
        let norm = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(invalid("qubit", format!("norm {norm} is not 1")));
        }
        let low: Vec<Complex64> = self.amps.iter().map(|a| a * a0).collect();
        let high: Vec<Complex64> = self.amps.iter().map(|a| a * a1).collect();
        self.amps = low;
        self.amps.extend(high);
        self.n += 1;
        Ok(())
    }

    /// Projects onto `sel`, renormalizes, and returns the state on the
    /// remaining qubits (in increasing original order) together with the
    /// probability of the selected outcome.
    pub fn postselect(&self, sel: &PostSelection) -> Result<(StateVector, f64)> {
        for &q in sel.qubits() {
            self.check_qubit(q)?;
        }
        let (mask, value) = sel.masks();
        let free: Vec<usize> = (0..self.n).filter(|q| mask >> q & 1 == 0).collect();
        let expand = |r: usize| -> usize {
            free.iter().enumerate().fold(value as usize, |acc, (i, &q)| acc | ((r >> i) & 1) << q)
        };
        let mut reduced: Vec<Complex64> = (0..1usize << free.len()).map(|r| self.amps[expand(r)]).collect();
        let prob: f64 = reduced.iter().map(|a| a.norm_sqr()).sum();
        if prob < POSTSELECT_FLOOR {
            return Err(Error::PostSelectionImpossible(prob));
        }
        let scale = prob.sqrt();
        reduced.iter_mut().for_each(|a| *a /= scale);
        Ok((StateVector { n: free.len(), amps: reduced }, prob))
    }

    /// Draws `shots` i.i.d. outcomes from `|amp(z)|^2`; the sequence is a
    /// pure function of `seed`.
    pub fn sample(&self, shots: usize, seed: u64) -> Result<Vec<u64>> {
        if shots == 0 {
            return Err(invalid("shots", "must be at least 1"));
        }
        let dist =
            WeightedIndex::new(self.probabilities()).map_err(|e| invalid("state", format!("cannot sample: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..shots).map(|_| dist.sample(&mut rng) as u64).collect())
    }

    /// `sum_z |amp(z)|^2 C(z)`.
    pub fn expectation_cost(&self, instance: &CspInstance) -> Result<f64> {
        if instance.n() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: instance.n() });
        }
        // sequential so the summation order, and the result, never vary
        Ok(self.amps.iter().enumerate().map(|(z, a)| a.norm_sqr() * instance.cost_of(z as u64) as f64).sum())
    }

    pub fn expectation_cost_table(&self, costs: &[u32]) -> Result<f64> {
        if costs.len() != self.amps.len() {
            return Err(Error::LengthMismatch { expected: self.amps.len(), got: costs.len() });
        }
        Ok(self.amps.iter().zip(costs).map(|(a, &c)| a.norm_sqr() * c as f64).sum())
    }

    /// Debug dump: one `index,re,im` row per amplitude.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,re,im\n");
        for (z, a) in self.amps.iter().enumerate() {
            let _ = writeln!(out, "{z},{:.17e},{:.17e}", a.re, a.im);
        }
        out
    }
}

/// `<a|b>`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    if a.n != b.n {
        return Err(Error::LengthMismatch { expected: a.n, got: b.n });
    }
    Ok(a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::{Clause, CspInstance};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    fn random_state(n: usize, seed: u64) -> StateVector {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps =
            (0..1 << n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        StateVector::normalized(amps).unwrap()
    }

    #[test]
    fn uniform_state_examples() {
        let s1 = StateVector::uniform_state(1).unwrap();
        assert!(s1.amplitudes().iter().all(|a| close(*a, Complex64::new(FRAC_1_SQRT_2, 0.0))));
        let s2 = StateVector::uniform_state(2).unwrap();
        assert!(s2.amplitudes().iter().all(|a| close(*a, Complex64::new(0.5, 0.0))));
        for z in 0..8 {
            let b = StateVector::basis_state(3, z).unwrap();
            let ip = inner_product(&StateVector::uniform_state(3).unwrap(), &b).unwrap();
            assert!(close(ip, Complex64::new(0.125f64.sqrt(), 0.0)));
        }
        assert!(matches!(StateVector::uniform_state(25), Err(Error::QubitCeiling { .. })));
        assert!(StateVector::uniform_state(0).is_err());
    }

    #[test]
    fn single_qubit_gates() {
        let mut s = StateVector::zero_state(1).unwrap();
        s.apply_h(0).unwrap();
        assert_eq!(s, StateVector::uniform_state(1).unwrap());

        let mut t = StateVector::zero_state(1).unwrap();
        t.apply_h_tilde(0).unwrap();
        t.apply_h_tilde(0).unwrap();
        assert!(close(t.amplitude(0).unwrap(), ZERO));
        assert!(close(t.amplitude(1).unwrap(), Complex64::new(0.0, -1.0)));

        let r = random_state(4, 7);
        let mut hh = r.clone();
        for q in 0..4 {
            hh.apply_h(q).unwrap();
            hh.apply_h(q).unwrap();
        }
        assert!(r.amplitudes().iter().zip(hh.amplitudes()).all(|(a, b)| close(*a, *b)));

        let bad = [[ONE, ONE], [ZERO, ONE]];
        assert!(matches!(s.apply_single_qubit(0, &bad), Err(Error::NonUnitary(_))));
        assert!(s.apply_h(3).is_err());
    }

    #[test]
    fn cost_phase_examples() {
        let inst = CspInstance::ring(4).unwrap();
        let r = random_state(4, 1);
        let mut a = r.clone();
        a.apply_cost_phase(&inst, 0.0).unwrap();
        assert_eq!(a, r);
        let mut b = r.clone();
        b.apply_cost_phase(&inst, 2.0 * PI).unwrap();
        assert!(r.amplitudes().iter().zip(b.amplitudes()).all(|(x, y)| (x - y).norm() < 1e-12));

        let single = CspInstance::new(1, vec![Clause::fixed(0, true)]).unwrap();
        let mut plus = StateVector::uniform_state(1).unwrap();
        plus.apply_cost_phase(&single, FRAC_PI_4).unwrap();
        assert!(close(plus.amplitude(0).unwrap(), Complex64::new(FRAC_1_SQRT_2, 0.0)));
        assert!(close(plus.amplitude(1).unwrap(), Complex64::from_polar(FRAC_1_SQRT_2, -FRAC_PI_4)));
    }

    #[test]
    fn cost_phase_table_matches_direct() {
        let inst = CspInstance::ring(5).unwrap();
        let table = inst.cost_table().unwrap();
        let mut a = random_state(5, 3);
        let mut b = a.clone();
        a.apply_cost_phase(&inst, 0.37).unwrap();
        b.apply_cost_phase_table(&table, 0.37).unwrap();
        assert!(a.amplitudes().iter().zip(b.amplitudes()).all(|(x, y)| (x - y).norm() < 1e-14));
    }

    #[test]
    fn mixer_full_flip() {
        for n in 1..=4 {
            let mut s = StateVector::zero_state(n).unwrap();
            s.apply_mixer(FRAC_PI_2).unwrap();
            let expected = Complex64::new(0.0, -1.0).powu(n as u32);
            assert!(close(s.amplitude((1 << n) - 1).unwrap(), expected));
            let mut id = random_state(n, 11);
            let before = id.clone();
            id.apply_mixer(0.0).unwrap();
            assert_eq!(id, before);
        }
    }

    #[test]
    fn diagonal_gate_examples() {
        let i = Complex64::new(0.0, 1.0);
        let phases = [ONE, i, ONE, -i];
        let mut s = StateVector::basis_state(2, 3).unwrap();
        s.apply_diagonal(&[0, 1], &phases).unwrap();
        assert!(close(s.amplitude(3).unwrap(), -i));
        let r = random_state(3, 5);
        let mut same = r.clone();
        same.apply_diagonal(&[2, 0], &[ONE; 4]).unwrap();
        assert_eq!(same, r);
        assert!(matches!(
            same.apply_diagonal(&[0], &[ONE, Complex64::new(2.0, 0.0)]),
            Err(Error::NonUnitPhase { index: 1, .. })
        ));
        assert!(same.apply_diagonal(&[0, 0], &[ONE; 4]).is_err());
    }

    #[test]
    fn postselect_examples() {
        let bell = StateVector::normalized(vec![ONE, ZERO, ZERO, ONE]).unwrap();
        let sel = PostSelection::new(vec![1], vec![false]).unwrap();
        let (rest, p) = bell.postselect(&sel).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert_eq!(rest.n(), 1);
        assert!(close(rest.amplitude(0).unwrap(), ONE));

        let b = StateVector::basis_state(3, 0b101).unwrap();
        let own = PostSelection::new(vec![0, 1, 2], vec![true, false, true]).unwrap();
        assert!((b.postselect(&own).unwrap().1 - 1.0).abs() < 1e-15);

        let zero = StateVector::zero_state(1).unwrap();
        let one = PostSelection::new(vec![0], vec![true]).unwrap();
        assert!(matches!(zero.postselect(&one), Err(Error::PostSelectionImpossible(_))));
        assert!(PostSelection::new(vec![0, 0], vec![false, false]).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_exact_on_basis_states() {
        let b = StateVector::basis_state(3, 6).unwrap();
        assert!(b.sample(100, 1).unwrap().iter().all(|&z| z == 6));
        let r = random_state(3, 9);
        assert_eq!(r.sample(1000, 42).unwrap(), r.sample(1000, 42).unwrap());
        assert!(r.sample(0, 1).is_err());
    }

    #[test]
    fn expectation_examples() {
        let edge = CspInstance::maxcut(2, &[(0, 1)]).unwrap();
        let s = StateVector::uniform_state(2).unwrap();
        assert!((s.expectation_cost(&edge).unwrap() - 0.5).abs() < 1e-15);
        let tri = CspInstance::maxcut(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let z = crate::bits::parse("011").unwrap();
        let basis = StateVector::basis_state(3, z).unwrap();
        assert_eq!(basis.expectation_cost(&tri).unwrap(), tri.cost(z).unwrap() as f64);
        let u = StateVector::uniform_state(3).unwrap();
        assert!((u.expectation_cost(&tri).unwrap() - 1.5).abs() < 1e-14);
    }

    #[test]
    fn push_qubit_and_csv() {
        let mut s = StateVector::zero_state(1).unwrap();
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        s.push_qubit(h, h).unwrap();
        assert_eq!(s.n(), 2);
        assert!(close(s.amplitude(2).unwrap(), h));
        assert!(s.to_csv().starts_with("index,re,im\n0,"));
    }
}
