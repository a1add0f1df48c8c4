use std::f64::consts::FRAC_PI_8;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::statevec::{hadamard, PostSelection, StateVector, MAX_QUBITS};

/// Post-selection probabilities below this are treated as exact zeros left
/// over from rounding, e.g. the `|0>` amplitude of `H T^4 H |0>`.
pub const POSTSELECT_MIN: f64 = 1e-20;

/// A gate from the universal set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    H(usize),
    /// `e^{i pi/8 sigma_z}`.
    PhaseT(usize),
    /// `e^{-i pi/4 (I - sigma_z)(I - sigma_z)}`, i.e. controlled-Z.
    CPhase(usize, usize),
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::PhaseT(q) => vec![q],
            Gate::CPhase(a, b) => vec![a, b],
        }
    }

    pub fn is_diagonal(&self) -> bool {
        !matches!(self, Gate::H(_))
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::H(q) => write!(f, "h {q}"),
            Gate::PhaseT(q) => write!(f, "t {q}"),
            Gate::CPhase(a, b) => write!(f, "cp {a} {b}"),
        }
    }
}

/// A circuit on `n` qubits starting from `|0^n>`, optionally ending with
/// post-selection of some qubits on 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
    post: Vec<usize>,
}

impl Circuit {
    pub fn new(n: usize, gates: Vec<Gate>) -> Result<Self> {
        Self::with_postselection(n, gates, Vec::new())
    }

    pub fn with_postselection(n: usize, gates: Vec<Gate>, post: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::MalformedCircuit("circuit needs at least one qubit".into()));
        }
        for g in &gates {
            let qs = g.qubits();
            if let Some(&q) = qs.iter().find(|&&q| q >= n) {
                return Err(Error::MalformedCircuit(format!("gate `{g}` uses qubit {q} of {n}")));
            }
            if qs.len() == 2 && qs[0] == qs[1] {
                return Err(Error::MalformedCircuit(format!("gate `{g}` repeats a qubit")));
            }
        }
        for (i, &q) in post.iter().enumerate() {
            if q >= n {
                return Err(Error::MalformedCircuit(format!("post-selection on qubit {q} of {n}")));
            }
            if post[..i].contains(&q) {
                return Err(Error::MalformedCircuit(format!("qubit {q} post-selected twice")));
            }
        }
        Ok(Circuit { n, gates, post })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Qubits post-selected on 0 after the last gate.
    pub fn post(&self) -> &[usize] {
        &self.post
    }

    /// Parses the `circuit <n>` text format: one of `h q`, `t q`, `cp a b` per
    /// line, then optional `post q 0` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut n = None;
        let mut gates = Vec::new();
        let mut post = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let perr = |message: String| Error::Parse { line, message };
            let toks: Vec<&str> = body.split_whitespace().collect();
            let num = |i: usize| -> Result<usize> {
                toks.get(i)
                    .ok_or_else(|| perr(format!("`{}` is missing an operand", toks[0])))?
                    .parse::<usize>()
                    .map_err(|_| perr(format!("bad qubit index {:?}", toks[i])))
            };
            let arity = |k: usize| -> Result<()> {
                if toks.len() != k + 1 {
                    return Err(perr(format!("`{}` takes {k} operand(s)", toks[0])));
                }
                Ok(())
            };
            if n.is_none() {
                if toks[0] != "circuit" {
                    return Err(perr("expected header `circuit <n>`".into()));
                }
                arity(1)?;
                n = Some(num(1)?);
                continue;
            }
            if !post.is_empty() && toks[0] != "post" {
                return Err(perr("gates may not follow post-selection lines".into()));
            }
            match toks[0] {
                "h" => {
                    arity(1)?;
                    gates.push(Gate::H(num(1)?));
                }
                "t" => {
                    arity(1)?;
                    gates.push(Gate::PhaseT(num(1)?));
                }
                "cp" => {
                    arity(2)?;
                    gates.push(Gate::CPhase(num(1)?, num(2)?));
                }
                "post" => {
                    arity(2)?;
                    if toks[2] != "0" {
                        return Err(perr(format!("post-selection target {:?}, only 0 is supported", toks[2])));
                    }
                    post.push(num(1)?);
                }
                other => return Err(perr(format!("unknown gate {other:?}"))),
            }
        }
        let n = n.ok_or(Error::Parse { line: 0, message: "missing header".into() })?;
        Circuit::with_postselection(n, gates, post)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("circuit {}\n", self.n);
        for g in &self.gates {
            out.push_str(&format!("{g}\n"));
        }
        for q in &self.post {
            out.push_str(&format!("post {q} 0\n"));
        }
        out
    }

    /// The output amplitudes over all `n` qubits, after post-selection and
    /// renormalization (post-selected bits read 0).
    pub fn amplitudes(&self) -> Result<Vec<Complex64>> {
        if self.n > MAX_QUBITS {
            return Err(Error::QubitCeiling { n: self.n, limit: MAX_QUBITS });
        }
        let mut state = StateVector::zero_state(self.n)?;
        let t = [Complex64::from_polar(1.0, FRAC_PI_8), Complex64::from_polar(1.0, -FRAC_PI_8)];
        let cz =
            [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        let h = hadamard();
        for g in &self.gates {
            match *g {
                Gate::H(q) => state.apply_single_qubit(q, &h)?,
                Gate::PhaseT(q) => state.apply_diagonal(&[q], &t)?,
                Gate::CPhase(a, b) => state.apply_diagonal(&[a, b], &cz)?,
            }
        }
        if self.post.is_empty() {
            return Ok(state.into_amplitudes());
        }
        let (_, prob) = state.postselect(&PostSelection::zeros(self.post.clone())?)?;
        if prob < POSTSELECT_MIN {
            return Err(Error::PostSelectionImpossible(prob));
        }
        let mask = self.post.iter().fold(0usize, |m, &q| m | 1 << q);
        let scale = prob.sqrt();
        Ok(state
            .into_amplitudes()
            .into_iter()
            .enumerate()
            .map(|(z, a)| if z & mask == 0 { a / scale } else { Complex64::new(0.0, 0.0) })
            .collect())
    }
}

/// Gate-by-gate output distribution over `2^n` strings.
pub fn simulate_circuit(circuit: &Circuit) -> Result<Vec<f64>> {
    Ok(circuit.amplitudes()?.iter().map(|a| a.norm_sqr()).collect())
}

/// `gates` gates drawn uniformly from `{H, PhaseT, CPhase}` on uniformly
/// random qubits. CPhase is only drawn when `n >= 2`.
pub fn random_circuit<R: Rng + ?Sized>(n: usize, gates: usize, rng: &mut R) -> Result<Circuit> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    let kinds = if n >= 2 { 3 } else { 2 };
    let list = (0..gates)
        .map(|_| match rng.random_range(0..kinds) {
            0 => Gate::H(rng.random_range(0..n)),
            1 => Gate::PhaseT(rng.random_range(0..n)),
            _ => {
                let a = rng.random_range(0..n);
                let b = (a + rng.random_range(1..n)) % n;
                Gate::CPhase(a, b)
            }
        })
        .collect();
    Circuit::new(n, list)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_circuits() {
        let empty = simulate_circuit(&Circuit::new(2, vec![]).unwrap()).unwrap();
        assert_eq!(empty, vec![1.0, 0.0, 0.0, 0.0]);
        let h = simulate_circuit(&Circuit::new(1, vec![Gate::H(0)]).unwrap()).unwrap();
        assert!((h[0] - 0.5).abs() < 1e-15 && (h[1] - 0.5).abs() < 1e-15);
        let t = simulate_circuit(&Circuit::new(1, vec![Gate::PhaseT(0)]).unwrap()).unwrap();
        assert!((t[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cphase_is_controlled_z() {
        let c = Circuit::new(2, vec![Gate::H(0), Gate::H(1), Gate::CPhase(0, 1)]).unwrap();
        let a = c.amplitudes().unwrap();
        assert!((a[3].re + 0.5).abs() < 1e-15 && (a[0].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn postselection_renormalizes() {
        let c = Circuit::with_postselection(2, vec![Gate::H(0), Gate::H(1)], vec![1]).unwrap();
        let p = simulate_circuit(&c).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        assert_eq!(p[2], 0.0);
    }

    #[test]
    fn text_round_trip() {
        let text = "circuit 3\nh 0\nt 1 # phase\ncp 0 2\npost 2 0\n";
        let c = Circuit::parse(text).unwrap();
        assert_eq!(c.gates(), &[Gate::H(0), Gate::PhaseT(1), Gate::CPhase(0, 2)]);
        assert_eq!(c.post(), &[2]);
        assert_eq!(Circuit::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn parse_rejects_bad_input() {
        for bad in [
            "h 0\n",
            "circuit 2\nx 0\n",
            "circuit 2\nh 2\n",
            "circuit 2\ncp 1 1\n",
            "circuit 2\npost 0 0\nh 1\n",
            "circuit 2\npost 0 1\n",
            "circuit 2\nh\n",
        ] {
            assert!(Circuit::parse(bad).is_err(), "{bad:?}");
        }
    }
}
