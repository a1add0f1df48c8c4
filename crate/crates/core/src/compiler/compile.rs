use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::circuit::{Circuit, Gate};
use super::gadget::{diagonal_phases, gadget_clauses, gate_to_clauses, quarter_z_clauses, GAMMA};
use crate::bits;
use crate::csp::{Clause, CspInstance};
use crate::error::{Error, Result};
use crate::statevec::{PostSelection, StateVector, MAX_QUBITS};

/// Up to this many physical qubits the compiled form is simulated as one
/// dense state vector.
pub const DENSE_LIMIT: usize = 16;

/// A post-selected p = 1 QAOA circuit
/// `H~^{(x) n_total} e^{-i(pi/4) C} H^{(x) n_total} |0>`, post-selected on
/// `postselect`, whose outputs sit on `output_map`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledQaoa {
    n_logical: usize,
    n_total: usize,
    cost: CspInstance,
    postselect: Vec<usize>,
    output_map: Vec<usize>,
    global_phase: Complex64,
    gadgets: usize,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    n_logical: usize,
    n_total: usize,
    gamma: f64,
    postselect: Vec<usize>,
    output_map: Vec<usize>,
    global_phase: [f64; 2],
    gadgets: usize,
}

impl CompiledQaoa {
    pub fn n_logical(&self) -> usize {
        self.n_logical
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn cost(&self) -> &CspInstance {
        &self.cost
    }

    /// Physical qubits fixed to 0 after the final layer.
    pub fn postselect(&self) -> &[usize] {
        &self.postselect
    }

    pub fn output_map(&self) -> &[usize] {
        &self.output_map
    }

    pub fn global_phase(&self) -> Complex64 {
        self.global_phase
    }

    /// Number of auxiliary qubits, one per replaced Hadamard.
    pub fn gadgets(&self) -> usize {
        self.gadgets
    }

    /// Replaces the clause multiset, keeping the layout. Used to build
    /// negative controls.
    pub fn with_cost(&self, cost: CspInstance) -> Result<Self> {
        if cost.n() != self.n_total {
            return Err(Error::LengthMismatch { expected: self.n_total, got: cost.n() });
        }
        Ok(CompiledQaoa { cost, ..self.clone() })
    }

    /// Checks the structural invariants: at most two variables per clause,
    /// one auxiliary per gadget, outputs and post-selections in range.
    pub fn check_structure(&self) -> Result<()> {
        let bad = |m: String| Err(Error::MalformedCircuit(m));
        if let Some(c) = self.cost.clauses().iter().find(|c| c.arity() > 2) {
            return bad(format!("clause over {:?} has more than two variables", c.vars()));
        }
        if self.n_total != self.n_logical + self.gadgets {
            return bad(format!("{} qubits for {} wires and {} gadgets", self.n_total, self.n_logical, self.gadgets));
        }
        if self.output_map.len() != self.n_logical {
            return bad("output map length differs from wire count".into());
        }
        if self.output_map.iter().chain(&self.postselect).any(|&q| q >= self.n_total) {
            return bad("qubit index beyond n_total".into());
        }
        Ok(())
    }

    /// The clause file for the cost function.
    pub fn cost_text(&self) -> String {
        self.cost.to_text()
    }

    /// JSON sidecar with the layout and phase.
    pub fn sidecar_json(&self) -> String {
        let s = Sidecar {
            n_logical: self.n_logical,
            n_total: self.n_total,
            gamma: GAMMA,
            postselect: self.postselect.clone(),
            output_map: self.output_map.clone(),
            global_phase: [self.global_phase.re, self.global_phase.im],
            gadgets: self.gadgets,
        };
        serde_json::to_string_pretty(&s).expect("sidecar serializes")
    }

    /// Rebuilds a compiled circuit from its clause file and sidecar.
    pub fn from_parts(cost_text: &str, sidecar_json: &str) -> Result<Self> {
        let cost = CspInstance::parse(cost_text)?;
        let s: Sidecar =
            serde_json::from_str(sidecar_json).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
        if cost.n() != s.n_total {
            return Err(Error::LengthMismatch { expected: s.n_total, got: cost.n() });
        }
        let out = CompiledQaoa {
            n_logical: s.n_logical,
            n_total: s.n_total,
            cost,
            postselect: s.postselect,
            output_map: s.output_map,
            global_phase: Complex64::new(s.global_phase[0], s.global_phase[1]),
            gadgets: s.gadgets,
        };
        out.check_structure()?;
        Ok(out)
    }
}

struct Builder {
    phys: Vec<usize>,
    next: usize,
    clauses: Vec<Clause>,
    postselect: Vec<usize>,
    phase: Complex64,
}

impl Builder {
    /// Replaces a Hadamard on wire `w` by a gadget onto a fresh qubit.
    fn hadamard(&mut self, w: usize) -> Result<()> {
        let aux = self.next;
        self.next += 1;
        self.clauses.extend(gadget_clauses(aux, self.phys[w])?);
        self.postselect.push(self.phys[w]);
        self.phys[w] = aux;
        Ok(())
    }

    fn diagonal(&mut self, (clauses, phase): (Vec<Clause>, Complex64)) {
        self.clauses.extend(clauses);
        self.phase *= phase;
    }
}

/// Compiles `circuit` into the post-selected p = 1 form.
///
/// Each wire starts in `|+>` from the initial layer. A leading H is absorbed
/// there; otherwise an H is compiled first so the wire starts in `|0>`. Every
/// remaining H becomes a gadget. Each wire then receives
/// `H~^dagger = H e^{i pi/4 sigma_z} H`, which the final `H~` layer cancels.
/// Circuit post-selections carry over to the wire's final qubit.
pub fn compile(circuit: &Circuit) -> Result<CompiledQaoa> {
    let n = circuit.n();
    let mut b = Builder {
        phys: (0..n).collect(),
        next: n,
        clauses: Vec::new(),
        postselect: Vec::new(),
        phase: Complex64::new(1.0, 0.0),
    };
    let mut started = vec![false; n];
    // a wire whose first gate is diagonal needs an H to turn |+> into |0>
    fn start(b: &mut Builder, started: &mut [bool], w: usize) -> Result<()> {
        if !started[w] {
            started[w] = true;
            b.hadamard(w)?;
        }
        Ok(())
    }
    for gate in circuit.gates() {
        match *gate {
            Gate::H(w) => {
                if started[w] {
                    b.hadamard(w)?;
                } else {
                    started[w] = true;
                }
            }
            Gate::PhaseT(w) => {
                start(&mut b, &mut started, w)?;
                b.diagonal(gate_to_clauses(&Gate::PhaseT(b.phys[w]))?);
            }
            Gate::CPhase(x, y) => {
                start(&mut b, &mut started, x)?;
                start(&mut b, &mut started, y)?;
                b.diagonal(gate_to_clauses(&Gate::CPhase(b.phys[x], b.phys[y]))?);
            }
        }
    }
    for w in 0..n {
        if !started[w] {
            b.hadamard(w)?;
        }
        b.hadamard(w)?;
        b.diagonal(quarter_z_clauses(b.phys[w]));
        b.hadamard(w)?;
    }
    for &w in circuit.post() {
        b.postselect.push(b.phys[w]);
    }
    let n_total = b.next;
    if n_total > 64 {
        return Err(Error::QubitCeiling { n: n_total, limit: 64 });
    }
    let compiled = CompiledQaoa {
        n_logical: n,
        n_total,
        cost: CspInstance::new(n_total, b.clauses)?,
        postselect: b.postselect,
        output_map: b.phys,
        global_phase: b.phase,
        gadgets: n_total - n,
    };
    compiled.check_structure()?;
    Ok(compiled)
}

/// Amplitudes of the compiled form over the logical wires, post-selected,
/// renormalized and multiplied by the tracked global phase.
pub fn compiled_amplitudes(c: &CompiledQaoa) -> Result<Vec<Complex64>> {
    let (state, slots) = if c.n_total <= DENSE_LIMIT { run_dense(c)? } else { run_streamed(c)? };
    let n = c.n_logical;
    let mut out = vec![Complex64::new(0.0, 0.0); 1 << n];
    let position: Vec<Option<usize>> = c.output_map.iter().map(|q| slots.iter().position(|s| s == q)).collect();
    if slots.iter().any(|s| !c.output_map.contains(s)) {
        return Err(Error::MalformedCircuit("a qubit is neither an output nor post-selected".into()));
    }
    for (y, a) in state.amplitudes().iter().enumerate() {
        let z = position.iter().enumerate().fold(0usize, |acc, (w, p)| acc | p.map_or(0, |p| ((y >> p) & 1) << w));
        out[z] = *a * c.global_phase;
    }
    Ok(out)
}

/// Post-selected output distribution over the logical wires. Qubits that are
/// neither outputs nor post-selected are marginalized.
pub fn simulate_compiled(c: &CompiledQaoa) -> Result<Vec<f64>> {
    let (state, slots) = if c.n_total <= DENSE_LIMIT { run_dense(c)? } else { run_streamed(c)? };
    let position: Vec<Option<usize>> = c.output_map.iter().map(|q| slots.iter().position(|s| s == q)).collect();
    let mut out = vec![0.0; 1 << c.n_logical];
    for (y, p) in state.probabilities().into_iter().enumerate() {
        let z =
            position.iter().enumerate().fold(0usize, |acc, (w, pos)| acc | pos.map_or(0, |pos| ((y >> pos) & 1) << w));
        out[z] += p;
    }
    Ok(out)
}

/// The full three-layer form on `n_total` qubits. Returns the post-selected
/// state and the physical qubit at each remaining position.
pub fn run_dense(c: &CompiledQaoa) -> Result<(StateVector, Vec<usize>)> {
    let mut state = StateVector::uniform_state(c.n_total)?;
    state.apply_cost_phase(&c.cost, GAMMA)?;
    for q in 0..c.n_total {
        state.apply_h_tilde(q)?;
    }
    let slots = (0..c.n_total).filter(|q| !c.postselect.contains(q)).collect();
    if c.postselect.is_empty() {
        return Ok((state, slots));
    }
    let (reduced, _) = state.postselect(&PostSelection::zeros(c.postselect.clone())?)?;
    Ok((reduced, slots))
}

/// The same form evaluated qubit by qubit. A qubit enters in `|+>` just
/// before its first clause; a post-selected qubit receives `H~` and is
/// projected right after its last clause. This is exact because the cost
/// layer is diagonal, and keeps the live register small for compiled
/// circuits whose wires hop across many auxiliaries.
pub fn run_streamed(c: &CompiledQaoa) -> Result<(StateVector, Vec<usize>)> {
    let clauses = c.cost.clauses();
    let mut last_use = vec![None; c.n_total];
    for (i, cl) in clauses.iter().enumerate() {
        for &v in cl.vars() {
            last_use[v] = Some(i);
        }
    }
    let mut selected = vec![false; c.n_total];
    for &q in &c.postselect {
        selected[q] = true;
    }
    let plus = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let mut state = StateVector::from_amplitudes(vec![Complex64::new(1.0, 0.0)])?;
    let mut slots: Vec<usize> = Vec::new();
    let mut i = 0;
    while i < clauses.len() {
        // consecutive clauses on the same variables form one diagonal
        let mut j = i + 1;
        while j < clauses.len() && clauses[j].vars() == clauses[i].vars() {
            j += 1;
        }
        let vars = clauses[i].vars();
        for &v in vars {
            if !slots.contains(&v) {
                if slots.len() >= MAX_QUBITS {
                    return Err(Error::QubitCeiling { n: slots.len() + 1, limit: MAX_QUBITS });
                }
                state.push_qubit(plus, plus)?;
                slots.push(v);
            }
        }
        let positions: Vec<usize> = vars.iter().map(|v| slots.iter().position(|s| s == v).unwrap()).collect();
        state.apply_diagonal(&positions, &diagonal_phases(&clauses[i..j], vars)?)?;
        for &v in vars {
            if selected[v] && last_use[v].is_some_and(|l| l < j) {
                let p = slots.iter().position(|&s| s == v).unwrap();
                state.apply_h_tilde(p)?;
                state = state.postselect(&PostSelection::zeros(vec![p])?)?.0;
                slots.remove(p);
            }
        }
        i = j;
    }
    for q in 0..c.n_total {
        if last_use[q].is_none() {
            state.push_qubit(plus, plus)?;
            slots.push(q);
            if selected[q] {
                let p = slots.len() - 1;
                state.apply_h_tilde(p)?;
                state = state.postselect(&PostSelection::zeros(vec![p])?)?.0;
                slots.pop();
            }
        }
    }
    for p in 0..slots.len() {
        if selected[slots[p]] {
            continue;
        }
        state.apply_h_tilde(p)?;
    }
    Ok((state, slots))
}

/// Comparison of a circuit with its compiled form.
#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub n_logical: usize,
    pub n_total: usize,
    pub gadgets: usize,
    pub tolerance: f64,
    /// `max_z |q_circuit(z) - q_compiled(z)|`.
    pub max_deviation: f64,
    pub tv_distance: f64,
    /// Max amplitude deviation after aligning the best single global phase.
    pub amplitude_deviation: f64,
    /// Max amplitude deviation using the tracked global phase as is.
    pub tracked_phase_deviation: f64,
    pub passed: bool,
}

/// Compares `simulate_circuit` with the compiled form at the level of
/// distributions and amplitudes.
pub fn verify_equivalence(circuit: &Circuit, compiled: &CompiledQaoa, tolerance: f64) -> Result<EquivalenceReport> {
    if compiled.n_logical != circuit.n() {
        return Err(Error::LengthMismatch { expected: circuit.n(), got: compiled.n_logical });
    }
    let direct = circuit.amplitudes()?;
    let via = compiled_amplitudes(compiled)?;
    let p: Vec<f64> = direct.iter().map(|a| a.norm_sqr()).collect();
    let q = simulate_compiled(compiled)?;
    let max_deviation = p.iter().zip(&q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let tv_distance = bits::tv_distance(&p, &q);
    let overlap: Complex64 = via.iter().zip(&direct).map(|(v, d)| v.conj() * d).sum();
    let align = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { Complex64::new(1.0, 0.0) };
    let dev = |rot: Complex64| direct.iter().zip(&via).map(|(d, v)| (d - rot * v).norm()).fold(0.0, f64::max);
    let amplitude_deviation = dev(align);
    let tracked_phase_deviation = dev(Complex64::new(1.0, 0.0));
    Ok(EquivalenceReport {
        n_logical: circuit.n(),
        n_total: compiled.n_total,
        gadgets: compiled.gadgets,
        tolerance,
        max_deviation,
        tv_distance,
        amplitude_deviation,
        tracked_phase_deviation,
        passed: max_deviation <= tolerance && tv_distance <= tolerance && amplitude_deviation <= tolerance,
    })
}
