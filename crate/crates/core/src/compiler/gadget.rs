use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

use num_complex::Complex64;

use super::circuit::Gate;
use crate::csp::Clause;
use crate::error::{invalid, Error, Result};
use crate::statevec::{PostSelection, StateVector};

/// The single cost angle of the compiled form.
pub const GAMMA: f64 = FRAC_PI_4;

/// Clauses and phase with `gate = phase * e^{-i(pi/4) sum_a C_a}`.
pub fn gate_to_clauses(gate: &Gate) -> Result<(Vec<Clause>, Complex64)> {
    match *gate {
        Gate::PhaseT(q) => Ok((vec![Clause::fixed(q, true)], Complex64::from_polar(1.0, FRAC_PI_8))),
        Gate::CPhase(a, b) => {
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            let c = Clause::pattern(vec![a, b], "11")?;
            Ok((vec![c; 4], Complex64::new(1.0, 0.0)))
        }
        Gate::H(_) => Err(invalid("gate", "H has no diagonal encoding")),
    }
}

/// Clauses and phase with `e^{i pi/4 sigma_z} = phase * e^{-i(pi/4) sum_a C_a}`.
/// Together with two Hadamards this builds `H~^dagger = H e^{i pi/4 sigma_z} H`.
pub fn quarter_z_clauses(q: usize) -> (Vec<Clause>, Complex64) {
    (vec![Clause::fixed(q, true); 2], Complex64::from_polar(1.0, FRAC_PI_4))
}

/// Six copies of pattern `01` and two of pattern `11` on `(aux, j)`, giving
/// `diag(1, i, 1, -i)` with `aux` as the high-order index.
pub fn gadget_clauses(aux: usize, j: usize) -> Result<Vec<Clause>> {
    if aux == j {
        return Err(Error::SelfLoop(aux));
    }
    let mut out = vec![Clause::pattern(vec![aux, j], "01")?; 6];
    out.extend(vec![Clause::pattern(vec![aux, j], "11")?; 2]);
    Ok(out)
}

/// The diagonal of `e^{-i(pi/4) sum_a C_a}` restricted to `qubits`: entry `p`
/// has bit `i` equal to the value of `qubits[i]`. Every clause variable must
/// appear in `qubits`.
pub fn diagonal_phases(clauses: &[Clause], qubits: &[usize]) -> Result<Vec<Complex64>> {
    let mut positions = Vec::with_capacity(clauses.len());
    for c in clauses {
        let pos: Vec<usize> = c
            .vars()
            .iter()
            .map(|v| qubits.iter().position(|q| q == v).ok_or(Error::IndexOutOfRange { index: *v, len: qubits.len() }))
            .collect::<Result<_>>()?;
        positions.push(pos);
    }
    Ok((0..1usize << qubits.len())
        .map(|p| {
            let hits: usize = clauses
                .iter()
                .zip(&positions)
                .filter(|(c, pos)| {
                    let idx = pos.iter().enumerate().fold(0usize, |acc, (i, &q)| acc | ((p >> q) & 1) << i);
                    c.table() >> idx & 1 == 1
                })
                .count();
            Complex64::from_polar(1.0, -GAMMA * hits as f64)
        })
        .collect())
}

/// Runs the gadget on wire `j` of `alpha`: append the auxiliary qubit in
/// `|+>`, apply the diagonal of `clauses` (written over the auxiliary index
/// `alpha.n()` and `j`), apply `H~` to `j` and post-select it on 0. The
/// auxiliary takes wire `j`'s place in the returned state. Also returns the
/// post-selection probability.
pub fn gadget_apply(alpha: &StateVector, j: usize, clauses: &[Clause]) -> Result<(StateVector, f64)> {
    let n = alpha.n();
    if j >= n {
        return Err(Error::IndexOutOfRange { index: j, len: n });
    }
    let aux = n;
    let plus = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut state = alpha.clone();
    state.push_qubit(plus, plus)?;
    state.apply_diagonal(&[aux, j], &diagonal_phases(clauses, &[aux, j])?)?;
    state.apply_h_tilde(j)?;
    let (reduced, prob) = state.postselect(&PostSelection::zeros(vec![j])?)?;
    // reduced order: wires other than j, then the auxiliary on top
    let low = (1usize << j) - 1;
    let amps = reduced.amplitudes();
    let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
    for (y, a) in amps.iter().enumerate() {
        let aux_bit = (y >> (n - 1)) & 1;
        let rest = y & ((1 << (n - 1)) - 1);
        let z = (rest & low) | ((rest & !low) << 1) | (aux_bit << j);
        out[z] = *a;
    }
    Ok((StateVector::from_amplitudes(out)?, prob))
}
