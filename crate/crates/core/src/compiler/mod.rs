//! Compilation of circuits over `{H, PhaseT, CPhase}` into post-selected
//! p = 1 QAOA circuits with the single angle `pi/4`.

mod circuit;
mod compile;
mod gadget;

pub use circuit::{random_circuit, simulate_circuit, Circuit, Gate, POSTSELECT_MIN};
pub use compile::{
    compile, compiled_amplitudes, run_dense, run_streamed, simulate_compiled, verify_equivalence, CompiledQaoa,
    EquivalenceReport, DENSE_LIMIT,
};
pub use gadget::{diagonal_phases, gadget_apply, gadget_clauses, gate_to_clauses, quarter_z_clauses, GAMMA};
