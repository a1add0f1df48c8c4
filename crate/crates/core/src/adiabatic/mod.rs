//! Stoquastic adiabatic evolution under `H(s) = (1 - s)(-B) + s(-C)`:
//! dense spectra and dynamics for small `n`, path-integral Monte Carlo over
//! worldlines, simulated quantum annealing and exact rejection sampling.

mod pimc;
mod spectrum;

pub use pimc::{
    exact_slice_identity, exact_worldline_distribution, factors_positive, metropolis_sweep, pimc_sample,
    rejection_sample, sqa_anneal, transfer_weight, trotter_marginal, trotter_slice_matrix, PimcConfig, PimcResult,
    RejectionSampler, Sampler, SqaResult, SqaStep, Worldline, HISTOGRAM_LIMIT,
};
pub use spectrum::{
    adiabatic_evolve, find_adiabatic_time, gibbs_distribution, ground_space_fidelity, ground_state, hamiltonian_dense,
    imaginary_time_propagator, spectral_gap, spectrum_scan, stoquastic_check, AdiabaticSearch, SpectralData,
    SpectrumPoint, DENSE_LIMIT, DRIFT_LIMIT,
};
