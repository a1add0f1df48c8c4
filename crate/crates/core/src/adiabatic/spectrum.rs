use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::csp::CspInstance;
use crate::error::{invalid, Error, Result};
use crate::statevec::StateVector;

/// Largest `n` handled with dense `2^n x 2^n` matrices.
pub const DENSE_LIMIT: usize = 12;

/// Norm drift per integration step above which a step counts as unstable.
pub const DRIFT_LIMIT: f64 = 1e-6;

fn check_n(instance: &CspInstance) -> Result<usize> {
    let n = instance.n();
    if n > DENSE_LIMIT {
        return Err(Error::ExhaustiveLimit { n, limit: DENSE_LIMIT });
    }
    Ok(n)
}

fn check_s(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(invalid("s", format!("{s} not in [0, 1]")));
    }
    Ok(())
}

/// `H(s) = (1 - s)(-B) + s(-C)` with `B = sum_i sigma_x^i`.
pub fn hamiltonian_dense(instance: &CspInstance, s: f64) -> Result<DMatrix<f64>> {
    let n = check_n(instance)?;
    check_s(s)?;
    let dim = 1usize << n;
    let costs = instance.cost_table()?;
    let mut h = DMatrix::zeros(dim, dim);
    for z in 0..dim {
        h[(z, z)] = -s * costs[z] as f64;
        for i in 0..n {
            h[(z, z ^ (1 << i))] = -(1.0 - s);
        }
    }
    Ok(h)
}

/// True when every off-diagonal entry is at most `1e-12`.
pub fn stoquastic_check(matrix: &DMatrix<f64>) -> bool {
    let (r, c) = matrix.shape();
    (0..r).all(|i| (0..c).all(|j| i == j || matrix[(i, j)] <= 1e-12))
}

/// Ground energy, gap and ground vector of `H(s)`.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub ground_energy: f64,
    pub gap: f64,
    pub ground_state: StateVector,
}

fn two_lowest(values: &[f64]) -> (usize, f64, f64) {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let e1 = if values.len() > 1 { values[idx[1]] } else { f64::INFINITY };
    (idx[0], values[idx[0]], e1)
}

/// Lowest eigenpair of `H(s)` by a dense symmetric eigensolver. The ground
/// vector is sign-fixed to have a nonnegative sum.
pub fn ground_state(instance: &CspInstance, s: f64) -> Result<SpectralData> {
    let eig = SymmetricEigen::new(hamiltonian_dense(instance, s)?);
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let (k, e0, e1) = two_lowest(&values);
    let col = eig.eigenvectors.column(k);
    let sign = if col.sum() < 0.0 { -1.0 } else { 1.0 };
    let amps = col.iter().map(|&v| Complex64::new(sign * v, 0.0)).collect();
    Ok(SpectralData { ground_energy: e0, gap: e1 - e0, ground_state: StateVector::normalized(amps)? })
}

/// `E_1 - E_0` from eigenvalues only.
pub fn spectral_gap(instance: &CspInstance, s: f64) -> Result<f64> {
    let values: Vec<f64> = hamiltonian_dense(instance, s)?.symmetric_eigenvalues().iter().copied().collect();
    let (_, e0, e1) = two_lowest(&values);
    Ok(e1 - e0)
}

/// One row of a spectrum scan.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumPoint {
    pub s: f64,
    pub ground_energy: f64,
    pub gap: f64,
    pub stoquastic: bool,
}

/// Ground energy, gap and stoquasticity at each `s`.
pub fn spectrum_scan(instance: &CspInstance, schedule: &[f64]) -> Result<Vec<SpectrumPoint>> {
    schedule
        .iter()
        .map(|&s| {
            let h = hamiltonian_dense(instance, s)?;
            let stoquastic = stoquastic_check(&h);
            let values: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
            let (_, e0, e1) = two_lowest(&values);
            Ok(SpectrumPoint { s, ground_energy: e0, gap: e1 - e0, stoquastic })
        })
        .collect()
}

/// `<z|e^{-beta H(s)}|z> / tr e^{-beta H(s)}`.
pub fn gibbs_distribution(instance: &CspInstance, s: f64, beta: f64) -> Result<Vec<f64>> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(invalid("beta", format!("{beta} must be finite and nonnegative")));
    }
    let eig = SymmetricEigen::new(hamiltonian_dense(instance, s)?);
    let e0 = eig.eigenvalues.min();
    let weights: Vec<f64> = eig.eigenvalues.iter().map(|e| (-beta * (e - e0)).exp()).collect();
    let dim = weights.len();
    let mut diag = vec![0.0; dim];
    for (k, w) in weights.iter().enumerate() {
        let col = eig.eigenvectors.column(k);
        for z in 0..dim {
            diag[z] += w * col[z] * col[z];
        }
    }
    let total: f64 = diag.iter().sum();
    Ok(diag.into_iter().map(|d| d / total).collect())
}

/// `e^{-t H(s)}` as a dense matrix.
pub fn imaginary_time_propagator(instance: &CspInstance, s: f64, t: f64) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(hamiltonian_dense(instance, s)?);
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| (-t * e).exp()));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// `H(s) psi` without forming the matrix.
fn apply_h(costs: &[u32], n: usize, s: f64, psi: &[Complex64], out: &mut [Complex64]) {
    out.par_iter_mut().enumerate().for_each(|(z, o)| {
        let flips: Complex64 = (0..n).map(|i| psi[z ^ (1 << i)]).sum();
        *o = -(1.0 - s) * flips - s * costs[z] as f64 * psi[z];
    });
}

/// Integrates `i d/dt psi = H(t / T) psi` from the uniform state with RK4,
/// restoring the norm after every step. A step whose norm drifts by more
/// than [`DRIFT_LIMIT`] is reported as unstable.
pub fn adiabatic_evolve(instance: &CspInstance, total_time: f64, dt: f64) -> Result<StateVector> {
    let n = check_n(instance)?;
    if !(total_time >= 0.0 && total_time.is_finite()) {
        return Err(invalid("T", format!("{total_time} must be finite and nonnegative")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid("dt", format!("{dt} must be positive")));
    }
    let mut psi = StateVector::uniform_state(n)?.into_amplitudes();
    if total_time == 0.0 {
        return StateVector::from_amplitudes(psi);
    }
    let costs = instance.cost_table()?;
    let steps = (total_time / dt).ceil() as usize;
    let h = total_time / steps as f64;
    let dim = psi.len();
    let minus_i = Complex64::new(0.0, -1.0);
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
        vec![Complex64::new(0.0, 0.0); dim],
        vec![Complex64::new(0.0, 0.0); dim],
        vec![Complex64::new(0.0, 0.0); dim],
        vec![Complex64::new(0.0, 0.0); dim],
        vec![Complex64::new(0.0, 0.0); dim],
    );
    for step in 0..steps {
        let t = step as f64 * h;
        let s_at = |t: f64| (t / total_time).min(1.0);
        apply_h(&costs, n, s_at(t), &psi, &mut k1);
        k1.iter_mut().for_each(|k| *k *= minus_i);
        tmp.iter_mut().zip(&psi).zip(&k1).for_each(|((o, p), k)| *o = p + 0.5 * h * k);
        apply_h(&costs, n, s_at(t + 0.5 * h), &tmp, &mut k2);
        k2.iter_mut().for_each(|k| *k *= minus_i);
        tmp.iter_mut().zip(&psi).zip(&k2).for_each(|((o, p), k)| *o = p + 0.5 * h * k);
        apply_h(&costs, n, s_at(t + 0.5 * h), &tmp, &mut k3);
        k3.iter_mut().for_each(|k| *k *= minus_i);
        tmp.iter_mut().zip(&psi).zip(&k3).for_each(|((o, p), k)| *o = p + h * k);
        apply_h(&costs, n, s_at(t + h), &tmp, &mut k4);
        k4.iter_mut().for_each(|k| *k *= minus_i);
        for z in 0..dim {
            psi[z] += h / 6.0 * (k1[z] + 2.0 * k2[z] + 2.0 * k3[z] + k4[z]);
        }
        let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > DRIFT_LIMIT || !norm.is_finite() {
            return Err(Error::StepInstability { step, drift: (norm - 1.0).abs() });
        }
        psi.iter_mut().for_each(|a| *a /= norm);
    }
    StateVector::from_amplitudes(psi)
}

/// Probability mass of `state` on the maximizers of `C`, i.e. on the ground
/// space of `H(1)`.
pub fn ground_space_fidelity(instance: &CspInstance, state: &StateVector) -> Result<f64> {
    if state.n() != instance.n() {
        return Err(Error::LengthMismatch { expected: instance.n(), got: state.n() });
    }
    let probs = state.probabilities();
    Ok(instance.maximizers()?.into_iter().map(|z| probs[z as usize]).sum())
}

/// Outcome of searching for an adiabatic run time.
#[derive(Debug, Clone, Serialize)]
pub struct AdiabaticSearch {
    pub total_time: f64,
    pub fidelity: f64,
    /// `(T, fidelity)` for every run, in order.
    pub history: Vec<(f64, f64)>,
}

/// Doubles `T` from `t_start` until the final ground-space fidelity reaches
/// `target`, or fails once `T` would exceed `t_cap`.
pub fn find_adiabatic_time(
    instance: &CspInstance,
    dt: f64,
    target: f64,
    t_start: f64,
    t_cap: f64,
) -> Result<AdiabaticSearch> {
    if !(t_start > 0.0) || t_cap < t_start {
        return Err(invalid("T", format!("start {t_start} and cap {t_cap} must satisfy 0 < start <= cap")));
    }
    let mut t = t_start;
    let mut history = Vec::new();
    while t <= t_cap {
        let fid = ground_space_fidelity(instance, &adiabatic_evolve(instance, t, dt)?)?;
        history.push((t, fid));
        if fid >= target {
            return Ok(AdiabaticSearch { total_time: t, fidelity: fid, history });
        }
        t *= 2.0;
    }
    Err(invalid("T", format!("fidelity {target} not reached by T = {t_cap}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::tv_distance;
    use crate::csp::Clause;

    fn triangle() -> CspInstance {
        CspInstance::maxcut(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn dense_examples() {
        let one = CspInstance::new(1, vec![Clause::fixed(0, true)]).unwrap();
        let h0 = hamiltonian_dense(&one, 0.0).unwrap();
        assert_eq!(h0, DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]));
        let h1 = hamiltonian_dense(&triangle(), 1.0).unwrap();
        assert!(h1.is_square() && (0..8).all(|i| (0..8).all(|j| i == j || h1[(i, j)] == 0.0)));
        assert_eq!(h1[(1, 1)], -2.0);
        assert!(stoquastic_check(&hamiltonian_dense(&triangle(), 0.3).unwrap()));
        assert!(!stoquastic_check(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])));
        assert!(stoquastic_check(&DMatrix::from_diagonal_element(3, 3, 2.0)));
    }

    #[test]
    fn ground_state_examples() {
        let g0 = ground_state(&triangle(), 0.0).unwrap();
        assert!((g0.gap - 2.0).abs() < 1e-10);
        assert!(g0.ground_state.amplitudes().iter().all(|a| (a.re - 8f64.sqrt().recip()).abs() < 1e-10));
        let g1 = ground_state(&triangle(), 1.0).unwrap();
        assert!((g1.ground_energy + 2.0).abs() < 1e-12);
        let mid = ground_state(&triangle(), 0.5).unwrap();
        assert!(mid.gap > 0.0);
        assert!(mid.ground_state.amplitudes().iter().all(|a| a.re >= -1e-12));
        assert!((spectral_gap(&triangle(), 0.5).unwrap() - mid.gap).abs() < 1e-10);
    }

    #[test]
    fn gibbs_examples() {
        let inst = triangle();
        let hot = gibbs_distribution(&inst, 0.4, 1e-9).unwrap();
        assert!(hot.iter().all(|p| (p - 0.125).abs() < 1e-8));
        let g = ground_state(&inst, 0.4).unwrap();
        let cold = gibbs_distribution(&inst, 0.4, 50.0 / g.gap).unwrap();
        assert!(tv_distance(&cold, &g.ground_state.probabilities()) <= 0.01);
        let frozen = gibbs_distribution(&inst, 1.0, 60.0).unwrap();
        let on_max: f64 = inst.maximizers().unwrap().iter().map(|&z| frozen[z as usize]).sum();
        assert!(on_max > 1.0 - 1e-12);
    }

    #[test]
    fn evolve_examples() {
        let inst = triangle();
        let zero = adiabatic_evolve(&inst, 0.0, 0.1).unwrap();
        assert_eq!(zero, StateVector::uniform_state(3).unwrap());
        let slow = adiabatic_evolve(&inst, 40.0, 0.01).unwrap();
        assert!((slow.norm_sqr() - 1.0).abs() < 1e-8);
        assert!(ground_space_fidelity(&inst, &slow).unwrap() > 0.95);
        assert!(matches!(adiabatic_evolve(&inst, 5.0, 2.0), Err(Error::StepInstability { .. })));
    }

    #[test]
    fn propagator_matches_gibbs_diagonal() {
        let inst = triangle();
        let u = imaginary_time_propagator(&inst, 0.3, 2.0).unwrap();
        let tr = u.trace();
        let g = gibbs_distribution(&inst, 0.3, 2.0).unwrap();
        for z in 0..8 {
            assert!((u[(z, z)] / tr - g[z]).abs() < 1e-12);
        }
    }
}
