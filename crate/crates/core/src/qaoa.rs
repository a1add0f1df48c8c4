//! QAOA states `e^{-i b_p B} e^{-i g_p C} ... e^{-i b_1 B} e^{-i g_1 C} |s>`,
//! their objective `<C>`, and two deterministic angle optimizers.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::csp::CspInstance;
use crate::error::{invalid, Error, Result};
use crate::statevec::StateVector;

/// Width of the bracket at which golden-section search stops.
pub const LINE_SEARCH_TOL: f64 = 1e-6;

/// Angle vectors for depth `p`. Cost angles are reduced mod `2 pi` (integer
/// costs) and mixer angles mod `pi` (`e^{-i pi B}` is a global phase).
#[derive(Debug, Clone, PartialEq)]
pub struct Angles {
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

impl Angles {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() {
            return Err(Error::InvalidAngles("p must be at least 1".into()));
        }
        if gammas.len() != betas.len() {
            return Err(Error::InvalidAngles(format!("{} gammas but {} betas", gammas.len(), betas.len())));
        }
        if gammas.iter().chain(&betas).any(|a| !a.is_finite()) {
            return Err(Error::InvalidAngles("non-finite angle".into()));
        }
        Ok(Angles {
            gammas: gammas.into_iter().map(|g| canonical(g, TAU)).collect(),
            betas: betas.into_iter().map(|b| canonical(b, PI)).collect(),
        })
    }

    pub fn single(gamma: f64, beta: f64) -> Result<Self> {
        Angles::new(vec![gamma], vec![beta])
    }

    pub fn p(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// Extends to depth `p` with trailing zero angles.
    pub fn padded(&self, p: usize) -> Result<Self> {
        if p < self.p() {
            return Err(Error::InvalidAngles(format!("cannot pad depth {} down to {p}", self.p())));
        }
        let mut gammas = self.gammas.clone();
        let mut betas = self.betas.clone();
        gammas.resize(p, 0.0);
        betas.resize(p, 0.0);
        Angles::new(gammas, betas)
    }

    /// Interleaved `(g_1, b_1, g_2, b_2, ...)`.
    fn flat(&self) -> Vec<f64> {
        self.gammas.iter().zip(&self.betas).flat_map(|(g, b)| [*g, *b]).collect()
    }

    fn from_flat(flat: &[f64]) -> Result<Self> {
        let gammas = flat.iter().step_by(2).copied().collect();
        let betas = flat.iter().skip(1).step_by(2).copied().collect();
        Angles::new(gammas, betas)
    }
}

fn canonical(angle: f64, period: f64) -> f64 {
    let r = angle.rem_euclid(period);
    // rem_euclid can round up to the period itself
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Instance with its cost table cached, for repeated state construction.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    instance: &'a CspInstance,
    costs: Vec<u32>,
}

impl<'a> Evaluator<'a> {
    pub fn new(instance: &'a CspInstance) -> Result<Self> {
        if instance.n() > crate::statevec::MAX_QUBITS {
            return Err(Error::QubitCeiling { n: instance.n(), limit: crate::statevec::MAX_QUBITS });
        }
        Ok(Evaluator { instance, costs: instance.cost_table()? })
    }

    pub fn instance(&self) -> &CspInstance {
        self.instance
    }

    pub fn state(&self, angles: &Angles) -> Result<StateVector> {
        let mut state = StateVector::uniform_state(self.instance.n())?;
        for (&g, &b) in angles.gammas.iter().zip(&angles.betas) {
            state.apply_cost_phase_table(&self.costs, g)?;
            state.apply_mixer(b)?;
        }
        Ok(state)
    }

    pub fn objective(&self, angles: &Angles) -> Result<f64> {
        self.state(angles)?.expectation_cost_table(&self.costs)
    }
}

/// The depth-`p` QAOA state.
pub fn build_state(instance: &CspInstance, angles: &Angles) -> Result<StateVector> {
    Evaluator::new(instance)?.state(angles)
}

/// `<gamma, beta| C |gamma, beta>`.
pub fn objective(instance: &CspInstance, angles: &Angles) -> Result<f64> {
    Evaluator::new(instance)?.objective(angles)
}

/// Exact measurement distribution of the QAOA state.
pub fn output_distribution(instance: &CspInstance, angles: &Angles) -> Result<Vec<f64>> {
    Ok(build_state(instance, angles)?.probabilities())
}

/// Exhaustive `p = 1` search over `gamma = 2 pi i / R`, `beta = pi j / R`.
/// Ties go to the lexicographically smallest `(gamma, beta)`.
pub fn grid_search(instance: &CspInstance, resolution: usize) -> Result<(Angles, f64)> {
    if resolution == 0 {
        return Err(invalid("resolution", "must be at least 1"));
    }
    let eval = Evaluator::new(instance)?;
    let r = resolution as f64;
    let values: Vec<f64> = (0..resolution * resolution)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / resolution, k % resolution);
            let angles = Angles::single(TAU * (i as f64 / r), PI * (j as f64 / r))?;
            eval.objective(&angles)
        })
        .collect::<Result<_>>()?;
    let (best, value) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bk, bv), (k, &v)| if v > bv { (k, v) } else { (bk, bv) });
    let (i, j) = (best / resolution, best % resolution);
    Ok((Angles::single(TAU * (i as f64 / r), PI * (j as f64 / r))?, value))
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section maximization of `f` on `[lo, hi]`.
fn golden_section<F: FnMut(f64) -> Result<f64>>(mut f: F, mut lo: f64, mut hi: f64) -> Result<(f64, f64)> {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > LINE_SEARCH_TOL {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// Cyclic coordinate ascent: each round runs one golden-section line search
/// per angle over a full period centred on the current value, keeping the
/// move only if it improves the objective.
pub fn coordinate_optimize(instance: &CspInstance, p: usize, init: &Angles, rounds: usize) -> Result<(Angles, f64)> {
    if rounds == 0 {
        return Err(invalid("rounds", "must be at least 1"));
    }
    if init.p() != p {
        return Err(Error::InvalidAngles(format!("initial angles have depth {}, expected {p}", init.p())));
    }
    let eval = Evaluator::new(instance)?;
    let mut flat = init.flat();
    let mut best = eval.objective(init)?;
    for _ in 0..rounds {
        for k in 0..flat.len() {
            let period = if k % 2 == 0 { TAU } else { PI };
            let centre = flat[k];
            let mut trial = flat.clone();
            let (x, v) = golden_section(
                |x| {
                    trial[k] = x;
                    eval.objective(&Angles::from_flat(&trial)?)
                },
                centre - period / 2.0,
                centre + period / 2.0,
            )?;
            if v > best {
                flat[k] = x;
                best = v;
            }
        }
    }
    let angles = Angles::from_flat(&flat)?;
    Ok((angles, best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::Clause;
    use crate::statevec::{hadamard, StateVector};
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn angles_validate_and_canonicalize() {
        assert!(Angles::new(vec![], vec![]).is_err());
        assert!(Angles::new(vec![0.1], vec![0.1, 0.2]).is_err());
        assert!(Angles::single(f64::NAN, 0.0).is_err());
        let a = Angles::single(-0.5, 4.0).unwrap();
        assert!((a.gammas()[0] - (TAU - 0.5)).abs() < 1e-15);
        assert!((a.betas()[0] - (4.0 - PI)).abs() < 1e-15);
        assert_eq!(a.padded(3).unwrap().p(), 3);
        assert!(a.padded(3).unwrap().padded(2).is_err());
    }

    #[test]
    fn trivial_states() {
        let inst = CspInstance::ring(4).unwrap();
        let s = build_state(&inst, &Angles::single(0.0, 0.0).unwrap()).unwrap();
        assert_eq!(s, StateVector::uniform_state(4).unwrap());
        let phased = build_state(&inst, &Angles::single(1.3, 0.0).unwrap()).unwrap();
        assert!(phased.amplitudes().iter().all(|a| (a.norm() - 0.25).abs() < 1e-15));
        let dist = output_distribution(&inst, &Angles::single(0.9, 0.0).unwrap()).unwrap();
        assert!(dist.iter().all(|p| (p - 1.0 / 16.0).abs() < 1e-15));
    }

    #[test]
    fn uniform_objective_is_mean_clause_density() {
        let inst = CspInstance::new(
            3,
            vec![
                Clause::disagree(0, 1).unwrap(),
                Clause::or(&[(0, false), (1, true), (2, false)]).unwrap(),
                Clause::fixed(2, true),
            ],
        )
        .unwrap();
        let v = objective(&inst, &Angles::single(0.0, 0.0).unwrap()).unwrap();
        assert!((v - (0.5 + 7.0 / 8.0 + 0.5)).abs() < 1e-14);
        assert!((v - inst.uniform_mean()).abs() < 1e-14);
    }

    #[test]
    fn nesting_with_trailing_zeros_is_exact() {
        let inst = CspInstance::ring(5).unwrap();
        let one = Angles::single(0.7, 0.3).unwrap();
        let a = build_state(&inst, &one).unwrap();
        let b = build_state(&inst, &one.padded(2).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_edge_optimum_is_one() {
        let edge = CspInstance::maxcut(2, &[(0, 1)]).unwrap();
        let (_, v) = grid_search(&edge, 40).unwrap();
        assert!((v - 1.0).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn grid_refinement_and_periodicity() {
        let inst = CspInstance::maxcut(4, &[(0, 1), (1, 2), (2, 3), (0, 2)]).unwrap();
        let (_, coarse) = grid_search(&inst, 12).unwrap();
        let (_, fine) = grid_search(&inst, 24).unwrap();
        assert!(fine >= coarse);
        let eval = Evaluator::new(&inst).unwrap();
        // construct states directly to bypass canonicalization
        let mut a = StateVector::uniform_state(4).unwrap();
        a.apply_cost_phase(&inst, 0.4).unwrap();
        a.apply_mixer(0.2).unwrap();
        let mut b = StateVector::uniform_state(4).unwrap();
        b.apply_cost_phase(&inst, 0.4 + TAU).unwrap();
        b.apply_mixer(0.2).unwrap();
        let (va, vb) = (a.expectation_cost(&inst).unwrap(), b.expectation_cost(&inst).unwrap());
        assert!((va - vb).abs() < 1e-12);
        assert!((eval.objective(&Angles::single(0.4, 0.2).unwrap()).unwrap() - va).abs() < 1e-12);
    }

    #[test]
    fn coordinate_refinement_never_loses() {
        let inst = CspInstance::ring(6).unwrap();
        let (start, grid) = grid_search(&inst, 16).unwrap();
        let (_, refined) = coordinate_optimize(&inst, 1, &start, 2).unwrap();
        assert!(refined >= grid);
        assert!(coordinate_optimize(&inst, 1, &start, 0).is_err());
        assert!(coordinate_optimize(&inst, 2, &start, 1).is_err());
    }

    #[test]
    fn maxcut_at_quarter_angles_matches_gate_by_gate_form() {
        let inst = CspInstance::ring(5).unwrap();
        let a = build_state(&inst, &Angles::single(FRAC_PI_4, FRAC_PI_4).unwrap()).unwrap();
        let mut b = StateVector::zero_state(5).unwrap();
        for q in 0..5 {
            b.apply_single_qubit(q, &hadamard()).unwrap();
        }
        b.apply_cost_phase(&inst, FRAC_PI_4).unwrap();
        for q in 0..5 {
            b.apply_h_tilde(q).unwrap();
        }
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}
