//! Exact counting from matrix elements, and the multiplicative-error
//! post-selection bound.
//!
//! The matrix element `<s| e^{-2 pi i r C / R} |s>` is the discrete Fourier
//! transform of the cost histogram `p_v`. Sampling it at `R = m + 1` phases
//! makes the transform square over `v in 0..=m`, so the inverse recovers every
//! `p_v`, including `p_m`, the fraction of strings satisfying all clauses.
//! With only `m` phases the values `v = 0` and `v = m` share a character and
//! `p_m` cannot be separated from `p_0`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::csp::{CostHistogram, CspInstance};
use crate::error::{Error, Result};
use crate::statevec::{inner_product, StateVector};

/// Tolerance on imaginary parts and lattice distance in [`recover_histogram`].
pub const RECOVERY_TOL: f64 = 1e-8;

/// `<s| exp(-2 pi i r C / denominator) |s>` evaluated on the state vector.
pub fn matrix_element(instance: &CspInstance, r: usize, denominator: usize) -> Result<Complex64> {
    if denominator == 0 {
        return Err(crate::error::invalid("denominator", "must be positive"));
    }
    let s = StateVector::uniform_state(instance.n())?;
    let mut phased = s.clone();
    phased.apply_cost_phase(instance, TAU * r as f64 / denominator as f64)?;
    inner_product(&s, &phased)
}

/// Matrix elements `e_r` for `r = 0..R`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixElementSeries {
    n: usize,
    m: usize,
    denominator: usize,
    samples: Vec<Complex64>,
}

impl MatrixElementSeries {
    /// The full series with `R = denominator = m + 1`, one state-vector
    /// evaluation per `r`.
    pub fn compute(instance: &CspInstance) -> Result<Self> {
        let denominator = instance.m() + 1;
        let costs = instance.cost_table()?;
        let s = StateVector::uniform_state(instance.n())?;
        let samples = (0..denominator)
            .into_par_iter()
            .map(|r| {
                let mut phased = s.clone();
                phased.apply_cost_phase_table(&costs, TAU * r as f64 / denominator as f64)?;
                inner_product(&s, &phased)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_samples(instance.n(), instance.m(), denominator, samples)
    }

    /// Wraps externally computed samples.
    pub fn from_samples(n: usize, m: usize, denominator: usize, samples: Vec<Complex64>) -> Result<Self> {
        if let Some((r, e)) = samples.iter().enumerate().find(|(_, e)| e.norm() > 1.0 + 1e-12) {
            return Err(crate::error::invalid("samples", format!("|e_{r}| = {} exceeds 1", e.norm())));
        }
        if let Some(e0) = samples.first() {
            if (e0 - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
                return Err(crate::error::invalid("samples", format!("e_0 = {e0}, expected 1")));
            }
        }
        Ok(MatrixElementSeries { n, m, denominator, samples })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn denominator(&self) -> usize {
        self.denominator
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// `(1/R) sum_r e_r e^{2 pi i r v / R}` for `v = 0..R`.
    pub fn inverse_transform(&self) -> Vec<Complex64> {
        let big_r = self.samples.len();
        (0..big_r)
            .map(|v| {
                self.samples
                    .iter()
                    .enumerate()
                    .map(|(r, e)| {
                        // reduce r*v mod R before scaling to keep the phase exact
                        let k = (r * v) % big_r;
                        e * Complex64::from_polar(1.0, TAU * k as f64 / big_r as f64)
                    })
                    .sum::<Complex64>()
                    / big_r as f64
            })
            .collect()
    }

    fn check_square(&self) -> Result<()> {
        let want = self.m + 1;
        if self.samples.len() != want || self.denominator != want {
            return Err(crate::error::invalid(
                "series",
                format!(
                    "need R = denominator = m + 1 = {want}, got R = {} and denominator {}",
                    self.samples.len(),
                    self.denominator
                ),
            ));
        }
        Ok(())
    }
}

/// Inverts the series and snaps each `p_v` to the `2^{-n}` lattice.
pub fn recover_histogram(series: &MatrixElementSeries) -> Result<CostHistogram> {
    series.check_square()?;
    let scale = (1u64 << series.n) as f64;
    let counts = series
        .inverse_transform()
        .into_iter()
        .enumerate()
        .map(|(v, p)| {
            if p.im.abs() > RECOVERY_TOL {
                return Err(Error::NonRealRecovery { value: v, imag: p.im });
            }
            let k = (p.re * scale).round();
            let distance = (p.re - k / scale).abs();
            if distance > RECOVERY_TOL || k < 0.0 {
                return Err(Error::RoundingFailure { value: v, distance });
            }
            Ok(k as u64)
        })
        .collect::<Result<Vec<_>>>()?;
    CostHistogram::from_counts(series.n, counts)
}

/// Number of strings satisfying every clause, read off `p_m` of the
/// recovered histogram.
pub fn fourier_count(instance: &CspInstance) -> Result<u64> {
    let series = MatrixElementSeries::compute(instance)?;
    series.check_square()?;
    let m = series.m;
    let p_m = series.inverse_transform()[m];
    if p_m.im.abs() > RECOVERY_TOL {
        return Err(Error::NonRealRecovery { value: m, imag: p_m.im });
    }
    let scale = (1u64 << series.n) as f64;
    let scaled = p_m.re * scale;
    let count = scaled.round();
    if (scaled - count).abs() > 1e-6 * scale || count < 0.0 {
        return Err(Error::RoundingFailure { value: m, distance: (scaled - count).abs() / scale });
    }
    Ok(count as u64)
}

/// Post-selects a joint distribution over `(z1, z2)` on `z2 = 0^n`. The
/// joint vector is indexed by `z1 + 2 * z2`.
pub fn postselect_distribution(joint: &[f64]) -> Result<(f64, f64)> {
    if joint.len() < 2 || !joint.len().is_power_of_two() {
        return Err(crate::error::invalid("joint", format!("length {} is not 2^(n+1)", joint.len())));
    }
    let total: f64 = joint.iter().sum();
    if (total - 1.0).abs() > 1e-10 || joint.iter().any(|&p| p < 0.0) {
        return Err(crate::error::invalid("joint", format!("not a distribution (sum {total})")));
    }
    post_pair(joint)
}

fn post_pair(joint: &[f64]) -> Result<(f64, f64)> {
    let mass = joint[0] + joint[1];
    if !(mass > 0.0) {
        return Err(Error::ZeroConditioningMass);
    }
    Ok((joint[0] / mass, joint[1] / mass))
}

/// Post-selected success probability guaranteed in the YES case.
pub const YES_THRESHOLD: f64 = 0.54;
/// Post-selected success probability guaranteed in the NO case.
pub const NO_THRESHOLD: f64 = 0.41;

/// Outcome of [`multiplicative_bound_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub epsilon: f64,
    /// `|p - q| <= eps q` at every point.
    pub bound_holds: bool,
    /// Largest `|p/q - 1|` over points with `q > 0`.
    pub max_relative_deviation: f64,
    pub q_post: (f64, f64),
    pub p_post: (f64, f64),
    /// `p_post / q_post` per outcome.
    pub post_ratios: (f64, f64),
    /// `(1-eps)/(1+eps) q_post <= p_post <= (1+eps)/(1-eps) q_post`; `None`
    /// when the pointwise bound fails and the sandwich is not implied.
    pub sandwich_holds: Option<bool>,
    /// `Some(p_post(1) >= 0.54)` when `q_post(1) >= 2/3` and the bound holds.
    pub yes_case: Option<bool>,
    /// `Some(p_post(1) <= 0.41)` when `q_post(1) <= 1/3` and the bound holds.
    pub no_case: Option<bool>,
}

impl BoundReport {
    /// No implied guarantee was violated.
    pub fn consistent(&self) -> bool {
        self.sandwich_holds != Some(false) && self.yes_case != Some(false) && self.no_case != Some(false)
    }
}

/// Checks the pointwise multiplicative bound between a sampler `p` and the
/// target `q`, and every post-selected consequence it implies.
pub fn multiplicative_bound_check(p: &[f64], q: &[f64], epsilon: f64) -> Result<BoundReport> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch { expected: q.len(), got: p.len() });
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(crate::error::invalid("epsilon", "must lie in [0, 1)"));
    }
    // a relative slack of a few ulps absorbs rounding in p = (1 +/- eps) q
    let slack = 1e-12;
    let bound_holds = p.iter().zip(q).all(|(a, b)| (a - b).abs() <= epsilon * b * (1.0 + slack) + f64::MIN_POSITIVE);
    let max_relative_deviation =
        p.iter().zip(q).filter(|(_, b)| **b > 0.0).map(|(a, b)| (a / b - 1.0).abs()).fold(0.0, f64::max);
    let q_post = postselect_distribution(q)?;
    let p_post = post_pair(p)?;
    let ratio = |a: f64, b: f64| {
        if b > 0.0 {
            a / b
        } else if a == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    };
    let post_ratios = (ratio(p_post.0, q_post.0), ratio(p_post.1, q_post.1));
    let lo = (1.0 - epsilon) / (1.0 + epsilon);
    let hi = (1.0 + epsilon) / (1.0 - epsilon);
    let tol = 1e-12;
    let sandwich_holds = bound_holds.then(|| {
        [(p_post.0, q_post.0), (p_post.1, q_post.1)].iter().all(|&(a, b)| a >= lo * b - tol && a <= hi * b + tol)
    });
    let yes_case = (bound_holds && q_post.1 >= 2.0 / 3.0 && epsilon <= 0.1).then_some(p_post.1 >= YES_THRESHOLD);
    let no_case = (bound_holds && q_post.1 <= 1.0 / 3.0 && epsilon <= 0.1).then_some(p_post.1 <= NO_THRESHOLD);
    Ok(BoundReport {
        epsilon,
        bound_holds,
        max_relative_deviation,
        q_post,
        p_post,
        post_ratios,
        sandwich_holds,
        yes_case,
        no_case,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::{Clause, CspInstance};

    fn triangle() -> CspInstance {
        CspInstance::maxcut(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn matrix_element_examples() {
        let edge = CspInstance::maxcut(2, &[(0, 1)]).unwrap();
        assert!((matrix_element(&edge, 0, 2).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(matrix_element(&edge, 1, 2).unwrap().norm() < 1e-15);
        assert!(matrix_element(&edge, 1, 0).is_err());
    }

    #[test]
    fn matrix_element_is_histogram_transform() {
        let inst = CspInstance::maxcut(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)]).unwrap();
        let hist = inst.brute_force_histogram().unwrap();
        for den in [3usize, 7, 11] {
            for r in 0..den {
                let oracle: Complex64 = hist
                    .probabilities()
                    .iter()
                    .enumerate()
                    .map(|(v, p)| p * Complex64::from_polar(1.0, -TAU * (r * v) as f64 / den as f64))
                    .sum();
                assert!((matrix_element(&inst, r, den).unwrap() - oracle).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn recovery_examples() {
        let single =
            MatrixElementSeries::from_samples(2, 1, 2, vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)])
                .unwrap();
        let h = recover_histogram(&single).unwrap();
        assert_eq!(h.probabilities(), vec![0.5, 0.5]);

        let tri = triangle();
        let rec = recover_histogram(&MatrixElementSeries::compute(&tri).unwrap()).unwrap();
        assert_eq!(rec, tri.brute_force_histogram().unwrap());

        let constant = CspInstance::new(1, vec![Clause::new(vec![0], 0b11).unwrap()]).unwrap();
        let series = MatrixElementSeries::compute(&constant).unwrap();
        for (r, e) in series.samples().iter().enumerate() {
            assert!((e - Complex64::from_polar(1.0, -TAU * r as f64 / 2.0)).norm() < 1e-12);
        }
        assert_eq!(recover_histogram(&series).unwrap().probability(1), 1.0);
    }

    #[test]
    fn recovery_rejects_bad_series() {
        let short = MatrixElementSeries::from_samples(2, 2, 3, vec![Complex64::new(1.0, 0.0); 2]).unwrap();
        assert!(recover_histogram(&short).is_err());
        let skew = MatrixElementSeries::from_samples(1, 1, 2, vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.5)])
            .unwrap();
        assert!(matches!(recover_histogram(&skew), Err(Error::NonRealRecovery { .. })));
        let off_lattice =
            MatrixElementSeries::from_samples(1, 1, 2, vec![Complex64::new(1.0, 0.0), Complex64::new(0.3, 0.0)])
                .unwrap();
        assert!(matches!(recover_histogram(&off_lattice), Err(Error::RoundingFailure { .. })));
        assert!(MatrixElementSeries::from_samples(1, 1, 2, vec![Complex64::new(0.5, 0.0)]).is_err());
    }

    #[test]
    fn aliasing_with_m_phases() {
        // with R = m the v = 0 and v = m characters coincide
        let square = CspInstance::ring(4).unwrap();
        let m = square.m();
        for r in 0..m {
            let a = Complex64::new(1.0, 0.0);
            let b = Complex64::from_polar(1.0, -TAU * (r * m) as f64 / m as f64);
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn fourier_count_examples() {
        assert_eq!(fourier_count(&CspInstance::ring(4).unwrap()).unwrap(), 2);
        assert_eq!(fourier_count(&triangle()).unwrap(), 0);
    }

    #[test]
    fn postselect_distribution_examples() {
        assert_eq!(postselect_distribution(&[0.25; 4]).unwrap(), (0.5, 0.5));
        assert_eq!(postselect_distribution(&[0.0, 1.0, 0.0, 0.0]).unwrap(), (0.0, 1.0));
        assert!(matches!(postselect_distribution(&[0.0, 0.0, 0.5, 0.5]), Err(Error::ZeroConditioningMass)));
        assert!(postselect_distribution(&[0.5, 0.6]).is_err());
    }

    #[test]
    fn bound_check_identity() {
        let q = [0.1, 0.3, 0.2, 0.4];
        let rep = multiplicative_bound_check(&q, &q, 0.1).unwrap();
        assert!(rep.bound_holds);
        assert_eq!(rep.post_ratios, (1.0, 1.0));
        assert_eq!(rep.sandwich_holds, Some(true));
        assert_eq!(rep.max_relative_deviation, 0.0);
    }

    #[test]
    fn bound_check_thresholds_at_extremes() {
        // q_post(1) = 2/3; push p_post(1) as low as the bound allows
        let q = [0.1, 0.2, 0.3, 0.4];
        let mut p = [0.11, 0.18, 0.3, 0.4];
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
        let rep = multiplicative_bound_check(&p, &q, 0.1).unwrap();
        if rep.bound_holds {
            assert_eq!(rep.yes_case, Some(true));
        }
        let raw = [0.11, 0.18, 0.3, 0.41];
        let raw_rep = multiplicative_bound_check(&raw, &q, 0.1).unwrap();
        assert!(raw_rep.bound_holds);
        assert!(raw_rep.p_post.1 >= YES_THRESHOLD);
        assert!((raw_rep.p_post.1 - 0.18 / 0.29).abs() < 1e-15);

        // q_post(1) = 1/3
        let q = [0.2, 0.1, 0.3, 0.4];
        let raw = [0.18, 0.11, 0.3, 0.41];
        let rep = multiplicative_bound_check(&raw, &q, 0.1).unwrap();
        assert_eq!(rep.no_case, Some(true));
        assert!(rep.p_post.1 <= NO_THRESHOLD);

        let far = [0.3, 0.0, 0.3, 0.4];
        let rep = multiplicative_bound_check(&far, &q, 0.1).unwrap();
        assert!(!rep.bound_holds);
        assert_eq!(rep.sandwich_holds, None);
    }
}
