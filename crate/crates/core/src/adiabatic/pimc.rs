use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::spectrum::{hamiltonian_dense, imaginary_time_propagator, DENSE_LIMIT};
use crate::csp::CspInstance;
use crate::error::{invalid, Error, Result};

/// Largest `n` for which samplers keep a dense histogram over `z`.
pub const HISTOGRAM_LIMIT: usize = 20;

/// Largest lag used by the autocorrelation estimate.
const MAX_LAG: usize = 200;

/// A closed path of `L` bit strings. Slice 0 is `z`, slices `1..L` are
/// `x_1 .. x_{L-1}`, and slice `L - 1` connects back to `z`, so the path
/// holds exactly `L` slice factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Worldline {
    n: usize,
    slices: Vec<u64>,
}

impl Worldline {
    pub fn new(n: usize, slices: Vec<u64>) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(invalid("n", format!("{n} not in 1..=64")));
        }
        if slices.len() < 2 {
            return Err(invalid("L", format!("{} slices, need at least 2", slices.len())));
        }
        if n < 64 {
            if let Some(&s) = slices.iter().find(|&&s| s >> n != 0) {
                return Err(Error::LengthMismatch { expected: n, got: 64 - s.leading_zeros() as usize });
            }
        }
        Ok(Worldline { n, slices })
    }

    /// All slices equal to `z`.
    pub fn constant(n: usize, slices: usize, z: u64) -> Result<Self> {
        Worldline::new(n, vec![z; slices])
    }

    /// Uniformly random slices.
    pub fn random<R: Rng + ?Sized>(n: usize, slices: usize, rng: &mut R) -> Result<Self> {
        let mask = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
        Worldline::new(n, (0..slices).map(|_| rng.random::<u64>() & mask).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn z(&self) -> u64 {
        self.slices[0]
    }

    pub fn x(&self) -> &[u64] {
        &self.slices[1..]
    }

    pub fn slices(&self) -> &[u64] {
        &self.slices
    }

    /// Index in `0..2^{nL}` with slice `l` in bits `nl .. n(l+1)`.
    pub fn index(&self) -> u64 {
        self.slices.iter().enumerate().fold(0, |acc, (l, &s)| acc | s << (self.n * l))
    }

    pub fn from_index(n: usize, slices: usize, index: u64) -> Result<Self> {
        if n * slices > 63 {
            return Err(invalid("L", format!("{n} x {slices} bits do not fit an index")));
        }
        let mask = (1u64 << n) - 1;
        Worldline::new(n, (0..slices).map(|l| (index >> (n * l)) & mask).collect())
    }

    fn flip(&mut self, l: usize, i: usize) {
        self.slices[l] ^= 1 << i;
    }
}

/// Parameters of the path-integral chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PimcConfig {
    pub beta: f64,
    pub slices: usize,
    pub s: f64,
    pub sweeps: usize,
    pub seed: u64,
    /// Independent chains, each running `sweeps / chains` sweeps.
    pub chains: usize,
}

impl PimcConfig {
    pub fn new(beta: f64, slices: usize, s: f64, sweeps: usize, seed: u64) -> Result<Self> {
        let c = PimcConfig { beta, slices, s, sweeps, seed, chains: 1 };
        c.validate()?;
        Ok(c)
    }

    /// Picks `L` so that `beta m / L <= 1/2` and `beta (1 - s) / L <= 1/2`.
    pub fn with_default_slices(instance: &CspInstance, beta: f64, s: f64, sweeps: usize, seed: u64) -> Result<Self> {
        let a = (2.0 * beta * instance.m() as f64).ceil();
        let b = (2.0 * beta * (1.0 - s)).ceil();
        let slices = a.max(b).max(2.0);
        if !slices.is_finite() || slices > 1e7 {
            return Err(invalid("beta", format!("{beta} needs too many slices")));
        }
        PimcConfig::new(beta, slices as usize, s, sweeps, seed)
    }

    pub fn with_chains(mut self, chains: usize) -> Result<Self> {
        self.chains = chains;
        self.validate()?;
        Ok(self)
    }

    pub fn with_s(&self, s: f64) -> Result<Self> {
        let c = PimcConfig { s, ..self.clone() };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(invalid("beta", format!("{} must be positive", self.beta)));
        }
        if self.slices < 2 {
            return Err(invalid("L", format!("{} slices, need at least 2", self.slices)));
        }
        if !(0.0..1.0).contains(&self.s) {
            return Err(invalid("s", format!("{} not in [0, 1)", self.s)));
        }
        if self.chains == 0 {
            return Err(invalid("chains", "must be at least 1"));
        }
        Ok(())
    }

    /// `beta (1 - s) / L`.
    pub fn tau(&self) -> f64 {
        self.beta * (1.0 - self.s) / self.slices as f64
    }

    /// `beta s / L`.
    pub fn delta(&self) -> f64 {
        self.beta * self.s / self.slices as f64
    }

    /// `ln w_max = nL ln cosh(tau) + beta s m`: every kernel factor is at
    /// most `cosh tau` and the cost factors multiply to at most `e^{beta s m}`.
    pub fn log_w_max(&self, instance: &CspInstance) -> f64 {
        (instance.n() * self.slices) as f64 * self.tau().cosh().ln() + self.beta * self.s * instance.m() as f64
    }
}

/// Precomputed data for local weight ratios on one instance and config.
#[derive(Debug, Clone)]
pub struct Sampler<'a> {
    instance: &'a CspInstance,
    config: PimcConfig,
    adjacency: Vec<Vec<usize>>,
    log_cosh: f64,
    log_sinh: f64,
}

impl<'a> Sampler<'a> {
    pub fn new(instance: &'a CspInstance, config: &PimcConfig) -> Result<Self> {
        config.validate()?;
        let mut adjacency = vec![Vec::new(); instance.n()];
        for (a, c) in instance.clauses().iter().enumerate() {
            for &v in c.vars() {
                adjacency[v].push(a);
            }
        }
        let tau = config.tau();
        Ok(Sampler {
            instance,
            config: config.clone(),
            adjacency,
            log_cosh: tau.cosh().ln(),
            log_sinh: tau.sinh().ln(),
        })
    }

    pub fn config(&self) -> &PimcConfig {
        &self.config
    }

    fn check(&self, w: &Worldline) -> Result<()> {
        if w.n != self.instance.n() {
            return Err(Error::LengthMismatch { expected: self.instance.n(), got: w.n });
        }
        if w.len() != self.config.slices {
            return Err(Error::LengthMismatch { expected: self.config.slices, got: w.len() });
        }
        Ok(())
    }

    /// `ln w` from the full product of slice factors.
    pub fn log_weight(&self, w: &Worldline) -> Result<f64> {
        self.check(w)?;
        let delta = self.config.delta();
        let n = w.n;
        let len = w.len();
        let mut total = 0.0;
        for l in 0..len {
            let (a, b) = (w.slices[l], w.slices[(l + 1) % len]);
            let unequal = (a ^ b).count_ones() as usize;
            total += unequal as f64 * self.log_sinh + (n - unequal) as f64 * self.log_cosh;
            total += delta * self.instance.cost_of(b) as f64;
        }
        Ok(total)
    }

    /// `ln(w'/w)` for flipping bit `i` of slice `l`, from the two kernel
    /// factors touching slice `l` and the clauses containing variable `i`.
    pub fn flip_log_ratio(&self, w: &Worldline, l: usize, i: usize) -> f64 {
        let len = w.slices.len();
        let b = w.slices[l];
        let flipped = b ^ (1 << i);
        let dc: i64 = self.adjacency[i]
            .iter()
            .map(|&a| {
                let c = &self.instance.clauses()[a];
                c.evaluate(flipped) as i64 - c.evaluate(b) as i64
            })
            .sum();
        let kernel = |other: u64| {
            if (other ^ b) >> i & 1 == 0 {
                self.log_sinh - self.log_cosh
            } else {
                self.log_cosh - self.log_sinh
            }
        };
        self.config.delta() * dc as f64 + kernel(w.slices[(l + len - 1) % len]) + kernel(w.slices[(l + 1) % len])
    }

    /// One sweep of `nL` single-bit Metropolis proposals at uniformly random
    /// positions. Returns the number accepted.
    pub fn sweep<R: Rng + ?Sized>(&self, w: &mut Worldline, rng: &mut R) -> usize {
        let (n, len) = (w.n, w.slices.len());
        let mut accepted = 0;
        for _ in 0..n * len {
            let l = rng.random_range(0..len);
            let i = rng.random_range(0..n);
            let r = self.flip_log_ratio(w, l, i);
            if r >= 0.0 || rng.random::<f64>().ln() < r {
                w.flip(l, i);
                accepted += 1;
            }
        }
        accepted
    }
}

/// `ln w(z, x)` under the Trotterized slice factors
/// `e^{(beta s / L) C(b)} prod_i K(a_i, b_i)`.
pub fn transfer_weight(w: &Worldline, instance: &CspInstance, config: &PimcConfig) -> Result<f64> {
    Sampler::new(instance, config)?.log_weight(w)
}

/// One Metropolis sweep; returns the number of accepted flips.
pub fn metropolis_sweep<R: Rng + ?Sized>(
    w: &mut Worldline,
    instance: &CspInstance,
    config: &PimcConfig,
    rng: &mut R,
) -> Result<usize> {
    let sampler = Sampler::new(instance, config)?;
    sampler.check(w)?;
    Ok(sampler.sweep(w, rng))
}

/// Empirical marginal of `z` and chain diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct PimcResult {
    pub counts: Vec<u64>,
    pub distribution: Vec<f64>,
    pub acceptance_rate: f64,
    /// Lag-1 autocorrelation of `C(z)` along chain 0.
    pub lag1_autocorrelation: f64,
    /// Integrated autocorrelation time of `C(z)` along chain 0, in sweeps.
    pub integrated_autocorrelation: f64,
    pub mean_cost: f64,
    pub recorded: u64,
}

fn chain_rng(seed: u64, chain: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain as u64);
    rng
}

fn autocorrelation(series: &[f64]) -> (f64, f64) {
    let len = series.len();
    if len < 3 {
        return (0.0, 1.0);
    }
    let mean = series.iter().sum::<f64>() / len as f64;
    let var = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / len as f64;
    if var <= 0.0 {
        return (0.0, 1.0);
    }
    let rho = |lag: usize| {
        series[..len - lag].iter().zip(&series[lag..]).map(|(a, b)| (a - mean) * (b - mean)).sum::<f64>()
            / ((len - lag) as f64 * var)
    };
    let lag1 = rho(1);
    let mut tau = 1.0;
    for lag in 1..MAX_LAG.min(len / 2) {
        let r = rho(lag);
        if r <= 0.0 {
            break;
        }
        tau += 2.0 * r;
    }
    (lag1, tau)
}

/// Runs `config.chains` independent chains in parallel. Each burns in for a
/// fifth of its sweeps and records `z` after every later sweep.
pub fn pimc_sample(instance: &CspInstance, config: &PimcConfig) -> Result<PimcResult> {
    let n = instance.n();
    if n > HISTOGRAM_LIMIT {
        return Err(Error::ExhaustiveLimit { n, limit: HISTOGRAM_LIMIT });
    }
    if config.sweeps < config.chains {
        return Err(invalid("sweeps", format!("{} sweeps for {} chains", config.sweeps, config.chains)));
    }
    let sampler = Sampler::new(instance, config)?;
    let per_chain = config.sweeps / config.chains;
    let burn = per_chain / 5;
    let runs: Vec<(Vec<u64>, usize, Vec<f64>)> = (0..config.chains)
        .into_par_iter()
        .map(|chain| {
            let mut rng = chain_rng(config.seed, chain);
            let mut w = Worldline::random(n, config.slices, &mut rng).expect("valid worldline");
            let mut counts = vec![0u64; 1 << n];
            let mut accepted = 0;
            let mut series = Vec::new();
            for sweep in 0..per_chain {
                let a = sampler.sweep(&mut w, &mut rng);
                if sweep >= burn {
                    accepted += a;
                    counts[w.z() as usize] += 1;
                    if chain == 0 {
                        series.push(instance.cost_of(w.z()) as f64);
                    }
                }
            }
            (counts, accepted, series)
        })
        .collect();
    let mut counts = vec![0u64; 1 << n];
    let mut accepted = 0usize;
    for (c, a, _) in &runs {
        counts.iter_mut().zip(c).for_each(|(x, y)| *x += y);
        accepted += a;
    }
    let recorded: u64 = counts.iter().sum();
    if recorded == 0 {
        return Err(invalid("sweeps", "no sweeps left after burn-in"));
    }
    let (lag1, tau) = autocorrelation(&runs[0].2);
    let proposals = recorded as f64 * (n * config.slices) as f64;
    let mean_cost = counts.iter().enumerate().map(|(z, &c)| c as f64 * instance.cost_of(z as u64) as f64).sum::<f64>()
        / recorded as f64;
    Ok(PimcResult {
        distribution: counts.iter().map(|&c| c as f64 / recorded as f64).collect(),
        counts,
        acceptance_rate: accepted as f64 / proposals,
        lag1_autocorrelation: lag1,
        integrated_autocorrelation: tau,
        mean_cost,
        recorded,
    })
}

/// One schedule point of an annealing run.
#[derive(Debug, Clone, Serialize)]
pub struct SqaStep {
    pub s: f64,
    pub acceptance_rate: f64,
    pub mean_cost: f64,
    pub best_cost: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SqaResult {
    pub best_z: u64,
    pub best_cost: usize,
    pub trajectory: Vec<SqaStep>,
}

/// Simulated quantum annealing: one chain carried along a nondecreasing
/// schedule in `[0, 1)`, `per_step_sweeps` sweeps per point, tracking the
/// best `C` seen on any slice.
pub fn sqa_anneal(
    instance: &CspInstance,
    schedule: &[f64],
    per_step_sweeps: usize,
    config: &PimcConfig,
) -> Result<SqaResult> {
    if schedule.is_empty() {
        return Err(invalid("schedule", "is empty"));
    }
    if schedule.windows(2).any(|p| p[1] < p[0]) {
        return Err(invalid("schedule", "must be nondecreasing"));
    }
    if per_step_sweeps == 0 {
        return Err(invalid("sweeps", "must be at least 1 per step"));
    }
    let n = instance.n();
    let mut rng = chain_rng(config.seed, 0);
    let mut w = Worldline::random(n, config.slices, &mut rng)?;
    let mut best_z = w.z();
    let mut best_cost = instance.cost_of(best_z);
    let mut trajectory = Vec::with_capacity(schedule.len());
    for &s in schedule {
        let sampler = Sampler::new(instance, &config.with_s(s)?)?;
        let mut accepted = 0;
        let mut cost_sum = 0.0;
        for _ in 0..per_step_sweeps {
            accepted += sampler.sweep(&mut w, &mut rng);
            cost_sum += instance.cost_of(w.z()) as f64;
            for &x in w.slices() {
                let c = instance.cost_of(x);
                if c > best_cost {
                    best_cost = c;
                    best_z = x;
                }
            }
        }
        trajectory.push(SqaStep {
            s,
            acceptance_rate: accepted as f64 / (per_step_sweeps * n * config.slices) as f64,
            mean_cost: cost_sum / per_step_sweeps as f64,
            best_cost,
        });
    }
    Ok(SqaResult { best_z, best_cost, trajectory })
}

/// Exact sampler: propose a uniform worldline and accept with probability
/// `w / w_max`.
#[derive(Debug, Clone)]
pub struct RejectionSampler<'a> {
    sampler: Sampler<'a>,
    log_bound: f64,
}

impl<'a> RejectionSampler<'a> {
    pub fn new(instance: &'a CspInstance, config: &PimcConfig) -> Result<Self> {
        let log_bound = config.log_w_max(instance);
        Ok(RejectionSampler { sampler: Sampler::new(instance, config)?, log_bound })
    }

    /// Replaces `ln w_max` with a looser bound.
    pub fn with_log_bound(mut self, log_bound: f64) -> Result<Self> {
        if log_bound < self.log_bound {
            return Err(invalid("w_max", "bound below the proven maximum"));
        }
        self.log_bound = log_bound;
        Ok(self)
    }

    pub fn log_bound(&self) -> f64 {
        self.log_bound
    }

    /// Returns the accepted worldline and the number of proposals used.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, max_attempts: u64) -> Result<(Worldline, u64)> {
        let n = self.sampler.instance.n();
        let len = self.sampler.config.slices;
        for attempt in 1..=max_attempts {
            let w = Worldline::random(n, len, rng)?;
            let logw = self.sampler.log_weight(&w)?;
            if rng.random::<f64>().ln() < logw - self.log_bound {
                return Ok((w, attempt));
            }
        }
        Err(Error::AttemptsExhausted(max_attempts))
    }
}

/// One exact draw from `p(z, x)` seeded by `config.seed`.
pub fn rejection_sample(instance: &CspInstance, config: &PimcConfig, max_attempts: u64) -> Result<(Worldline, u64)> {
    let mut rng = chain_rng(config.seed, 0);
    RejectionSampler::new(instance, config)?.sample(&mut rng, max_attempts)
}

/// `p(z, x)` for every worldline, indexed by [`Worldline::index`].
pub fn exact_worldline_distribution(instance: &CspInstance, config: &PimcConfig) -> Result<Vec<f64>> {
    let bits = instance.n() * config.slices;
    if bits > HISTOGRAM_LIMIT {
        return Err(Error::ExhaustiveLimit { n: bits, limit: HISTOGRAM_LIMIT });
    }
    let sampler = Sampler::new(instance, config)?;
    let logs: Vec<f64> = (0..1u64 << bits)
        .into_par_iter()
        .map(|idx| sampler.log_weight(&Worldline::from_index(instance.n(), config.slices, idx).unwrap()).unwrap())
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = w.iter().sum();
    Ok(w.into_iter().map(|x| x / total).collect())
}

/// The Trotterized slice matrix `T(a, b) = e^{delta C(b)} prod_i K(a_i, b_i)`.
pub fn trotter_slice_matrix(instance: &CspInstance, config: &PimcConfig) -> Result<DMatrix<f64>> {
    let n = instance.n();
    if n > DENSE_LIMIT {
        return Err(Error::ExhaustiveLimit { n, limit: DENSE_LIMIT });
    }
    config.validate()?;
    let dim = 1usize << n;
    let (c, s) = (config.tau().cosh(), config.tau().sinh());
    let costs = instance.cost_table()?;
    let delta = config.delta();
    Ok(DMatrix::from_fn(dim, dim, |a, b| {
        let unequal = (a ^ b).count_ones() as i32;
        s.powi(unequal) * c.powi(n as i32 - unequal) * (delta * costs[b] as f64).exp()
    }))
}

fn diagonal_marginal(m: &DMatrix<f64>) -> Vec<f64> {
    let tr = m.trace();
    m.diagonal().iter().map(|d| d / tr).collect()
}

fn matrix_power(m: &DMatrix<f64>, mut k: usize) -> DMatrix<f64> {
    let mut result = DMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        base = &base * &base;
        k >>= 1;
    }
    result
}

/// Exact `z` marginal of the Trotterized chain: `diag(T^L) / tr T^L`.
pub fn trotter_marginal(instance: &CspInstance, config: &PimcConfig) -> Result<Vec<f64>> {
    let t = trotter_slice_matrix(instance, config)?;
    // rescale so the power cannot overflow
    let scale = t.max();
    Ok(diagonal_marginal(&matrix_power(&(t / scale), config.slices)))
}

/// `sum_x prod_l <x_l|e^{-beta H / L}|x_{l+1}>` for every `z`, by explicit
/// enumeration of worldlines with exact slice matrices, next to the diagonal
/// of `e^{-beta H}`.
pub fn exact_slice_identity(instance: &CspInstance, s: f64, beta: f64, slices: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = instance.n();
    if slices < 2 || n * slices > HISTOGRAM_LIMIT {
        return Err(invalid("L", format!("{slices} slices on {n} qubits is outside the enumeration range")));
    }
    let slice = imaginary_time_propagator(instance, s, beta / slices as f64)?;
    let full = imaginary_time_propagator(instance, s, beta)?;
    let dim = 1usize << n;
    let inner = 1u64 << (n * (slices - 1));
    let sums: Vec<f64> = (0..dim)
        .into_par_iter()
        .map(|z| {
            (0..inner)
                .map(|xi| {
                    let mut prev = z;
                    let mut prod = 1.0;
                    for l in 0..slices - 1 {
                        let x = ((xi >> (n * l)) as usize) & (dim - 1);
                        prod *= slice[(prev, x)];
                        prev = x;
                    }
                    prod * slice[(prev, z)]
                })
                .sum()
        })
        .collect();
    Ok((sums, (0..dim).map(|z| full[(z, z)]).collect()))
}

/// True when every off-diagonal entry of `H(s)` is nonpositive and every
/// Trotterized factor is positive.
pub fn factors_positive(instance: &CspInstance, config: &PimcConfig) -> Result<bool> {
    let h = hamiltonian_dense(instance, config.s)?;
    Ok(super::spectrum::stoquastic_check(&h) && config.tau().sinh() > 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::tv_distance;
    use crate::csp::Clause;

    fn two_bit() -> CspInstance {
        CspInstance::new(2, vec![Clause::disagree(0, 1).unwrap(), Clause::fixed(0, true)]).unwrap()
    }

    #[test]
    fn single_qubit_weight() {
        let inst = CspInstance::new(1, vec![Clause::fixed(0, true)]).unwrap();
        let cfg = PimcConfig::new(1.3, 2, 0.0, 1, 0).unwrap();
        let w = Worldline::constant(1, 2, 0).unwrap();
        let want = 2.0 * cfg.tau().cosh().ln();
        assert!((transfer_weight(&w, &inst, &cfg).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn weights_sum_to_trace() {
        let inst = two_bit();
        let cfg = PimcConfig::new(1.7, 2, 0.35, 1, 0).unwrap();
        let sampler = Sampler::new(&inst, &cfg).unwrap();
        let total: f64 =
            (0..16u64).map(|i| sampler.log_weight(&Worldline::from_index(2, 2, i).unwrap()).unwrap().exp()).sum();
        let t = trotter_slice_matrix(&inst, &cfg).unwrap();
        assert!((total - (&t * &t).trace()).abs() < 1e-10 * total);
    }

    #[test]
    fn local_ratio_matches_recompute() {
        let inst = two_bit();
        let cfg = PimcConfig::new(2.0, 5, 0.6, 1, 0).unwrap();
        let sampler = Sampler::new(&inst, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let w = Worldline::random(2, 5, &mut rng).unwrap();
            let (l, i) = (rng.random_range(0..5), rng.random_range(0..2));
            let mut f = w.clone();
            f.flip(l, i);
            let full = sampler.log_weight(&f).unwrap() - sampler.log_weight(&w).unwrap();
            assert!((sampler.flip_log_ratio(&w, l, i) - full).abs() < 1e-10);
        }
    }

    #[test]
    fn sweeps_are_reproducible() {
        let inst = two_bit();
        let cfg = PimcConfig::new(2.0, 4, 0.5, 1, 0).unwrap();
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            let mut w = Worldline::constant(2, 4, 0).unwrap();
            for _ in 0..20 {
                metropolis_sweep(&mut w, &inst, &cfg, &mut rng).unwrap();
            }
            w
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn pimc_uniform_at_s_zero() {
        let inst = CspInstance::maxcut(3, &[(0, 1), (1, 2)]).unwrap();
        let cfg = PimcConfig::new(3.0, 8, 0.0, 40_000, 1).unwrap().with_chains(4).unwrap();
        let r = pimc_sample(&inst, &cfg).unwrap();
        assert!(tv_distance(&r.distribution, &[0.125; 8]) <= 0.02, "{:?}", r.distribution);
        assert!(r.acceptance_rate > 0.0 && r.acceptance_rate <= 1.0);
    }

    #[test]
    fn chain_is_stationary() {
        let inst = two_bit();
        let cfg = PimcConfig::new(1.5, 3, 0.5, 1, 0).unwrap();
        let exact = exact_worldline_distribution(&inst, &cfg).unwrap();
        let sampler = Sampler::new(&inst, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut w = Worldline::constant(2, 3, 0).unwrap();
        let mut counts = vec![0u64; exact.len()];
        for sweep in 0..200_000 {
            sampler.sweep(&mut w, &mut rng);
            if sweep >= 1000 {
                counts[w.index() as usize] += 1;
            }
        }
        let total: u64 = counts.iter().sum();
        let emp: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
        assert!(tv_distance(&emp, &exact) <= 0.02);
    }

    #[test]
    fn sqa_finds_four_cycle_optimum() {
        let inst = CspInstance::ring(4).unwrap();
        let cfg = PimcConfig::new(4.0, 16, 0.0, 1, 3).unwrap();
        let schedule: Vec<f64> = (0..20).map(|i| 0.05 * i as f64).collect();
        let r = sqa_anneal(&inst, &schedule, 20, &cfg).unwrap();
        assert_eq!(r.best_cost, 4);
        assert!(r.trajectory.windows(2).all(|p| p[0].best_cost <= p[1].best_cost));
    }

    #[test]
    fn rejection_bound_and_exhaustion() {
        let inst = two_bit();
        let cfg = PimcConfig::new(1.0, 2, 0.5, 1, 5).unwrap();
        let rs = RejectionSampler::new(&inst, &cfg).unwrap();
        let sampler = Sampler::new(&inst, &cfg).unwrap();
        for i in 0..16 {
            assert!(sampler.log_weight(&Worldline::from_index(2, 2, i).unwrap()).unwrap() <= rs.log_bound() + 1e-12);
        }
        let (w, attempts) = rejection_sample(&inst, &cfg, 10_000).unwrap();
        assert!(attempts >= 1 && w.len() == 2);
        let loose = RejectionSampler::new(&inst, &cfg).unwrap().with_log_bound(400.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(loose.sample(&mut rng, 10), Err(Error::AttemptsExhausted(10))));
    }

    #[test]
    fn exact_slices_reproduce_diagonal() {
        let inst = two_bit();
        for slices in [2, 4] {
            let (sums, diag) = exact_slice_identity(&inst, 0.4, 1.5, slices).unwrap();
            for (a, b) in sums.iter().zip(&diag) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn default_slices_respect_bounds() {
        let inst = CspInstance::ring(5).unwrap();
        let cfg = PimcConfig::with_default_slices(&inst, 3.0, 0.2, 10, 0).unwrap();
        assert!(cfg.beta * inst.m() as f64 / cfg.slices as f64 <= 0.5);
        assert!(cfg.tau() <= 0.5);
    }
}
