//! Batch runner: one subcommand per experiment, seeded, with JSON or CSV
//! records that echo the tool version and the full configuration.
//!
//! Exit codes: 0 on success, 1 on a validation error, 2 when a numerical
//! check fails.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::adiabatic::{self, PimcConfig, RejectionSampler};
use crate::bits;
use crate::compiler::{self, Circuit};
use crate::csp::CspInstance;
use crate::error::{Error, Result};
use crate::postsel::{self, MarkedOracle};
use crate::qaoa::{self, Angles};
use crate::statevec::StateVector;
use crate::supremacy::{self, MatrixElementSeries};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;

#[derive(Debug, Parser, Serialize)]
#[command(name = "qaoa-lab", version, about = "QAOA, post-selection and adiabatic simulation experiments")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for parallel kernels (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the full record here; standard output only gets a one-line summary.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Grid search at p = 1, then coordinate ascent at depth p.
    QaoaOpt(QaoaOptArgs),
    /// Sample the QAOA output distribution at given angles.
    QaoaSample(QaoaSampleArgs),
    /// Count satisfying assignments from QAOA matrix elements.
    FourierCount(InstanceArg),
    /// Count marked strings with post-selected amplification.
    GroverCount(OracleArgs),
    /// Compile a circuit into a post-selected p = 1 QAOA circuit.
    Compile(CircuitArgs),
    /// Compile a circuit and compare it with direct simulation.
    Verify(VerifyArgs),
    /// Ground energy, gap and stoquasticity along the interpolation.
    AdiabaticSpectrum(SpectrumArgs),
    /// Path-integral Monte Carlo at one schedule point.
    Pimc(PimcArgs),
    /// Simulated quantum annealing along a linear schedule.
    Sqa(SqaArgs),
    /// Exact worldline samples by rejection.
    RejectSample(RejectArgs),
    /// Integrate the Schroedinger equation along the interpolation.
    Evolve(EvolveArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct InstanceArg {
    /// CSP file (`csp n m` format, or DIMACS CNF when it starts with `p cnf`).
    pub instance: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct QaoaOptArgs {
    pub instance: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    /// Grid points per angle for the p = 1 search.
    #[arg(long, default_value_t = 40)]
    pub resolution: usize,
    #[arg(long, default_value_t = 3)]
    pub rounds: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct QaoaSampleArgs {
    pub instance: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    /// Comma-separated gamma_1..gamma_p.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub gamma: Vec<f64>,
    /// Comma-separated beta_1..beta_p.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub beta: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub shots: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct OracleArgs {
    /// Oracle file: `oracle k`, then one marked k-bit string per line.
    pub oracle: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CircuitArgs {
    /// Circuit file: `circuit n`, then `h q`, `t q`, `cp a b`, `post q 0` lines.
    pub circuit: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    pub circuit: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    pub instance: PathBuf,
    /// Number of evenly spaced points in [0, 1].
    #[arg(long, default_value_t = 11)]
    pub points: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct PimcArgs {
    pub instance: PathBuf,
    #[arg(long, default_value_t = 5.0)]
    pub beta: f64,
    /// Trotter slices (default: the smallest L with beta m / L and beta (1 - s) / L at most 1/2).
    #[arg(long)]
    pub slices: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub s: f64,
    #[arg(long, default_value_t = 10_000)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SqaArgs {
    pub instance: PathBuf,
    #[arg(long, default_value_t = 5.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 16)]
    pub slices: usize,
    /// Schedule points, evenly spaced from 0 to `s_max`.
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.99)]
    pub s_max: f64,
    #[arg(long, default_value_t = 100)]
    pub sweeps_per_step: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct RejectArgs {
    pub instance: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 2)]
    pub slices: usize,
    #[arg(long, default_value_t = 0.5)]
    pub s: f64,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Proposals allowed per accepted sample.
    #[arg(long, default_value_t = 1_000_000)]
    pub max_attempts: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct EvolveArgs {
    pub instance: PathBuf,
    /// Total evolution time.
    #[arg(long = "time", short = 'T')]
    pub total_time: f64,
    #[arg(long, default_value_t = 0.005)]
    pub dt: f64,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::QaoaOpt(_) => "qaoa-opt",
            Command::QaoaSample(_) => "qaoa-sample",
            Command::FourierCount(_) => "fourier-count",
            Command::GroverCount(_) => "grover-count",
            Command::Compile(_) => "compile",
            Command::Verify(_) => "verify",
            Command::AdiabaticSpectrum(_) => "adiabatic-spectrum",
            Command::Pimc(_) => "pimc",
            Command::Sqa(_) => "sqa",
            Command::RejectSample(_) => "reject-sample",
            Command::Evolve(_) => "evolve",
        }
    }
}

/// What a subcommand produced.
struct Outcome {
    summary: String,
    result: Value,
    /// CSV body, for commands with a natural row layout.
    csv: Option<String>,
    /// Extra files written next to the record.
    extra: Vec<(PathBuf, String)>,
    check_passed: bool,
}

impl Outcome {
    fn new(summary: String, result: Value) -> Self {
        Outcome { summary, result, csv: None, extra: Vec::new(), check_passed: true }
    }

    fn csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }
}

/// Exit code for an error: 2 for numerical-check failures, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NonUnitary(_)
        | Error::NonRealRecovery { .. }
        | Error::RoundingFailure { .. }
        | Error::StepInstability { .. }
        | Error::PostSelectionImpossible(_)
        | Error::AttemptsExhausted(_) => EXIT_CHECK_FAILED,
        _ => EXIT_INVALID,
    }
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qaoa-lab {}: {e}", cli.command.name());
            exit_code(&e)
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let outcome = match cli.threads {
        Some(0) => return Err(crate::error::invalid("threads", "must be at least 1")),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| crate::error::invalid("threads", e.to_string()))?
            .install(|| dispatch(cli))?,
        None => dispatch(cli)?,
    };
    let record = json!({
        "tool": "qaoa-lab",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cli.command.name(),
        "config": serde_json::to_value(cli).expect("config serializes"),
        "result": outcome.result,
    });
    let body = match cli.format {
        Format::Json => serde_json::to_string_pretty(&record).expect("record serializes") + "\n",
        Format::Csv => match &outcome.csv {
            Some(csv) => format!(
                "# qaoa-lab {} {}\n# config {}\n{csv}",
                env!("CARGO_PKG_VERSION"),
                cli.command.name(),
                record["config"]
            ),
            None => {
                return Err(crate::error::invalid("format", format!("csv is not available for {}", cli.command.name())))
            }
        },
    };
    if let Some(path) = &cli.out {
        fs::write(path, body)?;
        for (p, text) in &outcome.extra {
            fs::write(p, text)?;
        }
    }
    println!("{}", outcome.summary);
    Ok(if outcome.check_passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<CspInstance> {
    let text = read(path)?;
    let first = text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('c') && !l.starts_with('#'));
    if first.is_some_and(|l| l.starts_with("p cnf")) {
        CspInstance::parse_dimacs(&text)
    } else {
        CspInstance::parse(&text)
    }
}

fn sibling(out: &Option<PathBuf>, suffix: &str) -> Option<PathBuf> {
    out.as_ref().map(|p| {
        let mut s = p.clone().into_os_string();
        s.push(suffix);
        PathBuf::from(s)
    })
}

fn distribution_csv(n: usize, counts: Option<&[u64]>, probs: &[f64]) -> String {
    let mut out = String::from("z,bits,count,probability\n");
    for (z, p) in probs.iter().enumerate() {
        let c = counts.map_or(String::new(), |c| c[z].to_string());
        let _ = writeln!(out, "{z},{},{c},{p:.17e}", bits::format(z as u64, n));
    }
    out
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::QaoaOpt(a) => qaoa_opt(a),
        Command::QaoaSample(a) => qaoa_sample(a, cli.seed),
        Command::FourierCount(a) => fourier_count(a, &cli.out),
        Command::GroverCount(a) => grover_count(a),
        Command::Compile(a) => compile(a, &cli.out),
        Command::Verify(a) => verify(a),
        Command::AdiabaticSpectrum(a) => spectrum(a),
        Command::Pimc(a) => pimc(a, cli.seed),
        Command::Sqa(a) => sqa(a, cli.seed),
        Command::RejectSample(a) => reject(a, cli.seed),
        Command::Evolve(a) => evolve(a),
    }
}

fn qaoa_opt(a: &QaoaOptArgs) -> Result<Outcome> {
    if a.p == 0 {
        return Err(crate::error::invalid("p", "must be at least 1"));
    }
    let inst = load_instance(&a.instance)?;
    let (grid, grid_value) = qaoa::grid_search(&inst, a.resolution)?;
    let (angles, value) = qaoa::coordinate_optimize(&inst, a.p, &grid.padded(a.p)?, a.rounds)?;
    let c_max = inst.c_max()?;
    let mut csv = String::from("layer,gamma,beta\n");
    for (k, (g, b)) in angles.gammas().iter().zip(angles.betas()).enumerate() {
        let _ = writeln!(csv, "{},{g:.17e},{b:.17e}", k + 1);
    }
    Ok(Outcome::new(
        format!("objective {value:.12} (grid {grid_value:.12}, c_max {c_max})"),
        json!({
            "grid": {"gamma": grid.gammas()[0], "beta": grid.betas()[0], "objective": grid_value},
            "gammas": angles.gammas(),
            "betas": angles.betas(),
            "objective": value,
            "c_max": c_max,
            "ratio": value / c_max.max(1) as f64,
        }),
    )
    .csv(csv))
}

fn qaoa_sample(a: &QaoaSampleArgs, seed: u64) -> Result<Outcome> {
    if a.shots == 0 {
        return Err(crate::error::invalid("shots", "must be at least 1"));
    }
    if a.gamma.len() != a.p || a.beta.len() != a.p {
        return Err(crate::error::invalid(
            "p",
            format!("{} gammas and {} betas for p = {}", a.gamma.len(), a.beta.len(), a.p),
        ));
    }
    let inst = load_instance(&a.instance)?;
    let angles = Angles::new(a.gamma.clone(), a.beta.clone())?;
    let state = qaoa::build_state(&inst, &angles)?;
    let samples = state.sample(a.shots, seed)?;
    let dim = 1usize << inst.n();
    let mut counts = vec![0u64; dim];
    for z in &samples {
        counts[*z as usize] += 1;
    }
    let expectation = state.expectation_cost(&inst)?;
    let sample_mean = samples.iter().map(|&z| inst.cost_of(z) as f64).sum::<f64>() / a.shots as f64;
    let empirical = bits::empirical(&samples, dim);
    Ok(Outcome::new(
        format!("expectation {expectation:.12}, sample mean {sample_mean:.6}"),
        json!({
            "expectation": expectation,
            "sample_mean": sample_mean,
            "shots": a.shots,
            "counts": counts,
            "probabilities": state.probabilities(),
        }),
    )
    .csv(distribution_csv(inst.n(), Some(&counts), &empirical)))
}

fn fourier_count(a: &InstanceArg, out: &Option<PathBuf>) -> Result<Outcome> {
    let inst = load_instance(&a.instance)?;
    let series = MatrixElementSeries::compute(&inst)?;
    let hist = supremacy::recover_histogram(&series)?;
    let count = supremacy::fourier_count(&inst)?;
    let mut csv = String::from("r,re,im\n");
    for (r, e) in series.samples().iter().enumerate() {
        let _ = writeln!(csv, "{r},{:.17e},{:.17e}", e.re, e.im);
    }
    let mut hist_csv = String::from("v,p_v,count\n");
    for v in 0..=hist.m() {
        let _ = writeln!(hist_csv, "{v},{:.17e},{}", hist.probability(v), hist.count(v));
    }
    let mut o = Outcome::new(
        count.to_string(),
        json!({
            "count": count,
            "n": inst.n(),
            "m": inst.m(),
            "denominator": series.denominator(),
            "histogram": hist.counts(),
            "series": series.samples().iter().map(|e| [e.re, e.im]).collect::<Vec<_>>(),
        }),
    )
    .csv(csv);
    if let Some(p) = sibling(out, ".histogram.csv") {
        o.extra.push((p, hist_csv));
    }
    Ok(o)
}

fn grover_count(a: &OracleArgs) -> Result<Outcome> {
    let oracle = MarkedOracle::parse(&read(&a.oracle)?)?;
    let count = postsel::count_marked(&oracle)?;
    let pair = postsel::phase_overlap_state(&oracle)?;
    let majority = postsel::majority_test(&oracle)?;
    let distribution = postsel::grover_one_call(&oracle).ok();
    Ok(Outcome::new(
        count.to_string(),
        json!({
            "count": count,
            "k": oracle.k(),
            "domain": oracle.domain(),
            "cos_theta": pair.c(),
            "sin_theta": pair.s(),
            "majority": majority,
            "one_call_distribution": distribution,
        }),
    ))
}

fn compile(a: &CircuitArgs, out: &Option<PathBuf>) -> Result<Outcome> {
    let circuit = Circuit::parse(&read(&a.circuit)?)?;
    let compiled = compiler::compile(&circuit)?;
    let sidecar: Value = serde_json::from_str(&compiled.sidecar_json()).expect("sidecar is JSON");
    let mut o = Outcome::new(
        format!("{} qubits ({} auxiliary), {} clauses", compiled.n_total(), compiled.gadgets(), compiled.cost().m()),
        json!({"compiled": sidecar, "csp": compiled.cost_text()}),
    );
    if let Some(p) = sibling(out, ".csp") {
        o.extra.push((p, compiled.cost_text()));
    }
    if let Some(p) = sibling(out, ".sidecar.json") {
        o.extra.push((p, compiled.sidecar_json()));
    }
    Ok(o)
}

fn verify(a: &VerifyArgs) -> Result<Outcome> {
    if !(a.tol > 0.0) {
        return Err(crate::error::invalid("tol", format!("{} must be positive", a.tol)));
    }
    let circuit = Circuit::parse(&read(&a.circuit)?)?;
    let compiled = compiler::compile(&circuit)?;
    let report = compiler::verify_equivalence(&circuit, &compiled, a.tol)?;
    let mut o = Outcome::new(
        format!(
            "{}: tv {:.3e}, amplitude {:.3e}",
            if report.passed { "pass" } else { "FAIL" },
            report.tv_distance,
            report.amplitude_deviation
        ),
        serde_json::to_value(&report).expect("report serializes"),
    );
    o.check_passed = report.passed;
    Ok(o)
}

fn spectrum(a: &SpectrumArgs) -> Result<Outcome> {
    if a.points < 2 {
        return Err(crate::error::invalid("points", "must be at least 2"));
    }
    let inst = load_instance(&a.instance)?;
    let schedule: Vec<f64> = (0..a.points).map(|i| i as f64 / (a.points - 1) as f64).collect();
    let rows = adiabatic::spectrum_scan(&inst, &schedule)?;
    let ok = rows.iter().all(|r| r.stoquastic && (r.s >= 1.0 || r.gap > 0.0));
    let min_gap = rows.iter().filter(|r| r.s < 1.0).map(|r| r.gap).fold(f64::INFINITY, f64::min);
    let mut csv = String::from("s,ground_energy,gap,stoquastic\n");
    for r in &rows {
        let _ = writeln!(csv, "{},{:.17e},{:.17e},{}", r.s, r.ground_energy, r.gap, r.stoquastic);
    }
    let mut o = Outcome::new(
        format!("min gap {min_gap:.12} over s < 1, stoquastic {}", rows.iter().all(|r| r.stoquastic)),
        json!({"points": rows, "min_gap": min_gap}),
    )
    .csv(csv);
    o.check_passed = ok;
    Ok(o)
}

fn pimc_config(
    inst: &CspInstance,
    beta: f64,
    slices: Option<usize>,
    s: f64,
    sweeps: usize,
    seed: u64,
) -> Result<PimcConfig> {
    match slices {
        Some(l) => PimcConfig::new(beta, l, s, sweeps, seed),
        None => PimcConfig::with_default_slices(inst, beta, s, sweeps, seed),
    }
}

fn pimc(a: &PimcArgs, seed: u64) -> Result<Outcome> {
    let inst = load_instance(&a.instance)?;
    let config = pimc_config(&inst, a.beta, a.slices, a.s, a.sweeps, seed)?.with_chains(a.chains)?;
    let r = adiabatic::pimc_sample(&inst, &config)?;
    let (tv_ground, tv_gibbs) = if inst.n() <= adiabatic::DENSE_LIMIT {
        let g = adiabatic::ground_state(&inst, a.s)?.ground_state.probabilities();
        let gibbs = adiabatic::gibbs_distribution(&inst, a.s, a.beta)?;
        (Some(bits::tv_distance(&r.distribution, &g)), Some(bits::tv_distance(&r.distribution, &gibbs)))
    } else {
        (None, None)
    };
    Ok(Outcome::new(
        format!(
            "acceptance {:.4}, tv to ground state {}",
            r.acceptance_rate,
            tv_ground.map_or("n/a".into(), |t| format!("{t:.4}"))
        ),
        json!({
            "slices": config.slices,
            "pimc": r,
            "tv_to_ground_state": tv_ground,
            "tv_to_gibbs": tv_gibbs,
        }),
    )
    .csv(distribution_csv(inst.n(), Some(&r.counts), &r.distribution)))
}

fn sqa(a: &SqaArgs, seed: u64) -> Result<Outcome> {
    if a.steps == 0 {
        return Err(crate::error::invalid("steps", "must be at least 1"));
    }
    let inst = load_instance(&a.instance)?;
    let config = PimcConfig::new(a.beta, a.slices, 0.0, a.sweeps_per_step, seed)?;
    let schedule: Vec<f64> = if a.steps == 1 {
        vec![0.0]
    } else {
        (0..a.steps).map(|i| a.s_max * i as f64 / (a.steps - 1) as f64).collect()
    };
    let r = adiabatic::sqa_anneal(&inst, &schedule, a.sweeps_per_step, &config)?;
    let mut csv = String::from("step,s,acceptance_rate,mean_cost,best_cost\n");
    for (i, t) in r.trajectory.iter().enumerate() {
        let _ = writeln!(csv, "{i},{:.17e},{:.17e},{:.17e},{}", t.s, t.acceptance_rate, t.mean_cost, t.best_cost);
    }
    Ok(Outcome::new(
        format!("best cost {} at {}", r.best_cost, bits::format(r.best_z, inst.n())),
        json!({"best_z": bits::format(r.best_z, inst.n()), "best_cost": r.best_cost, "trajectory": r.trajectory}),
    )
    .csv(csv))
}

fn reject(a: &RejectArgs, seed: u64) -> Result<Outcome> {
    if a.samples == 0 {
        return Err(crate::error::invalid("samples", "must be at least 1"));
    }
    let inst = load_instance(&a.instance)?;
    let config = PimcConfig::new(a.beta, a.slices, a.s, 1, seed)?;
    let sampler = RejectionSampler::new(&inst, &config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(a.samples);
    let mut csv = String::from("sample,z,slices,attempts\n");
    let mut total = 0u64;
    for i in 0..a.samples {
        let (w, attempts) = sampler.sample(&mut rng, a.max_attempts)?;
        total += attempts;
        let slices: Vec<String> = w.slices().iter().map(|&x| bits::format(x, inst.n())).collect();
        let _ = writeln!(csv, "{i},{},{},{attempts}", bits::format(w.z(), inst.n()), slices.join(" "));
        rows.push(json!({"z": bits::format(w.z(), inst.n()), "slices": slices, "attempts": attempts}));
    }
    Ok(Outcome::new(
        format!("{} samples, {:.1} attempts each on average", a.samples, total as f64 / a.samples as f64),
        json!({"log_w_max": sampler.log_bound(), "samples": rows, "total_attempts": total}),
    )
    .csv(csv))
}

fn evolve(a: &EvolveArgs) -> Result<Outcome> {
    let inst = load_instance(&a.instance)?;
    let state: StateVector = adiabatic::adiabatic_evolve(&inst, a.total_time, a.dt)?;
    let fidelity = adiabatic::ground_space_fidelity(&inst, &state)?;
    let maximizers: Vec<String> = inst.maximizers()?.into_iter().map(|z| bits::format(z, inst.n())).collect();
    Ok(Outcome::new(
        format!("ground-space fidelity {fidelity:.12}"),
        json!({
            "fidelity": fidelity,
            "norm": state.norm_sqr().sqrt(),
            "maximizers": maximizers,
            "probabilities": state.probabilities(),
        }),
    )
    .csv(state.to_csv()))
}
