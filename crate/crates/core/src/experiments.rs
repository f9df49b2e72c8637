//! Seeded drivers for the numerical studies: initial-gradient scaling, VQE traces,
//! surrogate cost sweeps, truncation-threshold statistics and cancellation counts.
//!
//! Every run draws from its own ChaCha8 stream derived by hashing the master seed,
//! a stream label, the qubit count and the run index. Runs go through rayon and
//! rows are sorted afterwards, so output does not depend on the thread count.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuit::{build_ansatz, lce_transform, AnsatzSpec, Circuit, Family};
use crate::clifford_eval::{gradient_at_zero, PauliObservable, ShiftCache};
use crate::error::{Error, Result};
use crate::lce::{cancellation_study, construct_lce, CancellationConfig, LcePair};
use crate::pauli::PauliString;
use crate::statevector::{self, DEFAULT_MAX_QUBITS};
use crate::surrogate::{build_surrogate_with, worst_case_threshold, SurrogateBudget};
use crate::table::Table;

/// Independent stream for `(label, n_qubits, run)` under `master`.
pub fn run_rng(master: u64, label: &str, n_qubits: usize, run: u64) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update((label.len() as u64).to_le_bytes());
    h.update(label.as_bytes());
    h.update((n_qubits as u64).to_le_bytes());
    h.update(run.to_le_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// Layer count, either fixed or equal to the qubit count (`"N"`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Layers {
    Fixed(usize),
    Named(LayerName),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LayerName {
    N,
}

impl Layers {
    pub fn resolve(self, n_qubits: usize) -> usize {
        match self {
            Layers::Fixed(l) => l,
            Layers::Named(LayerName::N) => n_qubits,
        }
    }
}

/// Ansatz family swept over a list of qubit counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzGrid {
    pub family: Family,
    pub n_qubits: Vec<usize>,
    pub layers: Layers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableModel {
    SinglePauli,
    Unweighted(usize),
    Weighted(usize),
    #[serde(rename = "global_Z")]
    GlobalZ,
    Heisenberg,
}

impl ObservableModel {
    pub fn sample<R: Rng + ?Sized>(self, n_qubits: usize, rng: &mut R) -> Result<PauliObservable> {
        match self {
            ObservableModel::SinglePauli => {
                PauliObservable::single(PauliString::random_nonidentity(n_qubits, rng)?)
            }
            ObservableModel::Unweighted(t) => PauliObservable::random(n_qubits, t, false, rng),
            ObservableModel::Weighted(t) => PauliObservable::random(n_qubits, t, true, rng),
            ObservableModel::GlobalZ => PauliObservable::global_z(n_qubits),
            ObservableModel::Heisenberg => PauliObservable::heisenberg_chain(n_qubits),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatchDistribution {
    Gaussian,
    Uniform,
}

/// Initialization region around θ = 0. Exactly one of `exponent` (σ = D^{-r}) and
/// `sigma` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Patch {
    pub distribution: PatchDistribution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

impl Patch {
    pub fn gaussian_exponent(r: f64) -> Self {
        Patch {
            distribution: PatchDistribution::Gaussian,
            exponent: Some(r),
            sigma: None,
        }
    }

    pub fn sigma(&self, d: usize) -> Result<f64> {
        let s = match (self.exponent, self.sigma) {
            (Some(r), None) => (d.max(1) as f64).powf(-r),
            (None, Some(s)) => s,
            _ => {
                return Err(Error::Config(
                    "patch needs exactly one of exponent and sigma".into(),
                ))
            }
        };
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Config(format!(
                "patch width must be positive, got {s}"
            )));
        }
        Ok(s)
    }

    pub fn sample<R: Rng + ?Sized>(&self, d: usize, rng: &mut R) -> Result<Vec<f64>> {
        let s = self.sigma(d)?;
        Ok(sample_theta(self.distribution, s, d, rng))
    }
}

fn sample_theta<R: Rng + ?Sized>(
    dist: PatchDistribution,
    sigma: f64,
    d: usize,
    rng: &mut R,
) -> Vec<f64> {
    match dist {
        PatchDistribution::Gaussian => {
            let n = Normal::new(0.0, sigma).expect("sigma is positive");
            (0..d).map(|_| n.sample(rng)).collect()
        }
        PatchDistribution::Uniform => (0..d).map(|_| rng.random_range(-sigma..=sigma)).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexPolicy {
    /// Uniform `k` over parameters and `i0` over terms, drawn from the run stream.
    #[default]
    Random,
    Fixed {
        k: usize,
        i0: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LceMode {
    Off,
    On,
    /// Every run is done twice, with and without the encoder, on the same draws.
    #[default]
    Both,
}

impl LceMode {
    fn flags(self) -> &'static [bool] {
        match self {
            LceMode::Off => &[false],
            LceMode::On => &[true],
            LceMode::Both => &[false, true],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LceSetting {
    #[serde(default)]
    pub mode: LceMode,
    #[serde(default)]
    pub policy: IndexPolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shots {
    #[default]
    Exact,
    Count(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default)]
    pub shots: Shots,
}

fn default_eta() -> f64 {
    0.01
}

fn default_iterations() -> usize {
    300
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            eta: default_eta(),
            iterations: default_iterations(),
            shots: Shots::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub master: u64,
    #[serde(default = "default_runs")]
    pub runs: u64,
}

fn default_runs() -> u64 {
    1
}

fn default_cap() -> usize {
    DEFAULT_MAX_QUBITS
}

/// Shared configuration for the gradient-scaling and VQE drivers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub ansatz: AnsatzGrid,
    pub observable_model: ObservableModel,
    /// `None` means θ = 0.
    #[serde(default)]
    pub patch: Option<Patch>,
    #[serde(default)]
    pub lce: LceSetting,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    pub seeds: Seeds,
    #[serde(default = "default_cap")]
    pub max_qubits: usize,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(s).map_err(|e| config_error(&e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ansatz.n_qubits.is_empty() {
            return Err(Error::Config("ansatz.n_qubits is empty".into()));
        }
        for &n in &self.ansatz.n_qubits {
            let spec = self.spec(n, 0);
            if n < 2 {
                return Err(Error::Config(format!("need at least 2 qubits, got {n}")));
            }
            if spec.layers == 0 {
                return Err(Error::Config("need at least one layer".into()));
            }
            if let Some(p) = &self.patch {
                p.sigma(spec.n_params())?;
            }
        }
        if self.optimizer.iterations == 0 {
            return Err(Error::Config(
                "optimizer.iterations must be at least 1".into(),
            ));
        }
        if !self.optimizer.eta.is_finite() {
            return Err(Error::Config("optimizer.eta must be finite".into()));
        }
        if self.optimizer.shots == Shots::Count(0) {
            return Err(Error::Config("shot count must be at least 1".into()));
        }
        if self.seeds.runs == 0 {
            return Err(Error::Config("seeds.runs must be at least 1".into()));
        }
        if let ObservableModel::Unweighted(0) | ObservableModel::Weighted(0) = self.observable_model
        {
            return Err(Error::Config("observable needs at least one term".into()));
        }
        Ok(())
    }

    fn spec(&self, n: usize, seed: u64) -> AnsatzSpec {
        AnsatzSpec {
            family: self.ansatz.family,
            n_qubits: n,
            layers: self.ansatz.layers.resolve(n),
            seed,
        }
    }

    fn check_cap(&self, n: usize) -> Result<()> {
        if n > self.max_qubits {
            return Err(Error::Resource {
                message: format!(
                    "{n} qubits exceeds the statevector cap of {}",
                    self.max_qubits
                ),
                log_estimate: n as f64 * 2f64.ln(),
            });
        }
        Ok(())
    }
}

/// Serde errors carry a line and column; keep them in the message.
pub fn config_error(e: &serde_json::Error) -> Error {
    Error::Config(format!("line {} column {}: {e}", e.line(), e.column()))
}

/// All random draws for one run. The encoded circuit shares parameters with `circuit`.
#[derive(Debug, Clone)]
pub struct RunInstance {
    pub circuit: Circuit,
    pub observable: PauliObservable,
    pub theta: Vec<f64>,
    pub pair: LcePair,
    pub encoded: Circuit,
}

impl RunInstance {
    pub fn circuit_for(&self, lce: bool) -> &Circuit {
        if lce {
            &self.encoded
        } else {
            &self.circuit
        }
    }
}

pub fn instantiate(cfg: &ExperimentConfig, n: usize, run: u64) -> Result<RunInstance> {
    let master = cfg.seeds.master;
    let seed: u64 = run_rng(master, "circuit", n, run).random();
    let circuit = build_ansatz(&cfg.spec(n, seed))?;
    let observable = cfg
        .observable_model
        .sample(n, &mut run_rng(master, "observable", n, run))?;
    let d = circuit.n_params();
    let theta = match &cfg.patch {
        Some(p) => p.sample(d, &mut run_rng(master, "theta", n, run))?,
        None => vec![0.0; d],
    };
    let (k, i0) = match cfg.lce.policy {
        IndexPolicy::Random => {
            let mut rng = run_rng(master, "lce", n, run);
            (
                rng.random_range(0..d),
                rng.random_range(0..observable.terms().len()),
            )
        }
        IndexPolicy::Fixed { k, i0 } => {
            if k >= d || i0 >= observable.terms().len() {
                return Err(Error::Config(format!(
                    "fixed LCE indices (k={k}, i0={i0}) out of range"
                )));
            }
            (k, i0)
        }
    };
    let pair = construct_lce(&circuit, &observable, k, i0)?;
    let encoded = lce_transform(&circuit, &pair)?;
    Ok(RunInstance {
        circuit,
        observable,
        theta,
        pair,
        encoded,
    })
}

fn jobs(cfg: &ExperimentConfig) -> Vec<(usize, u64)> {
    cfg.ansatz
        .n_qubits
        .iter()
        .flat_map(|&n| (0..cfg.seeds.runs).map(move |r| (n, r)))
        .collect()
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradRow {
    pub n_qubits: usize,
    pub run: u64,
    pub lce: bool,
    pub grad_norm: f64,
}

/// Gradient norms at θ = 0 (stabilizer arithmetic) or on a sampled patch (statevector).
pub fn gradient_scaling(cfg: &ExperimentConfig) -> Result<Vec<GradRow>> {
    cfg.validate()?;
    if cfg.patch.is_some() {
        for &n in &cfg.ansatz.n_qubits {
            cfg.check_cap(n)?;
        }
    }
    let per_run: Vec<Vec<GradRow>> = jobs(cfg)
        .into_par_iter()
        .map(|(n, run)| {
            let inst = instantiate(cfg, n, run)?;
            cfg.lce
                .mode
                .flags()
                .iter()
                .map(|&lce| {
                    let c = inst.circuit_for(lce);
                    let g = match cfg.patch {
                        None => gradient_at_zero(c, &inst.observable)?,
                        Some(_) => {
                            statevector::adjoint_gradient(c, &inst.observable, &inst.theta)?.1
                        }
                    };
                    Ok(GradRow {
                        n_qubits: n,
                        run,
                        lce,
                        grad_norm: l2(&g),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<GradRow> = per_run.into_iter().flatten().collect();
    rows.sort_by_key(|r| (r.n_qubits, r.run, r.lce));
    Ok(rows)
}

pub fn grad_scaling_table(rows: &[GradRow]) -> Table {
    let mut t = Table::new(["N", "run", "lce", "grad_norm"]);
    for r in rows {
        t.push(vec![
            r.n_qubits.into(),
            r.run.into(),
            r.lce.into(),
            r.grad_norm.into(),
        ]);
    }
    t
}

/// Per-iteration record of one optimization, entry 0 being the initial point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeTrace {
    pub cost: Vec<f64>,
    pub grad_norm: Vec<f64>,
    pub theta_l2: Vec<f64>,
    pub theta_l1: Vec<f64>,
    pub final_theta: Vec<f64>,
}

impl VqeTrace {
    pub fn len(&self) -> usize {
        self.cost.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cost.is_empty()
    }

    pub fn final_cost(&self) -> f64 {
        *self
            .cost
            .last()
            .expect("trace has at least the initial point")
    }
}

/// Vanilla gradient descent from the run's sampled θ. The recorded cost is exact
/// even when gradients are shot-sampled.
pub fn vqe_run(cfg: &ExperimentConfig, n: usize, run: u64, lce: bool) -> Result<VqeTrace> {
    cfg.validate()?;
    cfg.check_cap(n)?;
    let inst = instantiate(cfg, n, run)?;
    let c = inst.circuit_for(lce);
    let obs = &inst.observable;
    let mut theta = inst.theta.clone();
    let mut shot_rng = run_rng(
        cfg.seeds.master,
        if lce { "shots-lce" } else { "shots" },
        n,
        run,
    );
    let iters = cfg.optimizer.iterations;
    let mut trace = VqeTrace {
        cost: Vec::with_capacity(iters + 1),
        grad_norm: Vec::with_capacity(iters + 1),
        theta_l2: Vec::with_capacity(iters + 1),
        theta_l1: Vec::with_capacity(iters + 1),
        final_theta: Vec::new(),
    };
    for t in 0..=iters {
        let (value, grad) = match cfg.optimizer.shots {
            Shots::Exact => statevector::adjoint_gradient(c, obs, &theta)?,
            Shots::Count(s) => {
                let value = statevector::cost(c, obs, &theta)?;
                (
                    value,
                    statevector::sampled_gradient(c, obs, &theta, s, &mut shot_rng)?,
                )
            }
        };
        let gn = l2(&grad);
        if !value.is_finite() || !gn.is_finite() {
            return Err(Error::Divergence(format!(
                "N={n} run={run} lce={lce}: cost {value}, gradient norm {gn} at iteration {t}"
            )));
        }
        trace.cost.push(value);
        trace.grad_norm.push(gn);
        trace.theta_l2.push(l2(&theta));
        trace.theta_l1.push(l1(&theta));
        if t < iters {
            for (x, g) in theta.iter_mut().zip(&grad) {
                *x -= cfg.optimizer.eta * g;
            }
        }
    }
    trace.final_theta = theta;
    Ok(trace)
}

/// `vqe_run` on the nearest-neighbour Heisenberg chain.
pub fn heisenberg_vqe(cfg: &ExperimentConfig, n: usize, run: u64, lce: bool) -> Result<VqeTrace> {
    if n < 2 {
        return Err(Error::Config(
            "the Heisenberg chain needs at least 2 qubits".into(),
        ));
    }
    let cfg = ExperimentConfig {
        observable_model: ObservableModel::Heisenberg,
        ..cfg.clone()
    };
    vqe_run(&cfg, n, run, lce)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeResult {
    pub n_qubits: usize,
    pub run: u64,
    pub lce: bool,
    pub trace: VqeTrace,
}

/// Every `(N, run, lce)` combination of the config.
pub fn vqe_experiment(cfg: &ExperimentConfig) -> Result<Vec<VqeResult>> {
    cfg.validate()?;
    for &n in &cfg.ansatz.n_qubits {
        cfg.check_cap(n)?;
    }
    let work: Vec<(usize, u64, bool)> = jobs(cfg)
        .into_iter()
        .flat_map(|(n, r)| cfg.lce.mode.flags().iter().map(move |&l| (n, r, l)))
        .collect();
    let mut out: Vec<VqeResult> = work
        .into_par_iter()
        .map(|(n, run, lce)| {
            Ok(VqeResult {
                n_qubits: n,
                run,
                lce,
                trace: vqe_run(cfg, n, run, lce)?,
            })
        })
        .collect::<Result<_>>()?;
    out.sort_by_key(|r| (r.n_qubits, r.run, r.lce));
    Ok(out)
}

pub fn vqe_table(results: &[VqeResult]) -> Table {
    let mut t = Table::new([
        "N",
        "run",
        "lce",
        "iteration",
        "cost",
        "grad_norm",
        "theta_l2",
        "theta_l1",
    ]);
    for r in results {
        let tr = &r.trace;
        for i in 0..tr.len() {
            t.push(vec![
                r.n_qubits.into(),
                r.run.into(),
                r.lce.into(),
                i.into(),
                tr.cost[i].into(),
                tr.grad_norm[i].into(),
                tr.theta_l2[i].into(),
                tr.theta_l1[i].into(),
            ]);
        }
    }
    t
}

/// Mean final cost over runs, split by encoder flag: `(without, with)`.
pub fn mean_final_costs(results: &[VqeResult]) -> (f64, f64) {
    let mean = |lce: bool| {
        let v: Vec<f64> = results
            .iter()
            .filter(|r| r.lce == lce)
            .map(|r| r.trace.final_cost())
            .collect();
        v.iter().sum::<f64>() / v.len().max(1) as f64
    };
    (mean(false), mean(true))
}

/// Surrogate construction cost across families and sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexitySweepConfig {
    #[serde(default = "default_families")]
    pub families: Vec<Family>,
    pub n_qubits: Vec<usize>,
    #[serde(default = "default_one")]
    pub layers: usize,
    /// Highest Taylor order kept; the surrogate covers `‖α‖₁ ≤ order`.
    pub orders: Vec<u32>,
    pub seeds: Seeds,
    #[serde(default = "default_max_indices")]
    pub max_indices: u64,
}

fn default_families() -> Vec<Family> {
    vec![Family::MHea, Family::FHea]
}

fn default_one() -> usize {
    1
}

fn default_max_indices() -> u64 {
    5_000_000
}

impl ComplexitySweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() || self.n_qubits.is_empty() || self.orders.is_empty() {
            return Err(Error::Config(
                "families, n_qubits and orders must be non-empty".into(),
            ));
        }
        if self.n_qubits.iter().any(|&n| n < 2) || self.layers == 0 || self.seeds.runs == 0 {
            return Err(Error::Config(
                "need N >= 2, at least one layer and one run".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityRow {
    pub family: Family,
    pub n_qubits: usize,
    pub order: u32,
    pub run: u64,
    pub n_params: usize,
    pub eval_count: u64,
    pub wall_time_s: f64,
    /// Skipped because the index budget would be exceeded.
    pub flagged: bool,
}

pub fn surrogate_complexity_sweep(cfg: &ComplexitySweepConfig) -> Result<Vec<ComplexityRow>> {
    cfg.validate()?;
    let mut work = Vec::new();
    for &family in &cfg.families {
        for &n in &cfg.n_qubits {
            for &order in &cfg.orders {
                for run in 0..cfg.seeds.runs {
                    work.push((family, n, order, run));
                }
            }
        }
    }
    let budget = SurrogateBudget {
        max_indices: cfg.max_indices as u128,
    };
    let mut rows: Vec<ComplexityRow> = work
        .into_par_iter()
        .map(|(family, n, order, run)| {
            let seed: u64 = run_rng(cfg.seeds.master, "circuit", n, run).random();
            let c = build_ansatz(&AnsatzSpec {
                family,
                n_qubits: n,
                layers: cfg.layers,
                seed,
            })?;
            let obs = ObservableModel::SinglePauli
                .sample(n, &mut run_rng(cfg.seeds.master, "observable", n, run))?;
            let cache = ShiftCache::new();
            let start = Instant::now();
            let built = build_surrogate_with(&c, &obs, order + 1, budget, &cache);
            let wall_time_s = start.elapsed().as_secs_f64();
            let (eval_count, flagged) = match built {
                Ok(s) => (s.n_clifford_evals(), false),
                Err(Error::Resource { .. }) => (0, true),
                Err(e) => return Err(e),
            };
            Ok(ComplexityRow {
                family,
                n_qubits: n,
                order,
                run,
                n_params: c.n_params(),
                eval_count,
                wall_time_s,
                flagged,
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by_key(|r| (r.family as u8, r.n_qubits, r.order, r.run));
    Ok(rows)
}

fn family_name(f: Family) -> &'static str {
    match f {
        Family::MHea => "mHEA",
        Family::FHea => "fHEA",
        Family::RPqc => "rPQC",
    }
}

/// Deterministic columns only; wall times go through `complexity_timing_table`.
pub fn complexity_table(rows: &[ComplexityRow]) -> Table {
    let mut t = Table::new(["family", "N", "m", "run", "D", "eval_count", "flagged"]);
    for r in rows {
        t.push(vec![
            family_name(r.family).into(),
            r.n_qubits.into(),
            (r.order as u64).into(),
            r.run.into(),
            r.n_params.into(),
            r.eval_count.into(),
            r.flagged.into(),
        ]);
    }
    t
}

pub fn complexity_timing_table(rows: &[ComplexityRow]) -> Table {
    let mut t = Table::new(["family", "N", "m", "run", "wall_time"]);
    for r in rows {
        t.push(vec![
            family_name(r.family).into(),
            r.n_qubits.into(),
            (r.order as u64).into(),
            r.run.into(),
            r.wall_time_s.into(),
        ]);
    }
    t
}

/// Mean fHEA eval count over mean mHEA eval count for each `(N, order)` present in both.
pub fn eval_count_ratios(rows: &[ComplexityRow]) -> Vec<(usize, u32, f64)> {
    let mean = |family: Family, n: usize, order: u32| {
        let v: Vec<f64> = rows
            .iter()
            .filter(|r| r.family == family && r.n_qubits == n && r.order == order && !r.flagged)
            .map(|r| r.eval_count as f64)
            .collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    let mut keys: Vec<(usize, u32)> = rows.iter().map(|r| (r.n_qubits, r.order)).collect();
    keys.sort_unstable();
    keys.dedup();
    keys.into_iter()
        .filter_map(
            |(n, o)| match (mean(Family::FHea, n, o), mean(Family::MHea, n, o)) {
                (Some(f), Some(m)) if m > 0.0 => Some((n, o, f / m)),
                _ => None,
            },
        )
        .collect()
}

/// Expected truncation thresholds over a grid of sizes and patch exponents, with the
/// parameter count modelled as `D = 2N(N+1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub n_qubits: Vec<usize>,
    pub exponents: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_distribution")]
    pub distribution: PatchDistribution,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_norm")]
    pub norm: f64,
    pub seed: u64,
}

fn default_samples() -> usize {
    32
}

fn default_distribution() -> PatchDistribution {
    PatchDistribution::Gaussian
}

fn default_epsilon() -> f64 {
    1e-6
}

fn default_norm() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub n_qubits: usize,
    pub n_params: usize,
    pub exponent: f64,
    pub expected_m: f64,
}

pub fn threshold_phase_diagram(cfg: &ThresholdConfig) -> Result<Vec<ThresholdRow>> {
    if cfg.n_qubits.is_empty() || cfg.exponents.is_empty() || cfg.samples == 0 {
        return Err(Error::Config(
            "n_qubits, exponents and samples must be non-empty".into(),
        ));
    }
    let work: Vec<(usize, usize)> = cfg
        .n_qubits
        .iter()
        .flat_map(|&n| (0..cfg.exponents.len()).map(move |j| (n, j)))
        .collect();
    let mut rows: Vec<ThresholdRow> = work
        .into_par_iter()
        .map(|(n, j)| {
            let r = cfg.exponents[j];
            let d = 2 * n * (n + 1);
            let sigma = (d as f64).powf(-r);
            let mut rng = run_rng(cfg.seed, &format!("threshold-{j}"), n, 0);
            let mut total = 0.0;
            for _ in 0..cfg.samples {
                let theta = sample_theta(cfg.distribution, sigma, d, &mut rng);
                total += worst_case_threshold(l1(&theta), cfg.norm, cfg.epsilon)? as f64;
            }
            Ok(ThresholdRow {
                n_qubits: n,
                n_params: d,
                exponent: r,
                expected_m: total / cfg.samples as f64,
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| {
        (a.n_qubits, a.exponent)
            .partial_cmp(&(b.n_qubits, b.exponent))
            .expect("finite exponents")
    });
    Ok(rows)
}

pub fn threshold_table(rows: &[ThresholdRow]) -> Table {
    let mut t = Table::new(["N", "D", "r", "expected_m"]);
    for r in rows {
        t.push(vec![
            r.n_qubits.into(),
            r.n_params.into(),
            r.exponent.into(),
            r.expected_m.into(),
        ]);
    }
    t
}

/// Least-squares slope of `ln E[m]` against `ln D` for each exponent.
pub fn fit_slopes(rows: &[ThresholdRow]) -> Vec<(f64, f64)> {
    let mut exps: Vec<f64> = rows.iter().map(|r| r.exponent).collect();
    exps.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    exps.dedup();
    exps.into_iter()
        .map(|r| {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|row| row.exponent == r)
                .map(|row| ((row.n_params as f64).ln(), row.expected_m.ln()))
                .collect();
            let k = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            (r, if sxx > 0.0 { sxy / sxx } else { 0.0 })
        })
        .collect()
}

/// Cancellation counts at several sizes, one derived stream per size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CancellationSweepConfig {
    pub n_qubits: Vec<usize>,
    pub n_terms: usize,
    pub n_trials: usize,
    #[serde(default = "default_cancel_family")]
    pub family: Family,
    #[serde(default = "default_one")]
    pub layers: usize,
    pub seed: u64,
}

fn default_cancel_family() -> Family {
    Family::MHea
}

pub fn cancellation_sweep(cfg: &CancellationSweepConfig) -> Result<Table> {
    if cfg.n_qubits.is_empty() {
        return Err(Error::Config("n_qubits is empty".into()));
    }
    let mut reports: Vec<_> = cfg
        .n_qubits
        .par_iter()
        .map(|&n| {
            let c = CancellationConfig {
                n_qubits: n,
                n_terms: cfg.n_terms,
                n_trials: cfg.n_trials,
                family: cfg.family,
                layers: cfg.layers,
            };
            cancellation_study(&c, &mut run_rng(cfg.seed, "cancellation", n, 0))
        })
        .collect::<Result<_>>()?;
    reports.sort_by_key(|r| r.n_qubits);
    let mut t = Table::new(["N", "n_terms", "n_trials", "n_exact", "frequency"]);
    for r in reports {
        t.push(vec![
            r.n_qubits.into(),
            r.n_terms.into(),
            r.n_trials.into(),
            r.n_exact.into(),
            r.frequency.into(),
        ]);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(json: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(json).unwrap()
    }

    const SMALL: &str = r#"{
        "ansatz": {"family": "mHEA", "n_qubits": [3, 4], "layers": "N"},
        "observable_model": "single_pauli",
        "seeds": {"master": 5, "runs": 3}
    }"#;

    #[test]
    fn config_defaults_and_layers() {
        let cfg = base(SMALL);
        assert_eq!(cfg.ansatz.layers.resolve(7), 7);
        assert_eq!(cfg.optimizer.iterations, 300);
        assert_eq!(cfg.lce.mode, LceMode::Both);
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&json).unwrap(), cfg);
    }

    #[test]
    fn observable_model_spelling() {
        let m: ObservableModel = serde_json::from_str(r#"{"weighted": 3}"#).unwrap();
        assert_eq!(m, ObservableModel::Weighted(3));
        let m: ObservableModel = serde_json::from_str(r#""global_Z""#).unwrap();
        assert_eq!(m, ObservableModel::GlobalZ);
    }

    #[test]
    fn invalid_configs_rejected() {
        let bad_sigma = SMALL.replace(
            "\"seeds\"",
            "\"patch\": {\"distribution\": \"gaussian\", \"sigma\": 0.0}, \"seeds\"",
        );
        assert!(matches!(
            ExperimentConfig::from_json(&bad_sigma),
            Err(Error::Config(_))
        ));
        let zero_iter = SMALL.replace("\"seeds\"", "\"optimizer\": {\"iterations\": 0}, \"seeds\"");
        assert!(matches!(
            ExperimentConfig::from_json(&zero_iter),
            Err(Error::Config(_))
        ));
        let err = ExperimentConfig::from_json("{\n  \"ansatz\": 3\n}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn zero_patch_lce_rows_are_at_least_one() {
        let rows = gradient_scaling(&base(SMALL)).unwrap();
        assert_eq!(rows.len(), 2 * 3 * 2);
        for r in rows.iter().filter(|r| r.lce) {
            assert!(r.grad_norm >= 1.0, "{r:?}");
        }
        assert_eq!(rows, gradient_scaling(&base(SMALL)).unwrap());
    }

    #[test]
    fn patch_mode_respects_cap() {
        let mut cfg = base(SMALL);
        cfg.patch = Some(Patch::gaussian_exponent(0.5));
        cfg.max_qubits = 3;
        assert!(matches!(
            gradient_scaling(&cfg),
            Err(Error::Resource { .. })
        ));
        cfg.max_qubits = 4;
        assert_eq!(gradient_scaling(&cfg).unwrap().len(), 12);
    }

    #[test]
    fn vqe_trace_shape_and_descent() {
        let mut cfg = base(SMALL);
        cfg.observable_model = ObservableModel::GlobalZ;
        cfg.patch = Some(Patch::gaussian_exponent(0.5));
        cfg.optimizer.iterations = 20;
        cfg.optimizer.eta = 0.1;
        let tr = vqe_run(&cfg, 3, 0, true).unwrap();
        assert_eq!(tr.len(), 21);
        assert!(tr.final_cost() < tr.cost[0]);
        assert_eq!(tr, vqe_run(&cfg, 3, 0, true).unwrap());
    }

    #[test]
    fn sampled_vqe_runs() {
        let mut cfg = base(SMALL);
        cfg.patch = Some(Patch::gaussian_exponent(1.0));
        cfg.optimizer = OptimizerConfig {
            eta: 0.05,
            iterations: 3,
            shots: Shots::Count(100),
        };
        let tr = vqe_run(&cfg, 3, 1, false).unwrap();
        assert_eq!(tr.grad_norm.len(), 4);
    }

    #[test]
    fn divergence_is_reported() {
        let mut cfg = base(SMALL);
        cfg.observable_model = ObservableModel::GlobalZ;
        cfg.patch = Some(Patch::gaussian_exponent(0.5));
        cfg.optimizer.eta = f64::MAX;
        cfg.optimizer.iterations = 3;
        assert!(matches!(
            vqe_run(&cfg, 3, 0, true),
            Err(Error::Divergence(_))
        ));
    }

    #[test]
    fn heisenberg_term_count() {
        let obs = ObservableModel::Heisenberg
            .sample(12, &mut run_rng(0, "x", 12, 0))
            .unwrap();
        assert_eq!(obs.terms().len(), 33);
    }

    #[test]
    fn complexity_sweep_linear_at_first_order() {
        let cfg = ComplexitySweepConfig {
            families: vec![Family::MHea],
            n_qubits: vec![3, 4],
            layers: 1,
            orders: vec![1],
            seeds: Seeds { master: 1, runs: 1 },
            max_indices: 1_000_000,
        };
        let rows = surrogate_complexity_sweep(&cfg).unwrap();
        // Zero shift plus one quarter and three quarter turn per parameter.
        for r in &rows {
            assert_eq!(r.eval_count, 1 + 2 * r.n_params as u64);
        }
    }

    #[test]
    fn complexity_budget_flags() {
        let cfg = ComplexitySweepConfig {
            families: vec![Family::FHea],
            n_qubits: vec![4],
            layers: 1,
            orders: vec![3],
            seeds: Seeds { master: 1, runs: 1 },
            max_indices: 10,
        };
        assert!(surrogate_complexity_sweep(&cfg).unwrap()[0].flagged);
    }

    #[test]
    fn slope_fit_recovers_power_law() {
        let rows: Vec<ThresholdRow> = [10usize, 100, 1000]
            .iter()
            .map(|&d| ThresholdRow {
                n_qubits: d,
                n_params: d,
                exponent: 0.5,
                expected_m: 3.0 * (d as f64).powf(0.7),
            })
            .collect();
        let (_, s) = fit_slopes(&rows)[0];
        assert!((s - 0.7).abs() < 1e-12);
    }

    #[test]
    fn run_streams_differ() {
        let a: u64 = run_rng(1, "theta", 4, 0).random();
        let b: u64 = run_rng(1, "theta", 4, 1).random();
        let c: u64 = run_rng(1, "lce", 4, 0).random();
        assert!(a != b && a != c);
    }
}
