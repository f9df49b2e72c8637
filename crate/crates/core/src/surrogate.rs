//! Truncated Taylor surrogates `C_m(θ) = Σ_{‖α‖₁<m} (D^α C)(0) θ^α / α!` built from
//! quarter-turn parameter shifts, plus truncation thresholds and cost estimates.

use std::collections::BTreeMap;
use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::clifford_eval::{cost_at_shift, PauliObservable, ShiftCache, ShiftVector};
use crate::error::{Error, Result};

/// Sparse multi-index: parameter index -> positive exponent, sorted by index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    entries: Vec<(usize, u32)>,
}

impl MultiIndex {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn unit(k: usize) -> Self {
        MultiIndex {
            entries: vec![(k, 1)],
        }
    }

    /// Zero exponents are dropped; repeated indices add up.
    pub fn from_pairs<I: IntoIterator<Item = (usize, u32)>>(pairs: I) -> Self {
        let mut m = BTreeMap::new();
        for (k, e) in pairs {
            *m.entry(k).or_insert(0) += e;
        }
        MultiIndex {
            entries: m.into_iter().filter(|e| e.1 > 0).collect(),
        }
    }

    pub fn from_dense(exps: &[u32]) -> Self {
        Self::from_pairs(exps.iter().copied().enumerate())
    }

    pub fn entries(&self) -> &[(usize, u32)] {
        &self.entries
    }

    /// `‖α‖₁`.
    pub fn order(&self) -> u32 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn dense(&self, d: usize) -> Vec<u32> {
        let mut v = vec![0; d];
        for &(k, e) in &self.entries {
            v[k] = e;
        }
        v
    }

    /// `α! = Π α_k!`.
    pub fn factorial(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, e)| (1..=e).map(f64::from).product::<f64>())
            .product()
    }

    /// `θ^α` over the support only.
    pub fn monomial(&self, theta: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|&(k, e)| theta[k].powi(e as i32))
            .product()
    }
}

impl Serialize for MultiIndex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m: BTreeMap<String, u32> = self
            .entries
            .iter()
            .map(|&(k, e)| (k.to_string(), e))
            .collect();
        m.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultiIndex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = BTreeMap::<String, u32>::deserialize(d)?;
        let pairs = m
            .into_iter()
            .map(|(k, e)| {
                k.parse::<usize>()
                    .map(|k| (k, e))
                    .map_err(serde::de::Error::custom)
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(MultiIndex::from_pairs(pairs))
    }
}

/// Streams every `α ∈ N_0^D` with `‖α‖₁ < m`, each once.
///
/// The order is lexicographic in `(α_1, ..., α_D)`, the order in which the
/// recursion `G_{m,D}` appends components. State is kept sparse, so each step costs
/// O(support) rather than O(D).
#[derive(Debug, Clone)]
pub struct MultiIndexIter {
    m: u32,
    d: usize,
    current: Vec<(usize, u32)>,
    sum: u32,
    started: bool,
    done: bool,
}

pub fn enumerate_multi_indices(m: u32, d: usize) -> MultiIndexIter {
    MultiIndexIter {
        m,
        d,
        current: Vec::new(),
        sum: 0,
        started: false,
        done: m == 0 || d == 0,
    }
}

impl Iterator for MultiIndexIter {
    type Item = MultiIndex;

    fn next(&mut self) -> Option<MultiIndex> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(MultiIndex::zero());
        }
        let last = self.d - 1;
        if self.sum + 1 < self.m {
            // bump the last component
            match self.current.last_mut() {
                Some(e) if e.0 == last => e.1 += 1,
                _ => self.current.push((last, 1)),
            }
            self.sum += 1;
        } else {
            // carry: clear the rightmost nonzero component t, bump component t-1
            let Some((t, e)) = self.current.pop() else {
                self.done = true;
                return None;
            };
            self.sum -= e;
            if t == 0 {
                self.done = true;
                return None;
            }
            match self.current.last_mut() {
                Some(prev) if prev.0 == t - 1 => prev.1 += 1,
                _ => self.current.push((t - 1, 1)),
            }
            self.sum += 1;
        }
        Some(MultiIndex {
            entries: self.current.clone(),
        })
    }
}

/// `#{α : ‖α‖₁ < m} = Σ_{i<m} C(D+i-1, i)`, saturating.
pub fn multi_index_count(m: u32, d: usize) -> u128 {
    if d == 0 {
        return u128::from(m > 0);
    }
    (0..m as u128)
        .map(|i| binomial_u128(d as u128 + i - 1, i))
        .fold(0u128, |a, b| a.saturating_add(b))
}

fn binomial_u128(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Exact binomial coefficient for the small orders used by shift rules.
fn binomial(n: u32, k: u32) -> Result<u64> {
    let k = k.min(n - k) as u64;
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul(n as u64 - i)
            .ok_or_else(|| Error::Domain(format!("binomial C({n}, {k}) overflows u64")))?
            / (i + 1);
    }
    Ok(acc)
}

/// `(D^α C)(0) = 2^{-‖α‖₁} Σ_{j≤α} (-1)^{‖j‖₁} C(α, j) C(π/2 (α - 2j))`.
pub fn taylor_coefficient(
    c: &Circuit,
    obs: &PauliObservable,
    alpha: &MultiIndex,
    cache: Option<&ShiftCache>,
) -> Result<f64> {
    let support = alpha.entries();
    if let Some(&(k, _)) = support.iter().find(|e| e.0 >= c.n_params()) {
        return Err(Error::Dimension(format!(
            "index {k} but circuit has {} parameters",
            c.n_params()
        )));
    }
    if alpha.order() > 62 {
        return Err(Error::Domain(format!(
            "order {} too large for exact shift weights",
            alpha.order()
        )));
    }
    let mut j = vec![0u32; support.len()];
    let mut total = 0.0;
    loop {
        let mut weight: u64 = 1;
        let mut parity = 0;
        for (&(_, a), &jk) in support.iter().zip(&j) {
            weight = weight
                .checked_mul(binomial(a, jk)?)
                .ok_or_else(|| Error::Domain("shift weight overflows u64".into()))?;
            parity += jk;
        }
        let shift = ShiftVector::from_pairs(
            support
                .iter()
                .zip(&j)
                .map(|(&(k, a), &jk)| (k, a as i64 - 2 * jk as i64)),
        );
        let value = cost_at_shift(c, obs, &shift, cache)?;
        let signed = if parity % 2 == 0 {
            weight as f64
        } else {
            -(weight as f64)
        };
        total += signed * value;

        // odometer over 0 <= j <= α
        let mut pos = 0;
        loop {
            if pos == j.len() {
                return Ok(total / 2f64.powi(alpha.order() as i32));
            }
            if j[pos] < support[pos].1 {
                j[pos] += 1;
                break;
            }
            j[pos] = 0;
            pos += 1;
        }
    }
}

/// Coefficients `(D^α C)(0) / α!` for every `‖α‖₁ < m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorSurrogate {
    #[serde(rename = "D")]
    d: usize,
    m: u32,
    coeffs: Vec<CoefficientEntry>,
    #[serde(default)]
    n_clifford_evals: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub alpha: MultiIndex,
    pub value: f64,
}

/// Knobs for `build_surrogate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateBudget {
    /// Refuse when `#{α : ‖α‖₁ < m}` exceeds this.
    pub max_indices: u128,
}

impl Default for SurrogateBudget {
    fn default() -> Self {
        SurrogateBudget {
            max_indices: 5_000_000,
        }
    }
}

pub fn build_surrogate(c: &Circuit, obs: &PauliObservable, m: u32) -> Result<TaylorSurrogate> {
    build_surrogate_with(c, obs, m, SurrogateBudget::default(), &ShiftCache::new())
}

/// As `build_surrogate`, with an explicit budget and cache. The cache must belong to
/// the same circuit and observable; its miss count becomes `n_clifford_evals`.
pub fn build_surrogate_with(
    c: &Circuit,
    obs: &PauliObservable,
    m: u32,
    budget: SurrogateBudget,
    cache: &ShiftCache,
) -> Result<TaylorSurrogate> {
    if m == 0 {
        return Err(Error::Domain(
            "truncation order m must be at least 1".into(),
        ));
    }
    let d = c.n_params();
    let count = if d == 0 { 1 } else { multi_index_count(m, d) };
    if count > budget.max_indices {
        let log_estimate = (obs.terms().len() as f64).ln()
            + (d.max(1) as f64).ln()
            + (m as f64) * 2f64.ln()
            + (count as f64).ln();
        return Err(Error::Resource {
            message: format!(
                "{count} multi-indices for m={m}, D={d} exceeds budget {}",
                budget.max_indices
            ),
            log_estimate,
        });
    }
    let before = cache.misses();
    let indices: Vec<MultiIndex> = if d == 0 {
        vec![MultiIndex::zero()]
    } else {
        enumerate_multi_indices(m, d).collect()
    };
    let mut coeffs = Vec::with_capacity(indices.len());
    for alpha in indices {
        let value = taylor_coefficient(c, obs, &alpha, Some(cache))? / alpha.factorial();
        coeffs.push(CoefficientEntry { alpha, value });
    }
    Ok(TaylorSurrogate {
        d,
        m,
        coeffs,
        n_clifford_evals: cache.misses() - before,
    })
}

impl TaylorSurrogate {
    pub fn n_params(&self) -> usize {
        self.d
    }

    pub fn order_bound(&self) -> u32 {
        self.m
    }

    pub fn coefficients(&self) -> &[CoefficientEntry] {
        &self.coeffs
    }

    /// Distinct Clifford evaluations spent building this surrogate.
    pub fn n_clifford_evals(&self) -> u64 {
        self.n_clifford_evals
    }

    /// `C_m(θ)`.
    pub fn evaluate(&self, theta: &[f64]) -> Result<f64> {
        if theta.len() != self.d {
            return Err(Error::Dimension(format!(
                "theta has {} entries, surrogate {}",
                theta.len(),
                self.d
            )));
        }
        Ok(self
            .coeffs
            .iter()
            .map(|e| e.value * e.alpha.monomial(theta))
            .sum())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("surrogate serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let out: TaylorSurrogate =
            serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if let Some(e) = out
            .coeffs
            .iter()
            .find(|e| e.alpha.order() >= out.m || e.alpha.entries().iter().any(|x| x.0 >= out.d))
        {
            return Err(Error::Parse(format!(
                "coefficient index {:?} outside D={}, m={}",
                e.alpha, out.d, out.m
            )));
        }
        Ok(out)
    }
}

/// Smallest `m ≥ 1` with `norm · l1^m / m! ≤ ε`.
pub fn worst_case_threshold(l1_norm: f64, norm_surrogate: f64, epsilon: f64) -> Result<u64> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if !(l1_norm >= 0.0)
        || !(norm_surrogate >= 0.0)
        || !l1_norm.is_finite()
        || !norm_surrogate.is_finite()
    {
        return Err(Error::Domain("norms must be finite and nonnegative".into()));
    }
    if l1_norm == 0.0 || norm_surrogate == 0.0 {
        return Ok(1);
    }
    let (log_l1, log_eps) = (l1_norm.ln(), epsilon.ln());
    let mut log_term = norm_surrogate.ln() + log_l1;
    let mut m: u64 = 1;
    while log_term > log_eps {
        m += 1;
        log_term += log_l1 - (m as f64).ln();
    }
    Ok(m)
}

const LAMBERT_TOL: f64 = 1e-12;
const LAMBERT_MAX_ITER: usize = 80;

/// Principal branch `W(x)` for `x ≥ 0`.
pub fn lambert_w(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!("lambert_w needs x >= 0, got {x}")));
    }
    Ok(lambert_w0(x))
}

/// Principal branch on `[-1/e, ∞)`.
fn lambert_w0(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return f64::INFINITY;
    }
    let mut w = x.ln_1p();
    for _ in 0..LAMBERT_MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        if !step.is_finite() {
            break;
        }
        let next = w - step;
        if (next - w).abs() <= LAMBERT_TOL * (1.0 + next.abs()) {
            return next;
        }
        w = next;
    }
    // Halley stalled (only near the branch point); bisect on the monotone part.
    let (mut lo, mut hi) = (-1.0, x.ln_1p().max(1.0));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * mid.exp() < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Analytic lower bound on the truncation threshold:
/// `e l1 exp(W(log(‖H‖ / (ε √(e³ l1))) / (e l1))) - ½`.
pub fn lambert_lower_bound(l1_norm: f64, norm_surrogate: f64, epsilon: f64) -> Result<f64> {
    if !(l1_norm > 0.0) {
        return Err(Error::Domain(format!(
            "l1_norm must be positive, got {l1_norm}"
        )));
    }
    if !(epsilon > 0.0) || !(norm_surrogate > 0.0) {
        return Err(Error::Domain("epsilon and norm must be positive".into()));
    }
    let el = E * l1_norm;
    let x = (norm_surrogate / (epsilon * (E.powi(3) * l1_norm).sqrt())).ln() / el;
    if x < -1.0 / E {
        return Err(Error::Domain(format!(
            "Lambert argument {x} below -1/e; epsilon too large for this norm"
        )));
    }
    Ok(el * lambert_w0(x).exp() - 0.5)
}

/// Patch scaling assumed by `mse_threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMode {
    /// `σ ∝ D^{-(1+δ)/2}`.
    Asymptotic { delta: f64 },
    /// `σ = q ‖H‖^{-1/m} D^{-1/2}`.
    Nonasymptotic { q: f64 },
}

/// Threshold that keeps the mean-squared truncation error below `ε²` with probability
/// at least `1 - ρ`.
pub fn mse_threshold(
    d: usize,
    mode: SigmaMode,
    epsilon: f64,
    rho: f64,
    c_const: f64,
) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) || !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain("epsilon and rho must lie in (0, 1)".into()));
    }
    if !(c_const > 0.0) {
        return Err(Error::Domain(format!(
            "constant must be positive, got {c_const}"
        )));
    }
    let log_ratio = (c_const / (rho * epsilon * epsilon)).ln();
    let bound = match mode {
        SigmaMode::Asymptotic { delta } => {
            if !(delta > 0.0) || d < 2 {
                return Err(Error::Domain(
                    "asymptotic mode needs delta > 0 and D >= 2".into(),
                ));
            }
            log_ratio / (delta * (d as f64).ln())
        }
        SigmaMode::Nonasymptotic { q } => {
            if !(q > 0.0 && q < 1.0) {
                return Err(Error::Domain(format!("q must lie in (0, 1), got {q}")));
            }
            0.5 * log_ratio / (1.0 / q).ln()
        }
    };
    // Absorb rounding so that exact integer bounds are not pushed up by one.
    Ok(((bound - 1e-9).ceil() as i64).max(1) as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Polynomial,
    Superpolynomial,
    Exponential,
}

/// Regime boundaries; the polynomial/superpolynomial split is a convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityConfig {
    /// `‖θ‖₁` at or below this counts as O(1).
    pub poly_l1_max: f64,
    /// `‖θ‖₁ ≥ exp_l1_ratio · D` counts as Θ(D).
    pub exp_l1_ratio: f64,
    /// Target accuracy for the polynomial-regime order.
    pub epsilon: f64,
}

impl Default for ComplexityConfig {
    fn default() -> Self {
        ComplexityConfig {
            poly_l1_max: 1.0,
            exp_l1_ratio: 1.0,
            epsilon: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub regime: Regime,
    /// Natural log of the operation-count bound.
    pub log_op_count: f64,
    /// Truncation order used for the polynomial bound.
    pub m: Option<u64>,
}

pub fn complexity_estimate(d: usize, n_terms: usize, l1_norm: f64) -> Result<ComplexityReport> {
    complexity_estimate_with(d, n_terms, l1_norm, &ComplexityConfig::default())
}

pub fn complexity_estimate_with(
    d: usize,
    n_terms: usize,
    l1_norm: f64,
    cfg: &ComplexityConfig,
) -> Result<ComplexityReport> {
    if d == 0 || n_terms == 0 || !(l1_norm > 0.0) {
        return Err(Error::Domain(
            "D, term count and l1 norm must be positive".into(),
        ));
    }
    let (df, log_terms) = (d as f64, (n_terms as f64).ln());
    if l1_norm >= cfg.exp_l1_ratio * df {
        return Ok(ComplexityReport {
            regime: Regime::Exponential,
            log_op_count: log_terms + df.ln() + 2.0 * df * 2f64.ln(),
            m: None,
        });
    }
    if l1_norm <= cfg.poly_l1_max {
        let m = worst_case_threshold(l1_norm, n_terms as f64, cfg.epsilon)?;
        return Ok(ComplexityReport {
            regime: Regime::Polynomial,
            log_op_count: m as f64 * df.ln() + log_terms,
            m: Some(m),
        });
    }
    let el = E * l1_norm;
    let log_op_count = log_terms
        + 0.5 * (df * (df + el) / (2.0 * std::f64::consts::PI * el)).ln()
        + el * (1.0 + (2.0 + 2.0 * df / el).ln());
    Ok(ComplexityReport {
        regime: Regime::Superpolynomial,
        log_op_count,
        m: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathComparison {
    pub faster: bool,
    pub q_threshold: f64,
    /// Present only when `γ < 1`.
    pub d_threshold: Option<f64>,
}

/// Compares the surrogate's probabilistic runtime with Pauli-path propagation.
/// `gamma` is the ratio of the two methods' runtime constants.
pub fn pauli_path_comparison(
    q: f64,
    epsilon: f64,
    rho: f64,
    c_const: f64,
    gamma: f64,
    d: usize,
) -> Result<PathComparison> {
    if !(epsilon > 0.0 && epsilon < 1.0) || !(rho > 0.0 && rho < 1.0) || !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(
            "q, epsilon and rho must lie in (0, 1)".into(),
        ));
    }
    if !(c_const > 0.0) || !(gamma > 0.0) || d < 2 {
        return Err(Error::Domain(
            "constants must be positive and D >= 2".into(),
        ));
    }
    let log_d = (d as f64).ln();
    let log_inv = (1.0 / (rho * epsilon * epsilon)).ln();
    let log_c = (c_const / (rho * epsilon * epsilon)).ln();
    let q_threshold = (-log_c / (2.0 * log_inv + 2.0 * gamma.ln() / log_d)).exp();
    let d_threshold = (gamma < 1.0).then(|| (gamma.ln() / (rho.ln() + 2.0 * epsilon.ln())).exp());
    let d_ok = d_threshold.is_none_or(|t| d as f64 > t);
    Ok(PathComparison {
        faster: d_ok && q < q_threshold,
        q_threshold,
        d_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_enumerations() {
        let got: Vec<_> = enumerate_multi_indices(2, 2).collect();
        assert_eq!(
            got,
            vec![MultiIndex::zero(), MultiIndex::unit(1), MultiIndex::unit(0)]
        );
        assert_eq!(enumerate_multi_indices(3, 3).count(), 10);
        assert_eq!(enumerate_multi_indices(4, 5).count(), 56);
        assert_eq!(multi_index_count(4, 5), 56);
        assert_eq!(enumerate_multi_indices(1, 7).count(), 1);
    }

    #[test]
    fn enumeration_is_lexicographic() {
        let dense: Vec<Vec<u32>> = enumerate_multi_indices(3, 3).map(|a| a.dense(3)).collect();
        let mut sorted = dense.clone();
        sorted.sort();
        assert_eq!(dense, sorted);
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(worst_case_threshold(0.0, 1.0, 1e-6).unwrap(), 1);
        assert_eq!(worst_case_threshold(1.0, 1.0, 1e-6).unwrap(), 10);
        assert!(worst_case_threshold(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn lambert_examples() {
        assert_eq!(lambert_w(0.0).unwrap(), 0.0);
        assert!((lambert_w(E).unwrap() - 1.0).abs() < 1e-14);
        assert!((lambert_w(1.0).unwrap() - 0.567_143_290_409_783_8).abs() < 1e-14);
        assert!(lambert_w(-0.1).is_err());
        assert!((lambert_w0(-1.0 / E) + 1.0).abs() < 1e-6);
    }

    #[test]
    fn lower_bound_domain() {
        assert!(lambert_lower_bound(0.0, 1.0, 1e-6).is_err());
        let r = lambert_lower_bound(1e3, 1.0, 1e-6).unwrap() / (E * 1e3);
        assert!((0.9..=1.1).contains(&r));
    }

    #[test]
    fn mse_examples() {
        assert_eq!(
            mse_threshold(100, SigmaMode::Asymptotic { delta: 1.0 }, 1e-2, 1e-2, 1.0).unwrap(),
            3
        );
        assert_eq!(
            mse_threshold(100, SigmaMode::Nonasymptotic { q: 1e-300 }, 1e-2, 1e-2, 1.0).unwrap(),
            1
        );
        assert!(mse_threshold(100, SigmaMode::Nonasymptotic { q: 1.5 }, 1e-2, 1e-2, 1.0).is_err());
        assert!(mse_threshold(100, SigmaMode::Asymptotic { delta: 1.0 }, 0.0, 1e-2, 1.0).is_err());
    }

    #[test]
    fn complexity_regimes() {
        let p = complexity_estimate(10_000, 3, 0.5).unwrap();
        assert_eq!(p.regime, Regime::Polynomial);
        let m = p.m.unwrap() as f64;
        assert!((p.log_op_count - (m * 10_000f64.ln() + 3f64.ln())).abs() < 1e-9);
        let e = complexity_estimate(100, 1, 100.0).unwrap();
        assert_eq!(e.regime, Regime::Exponential);
        assert!((e.log_op_count - (100f64.ln() + 200.0 * 2f64.ln())).abs() < 1e-9);
        assert_eq!(
            complexity_estimate(10_000, 1, 100.0).unwrap().regime,
            Regime::Superpolynomial
        );
    }

    #[test]
    fn path_comparison_gamma_one() {
        let r = pauli_path_comparison(0.1, 1e-2, 1e-2, 1.0, 1.0, 1000).unwrap();
        assert!(r.d_threshold.is_none());
        let above =
            pauli_path_comparison(r.q_threshold + 1e-3, 1e-2, 1e-2, 1.0, 1.0, 1000).unwrap();
        assert!(!above.faster);
        assert!(r.faster);
    }

    #[test]
    fn multi_index_json() {
        let a = MultiIndex::from_pairs([(3, 2), (0, 1)]);
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"0":1,"3":2}"#);
        assert_eq!(serde_json::from_str::<MultiIndex>(&s).unwrap(), a);
    }
}
