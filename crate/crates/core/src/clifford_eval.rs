//! Exact cost evaluation at quarter-turn grid points by Heisenberg backpropagation:
//! each observable term is conjugated backwards through the Clifford-ized circuit and
//! its vacuum expectation read off.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::RwLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::{PauliString, SingleQubitPauli};

/// Real-weighted sum of non-identity Pauli strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ObservableRecord", into = "ObservableRecord")]
pub struct PauliObservable {
    n_qubits: usize,
    terms: Vec<(f64, PauliString)>,
}

#[derive(Serialize, Deserialize)]
struct ObservableRecord {
    n_qubits: usize,
    terms: Vec<TermRecord>,
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    coeff: f64,
    pauli: PauliString,
}

impl TryFrom<ObservableRecord> for PauliObservable {
    type Error = Error;

    fn try_from(r: ObservableRecord) -> Result<Self> {
        PauliObservable::new(
            r.n_qubits,
            r.terms.into_iter().map(|t| (t.coeff, t.pauli)).collect(),
        )
    }
}

impl From<PauliObservable> for ObservableRecord {
    fn from(o: PauliObservable) -> Self {
        ObservableRecord {
            n_qubits: o.n_qubits,
            terms: o
                .terms
                .into_iter()
                .map(|(coeff, pauli)| TermRecord { coeff, pauli })
                .collect(),
        }
    }
}

impl PauliObservable {
    pub fn new(n_qubits: usize, terms: Vec<(f64, PauliString)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Domain("observable needs at least one term".into()));
        }
        for (c, p) in &terms {
            if p.n_qubits() != n_qubits {
                return Err(Error::Dimension(format!(
                    "term {p} has {} qubits, observable {n_qubits}",
                    p.n_qubits()
                )));
            }
            if p.is_identity() {
                return Err(Error::Domain("identity terms are not allowed".into()));
            }
            if !c.is_finite() {
                return Err(Error::Domain(format!("non-finite coefficient {c}")));
            }
        }
        Ok(PauliObservable { n_qubits, terms })
    }

    pub fn single(p: PauliString) -> Result<Self> {
        Self::new(p.n_qubits(), vec![(1.0, p)])
    }

    /// `Z ⊗ ... ⊗ Z`.
    pub fn global_z(n_qubits: usize) -> Result<Self> {
        Self::single(PauliString::from_sites(&vec![
            SingleQubitPauli::Z;
            n_qubits
        ]))
    }

    /// Open Heisenberg chain `Σ_j X_j X_{j+1} + Y_j Y_{j+1} + Z_j Z_{j+1}`.
    pub fn heisenberg_chain(n_qubits: usize) -> Result<Self> {
        if n_qubits < 2 {
            return Err(Error::Domain(
                "Heisenberg chain needs at least 2 qubits".into(),
            ));
        }
        let mut terms = Vec::with_capacity(3 * (n_qubits - 1));
        for j in 0..n_qubits - 1 {
            for p in SingleQubitPauli::AXES {
                let mut w = PauliString::identity(n_qubits);
                w.set(j, p)?;
                w.set(j + 1, p)?;
                terms.push((1.0, w));
            }
        }
        Self::new(n_qubits, terms)
    }

    /// i.i.d. uniform non-identity words; coefficients 1, or `Unif[-1, 1]` when `weighted`.
    pub fn random<R: Rng + ?Sized>(
        n_qubits: usize,
        n_terms: usize,
        weighted: bool,
        rng: &mut R,
    ) -> Result<Self> {
        let mut terms = Vec::with_capacity(n_terms);
        for _ in 0..n_terms {
            let p = PauliString::random_nonidentity(n_qubits, rng)?;
            let c = if weighted {
                rng.random_range(-1.0..=1.0)
            } else {
                1.0
            };
            terms.push((c, p));
        }
        Self::new(n_qubits, terms)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(c, p)| (c * lambda, p.clone()))
            .collect();
        PauliObservable {
            n_qubits: self.n_qubits,
            terms,
        }
    }

    /// `Σ|c_i|`, the norm bound used wherever `‖H‖` is needed.
    pub fn norm_surrogate(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }
}

/// Sparse quarter-turn shift: parameter index -> turns in 1..4, sorted by index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ShiftVector {
    entries: Vec<(usize, u8)>,
}

impl ShiftVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn unit(param: usize, turns: u8) -> Self {
        Self::from_pairs([(param, turns as i64)])
    }

    /// Canonicalizes: reduces mod 4, merges repeated keys, drops zeros.
    pub fn from_pairs<I: IntoIterator<Item = (usize, i64)>>(pairs: I) -> Self {
        let mut acc: Vec<(usize, i64)> = pairs.into_iter().collect();
        acc.sort_by_key(|e| e.0);
        let mut entries: Vec<(usize, u8)> = Vec::with_capacity(acc.len());
        for (k, t) in acc {
            let t = t.rem_euclid(4) as u8;
            match entries.last_mut() {
                Some(last) if last.0 == k => last.1 = (last.1 + t) % 4,
                _ => entries.push((k, t)),
            }
        }
        entries.retain(|e| e.1 != 0);
        ShiftVector { entries }
    }

    pub fn from_dense(turns: &[i64]) -> Self {
        Self::from_pairs(turns.iter().enumerate().map(|(k, &t)| (k, t)))
    }

    pub fn entries(&self) -> &[(usize, u8)] {
        &self.entries
    }

    pub fn get(&self, param: usize) -> u8 {
        self.entries
            .binary_search_by_key(&param, |e| e.0)
            .map_or(0, |i| self.entries[i].1)
    }

    /// Dense turns for a circuit with `d` parameters.
    pub fn dense(&self, d: usize) -> Result<Vec<u8>> {
        let mut out = vec![0u8; d];
        for &(k, t) in &self.entries {
            if k >= d {
                return Err(Error::Dimension(format!(
                    "shift index {k} but circuit has {d} parameters"
                )));
            }
            out[k] = t;
        }
        Ok(out)
    }
}

/// `<0|p|0>`: the sign for diagonal words, else 0.
pub fn vacuum_expectation(p: &PauliString) -> i8 {
    if p.is_diagonal() {
        p.sign()
    } else {
        0
    }
}

/// Memo of `cost_at_shift` values for one fixed (circuit, observable) pair.
///
/// Safe for concurrent use; racing inserts write identical values.
#[derive(Debug, Default)]
pub struct ShiftCache {
    map: RwLock<HashMap<ShiftVector, f64>>,
    capacity: Option<usize>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl ShiftCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stops storing new entries once `capacity` is reached. Lookups keep working.
    pub fn with_capacity_limit(capacity: usize) -> Self {
        ShiftCache {
            capacity: Some(capacity),
            ..Self::default()
        }
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    /// Number of evaluations that had to be computed.
    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get(&self, s: &ShiftVector) -> Option<f64> {
        let v = self.map.read().expect("cache lock").get(s).copied();
        if v.is_some() {
            self.hits.fetch_add(1, Ordering::Relaxed);
        }
        v
    }

    fn insert(&self, s: ShiftVector, v: f64) {
        self.misses.fetch_add(1, Ordering::Relaxed);
        let mut map = self.map.write().expect("cache lock");
        if self.capacity.is_none_or(|cap| map.len() < cap) {
            map.insert(s, v);
        }
    }
}

fn check_dims(c: &Circuit, obs: &PauliObservable) -> Result<()> {
    if c.n_qubits() != obs.n_qubits() {
        return Err(Error::Dimension(format!(
            "circuit has {} qubits, observable {}",
            c.n_qubits(),
            obs.n_qubits()
        )));
    }
    Ok(())
}

/// Heisenberg-evolves `p` through `gates[..end]` (backwards) with rotation turns from `turns`.
#[inline]
pub(crate) fn backpropagate(p: &mut PauliString, gates: &[Gate], turns: &[u8]) {
    for g in gates.iter().rev() {
        let t = match g {
            Gate::ParamRot { param, .. } => turns[*param],
            _ => 0,
        };
        if let Some(cg) = g.to_clifford(t) {
            p.conjugate_in_place(&cg);
        }
    }
}

/// The Heisenberg-evolved word `U(π/2 · s)† p U(π/2 · s)`.
pub fn evolved_word(c: &Circuit, p: &PauliString, s: &ShiftVector) -> Result<PauliString> {
    if p.n_qubits() != c.n_qubits() {
        return Err(Error::Dimension(format!(
            "word has {} qubits, circuit {}",
            p.n_qubits(),
            c.n_qubits()
        )));
    }
    let turns = s.dense(c.n_params())?;
    let mut w = p.clone();
    backpropagate(&mut w, c.gates(), &turns);
    Ok(w)
}

/// `C(π/2 · s) = Σ_i c_i <0|U† P_i U|0>`. Pass a cache only together with the same
/// circuit and observable every time.
pub fn cost_at_shift(
    c: &Circuit,
    obs: &PauliObservable,
    s: &ShiftVector,
    cache: Option<&ShiftCache>,
) -> Result<f64> {
    check_dims(c, obs)?;
    if let Some(v) = cache.and_then(|ch| ch.get(s)) {
        return Ok(v);
    }
    let turns = s.dense(c.n_params())?;
    let mut total = 0.0;
    for (coeff, p) in obs.terms() {
        let mut w = p.clone();
        backpropagate(&mut w, c.gates(), &turns);
        total += coeff * vacuum_expectation(&w) as f64;
    }
    if let Some(ch) = cache {
        ch.insert(s.clone(), total);
    }
    Ok(total)
}

/// `∂_k C(0) = ½(C(π/2 e_k) - C(-π/2 e_k))` for every k.
///
/// The suffix conjugation is shared across all k. Past rotation k the two shifted
/// words differ only in sign, so each component costs one prefix sweep, and none at
/// all when the word commutes with the rotation axis.
pub fn gradient_at_zero(c: &Circuit, obs: &PauliObservable) -> Result<Vec<f64>> {
    check_dims(c, obs)?;
    let gates = c.gates();
    let zeros = vec![0u8; c.n_params()];
    let mut grad = vec![0.0; c.n_params()];
    for (coeff, p) in obs.terms() {
        let mut w = p.clone();
        for (j, g) in gates.iter().enumerate().rev() {
            match *g {
                Gate::ParamRot { axis, qubit, param } => {
                    if w.anticommutes_at(qubit, axis) {
                        let mut a = w.clone();
                        a.rotate_in_place(axis, qubit, 1);
                        backpropagate(&mut a, &gates[..j], &zeros);
                        grad[param] += coeff * vacuum_expectation(&a) as f64;
                    }
                }
                _ => {
                    if let Some(cg) = g.to_clifford(0) {
                        w.conjugate_in_place(&cg);
                    }
                }
            }
        }
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_ansatz, AnsatzSpec, Family};
    use SingleQubitPauli::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn vacuum_examples() {
        assert_eq!(vacuum_expectation(&p("ZZ")), 1);
        assert_eq!(vacuum_expectation(&p("XI")), 0);
        assert_eq!(vacuum_expectation(&p("-ZIZ")), -1);
    }

    #[test]
    fn shift_canonical_form() {
        let s = ShiftVector::from_pairs([(3, 5), (1, -1), (2, 4), (3, 0)]);
        assert_eq!(s.entries(), &[(1, 3), (3, 1)]);
        assert_eq!(s.get(2), 0);
        assert_eq!(ShiftVector::from_dense(&[0, 4, -4]), ShiftVector::zero());
    }

    #[test]
    fn single_rz_has_zero_gradient() {
        let c = Circuit::new(
            1,
            vec![Gate::ParamRot {
                axis: Z,
                qubit: 0,
                param: 0,
            }],
        )
        .unwrap();
        let obs = PauliObservable::single(p("Z")).unwrap();
        assert_eq!(gradient_at_zero(&c, &obs).unwrap(), vec![0.0]);
    }

    #[test]
    fn linearity_and_cache() {
        let c = build_ansatz(&AnsatzSpec {
            family: Family::MHea,
            n_qubits: 3,
            layers: 1,
            seed: 0,
        })
        .unwrap();
        let obs = PauliObservable::new(3, vec![(0.5, p("ZZI")), (-1.5, p("XZY"))]).unwrap();
        let s = ShiftVector::from_pairs([(0, 1), (4, 2)]);
        let a = cost_at_shift(&c, &obs, &s, None).unwrap();
        let b = cost_at_shift(&c, &obs.scaled(3.0), &s, None).unwrap();
        assert!((3.0 * a - b).abs() < 1e-15);

        let cache = ShiftCache::new();
        let first = cost_at_shift(&c, &obs, &s, Some(&cache)).unwrap();
        let again = cost_at_shift(&c, &obs, &s, Some(&cache)).unwrap();
        assert_eq!(first, again);
        assert_eq!((cache.misses(), cache.hits()), (1, 1));
    }

    #[test]
    fn capped_cache_stops_storing() {
        let c = build_ansatz(&AnsatzSpec {
            family: Family::MHea,
            n_qubits: 2,
            layers: 1,
            seed: 0,
        })
        .unwrap();
        let obs = PauliObservable::single(p("ZZ")).unwrap();
        let cache = ShiftCache::with_capacity_limit(1);
        for k in 0..3 {
            cost_at_shift(&c, &obs, &ShiftVector::unit(k, 1), Some(&cache)).unwrap();
        }
        assert_eq!(cache.len(), 1);
        assert_eq!(cache.misses(), 3);
    }

    #[test]
    fn fast_gradient_matches_shift_definition() {
        for family in [Family::MHea, Family::FHea, Family::RPqc] {
            let c = build_ansatz(&AnsatzSpec {
                family,
                n_qubits: 4,
                layers: 2,
                seed: 3,
            })
            .unwrap();
            let obs = PauliObservable::new(
                4,
                vec![(0.7, p("XZYI")), (-0.2, p("ZIIZ")), (1.0, p("IYIX"))],
            )
            .unwrap();
            let g = gradient_at_zero(&c, &obs).unwrap();
            for (k, gk) in g.iter().enumerate() {
                let plus = cost_at_shift(&c, &obs, &ShiftVector::unit(k, 1), None).unwrap();
                let minus = cost_at_shift(&c, &obs, &ShiftVector::unit(k, 3), None).unwrap();
                assert!((gk - 0.5 * (plus - minus)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn dimension_errors() {
        let c = Circuit::new(2, vec![]).unwrap();
        let obs = PauliObservable::single(p("Z")).unwrap();
        assert!(cost_at_shift(&c, &obs, &ShiftVector::zero(), None).is_err());
        assert!(PauliObservable::new(1, vec![(1.0, p("I"))]).is_err());
        assert!(PauliObservable::new(1, vec![]).is_err());
    }

    #[test]
    fn heisenberg_term_count() {
        assert_eq!(
            PauliObservable::heisenberg_chain(12).unwrap().terms().len(),
            33
        );
    }
}
