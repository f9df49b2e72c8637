//! Linear Clifford Encoders: a Clifford pair `(Q, Q̃)` such that the wrapped circuit
//! `Q̃ U(θ) Q` has `∂_k C̃(0) = ±c_{i0}` plus a residual from the other terms.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{
    build_ansatz, gates_to_records, lce_transform, records_to_gates, AnsatzSpec, Circuit, Family,
    Gate, GateRecord,
};
use crate::clifford_eval::{evolved_word, vacuum_expectation, PauliObservable, ShiftVector};
use crate::error::{Error, Result};
use crate::pauli::{PauliString, SingleQubitPauli};

/// Encoder pair. `q_gates` run before the circuit, `qtilde_gates` after it, both in time order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LcePairRecord", into = "LcePairRecord")]
pub struct LcePair {
    pub n_qubits: usize,
    pub q_gates: Vec<Gate>,
    pub qtilde_gates: Vec<Gate>,
    pub k: usize,
    pub i0: usize,
    pub achieved_sign: i8,
}

#[derive(Serialize, Deserialize)]
struct LcePairRecord {
    n_qubits: usize,
    k: usize,
    i0: usize,
    achieved_sign: i8,
    q_gates: Vec<GateRecord>,
    qtilde_gates: Vec<GateRecord>,
}

impl From<LcePair> for LcePairRecord {
    fn from(p: LcePair) -> Self {
        LcePairRecord {
            n_qubits: p.n_qubits,
            k: p.k,
            i0: p.i0,
            achieved_sign: p.achieved_sign,
            q_gates: gates_to_records(&p.q_gates),
            qtilde_gates: gates_to_records(&p.qtilde_gates),
        }
    }
}

impl TryFrom<LcePairRecord> for LcePair {
    type Error = Error;

    fn try_from(r: LcePairRecord) -> Result<Self> {
        if r.achieved_sign.abs() != 1 {
            return Err(Error::Parse(format!(
                "achieved_sign must be ±1, got {}",
                r.achieved_sign
            )));
        }
        let pair = LcePair {
            n_qubits: r.n_qubits,
            q_gates: records_to_gates(&r.q_gates)?,
            qtilde_gates: records_to_gates(&r.qtilde_gates)?,
            k: r.k,
            i0: r.i0,
            achieved_sign: r.achieved_sign,
        };
        if pair
            .q_gates
            .iter()
            .chain(&pair.qtilde_gates)
            .any(|g| !g.is_fixed_clifford())
        {
            return Err(Error::Parse("encoder gates must be fixed Cliffords".into()));
        }
        Ok(pair)
    }
}

impl LcePair {
    pub fn identity(n_qubits: usize, k: usize, i0: usize) -> Self {
        LcePair {
            n_qubits,
            q_gates: vec![],
            qtilde_gates: vec![],
            k,
            i0,
            achieved_sign: 1,
        }
    }
}

fn conj_fixed(p: &mut PauliString, g: &Gate) {
    if let Some(cg) = g.to_clifford(0) {
        p.conjugate_in_place(&cg);
    }
}

/// Builds the encoder for direction `k` and observable term `i0`.
pub fn construct_lce(c: &Circuit, obs: &PauliObservable, k: usize, i0: usize) -> Result<LcePair> {
    if c.n_qubits() != obs.n_qubits() {
        return Err(Error::Dimension(format!(
            "circuit has {} qubits, observable {}",
            c.n_qubits(),
            obs.n_qubits()
        )));
    }
    if k >= c.n_params() {
        return Err(Error::Dimension(format!(
            "direction {k} but circuit has {} parameters",
            c.n_params()
        )));
    }
    let p = &obs
        .terms()
        .get(i0)
        .ok_or_else(|| Error::Dimension(format!("term {i0} out of range")))?
        .1;
    let n = c.n_qubits();
    let pos = c.param_positions()[k];
    let Gate::ParamRot {
        axis: v, qubit: q, ..
    } = c.gates()[pos]
    else {
        unreachable!("param_positions points at rotations")
    };

    // Q̃ = W̃ W_a†, where W_a is the fixed part of the circuit after rotation k.
    let mut qtilde: Vec<Gate> = c.gates()[pos + 1..]
        .iter()
        .rev()
        .filter(|g| g.is_fixed_clifford())
        .map(|g| g.inverse())
        .collect::<Result<_>>()?;

    // W̃ makes site q of W̃† P W̃ anticommute with V.
    let flip_onto = |word: &PauliString| -> Option<Gate> {
        (word.get_unchecked(q) == v).then(|| {
            if v == SingleQubitPauli::Y {
                Gate::S(q)
            } else {
                Gate::H(q)
            }
        })
    };
    let mut wtilde: Vec<Gate> = Vec::new();
    match p.get_unchecked(q) {
        SingleQubitPauli::I => {
            let i = (0..n)
                .find(|&i| p.get_unchecked(i) != SingleQubitPauli::I)
                .ok_or_else(|| Error::Domain("term is the identity".into()))?;
            let w1 = match p.get_unchecked(i) {
                SingleQubitPauli::X | SingleQubitPauli::Y => Gate::CX(i, q),
                _ => Gate::CX(q, i),
            };
            let mut p1 = p.clone();
            conj_fixed(&mut p1, &w1);
            // W̃ = W̃₁ W̃₂: W̃₂ runs first in time.
            wtilde.extend(flip_onto(&p1));
            wtilde.push(w1);
        }
        _ => wtilde.extend(flip_onto(p)),
    }
    qtilde.extend(wtilde);

    let mut wrapped = c.gates().to_vec();
    wrapped.extend(&qtilde);
    let wrapped = Circuit::new(n, wrapped)?;
    let plus = evolved_word(&wrapped, p, &ShiftVector::unit(k, 1))?;
    let minus = evolved_word(&wrapped, p, &ShiftVector::unit(k, 3))?;
    if plus.unsigned() != minus.unsigned() || plus.sign() == minus.sign() {
        return Err(Error::Internal(format!(
            "shifted words {plus} and {minus} are not opposite"
        )));
    }

    // Q diagonalizes the shifted word site by site.
    let mut q_gates = Vec::new();
    for i in 0..n {
        match plus.get_unchecked(i) {
            SingleQubitPauli::X => q_gates.push(Gate::H(i)),
            SingleQubitPauli::Y => q_gates.extend([Gate::H(i), Gate::S(i)]),
            _ => {}
        }
    }
    let mut diag = plus.clone();
    for g in q_gates.iter().rev() {
        conj_fixed(&mut diag, g);
    }
    if !diag.is_diagonal() {
        return Err(Error::Internal(format!("encoder left {diag} off-diagonal")));
    }
    Ok(LcePair {
        n_qubits: n,
        q_gates,
        qtilde_gates: qtilde,
        k,
        i0,
        achieved_sign: diag.sign(),
    })
}

impl LcePair {
    /// Flips `achieved_sign` to +1 by prefixing an `X` on a site where the diagonalized
    /// word carries `Z` (`X Z X = -Z`). Returns the pair unchanged when already +1.
    pub fn with_positive_sign(&self, c: &Circuit, obs: &PauliObservable) -> Result<LcePair> {
        if self.achieved_sign == 1 {
            return Ok(self.clone());
        }
        let t = lce_transform(c, self)?;
        let p = &obs.terms()[self.i0].1;
        let diag = evolved_word(&t, p, &ShiftVector::unit(self.k, 1))?;
        let site = (0..self.n_qubits)
            .find(|&i| diag.get_unchecked(i) == SingleQubitPauli::Z)
            .ok_or_else(|| Error::Internal(format!("diagonal word {diag} has no Z site")))?;
        let mut out = self.clone();
        out.q_gates.insert(0, Gate::X(site));
        out.achieved_sign = 1;
        Ok(out)
    }
}

/// `β_{i0}(H) = ±c_{i0} + ½ Σ_{i≠i0} c_i (<P̃_i^{0,e_k}> - <P̃_i^{e_k,e_k}>)`, evaluated term by
/// term on the transformed circuit.
pub fn beta(c: &Circuit, obs: &PauliObservable, pair: &LcePair) -> Result<f64> {
    let t = lce_transform(c, pair)?;
    let (plus, minus) = (ShiftVector::unit(pair.k, 1), ShiftVector::unit(pair.k, 3));
    let mut out = pair.achieved_sign as f64 * obs.terms()[pair.i0].0;
    for (i, (coeff, p)) in obs.terms().iter().enumerate() {
        if i == pair.i0 {
            continue;
        }
        let a = vacuum_expectation(&evolved_word(&t, p, &plus)?) as f64;
        let b = vacuum_expectation(&evolved_word(&t, p, &minus)?) as f64;
        out += 0.5 * coeff * (a - b);
    }
    Ok(out)
}

/// Circuit model and sample sizes for `cancellation_study`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CancellationConfig {
    pub n_qubits: usize,
    pub n_terms: usize,
    pub n_trials: usize,
    #[serde(default = "default_family")]
    pub family: Family,
    #[serde(default = "default_layers")]
    pub layers: usize,
}

fn default_family() -> Family {
    Family::MHea
}

fn default_layers() -> usize {
    1
}

impl CancellationConfig {
    pub fn new(n_qubits: usize, n_terms: usize, n_trials: usize) -> Self {
        CancellationConfig {
            n_qubits,
            n_terms,
            n_trials,
            family: Family::MHea,
            layers: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CancellationReport {
    pub n_qubits: usize,
    pub n_terms: usize,
    pub n_trials: usize,
    /// Trials with `β² = c_{i0}²`.
    pub n_exact: usize,
    pub frequency: f64,
}

/// One trial's outcome, kept for cross-checks.
#[derive(Debug, Clone)]
pub struct CancellationTrial {
    pub circuit: Circuit,
    pub observable: PauliObservable,
    pub pair: LcePair,
    pub beta: f64,
}

/// Random weighted observables with uniform `(k, i0)`; counts trials without cancellation.
pub fn cancellation_study<R: Rng + ?Sized>(
    cfg: &CancellationConfig,
    rng: &mut R,
) -> Result<CancellationReport> {
    cancellation_trials(cfg, rng, |_| {})
}

/// As `cancellation_study`, handing every trial to `inspect`.
pub fn cancellation_trials<R: Rng + ?Sized>(
    cfg: &CancellationConfig,
    rng: &mut R,
    mut inspect: impl FnMut(&CancellationTrial),
) -> Result<CancellationReport> {
    if cfg.n_trials == 0 || cfg.n_terms == 0 {
        return Err(Error::Domain("need at least one trial and one term".into()));
    }
    let mut spec = AnsatzSpec {
        family: cfg.family,
        n_qubits: cfg.n_qubits,
        layers: cfg.layers,
        seed: 0,
    };
    let fixed = (cfg.family != Family::RPqc)
        .then(|| build_ansatz(&spec))
        .transpose()?;
    let mut n_exact = 0;
    for _ in 0..cfg.n_trials {
        let circuit = match &fixed {
            Some(c) => c.clone(),
            None => {
                spec.seed = rng.random();
                build_ansatz(&spec)?
            }
        };
        let observable = PauliObservable::random(cfg.n_qubits, cfg.n_terms, true, rng)?;
        let k = rng.random_range(0..circuit.n_params());
        let i0 = rng.random_range(0..cfg.n_terms);
        let pair = construct_lce(&circuit, &observable, k, i0)?;
        let b = beta(&circuit, &observable, &pair)?;
        let c0 = observable.terms()[i0].0;
        if (b * b - c0 * c0).abs() <= 1e-12 {
            n_exact += 1;
        }
        inspect(&CancellationTrial {
            circuit,
            observable,
            pair,
            beta: b,
        });
    }
    Ok(CancellationReport {
        n_qubits: cfg.n_qubits,
        n_terms: cfg.n_terms,
        n_trials: cfg.n_trials,
        n_exact,
        frequency: n_exact as f64 / cfg.n_trials as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford_eval::gradient_at_zero;
    use SingleQubitPauli::*;

    fn obs(s: &str) -> PauliObservable {
        PauliObservable::single(s.parse().unwrap()).unwrap()
    }

    #[test]
    fn mhea_xxz_direction_ten() {
        let c = build_ansatz(&AnsatzSpec {
            family: Family::MHea,
            n_qubits: 3,
            layers: 2,
            seed: 0,
        })
        .unwrap();
        let h = obs("XXZ");
        let pair = construct_lce(&c, &h, 10, 0).unwrap();
        let g = gradient_at_zero(&lce_transform(&c, &pair).unwrap(), &h).unwrap();
        assert_eq!(g[10], pair.achieved_sign as f64);
        assert_eq!(beta(&c, &h, &pair).unwrap(), g[10]);
    }

    #[test]
    fn hadamard_branch() {
        let c = Circuit::new(
            1,
            vec![Gate::ParamRot {
                axis: Z,
                qubit: 0,
                param: 0,
            }],
        )
        .unwrap();
        let h = obs("Z");
        let pair = construct_lce(&c, &h, 0, 0).unwrap();
        assert_eq!(pair.qtilde_gates, vec![Gate::H(0)]);
        let g = gradient_at_zero(&lce_transform(&c, &pair).unwrap(), &h).unwrap();
        assert_eq!(g[0].abs(), 1.0);
    }

    #[test]
    fn cx_branch() {
        let c = Circuit::new(
            2,
            vec![Gate::ParamRot {
                axis: X,
                qubit: 0,
                param: 0,
            }],
        )
        .unwrap();
        for word in ["IX", "IY", "IZ"] {
            let h = obs(word);
            let pair = construct_lce(&c, &h, 0, 0).unwrap();
            assert!(pair.qtilde_gates.iter().any(|g| matches!(g, Gate::CX(..))));
            let g = gradient_at_zero(&lce_transform(&c, &pair).unwrap(), &h).unwrap();
            assert_eq!(g[0].abs(), 1.0, "{word}");
        }
    }

    #[test]
    fn positive_sign_normalization() {
        for k in 0..18 {
            let c = build_ansatz(&AnsatzSpec {
                family: Family::MHea,
                n_qubits: 3,
                layers: 2,
                seed: 0,
            })
            .unwrap();
            let h = obs("-YXZ");
            let pair = construct_lce(&c, &h, k, 0)
                .unwrap()
                .with_positive_sign(&c, &h)
                .unwrap();
            let g = gradient_at_zero(&lce_transform(&c, &pair).unwrap(), &h).unwrap();
            assert_eq!(g[k], 1.0);
        }
    }

    #[test]
    fn json_round_trip() {
        let c = build_ansatz(&AnsatzSpec {
            family: Family::FHea,
            n_qubits: 3,
            layers: 1,
            seed: 0,
        })
        .unwrap();
        let pair = construct_lce(&c, &obs("XIY"), 5, 0).unwrap();
        let s = serde_json::to_string(&pair).unwrap();
        assert_eq!(serde_json::from_str::<LcePair>(&s).unwrap(), pair);
    }

    #[test]
    fn bad_inputs() {
        let c = Circuit::new(
            2,
            vec![Gate::ParamRot {
                axis: X,
                qubit: 0,
                param: 0,
            }],
        )
        .unwrap();
        assert!(construct_lce(&c, &obs("ZZ"), 1, 0).is_err());
        assert!(construct_lce(&c, &obs("ZZ"), 0, 1).is_err());
        assert!(construct_lce(&c, &obs("ZZZ"), 0, 0).is_err());
    }
}
