//! Gate-level IR for parameterized circuits `U(θ) = W_D R_D(θ_D) ... W_1 R_1(θ_1)`
//! and builders for the benchmark ansätze.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clifford_eval::ShiftVector;
use crate::error::{Error, Result};
use crate::lce::LcePair;
use crate::pauli::{CliffordGate, SingleQubitPauli};

/// One gate. Gates are listed in time order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    H(usize),
    S(usize),
    Sdg(usize),
    CX(usize, usize),
    X(usize),
    /// `exp(-i θ_param axis / 2)` on `qubit`.
    ParamRot {
        axis: SingleQubitPauli,
        qubit: usize,
        param: usize,
    },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::S(q) | Gate::Sdg(q) | Gate::X(q) => vec![q],
            Gate::CX(c, t) => vec![c, t],
            Gate::ParamRot { qubit, .. } => vec![qubit],
        }
    }

    pub fn is_fixed_clifford(&self) -> bool {
        !matches!(self, Gate::ParamRot { .. })
    }

    /// The Clifford element this gate becomes when its parameter sits at `turns` quarter turns.
    /// Returns `None` for an identity rotation.
    #[inline]
    pub fn to_clifford(&self, turns: u8) -> Option<CliffordGate> {
        Some(match *self {
            Gate::H(q) => CliffordGate::H(q),
            Gate::S(q) => CliffordGate::S(q),
            Gate::Sdg(q) => CliffordGate::Sdg(q),
            Gate::CX(c, t) => CliffordGate::CX(c, t),
            Gate::X(q) => CliffordGate::X(q),
            Gate::ParamRot { axis, qubit, .. } => {
                let turns = turns & 3;
                if turns == 0 {
                    return None;
                }
                CliffordGate::Rot { axis, qubit, turns }
            }
        })
    }

    /// Inverse of a fixed Clifford gate.
    pub fn inverse(&self) -> Result<Gate> {
        Ok(match *self {
            Gate::S(q) => Gate::Sdg(q),
            Gate::Sdg(q) => Gate::S(q),
            Gate::ParamRot { .. } => {
                return Err(Error::Domain(
                    "parameterized rotations have no fixed inverse".into(),
                ))
            }
            g => g,
        })
    }
}

/// Parameterized circuit acting on `|0...0>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    n_params: usize,
}

impl Circuit {
    /// Validates qubit ranges, CX operands and that parameter indices are exactly `0..D`.
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::Dimension("circuit needs at least one qubit".into()));
        }
        let mut seen = Vec::new();
        for g in &gates {
            for q in g.qubits() {
                if q >= n_qubits {
                    return Err(Error::QubitIndex { index: q, n_qubits });
                }
            }
            match *g {
                Gate::CX(c, t) if c == t => {
                    return Err(Error::Dimension(format!("CX control equals target ({c})")))
                }
                Gate::ParamRot {
                    axis: SingleQubitPauli::I,
                    ..
                } => return Err(Error::InvalidAxis),
                Gate::ParamRot { param, .. } => {
                    if param >= seen.len() {
                        seen.resize(param + 1, false);
                    }
                    if seen[param] {
                        return Err(Error::Dimension(format!(
                            "parameter index {param} repeated"
                        )));
                    }
                    seen[param] = true;
                }
                _ => {}
            }
        }
        if let Some(gap) = seen.iter().position(|s| !s) {
            return Err(Error::Dimension(format!("parameter index {gap} missing")));
        }
        Ok(Circuit {
            n_qubits,
            n_params: seen.len(),
            gates,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Number of parameters D.
    pub fn n_params(&self) -> usize {
        self.n_params
    }

    /// Gate position of each parameter.
    pub fn param_positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.n_params];
        for (i, g) in self.gates.iter().enumerate() {
            if let Gate::ParamRot { param, .. } = g {
                pos[*param] = i;
            }
        }
        pos
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&CircuitRecord::from(self)).expect("circuit serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: CircuitRecord =
            serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        rec.try_into()
    }
}

/// Replaces each rotation by its quarter-turn Clifford; zero entries are dropped.
pub fn clifford_gates_at_shift(c: &Circuit, shift: &ShiftVector) -> Result<Vec<CliffordGate>> {
    let turns = shift.dense(c.n_params())?;
    Ok(c.gates
        .iter()
        .filter_map(|g| {
            let t = match g {
                Gate::ParamRot { param, .. } => turns[*param],
                _ => 0,
            };
            g.to_clifford(t)
        })
        .collect())
}

/// Wraps `c` as `Q̃ U Q`: the pair's prefix gates run first, its suffix gates last.
pub fn lce_transform(c: &Circuit, pair: &LcePair) -> Result<Circuit> {
    if pair.n_qubits != c.n_qubits {
        return Err(Error::Dimension(format!(
            "pair built for {} qubits, circuit has {}",
            pair.n_qubits, c.n_qubits
        )));
    }
    if pair
        .q_gates
        .iter()
        .chain(&pair.qtilde_gates)
        .any(|g| !g.is_fixed_clifford())
    {
        return Err(Error::Domain(
            "encoder gates must be fixed Cliffords".into(),
        ));
    }
    let gates: Vec<Gate> = pair
        .q_gates
        .iter()
        .chain(&c.gates)
        .chain(&pair.qtilde_gates)
        .copied()
        .collect();
    Circuit::new(c.n_qubits, gates)
}

/// Benchmark ansatz families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "mHEA")]
    MHea,
    #[serde(rename = "fHEA")]
    FHea,
    #[serde(rename = "rPQC")]
    RPqc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub family: Family,
    pub n_qubits: usize,
    pub layers: usize,
    /// Only read for rPQC.
    #[serde(default)]
    pub seed: u64,
}

impl AnsatzSpec {
    pub fn n_params(&self) -> usize {
        let (n, l) = (self.n_qubits, self.layers);
        match self.family {
            Family::MHea => 2 * n * (l + 1),
            Family::FHea => 3 * n * (l + 1),
            Family::RPqc => n * l,
        }
    }
}

pub fn build_ansatz(spec: &AnsatzSpec) -> Result<Circuit> {
    let (n, l) = (spec.n_qubits, spec.layers);
    if n < 2 {
        return Err(Error::InvalidSpec(format!(
            "need at least 2 qubits, got {n}"
        )));
    }
    if l == 0 {
        return Err(Error::InvalidSpec("need at least one layer".into()));
    }
    let mut gates = Vec::new();
    let mut next = 0usize;
    let mut rot_layer = |gates: &mut Vec<Gate>, axis: SingleQubitPauli| {
        for q in 0..n {
            gates.push(Gate::ParamRot {
                axis,
                qubit: q,
                param: next,
            });
            next += 1;
        }
    };
    use SingleQubitPauli::{X, Y, Z};
    match spec.family {
        Family::MHea => {
            rot_layer(&mut gates, Y);
            rot_layer(&mut gates, Z);
            for _ in 0..l {
                gates.extend((0..n).map(|q| Gate::CX(q, (q + 1) % n)));
                rot_layer(&mut gates, Y);
                rot_layer(&mut gates, Z);
            }
        }
        Family::FHea => {
            for layer in 0..=l {
                if layer > 0 {
                    for i in 0..n {
                        gates.extend((i + 1..n).map(|j| Gate::CX(i, j)));
                    }
                }
                rot_layer(&mut gates, X);
                rot_layer(&mut gates, Y);
                rot_layer(&mut gates, Z);
            }
        }
        Family::RPqc => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            for _ in 0..l {
                for q in 0..n {
                    if rng.random_bool(0.5) {
                        gates.push(Gate::H(q));
                    }
                    if rng.random_bool(0.5) {
                        gates.push(Gate::S(q));
                    }
                }
                for _ in 0..n {
                    let c = rng.random_range(0..n);
                    let t = (c + rng.random_range(1..n)) % n;
                    gates.push(Gate::CX(c, t));
                }
                for q in 0..n {
                    let axis = SingleQubitPauli::AXES[rng.random_range(0..3)];
                    gates.push(Gate::ParamRot {
                        axis,
                        qubit: q,
                        param: next,
                    });
                    next += 1;
                }
            }
        }
    }
    Circuit::new(n, gates)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct GateRecord {
    kind: String,
    qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    axis: Option<SingleQubitPauli>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    param_index: Option<usize>,
}

impl From<&Gate> for GateRecord {
    fn from(g: &Gate) -> Self {
        let (kind, axis, param_index) = match *g {
            Gate::H(_) => ("H", None, None),
            Gate::S(_) => ("S", None, None),
            Gate::Sdg(_) => ("Sdg", None, None),
            Gate::CX(..) => ("CX", None, None),
            Gate::X(_) => ("X", None, None),
            Gate::ParamRot { axis, param, .. } => ("Rot", Some(axis), Some(param)),
        };
        GateRecord {
            kind: kind.into(),
            qubits: g.qubits(),
            axis,
            param_index,
        }
    }
}

impl TryFrom<&GateRecord> for Gate {
    type Error = Error;

    fn try_from(r: &GateRecord) -> Result<Gate> {
        let one = || match r.qubits.as_slice() {
            [q] => Ok(*q),
            _ => Err(Error::Parse(format!(
                "{} takes one qubit, got {:?}",
                r.kind, r.qubits
            ))),
        };
        Ok(match r.kind.as_str() {
            "H" => Gate::H(one()?),
            "S" => Gate::S(one()?),
            "Sdg" => Gate::Sdg(one()?),
            "X" => Gate::X(one()?),
            "CX" => match r.qubits.as_slice() {
                [c, t] => Gate::CX(*c, *t),
                _ => {
                    return Err(Error::Parse(format!(
                        "CX takes two qubits, got {:?}",
                        r.qubits
                    )))
                }
            },
            "Rot" => Gate::ParamRot {
                axis: r
                    .axis
                    .ok_or_else(|| Error::Parse("Rot needs an axis".into()))?,
                qubit: one()?,
                param: r
                    .param_index
                    .ok_or_else(|| Error::Parse("Rot needs a param_index".into()))?,
            },
            other => return Err(Error::Parse(format!("unknown gate kind {other:?}"))),
        })
    }
}

pub(crate) fn gates_to_records(gates: &[Gate]) -> Vec<GateRecord> {
    gates.iter().map(GateRecord::from).collect()
}

pub(crate) fn records_to_gates(recs: &[GateRecord]) -> Result<Vec<Gate>> {
    recs.iter().map(Gate::try_from).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CircuitRecord {
    n_qubits: usize,
    gates: Vec<GateRecord>,
}

impl From<&Circuit> for CircuitRecord {
    fn from(c: &Circuit) -> Self {
        CircuitRecord {
            n_qubits: c.n_qubits,
            gates: gates_to_records(&c.gates),
        }
    }
}

impl TryFrom<CircuitRecord> for Circuit {
    type Error = Error;

    fn try_from(r: CircuitRecord) -> Result<Circuit> {
        Circuit::new(r.n_qubits, records_to_gates(&r.gates)?)
    }
}

impl Serialize for Circuit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CircuitRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Circuit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        CircuitRecord::deserialize(d)?
            .try_into()
            .map_err(serde::de::Error::custom)
    }
}
