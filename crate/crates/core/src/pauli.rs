//! Signed Pauli strings in symplectic bit form and their exact conjugation by
//! Clifford gates and quarter-turn Pauli rotations.
//!
//! A string is `sign * P_0 ⊗ P_1 ⊗ ...` with Hermitian `Y`. Qubit `q` lives in bit
//! `q % 64` of word `q / 64` of both masks. Conjugation always means `g† p g`, which
//! is the Heisenberg picture: a circuit `U = g_n ... g_1` acts on an observable as
//! `U† P U`, so gates are applied to the string from last to first.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};

type Words = SmallVec<[u64; 1]>;

/// Single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SingleQubitPauli {
    I,
    X,
    Y,
    Z,
}

impl SingleQubitPauli {
    pub const AXES: [SingleQubitPauli; 3] = [Self::X, Self::Y, Self::Z];

    /// (x bit, z bit)
    pub fn bits(self) -> (bool, bool) {
        match self {
            Self::I => (false, false),
            Self::X => (true, false),
            Self::Y => (true, true),
            Self::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Self::I,
            (true, false) => Self::X,
            (true, true) => Self::Y,
            (false, true) => Self::Z,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Self::I => 'I',
            Self::X => 'X',
            Self::Y => 'Y',
            Self::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'I' => Ok(Self::I),
            'X' => Ok(Self::X),
            'Y' => Ok(Self::Y),
            'Z' => Ok(Self::Z),
            other => Err(Error::Parse(format!("not a Pauli letter: {other:?}"))),
        }
    }

    fn index(self) -> u8 {
        match self {
            Self::I => 0,
            Self::X => 1,
            Self::Y => 2,
            Self::Z => 3,
        }
    }
}

/// For distinct non-identity `a`, `b` returns `(c, eps)` with `a b = i eps c`.
fn product_of_anticommuting(a: SingleQubitPauli, b: SingleQubitPauli) -> (SingleQubitPauli, bool) {
    // XY = iZ, YZ = iX, ZX = iY; reversed order flips the sign.
    let (ia, ib) = (a.index(), b.index());
    let c = SingleQubitPauli::AXES[(6 - ia - ib - 1) as usize];
    let cyclic = (ib + 3 - ia) % 3 == 1;
    (c, cyclic)
}

/// Clifford elements that act on Pauli strings by exact conjugation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CliffordGate {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    CX(usize, usize),
    /// `R_axis(turns * pi/2) = exp(-i turns pi/4 axis)`, `turns` in 0..4.
    Rot {
        axis: SingleQubitPauli,
        qubit: usize,
        turns: u8,
    },
}

impl CliffordGate {
    fn check(&self, n: usize) -> Result<()> {
        let bad = |q: usize| {
            (q >= n).then_some(Error::QubitIndex {
                index: q,
                n_qubits: n,
            })
        };
        let err = match *self {
            CliffordGate::H(q) | CliffordGate::S(q) | CliffordGate::Sdg(q) | CliffordGate::X(q) => {
                bad(q)
            }
            CliffordGate::CX(c, t) => {
                if c == t && c < n {
                    return Err(Error::Dimension(format!("CX control equals target ({c})")));
                }
                bad(c).or_else(|| bad(t))
            }
            CliffordGate::Rot { axis, qubit, turns } => {
                if axis == SingleQubitPauli::I {
                    return Err(Error::InvalidAxis);
                }
                if turns > 3 {
                    return Err(Error::Domain(format!("quarter turns {turns} not in 0..4")));
                }
                bad(qubit)
            }
        };
        err.map_or(Ok(()), Err)
    }

    /// The gate whose conjugation undoes this one.
    pub fn inverse(&self) -> CliffordGate {
        match *self {
            CliffordGate::S(q) => CliffordGate::Sdg(q),
            CliffordGate::Sdg(q) => CliffordGate::S(q),
            CliffordGate::Rot { axis, qubit, turns } => CliffordGate::Rot {
                axis,
                qubit,
                turns: (4 - turns) % 4,
            },
            g => g,
        }
    }
}

/// Signed N-qubit Pauli string.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Words,
    z: Words,
    neg: bool,
}

#[inline]
fn loc(q: usize) -> (usize, u64) {
    (q >> 6, 1u64 << (q & 63))
}

fn n_words(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        let w = n_words(n_qubits);
        PauliString {
            n: n_qubits,
            x: smallvec![0; w],
            z: smallvec![0; w],
            neg: false,
        }
    }

    pub fn from_sites(sites: &[SingleQubitPauli]) -> Self {
        let mut p = Self::identity(sites.len());
        for (q, &s) in sites.iter().enumerate() {
            p.set_unchecked(q, s);
        }
        p
    }

    /// `p` on qubit `q`, identity elsewhere.
    pub fn single(n_qubits: usize, qubit: usize, p: SingleQubitPauli) -> Result<Self> {
        let mut out = Self::identity(n_qubits);
        out.set(qubit, p)?;
        Ok(out)
    }

    /// Builds a string from raw masks. Bits at or above `n_qubits` must be clear.
    pub fn from_masks(n_qubits: usize, x: &[u64], z: &[u64], negative: bool) -> Result<Self> {
        let w = n_words(n_qubits);
        if x.len() != w || z.len() != w {
            return Err(Error::Dimension(format!(
                "{n_qubits} qubits need {w} mask words"
            )));
        }
        let p = PauliString {
            n: n_qubits,
            x: x.into(),
            z: z.into(),
            neg: negative,
        };
        if p.clone().masked() != p {
            return Err(Error::Dimension("mask bits set beyond n_qubits".into()));
        }
        Ok(p)
    }

    fn masked(mut self) -> Self {
        let rem = self.n & 63;
        let last = self.x.len() - 1;
        let keep = if rem == 0 {
            if self.n == 0 {
                0
            } else {
                u64::MAX
            }
        } else {
            (1u64 << rem) - 1
        };
        self.x[last] &= keep;
        self.z[last] &= keep;
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> &[u64] {
        &self.x
    }

    pub fn z_mask(&self) -> &[u64] {
        &self.z
    }

    /// +1 or -1.
    pub fn sign(&self) -> i8 {
        if self.neg {
            -1
        } else {
            1
        }
    }

    pub fn is_negative(&self) -> bool {
        self.neg
    }

    pub fn negate(&mut self) {
        self.neg = !self.neg;
    }

    pub fn negated(mut self) -> Self {
        self.neg = !self.neg;
        self
    }

    /// Same word with sign +1.
    pub fn unsigned(&self) -> Self {
        let mut p = self.clone();
        p.neg = false;
        p
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(self.z.iter()).all(|&w| w == 0)
    }

    /// True when the word is a product of I and Z only.
    pub fn is_diagonal(&self) -> bool {
        self.x.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn get(&self, q: usize) -> Result<SingleQubitPauli> {
        if q >= self.n {
            return Err(Error::QubitIndex {
                index: q,
                n_qubits: self.n,
            });
        }
        Ok(self.get_unchecked(q))
    }

    #[inline]
    pub(crate) fn get_unchecked(&self, q: usize) -> SingleQubitPauli {
        let (w, b) = loc(q);
        SingleQubitPauli::from_bits(self.x[w] & b != 0, self.z[w] & b != 0)
    }

    pub fn set(&mut self, q: usize, p: SingleQubitPauli) -> Result<()> {
        if q >= self.n {
            return Err(Error::QubitIndex {
                index: q,
                n_qubits: self.n,
            });
        }
        self.set_unchecked(q, p);
        Ok(())
    }

    #[inline]
    fn set_unchecked(&mut self, q: usize, p: SingleQubitPauli) {
        let (w, b) = loc(q);
        let (x, z) = p.bits();
        self.x[w] = if x { self.x[w] | b } else { self.x[w] & !b };
        self.z[w] = if z { self.z[w] | b } else { self.z[w] & !b };
    }

    pub fn sites(&self) -> Vec<SingleQubitPauli> {
        (0..self.n).map(|q| self.get_unchecked(q)).collect()
    }

    /// True iff the two strings commute.
    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "{} vs {} qubits",
                self.n, other.n
            )));
        }
        Ok(self.commutes_unchecked(other))
    }

    pub(crate) fn commutes_unchecked(&self, other: &PauliString) -> bool {
        let mut parity = 0u32;
        for i in 0..self.x.len() {
            parity ^= ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones() & 1;
        }
        parity == 0
    }

    /// Uniform over the `4^n - 1` non-identity words, sign +1.
    pub fn random_nonidentity<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::Domain("need at least one qubit".into()));
        }
        loop {
            let mut p = Self::identity(n_qubits);
            for i in 0..p.x.len() {
                p.x[i] = rng.random();
                p.z[i] = rng.random();
            }
            let p = p.masked();
            if !p.is_identity() {
                return Ok(p);
            }
        }
    }

    /// Returns `g† self g`.
    pub fn conjugate_by_clifford_gate(&self, g: &CliffordGate) -> Result<Self> {
        g.check(self.n)?;
        let mut out = self.clone();
        out.conjugate_in_place(g);
        Ok(out)
    }

    /// Returns `R† self R` for `R = R_axis(quarter_turns * pi/2)`.
    pub fn conjugate_by_rotation(
        &self,
        axis: SingleQubitPauli,
        qubit: usize,
        quarter_turns: u8,
    ) -> Result<Self> {
        self.conjugate_by_clifford_gate(&CliffordGate::Rot {
            axis,
            qubit,
            turns: quarter_turns % 4,
        })
    }

    /// Returns `U† self U` for `U = gates[last] ... gates[0]` (gates listed in time order).
    pub fn conjugate_by_gates(&self, gates: &[CliffordGate]) -> Result<Self> {
        for g in gates {
            g.check(self.n)?;
        }
        let mut out = self.clone();
        for g in gates.iter().rev() {
            out.conjugate_in_place(g);
        }
        Ok(out)
    }

    /// In-place `g† self g`. Qubit indices must already be validated.
    #[inline]
    pub(crate) fn conjugate_in_place(&mut self, g: &CliffordGate) {
        match *g {
            CliffordGate::H(q) => {
                let (w, b) = loc(q);
                let (x, z) = (self.x[w] & b, self.z[w] & b);
                if x != 0 && z != 0 {
                    self.neg = !self.neg;
                }
                self.x[w] = (self.x[w] & !b) | z;
                self.z[w] = (self.z[w] & !b) | x;
            }
            CliffordGate::S(q) => {
                // X -> -Y, Y -> X
                let (w, b) = loc(q);
                if self.x[w] & b != 0 {
                    if self.z[w] & b == 0 {
                        self.neg = !self.neg;
                    }
                    self.z[w] ^= b;
                }
            }
            CliffordGate::Sdg(q) => {
                // X -> Y, Y -> -X
                let (w, b) = loc(q);
                if self.x[w] & b != 0 {
                    if self.z[w] & b != 0 {
                        self.neg = !self.neg;
                    }
                    self.z[w] ^= b;
                }
            }
            CliffordGate::X(q) => {
                let (w, b) = loc(q);
                if self.z[w] & b != 0 {
                    self.neg = !self.neg;
                }
            }
            CliffordGate::CX(c, t) => {
                let (wc, bc) = loc(c);
                let (wt, bt) = loc(t);
                let xc = self.x[wc] & bc != 0;
                let zc = self.z[wc] & bc != 0;
                let xt = self.x[wt] & bt != 0;
                let zt = self.z[wt] & bt != 0;
                if xc && zt && (xt == zc) {
                    self.neg = !self.neg;
                }
                if xc {
                    self.x[wt] ^= bt;
                }
                if zt {
                    self.z[wc] ^= bc;
                }
            }
            CliffordGate::Rot { axis, qubit, turns } => self.rotate_in_place(axis, qubit, turns),
        }
    }

    #[inline]
    pub(crate) fn rotate_in_place(&mut self, axis: SingleQubitPauli, q: usize, turns: u8) {
        let turns = turns & 3;
        if turns == 0 {
            return;
        }
        let p = self.get_unchecked(q);
        if p == SingleQubitPauli::I || p == axis {
            return;
        }
        if turns == 2 {
            self.neg = !self.neg;
            return;
        }
        // R(±pi/2)† P R(±pi/2) = ∓i P V for anticommuting P, V.
        let (c, cyclic) = product_of_anticommuting(p, axis);
        self.set_unchecked(q, c);
        if (turns == 1) != cyclic {
            self.neg = !self.neg;
        }
    }

    /// True when site `q` anticommutes with `axis`.
    #[inline]
    pub(crate) fn anticommutes_at(&self, q: usize, axis: SingleQubitPauli) -> bool {
        let p = self.get_unchecked(q);
        p != SingleQubitPauli::I && p != axis
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: String = (0..self.n)
            .map(|q| self.get_unchecked(q).to_char())
            .collect();
        if self.neg {
            write!(f, "-{body}")
        } else {
            write!(f, "{body}")
        }
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        if body.is_empty() {
            return Err(Error::Parse("empty Pauli word".into()));
        }
        let sites = body
            .chars()
            .map(SingleQubitPauli::from_char)
            .collect::<Result<Vec<_>>>()?;
        let mut p = PauliString::from_sites(&sites);
        p.neg = neg;
        Ok(p)
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
