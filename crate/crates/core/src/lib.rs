//! Classical toolkit for parameterized quantum circuits near Clifford points.
//!
//! Costs at quarter-turn grid points are exact stabilizer computations
//! ([`clifford_eval`]). From them come Taylor surrogates ([`surrogate`]) and Linear
//! Clifford Encoders ([`lce`]), which fix a chosen gradient component at ±1. A dense
//! simulator ([`statevector`]) serves as the reference, and [`experiments`] drives
//! the seeded studies.

// `!(x > 0.0)` is used on purpose so that NaN is rejected along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod clifford_eval;
pub mod error;
pub mod experiments;
pub mod lce;
pub mod pauli;
pub mod statevector;
pub mod surrogate;
pub mod table;

pub use circuit::{
    build_ansatz, clifford_gates_at_shift, lce_transform, AnsatzSpec, Circuit, Family, Gate,
};
pub use clifford_eval::{
    cost_at_shift, gradient_at_zero, vacuum_expectation, PauliObservable, ShiftCache, ShiftVector,
};
pub use error::{Error, Result};
pub use lce::{beta, construct_lce, LcePair};
pub use pauli::{CliffordGate, PauliString, SingleQubitPauli};
pub use surrogate::{
    build_surrogate, enumerate_multi_indices, taylor_coefficient, MultiIndex, TaylorSurrogate,
};
