//! Fixtures shared by the criterion benches.

use nearclifford::{build_ansatz, AnsatzSpec, Circuit, Family, PauliObservable, PauliString};

pub fn ansatz(family: Family, n_qubits: usize, layers: usize) -> Circuit {
    build_ansatz(&AnsatzSpec {
        family,
        n_qubits,
        layers,
        seed: 11,
    })
    .expect("valid bench ansatz")
}

/// `Z` on every qubit but the last, `X` on the last.
pub fn dense_word(n_qubits: usize) -> PauliObservable {
    let body: String = (0..n_qubits)
        .map(|q| if q + 1 == n_qubits { 'X' } else { 'Z' })
        .collect();
    PauliObservable::single(body.parse::<PauliString>().expect("valid word")).expect("non-identity")
}
