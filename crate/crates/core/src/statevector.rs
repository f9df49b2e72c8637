//! Dense reference simulator. Rotations follow `R_V(θ) = exp(-iθV/2)`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::circuit::{Circuit, Gate};
use crate::clifford_eval::PauliObservable;
use crate::error::{Error, Result};
use crate::pauli::{PauliString, SingleQubitPauli};

/// Default qubit cap for dense simulation.
pub const DEFAULT_MAX_QUBITS: usize = 20;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

/// How `gradient` differentiates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GradientMode {
    ParameterShift,
    CentralDifference(f64),
    /// Reverse-mode sweep; one forward and one backward pass for all components.
    Adjoint,
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        Self::zero_state_capped(n_qubits, DEFAULT_MAX_QUBITS)
    }

    pub fn zero_state_capped(n_qubits: usize, max_qubits: usize) -> Result<Self> {
        if n_qubits > max_qubits {
            return Err(Error::Resource {
                message: format!("{n_qubits} qubits exceeds the statevector cap of {max_qubits}"),
                log_estimate: n_qubits as f64 * std::f64::consts::LN_2,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    fn pairs(&mut self, q: usize, mut f: impl FnMut(&mut Complex64, &mut Complex64)) {
        let bit = 1usize << q;
        for block in self.amps.chunks_mut(bit << 1) {
            let (a, b) = block.split_at_mut(bit);
            for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                f(x, y);
            }
        }
    }

    pub(crate) fn apply_fixed(&mut self, g: &Gate) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match *g {
            Gate::H(q) => self.pairs(q, |a, b| {
                let (x, y) = (*a, *b);
                *a = (x + y) * h;
                *b = (x - y) * h;
            }),
            Gate::S(q) => self.pairs(q, |_, b| *b *= I),
            Gate::Sdg(q) => self.pairs(q, |_, b| *b *= -I),
            Gate::X(q) => self.pairs(q, std::mem::swap),
            Gate::CX(c, t) => {
                let (cb, tb) = (1usize << c, 1usize << t);
                for i in 0..self.amps.len() {
                    if i & cb != 0 && i & tb == 0 {
                        self.amps.swap(i, i | tb);
                    }
                }
            }
            Gate::ParamRot { .. } => unreachable!("rotations need an angle"),
        }
    }

    fn apply_fixed_inverse(&mut self, g: &Gate) {
        match *g {
            Gate::S(q) => self.apply_fixed(&Gate::Sdg(q)),
            Gate::Sdg(q) => self.apply_fixed(&Gate::S(q)),
            _ => self.apply_fixed(g),
        }
    }

    /// Applies `exp(-iθV/2)` on qubit `q`.
    pub(crate) fn apply_rotation(&mut self, axis: SingleQubitPauli, q: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        match axis {
            SingleQubitPauli::X => {
                let mis = Complex64::new(0.0, -s);
                self.pairs(q, |a, b| {
                    let (x, y) = (*a, *b);
                    *a = x * c + y * mis;
                    *b = x * mis + y * c;
                })
            }
            SingleQubitPauli::Y => self.pairs(q, |a, b| {
                let (x, y) = (*a, *b);
                *a = x * c - y * s;
                *b = x * s + y * c;
            }),
            SingleQubitPauli::Z => {
                let (e0, e1) = (Complex64::new(c, -s), Complex64::new(c, s));
                self.pairs(q, |a, b| {
                    *a *= e0;
                    *b *= e1;
                })
            }
            SingleQubitPauli::I => {}
        }
    }

    /// Applies the Pauli string as an operator.
    pub fn apply_pauli(&mut self, p: &PauliString) {
        let (xm, zm) = masks(p);
        let ny = (xm & zm).count_ones();
        let phase = I.powu(ny) * p.sign() as f64;
        let old = std::mem::take(&mut self.amps);
        let mut out = vec![Complex64::new(0.0, 0.0); old.len()];
        for (b, a) in old.iter().enumerate() {
            let sgn = if ((b as u64) & zm).count_ones() & 1 == 1 {
                -1.0
            } else {
                1.0
            };
            out[b ^ xm as usize] = a * phase * sgn;
        }
        self.amps = out;
    }

    /// `<ψ|P|ψ>`.
    pub fn pauli_expectation(&self, p: &PauliString) -> Result<f64> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::Dimension(format!(
                "word has {} qubits, state {}",
                p.n_qubits(),
                self.n_qubits
            )));
        }
        let (xm, zm) = masks(p);
        let ny = (xm & zm).count_ones();
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, a) in self.amps.iter().enumerate() {
            let term = self.amps[b ^ xm as usize].conj() * a;
            if ((b as u64) & zm).count_ones() & 1 == 1 {
                acc -= term;
            } else {
                acc += term;
            }
        }
        Ok((acc * I.powu(ny)).re * p.sign() as f64)
    }

    /// `Σ_i c_i <ψ|P_i|ψ>`.
    pub fn expectation(&self, obs: &PauliObservable) -> Result<f64> {
        if obs.n_qubits() != self.n_qubits {
            return Err(Error::Dimension(format!(
                "observable has {} qubits, state {}",
                obs.n_qubits(),
                self.n_qubits
            )));
        }
        obs.terms()
            .iter()
            .map(|(c, p)| Ok(c * self.pauli_expectation(p)?))
            .sum()
    }

    /// `H|ψ>`.
    pub fn apply_observable(&self, obs: &PauliObservable) -> StateVector {
        let mut out = StateVector {
            n_qubits: self.n_qubits,
            amps: vec![Complex64::new(0.0, 0.0); self.amps.len()],
        };
        for (c, p) in obs.terms() {
            let mut t = self.clone();
            t.apply_pauli(p);
            for (o, v) in out.amps.iter_mut().zip(&t.amps) {
                *o += v * *c;
            }
        }
        out
    }
}

fn masks(p: &PauliString) -> (u64, u64) {
    (p.x_mask()[0], p.z_mask()[0])
}

fn check_theta(c: &Circuit, theta: &[f64]) -> Result<()> {
    if theta.len() != c.n_params() {
        return Err(Error::Dimension(format!(
            "theta has {} entries, circuit {} parameters",
            theta.len(),
            c.n_params()
        )));
    }
    Ok(())
}

/// `U(θ)|0>`.
pub fn run(c: &Circuit, theta: &[f64]) -> Result<StateVector> {
    run_capped(c, theta, DEFAULT_MAX_QUBITS)
}

pub fn run_capped(c: &Circuit, theta: &[f64], max_qubits: usize) -> Result<StateVector> {
    check_theta(c, theta)?;
    let mut sv = StateVector::zero_state_capped(c.n_qubits(), max_qubits)?;
    for g in c.gates() {
        match *g {
            Gate::ParamRot { axis, qubit, param } => sv.apply_rotation(axis, qubit, theta[param]),
            _ => sv.apply_fixed(g),
        }
    }
    Ok(sv)
}

/// `C(θ) = <0|U(θ)† H U(θ)|0>`.
pub fn cost(c: &Circuit, obs: &PauliObservable, theta: &[f64]) -> Result<f64> {
    run(c, theta)?.expectation(obs)
}

pub fn gradient(
    c: &Circuit,
    obs: &PauliObservable,
    theta: &[f64],
    mode: GradientMode,
) -> Result<Vec<f64>> {
    check_theta(c, theta)?;
    match mode {
        GradientMode::ParameterShift => {
            shifted_difference(c, obs, theta, std::f64::consts::FRAC_PI_2, |p, m, _| {
                0.5 * (p - m)
            })
        }
        GradientMode::CentralDifference(h) => {
            if !(h > 0.0) {
                return Err(Error::Domain(format!("step must be positive, got {h}")));
            }
            shifted_difference(c, obs, theta, h, |p, m, h| (p - m) / (2.0 * h))
        }
        GradientMode::Adjoint => adjoint_gradient(c, obs, theta).map(|(_, g)| g),
    }
}

fn shifted_difference(
    c: &Circuit,
    obs: &PauliObservable,
    theta: &[f64],
    h: f64,
    combine: impl Fn(f64, f64, f64) -> f64,
) -> Result<Vec<f64>> {
    let mut t = theta.to_vec();
    (0..theta.len())
        .map(|k| {
            t[k] = theta[k] + h;
            let plus = cost(c, obs, &t)?;
            t[k] = theta[k] - h;
            let minus = cost(c, obs, &t)?;
            t[k] = theta[k];
            Ok(combine(plus, minus, h))
        })
        .collect()
}

/// Cost and exact gradient from one forward and one reverse sweep.
pub fn adjoint_gradient(
    c: &Circuit,
    obs: &PauliObservable,
    theta: &[f64],
) -> Result<(f64, Vec<f64>)> {
    check_theta(c, theta)?;
    let mut phi = run(c, theta)?;
    let mut lambda = phi.apply_observable(obs);
    let value = phi.inner(&lambda).re;
    let mut grad = vec![0.0; theta.len()];
    for g in c.gates().iter().rev() {
        match *g {
            Gate::ParamRot { axis, qubit, param } => {
                // ∂_k C = Im <λ|V|φ> with φ, λ taken right after the rotation.
                grad[param] = axis_matrix_element(&lambda, &phi, axis, qubit).im;
                phi.apply_rotation(axis, qubit, -theta[param]);
                lambda.apply_rotation(axis, qubit, -theta[param]);
            }
            _ => {
                phi.apply_fixed_inverse(g);
                lambda.apply_fixed_inverse(g);
            }
        }
    }
    Ok((value, grad))
}

/// `<a|V_q|b>` for a single-qubit Pauli `V` on qubit `q`.
fn axis_matrix_element(
    a: &StateVector,
    b: &StateVector,
    axis: SingleQubitPauli,
    q: usize,
) -> Complex64 {
    let bit = 1usize << q;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.amps.len() {
        if i & bit != 0 {
            continue;
        }
        let j = i | bit;
        let (a0, a1, b0, b1) = (a.amps[i].conj(), a.amps[j].conj(), b.amps[i], b.amps[j]);
        acc += match axis {
            SingleQubitPauli::X => a0 * b1 + a1 * b0,
            SingleQubitPauli::Y => (a1 * b0 - a0 * b1) * I,
            SingleQubitPauli::Z => a0 * b0 - a1 * b1,
            SingleQubitPauli::I => a0 * b0 + a1 * b1,
        };
    }
    acc
}

/// Per-term binomial shot estimate of `<H>`.
pub fn sampled_expectation<R: Rng + ?Sized>(
    sv: &StateVector,
    obs: &PauliObservable,
    shots: u64,
    rng: &mut R,
) -> Result<f64> {
    if shots == 0 {
        return Err(Error::Domain("shots must be at least 1".into()));
    }
    let mut total = 0.0;
    for (c, p) in obs.terms() {
        let e = sv.pauli_expectation(p)?;
        let prob = ((1.0 + e) / 2.0).clamp(0.0, 1.0);
        let k = Binomial::new(shots, prob)
            .map_err(|e| Error::Domain(e.to_string()))?
            .sample(rng);
        total += c * (2.0 * k as f64 / shots as f64 - 1.0);
    }
    Ok(total)
}

/// Parameter-shift gradient with every cost replaced by a sampled estimate.
pub fn sampled_gradient<R: Rng + ?Sized>(
    c: &Circuit,
    obs: &PauliObservable,
    theta: &[f64],
    shots: u64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_theta(c, theta)?;
    let mut t = theta.to_vec();
    let shift = std::f64::consts::FRAC_PI_2;
    let mut out = Vec::with_capacity(theta.len());
    for k in 0..theta.len() {
        t[k] = theta[k] + shift;
        let plus = sampled_expectation(&run(c, &t)?, obs, shots, rng)?;
        t[k] = theta[k] - shift;
        let minus = sampled_expectation(&run(c, &t)?, obs, shots, rng)?;
        t[k] = theta[k];
        out.push(0.5 * (plus - minus));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use SingleQubitPauli::*;

    fn obs(s: &str) -> PauliObservable {
        PauliObservable::single(s.parse().unwrap()).unwrap()
    }

    fn rot(axis: SingleQubitPauli, q: usize, k: usize) -> Gate {
        Gate::ParamRot {
            axis,
            qubit: q,
            param: k,
        }
    }

    #[test]
    fn basics() {
        let empty = Circuit::new(2, vec![]).unwrap();
        assert_eq!(
            run(&empty, &[]).unwrap().amplitudes()[0],
            Complex64::new(1.0, 0.0)
        );
        let ry = Circuit::new(1, vec![rot(Y, 0, 0)]).unwrap();
        assert!((cost(&ry, &obs("Z"), &[std::f64::consts::PI]).unwrap() + 1.0).abs() < 1e-15);
        let plus = Circuit::new(1, vec![Gate::H(0)]).unwrap();
        assert!(cost(&plus, &obs("Z"), &[]).unwrap().abs() < 1e-15);
        assert!((cost(&plus, &obs("X"), &[]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rotation_closed_forms() {
        let t = 0.37;
        let ry = Circuit::new(1, vec![rot(Y, 0, 0)]).unwrap();
        assert!((cost(&ry, &obs("Z"), &[t]).unwrap() - t.cos()).abs() < 1e-15);
        assert!((cost(&ry, &obs("X"), &[t]).unwrap() - t.sin()).abs() < 1e-15);
        let rx = Circuit::new(1, vec![rot(X, 0, 0)]).unwrap();
        assert!((cost(&rx, &obs("Y"), &[t]).unwrap() + t.sin()).abs() < 1e-15);
        let g = gradient(&ry, &obs("Z"), &[t], GradientMode::ParameterShift).unwrap();
        assert!((g[0] + t.sin()).abs() < 1e-14);
    }

    #[test]
    fn cap_is_a_resource_error() {
        let c = Circuit::new(21, vec![]).unwrap();
        assert!(matches!(run(&c, &[]), Err(Error::Resource { .. })));
        assert!(run_capped(&c, &[], 21).is_ok());
    }

    #[test]
    fn adjoint_matches_parameter_shift() {
        let c = Circuit::new(
            3,
            vec![
                rot(X, 0, 0),
                Gate::H(1),
                Gate::CX(0, 1),
                rot(Y, 1, 1),
                Gate::S(2),
                rot(Z, 2, 2),
                Gate::CX(2, 0),
                rot(Y, 0, 3),
                Gate::Sdg(1),
                rot(X, 2, 4),
            ],
        )
        .unwrap();
        let h = PauliObservable::new(
            3,
            vec![
                (0.3, "XYZ".parse().unwrap()),
                (-1.1, "ZIZ".parse().unwrap()),
            ],
        )
        .unwrap();
        let theta = [0.3, -1.2, 0.8, 2.0, -0.4];
        let (value, g) = adjoint_gradient(&c, &h, &theta).unwrap();
        let ps = gradient(&c, &h, &theta, GradientMode::ParameterShift).unwrap();
        assert!((value - cost(&c, &h, &theta).unwrap()).abs() < 1e-13);
        for (a, b) in g.iter().zip(&ps) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn degenerate_sampling_is_exact() {
        let c = Circuit::new(2, vec![Gate::X(1)]).unwrap();
        let sv = run(&c, &[]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            sampled_expectation(&sv, &obs("ZZ"), 8, &mut rng).unwrap(),
            -1.0
        );
        assert!(sampled_expectation(&sv, &obs("ZZ"), 0, &mut rng).is_err());
    }
}
