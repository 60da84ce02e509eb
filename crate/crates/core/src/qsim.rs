//! Dense statevector simulation of the two hardware-efficient ansätze and
//! exact expectation values of diagonal MaxCut Hamiltonians.
//!
//! Basis indexing is little-endian: bit `k` of a basis index is qubit `k`,
//! which maps directly onto node `k` of an [`Assignment`].

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::maxcut::{cut_of_mask, Assignment};

pub const MAX_QUBITS: usize = 24;

type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

/// `|0…0⟩` on `n` qubits.
pub fn zero_state(n: usize) -> Result<StateVector> {
    check_qubit_count(n)?;
    let mut amps = vec![ZERO; 1 << n];
    amps[0] = ONE;
    Ok(StateVector { n, amps })
}

fn check_qubit_count(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("qubit count must be >= 1"));
    }
    if n > MAX_QUBITS {
        return Err(Error::Capacity {
            what: "qubit count",
            got: n,
            limit: MAX_QUBITS,
        });
    }
    Ok(())
}

fn h_matrix() -> Mat2 {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

fn rx_matrix(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    let c = Complex64::new(c, 0.0);
    let mis = Complex64::new(0.0, -s);
    [[c, mis], [mis, c]]
}

fn ry_matrix(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

impl StateVector {
    /// Builds a state from raw amplitudes; the length must be a power of two
    /// and the norm must be 1 within `1e-10`.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::domain(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let n = len.trailing_zeros() as usize;
        check_qubit_count(n)?;
        let s = StateVector { n, amps };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::domain(format!("state norm {norm} is not 1")));
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        self.amps.iter().map(|a| a.norm_sqr())
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            Err(Error::QubitIndex { index: q, n: self.n })
        } else {
            Ok(())
        }
    }

    fn apply_single(&mut self, q: usize, m: &Mat2) {
        let stride = 1usize << q;
        for block in self.amps.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a0, *a1);
                *a0 = m[0][0] * x + m[0][1] * y;
                *a1 = m[1][0] * x + m[1][1] * y;
            }
        }
    }

    pub fn apply_h(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        self.apply_single(q, &h_matrix());
        Ok(())
    }

    /// `RX(θ) = exp(-iθX/2)`.
    pub fn apply_rx(&mut self, q: usize, theta: f64) -> Result<()> {
        self.check_qubit(q)?;
        self.apply_single(q, &rx_matrix(theta));
        Ok(())
    }

    /// `RY(θ) = exp(-iθY/2)`.
    pub fn apply_ry(&mut self, q: usize, theta: f64) -> Result<()> {
        self.check_qubit(q)?;
        self.apply_single(q, &ry_matrix(theta));
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::domain("CNOT control and target must differ"));
        }
        let (cbit, tbit) = (1usize << control, 1usize << target);
        for i in 0..self.amps.len() {
            if i & cbit != 0 && i & tbit == 0 {
                self.amps.swap(i, i | tbit);
            }
        }
        Ok(())
    }
}

/// The two circuit families: `Had` prefixes a Hadamard on every qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CircuitKind {
    Base,
    Had,
}

impl CircuitKind {
    pub const ALL: [CircuitKind; 2] = [CircuitKind::Base, CircuitKind::Had];

    pub fn as_str(&self) -> &'static str {
        match self {
            CircuitKind::Base => "base",
            CircuitKind::Had => "had",
        }
    }
}

impl fmt::Display for CircuitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CircuitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "base" => Ok(CircuitKind::Base),
            "had" => Ok(CircuitKind::Had),
            other => Err(Error::domain(format!("unknown circuit kind {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub kind: CircuitKind,
    pub n: usize,
    pub layers: usize,
}

impl AnsatzSpec {
    pub fn new(kind: CircuitKind, n: usize, layers: usize) -> Self {
        AnsatzSpec { kind, n, layers }
    }

    /// Number of rotation angles: one RX and one RY per qubit per layer.
    pub fn dim(&self) -> usize {
        2 * self.n * self.layers
    }
}

/// Rotation angles in radians. Per layer: `n` RX angles in qubit order,
/// then `n` RY angles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(angles: Vec<f64>) -> Self {
        ParamVector(angles)
    }

    pub fn zeros(dim: usize) -> Self {
        ParamVector(vec![0.0; dim])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ParamVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(v: Vec<f64>) -> Self {
        ParamVector(v)
    }
}

/// A prepared ansatz: validated spec plus the basis permutation realized by
/// one CNOT ring, so the ring costs a single gather per layer.
#[derive(Clone, Debug)]
pub struct Ansatz {
    spec: AnsatzSpec,
    ring: Vec<u32>,
}

impl Ansatz {
    pub fn new(spec: AnsatzSpec) -> Result<Self> {
        check_qubit_count(spec.n)?;
        if spec.layers == 0 {
            return Err(Error::domain("ansatz needs at least one layer"));
        }
        Ok(Ansatz {
            ring: cnot_ring_permutation(spec.n),
            spec,
        })
    }

    pub fn spec(&self) -> &AnsatzSpec {
        &self.spec
    }

    pub fn state(&self, theta: &[f64]) -> Result<StateVector> {
        let mut state = zero_state(self.spec.n)?;
        let mut scratch = vec![ZERO; state.amps.len()];
        self.prepare(theta, &mut state, &mut scratch)?;
        Ok(state)
    }

    /// Overwrites `state` with `U(θ)|0…0⟩`. `scratch` must have `2^n` slots.
    pub fn prepare(
        &self,
        theta: &[f64],
        state: &mut StateVector,
        scratch: &mut [Complex64],
    ) -> Result<()> {
        let n = self.spec.n;
        if theta.len() != self.spec.dim() {
            return Err(Error::Dimension {
                expected: self.spec.dim(),
                got: theta.len(),
            });
        }
        if state.n != n || scratch.len() != state.amps.len() {
            return Err(Error::Dimension {
                expected: n,
                got: state.n,
            });
        }
        for (layer, angles) in theta.chunks_exact(2 * n).enumerate() {
            let (rx, ry) = angles.split_at(n);
            // RX and RY on one qubit commute with gates on the others, so
            // each qubit's layer rotation is a single fused 2x2.
            let fused = (0..n).map(|q| {
                let m = mat_mul(&ry_matrix(ry[q]), &rx_matrix(rx[q]));
                if layer == 0 && self.spec.kind == CircuitKind::Had {
                    mat_mul(&m, &h_matrix())
                } else {
                    m
                }
            });
            if layer == 0 {
                // Acting on |0…0⟩ the first layer yields a product state.
                state.amps[0] = ONE;
                for (q, m) in fused.enumerate() {
                    let (lo, hi) = state.amps[..2 << q].split_at_mut(1 << q);
                    for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                        *a1 = m[1][0] * *a0;
                        *a0 *= m[0][0];
                    }
                }
            } else {
                for (q, m) in fused.enumerate() {
                    state.apply_single(q, &m);
                }
            }
            for (dst, &src) in scratch.iter_mut().zip(&self.ring) {
                *dst = state.amps[src as usize];
            }
            state.amps.copy_from_slice(scratch);
        }
        Ok(())
    }
}

/// `src[x]` such that `(CNOT ring)|ψ⟩` has amplitude `ψ[src[x]]` at `x`.
fn cnot_ring_permutation(n: usize) -> Vec<u32> {
    let dim = 1usize << n;
    let mut src = vec![0u32; dim];
    for x in 0..dim {
        // Forward image of basis state x under CNOT(0→1), …, CNOT(n−1→0).
        let mut y = x;
        for c in 0..n {
            let t = (c + 1) % n;
            if n > 1 && (y >> c) & 1 == 1 {
                y ^= 1 << t;
            }
        }
        src[y] = x as u32;
    }
    src
}

pub fn build_ansatz_state(spec: &AnsatzSpec, theta: &[f64]) -> Result<StateVector> {
    Ansatz::new(*spec)?.state(theta)
}

/// Diagonal MaxCut Hamiltonian: `energies[x] = -cut(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalHamiltonian {
    n: usize,
    energies: Vec<f64>,
}

impl DiagonalHamiltonian {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn diagonal_hamiltonian(g: &Graph) -> Result<DiagonalHamiltonian> {
    check_qubit_count(g.n())?;
    let energies = (0..1u32 << g.n())
        .map(|x| -f64::from(cut_of_mask(g, x)))
        .collect();
    Ok(DiagonalHamiltonian { n: g.n(), energies })
}

/// `Σ_x |ψ_x|² E_x`, summed in basis order.
pub fn expectation(s: &StateVector, h: &DiagonalHamiltonian) -> Result<f64> {
    if s.n != h.n {
        return Err(Error::Dimension {
            expected: h.n,
            got: s.n,
        });
    }
    Ok(s.amps
        .iter()
        .zip(&h.energies)
        .map(|(a, e)| a.norm_sqr() * e)
        .sum())
}

/// Most probable basis state; ties go to the smallest index.
pub fn argmax_bitstring(s: &StateVector) -> Assignment {
    let mut best = 0usize;
    let mut best_p = f64::NEG_INFINITY;
    for (x, p) in s.probabilities().enumerate() {
        if p > best_p {
            best = x;
            best_p = p;
        }
    }
    Assignment::new(s.n, best as u32).expect("basis index fits the register")
}
