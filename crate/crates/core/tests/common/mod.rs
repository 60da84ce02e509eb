//! Dense-matrix circuit oracle shared by the simulator tests and the
//! acceptance suite. Every gate is expanded to a full 2^n x 2^n matrix by
//! Kronecker products and the matrices are multiplied in circuit order.
#![allow(dead_code)]

use num_complex::Complex64 as C;
use vqe_recycle::qsim::CircuitKind;

pub type Dense = Vec<Vec<C>>;

pub fn identity(d: usize) -> Dense {
    (0..d).map(|i| (0..d).map(|j| if i == j { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) }).collect()).collect()
}

pub fn kron(a: &Dense, b: &Dense) -> Dense {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![C::new(0.0, 0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let d = a.len();
    let mut out = vec![vec![C::new(0.0, 0.0); d]; d];
    for i in 0..d {
        for k in 0..d {
            if a[i][k] == C::new(0.0, 0.0) {
                continue;
            }
            for j in 0..d {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

/// Gate on qubit `q` of an `n`-qubit register; qubit 0 is the least
/// significant bit, i.e. the rightmost Kronecker factor.
pub fn on_qubit(g: &Dense, q: usize, n: usize) -> Dense {
    let id = identity(2);
    let mut m = vec![vec![C::new(1.0, 0.0)]];
    for k in (0..n).rev() {
        m = kron(&m, if k == q { g } else { &id });
    }
    m
}

pub fn cnot(c: usize, t: usize, n: usize) -> Dense {
    let d = 1 << n;
    let mut m = vec![vec![C::new(0.0, 0.0); d]; d];
    for x in 0..d {
        let y = if x >> c & 1 == 1 { x ^ (1 << t) } else { x };
        m[y][x] = C::new(1.0, 0.0);
    }
    m
}

pub fn rx(t: f64) -> Dense {
    let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
    vec![vec![C::new(c, 0.0), C::new(0.0, -s)], vec![C::new(0.0, -s), C::new(c, 0.0)]]
}

pub fn ry(t: f64) -> Dense {
    let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
    vec![vec![C::new(c, 0.0), C::new(-s, 0.0)], vec![C::new(s, 0.0), C::new(c, 0.0)]]
}

pub fn hadamard() -> Dense {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    vec![vec![C::new(h, 0.0), C::new(h, 0.0)], vec![C::new(h, 0.0), C::new(-h, 0.0)]]
}

pub fn dense_state(kind: CircuitKind, n: usize, layers: usize, theta: &[f64]) -> Vec<C> {
    let mut u = identity(1 << n);
    let mut push = |g: Dense| u = matmul(&g, &u);
    if kind == CircuitKind::Had {
        for q in 0..n {
            push(on_qubit(&hadamard(), q, n));
        }
    }
    for l in 0..layers {
        let block = &theta[2 * n * l..2 * n * (l + 1)];
        for q in 0..n {
            push(on_qubit(&rx(block[q]), q, n));
        }
        for q in 0..n {
            push(on_qubit(&ry(block[n + q]), q, n));
        }
        if n > 1 {
            for c in 0..n {
                push(cnot(c, (c + 1) % n, n));
            }
        }
    }
    u.iter().map(|row| row[0]).collect()
}
