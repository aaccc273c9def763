//! Independent oracles used by the property and acceptance suites.
//!
//! These deliberately avoid the library's propagation and counting paths:
//! series summation with plain matrix-vector products, step-doubled
//! small-step exponentials, and brute-force walk enumeration.

// each test binary uses a different subset
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use qprobe::dynamics::{EffectiveHamiltonian, QuantumState};
use qprobe::graph::Graph;

/// Truncated series `Σ_{m<=terms} (-iAt)^m / m! ψ0` for a real symmetric `A`.
pub fn taylor_state(a: &DMatrix<f64>, psi0: &QuantumState, t: f64, terms: usize) -> DVector<Complex64> {
    let a_c = a.map(|x| Complex64::new(x, 0.0));
    let mut term = psi0.amplitudes().clone();
    let mut acc = term.clone();
    for m in 1..=terms {
        term = (&a_c * term) * (Complex64::new(0.0, -t) / Complex64::new(m as f64, 0.0));
        acc += &term;
    }
    acc
}

/// Max amplitude difference between a state and an oracle vector.
pub fn state_diff(state: &QuantumState, oracle: &DVector<Complex64>) -> f64 {
    state
        .amplitudes()
        .iter()
        .zip(oracle.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

/// Step-doubling oracle for `exp(-iHt)ψ0`: a truncated matrix series at the
/// small step `t/2^halvings`, squared back up.
pub fn step_doubled_state(
    h: &EffectiveHamiltonian,
    psi0: &QuantumState,
    t: f64,
    halvings: u32,
) -> DVector<Complex64> {
    let n = h.graph().node_count();
    let m = h.matrix() * Complex64::new(0.0, -t / f64::from(1u32 << halvings));
    // series for exp(m) with ||m|| small
    let mut u = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    for k in 1..=30 {
        term = (&term * &m) / Complex64::new(k as f64, 0.0);
        u += &term;
    }
    for _ in 0..halvings {
        u = &u * &u;
    }
    &u * psi0.amplitudes()
}

/// Brute-force triangle count by triple enumeration.
pub fn triangle_count(g: &Graph) -> usize {
    let n = g.node_count();
    let a = g.adjacency_dense();
    let mut count = 0;
    for i in 0..n {
        for j in i + 1..n {
            if a[(i, j)] == 0.0 {
                continue;
            }
            for k in j + 1..n {
                if a[(j, k)] == 1.0 && a[(i, k)] == 1.0 {
                    count += 1;
                }
            }
        }
    }
    count
}

/// Brute-force count of closed walks of length four.
pub fn closed_walk4_count(g: &Graph) -> usize {
    let n = g.node_count();
    let a = g.adjacency_dense();
    let mut count = 0;
    for i in 0..n {
        for j in 0..n {
            if a[(i, j)] == 0.0 {
                continue;
            }
            for k in 0..n {
                if a[(j, k)] == 0.0 {
                    continue;
                }
                for l in 0..n {
                    if a[(k, l)] == 1.0 && a[(l, i)] == 1.0 {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}
