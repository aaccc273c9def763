//! Short-time quantum dynamics on graphs.
//!
//! The Hermitian walk Hamiltonian is `H = γA`; the intrusion deformation adds
//! an imaginary self-loop, `H_eff = γA − iΓ|α⟩⟨α|`, which makes the evolution
//! non-unitary. Internally γ = ħ = 1, so times are the dimensionless τ = γt/ħ.
//!
//! The Hermitian path diagonalizes `A` once per graph and reuses the
//! eigenbasis for every requested time. The non-Hermitian path exponentiates
//! the complex matrix by scaling-and-squaring with a Padé(13) approximant
//! (`H_eff` is non-normal, so naive diagonalization is not trusted).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Tolerance for the normalization check on input states.
const NORM_TOL: f64 = 1e-9;

/// A pure single-excitation state: one complex amplitude per node.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amp: DVector<Complex64>,
}

impl QuantumState {
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::parameter("state must have at least one amplitude"));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::parameter("state amplitudes must be finite"));
        }
        Ok(QuantumState {
            amp: DVector::from_vec(amplitudes),
        })
    }

    pub(crate) fn from_vector(amp: DVector<Complex64>) -> Self {
        QuantumState { amp }
    }

    pub fn dim(&self) -> usize {
        self.amp.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amp
    }

    /// Squared norm `⟨ψ|ψ⟩`; 1 under unitary evolution, ≤ 1 with a leak.
    pub fn norm_sq(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Occupation probability `p_i = |⟨i|ψ⟩|²`.
    pub fn occupation(&self, node: usize) -> Result<f64> {
        self.amp
            .get(node)
            .map(|a| a.norm_sqr())
            .ok_or_else(|| Error::parameter(format!("node {node} out of range for dim {}", self.dim())))
    }

    fn require_normalized(&self) -> Result<()> {
        let n2 = self.norm_sq();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::parameter(format!(
                "initial state must be normalized, got ‖ψ‖² = {n2}"
            )));
        }
        Ok(())
    }
}

/// Imaginary self-loop attached at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leak {
    /// Node where the parasitic channel is attached.
    pub alpha: usize,
    /// Leakage strength Γ ≥ 0, in the same units as γ.
    pub strength: f64,
}

/// `H = γA`, optionally deformed by a leak into `H_eff = γA − iΓ|α⟩⟨α|`.
#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    graph: Graph,
    gamma: f64,
    leak: Option<Leak>,
}

impl EffectiveHamiltonian {
    /// Leak-free walk Hamiltonian; evolution under it is exactly unitary.
    pub fn hermitian(graph: Graph, gamma: f64) -> Result<Self> {
        if gamma <= 0.0 || !gamma.is_finite() {
            return Err(Error::parameter(format!("gamma must be positive, got {gamma}")));
        }
        Ok(EffectiveHamiltonian { graph, gamma, leak: None })
    }

    /// Deformed Hamiltonian with an imaginary self-loop at `leak.alpha`.
    pub fn with_leak(graph: Graph, gamma: f64, leak: Leak) -> Result<Self> {
        if gamma <= 0.0 || !gamma.is_finite() {
            return Err(Error::parameter(format!("gamma must be positive, got {gamma}")));
        }
        if leak.alpha >= graph.node_count() {
            return Err(Error::parameter(format!(
                "leak node {} out of range for n = {}",
                leak.alpha,
                graph.node_count()
            )));
        }
        if leak.strength < 0.0 || !leak.strength.is_finite() {
            return Err(Error::parameter(format!(
                "leak strength must be nonnegative, got {}",
                leak.strength
            )));
        }
        Ok(EffectiveHamiltonian { graph, gamma, leak: Some(leak) })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn into_graph(self) -> Graph {
        self.graph
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn leak(&self) -> Option<Leak> {
        self.leak
    }

    /// Dense complex matrix `γA − iΓ|α⟩⟨α|`.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let n = self.graph.node_count();
        let mut h = DMatrix::from_element(n, n, Complex64::ZERO);
        for &(i, j) in self.graph.edges() {
            let v = Complex64::new(self.gamma, 0.0);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
        if let Some(leak) = self.leak {
            h[(leak.alpha, leak.alpha)] -= Complex64::new(0.0, leak.strength);
        }
        h
    }
}

/// Uniform sampling times `t_k = k·Δt`, `k = 1..=steps`, in units of ħ/γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    dt: f64,
    steps: usize,
}

impl TimeGrid {
    /// The short-time condition τ = t_T < 1 is a soft contract: violating it
    /// logs a warning but is not an error.
    pub fn new(dt: f64, steps: usize) -> Result<Self> {
        if dt <= 0.0 || !dt.is_finite() {
            return Err(Error::parameter(format!("time step must be positive, got {dt}")));
        }
        if steps == 0 {
            return Err(Error::parameter("time grid needs at least one step"));
        }
        let grid = TimeGrid { dt, steps };
        if grid.horizon() >= 1.0 {
            log::warn!(
                "time grid leaves the short-time regime: τ = {:.3} >= 1",
                grid.horizon()
            );
        }
        Ok(grid)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Total dimensionless evolution time τ = steps · Δt.
    pub fn horizon(&self) -> f64 {
        self.dt * self.steps as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.steps).map(move |k| k as f64 * self.dt)
    }
}

/// Spectral propagator for the Hermitian path: `A = VΛVᵀ` computed once,
/// reused for every time.
struct SpectralPropagator {
    evecs: DMatrix<Complex64>,
    evals: DVector<f64>,
    gamma: f64,
}

impl SpectralPropagator {
    fn new(h: &EffectiveHamiltonian) -> Result<Self> {
        let eig = h.graph().adjacency_dense().symmetric_eigen();
        if eig.eigenvalues.iter().any(|l| !l.is_finite()) {
            return Err(Error::Numerical("symmetric eigendecomposition failed".into()));
        }
        Ok(SpectralPropagator {
            evecs: eig.eigenvectors.map(|x| Complex64::new(x, 0.0)),
            evals: eig.eigenvalues,
            gamma: h.gamma(),
        })
    }

    fn state_at(&self, psi0: &QuantumState, t: f64) -> QuantumState {
        if t == 0.0 {
            return psi0.clone();
        }
        // ψ(t) = V e^{-iγΛt} Vᵀ ψ0
        let mut coeffs = self.evecs.adjoint() * psi0.amplitudes();
        for (c, &l) in coeffs.iter_mut().zip(self.evals.iter()) {
            *c *= Complex64::from_polar(1.0, -self.gamma * l * t);
        }
        QuantumState::from_vector(&self.evecs * coeffs)
    }
}

/// Evolve under the leak-free Hamiltonian via one eigendecomposition.
///
/// Returns `ψ(t_k)` for every grid time, in order.
pub fn evolve_hermitian(
    h: &EffectiveHamiltonian,
    psi0: &QuantumState,
    grid: &TimeGrid,
) -> Result<Vec<QuantumState>> {
    if h.leak().is_some() {
        return Err(Error::parameter(
            "evolve_hermitian requires a leak-free Hamiltonian",
        ));
    }
    check_dim(h, psi0)?;
    psi0.require_normalized()?;
    let prop = SpectralPropagator::new(h)?;
    Ok(grid.times().map(|t| prop.state_at(psi0, t)).collect())
}

/// Evolve under `H_eff` with the general complex matrix exponential.
///
/// The grid is uniform, so `exp(−iH_eff t_k)` is applied as `U(Δt)^k` with a
/// single Padé exponential of the step matrix.
pub fn evolve_nonhermitian(
    h: &EffectiveHamiltonian,
    psi0: &QuantumState,
    grid: &TimeGrid,
) -> Result<Vec<QuantumState>> {
    check_dim(h, psi0)?;
    psi0.require_normalized()?;
    let step = propagator_matrix(h, grid.dt())?;
    let mut psi = psi0.amplitudes().clone();
    let mut out = Vec::with_capacity(grid.steps());
    for _ in 0..grid.steps() {
        psi = &step * psi;
        out.push(QuantumState::from_vector(psi.clone()));
    }
    Ok(out)
}

/// Evolve under whichever propagator matches the Hamiltonian: spectral when
/// leak-free, Padé exponential otherwise.
pub fn evolve(
    h: &EffectiveHamiltonian,
    psi0: &QuantumState,
    grid: &TimeGrid,
) -> Result<Vec<QuantumState>> {
    if h.leak().is_none() {
        evolve_hermitian(h, psi0, grid)
    } else {
        evolve_nonhermitian(h, psi0, grid)
    }
}

/// State at one arbitrary time `t ≥ 0` (`t = 0` returns `ψ0` exactly).
pub fn propagate(h: &EffectiveHamiltonian, psi0: &QuantumState, t: f64) -> Result<QuantumState> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::parameter(format!("time must be nonnegative, got {t}")));
    }
    check_dim(h, psi0)?;
    psi0.require_normalized()?;
    if t == 0.0 {
        return Ok(psi0.clone());
    }
    if h.leak().is_none() {
        let prop = SpectralPropagator::new(h)?;
        Ok(prop.state_at(psi0, t))
    } else {
        let u = propagator_matrix(h, t)?;
        Ok(QuantumState::from_vector(&u * psi0.amplitudes()))
    }
}

fn check_dim(h: &EffectiveHamiltonian, psi0: &QuantumState) -> Result<()> {
    if psi0.dim() != h.graph().node_count() {
        return Err(Error::parameter(format!(
            "state dimension {} does not match graph size {}",
            psi0.dim(),
            h.graph().node_count()
        )));
    }
    Ok(())
}

/// `U(t) = exp(−iH_eff t)`.
fn propagator_matrix(h: &EffectiveHamiltonian, t: f64) -> Result<DMatrix<Complex64>> {
    let mut m = h.matrix();
    m *= Complex64::new(0.0, -t);
    expm(&m)
}

// Padé(13) coefficients from the scaling-and-squaring method (Higham 2005).
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const PADE13_THETA: f64 = 5.371920351148152;

fn matrix_1_norm(a: &DMatrix<Complex64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential of a general complex square matrix.
pub fn expm(a: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::parameter("expm requires a square matrix"));
    }
    if a.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(Error::parameter("expm requires finite entries"));
    }

    let norm = matrix_1_norm(a);
    let squarings = if norm > PADE13_THETA {
        (norm / PADE13_THETA).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a * Complex64::new((0.5f64).powi(squarings as i32), 0.0);

    let c = |k: usize| Complex64::new(PADE13[k], 0.0);
    let eye = DMatrix::identity(n, n);
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let u_inner = &a6 * (&a6 * c(13) + &a4 * c(11) + &a2 * c(9))
        + &a6 * c(7)
        + &a4 * c(5)
        + &a2 * c(3)
        + &eye * c(1);
    let u = &scaled * u_inner;
    let v = &a6 * (&a6 * c(12) + &a4 * c(10) + &a2 * c(8))
        + &a6 * c(6)
        + &a4 * c(4)
        + &a2 * c(2)
        + &eye * c(0);

    let numer = &v + &u;
    let denom = &v - &u;
    let mut result = denom
        .lu()
        .solve(&numer)
        .ok_or_else(|| Error::Numerical("Padé denominator is singular".into()))?;
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}
