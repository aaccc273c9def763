//! Random graph ensembles and the global observables used as regression targets.
//!
//! Graphs are undirected and simple: the adjacency matrix `A` is symmetric,
//! 0/1, with zero diagonal. Spectral moments `Tr[A^k]` are computed in exact
//! integer arithmetic so ground-truth targets carry no floating-point
//! ambiguity.

use std::collections::VecDeque;
use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, RngCore};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Attempt budget for rejection sampling of valid graphs.
pub const DEFAULT_MAX_ATTEMPTS: usize = 10_000;

/// Reference node count used to normalize the network-size target.
pub const NETWORK_SIZE_REF: f64 = 100.0;

/// An undirected simple graph on nodes `0..n`.
///
/// Edges are stored once as ordered pairs `(i, j)` with `i < j`, sorted
/// lexicographically, which doubles as the canonical serialized form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Build a graph from an edge list, canonicalizing pair order.
    ///
    /// Rejects self-loops, out-of-range endpoints and duplicate edges.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::parameter("graph must have at least one node"));
        }
        let mut canon: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::parameter(format!("self-loop at node {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::parameter(format!(
                    "edge ({a},{b}) out of range for n={n}"
                )));
            }
            canon.push((a.min(b), a.max(b)));
        }
        canon.sort_unstable();
        if canon.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::parameter("duplicate edge in edge list"));
        }
        Ok(Graph { n, edges: canon })
    }

    /// Complete graph `K_n`.
    pub fn complete(n: usize) -> Result<Self> {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
        Graph::from_edges(n, edges)
    }

    /// Path graph `0-1-...-(n-1)`.
    pub fn path(n: usize) -> Result<Self> {
        Graph::from_edges(n, (0..n.saturating_sub(1)).map(|i| (i, i + 1)))
    }

    /// Cycle graph on `n ≥ 3` nodes.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::parameter("cycle needs n >= 3"));
        }
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    /// Star graph: node 0 joined to all others.
    pub fn star(n: usize) -> Result<Self> {
        Graph::from_edges(n, (1..n).map(|i| (0, i)))
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical edge list (`i < j`, lexicographically sorted).
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Node degrees `d_i = Σ_j A_ij`.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0usize; self.n];
        for &(i, j) in &self.edges {
            d[i] += 1;
            d[j] += 1;
        }
        d
    }

    /// Neighbor lists.
    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    }

    /// Dense adjacency matrix with `f64` entries.
    pub fn adjacency_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for &(i, j) in &self.edges {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
        a
    }

    /// Dense adjacency matrix with integer entries (for exact moments).
    fn adjacency_int(&self) -> Vec<i64> {
        let n = self.n;
        let mut a = vec![0i64; n * n];
        for &(i, j) in &self.edges {
            a[i * n + j] = 1;
            a[j * n + i] = 1;
        }
        a
    }

    /// SHA-256 over the canonical form; used to assert train/test disjointness.
    pub fn canonical_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.n.to_le_bytes());
        for &(i, j) in &self.edges {
            hasher.update(i.to_le_bytes());
            hasher.update(j.to_le_bytes());
        }
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// JSON form `{"n": int, "edges": [[i,j], ...]}`.
    pub fn to_json(&self) -> Value {
        let edges: Vec<Value> = self
            .edges
            .iter()
            .map(|&(i, j)| Value::Array(vec![Value::from(i), Value::from(j)]))
            .collect();
        let mut obj = Map::new();
        obj.insert("n".into(), Value::from(self.n));
        obj.insert("edges".into(), Value::Array(edges));
        Value::Object(obj)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse("graph: expected an object".into()))?;
        let n = obj
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("graph: missing integer field \"n\"".into()))?
            as usize;
        let edges = obj
            .get("edges")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("graph: missing array field \"edges\"".into()))?;
        let mut pairs = Vec::with_capacity(edges.len());
        for e in edges {
            let pair = e.as_array().filter(|p| p.len() == 2).ok_or_else(|| {
                Error::Parse("graph: each edge must be a two-element array".into())
            })?;
            let i = pair[0]
                .as_u64()
                .ok_or_else(|| Error::Parse("graph: edge endpoint must be an integer".into()))?;
            let j = pair[1]
                .as_u64()
                .ok_or_else(|| Error::Parse("graph: edge endpoint must be an integer".into()))?;
            pairs.push((i as usize, j as usize));
        }
        Graph::from_edges(n, pairs)
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, |E|={})", self.n, self.edges.len())
    }
}

/// The scalar targets a readout can be trained on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObservableKind {
    /// `Tr[A²]`, normalized to the complete-graph moment.
    TrA2,
    /// `Tr[A³]`, normalized to the complete-graph moment.
    TrA3,
    /// `Tr[A⁴]`, normalized to the complete-graph moment.
    TrA4,
    /// Fraction of nodes whose degree strictly exceeds mean + one population std.
    HubDensity,
    /// Node count over the fixed reference [`NETWORK_SIZE_REF`].
    NetworkSize,
    /// `|λ_min / λ_max|` of the adjacency matrix.
    SpectralRatio,
    /// Strength of the non-Hermitian leak, in units of γ (intrusion task only).
    Gamma,
}

impl ObservableKind {
    /// Canonical tag used in files and on the command line.
    pub fn tag(self) -> &'static str {
        match self {
            ObservableKind::TrA2 => "trA2",
            ObservableKind::TrA3 => "trA3",
            ObservableKind::TrA4 => "trA4",
            ObservableKind::HubDensity => "hub_density",
            ObservableKind::NetworkSize => "network_size",
            ObservableKind::SpectralRatio => "spectral_ratio",
            ObservableKind::Gamma => "gamma",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase();
        let kind = match norm.as_str() {
            "tra2" => ObservableKind::TrA2,
            "tra3" => ObservableKind::TrA3,
            "tra4" => ObservableKind::TrA4,
            "hub_density" | "hub" => ObservableKind::HubDensity,
            "network_size" | "size" => ObservableKind::NetworkSize,
            "spectral_ratio" | "ratio" => ObservableKind::SpectralRatio,
            "gamma" => ObservableKind::Gamma,
            _ => {
                return Err(Error::parameter(format!(
                    "unknown observable \"{s}\" (expected one of trA2, trA3, trA4, \
                     hub_density, network_size, spectral_ratio, gamma)"
                )));
            }
        };
        Ok(kind)
    }
}

impl fmt::Display for ObservableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Sample `G(n, p)`: each of the `C(n,2)` edges present independently with
/// probability `p`. Pairs are visited in lexicographic order, so the result
/// is a pure function of the generator state.
pub fn gen_erdos_renyi(n: usize, p: f64, rng: &mut dyn RngCore) -> Result<Graph> {
    if n < 2 {
        return Err(Error::parameter(format!("Erdős–Rényi needs n >= 2, got {n}")));
    }
    if p <= 0.0 || p >= 1.0 || p.is_nan() {
        return Err(Error::parameter(format!(
            "edge probability must satisfy 0 < p < 1, got {p}"
        )));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(n, edges)
}

/// Barabási–Albert preferential attachment.
///
/// Convention: start from the complete graph on `m_attach + 1` nodes, then
/// every new node attaches `m_attach` edges to distinct existing nodes chosen
/// with probability proportional to degree. Edge count is therefore
/// `C(m_attach+1, 2) + m_attach · (n - m_attach - 1)`.
pub fn gen_barabasi_albert(n: usize, m_attach: usize, rng: &mut dyn RngCore) -> Result<Graph> {
    if m_attach == 0 || m_attach >= n {
        return Err(Error::parameter(format!(
            "Barabási–Albert needs 0 < m_attach < n, got m_attach={m_attach}, n={n}"
        )));
    }
    let core = m_attach + 1;
    let mut edges: Vec<(usize, usize)> = (0..core)
        .flat_map(|i| (i + 1..core).map(move |j| (i, j)))
        .collect();
    let mut repeated: Vec<usize> = Vec::new(); // node listed once per unit of degree
    for &(i, j) in &edges {
        repeated.push(i);
        repeated.push(j);
    }
    for new in core..n {
        let mut targets = Vec::with_capacity(m_attach);
        while targets.len() < m_attach {
            let pick = repeated[rng.random_range(0..repeated.len())];
            if !targets.contains(&pick) {
                targets.push(pick);
            }
        }
        for &t in &targets {
            edges.push((t, new));
            repeated.push(t);
            repeated.push(new);
        }
    }
    Graph::from_edges(n, edges)
}

/// Watts–Strogatz small-world graph.
///
/// Starts from a ring lattice where every node is joined to its `k_ring / 2`
/// nearest neighbors on each side, then rewires the far endpoint of each
/// lattice edge with probability `p_rewire` (avoiding self-loops and
/// duplicates; an edge is left in place when no candidate exists).
pub fn gen_watts_strogatz(
    n: usize,
    k_ring: usize,
    p_rewire: f64,
    rng: &mut dyn RngCore,
) -> Result<Graph> {
    if k_ring == 0 || !k_ring.is_multiple_of(2) || k_ring >= n {
        return Err(Error::parameter(format!(
            "Watts–Strogatz needs even k_ring with 0 < k_ring < n, got k_ring={k_ring}, n={n}"
        )));
    }
    if !(0.0..=1.0).contains(&p_rewire) {
        return Err(Error::parameter(format!(
            "rewiring probability must lie in [0, 1], got {p_rewire}"
        )));
    }
    let mut present = vec![false; n * n];
    let set = |p: &mut Vec<bool>, i: usize, j: usize, v: bool| {
        p[i * n + j] = v;
        p[j * n + i] = v;
    };
    for i in 0..n {
        for d in 1..=k_ring / 2 {
            set(&mut present, i, (i + d) % n, true);
        }
    }
    for i in 0..n {
        for d in 1..=k_ring / 2 {
            let j = (i + d) % n;
            if rng.random::<f64>() >= p_rewire {
                continue;
            }
            let candidates: Vec<usize> = (0..n)
                .filter(|&t| t != i && t != j && !present[i * n + t])
                .collect();
            if candidates.is_empty() {
                continue;
            }
            let t = candidates[rng.random_range(0..candidates.len())];
            set(&mut present, i, j, false);
            set(&mut present, i, t, true);
        }
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if present[i * n + j] {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(n, edges)
}

/// A graph is valid when it is connected; connectivity subsumes the
/// no-isolated-nodes requirement.
pub fn is_valid(g: &Graph) -> bool {
    let n = g.node_count();
    if n == 1 {
        return true;
    }
    let adj = g.adjacency_lists();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == n
}

/// Draw Erdős–Rényi graphs until one passes [`is_valid`].
///
/// Fails loudly once `max_attempts` draws were rejected, which signals that
/// `p` sits below the connectivity threshold for this `n`.
pub fn sample_valid(
    n: usize,
    p: f64,
    rng: &mut dyn RngCore,
    max_attempts: usize,
) -> Result<Graph> {
    sample_valid_counted(n, p, rng, max_attempts).map(|(g, _)| g)
}

/// [`sample_valid`] plus the number of rejected draws.
pub fn sample_valid_counted(
    n: usize,
    p: f64,
    rng: &mut dyn RngCore,
    max_attempts: usize,
) -> Result<(Graph, usize)> {
    if max_attempts == 0 {
        return Err(Error::parameter("max_attempts must be at least 1"));
    }
    for attempt in 0..max_attempts {
        let g = gen_erdos_renyi(n, p, rng)?;
        if is_valid(&g) {
            return Ok((g, attempt));
        }
    }
    Err(Error::Ensemble(format!(
        "no connected G({n},{p}) found in {max_attempts} attempts"
    )))
}

/// Exact spectral moment `Tr[A^k]` for `k ∈ {2, 3, 4}`.
///
/// Uses one integer matrix square: `Tr A² = Σ d_i`, `Tr A³ = Σ_ij A²_ij A_ij`
/// and `Tr A⁴ = Σ_ij (A²_ij)²`.
pub fn trace_power(g: &Graph, k: u32) -> Result<f64> {
    match k {
        2 => Ok(g.degrees().iter().map(|&d| d as f64).sum()),
        3 | 4 => {
            let n = g.node_count();
            let a = g.adjacency_int();
            let adj = g.adjacency_lists();
            // a2[i][j] = number of length-2 walks i -> j
            let mut a2 = vec![0i64; n * n];
            for i in 0..n {
                for &m in &adj[i] {
                    for &j in &adj[m] {
                        a2[i * n + j] += 1;
                    }
                }
            }
            let total: i64 = if k == 3 {
                (0..n * n).map(|idx| a2[idx] * a[idx]).sum()
            } else {
                (0..n * n).map(|idx| a2[idx] * a2[idx]).sum()
            };
            Ok(total as f64)
        }
        _ => Err(Error::parameter(format!(
            "trace_power supports k in {{2, 3, 4}}, got {k}"
        ))),
    }
}

/// `Tr[A_c^k]` for the complete graph on `n` nodes.
///
/// The spectrum of `K_n` is one eigenvalue `n-1` plus `n-1` eigenvalues `-1`,
/// so the moment is `(n-1)^k + (n-1)(-1)^k`.
pub fn complete_graph_moment(n: usize, k: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::parameter(format!(
            "complete_graph_moment needs n >= 2, got {n}"
        )));
    }
    if !(2..=4).contains(&k) {
        return Err(Error::parameter(format!(
            "complete_graph_moment supports k in {{2, 3, 4}}, got {k}"
        )));
    }
    let m = (n - 1) as f64;
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(m.powi(k as i32) + m * sign)
}

/// Fraction of nodes whose degree strictly exceeds the mean degree by more
/// than one population standard deviation.
pub fn hub_density(g: &Graph) -> f64 {
    let n = g.node_count();
    let degrees = g.degrees();
    let mean = degrees.iter().map(|&d| d as f64).sum::<f64>() / n as f64;
    let var = degrees
        .iter()
        .map(|&d| (d as f64 - mean).powi(2))
        .sum::<f64>()
        / n as f64;
    let threshold = mean + var.sqrt();
    let hubs = degrees.iter().filter(|&&d| d as f64 > threshold).count();
    hubs as f64 / n as f64
}

/// `|λ_min / λ_max|` of the adjacency matrix.
pub fn spectral_ratio(g: &Graph) -> Result<f64> {
    let eigs = g.adjacency_dense().symmetric_eigenvalues();
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &l in eigs.iter() {
        if !l.is_finite() {
            return Err(Error::Numerical("eigenvalue solver returned non-finite value".into()));
        }
        min = min.min(l);
        max = max.max(l);
    }
    if max == 0.0 {
        return Err(Error::Numerical("largest adjacency eigenvalue is zero".into()));
    }
    Ok((min / max).abs())
}

/// Normalized regression target for `g`.
///
/// Spectral moments are divided by the complete-graph moment of the same
/// size; hub density and the spectral ratio are already in `[0, 1]`; network
/// size is divided by [`NETWORK_SIZE_REF`]. The Γ target belongs to the
/// intrusion pipeline and is rejected here.
pub fn observable(g: &Graph, kind: ObservableKind) -> Result<f64> {
    let n = g.node_count();
    match kind {
        ObservableKind::TrA2 => Ok(trace_power(g, 2)? / complete_graph_moment(n, 2)?),
        ObservableKind::TrA3 => Ok(trace_power(g, 3)? / complete_graph_moment(n, 3)?),
        ObservableKind::TrA4 => Ok(trace_power(g, 4)? / complete_graph_moment(n, 4)?),
        ObservableKind::HubDensity => Ok(hub_density(g)),
        ObservableKind::NetworkSize => Ok(n as f64 / NETWORK_SIZE_REF),
        ObservableKind::SpectralRatio => spectral_ratio(g),
        ObservableKind::Gamma => Err(Error::parameter(
            "gamma is a property of the leak deformation, not of a graph; \
             use the intrusion pipeline",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    fn rng(s: u64) -> rand_chacha::ChaCha8Rng {
        seed::rng(s, &[])
    }

    #[test]
    fn erdos_renyi_two_nodes_near_certain_edge() {
        let g = gen_erdos_renyi(2, 0.999999, &mut rng(3)).unwrap();
        assert!(g.edge_count() <= 1);
        assert_eq!(g.edge_count(), 1, "p = 1 - 1e-6 should produce the edge");
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn erdos_renyi_edge_count_within_five_sigma() {
        // E = 0.6 * 1225 = 735, sigma = sqrt(1225 * 0.6 * 0.4) ~= 17.1
        let g = gen_erdos_renyi(50, 0.6, &mut rng(42)).unwrap();
        let count = g.edge_count() as f64;
        assert!((650.0..=820.0).contains(&count), "edge count {count}");
    }

    #[test]
    fn erdos_renyi_is_deterministic() {
        let a = gen_erdos_renyi(5, 0.5, &mut rng(11)).unwrap();
        let b = gen_erdos_renyi(5, 0.5, &mut rng(11)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn erdos_renyi_rejects_bad_parameters() {
        assert!(gen_erdos_renyi(1, 0.5, &mut rng(0)).is_err());
        assert!(gen_erdos_renyi(5, 0.0, &mut rng(0)).is_err());
        assert!(gen_erdos_renyi(5, 1.0, &mut rng(0)).is_err());
        assert!(gen_erdos_renyi(5, -0.2, &mut rng(0)).is_err());
    }

    #[test]
    fn barabasi_albert_single_attachment_is_tree() {
        let g = gen_barabasi_albert(5, 1, &mut rng(9)).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert!(is_valid(&g));
    }

    #[test]
    fn barabasi_albert_edge_count_matches_convention() {
        // complete core on 3 nodes plus 2 edges per remaining node:
        // 3 + 2 * 47 = 97 = 2 * (50 - 2) + 1
        let g = gen_barabasi_albert(50, 2, &mut rng(5)).unwrap();
        assert_eq!(g.edge_count(), 97);
    }

    #[test]
    fn watts_strogatz_zero_rewiring_is_ring() {
        let g = gen_watts_strogatz(6, 2, 0.0, &mut rng(1)).unwrap();
        assert_eq!(g, Graph::cycle(6).unwrap());
    }

    #[test]
    fn generator_parameter_validation() {
        assert!(gen_barabasi_albert(5, 0, &mut rng(0)).is_err());
        assert!(gen_barabasi_albert(5, 5, &mut rng(0)).is_err());
        assert!(gen_watts_strogatz(6, 3, 0.1, &mut rng(0)).is_err());
        assert!(gen_watts_strogatz(6, 6, 0.1, &mut rng(0)).is_err());
        assert!(gen_watts_strogatz(6, 2, 1.5, &mut rng(0)).is_err());
    }

    #[test]
    fn validity_requires_single_component() {
        assert!(is_valid(&Graph::path(3).unwrap()));
        let disjoint = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(!is_valid(&disjoint));
        let isolated = Graph::from_edges(3, [(0, 1)]).unwrap();
        assert!(!is_valid(&isolated));
    }

    #[test]
    fn sample_valid_returns_triangle_at_high_p() {
        let g = sample_valid(3, 0.999999, &mut rng(2), 10).unwrap();
        assert_eq!(g, Graph::complete(3).unwrap());
    }

    #[test]
    fn sample_valid_exhausts_below_connectivity_threshold() {
        // p = 0.01 << ln(50)/50: every draw is disconnected in practice.
        let err = sample_valid(50, 0.01, &mut rng(7), 10).unwrap_err();
        assert!(matches!(err, Error::Ensemble(_)), "{err}");
    }

    #[test]
    fn sample_valid_accepts_first_draw_far_above_threshold() {
        let mut accepted = 0;
        for s in 0..1000 {
            let g = gen_erdos_renyi(50, 0.6, &mut rng(s)).unwrap();
            if is_valid(&g) {
                accepted += 1;
            }
        }
        assert!(accepted >= 990, "only {accepted}/1000 first draws were connected");
    }

    #[test]
    fn trace_power_known_small_graphs() {
        assert_eq!(trace_power(&Graph::complete(3).unwrap(), 3).unwrap(), 6.0);
        assert_eq!(trace_power(&Graph::path(3).unwrap(), 2).unwrap(), 4.0);
        assert!(trace_power(&Graph::path(3).unwrap(), 5).is_err());
    }

    #[test]
    fn trace_power_two_equals_degree_sum() {
        for s in 0..20 {
            let g = gen_erdos_renyi(30, 0.3, &mut rng(s)).unwrap();
            let expected: usize = g.degrees().iter().sum();
            assert_eq!(trace_power(&g, 2).unwrap(), expected as f64);
        }
    }

    /// Independent oracle: count triangles by triple enumeration.
    fn triangle_count(g: &Graph) -> usize {
        let n = g.node_count();
        let a = g.adjacency_dense();
        let mut count = 0;
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    if a[(i, j)] == 1.0 && a[(j, k)] == 1.0 && a[(i, k)] == 1.0 {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    #[test]
    fn trace_power_three_counts_triangles_six_times() {
        for s in 0..10 {
            let n = 8 + (s as usize % 13); // up to 20 nodes
            let g = gen_erdos_renyi(n, 0.4, &mut rng(100 + s)).unwrap();
            let expected = 6 * triangle_count(&g);
            assert_eq!(trace_power(&g, 3).unwrap(), expected as f64, "seed {s}");
        }
    }

    /// Independent oracle: enumerate all closed walks of length 4.
    fn closed_walk4_count(g: &Graph) -> usize {
        let n = g.node_count();
        let a = g.adjacency_dense();
        let mut count = 0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        if a[(i, j)] == 1.0
                            && a[(j, k)] == 1.0
                            && a[(k, l)] == 1.0
                            && a[(l, i)] == 1.0
                        {
                            count += 1;
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn trace_power_four_matches_walk_enumeration() {
        for s in 0..6 {
            let g = gen_erdos_renyi(12, 0.5, &mut rng(200 + s)).unwrap();
            let expected = closed_walk4_count(&g);
            assert_eq!(trace_power(&g, 4).unwrap(), expected as f64, "seed {s}");
        }
    }

    #[test]
    fn complete_graph_moment_closed_form() {
        assert_eq!(complete_graph_moment(50, 2).unwrap(), 2450.0);
        assert_eq!(complete_graph_moment(4, 3).unwrap(), 24.0);
        assert_eq!(complete_graph_moment(2, 4).unwrap(), 2.0);
    }

    #[test]
    fn complete_graph_moment_matches_trace_power() {
        for n in 2..=10 {
            let g = Graph::complete(n).unwrap();
            for k in 2..=4 {
                assert_eq!(
                    complete_graph_moment(n, k).unwrap(),
                    trace_power(&g, k).unwrap(),
                    "n={n} k={k}"
                );
            }
        }
    }

    #[test]
    fn hub_density_known_values() {
        assert_eq!(hub_density(&Graph::complete(7).unwrap()), 0.0);
        assert_eq!(hub_density(&Graph::star(5).unwrap()), 0.2);
        assert_eq!(hub_density(&Graph::cycle(6).unwrap()), 0.0);
    }

    #[test]
    fn spectral_ratio_known_values() {
        let edge = Graph::from_edges(2, [(0, 1)]).unwrap();
        assert!((spectral_ratio(&edge).unwrap() - 1.0).abs() < 1e-12);
        assert!((spectral_ratio(&Graph::complete(5).unwrap()).unwrap() - 0.25).abs() < 1e-12);
        // bipartite spectra are symmetric about zero
        assert!((spectral_ratio(&Graph::cycle(6).unwrap()).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn adjacency_eigenvalues_sum_to_zero() {
        for s in 0..10 {
            let g = gen_erdos_renyi(40, 0.4, &mut rng(300 + s)).unwrap();
            let sum: f64 = g.adjacency_dense().symmetric_eigenvalues().iter().sum();
            assert!(sum.abs() <= 1e-9 * g.node_count() as f64, "sum {sum}");
        }
    }

    #[test]
    fn spectral_ratio_in_unit_interval_for_connected_graphs() {
        for s in 0..10 {
            let g = sample_valid(25, 0.3, &mut rng(400 + s), 100).unwrap();
            let r = spectral_ratio(&g).unwrap();
            assert!(r > 0.0 && r <= 1.0 + 1e-12, "ratio {r}");
        }
    }

    #[test]
    fn observable_normalization() {
        let k6 = Graph::complete(6).unwrap();
        assert!((observable(&k6, ObservableKind::TrA2).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(observable(&Graph::star(5).unwrap(), ObservableKind::HubDensity).unwrap(), 0.2);
        let g = gen_erdos_renyi(50, 0.6, &mut rng(77)).unwrap();
        let t3 = observable(&g, ObservableKind::TrA3).unwrap();
        assert!(t3 > 0.0 && t3 < 1.0, "normalized TrA3 {t3}");
        assert!(observable(&g, ObservableKind::Gamma).is_err());
    }

    #[test]
    fn network_size_uses_reference_constant() {
        let g = gen_erdos_renyi(40, 0.5, &mut rng(8)).unwrap();
        assert_eq!(observable(&g, ObservableKind::NetworkSize).unwrap(), 0.4);
    }

    #[test]
    fn graph_json_round_trip() {
        let g = gen_erdos_renyi(10, 0.4, &mut rng(21)).unwrap();
        let back = Graph::from_json(&g.to_json()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn graph_rejects_malformed_edges() {
        assert!(Graph::from_edges(3, [(0, 0)]).is_err());
        assert!(Graph::from_edges(3, [(0, 5)]).is_err());
        assert!(Graph::from_edges(3, [(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn canonical_hash_distinguishes_graphs() {
        let a = Graph::path(4).unwrap();
        let b = Graph::star(4).unwrap();
        assert_ne!(a.canonical_hash(), b.canonical_hash());
        assert_eq!(a.canonical_hash(), Graph::path(4).unwrap().canonical_hash());
    }
}
