//! Preferential-attachment multigraph growth.
//!
//! Time is discrete and divided into windows of `m + 1` steps. The first step
//! of window `w` (at `t = w(m+1) + 1`, `w = 0, 1, ...`) adds an isolated
//! vertex; each of the following `m` steps attaches one edge from that vertex
//! to an endpoint chosen proportionally to current degree, with the attaching
//! vertex itself counted at `degree + 1`. Self-loops are allowed and add 2 to
//! the degree, and degrees update immediately after every edge, including
//! inside the attaching vertex's own window. After `n` complete windows
//! (`t = n(m+1)`) the graph has `n` vertices and `m·n` edges.
//!
//! Sampling is O(1) per edge via a repeated-endpoint list: every edge pushes
//! both endpoints onto a flat array, so drawing an array slot uniformly (plus
//! one virtual slot for the attaching vertex's `+1`) is exactly the
//! degree-proportional choice.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{replica_rng, SimRng};
use rand::Rng;

/// Default cap on the total number of edges a single growth run may create.
pub const DEFAULT_EDGE_BUDGET: u64 = 100_000_000;

/// Largest number of leaves [`enumerate_exact`] will visit.
pub const ENUMERATION_LEAF_LIMIT: f64 = 1.1e7;

/// Errors from the growth and enumeration routines.
#[derive(Debug, Error)]
pub enum BaError {
    /// Configuration failed validation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    /// The run would exceed its edge budget.
    #[error("edge budget exceeded: run needs {required} edges, budget is {budget}")]
    EdgeBudget {
        /// Edges the requested run would create.
        required: u64,
        /// Configured cap.
        budget: u64,
    },
    /// A degree histogram was requested in the middle of a window.
    #[error("degree snapshot requested mid-window at t = {t}; snapshots exist only at multiples of m+1")]
    MidWindow {
        /// Time of the rejected request.
        t: u64,
    },
    /// Exhaustive enumeration would visit too many outcomes.
    #[error("exact enumeration of (m = {m}, n = {n}) needs ~{leaves:.3e} leaves; limit is {limit:.1e}")]
    InstanceTooLarge {
        /// Edges per vertex.
        m: u32,
        /// Number of vertices.
        n: u64,
        /// Estimated leaf count.
        leaves: f64,
        /// Configured limit.
        limit: f64,
    },
}

/// Configuration for a single growth run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BaConfig {
    /// Edges attached per vertex (`m >= 1`).
    pub m: u32,
    /// Number of complete windows to grow (final vertex count).
    pub n_target: u64,
    /// Seed for the run's random stream.
    pub seed: u64,
    /// Cap on total edges; guards against runaway requests.
    pub edge_budget: u64,
    /// Record the full edge list (costs memory for large runs).
    pub record_edges: bool,
}

impl BaConfig {
    /// Configuration with the default edge budget and no edge recording.
    pub fn new(m: u32, n_target: u64, seed: u64) -> Self {
        Self {
            m,
            n_target,
            seed,
            edge_budget: DEFAULT_EDGE_BUDGET,
            record_edges: false,
        }
    }

    /// Checks the configuration without running anything.
    pub fn validate(&self) -> Result<(), BaError> {
        if self.m == 0 {
            return Err(BaError::InvalidConfig("m must be at least 1".into()));
        }
        if self.n_target == 0 {
            return Err(BaError::InvalidConfig(
                "n_target must be at least 1".into(),
            ));
        }
        let required = (self.m as u64).saturating_mul(self.n_target);
        if required > self.edge_budget {
            return Err(BaError::EdgeBudget {
                required,
                budget: self.edge_budget,
            });
        }
        Ok(())
    }
}

/// Evolving multigraph state.
#[derive(Clone, Debug)]
pub struct GraphState {
    m: u32,
    t: u64,
    /// `degrees[v-1]` is the degree of vertex `v` (vertices are 1-based).
    degrees: Vec<u64>,
    /// Two entries per edge; loops contribute their vertex twice.
    endpoints: Vec<u32>,
    /// Vertex whose attachment window is currently open.
    pending: Option<u32>,
    /// Recorded edges, if requested.
    edges: Option<Vec<(u32, u32)>>,
}

impl GraphState {
    /// State at `t = 1`: a single isolated vertex with its window open.
    pub fn new(m: u32) -> Self {
        Self {
            m,
            t: 1,
            degrees: vec![0],
            endpoints: Vec::new(),
            pending: Some(1),
            edges: None,
        }
    }

    fn with_capacity(m: u32, n_target: u64, record_edges: bool) -> Self {
        let mut state = Self::new(m);
        state.degrees.reserve(n_target as usize);
        state
            .endpoints
            .reserve(2 * (m as usize) * (n_target as usize));
        if record_edges {
            state.edges = Some(Vec::with_capacity((m as usize) * (n_target as usize)));
        }
        state
    }

    /// Edges attached per vertex.
    pub fn m(&self) -> u32 {
        self.m
    }

    /// Current time step.
    pub fn time(&self) -> u64 {
        self.t
    }

    /// Number of vertices currently present.
    pub fn num_vertices(&self) -> u64 {
        (self.t - 1) / (self.m as u64 + 1) + 1
    }

    /// Number of edges currently present.
    pub fn num_edges(&self) -> u64 {
        (self.endpoints.len() / 2) as u64
    }

    /// True when the state sits at a window boundary (`t` divisible by `m+1`).
    pub fn at_window_boundary(&self) -> bool {
        self.t % (self.m as u64 + 1) == 0
    }

    /// Degree of vertex `v` (1-based), if present.
    pub fn degree(&self, v: u64) -> Option<u64> {
        if v == 0 {
            return None;
        }
        self.degrees.get(v as usize - 1).copied()
    }

    /// Degrees of all vertices in vertex order (index 0 is vertex 1).
    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    /// Recorded edge list, when the run was configured to keep it.
    pub fn edges(&self) -> Option<&[(u32, u32)]> {
        self.edges.as_deref()
    }

    /// Advances the process by one step.
    pub fn step(&mut self, rng: &mut SimRng) {
        let period = self.m as u64 + 1;
        let t_new = self.t + 1;
        if (t_new - 1) % period == 0 {
            // New isolated vertex; its window opens now.
            self.degrees.push(0);
            self.pending = Some(self.degrees.len() as u32);
        } else {
            let pending = self
                .pending
                .expect("attachment step requires an open window");
            let slots = self.endpoints.len();
            // One virtual slot gives the attaching vertex its extra +1 weight.
            let idx = rng.random_range(0..=slots);
            let target = if idx == slots {
                pending
            } else {
                self.endpoints[idx]
            };
            let p = pending as usize - 1;
            if target == pending {
                self.degrees[p] += 2;
            } else {
                self.degrees[p] += 1;
                self.degrees[target as usize - 1] += 1;
            }
            self.endpoints.push(pending);
            self.endpoints.push(target);
            if let Some(edges) = self.edges.as_mut() {
                edges.push((pending, target));
            }
            if (t_new) % period == 0 {
                self.pending = None;
            }
        }
        self.t = t_new;
    }

    /// Runs the process until `n` complete windows, i.e. `t = n(m+1)`.
    pub fn run_to_windows(&mut self, n: u64, rng: &mut SimRng) {
        let target_t = n * (self.m as u64 + 1);
        while self.t < target_t {
            self.step(rng);
        }
    }

    /// Degree histogram; only valid at a window boundary.
    pub fn degree_histogram(&self) -> Result<DegreeHistogram, BaError> {
        if !self.at_window_boundary() {
            return Err(BaError::MidWindow { t: self.t });
        }
        let mut counts = BTreeMap::new();
        for &d in &self.degrees {
            *counts.entry(d).or_insert(0u64) += 1;
        }
        Ok(DegreeHistogram {
            m: self.m,
            n: self.num_vertices(),
            t: self.t,
            counts,
        })
    }
}

/// Vertex-degree counts of a completed graph.
#[derive(Clone, Debug, Serialize)]
pub struct DegreeHistogram {
    /// Edges attached per vertex.
    pub m: u32,
    /// Number of vertices.
    pub n: u64,
    /// Time of the snapshot.
    pub t: u64,
    /// `counts[k]` = number of vertices of degree `k`.
    pub counts: BTreeMap<u64, u64>,
}

impl DegreeHistogram {
    /// Empirical probability of each degree, `counts[k] / n`.
    pub fn fractions(&self) -> BTreeMap<u64, f64> {
        self.counts
            .iter()
            .map(|(&k, &c)| (k, c as f64 / self.n as f64))
            .collect()
    }
}

/// Grows a graph from a configuration using its dedicated random stream
/// (replica 0 of the config seed).
pub fn grow(config: &BaConfig) -> Result<GraphState, BaError> {
    config.validate()?;
    let mut rng = replica_rng(config.seed, 0);
    grow_with_rng(config, &mut rng)
}

/// Grows a graph from a configuration with a caller-supplied generator.
/// Used by experiments that manage replica streams themselves.
pub fn grow_with_rng(config: &BaConfig, rng: &mut SimRng) -> Result<GraphState, BaError> {
    config.validate()?;
    let mut state = GraphState::with_capacity(config.m, config.n_target, config.record_edges);
    state.run_to_windows(config.n_target, rng);
    Ok(state)
}

/// Degree of one vertex observed at a list of checkpoint times.
///
/// `vertex` is 1-based and must be at least 2 (the first vertex's early
/// degree evolution is deterministic and excluded by contract). Checkpoints
/// are absolute times, each divisible by `m+1`, strictly increasing, at or
/// after the vertex's own window completes, and within the run horizon
/// `n_target(m+1)`.
pub fn trace_vertex_degree(
    config: &BaConfig,
    vertex: u64,
    checkpoints: &[u64],
    rng: &mut SimRng,
) -> Result<Vec<u64>, BaError> {
    config.validate()?;
    let period = config.m as u64 + 1;
    if vertex < 2 {
        return Err(BaError::InvalidConfig(
            "traced vertex must be at least 2".into(),
        ));
    }
    if vertex > config.n_target {
        return Err(BaError::InvalidConfig(format!(
            "traced vertex {vertex} never appears in a run of {} windows",
            config.n_target
        )));
    }
    if checkpoints.is_empty() {
        return Err(BaError::InvalidConfig("no checkpoints given".into()));
    }
    let mut prev = 0u64;
    for &t in checkpoints {
        if t % period != 0 {
            return Err(BaError::InvalidConfig(format!(
                "checkpoint {t} is not a window boundary (multiple of {period})"
            )));
        }
        if t < vertex * period {
            return Err(BaError::InvalidConfig(format!(
                "checkpoint {t} precedes completion of vertex {vertex}'s window at {}",
                vertex * period
            )));
        }
        if t <= prev {
            return Err(BaError::InvalidConfig(
                "checkpoints must be strictly increasing".into(),
            ));
        }
        if t > config.n_target * period {
            return Err(BaError::InvalidConfig(format!(
                "checkpoint {t} is beyond the run horizon {}",
                config.n_target * period
            )));
        }
        prev = t;
    }

    let mut state = GraphState::with_capacity(config.m, config.n_target, false);
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = 0usize;
    while next < checkpoints.len() {
        while state.time() < checkpoints[next] {
            state.step(rng);
        }
        out.push(
            state
                .degree(vertex)
                .expect("checkpoint validation guarantees the vertex exists"),
        );
        next += 1;
    }
    Ok(out)
}

/// Exact law of a vertex's degree at the end of its own attachment window.
///
/// Returns `pmf` with `pmf[j] = P(degree = m + j)` for `j = 0..=m`: each
/// self-loop during the window raises the final degree by one above the
/// minimum `m`. Computed by dynamic programming over the window's steps; for
/// vertex `i` the step-`l` denominator is `2(m(i-1) + l - 1) - 1`
/// (`l = 2..=m+1`) and the loop weight is the vertex's current degree plus
/// one. For `i = 1` every attachment is a forced loop and the law is a point
/// mass at `2m`.
pub fn initial_degree_pmf(m: u32, i: u64) -> Result<Vec<f64>, BaError> {
    if m == 0 {
        return Err(BaError::InvalidConfig("m must be at least 1".into()));
    }
    if i == 0 {
        return Err(BaError::InvalidConfig("vertex index is 1-based".into()));
    }
    let w = i - 1; // complete windows before vertex i's own
    let m64 = m as u64;
    // state: probability of having made `l` loops so far
    let mut probs = vec![0.0f64; m as usize + 1];
    probs[0] = 1.0;
    for step in 0..m64 {
        let l_idx = step + 2; // window-local step index, 2..=m+1
        let denom = (2 * (m64 * w + l_idx - 1) - 1) as f64;
        let mut next = vec![0.0f64; m as usize + 1];
        for (loops, &p) in probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            // degree after `step` edges with `loops` of them loops
            let degree = step + loops as u64;
            let p_loop = (degree + 1) as f64 / denom;
            debug_assert!(p_loop <= 1.0 + 1e-12);
            next[loops + 1] += p * p_loop;
            next[loops] += p * (1.0 - p_loop);
        }
        probs = next;
    }
    Ok(probs)
}

/// Exact joint law of the degree sequence after `n` windows, as integer
/// rationals over the common denominator (the product of all per-step
/// normalizers). Feasible only for very small instances; the leaf count is
/// `(n!)^m` and is capped by [`ENUMERATION_LEAF_LIMIT`].
#[derive(Clone, Debug)]
pub struct ExactDegreeLaw {
    /// Edges attached per vertex.
    pub m: u32,
    /// Number of vertices.
    pub n: u64,
    /// Common denominator of every outcome probability.
    pub denominator: u128,
    /// Numerator of each degree sequence `(d(v_1), ..., d(v_n))`.
    pub numerators: BTreeMap<Vec<u32>, u128>,
}

impl ExactDegreeLaw {
    /// Probability of one degree sequence as f64.
    pub fn prob(&self, seq: &[u32]) -> f64 {
        self.numerators
            .get(seq)
            .map(|&num| num as f64 / self.denominator as f64)
            .unwrap_or(0.0)
    }

    /// Sum of all numerators; equals the denominator exactly.
    pub fn total(&self) -> u128 {
        self.numerators.values().sum()
    }

    /// Law of the degree of a uniformly chosen vertex.
    pub fn uniform_vertex_degree_law(&self) -> BTreeMap<u64, f64> {
        let mut law = BTreeMap::new();
        let denom = self.denominator as f64;
        for (seq, &num) in &self.numerators {
            let p_seq = num as f64 / denom;
            for &d in seq {
                *law.entry(d as u64).or_insert(0.0) += p_seq / self.n as f64;
            }
        }
        law
    }

    /// Marginal law of one vertex's degree (1-based index).
    pub fn vertex_degree_law(&self, vertex: u64) -> BTreeMap<u64, f64> {
        assert!(vertex >= 1 && vertex <= self.n, "vertex out of range");
        let mut law = BTreeMap::new();
        let denom = self.denominator as f64;
        for (seq, &num) in &self.numerators {
            let d = seq[vertex as usize - 1] as u64;
            *law.entry(d).or_insert(0.0) += num as f64 / denom;
        }
        law
    }
}

/// Exhaustively enumerates every attachment outcome of an `(m, n)` run and
/// returns the exact joint degree-sequence law.
pub fn enumerate_exact(m: u32, n: u64) -> Result<ExactDegreeLaw, BaError> {
    if m == 0 || n == 0 {
        return Err(BaError::InvalidConfig(
            "enumeration requires m >= 1 and n >= 1".into(),
        ));
    }
    let ln_leaves = (m as f64) * crate::special::ln_factorial(n);
    if ln_leaves > ENUMERATION_LEAF_LIMIT.ln() {
        return Err(BaError::InstanceTooLarge {
            m,
            n,
            leaves: ln_leaves.exp(),
            limit: ENUMERATION_LEAF_LIMIT,
        });
    }

    let m64 = m as u64;
    let mut denominator: u128 = 1;
    for w in 0..n {
        for l in 2..=(m64 + 1) {
            let d = 2 * (m64 * w + l - 1) - 1;
            denominator = denominator
                .checked_mul(d as u128)
                .expect("denominator fits in u128 for enumerable instances");
        }
    }

    let mut law = ExactDegreeLaw {
        m,
        n,
        denominator,
        numerators: BTreeMap::new(),
    };
    let mut degrees: Vec<u32> = vec![0];
    enumerate_rec(m, n, 0, 2, 1, &mut degrees, &mut law);

    debug_assert_eq!(law.total(), law.denominator);
    Ok(law)
}

/// Depth-first walk over attachment choices. `w` is the 0-based window,
/// `l` the window-local step (2..=m+1), `num` the product of chosen weights.
fn enumerate_rec(
    m: u32,
    n: u64,
    w: u64,
    l: u64,
    num: u128,
    degrees: &mut Vec<u32>,
    law: &mut ExactDegreeLaw,
) {
    let m64 = m as u64;
    if l > m64 + 1 {
        // window complete
        if w + 1 == n {
            *law.numerators.entry(degrees.clone()).or_insert(0) += num;
            return;
        }
        degrees.push(0);
        enumerate_rec(m, n, w + 1, 2, num, degrees, law);
        degrees.pop();
        return;
    }

    let pending = w as usize;
    let denom = 2 * (m64 * w + l - 1) - 1;
    let mut weight_sum = 0u64;
    for v in 0..degrees.len() {
        let weight = degrees[v] as u64 + u64::from(v == pending);
        weight_sum += weight;
        if weight == 0 {
            continue;
        }
        if v == pending {
            degrees[v] += 2;
        } else {
            degrees[v] += 1;
            degrees[pending] += 1;
        }
        enumerate_rec(m, n, w, l + 1, num * weight as u128, degrees, law);
        if v == pending {
            degrees[v] -= 2;
        } else {
            degrees[v] -= 1;
            degrees[pending] -= 1;
        }
    }
    debug_assert_eq!(weight_sum, denom, "weights must sum to the normalizer");
}
