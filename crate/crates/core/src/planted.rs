//! Planted lineage forest: uniform-ancestor growth over a fixed set of roots.
//!
//! The forest starts from `i >= 2` root vertices, one lineage each. Every
//! arrival picks a parent uniformly among all current vertices and joins the
//! parent's lineage, so lineage sizes evolve as a classical urn: the chance
//! that the next arrival joins lineage `j` is its current share of vertices.
//!
//! Uniform vertex choice factorizes exactly: draw a lineage size-biased
//! (share-weighted), then a uniform birth rank inside it. [`two_stage_sample`]
//! implements that factorization and is distribution-identical to a uniform
//! draw over vertices — a property the verification experiments check.

use serde::Serialize;
use thiserror::Error;

use crate::rng::SimRng;
use rand::Rng;

/// Errors from forest construction and sampling.
#[derive(Debug, Error)]
pub enum PlantedError {
    /// Fewer than two roots requested.
    #[error("a planted forest needs at least 2 roots, got {0}")]
    TooFewRoots(u64),
    /// A lineage index outside `1..=num_roots`.
    #[error("lineage {lineage} out of range 1..={num_roots}")]
    BadLineage {
        /// Requested lineage.
        lineage: u64,
        /// Number of lineages.
        num_roots: u64,
    },
    /// Invalid checkpoint or target size.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Outcome of the two-stage (lineage, rank) sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SampleOutcome {
    /// Lineage drawn with probability proportional to its size.
    pub lineage_w: u32,
    /// Uniform birth rank inside the lineage (1-based; rank 1 is the root).
    pub rank_z: u64,
    /// The vertex at that rank (1-based global id).
    pub vertex: u32,
}

/// Growing forest over a fixed root set.
#[derive(Clone, Debug)]
pub struct PlantedForest {
    num_roots: u64,
    /// `lineage[v-1]` = lineage id (1-based) of vertex `v`.
    lineage: Vec<u32>,
    /// `members[j-1]` = vertices of lineage `j` in birth order.
    members: Vec<Vec<u32>>,
}

impl PlantedForest {
    /// Forest of `num_roots` singleton lineages (vertices `1..=num_roots`).
    pub fn init(num_roots: u64) -> Result<Self, PlantedError> {
        if num_roots < 2 {
            return Err(PlantedError::TooFewRoots(num_roots));
        }
        let lineage = (1..=num_roots as u32).collect();
        let members = (1..=num_roots as u32).map(|j| vec![j]).collect();
        Ok(Self {
            num_roots,
            lineage,
            members,
        })
    }

    /// Number of root lineages.
    pub fn num_roots(&self) -> u64 {
        self.num_roots
    }

    /// Current number of vertices.
    pub fn n(&self) -> u64 {
        self.lineage.len() as u64
    }

    /// Current size of lineage `j` (1-based).
    pub fn count(&self, j: u64) -> Result<u64, PlantedError> {
        self.members
            .get(j as usize - 1)
            .map(|m| m.len() as u64)
            .ok_or(PlantedError::BadLineage {
                lineage: j,
                num_roots: self.num_roots,
            })
    }

    /// All lineage sizes, indexed by lineage - 1.
    pub fn counts(&self) -> Vec<u64> {
        self.members.iter().map(|m| m.len() as u64).collect()
    }

    /// Lineage of vertex `v` (1-based).
    pub fn lineage_of(&self, v: u64) -> Option<u32> {
        if v == 0 {
            return None;
        }
        self.lineage.get(v as usize - 1).copied()
    }

    /// Probability that the next arrival joins lineage `j`.
    pub fn lineage_attach_probability(&self, j: u64) -> Result<f64, PlantedError> {
        Ok(self.count(j)? as f64 / self.n() as f64)
    }

    /// Adds one vertex by uniform-parent choice; returns its id.
    pub fn attach_next(&mut self, rng: &mut SimRng) -> u32 {
        let n = self.lineage.len();
        let parent = rng.random_range(0..n);
        let j = self.lineage[parent];
        let v = (n + 1) as u32;
        self.lineage.push(j);
        self.members[j as usize - 1].push(v);
        v
    }

    /// Grows the forest until it holds `n_target` vertices.
    pub fn grow_to(&mut self, n_target: u64, rng: &mut SimRng) -> Result<(), PlantedError> {
        if n_target < self.n() {
            return Err(PlantedError::InvalidConfig(format!(
                "target size {n_target} below current size {}",
                self.n()
            )));
        }
        while self.n() < n_target {
            self.attach_next(rng);
        }
        Ok(())
    }

    /// The (lineage, rank) coordinates of vertex `v`, if present.
    ///
    /// Inverse of the coordinates produced by [`Self::two_stage_sample`]:
    /// the rank is `v`'s 1-based position in its lineage's birth order.
    pub fn outcome_of_vertex(&self, v: u64) -> Option<SampleOutcome> {
        let j = self.lineage_of(v)?;
        let members = &self.members[j as usize - 1];
        // members are appended in birth order, so ids are ascending
        let idx = members.binary_search(&(v as u32)).ok()?;
        Some(SampleOutcome {
            lineage_w: j,
            rank_z: (idx + 1) as u64,
            vertex: v as u32,
        })
    }

    /// Two-stage vertex draw: a size-biased lineage, then a uniform rank.
    ///
    /// The resulting vertex is exactly uniform on all current vertices:
    /// `P(vertex = v) = (count[j]/n) * (1/count[j]) = 1/n`.
    pub fn two_stage_sample(&self, rng: &mut SimRng) -> SampleOutcome {
        let n = self.lineage.len();
        // Size-biased lineage choice via a uniform slot among all vertices,
        // walked against cumulative counts (exact, no floating point).
        let slot = rng.random_range(0..n);
        let mut acc = 0usize;
        let mut j = 0usize;
        for (idx, m) in self.members.iter().enumerate() {
            acc += m.len();
            if slot < acc {
                j = idx;
                break;
            }
        }
        let count = self.members[j].len();
        let rank = rng.random_range(0..count);
        SampleOutcome {
            lineage_w: (j + 1) as u32,
            rank_z: (rank + 1) as u64,
            vertex: self.members[j][rank],
        }
    }
}

/// Expected size of any single lineage when `num_roots` roots have grown to
/// `n` total vertices: lineages are exchangeable, so the mean is `n / i`.
pub fn polya_mean(num_roots: u64, n: u64) -> Result<f64, PlantedError> {
    if num_roots < 2 {
        return Err(PlantedError::TooFewRoots(num_roots));
    }
    if n < num_roots {
        return Err(PlantedError::InvalidConfig(format!(
            "n = {n} is smaller than the root count {num_roots}"
        )));
    }
    Ok(n as f64 / num_roots as f64)
}

/// Size of lineage `j` observed at a list of total-size checkpoints.
pub fn lineage_size_trace(
    num_roots: u64,
    lineage_j: u64,
    checkpoints: &[u64],
    rng: &mut SimRng,
) -> Result<Vec<u64>, PlantedError> {
    let mut forest = PlantedForest::init(num_roots)?;
    if lineage_j == 0 || lineage_j > num_roots {
        return Err(PlantedError::BadLineage {
            lineage: lineage_j,
            num_roots,
        });
    }
    if checkpoints.is_empty() {
        return Err(PlantedError::InvalidConfig("no checkpoints given".into()));
    }
    let mut prev = 0u64;
    for &n in checkpoints {
        if n < num_roots {
            return Err(PlantedError::InvalidConfig(format!(
                "checkpoint {n} is below the root count {num_roots}"
            )));
        }
        if n <= prev && prev != 0 {
            return Err(PlantedError::InvalidConfig(
                "checkpoints must be strictly increasing".into(),
            ));
        }
        prev = n;
    }
    let mut out = Vec::with_capacity(checkpoints.len());
    for &n in checkpoints {
        forest.grow_to(n, rng)?;
        out.push(forest.count(lineage_j)?);
    }
    Ok(out)
}
