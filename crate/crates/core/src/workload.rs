//! Bernoulli task arrivals and random task composition.
//!
//! Arrivals and task contents are drawn from two separate ChaCha streams
//! derived from one seed, so changing the arrival probability leaves the
//! sequence of task compositions untouched.

use alloc::vec::Vec;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::catalog::ContentCatalog;
use crate::error::invalid;
use crate::Result;

const ARRIVAL_STREAM: u64 = 0;
const COMPOSITION_STREAM: u64 = 1;

/// A request for the contents `contents` (1-based indices, repeats allowed).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    /// Unique, increasing id within a run.
    pub id: u64,
    /// Slot in which the task arrived.
    pub arrival_slot: u64,
    /// Content index vector; its length is `K_t`.
    pub contents: Vec<u32>,
}

impl Task {
    /// Number of contents in the task (`K_t`).
    pub fn k(&self) -> usize {
        self.contents.len()
    }

    /// Total task size `τ·K_t` in bits.
    pub fn total_bits(&self, catalog: &ContentCatalog) -> f64 {
        catalog.size_bits() * self.k() as f64
    }
}

/// Uniform distribution of the task length over `min..=max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KRange {
    min: u32,
    max: u32,
}

impl KRange {
    /// `1 <= min <= max` is required.
    pub fn new(min: u32, max: u32) -> Result<Self> {
        if min == 0 || min > max {
            return Err(invalid!(
                "task length range must satisfy 1 <= k_min <= k_max, got {min}..={max}"
            ));
        }
        Ok(Self { min, max })
    }

    /// Degenerate range with a single length.
    pub fn fixed(k: u32) -> Result<Self> {
        Self::new(k, k)
    }

    /// Smallest length.
    pub fn min(&self) -> u32 {
        self.min
    }

    /// Largest length.
    pub fn max(&self) -> u32 {
        self.max
    }

    /// `E[K_t]`.
    pub fn mean(&self) -> f64 {
        (self.min as f64 + self.max as f64) / 2.0
    }

    /// Support together with `Pr(K_t = k)`.
    pub fn pmf(&self) -> impl Iterator<Item = (u32, f64)> {
        let p = 1.0 / (self.max - self.min + 1) as f64;
        (self.min..=self.max).map(move |k| (k, p))
    }

    /// Draws one task length.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        rng.gen_range(self.min..=self.max)
    }
}

/// Arrival probability, task-length range and seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkloadConfig {
    /// Per-slot arrival probability `λ`.
    pub arrival_prob: f64,
    /// Task length distribution.
    pub k: KRange,
    /// Seed for both random streams.
    pub seed: u64,
}

impl WorkloadConfig {
    /// Checks `λ ∈ [0, 1]`.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.arrival_prob) {
            return Err(invalid!(
                "arrival probability must lie in [0, 1], got {}",
                self.arrival_prob
            ));
        }
        Ok(())
    }
}

/// Seeded task generator owned by a single run.
#[derive(Debug, Clone)]
pub struct Workload {
    cfg: WorkloadConfig,
    arrivals: ChaCha8Rng,
    composition: ChaCha8Rng,
    next_id: u64,
}

impl Workload {
    /// Creates the generator; fails if the config is invalid.
    pub fn new(cfg: WorkloadConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            arrivals: stream(cfg.seed, ARRIVAL_STREAM),
            composition: stream(cfg.seed, COMPOSITION_STREAM),
            next_id: 0,
        })
    }

    /// The configuration this generator was built from.
    pub fn config(&self) -> &WorkloadConfig {
        &self.cfg
    }

    /// `A(t)`: whether a task arrives in the current slot.
    pub fn sample_arrival(&mut self) -> bool {
        self.arrivals.gen_bool(self.cfg.arrival_prob)
    }

    /// Draws the next task; contents are i.i.d. from the catalog popularity.
    pub fn sample_task(&mut self, catalog: &ContentCatalog, slot: u64) -> Task {
        let k = self.cfg.k.sample(&mut self.composition);
        let contents = (0..k)
            .map(|_| catalog.sample_content(&mut self.composition))
            .collect();
        let id = self.next_id;
        self.next_id += 1;
        Task {
            id,
            arrival_slot: slot,
            contents,
        }
    }

    /// Draws `A(t)` and, if a task arrives, its composition.
    pub fn next_arrival(&mut self, catalog: &ContentCatalog, slot: u64) -> Option<Task> {
        self.sample_arrival()
            .then(|| self.sample_task(catalog, slot))
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}
