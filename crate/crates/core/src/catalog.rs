//! Content catalog with Zipf popularity and a most-popular-first cache.
//!
//! Contents are indexed `1..=N` in non-increasing popularity order, so a
//! cache of capacity `M` holds exactly the indices `1..=M`. Cached payloads
//! are never materialised; only membership matters.

use alloc::vec::Vec;
use rand::Rng;

use crate::error::invalid;
use crate::Result;

/// Zipf popularity over `n` contents: `p_k = k^-alpha / sum_m m^-alpha`.
pub fn zipf_popularity(n: usize, alpha: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(invalid!("zipf_popularity needs at least one content"));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(invalid!(
            "zipf exponent must be finite and >= 0, got {alpha}"
        ));
    }
    let weights: Vec<f64> = (1..=n).map(|k| libm::pow(k as f64, -alpha)).collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// The set of `N` equal-size contents tasks are composed from.
#[derive(Debug, Clone, PartialEq)]
pub struct ContentCatalog {
    size_bits: f64,
    zipf_alpha: f64,
    popularity: Vec<f64>,
    // cdf[i] = P(index <= i + 1); last entry pinned to 1.0
    cdf: Vec<f64>,
}

impl ContentCatalog {
    /// Builds a Zipf catalog of `n_contents` contents of `size_bits` each.
    pub fn zipf(n_contents: usize, zipf_alpha: f64, size_bits: f64) -> Result<Self> {
        if !(size_bits > 0.0 && size_bits.is_finite()) {
            return Err(invalid!("content size must be positive, got {size_bits}"));
        }
        let popularity = zipf_popularity(n_contents, zipf_alpha)?;
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = popularity
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        *cdf.last_mut().expect("non-empty") = 1.0;
        Ok(Self {
            size_bits,
            zipf_alpha,
            popularity,
            cdf,
        })
    }

    /// Number of contents `N`.
    pub fn n_contents(&self) -> usize {
        self.popularity.len()
    }

    /// Bits per content (τ).
    pub fn size_bits(&self) -> f64 {
        self.size_bits
    }

    /// Zipf exponent the catalog was built with.
    pub fn zipf_alpha(&self) -> f64 {
        self.zipf_alpha
    }

    /// Popularity vector; entry `i` is the probability of index `i + 1`.
    pub fn popularity(&self) -> &[f64] {
        &self.popularity
    }

    /// Draws one content index in `1..=N` according to the popularity.
    pub fn sample_content<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.gen();
        let i = self.cdf.partition_point(|&c| c <= u);
        // u < 1 and cdf ends at 1.0, so i < N
        i.min(self.cdf.len() - 1) as u32 + 1
    }
}

/// Device cache holding the `capacity` most popular contents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CacheConfig {
    capacity: usize,
}

impl CacheConfig {
    /// Cache of `capacity` contents for `catalog`. `capacity == N` is allowed.
    pub fn new(capacity: usize, catalog: &ContentCatalog) -> Result<Self> {
        if capacity > catalog.n_contents() {
            return Err(invalid!(
                "cache capacity {capacity} exceeds catalog size {}",
                catalog.n_contents()
            ));
        }
        Ok(Self { capacity })
    }

    /// Number of cached contents `M`.
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Membership test without bounds checking against a catalog.
    #[inline]
    pub fn holds(&self, content_index: u32) -> bool {
        content_index as usize <= self.capacity
    }

    /// True iff `content_index` (1-based) is cached.
    pub fn is_cached(&self, content_index: u32, catalog: &ContentCatalog) -> Result<bool> {
        if content_index == 0 || content_index as usize > catalog.n_contents() {
            return Err(invalid!(
                "content index {content_index} outside 1..={}",
                catalog.n_contents()
            ));
        }
        Ok(self.holds(content_index))
    }
}
