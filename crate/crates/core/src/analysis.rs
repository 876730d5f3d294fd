//! Closed-form expectations and bounds for the scheduler, plus a Monte Carlo
//! estimator for the mean slot counts `N̄_l` and `N̄_c`.
//!
//! With `D̄_ct = τ·E[K]` and
//! `D̄_lt = τ Σ_{n>M} Σ_k (1 − (1 − p_n)^k) Pr(K = k)`, the optimal long-run
//! data per task is
//!
//! ```text
//! D_opt = D̄_lt                               if 1/N̄_l ≥ λ
//!       = D̄_ct − (D̄_ct − D̄_lt) / (λ N̄_l)   if 1/N̄_l < λ ≤ 1/N̄_l + 1/N̄_c
//!       = infeasible                          otherwise
//! ```
//!
//! and drift-plus-penalty with weight `V` stays within `5 / (2V)` of it.

use crate::catalog::ContentCatalog;
use crate::dynamics::Model;
use crate::error::invalid;
use crate::stats::Summary;
use crate::workload::{KRange, Workload, WorkloadConfig};
use crate::Result;

/// `D̄_ct = τ·E[K_t]`.
pub fn expected_dct(tau: f64, k: &KRange) -> f64 {
    tau * k.mean()
}

/// `D̄_lt`: expected bits of distinct uncached contents per task, assuming
/// i.i.d. content draws.
pub fn expected_dlt(tau: f64, popularity: &[f64], cache_m: usize, k: &KRange) -> Result<f64> {
    if cache_m > popularity.len() {
        return Err(invalid!(
            "cache size {cache_m} exceeds catalog size {}",
            popularity.len()
        ));
    }
    let pmf: alloc::vec::Vec<(u32, f64)> = k.pmf().collect();
    let mut total = 0.0;
    for &p in &popularity[cache_m..] {
        // 1 − (1 − p)^k without cancellation for small p
        let log_miss = libm::log1p(-p);
        total += pmf
            .iter()
            .map(|&(k, pr)| -libm::expm1(k as f64 * log_miss) * pr)
            .sum::<f64>();
    }
    Ok(tau * total)
}

/// Monte Carlo estimates of `E[N_l]` and `E[N_c]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotMeans {
    /// Sampled tasks.
    pub samples: usize,
    /// `N̄_l`.
    pub nl_bar: f64,
    /// Standard error of `nl_bar`.
    pub nl_se: f64,
    /// `N̄_c`.
    pub nc_bar: f64,
    /// Standard error of `nc_bar`.
    pub nc_se: f64,
    /// Sample mean of `D_lt` in bits, a by-product.
    pub dlt_bar: f64,
}

/// Samples `samples` tasks from the composition stream of `seed` and
/// averages their local and MEC slot counts.
pub fn estimate_slot_means(
    model: &Model,
    k: KRange,
    samples: usize,
    seed: u64,
) -> Result<SlotMeans> {
    if samples == 0 {
        return Err(invalid!("need at least one sample"));
    }
    let mut gen = Workload::new(WorkloadConfig {
        arrival_prob: 1.0,
        k,
        seed,
    })?;
    let profiles: alloc::vec::Vec<_> = (0..samples as u64)
        .map(|i| model.profile(&gen.sample_task(&model.catalog, i)))
        .collect();
    let nl = Summary::of(profiles.iter().map(|p| p.slots_local as f64));
    let nc = Summary::of(profiles.iter().map(|p| p.slots_mec as f64));
    let dlt = Summary::of(profiles.iter().map(|p| p.uncached_bits));
    Ok(SlotMeans {
        samples,
        nl_bar: nl.mean,
        nl_se: nl.se(),
        nc_bar: nc.mean,
        nc_se: nc.se(),
        dlt_bar: dlt.mean,
    })
}

/// Operating regime of a parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// The device alone keeps up: `1/N̄_l ≥ λ`.
    LocalOnlyOptimal,
    /// Both processors are needed: `1/N̄_l < λ ≤ 1/N̄_l + 1/N̄_c`.
    Mixed,
    /// No policy keeps the queue stable.
    Infeasible,
}

impl Regime {
    /// Snake-case name for reports.
    pub const fn name(self) -> &'static str {
        match self {
            Regime::LocalOnlyOptimal => "local_only_optimal",
            Regime::Mixed => "mixed",
            Regime::Infeasible => "infeasible",
        }
    }
}

/// Regime classification with the optimal data per task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    /// `N̄_l`.
    pub nl_bar: f64,
    /// `N̄_c`.
    pub nc_bar: f64,
    /// Arrival probability.
    pub lambda: f64,
    /// `1/N̄_l`.
    pub local_rate: f64,
    /// `1/N̄_l + 1/N̄_c`.
    pub total_rate: f64,
    /// The regime.
    pub regime: Regime,
    /// Optimal bits per task; `None` iff infeasible.
    pub d_opt_bits: Option<f64>,
    /// `D̄_ct`.
    pub d_ct_bar: f64,
    /// `D̄_lt`.
    pub d_lt_bar: f64,
    /// `D̄_lc`, which equals `D̄_ct`.
    pub d_lc_bar: f64,
}

/// Mixed-regime optimum `D̄_ct − (D̄_ct − D̄_lt)/(λ N̄_l)`.
pub fn mixed_regime_data(nl_bar: f64, lambda: f64, d_ct_bar: f64, d_lt_bar: f64) -> f64 {
    d_ct_bar - (d_ct_bar - d_lt_bar) / (lambda * nl_bar)
}

/// Classifies `(N̄_l, N̄_c, λ)` and evaluates the optimal data per task.
pub fn classify_regime(
    nl_bar: f64,
    nc_bar: f64,
    lambda: f64,
    d_ct_bar: f64,
    d_lt_bar: f64,
) -> Result<RegimeReport> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(invalid!(
            "arrival probability must lie in (0, 1], got {lambda}"
        ));
    }
    if !(nl_bar >= 1.0 && nc_bar >= 1.0) {
        return Err(invalid!(
            "mean slot counts must be >= 1, got {nl_bar} and {nc_bar}"
        ));
    }
    let local_rate = 1.0 / nl_bar;
    let total_rate = local_rate + 1.0 / nc_bar;
    let (regime, d_opt_bits) = if local_rate >= lambda {
        (Regime::LocalOnlyOptimal, Some(d_lt_bar))
    } else if total_rate >= lambda {
        (
            Regime::Mixed,
            Some(mixed_regime_data(nl_bar, lambda, d_ct_bar, d_lt_bar)),
        )
    } else {
        (Regime::Infeasible, None)
    };
    Ok(RegimeReport {
        nl_bar,
        nc_bar,
        lambda,
        local_rate,
        total_rate,
        regime,
        d_opt_bits,
        d_ct_bar,
        d_lt_bar,
        d_lc_bar: d_ct_bar,
    })
}

/// Everything needed to place a scenario in its regime.
pub fn regime_report(
    model: &Model,
    k: KRange,
    lambda: f64,
    samples: usize,
    seed: u64,
) -> Result<(RegimeReport, SlotMeans)> {
    let catalog: &ContentCatalog = &model.catalog;
    let tau = catalog.size_bits();
    let means = estimate_slot_means(model, k, samples, seed)?;
    let dct = expected_dct(tau, &k);
    let dlt = expected_dlt(tau, catalog.popularity(), model.cache.capacity(), &k)?;
    Ok((
        classify_regime(means.nl_bar, means.nc_bar, lambda, dct, dlt)?,
        means,
    ))
}

/// Optimality gap `5 / (2V)` in bits (V in 1/bit); infinite for `V = 0`.
pub fn optimality_gap_bound(v: f64) -> Result<f64> {
    if v.is_nan() || v < 0.0 {
        return Err(invalid!("V must be >= 0, got {v}"));
    }
    Ok(if v == 0.0 {
        f64::INFINITY
    } else {
        5.0 / (2.0 * v)
    })
}

/// Drift-bound constant `(5 + 2·Q·A) / 2`.
pub fn drift_constant(q: u64, arrival: bool) -> f64 {
    (5.0 + 2.0 * q as f64 * arrival as u8 as f64) / 2.0
}
