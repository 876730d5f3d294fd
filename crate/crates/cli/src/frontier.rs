//! Rate frontier: for each `(f_l, M)` grid point, the smallest throughput
//! `R` at which the mean measured task delay meets a target.
//!
//! Delay is averaged over the configured seeds and searched by bisection on
//! `log R` inside `[rate_min_bps, rate_max_bps]`. The search keeps a bracket
//! `lo` (delay above target) / `hi` (delay at or below target) and stops when
//! `hi / lo − 1` drops below `rate_rel_precision`; `hi` is reported.

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::experiment::run_one;
use crate::output::{num, opt, CsvRow};

const PROBES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrontierStatus {
    /// Converged with delay within tolerance of the target.
    Ok,
    /// Even `rate_max_bps` misses the target.
    Unreachable,
    /// `rate_min_bps` already meets the target with room to spare.
    BelowRange,
    /// Delay jumps across the tolerance band at the reported rate.
    Gap,
}

impl FrontierStatus {
    pub fn name(self) -> &'static str {
        match self {
            FrontierStatus::Ok => "ok",
            FrontierStatus::Unreachable => "unreachable",
            FrontierStatus::BelowRange => "below_range",
            FrontierStatus::Gap => "gap",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierRow {
    pub f_local_hz: f64,
    pub cache_m: usize,
    pub target_delay_s: f64,
    pub required_rate_bps: Option<f64>,
    pub measured_mean_delay_s: Option<f64>,
    pub status: FrontierStatus,
    pub evaluations: u32,
}

impl CsvRow for FrontierRow {
    fn header() -> Vec<&'static str> {
        vec![
            "f_local_hz",
            "cache_m",
            "target_delay_s",
            "required_rate_bps",
            "measured_mean_delay_s",
            "status",
            "evaluations",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            num(self.f_local_hz),
            self.cache_m.to_string(),
            num(self.target_delay_s),
            opt(self.required_rate_bps),
            opt(self.measured_mean_delay_s),
            self.status.name().to_owned(),
            self.evaluations.to_string(),
        ]
    }
}

/// Seed-averaged mean task delay in seconds at rate `rate_bps`; infinite if
/// some seed completes no measured task.
pub fn mean_delay_at(cfg: &ExperimentConfig, rate_bps: f64) -> Result<f64, CliError> {
    let mut c = cfg.clone();
    c.rate_bps = rate_bps;
    let delays: Vec<Option<f64>> = c
        .seeds
        .par_iter()
        .map(|&s| Ok(run_one(&c, s)?.row.measured_mean_delay_s))
        .collect::<Result<_, CliError>>()?;
    Ok(delays
        .iter()
        .map(|d| d.unwrap_or(f64::INFINITY))
        .sum::<f64>()
        / delays.len() as f64)
}

fn geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            (lo.ln() + t * (hi.ln() - lo.ln())).exp()
        })
        .collect()
}

/// Searches one grid point.
pub fn frontier_point(
    cfg: &ExperimentConfig,
    f_local_hz: f64,
    cache_m: usize,
) -> Result<FrontierRow, CliError> {
    let mut c = cfg.clone();
    c.f_local_hz = f_local_hz;
    c.cache_m = cache_m;
    c.validate()?;
    let target = c.target_delay_s;
    let tol = c.delay_tolerance_s;
    let fail = |reason: String| CliError::Frontier {
        f_local_hz,
        cache_m,
        reason,
    };

    let rates = geometric(c.rate_min_bps, c.rate_max_bps, PROBES);
    let probes: Vec<f64> = rates
        .iter()
        .map(|&r| mean_delay_at(&c, r))
        .collect::<Result<_, _>>()?;
    let mut evaluations = PROBES as u32;
    for (w, r) in probes.windows(2).zip(rates.windows(2)) {
        if w[1] > w[0] + tol {
            return Err(fail(format!(
                "delay rises from {} s at {} bps to {} s at {} bps",
                w[0], r[0], w[1], r[1]
            )));
        }
    }

    let row = |rate: Option<f64>, delay: Option<f64>, status, evaluations| FrontierRow {
        f_local_hz,
        cache_m,
        target_delay_s: target,
        required_rate_bps: rate,
        measured_mean_delay_s: delay,
        status,
        evaluations,
    };

    let (d_lo, d_hi) = (probes[0], probes[PROBES - 1]);
    if d_hi > target {
        return Ok(if d_hi <= target + tol {
            row(
                Some(c.rate_max_bps),
                Some(d_hi),
                FrontierStatus::Ok,
                evaluations,
            )
        } else {
            row(
                None,
                d_hi.is_finite().then_some(d_hi),
                FrontierStatus::Unreachable,
                evaluations,
            )
        });
    }
    if d_lo <= target {
        let status = if target - d_lo <= tol {
            FrontierStatus::Ok
        } else {
            FrontierStatus::BelowRange
        };
        return Ok(row(Some(c.rate_min_bps), Some(d_lo), status, evaluations));
    }

    // tightest probe bracket around the crossing
    let first_ok = probes
        .iter()
        .position(|&d| d <= target)
        .expect("d_hi <= target");
    let (mut lo, mut hi, mut d_at_hi) = (rates[first_ok - 1], rates[first_ok], probes[first_ok]);
    while hi / lo - 1.0 > c.rate_rel_precision {
        let mid = (lo * hi).sqrt();
        let d = mean_delay_at(&c, mid)?;
        evaluations += 1;
        if d <= target {
            hi = mid;
            d_at_hi = d;
        } else {
            lo = mid;
        }
    }
    let status = if (d_at_hi - target).abs() <= tol {
        FrontierStatus::Ok
    } else {
        FrontierStatus::Gap
    };
    Ok(row(Some(hi), Some(d_at_hi), status, evaluations))
}

/// Every `(f_l, M)` grid point, `f_l` ascending then `M` ascending.
pub fn frontier(cfg: &ExperimentConfig) -> Result<Vec<FrontierRow>, CliError> {
    let mut fls = cfg.frontier_f_local_hz.clone();
    fls.sort_by(f64::total_cmp);
    fls.dedup();
    let mut ms = cfg.frontier_cache_m.clone();
    ms.sort_unstable();
    ms.dedup();
    let grid: Vec<(f64, usize)> = fls
        .iter()
        .flat_map(|&f| ms.iter().map(move |&m| (f, m)))
        .collect();
    grid.par_iter()
        .map(|&(f, m)| frontier_point(cfg, f, m))
        .collect()
}
