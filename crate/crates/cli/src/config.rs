//! Experiment configuration: a TOML file of `key = value` lines.
//!
//! Every key is optional; missing keys take the defaults below, unknown keys
//! are rejected. Units: bits, seconds, Hz, bits/s. `v_param` is in 1/bit.

use std::path::Path;

use mecsched_core::dynamics::Model;
use mecsched_core::engine::RunConfig;
use mecsched_core::{
    CacheConfig, ContentCatalog, KRange, PolicyKind, PolicySpec, SystemParams, WorkloadConfig,
};
use serde::Deserialize;

use crate::error::CliError;

/// Parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    CacheM,
    FLocalHz,
    VParam,
    RateBps,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::CacheM => "cache_m",
            SweepAxis::FLocalHz => "f_local_hz",
            SweepAxis::VParam => "v_param",
            SweepAxis::RateBps => "rate_bps",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub n_contents: usize,
    pub zipf_alpha: f64,
    pub tau_bits: f64,
    pub cache_m: usize,
    pub slot_seconds: f64,
    pub lambda: f64,
    pub w_cycles_per_bit: f64,
    pub f_local_hz: f64,
    pub f_mec_hz: f64,
    pub rate_bps: f64,
    pub v_param: f64,
    pub horizon_slots: u64,
    pub k_min: u32,
    pub k_max: u32,
    pub policy: String,
    pub sweep_axis: Option<SweepAxis>,
    pub sweep_values: Vec<f64>,
    pub seeds: Vec<u64>,
    pub warmup_frac: f64,
    /// Monte Carlo sample count for `analyze`.
    pub analysis_samples: usize,
    // frontier search
    pub target_delay_s: f64,
    pub delay_tolerance_s: f64,
    pub rate_min_bps: f64,
    pub rate_max_bps: f64,
    pub rate_rel_precision: f64,
    pub frontier_f_local_hz: Vec<f64>,
    pub frontier_cache_m: Vec<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_contents: 1000,
            zipf_alpha: 0.8,
            tau_bits: 5e6,
            cache_m: 50,
            slot_seconds: 0.2,
            lambda: 0.4,
            w_cycles_per_bit: 1.0,
            f_local_hz: 1e9,
            // 4 cores x 2.5 GHz treated as one aggregate server
            f_mec_hz: 1e10,
            rate_bps: 5e8,
            v_param: 2e-7,
            horizon_slots: 100_000,
            k_min: 40,
            k_max: 60,
            policy: "lyapunov".into(),
            sweep_axis: None,
            sweep_values: Vec::new(),
            seeds: vec![1],
            warmup_frac: 0.1,
            analysis_samples: 100_000,
            target_delay_s: 1.0,
            delay_tolerance_s: 0.05,
            rate_min_bps: 1e8,
            rate_max_bps: 5e9,
            rate_rel_precision: 1e-3,
            frontier_f_local_hz: vec![5e8, 1e9, 2e9],
            frontier_cache_m: vec![0, 50, 200],
        }
    }
}

/// Reads and validates `path`, then applies `key=value` overrides.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
        path: path.to_owned(),
        source,
    })?;
    parse_config(&text, overrides)
}

/// Parses config text, applies `key=value` overrides and validates.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<ExperimentConfig, CliError> {
    let mut table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Parse(e.to_string()))?;
    for o in overrides {
        let (key, value) = o
            .split_once('=')
            .ok_or_else(|| CliError::Parse(format!("override `{o}` is not key=value")))?;
        let key = key.trim();
        table.insert(key.to_owned(), parse_value(key, value.trim())?);
    }
    let cfg: ExperimentConfig = table
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

// Bare words on the command line are taken as strings: `policy=mec_only`.
fn parse_value(key: &str, raw: &str) -> Result<toml::Value, CliError> {
    let probe = format!("v = {raw}");
    if let Ok(mut t) = probe.parse::<toml::Table>() {
        if let Some(v) = t.remove("v") {
            return Ok(v);
        }
    }
    if raw.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') && !raw.is_empty() {
        return Ok(toml::Value::String(raw.to_owned()));
    }
    Err(CliError::Parse(format!(
        "cannot parse value `{raw}` for `{key}`"
    )))
}

fn positive(key: &'static str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::invalid(
            key,
            format!("must be finite and > 0, got {v}"),
        ))
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.n_contents == 0 {
            return Err(CliError::invalid("n_contents", "must be >= 1"));
        }
        if !(self.zipf_alpha >= 0.0 && self.zipf_alpha.is_finite()) {
            return Err(CliError::invalid(
                "zipf_alpha",
                format!("must be >= 0, got {}", self.zipf_alpha),
            ));
        }
        positive("tau_bits", self.tau_bits)?;
        if self.cache_m > self.n_contents {
            return Err(CliError::invalid(
                "cache_m",
                format!("{} exceeds n_contents = {}", self.cache_m, self.n_contents),
            ));
        }
        positive("slot_seconds", self.slot_seconds)?;
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(CliError::invalid(
                "lambda",
                format!("must lie in [0, 1], got {}", self.lambda),
            ));
        }
        positive("w_cycles_per_bit", self.w_cycles_per_bit)?;
        positive("f_local_hz", self.f_local_hz)?;
        positive("f_mec_hz", self.f_mec_hz)?;
        positive("rate_bps", self.rate_bps)?;
        if !(self.v_param >= 0.0 && self.v_param.is_finite()) {
            return Err(CliError::invalid(
                "v_param",
                format!("must be >= 0, got {}", self.v_param),
            ));
        }
        if self.horizon_slots == 0 {
            return Err(CliError::invalid("horizon_slots", "must be >= 1"));
        }
        if self.k_min == 0 {
            return Err(CliError::invalid("k_min", "must be >= 1"));
        }
        if self.k_max < self.k_min {
            return Err(CliError::invalid(
                "k_max",
                format!("{} is below k_min = {}", self.k_max, self.k_min),
            ));
        }
        if !(self.k_max as f64 * self.tau_bits).is_finite() {
            return Err(CliError::invalid("tau_bits", "k_max * tau_bits overflows"));
        }
        self.policy_kind()?;
        if self.seeds.is_empty() {
            return Err(CliError::invalid("seeds", "must list at least one seed"));
        }
        if !(0.0..1.0).contains(&self.warmup_frac) {
            return Err(CliError::invalid(
                "warmup_frac",
                format!("must lie in [0, 1), got {}", self.warmup_frac),
            ));
        }
        if self.analysis_samples == 0 {
            return Err(CliError::invalid("analysis_samples", "must be >= 1"));
        }
        positive("target_delay_s", self.target_delay_s)?;
        positive("delay_tolerance_s", self.delay_tolerance_s)?;
        positive("rate_min_bps", self.rate_min_bps)?;
        positive("rate_max_bps", self.rate_max_bps)?;
        if self.rate_max_bps <= self.rate_min_bps {
            return Err(CliError::invalid(
                "rate_max_bps",
                "must exceed rate_min_bps",
            ));
        }
        positive("rate_rel_precision", self.rate_rel_precision)?;
        for &f in &self.frontier_f_local_hz {
            positive("frontier_f_local_hz", f)?;
        }
        if let Some(&m) = self.frontier_cache_m.iter().find(|&&m| m > self.n_contents) {
            return Err(CliError::invalid(
                "frontier_cache_m",
                format!("{m} exceeds n_contents"),
            ));
        }
        if let Some(axis) = self.sweep_axis {
            for &v in &self.sweep_values {
                self.with_axis(axis, v)?.validate()?;
            }
        }
        Ok(())
    }

    pub fn policy_kind(&self) -> Result<PolicyKind, CliError> {
        PolicyKind::parse(&self.policy).ok_or_else(|| {
            CliError::invalid(
                "policy",
                format!(
                    "`{}` is not one of lyapunov, mec_only, local_only",
                    self.policy
                ),
            )
        })
    }

    pub fn policy_spec(&self) -> Result<PolicySpec, CliError> {
        Ok(PolicySpec::new(self.policy_kind()?, self.v_param)?)
    }

    pub fn params(&self) -> SystemParams {
        SystemParams {
            slot_seconds: self.slot_seconds,
            cycles_per_bit: self.w_cycles_per_bit,
            f_local_hz: self.f_local_hz,
            f_mec_hz: self.f_mec_hz,
            rate_bps: self.rate_bps,
        }
    }

    pub fn model(&self) -> Result<Model, CliError> {
        let catalog = ContentCatalog::zipf(self.n_contents, self.zipf_alpha, self.tau_bits)?;
        let cache = CacheConfig::new(self.cache_m, &catalog)?;
        Ok(Model::new(catalog, cache, self.params())?)
    }

    pub fn k_range(&self) -> Result<KRange, CliError> {
        Ok(KRange::new(self.k_min, self.k_max)?)
    }

    pub fn workload(&self, seed: u64) -> Result<WorkloadConfig, CliError> {
        Ok(WorkloadConfig {
            arrival_prob: self.lambda,
            k: self.k_range()?,
            seed,
        })
    }

    pub fn run_config(&self) -> Result<RunConfig, CliError> {
        Ok(RunConfig::new(self.policy_spec()?, self.horizon_slots).with_warmup(self.warmup_frac))
    }

    /// Copy of `self` with `axis` set to `value`.
    pub fn with_axis(&self, axis: SweepAxis, value: f64) -> Result<Self, CliError> {
        let mut c = self.clone();
        match axis {
            SweepAxis::CacheM => {
                if !(value >= 0.0 && value.fract() == 0.0) {
                    return Err(CliError::invalid(
                        "sweep_values",
                        format!("cache_m value {value} is not a count"),
                    ));
                }
                c.cache_m = value as usize;
            }
            SweepAxis::FLocalHz => c.f_local_hz = value,
            SweepAxis::VParam => c.v_param = value,
            SweepAxis::RateBps => c.rate_bps = value,
        }
        c.sweep_axis = None;
        Ok(c)
    }
}
