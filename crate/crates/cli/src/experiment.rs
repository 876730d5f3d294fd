//! Single runs, sweeps and the analytic report.

use mecsched_core::analysis::{self, RegimeReport, SlotMeans};
use mecsched_core::engine::{run_simulation, RunMetrics};
use mecsched_core::stats::Summary;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, SweepAxis};
use crate::error::CliError;
use crate::output::{num, opt, CsvRow};

/// One simulated seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRow {
    pub seed: u64,
    pub policy: &'static str,
    pub v_param: f64,
    pub cache_m: usize,
    pub f_local_hz: f64,
    pub rate_bps: f64,
    pub lambda: f64,
    pub avg_data_per_task_bits: Option<f64>,
    pub avg_queue_len: f64,
    pub little_delay_s: Option<f64>,
    pub measured_mean_delay_s: Option<f64>,
    pub completions: u64,
    pub arrivals: u64,
    /// Bits per arrival rather than per scheduled task; lower when the
    /// queue is still growing at the horizon.
    pub avg_data_per_arrival_bits: Option<f64>,
    pub status: &'static str,
}

impl CsvRow for SimRow {
    fn header() -> Vec<&'static str> {
        vec![
            "seed",
            "policy",
            "v_param",
            "cache_m",
            "f_local_hz",
            "rate_bps",
            "lambda",
            "avg_data_per_task_bits",
            "avg_queue_len",
            "little_delay_s",
            "measured_mean_delay_s",
            "completions",
            "arrivals",
            "avg_data_per_arrival_bits",
            "status",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.seed.to_string(),
            self.policy.to_owned(),
            num(self.v_param),
            self.cache_m.to_string(),
            num(self.f_local_hz),
            num(self.rate_bps),
            num(self.lambda),
            opt(self.avg_data_per_task_bits),
            num(self.avg_queue_len),
            opt(self.little_delay_s),
            opt(self.measured_mean_delay_s),
            self.completions.to_string(),
            self.arrivals.to_string(),
            opt(self.avg_data_per_arrival_bits),
            self.status.to_owned(),
        ]
    }
}

/// A run's CSV row together with its full metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub row: SimRow,
    pub metrics: RunMetrics,
}

/// Simulates `cfg` once for `seed`.
pub fn run_one(cfg: &ExperimentConfig, seed: u64) -> Result<RunRecord, CliError> {
    let model = cfg.model()?;
    let metrics = run_simulation(&model, cfg.workload(seed)?, &cfg.run_config()?)?;
    let data = metrics.avg_data_per_task().ok();
    let row = SimRow {
        seed,
        policy: cfg.policy_kind()?.name(),
        v_param: cfg.v_param,
        cache_m: cfg.cache_m,
        f_local_hz: cfg.f_local_hz,
        rate_bps: cfg.rate_bps,
        lambda: cfg.lambda,
        avg_data_per_task_bits: data,
        avg_queue_len: metrics.avg_queue_length(),
        little_delay_s: metrics.little_delay(cfg.lambda, cfg.slot_seconds).ok(),
        measured_mean_delay_s: metrics.mean_delay_slots().map(|d| d * cfg.slot_seconds),
        completions: metrics.completions,
        arrivals: metrics.arrivals,
        avg_data_per_arrival_bits: metrics.avg_data_per_arrival().ok(),
        status: if data.is_some() {
            "ok"
        } else {
            "zero_arrivals"
        },
    };
    Ok(RunRecord { row, metrics })
}

fn sorted_seeds(cfg: &ExperimentConfig) -> Vec<u64> {
    let mut seeds = cfg.seeds.clone();
    seeds.sort_unstable();
    seeds.dedup();
    seeds
}

/// One run per configured seed, in seed order.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>, CliError> {
    sorted_seeds(cfg)
        .par_iter()
        .map(|&s| run_one(cfg, s))
        .collect()
}

/// A sweep row: the run plus per-axis-value aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: &'static str,
    pub axis_value: f64,
    pub run: SimRow,
    pub data: Summary,
    pub queue: Summary,
    pub delay: Summary,
}

impl CsvRow for SweepRow {
    fn header() -> Vec<&'static str> {
        let mut h = vec!["axis", "axis_value"];
        h.extend(SimRow::header());
        h.extend([
            "mean_avg_data_per_task_bits",
            "sd_avg_data_per_task_bits",
            "mean_avg_queue_len",
            "sd_avg_queue_len",
            "mean_measured_delay_s",
            "sd_measured_delay_s",
        ]);
        h
    }

    fn fields(&self) -> Vec<String> {
        let mut f = vec![self.axis.to_owned(), num(self.axis_value)];
        f.extend(self.run.fields());
        for s in [&self.data, &self.queue, &self.delay] {
            f.push(if s.n > 0 { num(s.mean) } else { String::new() });
            f.push(if s.n > 0 { num(s.sd) } else { String::new() });
        }
        f
    }
}

/// Aggregates of one sweep point across seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub axis_value: f64,
    pub data: Summary,
    pub queue: Summary,
    pub delay: Summary,
    pub runs: Vec<RunRecord>,
}

/// Runs every (axis value, seed) pair; values ascending, then seeds.
pub fn sweep_points(cfg: &ExperimentConfig) -> Result<(SweepAxis, Vec<SweepPoint>), CliError> {
    let axis = cfg
        .sweep_axis
        .ok_or_else(|| CliError::invalid("sweep_axis", "sweep needs an axis"))?;
    if cfg.sweep_values.is_empty() {
        return Err(CliError::invalid(
            "sweep_values",
            "sweep needs at least one value",
        ));
    }
    let mut values = cfg.sweep_values.clone();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let seeds = sorted_seeds(cfg);
    let jobs: Vec<(f64, u64)> = values
        .iter()
        .flat_map(|&v| seeds.iter().map(move |&s| (v, s)))
        .collect();
    let runs: Vec<RunRecord> = jobs
        .par_iter()
        .map(|&(v, s)| run_one(&cfg.with_axis(axis, v)?, s))
        .collect::<Result<_, _>>()?;

    let points = values
        .iter()
        .zip(runs.chunks(seeds.len()))
        .map(|(&v, chunk)| SweepPoint {
            axis_value: v,
            data: Summary::of(chunk.iter().filter_map(|r| r.row.avg_data_per_task_bits)),
            queue: Summary::of(chunk.iter().map(|r| r.row.avg_queue_len)),
            delay: Summary::of(chunk.iter().filter_map(|r| r.row.measured_mean_delay_s)),
            runs: chunk.to_vec(),
        })
        .collect();
    Ok((axis, points))
}

/// Flattens [`sweep_points`] into CSV rows.
pub fn sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>, CliError> {
    let (axis, points) = sweep_points(cfg)?;
    Ok(points
        .into_iter()
        .flat_map(|p| {
            let SweepPoint {
                axis_value,
                data,
                queue,
                delay,
                runs,
            } = p;
            runs.into_iter().map(move |r| SweepRow {
                axis: axis.name(),
                axis_value,
                run: r.row,
                data,
                queue,
                delay,
            })
        })
        .collect())
}

/// Analytic summary of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    pub report: RegimeReport,
    pub slot_means: SlotMeans,
    /// `(V, 5/(2V))` for every configured V.
    pub gaps: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisRow {
    pub v_param: f64,
    pub gap_bits: f64,
    pub report: RegimeReport,
    pub slot_means: SlotMeans,
}

impl CsvRow for AnalysisRow {
    fn header() -> Vec<&'static str> {
        vec![
            "v_param",
            "lambda",
            "d_ct_bar_bits",
            "d_lt_bar_bits",
            "d_lc_bar_bits",
            "nl_bar",
            "nl_se",
            "nc_bar",
            "nc_se",
            "samples",
            "local_rate",
            "total_rate",
            "regime",
            "d_opt_bits",
            "gap_bound_bits",
        ]
    }

    fn fields(&self) -> Vec<String> {
        let (r, m) = (&self.report, &self.slot_means);
        vec![
            num(self.v_param),
            num(r.lambda),
            num(r.d_ct_bar),
            num(r.d_lt_bar),
            num(r.d_lc_bar),
            num(m.nl_bar),
            num(m.nl_se),
            num(m.nc_bar),
            num(m.nc_se),
            m.samples.to_string(),
            num(r.local_rate),
            num(r.total_rate),
            r.regime.name().to_owned(),
            opt(r.d_opt_bits),
            num(self.gap_bits),
        ]
    }
}

impl AnalysisReport {
    pub fn rows(&self) -> Vec<AnalysisRow> {
        self.gaps
            .iter()
            .map(|&(v, g)| AnalysisRow {
                v_param: v,
                gap_bits: g,
                report: self.report,
                slot_means: self.slot_means,
            })
            .collect()
    }

    pub fn human(&self) -> String {
        let (r, m) = (&self.report, &self.slot_means);
        let mut s = String::new();
        s += &format!("D_ct mean        {:.6e} bits\n", r.d_ct_bar);
        s += &format!("D_lt mean        {:.6e} bits\n", r.d_lt_bar);
        s += &format!(
            "N_l mean         {:.4} +/- {:.4} ({} samples)\n",
            m.nl_bar, m.nl_se, m.samples
        );
        s += &format!("N_c mean         {:.4} +/- {:.4}\n", m.nc_bar, m.nc_se);
        s += &format!(
            "1/N_l = {:.4}, 1/N_l + 1/N_c = {:.4}, lambda = {}\n",
            r.local_rate, r.total_rate, r.lambda
        );
        s += &format!("regime           {}\n", r.regime.name());
        match r.d_opt_bits {
            Some(d) => s += &format!("optimal data     {d:.6e} bits/task\n"),
            None => s += "optimal data     n/a (no policy is stable)\n",
        }
        for &(v, g) in &self.gaps {
            s += &format!("V = {v:e}: gap bound 5/(2V) = {g:.6e} bits\n");
        }
        s
    }
}

/// Closed-form report; V values come from a `v_param` sweep if configured.
pub fn analyze(cfg: &ExperimentConfig) -> Result<AnalysisReport, CliError> {
    let model = cfg.model()?;
    let seed = sorted_seeds(cfg)[0];
    let (report, slot_means) = analysis::regime_report(
        &model,
        cfg.k_range()?,
        cfg.lambda,
        cfg.analysis_samples,
        seed,
    )?;
    let vs = match cfg.sweep_axis {
        Some(SweepAxis::VParam) if !cfg.sweep_values.is_empty() => cfg.sweep_values.clone(),
        _ => vec![cfg.v_param],
    };
    let gaps = vs
        .into_iter()
        .map(|v| Ok((v, analysis::optimality_gap_bound(v)?)))
        .collect::<Result<_, CliError>>()?;
    Ok(AnalysisReport {
        report,
        slot_means,
        gaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;
    use crate::output::to_csv_string;
    use mecsched_core::analysis::Regime;

    fn small(extra: &str) -> ExperimentConfig {
        parse_config(
            &format!("horizon_slots = 4000\nseeds = [1, 2]\n{extra}"),
            &[],
        )
        .unwrap()
    }

    #[test]
    fn zero_arrivals_are_marked() {
        let rows = simulate(&small("lambda = 0")).unwrap();
        assert_eq!(rows.len(), 2);
        for r in &rows {
            assert_eq!(r.row.status, "zero_arrivals");
            assert_eq!(r.row.avg_data_per_task_bits, None);
            assert_eq!(r.row.arrivals, 0);
        }
        let csv = to_csv_string(&rows.into_iter().map(|r| r.row).collect::<Vec<_>>()).unwrap();
        assert!(csv.lines().nth(1).unwrap().ends_with(",0,0,,zero_arrivals"));
    }

    #[test]
    fn simulate_rows_follow_seed_order() {
        let cfg = parse_config("horizon_slots = 2000\nseeds = [9, 3, 5, 3]", &[]).unwrap();
        let rows = simulate(&cfg).unwrap();
        let seeds: Vec<u64> = rows.iter().map(|r| r.row.seed).collect();
        assert_eq!(seeds, [3, 5, 9]);
    }

    #[test]
    fn sweep_rows_and_aggregates() {
        let cfg = small("sweep_axis = \"rate_bps\"\nsweep_values = [1e9, 5e8]");
        let rows = sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].axis_value, 5e8);
        assert_eq!(rows[0].run.rate_bps, 5e8);
        assert_eq!(rows[3].axis_value, 1e9);
        assert_eq!(rows[0].data, rows[1].data);
        let csv = to_csv_string(&rows).unwrap();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.starts_with("axis,axis_value,seed,policy"));
    }

    #[test]
    fn sweep_needs_axis() {
        assert!(sweep(&small("")).is_err());
    }

    #[test]
    fn analyze_full_cache() {
        let cfg = small("cache_m = 1000\nk_min = 50\nanalysis_samples = 2000");
        let a = analyze(&cfg).unwrap();
        assert_eq!(a.report.d_lt_bar, 0.0);
        // nothing to send; 250..300 Mbit needs two 200 Mbit slots
        assert_eq!(a.slot_means.nl_bar, 2.0);
        assert_eq!(a.report.regime, Regime::LocalOnlyOptimal);
    }

    #[test]
    fn analyze_infeasible_and_zero_lambda() {
        let a = analyze(&small("lambda = 0.95\nanalysis_samples = 5000")).unwrap();
        assert!(a.report.total_rate < 0.95);
        assert_eq!(a.report.regime, Regime::Infeasible);
        assert!(a.human().contains("infeasible"));
        let e = analyze(&small("lambda = 0\nanalysis_samples = 100")).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn analyze_lists_each_v() {
        let cfg =
            small("sweep_axis = \"v_param\"\nsweep_values = [2.5, 5]\nanalysis_samples = 100");
        let a = analyze(&cfg).unwrap();
        assert_eq!(a.gaps, vec![(2.5, 1.0), (5.0, 0.5)]);
        assert_eq!(a.rows().len(), 2);
    }
}
