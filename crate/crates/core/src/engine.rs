//! The slotted simulation loop and its metrics.
//!
//! Every slot: observe `(Q, S_l, S_c)`, decide, apply the action, enqueue the
//! slot's arrival, record. `Q(t)` is sampled before the decision.

use alloc::vec::Vec;

use crate::dynamics::{Model, SystemState};
use crate::error::invalid;
use crate::policy::{decide, PolicySpec};
use crate::workload::{Workload, WorkloadConfig};
use crate::{Error, Result};

/// Run length and measurement settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    /// Scheduler.
    pub policy: PolicySpec,
    /// Number of slots `T`.
    pub horizon: u64,
    /// Leading fraction of slots excluded from the windowed metrics.
    pub warmup_frac: f64,
    /// Number of equal windows the queue trace is averaged over (capped at
    /// the horizon).
    pub windows: usize,
    /// Record every `stride`-th `Q(t)` when set.
    pub queue_series_stride: Option<u64>,
}

impl RunConfig {
    /// Ten windows, 10% warm-up, no queue trace.
    pub fn new(policy: PolicySpec, horizon: u64) -> Self {
        Self {
            policy,
            horizon,
            warmup_frac: 0.1,
            windows: 10,
            queue_series_stride: None,
        }
    }

    /// Sets the warm-up fraction.
    pub fn with_warmup(mut self, frac: f64) -> Self {
        self.warmup_frac = frac;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least one slot".into()));
        }
        if !(0.0..1.0).contains(&self.warmup_frac) {
            return Err(Error::Config(alloc::format!(
                "warm-up fraction must lie in [0, 1), got {}",
                self.warmup_frac
            )));
        }
        if self.windows == 0 {
            return Err(Error::Config("window count must be positive".into()));
        }
        if self.queue_series_stride == Some(0) {
            return Err(Error::Config("queue series stride must be positive".into()));
        }
        Ok(())
    }

    /// First slot counted by the windowed metrics.
    pub fn warmup_slots(&self) -> u64 {
        libm::floor(self.horizon as f64 * self.warmup_frac) as u64
    }
}

/// Totals over the post-warm-up part of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Window {
    /// Slots counted.
    pub slots: u64,
    /// Arrivals in those slots.
    pub arrivals: u64,
    /// Tasks handed to a processor in those slots.
    pub scheduled: u64,
    /// Contents transmitted by decisions in those slots.
    pub tx_contents: u64,
    /// `Σ Q(t)` over those slots.
    pub queue_len_sum: u64,
}

/// Delay record of one completed task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskDelay {
    /// Arrival slot.
    pub arrival_slot: u64,
    /// Slots from arrival to completion, both inclusive.
    pub delay_slots: u64,
}

/// Everything a run records.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    /// `T`.
    pub horizon_slots: u64,
    /// First measured slot.
    pub warmup_slots: u64,
    /// Bits per content, for converting content counts to bits.
    pub content_bits: f64,
    /// Total arrivals.
    pub arrivals: u64,
    /// Total completions.
    pub completions: u64,
    /// Total contents transmitted.
    pub tx_contents: u64,
    /// `Σ Q(t)` over the whole run.
    pub queue_len_sum: u64,
    /// Post-warm-up totals.
    pub measured: Window,
    /// Mean `Q(t)` over each of the equal windows.
    pub queue_window_means: Vec<f64>,
    /// Sampled `Q(t)` trace, if requested.
    pub queue_len_series: Option<Vec<u32>>,
    /// Completed-task delays.
    pub delays: Vec<TaskDelay>,
    /// `Q(T)`.
    pub final_queue_len: u64,
    /// Tasks still on a processor at the end.
    pub final_in_service: u64,
    /// Largest `Q(t)` seen.
    pub max_queue_len: u64,
    /// Slots whose transition broke `Q'² ≤ Q² + U² + A² − 2Q(U − A)`.
    pub drift_violations: u64,
    /// True when the windowed queue means increase strictly throughout.
    pub infeasibility_flag: bool,
}

impl RunMetrics {
    /// Total transmitted bits over the whole run.
    pub fn total_tx_bits(&self) -> f64 {
        self.tx_contents as f64 * self.content_bits
    }

    /// Post-warm-up transmitted bits per task scheduled after warm-up.
    ///
    /// Matches bits per arrival whenever the queue stays bounded; when it
    /// does not, tasks stuck in the queue would otherwise count as sending
    /// nothing. Zero if arrivals occurred but nothing was scheduled.
    pub fn avg_data_per_task(&self) -> Result<f64> {
        if self.measured.arrivals == 0 {
            return Err(Error::UndefinedMetric(
                "average data per task with zero arrivals",
            ));
        }
        if self.measured.scheduled == 0 {
            return Ok(0.0);
        }
        Ok(self.measured.tx_contents as f64 * self.content_bits / self.measured.scheduled as f64)
    }

    /// Post-warm-up transmitted bits per post-warm-up arrival.
    pub fn avg_data_per_arrival(&self) -> Result<f64> {
        if self.measured.arrivals == 0 {
            return Err(Error::UndefinedMetric(
                "average data per arrival with zero arrivals",
            ));
        }
        Ok(self.measured.tx_contents as f64 * self.content_bits / self.measured.arrivals as f64)
    }

    /// Post-warm-up mean of `Q(t)`.
    pub fn avg_queue_length(&self) -> f64 {
        if self.measured.slots == 0 {
            0.0
        } else {
            self.measured.queue_len_sum as f64 / self.measured.slots as f64
        }
    }

    /// Waiting time from Little's law, `avg Q / λ · Δ` seconds.
    pub fn little_delay(&self, arrival_prob: f64, slot_seconds: f64) -> Result<f64> {
        little_delay(self.avg_queue_length(), arrival_prob, slot_seconds)
    }

    /// Mean delay in slots of tasks that arrived after the warm-up.
    pub fn mean_delay_slots(&self) -> Option<f64> {
        let (mut n, mut sum) = (0u64, 0u64);
        for d in self
            .delays
            .iter()
            .filter(|d| d.arrival_slot >= self.warmup_slots)
        {
            n += 1;
            sum += d.delay_slots;
        }
        (n > 0).then(|| sum as f64 / n as f64)
    }

    /// Tasks that have arrived but not completed.
    pub fn outstanding(&self) -> u64 {
        self.final_queue_len + self.final_in_service
    }

    /// Mean `Q(t)` over the last window.
    pub fn final_window_mean(&self) -> f64 {
        self.queue_window_means.last().copied().unwrap_or(0.0)
    }

    /// Mean `Q(t)` over the whole run.
    pub fn overall_queue_mean(&self) -> f64 {
        self.queue_len_sum as f64 / self.horizon_slots as f64
    }
}

/// `avg_q / λ · Δ`; undefined for `λ = 0`.
pub fn little_delay(avg_queue_len: f64, arrival_prob: f64, slot_seconds: f64) -> Result<f64> {
    if arrival_prob <= 0.0 {
        return Err(Error::UndefinedMetric(
            "Little's-law delay with zero arrival rate",
        ));
    }
    Ok(avg_queue_len / arrival_prob * slot_seconds)
}

/// Integer check of `Q(t+1)² ≤ Q(t)² + U² + A² − 2Q(t)(U − A)`.
pub fn drift_bound_holds(q: u64, u: u32, a: bool, q_next: u64) -> bool {
    let (q, u, a, qn) = (q as i128, u as i128, a as i128, q_next as i128);
    qn * qn <= q * q + u * u + a * a - 2 * q * (u - a)
}

/// Runs `run.horizon` slots of `model` under `workload` and `run.policy`.
pub fn run_simulation(
    model: &Model,
    workload: WorkloadConfig,
    run: &RunConfig,
) -> Result<RunMetrics> {
    run.validate()?;
    workload.validate()?;
    let worst_task_bits = workload.k.max() as f64 * model.catalog.size_bits();
    if !worst_task_bits.is_finite() {
        return Err(Error::Config(alloc::format!(
            "k_max * tau overflows data accounting ({} * {})",
            workload.k.max(),
            model.catalog.size_bits()
        )));
    }
    if run.policy.v_param.is_nan() || run.policy.v_param < 0.0 {
        return Err(invalid!("V must be >= 0"));
    }

    let mut gen = Workload::new(workload)?;
    let mut state = SystemState::new();
    let warmup = run.warmup_slots();
    let horizon = run.horizon;
    let n_windows = (run.windows as u64).min(horizon);
    let mut window_sums = alloc::vec![0u64; n_windows as usize];
    let mut series = run.queue_series_stride.map(|_| Vec::new());

    let mut m = RunMetrics {
        horizon_slots: horizon,
        warmup_slots: warmup,
        content_bits: model.catalog.size_bits(),
        arrivals: 0,
        completions: 0,
        tx_contents: 0,
        queue_len_sum: 0,
        measured: Window::default(),
        queue_window_means: Vec::new(),
        queue_len_series: None,
        delays: Vec::new(),
        final_queue_len: 0,
        final_in_service: 0,
        max_queue_len: 0,
        drift_violations: 0,
        infeasibility_flag: false,
    };

    for t in 0..horizon {
        let q = state.q_len() as u64;
        m.queue_len_sum += q;
        m.max_queue_len = m.max_queue_len.max(q);
        window_sums[(t as u128 * n_windows as u128 / horizon as u128) as usize] += q;
        if let (Some(s), Some(stride)) = (series.as_mut(), run.queue_series_stride) {
            if t % stride == 0 {
                s.push(q.min(u32::MAX as u64) as u32);
            }
        }

        let action = decide(&run.policy, &state);
        let arrival = gen
            .next_arrival(&model.catalog, t)
            .map(|task| model.job(task));
        let out = state.step(action, arrival, t)?;

        let q_next = state.q_len() as u64;
        if !drift_bound_holds(q, out.scheduled, out.arrived, q_next) {
            m.drift_violations += 1;
        }
        m.arrivals += out.arrived as u64;
        m.tx_contents += out.tx_contents;
        m.completions += out.completions.len() as u64;
        m.delays.extend(out.completions.iter().map(|c| TaskDelay {
            arrival_slot: c.arrival_slot,
            delay_slots: c.delay_slots(),
        }));
        if t >= warmup {
            m.measured.slots += 1;
            m.measured.arrivals += out.arrived as u64;
            m.measured.scheduled += out.scheduled as u64;
            m.measured.tx_contents += out.tx_contents;
            m.measured.queue_len_sum += q;
        }
    }

    m.final_queue_len = state.q_len() as u64;
    m.final_in_service = state.in_service_count() as u64;
    debug_assert_eq!(m.arrivals, m.completions + m.outstanding());
    m.queue_window_means = window_sums
        .iter()
        .enumerate()
        .map(|(w, &sum)| {
            let lo = (w as u128 * horizon as u128).div_ceil(n_windows as u128);
            let hi = ((w as u128 + 1) * horizon as u128).div_ceil(n_windows as u128);
            sum as f64 / (hi - lo) as f64
        })
        .collect();
    m.infeasibility_flag =
        m.queue_window_means.len() > 1 && m.queue_window_means.windows(2).all(|w| w[1] > w[0]);
    m.queue_len_series = series;
    Ok(m)
}
