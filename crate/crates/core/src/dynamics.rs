//! Per-slot system dynamics: the FIFO task queue, the two busy counters and
//! the per-task transmission sizes and slot counts.

use alloc::collections::VecDeque;
use alloc::vec::Vec;
use core::fmt;

use crate::catalog::{CacheConfig, ContentCatalog};
use crate::error::{invalid, violation};
use crate::policy::feasible_actions;
use crate::workload::Task;
use crate::Result;

/// Radio and CPU parameters shared by every task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Slot length `Δ` in seconds.
    pub slot_seconds: f64,
    /// CPU cycles needed per bit (`W`).
    pub cycles_per_bit: f64,
    /// Device CPU frequency `f_l` in Hz.
    pub f_local_hz: f64,
    /// Server CPU frequency `f_c` in Hz.
    pub f_mec_hz: f64,
    /// Downlink throughput `R` in bits/s.
    pub rate_bps: f64,
}

impl SystemParams {
    /// All fields must be finite and strictly positive.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("slot_seconds", self.slot_seconds),
            ("cycles_per_bit", self.cycles_per_bit),
            ("f_local_hz", self.f_local_hz),
            ("f_mec_hz", self.f_mec_hz),
            ("rate_bps", self.rate_bps),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid!("{name} must be finite and > 0, got {v}"));
            }
        }
        Ok(())
    }
}

// Relative slack applied before the ceiling so that sums which are integral
// in exact arithmetic are not pushed up a whole slot by rounding noise.
const CEIL_SLACK: f64 = 1e-12;

/// `⌈compute·W/(f·Δ) + tx/(R·Δ)⌉`, at least 1.
pub fn slot_count(compute_bits: f64, tx_bits: f64, cpu_hz: f64, params: &SystemParams) -> u32 {
    let x = compute_bits * params.cycles_per_bit / (cpu_hz * params.slot_seconds)
        + tx_bits / (params.rate_bps * params.slot_seconds);
    let n = libm::ceil(x * (1.0 - CEIL_SLACK));
    if n < 1.0 {
        1
    } else if n >= u32::MAX as f64 {
        u32::MAX
    } else {
        n as u32
    }
}

/// Number of distinct contents of `task` that are not cached.
pub fn uncached_distinct_count(task: &Task, cache: &CacheConfig) -> u32 {
    let mut missing: Vec<u32> = task
        .contents
        .iter()
        .copied()
        .filter(|&c| !cache.holds(c))
        .collect();
    missing.sort_unstable();
    missing.dedup();
    missing.len() as u32
}

/// `D_lt`: bits sent in local mode, one copy of each distinct uncached content.
pub fn uncached_distinct_bits(task: &Task, cache: &CacheConfig, catalog: &ContentCatalog) -> f64 {
    uncached_distinct_count(task, cache) as f64 * catalog.size_bits()
}

/// `D_ct`: bits sent in MEC mode, the whole assembled task.
pub fn mec_bits(task: &Task, catalog: &ContentCatalog) -> f64 {
    task.total_bits(catalog)
}

/// `N_c`: slots to compute and ship `task` from the server.
pub fn slots_mec(task: &Task, catalog: &ContentCatalog, params: &SystemParams) -> u32 {
    let d = task.total_bits(catalog);
    slot_count(d, d, params.f_mec_hz, params)
}

/// `N_l`: slots to ship the missing contents and assemble `task` on the device.
pub fn slots_local(
    task: &Task,
    cache: &CacheConfig,
    catalog: &ContentCatalog,
    params: &SystemParams,
) -> u32 {
    let d = task.total_bits(catalog);
    slot_count(
        d,
        uncached_distinct_bits(task, cache, catalog),
        params.f_local_hz,
        params,
    )
}

/// Catalog, cache and system parameters of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    /// Content catalog.
    pub catalog: ContentCatalog,
    /// Device cache.
    pub cache: CacheConfig,
    /// Radio and CPU parameters.
    pub params: SystemParams,
}

impl Model {
    /// Validates the parameters and bundles the three parts.
    pub fn new(catalog: ContentCatalog, cache: CacheConfig, params: SystemParams) -> Result<Self> {
        params.validate()?;
        if cache.capacity() > catalog.n_contents() {
            return Err(invalid!("cache larger than catalog"));
        }
        Ok(Self {
            catalog,
            cache,
            params,
        })
    }

    /// Precomputes the quantities the scheduler and the state machine need.
    pub fn profile(&self, task: &Task) -> TaskProfile {
        let k = task.k() as u32;
        let uncached = uncached_distinct_count(task, &self.cache);
        let tau = self.catalog.size_bits();
        let total_bits = tau * k as f64;
        let uncached_bits = tau * uncached as f64;
        TaskProfile {
            k,
            uncached_distinct: uncached,
            total_bits,
            uncached_bits,
            slots_local: slot_count(
                total_bits,
                uncached_bits,
                self.params.f_local_hz,
                &self.params,
            ),
            slots_mec: slot_count(total_bits, total_bits, self.params.f_mec_hz, &self.params),
        }
    }

    /// Wraps a task with its profile for queueing.
    pub fn job(&self, task: Task) -> Job {
        let profile = self.profile(&task);
        Job { task, profile }
    }
}

/// Derived per-task sizes and slot counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskProfile {
    /// `K_t`.
    pub k: u32,
    /// Distinct uncached contents.
    pub uncached_distinct: u32,
    /// `D = D_ct = D_lc`, bits.
    pub total_bits: f64,
    /// `D_lt`, bits.
    pub uncached_bits: f64,
    /// `N_l`.
    pub slots_local: u32,
    /// `N_c`.
    pub slots_mec: u32,
}

impl TaskProfile {
    /// Bits transmitted if the task runs in `mode`.
    pub fn tx_bits(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Local => self.uncached_bits,
            Mode::Mec => self.total_bits,
        }
    }

    /// Contents transmitted if the task runs in `mode`.
    pub fn tx_contents(&self, mode: Mode) -> u32 {
        match mode {
            Mode::Local => self.uncached_distinct,
            Mode::Mec => self.k,
        }
    }

    /// Slots the task occupies its processor in `mode`.
    pub fn slots(&self, mode: Mode) -> u32 {
        match mode {
            Mode::Local => self.slots_local,
            Mode::Mec => self.slots_mec,
        }
    }
}

/// A queued task plus its profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    /// The task.
    pub task: Task,
    /// Its derived quantities.
    pub profile: TaskProfile,
}

/// Where a task is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Assembled on the device from cached and received contents.
    Local,
    /// Assembled on the server and shipped whole.
    Mec,
}

/// One of the five scheduling tuples `(u_l¹, u_l², u_c¹, u_c²)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    /// `(0,0,0,0)`
    Idle,
    /// `(1,0,0,0)`: head task to the device.
    HeadLocal,
    /// `(0,0,1,0)`: head task to the server.
    HeadMec,
    /// `(1,0,0,1)`: head to the device, second task to the server.
    HeadLocalNextMec,
    /// `(0,1,1,0)`: head to the server, second task to the device.
    HeadMecNextLocal,
}

impl Action {
    /// All actions in the order `(0,0,0,0), (1,0,0,0), (0,0,1,0), (1,0,0,1), (0,1,1,0)`.
    pub const ALL: [Action; 5] = [
        Action::Idle,
        Action::HeadLocal,
        Action::HeadMec,
        Action::HeadLocalNextMec,
        Action::HeadMecNextLocal,
    ];

    /// The `(u_l¹, u_l², u_c¹, u_c²)` tuple.
    pub const fn tuple(self) -> [u8; 4] {
        match self {
            Action::Idle => [0, 0, 0, 0],
            Action::HeadLocal => [1, 0, 0, 0],
            Action::HeadMec => [0, 0, 1, 0],
            Action::HeadLocalNextMec => [1, 0, 0, 1],
            Action::HeadMecNextLocal => [0, 1, 1, 0],
        }
    }

    /// Inverse of [`Action::tuple`]; `None` for the eleven invalid tuples.
    pub fn from_tuple(t: [u8; 4]) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.tuple() == t)
    }

    /// `U(t)`, the number of tasks scheduled.
    pub const fn scheduled(self) -> u32 {
        match self {
            Action::Idle => 0,
            Action::HeadLocal | Action::HeadMec => 1,
            Action::HeadLocalNextMec | Action::HeadMecNextLocal => 2,
        }
    }

    /// Queue position (0 = head) sent to the device, if any.
    pub const fn local_slot(self) -> Option<usize> {
        match self {
            Action::HeadLocal | Action::HeadLocalNextMec => Some(0),
            Action::HeadMecNextLocal => Some(1),
            _ => None,
        }
    }

    /// Queue position (0 = head) sent to the server, if any.
    pub const fn mec_slot(self) -> Option<usize> {
        match self {
            Action::HeadMec | Action::HeadMecNextLocal => Some(0),
            Action::HeadLocalNextMec => Some(1),
            _ => None,
        }
    }

    /// Mode assigned to the task at queue position `pos`.
    pub fn mode_of(self, pos: usize) -> Option<Mode> {
        if self.local_slot() == Some(pos) {
            Some(Mode::Local)
        } else if self.mec_slot() == Some(pos) {
            Some(Mode::Mec)
        } else {
            None
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.tuple();
        write!(f, "({a},{b},{c},{d})")
    }
}

/// A task occupying a processor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InService {
    /// Task id.
    pub task_id: u64,
    /// Arrival slot of the task.
    pub arrival_slot: u64,
    /// Processor it runs on.
    pub mode: Mode,
    /// Slot at whose end the task completes.
    pub completion_slot: u64,
}

impl InService {
    /// Delay in slots, counting both the arrival and completion slots.
    pub fn delay_slots(&self) -> u64 {
        self.completion_slot - self.arrival_slot + 1
    }
}

/// Queue and processor state at a slot boundary.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SystemState {
    queue: VecDeque<Job>,
    s_local: u32,
    s_mec: u32,
    in_service_local: Option<InService>,
    in_service_mec: Option<InService>,
}

/// What happened during one slot.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepOutcome {
    /// `U(t)`.
    pub scheduled: u32,
    /// `A(t)`.
    pub arrived: bool,
    /// Contents transmitted by the tasks scheduled this slot.
    pub tx_contents: u64,
    /// Bits transmitted by the tasks scheduled this slot.
    pub tx_bits: f64,
    /// Tasks that finished at the end of this slot.
    pub completions: Vec<InService>,
}

impl SystemState {
    /// Empty queue, both processors idle.
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a state directly; the busy counters must agree with the records.
    pub fn from_parts(
        queue: impl IntoIterator<Item = Job>,
        s_local: u32,
        s_mec: u32,
        in_service_local: Option<InService>,
        in_service_mec: Option<InService>,
    ) -> Result<Self> {
        if (s_local == 0) != in_service_local.is_none() || (s_mec == 0) != in_service_mec.is_none()
        {
            return Err(violation!("busy counter and in-service record disagree"));
        }
        Ok(Self {
            queue: queue.into_iter().collect(),
            s_local,
            s_mec,
            in_service_local,
            in_service_mec,
        })
    }

    /// `Q(t)`.
    pub fn q_len(&self) -> usize {
        self.queue.len()
    }

    /// `S_l(t)`.
    pub fn s_local(&self) -> u32 {
        self.s_local
    }

    /// `S_c(t)`.
    pub fn s_mec(&self) -> u32 {
        self.s_mec
    }

    /// Queued jobs, head first.
    pub fn queue(&self) -> &VecDeque<Job> {
        &self.queue
    }

    /// Task on the device, if any.
    pub fn in_service_local(&self) -> Option<&InService> {
        self.in_service_local.as_ref()
    }

    /// Task on the server, if any.
    pub fn in_service_mec(&self) -> Option<&InService> {
        self.in_service_mec.as_ref()
    }

    /// Number of tasks currently on a processor.
    pub fn in_service_count(&self) -> usize {
        self.in_service_local.is_some() as usize + self.in_service_mec.is_some() as usize
    }

    /// Profile of the task at queue position `pos`.
    pub fn peek(&self, pos: usize) -> Option<&TaskProfile> {
        self.queue.get(pos).map(|j| &j.profile)
    }

    /// Applies `action` in slot `slot`, then enqueues `arrival`.
    ///
    /// Busy counters are set to `N − 1` for a newly assigned task and
    /// decremented (floored at 0) otherwise. A task assigned at `slot` with
    /// `N` slots completes at the end of `slot + N − 1`.
    pub fn step(&mut self, action: Action, arrival: Option<Job>, slot: u64) -> Result<StepOutcome> {
        let q = self.queue.len();
        if action.scheduled() as usize > q {
            return Err(violation!(
                "{action} schedules {} tasks but queue holds {q}",
                action.scheduled()
            ));
        }
        if !feasible_actions(self.s_local, self.s_mec, q).contains(&action) {
            return Err(violation!(
                "{action} infeasible for S_l={} S_c={} Q={q}",
                self.s_local,
                self.s_mec
            ));
        }

        let mut out = StepOutcome {
            scheduled: action.scheduled(),
            arrived: arrival.is_some(),
            ..StepOutcome::default()
        };
        let mut local_job = None;
        let mut mec_job = None;
        for pos in 0..action.scheduled() as usize {
            let job = self.queue.pop_front().expect("length checked");
            match action.mode_of(pos) {
                Some(Mode::Local) => local_job = Some(job),
                Some(Mode::Mec) => mec_job = Some(job),
                None => unreachable!("scheduled positions always carry a mode"),
            }
        }

        for (mode, job) in [(Mode::Local, local_job), (Mode::Mec, mec_job)] {
            let (counter, record) = match mode {
                Mode::Local => (&mut self.s_local, &mut self.in_service_local),
                Mode::Mec => (&mut self.s_mec, &mut self.in_service_mec),
            };
            match job {
                Some(job) => {
                    let n = job.profile.slots(mode);
                    *counter = n - 1;
                    *record = Some(InService {
                        task_id: job.task.id,
                        arrival_slot: job.task.arrival_slot,
                        mode,
                        completion_slot: slot + n as u64 - 1,
                    });
                    out.tx_contents += job.profile.tx_contents(mode) as u64;
                    out.tx_bits += job.profile.tx_bits(mode);
                }
                None => *counter = counter.saturating_sub(1),
            }
            if let Some(r) = *record {
                if r.completion_slot == slot {
                    out.completions.push(r);
                    *record = None;
                }
            }
            debug_assert_eq!(*counter == 0, record.is_none());
        }

        if let Some(job) = arrival {
            self.queue.push_back(job);
        }
        Ok(out)
    }
}
