//! Feasible scheduling actions and the three scheduling policies.
//!
//! The drift-plus-penalty policy minimises `−Q·U + V·D` over the feasible
//! actions by enumeration, where `D` is the number of bits the chosen action
//! transmits. `V` is therefore expressed in units of 1/bit.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::dynamics::{Action, Mode, SystemState, TaskProfile};
use crate::error::{invalid, violation};
use crate::Result;

/// Which scheduler to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    /// Drift-plus-penalty minimisation.
    Lyapunov,
    /// Every task on the server.
    MecOnly,
    /// Every task on the device.
    LocalOnly,
}

impl PolicyKind {
    /// Lower-case name used in configs and CSV output.
    pub const fn name(self) -> &'static str {
        match self {
            PolicyKind::Lyapunov => "lyapunov",
            PolicyKind::MecOnly => "mec_only",
            PolicyKind::LocalOnly => "local_only",
        }
    }

    /// Parses [`PolicyKind::name`].
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "lyapunov" => Some(PolicyKind::Lyapunov),
            "mec_only" => Some(PolicyKind::MecOnly),
            "local_only" => Some(PolicyKind::LocalOnly),
            _ => None,
        }
    }
}

/// Scheduler choice plus the penalty weight `V` (1/bit).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicySpec {
    /// Scheduler.
    pub kind: PolicyKind,
    /// Penalty weight, ignored by the baselines.
    pub v_param: f64,
}

impl PolicySpec {
    /// Fails if `v_param` is negative or not finite.
    pub fn new(kind: PolicyKind, v_param: f64) -> Result<Self> {
        if !(v_param >= 0.0 && v_param.is_finite()) {
            return Err(invalid!("V must be finite and >= 0, got {v_param}"));
        }
        Ok(Self { kind, v_param })
    }

    /// Drift-plus-penalty with weight `v_param`.
    pub fn lyapunov(v_param: f64) -> Result<Self> {
        Self::new(PolicyKind::Lyapunov, v_param)
    }

    /// The server-only baseline.
    pub fn mec_only() -> Self {
        Self {
            kind: PolicyKind::MecOnly,
            v_param: 0.0,
        }
    }

    /// The device-only baseline.
    pub fn local_only() -> Self {
        Self {
            kind: PolicyKind::LocalOnly,
            v_param: 0.0,
        }
    }
}

/// Actions allowed for busy counters `s_local`, `s_mec` and queue length `q`.
pub fn feasible_actions(s_local: u32, s_mec: u32, q: usize) -> &'static [Action] {
    use Action::*;
    const CASE1_MANY: [Action; 5] = [Idle, HeadMec, HeadLocal, HeadLocalNextMec, HeadMecNextLocal];
    const CASE1_ONE: [Action; 3] = [Idle, HeadMec, HeadLocal];
    const CASE2: [Action; 2] = [Idle, HeadMec];
    const CASE3: [Action; 2] = [Idle, HeadLocal];
    const CASE4: [Action; 1] = [Idle];
    match (s_local == 0, s_mec == 0, q) {
        (_, _, 0) | (false, false, _) => &CASE4,
        (true, true, 1) => &CASE1_ONE,
        (true, true, _) => &CASE1_MANY,
        (false, true, _) => &CASE2,
        (true, false, _) => &CASE3,
    }
}

/// Bits `action` would transmit given the first two queued tasks.
pub fn action_bits(
    action: Action,
    first: Option<&TaskProfile>,
    second: Option<&TaskProfile>,
) -> Result<f64> {
    let mut bits = 0.0;
    for (pos, task) in [first, second].into_iter().enumerate() {
        if let Some(mode) = action.mode_of(pos) {
            let task =
                task.ok_or_else(|| violation!("{action} needs a task at queue position {pos}"))?;
            bits += task.tx_bits(mode);
        }
    }
    Ok(bits)
}

/// Per-slot objective `−q·U + v·D` for `action`.
pub fn action_cost(
    action: Action,
    first: Option<&TaskProfile>,
    second: Option<&TaskProfile>,
    q_len: usize,
    v: f64,
) -> Result<f64> {
    let bits = action_bits(action, first, second)?;
    Ok(-(q_len as f64) * action.scheduled() as f64 + v * bits)
}

/// Chooses the action for the current state.
pub fn decide(policy: &PolicySpec, state: &SystemState) -> Action {
    let q = state.q_len();
    let feasible = feasible_actions(state.s_local(), state.s_mec(), q);
    match policy.kind {
        PolicyKind::MecOnly => pick_if_feasible(Action::HeadMec, feasible),
        PolicyKind::LocalOnly => pick_if_feasible(Action::HeadLocal, feasible),
        PolicyKind::Lyapunov => {
            let (first, second) = (state.peek(0), state.peek(1));
            let ranked = feasible.iter().map(|&a| {
                let bits = action_bits(a, first, second).expect("feasible actions fit the queue");
                let cost = -(q as f64) * a.scheduled() as f64 + policy.v_param * bits;
                (a, cost, bits)
            });
            argmin(ranked).unwrap_or(Action::Idle)
        }
    }
}

/// Minimum-cost action among `(action, cost, bits)` candidates.
pub(crate) fn argmin(candidates: impl Iterator<Item = (Action, f64, f64)>) -> Option<Action> {
    candidates.min_by(tie_break).map(|(a, _, _)| a)
}

fn pick_if_feasible(a: Action, feasible: &[Action]) -> Action {
    if feasible.contains(&a) {
        a
    } else {
        Action::Idle
    }
}

// Lowest cost, then larger U, then fewer bits, then head on the device,
// then the canonical tuple order.
fn tie_break(x: &(Action, f64, f64), y: &(Action, f64, f64)) -> Ordering {
    let head_rank = |a: Action| match a.mode_of(0) {
        Some(Mode::Local) => 0,
        Some(Mode::Mec) => 1,
        None => 2,
    };
    let order = |a: Action| Action::ALL.iter().position(|&b| b == a);
    x.1.total_cmp(&y.1)
        .then_with(|| y.0.scheduled().cmp(&x.0.scheduled()))
        .then_with(|| x.2.total_cmp(&y.2))
        .then_with(|| head_rank(x.0).cmp(&head_rank(y.0)))
        .then_with(|| order(x.0).cmp(&order(y.0)))
}

/// Costs of every feasible action, in feasible-set order. Diagnostic helper.
pub fn feasible_costs(policy: &PolicySpec, state: &SystemState) -> Vec<(Action, f64)> {
    let q = state.q_len();
    feasible_actions(state.s_local(), state.s_mec(), q)
        .iter()
        .map(|&a| {
            let c = action_cost(a, state.peek(0), state.peek(1), q, policy.v_param)
                .expect("feasible actions fit the queue");
            (a, c)
        })
        .collect()
}
