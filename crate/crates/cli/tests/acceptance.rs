//! Acceptance suite. Each test checks one criterion and prints a single
//! `[PASS]` / `[FAIL]` line straight to stdout so it survives output capture.

use std::io::Write;
use std::process::Command;
use std::time::Instant;

use mecsched::experiment::{run_one, simulate, sweep_points, RunRecord, SweepPoint};
use mecsched::frontier::{frontier, mean_delay_at, FrontierStatus};
use mecsched::{parse_config, ExperimentConfig};
use mecsched_core::analysis::{
    classify_regime, estimate_slot_means, expected_dlt, optimality_gap_bound, Regime,
};
use mecsched_core::dynamics::{uncached_distinct_bits, Action, InService, Mode};
use mecsched_core::policy::{decide, feasible_actions, PolicySpec};
use mecsched_core::{SystemState, Workload, WorkloadConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, ok: bool, detail: &str) {
    let tag = if ok { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "[{tag}] criterion {id}: {detail}").unwrap();
}

fn defaults(overrides: &[&str]) -> ExperimentConfig {
    let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    parse_config("", &o).unwrap()
}

fn data(r: &RunRecord) -> f64 {
    r.row
        .avg_data_per_task_bits
        .expect("arrivals in every acceptance run")
}

fn no_drift_violations<'a>(runs: impl IntoIterator<Item = &'a RunRecord>) {
    for r in runs {
        assert_eq!(r.metrics.drift_violations, 0, "seed {}", r.row.seed);
    }
}

fn points_runs(points: &[SweepPoint]) -> impl Iterator<Item = &RunRecord> {
    points.iter().flat_map(|p| p.runs.iter())
}

#[test]
fn c01_mec_only_sends_whole_task() {
    let start = Instant::now();
    let cfg = defaults(&[
        "policy=mec_only",
        "seeds=[1,2,3,4,5]",
        "horizon_slots=100000",
    ]);
    let runs = simulate(&cfg).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    no_drift_violations(&runs);
    let mean = runs.iter().map(data).sum::<f64>() / runs.len() as f64;
    let rel = (mean - 250e6).abs() / 250e6;
    let ok = rel <= 0.01 && elapsed < 60.0;
    report(
        1,
        ok,
        &format!(
            "mec_only mean {:.4} Mbit (rel err {:.3}%), {elapsed:.1} s",
            mean / 1e6,
            rel * 100.0
        ),
    );
    assert!(ok);
}

#[test]
fn c02_closed_form_uncached_data_matches_sampling() {
    let mut worst: f64 = 0.0;
    let mut lines = vec![];
    for m in [0usize, 50, 200] {
        let cfg = defaults(&[&format!("cache_m={m}")]);
        let model = cfg.model().unwrap();
        let k = cfg.k_range().unwrap();
        let exact = expected_dlt(cfg.tau_bits, model.catalog.popularity(), m, &k).unwrap();
        let mut gen = Workload::new(WorkloadConfig {
            arrival_prob: 1.0,
            k,
            seed: 7 + m as u64,
        })
        .unwrap();
        let n = 100_000;
        let mc = (0..n)
            .map(|t| {
                let task = gen.sample_task(&model.catalog, t);
                uncached_distinct_bits(&task, &model.cache, &model.catalog)
            })
            .sum::<f64>()
            / n as f64;
        let rel = (mc - exact).abs() / exact;
        worst = worst.max(rel);
        lines.push(format!("M={m}: {:.3} vs {:.3} Mbit", exact / 1e6, mc / 1e6));
    }
    let ok = worst <= 0.005;
    report(
        2,
        ok,
        &format!("{}; worst rel err {:.3}%", lines.join(", "), worst * 100.0),
    );
    assert!(ok);
}

#[test]
fn c03_cache_size_trend() {
    let cfg = defaults(&[
        "sweep_axis=cache_m",
        "sweep_values=[0,10,20,30,40,50,60,70,80,90,100]",
        "seeds=[1,2,3,4,5]",
    ]);
    let (_, points) = sweep_points(&cfg).unwrap();
    no_drift_violations(points_runs(&points));
    let baseline = 250e6;
    let mut ok = true;
    for w in points.windows(2) {
        let sigma = (w[0].data.se().powi(2) + w[1].data.se().powi(2)).sqrt();
        if w[1].data.mean > w[0].data.mean + sigma {
            ok = false;
        }
    }
    let above = points.iter().filter(|p| p.data.mean > baseline).count();
    ok &= above == 0;
    let series: Vec<String> = points
        .iter()
        .map(|p| format!("{:.1}", p.data.mean / 1e6))
        .collect();
    report(
        3,
        ok,
        &format!(
            "lyapunov data vs M (Mbit): [{}]; points above mec_only: {above}",
            series.join(", ")
        ),
    );
    assert!(ok);
}

#[test]
fn c04_local_cpu_trend() {
    let values = [1e9, 2e9, 3e9, 5e9, 1e10];
    let cfg = defaults(&[
        "sweep_axis=f_local_hz",
        "sweep_values=[1e9,2e9,3e9,5e9,1e10]",
        "seeds=[1,2,3,4,5]",
    ]);
    let (_, points) = sweep_points(&cfg).unwrap();
    no_drift_violations(points_runs(&points));
    let monotone = points.windows(2).all(|w| w[1].data.mean <= w[0].data.mean);

    // largest swept f_l whose local service rate covers the arrival rate
    let mut chosen = None;
    for (i, &f) in values.iter().enumerate() {
        let c = cfg.with_axis(cfg.sweep_axis.unwrap(), f).unwrap();
        let means =
            estimate_slot_means(&c.model().unwrap(), c.k_range().unwrap(), 100_000, 11).unwrap();
        if 1.0 / means.nl_bar >= c.lambda {
            chosen = Some((i, f));
        }
    }
    let (i, f) = chosen.expect("some swept f_l serves the load locally");
    let model = cfg.model().unwrap();
    let exact = expected_dlt(
        cfg.tau_bits,
        model.catalog.popularity(),
        cfg.cache_m,
        &cfg.k_range().unwrap(),
    )
    .unwrap();
    let rel = (points[i].data.mean - exact).abs() / exact;
    let ok = monotone && rel <= 0.02;
    let series: Vec<String> = points
        .iter()
        .map(|p| format!("{:.1}", p.data.mean / 1e6))
        .collect();
    report(
        4,
        ok,
        &format!(
            "data vs f_l (Mbit): [{}]; at f_l={f:e} Hz {:.2} vs expected {:.2} Mbit (rel err {:.2}%)",
            series.join(", "),
            points[i].data.mean / 1e6,
            exact / 1e6,
            rel * 100.0
        ),
    );
    assert!(ok);
}

#[test]
fn c05_gap_bound_over_v() {
    let cfg = defaults(&[
        "sweep_axis=v_param",
        "sweep_values=[1e-9,1e-8,1e-7,1e-6]",
        "seeds=[1,2,3,4,5,6,7,8,9,10]",
    ]);
    let means =
        estimate_slot_means(&cfg.model().unwrap(), cfg.k_range().unwrap(), 200_000, 5).unwrap();
    let model = cfg.model().unwrap();
    let k = cfg.k_range().unwrap();
    let dct = cfg.tau_bits * k.mean();
    let dlt = expected_dlt(cfg.tau_bits, model.catalog.popularity(), cfg.cache_m, &k).unwrap();
    let rep = classify_regime(means.nl_bar, means.nc_bar, cfg.lambda, dct, dlt).unwrap();
    assert_eq!(
        rep.regime,
        Regime::Mixed,
        "operating point must be feasible and mixed"
    );
    let d_opt = rep.d_opt_bits.unwrap();

    let (_, points) = sweep_points(&cfg).unwrap();
    no_drift_violations(points_runs(&points));
    let mut ok = true;
    let mut gaps = vec![];
    for p in &points {
        let gap = p.data.mean - d_opt;
        let bound = optimality_gap_bound(p.axis_value).unwrap() + 3.0 * p.data.se();
        ok &= gap <= bound;
        gaps.push(gap);
    }
    ok &= gaps.windows(2).all(|w| w[1] <= w[0]);
    let shown: Vec<String> = points
        .iter()
        .zip(&gaps)
        .map(|(p, g)| format!("V={:e}: {:+.2} Mbit", p.axis_value, g / 1e6))
        .collect();
    report(
        5,
        ok,
        &format!(
            "optimum {:.2} Mbit; gaps [{}]",
            d_opt / 1e6,
            shown.join(", ")
        ),
    );
    assert!(ok);
}

#[test]
fn c06_drift_inequality_holds_every_slot() {
    let mut cfgs = vec![];
    for policy in ["lyapunov", "mec_only", "local_only"] {
        for lambda in ["0.2", "0.4", "0.9"] {
            cfgs.push(defaults(&[
                &format!("policy={policy}"),
                &format!("lambda={lambda}"),
                "horizon_slots=50000",
                "seeds=[1,2]",
            ]));
        }
    }
    cfgs.push(defaults(&[
        "v_param=1e-5",
        "horizon_slots=50000",
        "seeds=[3]",
    ]));
    cfgs.push(defaults(&["v_param=0", "horizon_slots=50000", "seeds=[3]"]));
    let mut slots = 0u64;
    let mut violations = 0u64;
    for c in &cfgs {
        for r in simulate(c).unwrap() {
            slots += r.metrics.horizon_slots;
            violations += r.metrics.drift_violations;
        }
    }
    let ok = violations == 0;
    report(
        6,
        ok,
        &format!("{violations} violations over {slots} slots"),
    );
    assert!(ok);
}

#[test]
fn c07_stable_below_capacity_divergent_above() {
    let base = defaults(&[]);
    let means =
        estimate_slot_means(&base.model().unwrap(), base.k_range().unwrap(), 200_000, 3).unwrap();
    let capacity = 1.0 / means.nl_bar + 1.0 / means.nc_bar;
    let below = 0.7 * capacity;
    let above = (1.3 * capacity).min(1.0);

    let run = |lambda: f64| {
        let c = defaults(&[&format!("lambda={lambda}"), "horizon_slots=100000"]);
        run_one(&c, 1).unwrap()
    };
    let lo = run(below);
    let hi = run(above);
    no_drift_violations([&lo, &hi]);
    let stable = lo.metrics.final_window_mean() <= 2.0 * lo.metrics.overall_queue_mean();
    let divergent = hi
        .metrics
        .queue_window_means
        .windows(2)
        .all(|w| w[1] > w[0]);
    let ok = stable && divergent && hi.metrics.infeasibility_flag && !lo.metrics.infeasibility_flag;
    report(
        7,
        ok,
        &format!(
            "capacity {capacity:.4}/slot; lambda={below:.3}: last-window {:.2} vs overall {:.2}; \
             lambda={above:.3}: window means strictly rising = {divergent}",
            lo.metrics.final_window_mean(),
            lo.metrics.overall_queue_mean()
        ),
    );
    assert!(ok);
}

#[test]
fn c08_rate_frontier_monotone_and_reproducible() {
    let cfg = defaults(&[
        "lambda=0.2",
        "v_param=1e-9",
        "horizon_slots=20000",
        "seeds=[1,2,3]",
        "target_delay_s=1.0",
        "delay_tolerance_s=0.05",
        "frontier_f_local_hz=[5e8,1e9,2e9]",
        "frontier_cache_m=[0,50,200]",
    ]);
    let rows = frontier(&cfg).unwrap();
    assert_eq!(rows.len(), 9);
    let rate = |i: usize| rows[i].required_rate_bps.unwrap_or(f64::INFINITY);
    let mut monotone = true;
    for a in 0..3 {
        for b in 0..2 {
            // along M at fixed f_l, and along f_l at fixed M
            monotone &= rate(3 * a + b + 1) <= rate(3 * a + b);
            monotone &= rate(3 * (b + 1) + a) <= rate(3 * b + a);
        }
    }
    let mut reproduced = true;
    for r in &rows {
        reproduced &= r.status == FrontierStatus::Ok;
        if let Some(rate) = r.required_rate_bps {
            let fresh = defaults(&[
                "lambda=0.2",
                "v_param=1e-9",
                "horizon_slots=20000",
                "seeds=[1,2,3]",
                &format!("f_local_hz={:e}", r.f_local_hz),
                &format!("cache_m={}", r.cache_m),
            ]);
            let d = mean_delay_at(&fresh, rate).unwrap();
            reproduced &= (d - 1.0).abs() <= 0.05;
        }
    }
    let ok = monotone && reproduced;
    let shown: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "({:e} Hz, M={}) -> {} Mbps",
                r.f_local_hz,
                r.cache_m,
                r.required_rate_bps
                    .map_or("none".to_owned(), |x| format!("{:.1}", x / 1e6))
            )
        })
        .collect();
    report(8, ok, &shown.join("; "));
    assert!(ok);
}

fn run_cli(args: &[&str], out: &std::path::Path) -> Vec<u8> {
    let status = Command::new(env!("CARGO_BIN_EXE_mecsched"))
        .args(args)
        .arg("--out")
        .arg(out)
        .status()
        .unwrap();
    assert!(status.success());
    std::fs::read(out).unwrap()
}

#[test]
fn c09_same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 3] = [
        &["simulate", "--seeds", "4,2", "--set", "horizon_slots=20000"],
        &[
            "sweep",
            "--seeds",
            "1,2",
            "--set",
            "horizon_slots=10000",
            "--set",
            "sweep_axis=cache_m",
            "--set",
            "sweep_values=[0,50,200]",
        ],
        &[
            "simulate",
            "--seeds",
            "9",
            "--set",
            "policy=local_only",
            "--set",
            "lambda=0.9",
            "--set",
            "horizon_slots=20000",
        ],
    ];
    let mut ok = true;
    for (i, args) in cases.iter().enumerate() {
        let a = run_cli(args, &dir.path().join(format!("a{i}.csv")));
        let b = run_cli(args, &dir.path().join(format!("b{i}.csv")));
        ok &= !a.is_empty() && a == b;
    }
    report(
        9,
        ok,
        &format!("{} CLI runs repeated byte-for-byte", cases.len()),
    );
    assert!(ok);
}

/// Action sets written out independently of the policy module.
fn expected_set(s_l: u32, s_c: u32, q: usize) -> Vec<Action> {
    use Action::*;
    match (s_l == 0, s_c == 0, q) {
        (_, _, 0) => vec![Idle],
        (true, true, 1) => vec![Idle, HeadLocal, HeadMec],
        (true, true, _) => vec![Idle, HeadLocal, HeadMec, HeadLocalNextMec, HeadMecNextLocal],
        (false, true, _) => vec![Idle, HeadMec],
        (true, false, _) => vec![Idle, HeadLocal],
        (false, false, _) => vec![Idle],
    }
}

#[test]
fn c10_feasible_action_sets() {
    let cfg = defaults(&[]);
    let model = cfg.model().unwrap();
    let mut gen = Workload::new(cfg.workload(1).unwrap()).unwrap();
    let jobs: Vec<_> = (0..4)
        .map(|t| model.job(gen.sample_task(&model.catalog, t)))
        .collect();
    let policies = [
        PolicySpec::lyapunov(2e-7).unwrap(),
        PolicySpec::lyapunov(0.0).unwrap(),
        PolicySpec::mec_only(),
        PolicySpec::local_only(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 1_000_000;
    let mut mismatches = 0u64;
    for _ in 0..n {
        let s_l = if rng.gen_bool(0.5) {
            0
        } else {
            rng.gen_range(1..6)
        };
        let s_c = if rng.gen_bool(0.5) {
            0
        } else {
            rng.gen_range(1..6)
        };
        let q = match rng.gen_range(0..4) {
            0 => 0,
            1 => 1,
            2 => 2,
            _ => rng.gen_range(3..jobs.len() + 1),
        };
        let mut want = expected_set(s_l, s_c, q);
        let mut got = feasible_actions(s_l, s_c, q).to_vec();
        want.sort_by_key(|a| a.tuple());
        got.sort_by_key(|a| a.tuple());
        if got != want {
            mismatches += 1;
            continue;
        }
        let busy = |mode| InService {
            task_id: 0,
            arrival_slot: 0,
            mode,
            completion_slot: 1,
        };
        let state = SystemState::from_parts(
            jobs[..q].iter().cloned(),
            s_l,
            s_c,
            (s_l > 0).then(|| busy(Mode::Local)),
            (s_c > 0).then(|| busy(Mode::Mec)),
        )
        .unwrap();
        for p in &policies {
            if !want.contains(&decide(p, &state)) {
                mismatches += 1;
            }
        }
    }
    let ok = mismatches == 0;
    report(
        10,
        ok,
        &format!("{n} random states, {mismatches} mismatches"),
    );
    assert!(ok);
}
