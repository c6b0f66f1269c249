//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use lavatube::commands::{comms_range_report, comms_time_rows, explore, monte_carlo_stats, sweep_rows};
use lavatube::config::{parse_config, Config};
use lavatube::output::monte_carlo_rows;
use lavatube_core::ballistics::{hop_velocity, optimal_hop, optimal_transfer_time};
use lavatube_core::comms::{
    build_adjacency, chain_transmission_time, shannon_rate, shortest_path, CommGraph, CommParams, LinkBudget,
};
use lavatube_core::engine::run;
use lavatube_core::localization::{compose_pose, localize_chain, relative_measurement, Measurement, Pose};
use lavatube_core::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn case_i() -> Config {
    parse_config(include_str!("../configs/case_i.toml")).unwrap()
}

fn case_ii() -> Config {
    parse_config(include_str!("../configs/case_ii.toml")).unwrap()
}

fn at_resolution(mut c: Config, resolution: u32) -> Config {
    c.environment.resolution = resolution;
    c
}

fn sweep_value(body: &str, d: f64) -> Result<(u64, f64, Duration), String> {
    let mut cfg = Config::default();
    cfg.sweep.distances = vec![d];
    cfg.sweep.bodies.retain(|b| b.name == body);
    let start = Instant::now();
    let rows = sweep_rows(&cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let row = rows.first().ok_or("no sweep row")?;
    Ok((row.n_hops, row.total_distance_m, elapsed))
}

fn hop_budget_moon_1m() -> Outcome {
    let (n, total, t) = sweep_value("moon", 1.0)?;
    ensure(n.abs_diff(546) <= 1, || format!("{n} hops"))?;
    ensure((total - 546.0).abs() <= 1.0, || format!("{total} m"))?;
    ensure(t < Duration::from_secs(1), || format!("took {t:?}"))?;
    Ok(format!("{n} hops, {total} m in {t:?}"))
}

fn hop_budget_moon_100m() -> Outcome {
    let (n, total, _) = sweep_value("moon", 100.0)?;
    ensure((54..=55).contains(&n), || format!("{n} hops"))?;
    ensure((5400.0..=5500.0).contains(&total), || format!("{total} m"))?;
    Ok(format!("{n} hops, {total} m"))
}

fn hop_budget_mars() -> Outcome {
    let (n1, _, _) = sweep_value("mars", 1.0)?;
    let (n100, _, _) = sweep_value("mars", 100.0)?;
    ensure(n1.abs_diff(359) <= 3, || format!("1 m: {n1} hops"))?;
    ensure(n100.abs_diff(36) <= 1, || format!("100 m: {n100} hops"))?;
    Ok(format!("1 m: {n1} hops, 100 m: {n100} hops"))
}

fn optimal_transfer_time_vs_grid() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let d = rng.random_range(0.1..100.0);
        let g = rng.random_range(0.5..10.0);
        let closed = optimal_hop((d, 0.0), g).map_err(|e| e.to_string())?.total_delta_v();
        let tau_star = optimal_transfer_time(d, g).map_err(|e| e.to_string())?;
        let mut grid = f64::INFINITY;
        let steps = (3.0 * tau_star / 1e-4) as u64;
        for k in 1..=steps {
            let v = hop_velocity((d, 0.0), g, k as f64 * 1e-4).map_err(|e| e.to_string())?;
            grid = grid.min(2.0 * v.norm());
        }
        ensure(closed <= grid * 1.001, || format!("d={d} g={g}: {closed} vs grid {grid}"))?;
        worst = worst.max(closed / grid - 1.0);
    }
    Ok(format!("100 pairs, worst excess over grid {worst:.2e}"))
}

fn antenna_range() -> Outcome {
    let cfg = Config::default();
    let report = comms_range_report(&cfg).map_err(|e| e.to_string())?;
    let range: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("max_range_m "))
        .ok_or("no max_range line")?
        .trim()
        .parse()
        .map_err(|e| format!("{e}"))?;
    ensure((range - 500.0).abs() <= 25.0, || format!("range {range}"))?;
    ensure(report.contains("antenna_gain_db") && report.matches("antenna_gain").count() == 1, || {
        "gain must be itemized once".into()
    })?;
    let params = cfg.comms.params();
    for d in [1.0, 10.0, 123.4, range, 1000.0] {
        let b = LinkBudget::at(&params, d).map_err(|e| e.to_string())?;
        let sum: f64 = b.terms().iter().map(|(_, v)| v).sum();
        ensure((sum - b.received_power_dbm).abs() <= 1e-9, || format!("d={d}: {sum} vs {}", b.received_power_dbm))?;
        ensure((b.margin_db - (b.received_power_dbm - b.rx_sensitivity_dbm)).abs() <= 1e-9, || "margin".into())?;
    }
    Ok(format!("max range {range:.3} m, budget sums exactly"))
}

fn transmission_time() -> Outcome {
    let mut cfg = Config::default();
    cfg.comms.hops = (2..=20).collect();
    let rows = comms_time_rows(&cfg).map_err(|e| e.to_string())?;
    ensure(rows.len() == 19, || format!("{} rows", rows.len()))?;
    for w in rows.windows(2) {
        ensure(w[1].total_time_s > w[0].total_time_s, || format!("{:?} then {:?}", w[0], w[1]))?;
    }
    let params = cfg.comms.params();
    for d in [50.0, 250.0, 450.0] {
        let bits = (params.data_size_bits as f64 / params.packet_size_bits as f64).ceil() * params.packet_size_bits as f64;
        let rate = shannon_rate(&params, d).map_err(|e| e.to_string())?;
        let t = chain_transmission_time(d, 1, &params).map_err(|e| e.to_string())?;
        ensure((t - bits / rate).abs() <= 1e-9, || format!("d={d}: {t} vs {}", bits / rate))?;
    }
    Ok(format!(
        "{:.1} s at 2 hops rising to {:.1} s at 20 hops",
        rows[0].total_time_s,
        rows[18].total_time_s
    ))
}

fn enumerate_cost(g: &CommGraph, src: usize, dst: usize) -> Option<f64> {
    fn go(g: &CommGraph, at: usize, dst: usize, seen: &mut [bool], acc: f64, best: &mut Option<f64>) {
        if at == dst {
            *best = Some(best.map_or(acc, |b| b.min(acc)));
            return;
        }
        for (next, e) in g.neighbours(at) {
            if !seen[next] {
                seen[next] = true;
                go(g, next, dst, seen, acc + e.cost, best);
                seen[next] = false;
            }
        }
    }
    let mut seen = vec![false; g.node_count()];
    seen[src] = true;
    let mut best = None;
    go(g, src, dst, &mut seen, 0.0, &mut best);
    best
}

fn dijkstra_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let params = CommParams::default();
    let mut routed = 0;
    for _ in 0..500 {
        let n = rng.random_range(2..=8);
        let pts: Vec<Point> = (0..n)
            .map(|_| Point::new(rng.random_range(0.0..1200.0), rng.random_range(0.0..800.0)))
            .collect();
        let g = build_adjacency(&pts, &params);
        for dst in 1..n {
            let got = shortest_path(&g, 0, dst).map_err(|e| e.to_string())?.map(|r| r.cost);
            let want = enumerate_cost(&g, 0, dst);
            ensure(got == want, || format!("{pts:?} -> {dst}: {got:?} vs {want:?}"))?;
            routed += usize::from(got.is_some());
        }
    }
    Ok(format!("500 graphs, {routed} routed pairs, costs identical"))
}

fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

fn localization_chains() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pose = |rng: &mut ChaCha8Rng| {
        Pose::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0), rng.random_range(-PI..PI))
    };
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let len = rng.random_range(1..=10);
        let poses: Vec<Pose> = (0..=len).map(|_| pose(&mut rng)).collect();
        let chain: Vec<Measurement> = poses.windows(2).map(|w| relative_measurement(&w[0], &w[1])).collect();
        for (w, m) in poses.windows(2).zip(&chain) {
            let back = compose_pose(&w[0], m);
            let err = (back.x - w[1].x).abs().max((back.y - w[1].y).abs()).max(angle_diff(back.phi, w[1].phi));
            ensure(err <= 1e-9, || format!("round trip error {err}"))?;
            worst = worst.max(err);
        }
        let through = localize_chain(&poses[0], &chain);
        let last = poses[len];
        let direct = compose_pose(&poses[0], &relative_measurement(&poses[0], &last));
        for (a, b) in [(through, last), (through, direct)] {
            let err = (a.x - b.x).abs().max((a.y - b.y).abs()).max(angle_diff(a.phi, b.phi));
            ensure(err <= 1e-9, || format!("chain of {len}: error {err}"))?;
            worst = worst.max(err);
        }
    }
    Ok(format!("1000 chains, worst error {worst:.1e}"))
}

/// Every node reachable from `anchor` over links of length <= `r`.
fn connected(points: &[Point], r: f64, anchor: usize) -> bool {
    if points.is_empty() {
        return true;
    }
    let mut seen = vec![false; points.len()];
    let mut queue = VecDeque::from([anchor]);
    seen[anchor] = true;
    while let Some(i) = queue.pop_front() {
        for j in 0..points.len() {
            if !seen[j] && points[i].distance(points[j]) <= r {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn exploration_invariants() -> Outcome {
    let cfg = at_resolution(case_i(), 10);
    let sim = cfg.sim_config();
    let res = cfg.environment.resolution as f64;
    let vision = cfg.planner.vision_radius;
    let mut slowest = Duration::ZERO;
    let mut hops = 0;
    for seed in 0..25u64 {
        let start = Instant::now();
        let trial = run(&sim, seed).map_err(|e| e.to_string())?;
        slowest = slowest.max(start.elapsed());
        let series = &trial.coverage_series;
        ensure(series.len() == cfg.timesteps as usize + 1, || format!("seed {seed}: {} rows", series.len()))?;
        ensure(series.windows(2).all(|w| w[1].1 >= w[0].1), || format!("seed {seed}: coverage decreased"))?;

        // replay hops one at a time from the initial placement
        let mut pts: Vec<Point> = trial.snapshots[0].poses.iter().map(|p| p.position()).collect();
        let mut visited = pts.clone();
        for h in &trial.hop_events {
            ensure(pts[h.robot] == h.from, || format!("seed {seed}: hop {h:?} does not start at the robot"))?;
            let d = h.from.distance(h.to);
            ensure(d <= cfg.planner.hop_range + 1e-12, || format!("seed {seed}: hop of {d}"))?;
            let b = h.to;
            let cell = Point::new(((b.x * res).floor() + 0.5) / res, ((b.y * res).floor() + 0.5) / res);
            let known = visited.iter().any(|q| q.distance(cell) <= vision);
            ensure(known, || format!("seed {seed}: landed at {b:?} outside explored space"))?;
            for o in &cfg.environment.obstacles {
                let inside = (b.x - o.x).hypot(b.y - o.y) <= o.radius;
                ensure(!inside, || format!("seed {seed}: pose {b:?} inside obstacle"))?;
            }
            pts[h.robot] = b;
            visited.push(b);
            ensure(connected(&pts, cfg.planner.comm_range, 0), || format!("seed {seed} after {h:?}: base link lost"))?;
            hops += 1;
        }
        let last: Vec<Point> = trial.final_poses.iter().map(|p| p.position()).collect();
        ensure(last == pts, || format!("seed {seed}: hop log does not reproduce final poses"))?;
        for snap in &trial.snapshots {
            let at: Vec<Point> = snap.poses.iter().map(|p| p.position()).collect();
            ensure(connected(&at, cfg.planner.comm_range, 0), || format!("seed {seed} t={}: base link lost", snap.timestep))?;
        }
    }
    ensure(slowest < Duration::from_secs(2), || format!("slowest seed took {slowest:?}"))?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for run_dir in ["a", "b"] {
        let mut c = cfg.clone();
        c.seed = 5;
        c.output_dir = dir.path().join(run_dir).to_string_lossy().into_owned();
        explore(&c).map_err(|e| e.to_string())?;
        let read = |f: &str| std::fs::read(dir.path().join(run_dir).join(f)).map_err(|e| e.to_string());
        files.push((read("coverage.csv")?, read("snapshots.jsonl")?, read("hops.csv")?));
    }
    ensure(files[0] == files[1], || "replay differs".into())?;

    let full = case_i();
    let start = Instant::now();
    let trial = run(&full.sim_config(), full.seed).map_err(|e| e.to_string())?;
    let full_time = start.elapsed();
    ensure(full_time < Duration::from_secs(60), || format!("resolution 100 run took {full_time:?}"))?;
    Ok(format!(
        "25 seeds, {hops} hops checked, slowest {slowest:.2?}; replay identical; resolution 100 run {full_time:.2?} (coverage {:.3})",
        trial.final_coverage
    ))
}

fn monte_carlo_ordering() -> Outcome {
    let mut cfg = at_resolution(case_i(), 10);
    cfg.monte_carlo.robots = vec![6, 15];
    cfg.monte_carlo.trials = 10;
    let stats = monte_carlo_stats(&cfg).map_err(|e| e.to_string())?;
    let rows = monte_carlo_rows(&stats);
    ensure(rows.len() == 2 * (cfg.timesteps as usize + 1), || format!("{} rows", rows.len()))?;
    ensure(rows.iter().all(|r| r.std_coverage.is_finite() && r.std_coverage >= 0.0), || "bad std".into())?;
    let last = |i: usize| *stats[i].mean.last().unwrap();
    ensure(last(1) >= last(0), || format!("15 robots {} < 6 robots {}", last(1), last(0)))?;
    Ok(format!("final mean coverage 6 robots {:.3}, 15 robots {:.3}", last(0), last(1)))
}

fn case_ii_suite() -> Outcome {
    let cfg = at_resolution(case_ii(), 10);
    let sim = cfg.sim_config();
    let r = cfg.planner.comm_range;
    let mut detached_steps = 0;
    for seed in 0..25u64 {
        let trial = run(&sim, seed).map_err(|e| e.to_string())?;
        for snap in &trial.snapshots {
            let pts: Vec<Point> = snap.poses.iter().map(|p| p.position()).collect();
            if !connected(&pts, r, 0) {
                detached_steps += 1;
                ensure(connected(&pts[1..], r, 0), || format!("seed {seed} t={}: swarm split", snap.timestep))?;
            }
        }
        let finals: Vec<Point> = trial.final_poses.iter().map(|p| p.position()).collect();
        ensure(connected(&finals, r, 0), || format!("seed {seed}: not home after return"))?;
    }
    ensure(detached_steps > 0, || "swarm never detached".into())?;
    Ok(format!("25 seeds, {detached_steps} detached snapshots, all swarms home"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("hop budget, Moon 1 m", hop_budget_moon_1m),
        ("hop budget, Moon 100 m", hop_budget_moon_100m),
        ("hop budget, Mars 1 m and 100 m", hop_budget_mars),
        ("optimal transfer time vs grid search", optimal_transfer_time_vs_grid),
        ("antenna range and additive link budget", antenna_range),
        ("relay chain transmission time", transmission_time),
        ("shortest path vs exhaustive enumeration", dijkstra_oracle),
        ("localization round trip and chains", localization_chains),
        ("base-connected exploration invariants", exploration_invariants),
        ("monte carlo ordering by robot count", monte_carlo_ordering),
        ("detached swarm connectivity and return", case_ii_suite),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
