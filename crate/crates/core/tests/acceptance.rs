//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Runs with `harness = false`, so `cargo test` executes `main` directly. The
//! process fails only if a criterion cannot be evaluated at all; verdicts are
//! reported on standard output.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use dcaplan_core::bench::{
    load_reference, mean_sem, run_sweep, run_trace_sweep, run_trial, SweepRow, SweepSpec, TraceSpec,
};
use dcaplan_core::exhaustivity::{empty_ball_tail, small_ball_miss_tail, TraceParams};
use dcaplan_core::planners::{dijkstra, near, trace_back};
use dcaplan_core::reeds_shepp::oracle::oracle_distance;
use dcaplan_core::subriemannian::{privileged_coords, pseudonorm, rs_constants};
use dcaplan_core::{rs_distance, NearMode, PlannerKind, Pose, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn maze() -> Scenario {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/maze.json");
    Scenario::load(&p).expect("shipped maze loads")
}

fn pose_in(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Pose {
    Pose::new(
        rng.random_range(lo..hi),
        rng.random_range(lo..hi),
        rng.random_range(-PI..PI),
    )
}

struct Verdicts(Vec<(usize, bool)>);

impl Verdicts {
    fn record(&mut self, k: usize, ok: bool, detail: String) {
        println!("{} criterion {k:>2}: {detail}", if ok { "PASS" } else { "FAIL" });
        self.0.push((k, ok));
    }
}

fn oracle_equivalence(v: &mut Verdicts) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    let mut bad = 0;
    for _ in 0..1000 {
        let a = pose_in(&mut rng, 0.0, 10.0);
        let b = pose_in(&mut rng, 0.0, 10.0);
        let gap = (rs_distance(&a, &b, 1.0) - oracle_distance(&a, &b, 1.0, 0.05)).abs();
        worst = worst.max(gap);
        bad += usize::from(gap > 1e-6 || gap.is_nan());
    }
    let secs = t.elapsed().as_secs_f64();
    v.record(
        1,
        bad == 0 && secs < 300.0,
        format!("steering vs oracle, 1000 pairs: {bad} mismatches, worst gap {worst:.2e}, {secs:.1} s"),
    );
}

fn metric_axioms(v: &mut Verdicts) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let (mut sym, mut tri, mut planar) = (0, 0, 0);
    for _ in 0..10_000 {
        let p = [
            pose_in(&mut rng, 0.0, 10.0),
            pose_in(&mut rng, 0.0, 10.0),
            pose_in(&mut rng, 0.0, 10.0),
        ];
        let d = |i: usize, j: usize| rs_distance(&p[i], &p[j], 1.0);
        let (ab, bc, ac) = (d(0, 1), d(1, 2), d(0, 2));
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            sym += usize::from((d(i, j) - d(j, i)).abs() > 1e-9);
            planar += usize::from(d(i, j) < p[i].planar_distance(&p[j]) - 1e-9);
        }
        tri += usize::from(ac > ab + bc + 1e-9);
    }
    let secs = t.elapsed().as_secs_f64();
    v.record(
        2,
        sym + tri + planar == 0 && secs < 10.0,
        format!("10^4 triples: {sym} symmetry, {tri} triangle, {planar} planar-bound violations, {secs:.2} s"),
    );
}

fn ball_box(v: &mut Verdicts) {
    let c = rs_constants(1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let (mut pairs, mut left, mut right) = (0usize, 0usize, 0usize);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    while pairs < 10_000 {
        let a = pose_in(&mut rng, 0.0, 10.0);
        let b = Pose::new(
            a.x + rng.random_range(-1.0..1.0),
            a.y + rng.random_range(-1.0..1.0),
            a.theta() + rng.random_range(-1.0..1.0),
        );
        let d = rs_distance(&a, &b, 1.0);
        if d >= c.sigma_min || d.is_nan() {
            continue;
        }
        pairs += 1;
        let z = pseudonorm(&privileged_coords(&a, &b));
        left += usize::from(c.a_min * z > d);
        right += usize::from(d > c.a_max * z);
        if z > 0.0 {
            lo = lo.min(d / z);
            hi = hi.max(d / z);
        }
    }
    let lf = left as f64 / pairs as f64;
    let rf = right as f64 / pairs as f64;
    v.record(
        3,
        lf <= 0.01,
        format!(
            "a_min={:.4} A_max={:.4}: left violated {:.2}%, right violated {:.2}%, observed d/|z| in [{lo:.4}, {hi:.4}]",
            c.a_min,
            c.a_max,
            100.0 * lf,
            100.0 * rf
        ),
    );
}

fn containment(v: &mut Verdicts) {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let (mut configs_bad, mut missing) = (0, 0);
    for _ in 0..1000 {
        let x = pose_in(&mut rng, 0.0, 10.0);
        let r = rng.random_range(0.05..1.0);
        let vs: Vec<Pose> = (0..50)
            .map(|_| {
                Pose::new(
                    x.x + rng.random_range(-r..r),
                    x.y + rng.random_range(-r..r),
                    rng.random_range(-PI..PI),
                )
            })
            .collect();
        let exact = near(&vs, &x, r, NearMode::ExactBall, 1.0).unwrap();
        let boxed = near(&vs, &x, r, NearMode::Box, 1.0).unwrap();
        let m = exact.iter().filter(|i| boxed.binary_search(i).is_err()).count();
        missing += m;
        configs_bad += usize::from(m > 0);
    }
    v.record(
        4,
        configs_bad == 0,
        format!(
            "exact ball within box on 1000 configurations: {configs_bad} violating, {missing} vertices outside the box"
        ),
    );
}

fn costs_by_seed(rows: &[SweepRow], n: usize) -> HashMap<u64, Option<f64>> {
    rows.iter().filter(|r| r.n == n).map(|r| (r.seed, r.cost)).collect()
}

fn dominance(v: &mut Verdicts, sc: &Scenario, dfmt: &[SweepRow]) -> Vec<SweepRow> {
    let t = Instant::now();
    let spec = SweepSpec {
        planner: PlannerKind::Dprm,
        n_values: vec![1000],
        trials: 50,
        eta: 0.0,
        mode: NearMode::ExactBall,
        cache: true,
        base_seed: 0,
    };
    let dprm = run_sweep(sc, &spec).expect("dprm sweep");
    let f = costs_by_seed(dfmt, 1000);
    let (mut both, mut worse, mut dprm_ok, mut dfmt_ok) = (0, 0, 0, 0);
    for r in &dprm {
        let fc = f[&r.seed];
        dprm_ok += usize::from(r.cost.is_some());
        dfmt_ok += usize::from(fc.is_some());
        if let (Some(a), Some(b)) = (r.cost, fc) {
            both += 1;
            worse += usize::from(a > b + 1e-9);
        }
    }
    let secs = t.elapsed().as_secs_f64();
    v.record(
        5,
        worse == 0 && dprm_ok >= 45 && dfmt_ok >= 45,
        format!(
            "maze n=1000, 50 seeds: dprm success {dprm_ok}/50, dfmt success {dfmt_ok}/50, dprm worse on {worse} of {both} pairs ({secs:.0} s for dprm)"
        ),
    );
    dprm
}

fn convergence(v: &mut Verdicts, dfmt: &[SweepRow], ns: &[usize]) {
    let mut stats = Vec::new();
    for &n in ns {
        let costs: Vec<f64> = dfmt.iter().filter(|r| r.n == n).filter_map(|r| r.cost).collect();
        let rate = costs.len() as f64 / dfmt.iter().filter(|r| r.n == n).count() as f64;
        stats.push((n, mean_sem(&costs), rate));
    }
    let mut ok = true;
    for w in stats.windows(2) {
        let (_, a, ra) = w[0];
        let (_, b, rb) = w[1];
        ok &= rb >= ra;
        match (a, b) {
            (Some((ma, sa)), Some((mb, sb))) => ok &= mb <= ma + (sa * sa + sb * sb).sqrt(),
            (None, _) => {}
            (Some(_), None) => ok = false,
        }
    }
    let table: Vec<String> = stats
        .iter()
        .map(|(n, ms, rate)| match ms {
            Some((m, s)) => format!("n={n}: {m:.4}±{s:.4} ({:.0}%)", 100.0 * rate),
            None => format!("n={n}: - ({:.0}%)", 100.0 * rate),
        })
        .collect();
    v.record(6, ok, format!("dfmt mean cost, 50 trials: {}", table.join(", ")));
}

fn cache_transparency(v: &mut Verdicts, sc: &Scenario, dfmt: &[SweepRow]) {
    let mut differ = 0;
    let mut compared = 0;
    for planner in [PlannerKind::Dfmt, PlannerKind::Dprm] {
        let ns: &[usize] = if planner == PlannerKind::Dfmt {
            &[250, 1000]
        } else {
            &[250]
        };
        let mk = |cache| SweepSpec {
            planner,
            n_values: ns.to_vec(),
            trials: 20,
            eta: 0.0,
            mode: NearMode::ExactBall,
            cache,
            base_seed: 0,
        };
        let off = run_sweep(sc, &mk(false)).expect("uncached sweep");
        let on: Vec<SweepRow> = if planner == PlannerKind::Dfmt {
            dfmt.iter()
                .filter(|r| ns.contains(&r.n) && r.trial < 20)
                .cloned()
                .collect()
        } else {
            run_sweep(sc, &mk(true)).expect("cached sweep")
        };
        for (a, b) in on.iter().zip(&off) {
            assert_eq!((a.n, a.seed), (b.n, b.seed));
            compared += 1;
            let same = a.cost.map(f64::to_bits) == b.cost.map(f64::to_bits)
                && a.collision_checks == b.collision_checks
                && a.steering_solves == b.steering_solves;
            differ += usize::from(!same);
        }
    }
    v.record(
        7,
        differ == 0,
        format!("cache on/off, {compared} paired trials (dfmt n=250,1000; dprm n=250): {differ} differ outside timing"),
    );
}

fn exhaustivity(v: &mut Verdicts, sc: &Scenario) {
    let t = Instant::now();
    let x_ref = load_reference("plan:dfmt:4000:0", sc).expect("reference path");
    let ns = vec![500, 1000, 2000, 4000];
    let spec = TraceSpec {
        n_values: ns.clone(),
        trials: 100,
        eps: 0.5,
        eta: 0.0,
        base_seed: 1000,
    };
    let rows = run_trace_sweep(sc, &x_ref, &spec).expect("trace sweep");
    let rates: Vec<f64> = ns
        .iter()
        .map(|&n| rows.iter().filter(|r| r.n == n && r.success).count() as f64 / 100.0)
        .collect();
    let mut trend = true;
    for w in rates.windows(2) {
        let slack = 2.0 * ((w[0] * (1.0 - w[0]) + w[1] * (1.0 - w[1])) / 100.0).sqrt();
        trend &= w[1] + slack >= w[0];
    }
    let unconfirmed = rows.iter().filter(|r| r.success && !r.revalidated).count();
    let top = *rates.last().unwrap();
    let table: Vec<String> = ns.iter().zip(&rates).map(|(n, p)| format!("n={n}: {p:.2}")).collect();
    v.record(
        8,
        trend && top >= 0.9 && unconfirmed == 0,
        format!(
            "trace success, eps=0.5, 100 seeds: {}; {unconfirmed} successes fail revalidation ({:.0} s)",
            table.join(", "),
            t.elapsed().as_secs_f64()
        ),
    );

    let mut checked = 0;
    let mut violations = 0;
    for r in rows.iter().filter(|r| r.success) {
        checked += 1;
        let c = r.trace_cost.unwrap();
        violations += usize::from(c > r.cost_bound * (1.0 + 1e-12));
    }
    v.record(
        9,
        violations == 0 && checked > 0,
        format!("waypoint cost bound on {checked} successful traces: {violations} violations"),
    );
}

fn tails(v: &mut Verdicts, sc: &Scenario) {
    let n = 1000;
    let m = 10;
    // κ = 1 means fraction ln n / n
    let f = (n as f64).ln() / n as f64;
    let e = empty_ball_tail(sc, f, m, n, 10_000, 5000).expect("empty-ball tail");
    let alpha = TraceParams::from_eps(0.5).alpha;
    let s = small_ball_miss_tail(sc, alpha, m, n, 10_000, 20_000).expect("small-ball tail");
    v.record(
        10,
        e.within(3.0) && s.within(3.0),
        format!(
            "n=1000, 10^4 trials: empty-ball {:.4}±{:.4} vs bound {:.4}; small-ball miss {:.4}±{:.4} vs bound {:.4}",
            e.probability, e.standard_error, e.bound, s.probability, s.standard_error, s.bound
        ),
    );
}

fn determinism(v: &mut Verdicts, sc: &Scenario, recorded: &[&SweepRow], cache: bool) {
    let mut mismatched = 0;
    for r in recorded {
        let cfg = dcaplan_core::PlanConfig {
            n: r.n,
            eta: 0.0,
            mode: NearMode::ExactBall,
            seed: r.seed,
            cache,
        };
        let again = run_trial(sc, r.planner, &cfg, r.trial).expect("replay");
        let same = again.cost.map(f64::to_bits) == r.cost.map(f64::to_bits)
            && again.collision_checks == r.collision_checks
            && again.steering_solves == r.steering_solves;
        mismatched += usize::from(!same);
    }
    v.record(
        11,
        mismatched == 0,
        format!("{} recorded trials replayed: {mismatched} differ", recorded.len()),
    );
}

/// Plain Bellman-Ford relaxation to a fixed point.
fn bellman_ford(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    dist[source] = 0.0;
    for _ in 0..adj.len() {
        let mut changed = false;
        for (u, out) in adj.iter().enumerate() {
            for &(w, c) in out {
                if dist[u] + c < dist[w] {
                    dist[w] = dist[u] + c;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

fn dijkstra_oracle(v: &mut Verdicts) {
    let mut rng = ChaCha8Rng::seed_from_u64(112);
    let mut bad = 0;
    for _ in 0..100 {
        let n = rng.random_range(1..=50usize);
        let p = rng.random_range(0.02..0.3);
        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random_bool(p) {
                    // integer weights keep every path sum exact
                    let c = rng.random_range(0..100u32) as f64;
                    adj[i].push((j, c));
                    adj[j].push((i, c));
                }
            }
        }
        let src = rng.random_range(0..n);
        let (dist, pred) = dijkstra(&adj, src);
        let bf = bellman_ford(&adj, src);
        let mut ok = dist == bf;
        for (t, &dt) in dist.iter().enumerate() {
            if dt.is_finite() {
                let path = trace_back(&pred, t);
                let len: f64 = path
                    .windows(2)
                    .map(|e| {
                        adj[e[0]]
                            .iter()
                            .filter(|x| x.0 == e[1])
                            .map(|x| x.1)
                            .fold(f64::INFINITY, f64::min)
                    })
                    .sum();
                ok &= path[0] == src && *path.last().unwrap() == t && len == dt;
            }
        }
        bad += usize::from(!ok);
    }
    v.record(
        12,
        bad == 0,
        format!("100 random graphs: {bad} disagree with Bellman-Ford"),
    );
}

fn main() {
    // `cargo test -- --list` and filters address the harness; only run for real invocations.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let start = Instant::now();
    let sc = maze();
    let mut v = Verdicts(Vec::new());
    oracle_equivalence(&mut v);
    metric_axioms(&mut v);
    ball_box(&mut v);
    containment(&mut v);

    let ns = [250, 500, 1000, 2000, 4000];
    let dfmt = run_sweep(
        &sc,
        &SweepSpec {
            planner: PlannerKind::Dfmt,
            n_values: ns.to_vec(),
            trials: 50,
            eta: 0.0,
            mode: NearMode::ExactBall,
            cache: true,
            base_seed: 0,
        },
    )
    .expect("dfmt sweep");
    let dprm = dominance(&mut v, &sc, &dfmt);
    convergence(&mut v, &dfmt, &ns);
    cache_transparency(&mut v, &sc, &dfmt);
    exhaustivity(&mut v, &sc);
    tails(&mut v, &sc);
    let replay: Vec<&SweepRow> = dfmt
        .iter()
        .filter(|r| r.trial % 17 == 3)
        .chain(dprm.iter().filter(|r| r.trial % 25 == 7))
        .collect();
    determinism(&mut v, &sc, &replay, true);
    dijkstra_oracle(&mut v);

    v.0.sort_by_key(|x| x.0);
    let passed = v.0.iter().filter(|x| x.1).count();
    println!(
        "acceptance: {passed}/{} criteria passed in {:.0} s",
        v.0.len(),
        start.elapsed().as_secs_f64()
    );
}
