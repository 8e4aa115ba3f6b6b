//! Acceptance suite. Runs every criterion in sequence, timing each, and writes
//! one PASS/FAIL line per criterion straight to stderr so the lines survive
//! output capture.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use lamplighter::dynamics::{run_excursion, simulate_returns, Sign, WalkerState};
use lamplighter::exact::{
    escape_prob_bound, expected_rho, local_time_partial_sums, max_excursion_cdf, mgf_rho1, phase_params,
    range_lower_tail_bound, ret_prob_at_rho_k, ret_prob_curve, rho1_pmf, DEFAULT_TOL,
};
use lamplighter::graph::{build_gamma_m, build_line_graph, RootedGraph};
use lamplighter::lamp::{make_uniform_measure, LampGroup};
use lamplighter::montecarlo::{
    chi_square_gof, discrete_cdf_distance, estimate_escape_prob, estimate_local_time_profile,
    estimate_range_tail, estimate_return_profile, fit_power_exponent, fold_replicas, ks_critical_value,
    log_spaced_ks, phase_scan, ReturnEstimator,
};
use lamplighter::verify::{three_point_integer_measure, verify_general_measure, verify_uniform_lamp_law};
use lamplighter::walk::{BiasParams, BiasedWalk, HomesickParams, HomesickWalk};

const BUDGET: u64 = 1_000_000_000;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn report(id: usize, name: &str, limit: Duration, run: fn() -> Outcome) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(run));
    let elapsed = start.elapsed();
    let (passed, detail) = match result {
        Ok(o) => (o.passed && elapsed <= limit, o.detail),
        Err(_) => (false, "panicked".to_string()),
    };
    let verdict = if passed { "PASS" } else { "FAIL" };
    let line = format!(
        "criterion {id:>2} {verdict} {name}: {detail} [{:.1}s, limit {}s]\n",
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    let mut err = std::io::stderr().lock();
    let _ = err.write_all(line.as_bytes());
    let _ = err.flush();
    passed
}

fn c1_uniform_oracle() -> Outcome {
    let r = verify_uniform_lamp_law(2, 6).unwrap();
    outcome(
        r.passed() && r.max_abs_error == 0.0,
        format!("{} paths, {} failures, max error {}", r.cases.len(), r.failures(), r.max_abs_error),
    )
}

fn c2_general_oracle() -> Outcome {
    let r = verify_general_measure(&three_point_integer_measure(), 4, 1e-12).unwrap();
    outcome(
        r.passed(),
        format!("{} paths, {} failures, max error {:e}", r.cases.len(), r.failures(), r.max_abs_error),
    )
}

/// Maxima of the first `count` positive excursions, in replica order.
fn positive_maxima(lambda: f64, count: usize, seed: u64) -> Vec<i64> {
    let walk = BiasedWalk::new(BiasParams::from_lambda(lambda).unwrap());
    let measure = make_uniform_measure(LampGroup::Cyclic(2)).unwrap();
    let mut maxima = fold_replicas(
        (count as f64 * 2.2) as u64,
        seed,
        Vec::new,
        |acc: &mut Vec<i64>, _, rng| {
            let mut state = WalkerState::identity(measure.group(), 0i64);
            let rec = run_excursion(&mut state, &walk, &measure, rng, BUDGET).unwrap();
            if rec.sign == Some(Sign::Positive) {
                acc.push(rec.proj_max.unwrap());
            }
        },
        |mut a, b| {
            a.extend(b);
            a
        },
    );
    assert!(maxima.len() >= count);
    maxima.truncate(count);
    maxima
}

fn c3_excursion_maximum() -> Outcome {
    let n = 100_000;
    let crit = ks_critical_value(n, 0.001);
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, &lambda) in [2.0, 4.0].iter().enumerate() {
        let samples = positive_maxima(lambda, n, 300 + i as u64);
        let d = discrete_cdf_distance(&samples, |x| {
            if x < 0 {
                0.0
            } else {
                max_excursion_cdf(x as u64, lambda).unwrap()
            }
        })
        .unwrap();
        ok &= d < crit;
        parts.push(format!("lambda={lambda} D={d:.5}"));
    }
    outcome(ok, format!("{} vs critical {crit:.5}", parts.join(", ")))
}

fn c4_return_time() -> Outcome {
    let p = 0.75;
    let walk = BiasedWalk::new(BiasParams::new(p).unwrap());
    let measure = make_uniform_measure(LampGroup::Cyclic(2)).unwrap();
    let reps = 100_000u64;
    let k = 100usize;
    let (sum, sum_sq) = fold_replicas(
        reps,
        400,
        || (0.0, 0.0),
        |acc: &mut (f64, f64), _, rng| {
            let s = simulate_returns(k, &walk, &measure, rng, BUDGET).unwrap();
            let x = s.rho_k() as f64 / k as f64;
            acc.0 += x;
            acc.1 += x * x;
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    );
    let mean = sum / reps as f64;
    let var = (sum_sq - reps as f64 * mean * mean) / (reps as f64 - 1.0);
    let se = (var / reps as f64).sqrt();
    let target = expected_rho(1, p).unwrap();
    let mean_ok = (mean - target).abs() <= 3.0 * se;

    // ρ₁ histogram in half-lengths t, with a tail bin
    let t_max = 40usize;
    let counts = fold_replicas(
        reps,
        401,
        || vec![0u64; t_max + 1],
        |acc: &mut Vec<u64>, _, rng| {
            let s = simulate_returns(1, &walk, &measure, rng, BUDGET).unwrap();
            let t = (s.rho[0] / 2) as usize;
            acc[t.min(t_max + 1) - 1] += 1;
        },
        |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        },
    );
    let mut probs: Vec<f64> = (1..=t_max as u64).map(|t| rho1_pmf(t, p).unwrap()).collect();
    probs.push(1.0 - probs.iter().sum::<f64>());
    let chi = chi_square_gof(&counts, &probs, 0.001).unwrap();

    let h = 1e-5;
    let deriv = (mgf_rho1(h, p).unwrap() - mgf_rho1(-h, p).unwrap()) / (2.0 * h);
    let mgf_ok = (deriv - target).abs() < 1e-6;
    outcome(
        mean_ok && chi.passed && mgf_ok,
        format!(
            "mean rho_k/k={mean:.5} (se {se:.5}, target {target}); chi2={:.2} dof={} p={:.4}; mgf'(0)={deriv:.9}",
            chi.statistic, chi.dof, chi.p_value
        ),
    )
}

fn c5_return_probability() -> Outcome {
    let walk = BiasedWalk::new(BiasParams::new(0.75).unwrap());
    let measure = make_uniform_measure(LampGroup::Cyclic(2)).unwrap();
    let ks = [1u64, 2, 5, 10];
    let est = estimate_return_profile(&ks, &walk, &measure, 1_000_000, 500, BUDGET).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, e) in ks.iter().zip(&est) {
        let exact = ret_prob_at_rho_k(*k, 3.0, 2, DEFAULT_TOL).unwrap();
        let z = (e.estimate - exact) / e.std_error;
        ok &= z.abs() <= 3.0;
        parts.push(format!("k={k} mc={:.5} exact={exact:.5} z={z:+.2}", e.estimate));
    }
    outcome(ok, parts.join("; "))
}

fn c6_phase_transition() -> Outcome {
    let ks = log_spaced_ks(1000, 100_000).unwrap();
    let mut ok = true;
    let mut slopes = Vec::new();
    let mut parts = Vec::new();
    for &p in &[0.7, 0.8, 0.9] {
        let pp = phase_params(p, 2).unwrap();
        let curve = ret_prob_curve(&ks, pp.lambda, 2, DEFAULT_TOL).unwrap();
        let pts: Vec<(f64, f64)> = ks.iter().zip(&curve).map(|(&k, &v)| (k as f64, v)).collect();
        let slope = fit_power_exponent(&pts).unwrap().slope;
        ok &= (slope + 2.0 * pp.alpha).abs() <= 0.05;
        slopes.push(slope);
        parts.push(format!("p={p} slope={slope:.4} target={:.4}", -2.0 * pp.alpha));
    }
    let crosses = slopes[0] < -1.0 && slopes[2] > -1.0 && (slopes[1] + 1.0).abs() <= 0.05;
    outcome(ok && crosses, format!("{}; crosses -1 at p=0.8: {crosses}", parts.join("; ")))
}

fn c7_local_time() -> Outcome {
    let measure = make_uniform_measure(LampGroup::Cyclic(2)).unwrap();
    let horizons = log_spaced_ks(1000, 100_000).unwrap();
    let reps = 2000;

    let pp = phase_params(0.9, 2).unwrap();
    let walk = BiasedWalk::new(BiasParams::new(0.9).unwrap());
    let est = estimate_local_time_profile(&horizons, &walk, &measure, reps, 700, BUDGET).unwrap();
    let pts: Vec<(f64, f64)> = horizons.iter().zip(&est).map(|(&n, e)| (n as f64, e.estimate)).collect();
    let slope = fit_power_exponent(&pts).unwrap().slope;
    let target = 1.0 - 2.0 * pp.alpha;
    let super_ok = (slope - target).abs() <= 0.1;

    let walk = BiasedWalk::new(BiasParams::new(0.8).unwrap());
    let top: Vec<u64> = horizons.iter().copied().filter(|&n| n >= 10_000).collect();
    let est = estimate_local_time_profile(&top, &walk, &measure, reps, 701, BUDGET).unwrap();
    let ratios: Vec<f64> = top.iter().zip(&est).map(|(&n, e)| e.estimate / (n as f64).ln()).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
    let spread = hi / lo - 1.0;
    let crit_ok = spread < 0.25;

    let walk = BiasedWalk::new(BiasParams::new(0.6).unwrap());
    let a = estimate_local_time_profile(&[1000], &walk, &measure, reps, 702, BUDGET).unwrap().remove(0);
    let b = estimate_local_time_profile(&[100_000], &walk, &measure, reps, 703, BUDGET).unwrap().remove(0);
    let z = (b.estimate - a.estimate) / (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    let sub_ok = z.abs() <= 3.0;

    // exact-layer reference at the excursion-count scale n/m
    let m = pp.mean_excursion;
    let sums = local_time_partial_sums((100_000.0 / m) as u64, pp.lambda, 2, DEFAULT_TOL).unwrap();
    let exact_slope = fit_power_exponent(
        &horizons
            .iter()
            .map(|&n| (n as f64, sums[(n as f64 / m) as usize]))
            .collect::<Vec<_>>(),
    )
    .unwrap()
    .slope;

    outcome(
        super_ok && crit_ok && sub_ok,
        format!(
            "p=0.9 slope={slope:.4} target={target:.4} (exact partial sums {exact_slope:.4}); \
             p=0.8 ratio spread={:.1}%; p=0.6 xi(1e3)={:.4} xi(1e5)={:.4} z={z:+.2}",
            100.0 * spread,
            a.estimate,
            b.estimate
        ),
    )
}

fn c8_escape_and_range() -> Outcome {
    let line = build_line_graph(200).unwrap();
    let gamma = build_gamma_m(3, 256).unwrap();
    let graphs: [(&str, &RootedGraph); 2] = [("line", &line), ("gamma3", &gamma)];
    let mut worst = f64::NEG_INFINITY;
    let mut checks = 0;
    let mut ok = true;
    for (gi, (_, graph)) in graphs.iter().enumerate() {
        for (li, &lambda) in [2.0, 4.0, 8.0].iter().enumerate() {
            let walk = HomesickWalk::new(graph, HomesickParams::new(lambda).unwrap());
            for r in 1..=10u32 {
                let seed = 800 + (gi * 100 + li * 10) as u64 + r as u64;
                let est = estimate_escape_prob(&walk, r, 20_000, seed, BUDGET).unwrap();
                let bound = escape_prob_bound(graph, lambda, r).unwrap();
                let excess = (est.estimate - bound) / est.std_error.max(f64::MIN_POSITIVE);
                if est.estimate > bound {
                    worst = worst.max(excess);
                }
                ok &= est.estimate <= bound + 3.0 * est.std_error;
                checks += 1;
            }
            let root = graph.root();
            for (ki, &k) in [100u64, 1000, 10_000].iter().enumerate() {
                let Ok((n, bound)) =
                    range_lower_tail_bound(k, lambda, graph.degree(root), |r| graph.ball_size(r), 0.5)
                else {
                    continue;
                };
                let reps = if k == 10_000 { 400 } else { 2000 };
                let seed = 900 + (gi * 100 + li * 10 + ki) as u64;
                let est = estimate_range_tail(k, n as f64 / 4.0, &walk, reps, seed, BUDGET).unwrap();
                ok &= est.estimate <= bound + 3.0 * est.std_error;
                checks += 1;
            }
        }
    }
    let worst = if worst.is_finite() { format!("{worst:.2} sigma") } else { "none".into() };
    outcome(ok, format!("{checks} (graph, lambda, r|k) checks; largest excess over a bound: {worst}"))
}

fn c9_phase_scan() -> Outcome {
    let gamma = build_gamma_m(3, 1000).unwrap();
    let grid = [3.0, 4.0, 8.0];
    let scan = phase_scan(&grid, &gamma, 2, (10_000, 100_000), 2000, 900, BUDGET, ReturnEstimator::Conditional)
        .unwrap();
    let side = |i: usize| scan.points[i].transient_side();
    let ok = side(0) == Some(true) && side(2) == Some(false);
    let parts: Vec<String> = scan
        .points
        .iter()
        .map(|p| {
            let e = p.exponent.unwrap();
            format!("lambda={} exponent={:.3}±{:.3} side={:?}", p.lambda, e.slope, e.std_error, p.transient_side())
        })
        .collect();
    outcome(ok, format!("{}; bracket={:?}", parts.join("; "), scan.bracket))
}

fn run_cli(args: &[&str], threads: &str, out: &std::path::Path) -> Vec<u8> {
    let output = Command::new(env!("CARGO_BIN_EXE_lamplighter"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("LAMPLIGHTER_THREADS", threads)
        .output()
        .unwrap();
    assert!(output.status.success(), "{args:?}");
    std::fs::read(out).unwrap()
}

fn c10_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let commands: &[&[&str]] = &[
        &["verify", "uniform-lamps", "--max-len", "6"],
        &["simulate", "returns", "--ks", "1,2,5,10", "--p", "0.75", "--replicas", "20000", "--seed", "9"],
        &["simulate", "local-time", "--ns", "100,1000", "--p", "0.9", "--replicas", "500", "--seed", "9"],
        &["simulate", "trajectories", "--k", "20", "--lambda", "3", "--graph", "gamma:3", "--replicas", "300"],
        &["scan", "--graph", "gamma:3", "--grid", "3,8", "--k-lo", "100", "--k-hi", "1000", "--replicas", "300",
            "--estimator", "conditional"],
        &["exact", "ret-prob", "--ks", "1,10,100", "--p", "0.8", "--lamp", "2"],
    ];
    let mut identical = 0;
    for (i, args) in commands.iter().enumerate() {
        let a = run_cli(args, "1", &dir.path().join(format!("a{i}.csv")));
        let b = run_cli(args, "4", &dir.path().join(format!("b{i}.csv")));
        let c = run_cli(args, "2", &dir.path().join(format!("c{i}.csv")));
        if a == b && b == c && !a.is_empty() {
            identical += 1;
        }
    }
    outcome(
        identical == commands.len(),
        format!("{identical}/{} commands byte-identical across 1, 2 and 4 workers", commands.len()),
    )
}

#[test]
fn acceptance_criteria() {
    let min = |m: u64| Duration::from_secs(60 * m);
    let results = [
        report(1, "exhaustive oracle, uniform lamps", min(1), c1_uniform_oracle),
        report(2, "exhaustive oracle, three-point integer measure", min(1), c2_general_oracle),
        report(3, "positive excursion maximum law (KS)", min(1), c3_excursion_maximum),
        report(4, "return time mean, pmf and MGF", min(5), c4_return_time),
        report(5, "Monte Carlo vs exact return probability", min(10), c5_return_probability),
        report(6, "exact decay exponents and phase transition", min(10), c6_phase_transition),
        report(7, "local time growth regimes", min(30), c7_local_time),
        report(8, "escape and range lower-tail bounds", min(10), c8_escape_and_range),
        report(9, "phase scan on the split line", min(30), c9_phase_scan),
        report(10, "determinism across worker counts", min(10), c10_determinism),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    let _ = writeln!(std::io::stderr(), "acceptance: {passed}/{} criteria passed", results.len());
    assert_eq!(passed, results.len());
}
