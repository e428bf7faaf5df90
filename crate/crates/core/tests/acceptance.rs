//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use astfalsify_core::baselines::CemConfig;
use astfalsify_core::environment::{log_density, sample_disturbance};
use astfalsify_core::geometry::FT_PER_NMI;
use astfalsify_core::harness::{
    replay, run_experiment, run_trials, write_run, ExperimentConfig, RECORDS_FILE,
};
use astfalsify_core::mcts::{widening_bound, Mcts, SearchConfig};
use astfalsify_core::mdp::{reward_episodic, reward_standard};
use astfalsify_core::trajectory::{is_event, miss_distance, predict_lateral};
use astfalsify_core::{Algorithm, DefectConfig, Disturbance, EnvDistribution, RewardConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

// ---------------------------------------------------------------------------

fn determinism() -> Outcome {
    let start = Instant::now();
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    for algo in Algorithm::ALL {
        let mut cfg = ExperimentConfig::new(algo);
        cfg.episodes = 500;
        cfg.master_seed = 7;
        let mut csvs = Vec::new();
        for run in 0..2 {
            let dir = root.path().join(format!("{algo}-{run}"));
            let exp = run_experiment(&cfg).map_err(|e| e.to_string())?;
            write_run(&exp, &dir).map_err(|e| e.to_string())?;
            csvs.push(std::fs::read(dir.join(RECORDS_FILE)).map_err(|e| e.to_string())?);
            let report = replay(dir.join(RECORDS_FILE), None).map_err(|e| e.to_string())?;
            check(
                report.mismatches.is_empty(),
                format!("{algo}: {} replay mismatches", report.mismatches.len()),
            )?;
            check(report.results.len() == 500, format!("{algo}: replayed {}", report.results.len()))?;
        }
        check(csvs[0] == csvs[1], format!("{algo}: CSVs differ between identical runs"))?;
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 30.0, format!("took {secs:.1} s"))?;
    Ok(format!("4 algorithms x 500 episodes replayed exactly, CSVs identical ({secs:.1} s)"))
}

fn defect_off_soundness() -> Outcome {
    let mut cfg = ExperimentConfig::new(Algorithm::Mc);
    cfg.defect.enabled = false;
    let exp = run_experiment(&cfg).map_err(|e| e.to_string())?;
    check(exp.records.len() == 5000, "wrong episode count")?;
    check(exp.metrics.n_events == 0, format!("{} events", exp.metrics.n_events))?;
    Ok("5000 MC episodes, 0 events".into())
}

fn median(mut v: Vec<usize>) -> usize {
    v.sort_unstable();
    v[v.len() / 2]
}

fn qualitative_ordering() -> Outcome {
    let start = Instant::now();
    let trials = 5;
    let run = |algo| -> Result<_, String> {
        let cfg = ExperimentConfig::new(algo);
        run_trials(&cfg, trials).map_err(|e| e.to_string())
    };
    let mcts = run(Algorithm::Mcts)?;
    let mc = run(Algorithm::Mc)?;
    let navdb = run(Algorithm::Navdb)?;
    let ne = |xs: &[astfalsify_core::harness::Experiment]| -> Vec<usize> {
        xs.iter().map(|e| e.metrics.n_events).collect()
    };
    let iff = |xs: &[astfalsify_core::harness::Experiment]| -> Vec<Option<usize>> {
        xs.iter().map(|e| e.metrics.first_failure).collect()
    };
    let (ne_mcts, ne_mc, ne_nav) = (ne(&mcts), ne(&mc), ne(&navdb));
    let (iff_mcts, iff_mc) = (iff(&mcts), iff(&mc));
    // A run without failures has an infinite i_FF.
    let earlier = iff_mcts
        .iter()
        .zip(&iff_mc)
        .filter(|(a, b)| match (a, b) {
            (Some(a), Some(b)) => a <= b,
            (Some(_), None) => true,
            (None, _) => false,
        })
        .count();
    let secs = start.elapsed().as_secs_f64();
    let detail = format!(
        "N_E mcts {ne_mcts:?} mc {ne_mc:?} navdb {ne_nav:?}; i_FF mcts {iff_mcts:?} mc {iff_mc:?}; \
         mcts earlier-or-equal in {earlier}/{trials} ({secs:.1} s)"
    );
    check(median(ne_mcts.clone()) >= 10 * median(ne_mc.clone()), format!("median ratio: {detail}"))?;
    check(ne_nav.iter().all(|&n| n == 0), format!("navdb events: {detail}"))?;
    check(earlier >= 3, format!("first failure: {detail}"))?;
    check(secs < 120.0, format!("runtime: {detail}"))?;
    Ok(detail)
}

fn reward_suite() -> Outcome {
    let tol = 1e-12;
    let std = RewardConfig::standard();
    let epi = RewardConfig::episodic();
    let cases = [
        (reward_standard(-7.0, true, -3.0, true, &std), 0.0),
        (reward_standard(-7.0, false, 30.0, true, &std), -30.0),
        (reward_standard(-2.3, false, 30.0, false, &std), -2.3),
        (reward_episodic(-50.0, true, -5.0, true, &epi), -4500.0),
        (reward_episodic(-50.0, false, 30.0, true, &epi), -80.0),
        (reward_episodic(-50.0, false, 30.0, false, &epi), 0.0),
        (reward_episodic(-50.0, true, -5.0, false, &epi), 0.0),
    ];
    for (i, (got, want)) in cases.iter().enumerate() {
        check(close(*got, *want, tol), format!("case {i}: {got} != {want}"))?;
    }
    Ok(format!("{} case splits exact", cases.len()))
}

fn miss_event_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10_000 {
        let m: f64 = 1000.0 * (1.0 - rng.random::<f64>());
        let d = miss_distance(m, 10.0, 100.0);
        check((d <= 0.0) == is_event(m, 10.0), format!("maxdiff {m}: d {d}"))?;
    }
    let e = std::f64::consts::E;
    for (m, want) in [(10.0, 0.0), (10.0 * e, -100.0), (10.0 / e, 100.0)] {
        let d = miss_distance(m, 10.0, 100.0);
        check(close(d, want, 1e-6), format!("d({m}) = {d}"))?;
    }
    Ok("10000 random maxdiff values consistent; d(10), d(10e), d(10/e) exact".into())
}

fn arc_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let (plan, dpsi) = common::random_feasible_turn(&mut rng);
        let packet = predict_lateral(&plan, &DefectConfig::with_enabled(false))
            .map_err(|e| e.to_string())?;
        let arcs: Vec<_> = packet.arcs().collect();
        check(arcs.len() == 1, format!("turn {i}: {} arcs", arcs.len()))?;
        let (len, end) = common::polyline_length_ft(arcs[0], dpsi, 10_000);
        check(end.distance(arcs[0].end) < 1e-6, format!("turn {i}: polyline misses the arc end"))?;
        let err = (len - arcs[0].reported_beta * FT_PER_NMI).abs();
        worst = worst.max(err);
        check(err < 0.1, format!("turn {i}: error {err} ft"))?;
    }
    Ok(format!("1000 feasible turns, worst polyline error {worst:.2e} ft"))
}

fn widening_bound_holds() -> Outcome {
    let cfg = ExperimentConfig::new(Algorithm::Mcts);
    let mut mdp = cfg.build_mdp().map_err(|e| e.to_string())?;
    let sc = SearchConfig::default();
    let mut search = Mcts::new(&mut mdp, sc, cfg.master_seed).map_err(|e| e.to_string())?;
    search.search().map_err(|e| e.to_string())?;
    let nodes = search.nodes();
    for (i, n) in nodes.iter().enumerate() {
        let bound = widening_bound(sc.pw_k, sc.pw_alpha, n.visits) + 1.0;
        check(
            n.children.len() as f64 <= bound,
            format!("node {i}: {} actions, N = {}", n.children.len(), n.visits),
        )?;
        for (seed, a) in &n.children {
            check(a.cached.is_some(), format!("node {i}, action {seed}: no cached child"))?;
        }
    }
    Ok(format!("{} state nodes within k*N^alpha + 1, one cached child per action", nodes.len()))
}

fn budget_exactness() -> Outcome {
    let mut seen = Vec::new();
    for algo in Algorithm::ALL {
        for episodes in [1, 97, 500, 5000] {
            let mut cfg = ExperimentConfig::new(algo);
            cfg.episodes = episodes;
            let exp = run_experiment(&cfg).map_err(|e| e.to_string())?;
            check(
                exp.evaluations == episodes as u64 && exp.records.len() == episodes,
                format!("{algo} at {episodes}: {} evaluations", exp.evaluations),
            )?;
        }
        seen.push(algo.to_string());
    }
    Ok(format!("{} at budgets 1, 97, 500, 5000", seen.join(", ")))
}

fn cem_improvement() -> Outcome {
    let cfg = ExperimentConfig::new(Algorithm::Cem);
    check(cfg.cem_config() == CemConfig::default(), "budget-derived CEM settings differ from default")?;
    let exp = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let means = &exp.cem_iteration_mean_miss;
    let (first, last) = (means[0], means[means.len() - 1]);
    check(last < first, format!("mean miss first {first:.1}, last {last:.1}"))?;
    let truth = EnvDistribution::default();
    let pop = exp.manifest.cem_population.ok_or("no population in manifest")?;
    let mut failures = 0;
    for r in exp.records.iter().filter(|r| r.event) {
        let proposal = &exp.manifest.cem_proposals[(r.index - 1) / pop];
        let want: f64 = r
            .seeds
            .iter()
            .map(|&s| log_density(&sample_disturbance(s, proposal), &truth))
            .sum();
        let got = r.logp.ok_or(format!("episode {} has no log-likelihood", r.index))?;
        check(close(got, want, 1e-9 * want.abs().max(1.0)), format!("episode {}: {got} != {want}", r.index))?;
        failures += 1;
    }
    check(failures > 0, "no failures to check")?;
    Ok(format!(
        "mean miss {first:.1} -> {last:.1}; {failures} failures carry true log-likelihood"
    ))
}

fn likelihood_oracle() -> Outcome {
    let dist = EnvDistribution::default();
    let hand: f64 = dist
        .sigma
        .iter()
        .map(|s| -(s * (2.0 * std::f64::consts::PI).sqrt()).ln())
        .sum();
    let at_mean = Disturbance::from_raw(dist.mu);
    let lp = log_density(&at_mean, &dist);
    check(close(lp, -17.754, 1e-3), format!("log density at mean {lp}"))?;
    check(close(lp, hand, 1e-12), format!("log density {lp} vs hand {hand}"))?;
    for i in 0..4 {
        let mut x = dist.mu;
        x[i] += dist.sigma[i];
        let shifted = log_density(&Disturbance::from_raw(x), &dist);
        check(close(shifted - lp, -0.5, 1e-9), format!("component {i}: {}", shifted - lp))?;
    }
    Ok(format!("log density at mean {lp:.4}; 1-sigma shifts give -0.5"))
}

// ---------------------------------------------------------------------------

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("determinism", determinism),
        ("defect-off soundness", defect_off_soundness),
        ("qualitative ordering", qualitative_ordering),
        ("reward unit suite", reward_suite),
        ("miss/event consistency", miss_event_consistency),
        ("arc oracle", arc_oracle),
        ("progressive widening bound", widening_bound_holds),
        ("budget exactness", budget_exactness),
        ("CEM improvement", cem_improvement),
        ("Gaussian likelihood oracle", likelihood_oracle),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {:2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
