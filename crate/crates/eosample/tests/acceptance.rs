//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fail.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::time::Instant as Clock;

use eosample::config::{RunConfig, ScenarioSource, ScenarioSpecFile};
use eosample::core::detect::{label_components, temperature_to_flux, BinaryMask};
use eosample::core::evaluate::{
    bundled_manifest, rank_configurations, ConfigurationEvaluation, ConstellationConfig, EvaluationParams,
};
use eosample::core::orbit::{orbital_period, propagate, sso_inclination, uniform_times, OrbitSpec};
use eosample::core::scenario::{generate_synthetic_scenario, NatureRunGrid, ScenarioSpec, PRECTOT};
use eosample::core::stats::{
    fit_density, kde_plain, kde_reflected, kl_divergence, percentile, silverman_bandwidth, IntegrationBounds,
};
use eosample::core::Instant;
use eosample::pipeline::{cmd_evaluate, detect_clusters, evaluate_all, study_window, CURVES_DIR, RANKING_CSV};
use rand::Rng;
use rand_distr::{Distribution, Exp, LogNormal};

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1_threshold() -> Outcome {
    let f = temperature_to_flux(220.0).map_err(|e| e.to_string())?;
    check((f - 132.8).abs() <= 0.05, format!("sigma*220^4 = {f:.4} W/m2 (want 132.8 +/- 0.05)"))
}

fn c2_labeling() -> Outcome {
    let mut rng = support::rng(2024);
    let (rows, cols) = (50, 50);
    let mut mismatches = 0;
    for k in 0..200 {
        let density = 0.1 + 0.6 * k as f64 / 199.0;
        let cells = support::random_mask(&mut rng, rows, cols, density);
        let oracle = support::flood_fill_components(rows, cols, &cells);
        let mask = BinaryMask::from_cells(rows, cols, cells, Instant::from_unix(0)).map_err(|e| e.to_string())?;
        if !support::same_partition(label_components(&mask).labels(), &oracle) {
            mismatches += 1;
        }
    }
    check(mismatches == 0, format!("{mismatches}/200 masks differ from flood fill"))
}

// Frozen from scripts/oracles.py.
const ORACLE_SSO_INCLINATION_700: f64 = 98.187956351951;
const ORACLE_PERIOD_700: f64 = 5926.379071134441;

fn c3_orbit() -> Outcome {
    let i = sso_inclination(700.0).map_err(|e| e.to_string())?;
    let p = orbital_period(700.0).map_err(|e| e.to_string())?;
    let ok = (i - 98.19).abs() <= 0.1
        && (p - 5926.0).abs() <= 2.0
        && (i - ORACLE_SSO_INCLINATION_700).abs() < 1e-9
        && (p - ORACLE_PERIOD_700).abs() < 1e-6;
    check(ok, format!("i = {i:.6} deg (oracle {ORACLE_SSO_INCLINATION_700:.6}), T = {p:.3} s (oracle {ORACLE_PERIOD_700:.3})"))
}

fn c4_sso_local_time() -> Outcome {
    let epoch = Instant::from_civil(2005, 7, 15, 0, 0, 0);
    let end = Instant::from_civil(2005, 9, 15, 0, 0, 0);
    let times = uniform_times(epoch, end, 20).map_err(|e| e.to_string())?;
    let track = propagate(&OrbitSpec::sun_synchronous(20.0, 700.0, epoch), &times, 1).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    let mut crossings = 0;
    for w in track.samples.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if !(a.lat < 0.0 && b.lat >= 0.0) {
            continue;
        }
        crossings += 1;
        let frac = -a.lat / (b.lat - a.lat);
        let mut dlon = b.lon - a.lon;
        if dlon > 180.0 {
            dlon -= 360.0;
        } else if dlon < -180.0 {
            dlon += 360.0;
        }
        let lon = a.lon + frac * dlon;
        let t = a.time.unix() as f64 + frac * (b.time - a.time) as f64;
        let utc_hours = t.rem_euclid(86_400.0) / 3600.0;
        let local = (utc_hours + lon / 15.0).rem_euclid(24.0);
        let off_minutes = ((local - 20.0 + 12.0).rem_euclid(24.0) - 12.0) * 60.0;
        worst = worst.max(off_minutes.abs());
    }
    let expected = 62.0 * 86_400.0 / orbital_period(700.0).unwrap();
    check(
        worst <= 10.0 && (crossings as f64 - expected).abs() < 3.0,
        format!("{crossings} ascending crossings, worst offset from 20:00 = {worst:.2} min"),
    )
}

fn c5_kde() -> Outcome {
    let mut rng = support::rng(55);
    let data: Vec<f64> = support::normals(&mut rng, 1000, 0.0, 1.0).into_iter().map(f64::abs).collect();
    let h = silverman_bandwidth(&data).map_err(|e| e.to_string())?;
    let mu = (2.0 / std::f64::consts::PI).sqrt();
    let top = mu + 8.0;
    let nodes: Vec<f64> = (0..=8000).map(|k| k as f64 * top / 8000.0).collect();
    let refl = kde_reflected(&data, &nodes, h).map_err(|e| e.to_string())?;
    let plain = kde_plain(&data, &nodes, h).map_err(|e| e.to_string())?;
    let f0 = 2.0 * support::normal_pdf(0.0, 0.0, 1.0);
    let integral = refl.integral();
    let refl_err = (refl.density[0] / f0 - 1.0).abs();
    let plain_err = (plain.density[0] / f0 - 1.0).abs();
    check(
        (integral - 1.0).abs() <= 1e-3 && refl_err <= 0.15 && plain_err > 0.15,
        format!(
            "integral {integral:.5}; f(0) error reflected {:.1}%, plain {:.1}%",
            100.0 * refl_err,
            100.0 * plain_err
        ),
    )
}

fn c6_kl() -> Outcome {
    let mut rng = support::rng(66);
    let err = |e: eosample::core::stats::StatsError| e.to_string();

    let same: Vec<f64> = (0..500).map(|_| Exp::new(1.0).unwrap().sample(&mut rng)).collect();
    let b = IntegrationBounds::from_percentiles(&same, 0.0, 99.0, 512).map_err(err)?;
    let f = fit_density(&same, &b, true).map_err(err)?;
    let self_kl = kl_divergence(&f, &f, &b).map_err(err)?;

    let g_samples = support::normals(&mut rng, 20_000, 0.0, 1.0);
    let f_samples = support::normals(&mut rng, 20_000, 0.5, 1.0);
    let upper = percentile(&g_samples, 99.0).map_err(err)?;
    let bounds = IntegrationBounds::new(0.0, upper, 512).map_err(err)?;
    let kl = kl_divergence(
        &fit_density(&f_samples, &bounds, false).map_err(err)?,
        &fit_density(&g_samples, &bounds, false).map_err(err)?,
        &bounds,
    )
    .map_err(err)?;
    let truth = support::simpson(
        |x| {
            let p = support::normal_pdf(x, 0.5, 1.0);
            p * (p / support::normal_pdf(x, 0.0, 1.0)).ln()
        },
        0.0,
        upper,
        4000,
    );
    let rel = ((kl - truth) / truth).abs();

    let fixtures: Vec<Vec<f64>> = (0..10)
        .map(|k| {
            let n = 60 + 50 * k;
            match k % 3 {
                0 => (0..n).map(|_| Exp::new(0.5 + k as f64 * 0.2).unwrap().sample(&mut rng)).collect(),
                1 => (0..n).map(|_| LogNormal::new(0.2, 0.5).unwrap().sample(&mut rng)).collect(),
                _ => (0..n).map(|_| rng.random_range(0.0..4.0)).collect(),
            }
        })
        .collect();
    let hmax = fixtures.iter().map(|s| silverman_bandwidth(s).unwrap()).fold(0.0, f64::max);
    let top = fixtures.iter().flatten().cloned().fold(0.0, f64::max) + 8.0 * hmax;
    let shared = IntegrationBounds::new(0.0, top, 2048).map_err(err)?;
    let fits: Vec<_> = fixtures.iter().map(|s| fit_density(s, &shared, true)).collect::<Result<_, _>>().map_err(err)?;
    let mut min_kl = f64::INFINITY;
    for a in &fits {
        for b in &fits {
            min_kl = min_kl.min(kl_divergence(a, b, &shared).map_err(err)?);
        }
    }
    check(
        self_kl.abs() <= 1e-9 && rel <= 0.10 && min_kl >= -1e-6,
        format!(
            "(a) KL(f,f) = {self_kl:e}; (b) KL = {kl:.5} vs oracle {truth:.5} ({:.2}% off); (c) min pairwise KL = {min_kl:.3e}",
            100.0 * rel
        ),
    )
}

struct Study {
    configs: Vec<ConstellationConfig>,
    evaluations: Vec<ConfigurationEvaluation>,
    grid: NatureRunGrid,
}

fn evaluate_grid(grid: &NatureRunGrid, configs: &[ConstellationConfig]) -> Result<Vec<ConfigurationEvaluation>, String> {
    let params = EvaluationParams::default();
    let clusters = detect_clusters(grid, 220.0).map_err(|e| e.to_string())?;
    evaluate_all(configs, &clusters, study_window(grid, params.cadence_s), &params).map_err(|e| e.to_string())
}

fn headline_study() -> Result<Study, String> {
    let spec = ScenarioSpec::default();
    let grid = generate_synthetic_scenario(&spec).map_err(|e| e.to_string())?;
    let configs = bundled_manifest();
    let evaluations = evaluate_grid(&grid, &configs)?;
    Ok(Study { configs, evaluations, grid })
}

fn c7_headline(study: &Study) -> Outcome {
    let kl = |id: u32| study.evaluations.iter().find(|e| e.result.config_id == id).and_then(|e| e.result.kl_divergence);
    let (k8, k5) = (kl(8).ok_or("config 8 unscored")?, kl(5).ok_or("config 5 unscored")?);

    let mut pairs = 0;
    let mut violations = Vec::new();
    for (a, ea) in study.configs.iter().zip(&study.evaluations) {
        for (b, eb) in study.configs.iter().zip(&study.evaluations) {
            if a.n_satellites() == 2 && b.n_satellites() == 1 && a.is_superset_of(b) {
                pairs += 1;
                if ea.result.n_observed < eb.result.n_observed {
                    violations.push(format!("{} < {}", a.config_id, b.config_id));
                }
            }
        }
    }

    let rerun = evaluate_grid(&study.grid, &study.configs)?;
    let results: Vec<_> = study.evaluations.iter().map(|e| e.result.clone()).collect();
    let rerun_results: Vec<_> = rerun.iter().map(|e| e.result.clone()).collect();
    let ranked = rank_configurations(&results).map_err(|e| e.to_string())?;
    let deterministic = results == rerun_results && rerun.iter().zip(&study.evaluations).all(|(a, b)| a.outcomes == b.outcomes);

    check(
        k8 < k5 && violations.is_empty() && pairs > 0 && ranked.len() == 20 && deterministic,
        format!(
            "(a) KL 2xSSO-20:00 = {k8:.4} < 1xSSO-00:00 = {k5:.4}; (b) {pairs} superset pairs, violations {violations:?}; (c) {} rows, deterministic {deterministic}",
            ranked.len()
        ),
    )
}

fn c8_scale(study: &Study) -> Outcome {
    let scaled = study.grid.scaled(PRECTOT, 1000.0).map_err(|e| e.to_string())?;
    let evals = evaluate_grid(&scaled, &study.configs)?;
    let mut worst: f64 = 0.0;
    for (a, b) in study.evaluations.iter().zip(&evals) {
        match (a.result.kl_divergence, b.result.kl_divergence) {
            (Some(x), Some(y)) => worst = worst.max((x - y).abs()),
            (None, None) => {}
            _ => return Err(format!("config {} scored in only one unit system", a.result.config_id)),
        }
    }
    let order = |e: &[ConfigurationEvaluation]| -> Result<Vec<u32>, String> {
        let r: Vec<_> = e.iter().map(|x| x.result.clone()).collect();
        Ok(rank_configurations(&r).map_err(|e| e.to_string())?.iter().map(|r| r.result.config_id).collect())
    };
    let same_order = order(&study.evaluations)? == order(&evals)?;
    check(worst <= 1e-6 && same_order, format!("max |dKL| = {worst:.3e}; ranking order identical {same_order}"))
}

fn c9_determinism() -> Outcome {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let cfg = RunConfig {
        scenario: ScenarioSource::Synthetic(ScenarioSpecFile::default()),
        out_dir: dir.path().join("run"),
        ..RunConfig::default()
    };
    let snapshot = || -> Result<Vec<(String, Vec<u8>)>, String> {
        cmd_evaluate(&cfg).map_err(|e| e.to_string())?;
        let mut files = vec![cfg.out_dir.join(RANKING_CSV)];
        let mut curves: Vec<_> = std::fs::read_dir(cfg.out_dir.join(CURVES_DIR))
            .map_err(|e| e.to_string())?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        curves.sort();
        files.extend(curves);
        files
            .into_iter()
            .map(|p| std::fs::read(&p).map(|b| (p.display().to_string(), b)).map_err(|e| e.to_string()))
            .collect()
    };
    let first = snapshot()?;
    let second = snapshot()?;
    check(
        first == second && first.len() > 1,
        format!("{} files (ranking + curves) byte-identical across runs: {}", first.len(), first == second),
    )
}

fn main() {
    let mut failed = 0;
    let mut report = |label: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Clock::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS  {label}: {d} [{secs:.2}s]"),
            Err(d) => {
                failed += 1;
                println!("FAIL  {label}: {d} [{secs:.2}s]");
            }
        }
    };
    report("1 threshold flux", &mut c1_threshold);
    report("2 labeling oracle", &mut c2_labeling);
    report("3 orbital mechanics", &mut c3_orbit);
    report("4 SSO local time", &mut c4_sso_local_time);
    report("5 KDE boundary", &mut c5_kde);
    report("6 KL divergence", &mut c6_kl);
    let start = Clock::now();
    let study = headline_study();
    let setup = start.elapsed().as_secs_f64();
    match &study {
        Ok(s) => {
            println!("      62-day scenario evaluated in {setup:.2}s");
            report("7 headline direction", &mut || c7_headline(s));
            report("8 scale invariance", &mut || c8_scale(s));
        }
        Err(e) => {
            report("7 headline direction", &mut || Err(e.clone()));
            report("8 scale invariance", &mut || Err(e.clone()));
        }
    }
    report("9 end-to-end determinism", &mut c9_determinism);
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
