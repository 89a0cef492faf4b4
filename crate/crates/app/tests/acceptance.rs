//! Acceptance suite: one PASS/FAIL line per criterion at its stated
//! tolerance. INFO lines are printed for context and never fail the run.

use std::f64::consts::PI;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use gelo::diagnostics::gaussian_cdf_expectation;
use gelo::evaluation::{run_synthetic_comparison, EvaluationSpec, Method, RealizationResult, SyntheticSetup};
use gelo::identification::{gradient_at, log_likelihood_at, ModelPoint, Observation};
use gelo::math;
use gelo::outcome_model::{
    beta_base_change, beta_logistic_to_gaussian, binomial_ac_params, free_alpha_count, AcParams, GaussianMatch,
    OutcomeScale,
};
use gelo::rating_engine::{run_matches, EloScore, EngineConfig, MatchRecord, SkillState, TrajectoryOptions};
use gelo::simulation::{player_id, simulate, SimConfig, StepPolicy};
use gelo_app::config::{Preset, RunConfig};
use gelo_app::csv_io::{ingest_matches, write_matches, IngestOptions};
use gelo_app::pipeline::{run_convergence, run_evaluate, ConvergenceOutput};
use gelo_app::studies::{ensemble_convergence, scale_fit, ScaleFitReport};
use tempfile::TempDir;

const REALIZATIONS: usize = 200;

#[derive(Default)]
struct Suite {
    passed: usize,
    failed: Vec<String>,
}

impl Suite {
    fn check(&mut self, id: &str, what: &str, ok: bool, detail: impl AsRef<str>) {
        println!("{} [{id}] {what} | {}", if ok { "PASS" } else { "FAIL" }, detail.as_ref());
        if ok {
            self.passed += 1;
        } else {
            self.failed.push(format!("{id} {what}"));
        }
    }

    fn info(&self, id: &str, what: &str, detail: impl AsRef<str>) {
        println!("INFO [{id}] {what} | {}", detail.as_ref());
    }

    fn skip(&self, id: &str, what: &str, detail: impl AsRef<str>) {
        println!("SKIP [{id}] {what} | {}", detail.as_ref());
    }

    fn error(&mut self, id: &str, what: &str, err: impl std::fmt::Display) {
        self.check(id, what, false, format!("error: {err}"));
    }
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn prop2_exactness(suite: &mut Suite) {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for levels in 2..=6 {
        for scale in [1.0, 174.0, 400.0] {
            let model = binomial_ac_params(levels, scale, 0.0).unwrap();
            let n = 2001;
            for i in 0..n {
                let z = -5.0 * scale + 10.0 * scale * i as f64 / (n - 1) as f64;
                let x = z / (scale * (levels - 1) as f64);
                let oracle = 1.0 / (1.0 + (-x).exp());
                let g = model.expected_score(z, false).unwrap();
                worst = worst.max((g - oracle).abs());
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    suite.check(
        "1",
        "binomial AC expected score equals rescaled logistic",
        worst < 1e-12 && elapsed < 1.0,
        format!("max |diff| = {worst:.2e} (tol 1e-12) over L=2..6, z in [-5s,5s]; {elapsed:.3} s (limit 1 s)"),
    );
}

fn conversion_constants(suite: &mut Suite) {
    let base = beta_base_change(10.0).unwrap().factor;
    suite.check(
        "2a",
        "base-10 to natural base factor",
        within(base, 10f64.ln(), 1e-12),
        format!("{base:.15} vs ln 10 = {:.15}", 10f64.ln()),
    );
    let derivative = beta_logistic_to_gaussian(GaussianMatch::Derivative).factor;
    let oracle = 4.0 / (2.0 * PI).sqrt();
    suite.check(
        "2b",
        "logistic to Gaussian factor, slope match",
        within(derivative, oracle, 1e-12) && format!("{derivative:.1}") == "1.6",
        format!("{derivative:.15} vs 4/sqrt(2 pi) = {oracle:.15} (~1.6)"),
    );
    let moment = beta_logistic_to_gaussian(GaussianMatch::Moment).factor;
    let oracle = PI / 3f64.sqrt();
    suite.check(
        "2c",
        "logistic to Gaussian factor, variance match",
        within(moment, oracle, 1e-12) && format!("{moment:.1}") == "1.8",
        format!("{moment:.15} vs pi/sqrt(3) = {oracle:.15} (~1.8)"),
    );
    match Preset::Fifa.config().canonical_scale() {
        Ok(s) => suite.check(
            "2d",
            "FIFA canonical scale 600/ln 10",
            within(s, 260.6, 0.1),
            format!("{s:.4} vs 260.6 +- 0.1"),
        ),
        Err(e) => suite.error("2d", "FIFA canonical scale 600/ln 10", e),
    }
}

fn example1(suite: &mut Suite) {
    let config = Preset::Example1.config();
    let engine = config.engine_config().unwrap();
    let scale = config.canonical_scale().unwrap();
    let stride = config.trajectory_stride().unwrap_or(15);
    let burn_in = config.burn_in();
    let base = config.sim_config().unwrap();
    let cases = [
        ("3a", "K drawn from {10,20,30} per realization", base.clone(), 1762.0),
        (
            "3b",
            "constant K = 60",
            SimConfig {
                step_policy: StepPolicy::constant(60.0),
                ..base.clone()
            },
            5807.0,
        ),
    ];
    for (id, label, sim, reference) in cases {
        let start = Instant::now();
        let study = match ensemble_convergence(&sim, &engine, scale, REALIZATIONS, stride, burn_in) {
            Ok(s) => s,
            Err(e) => {
                suite.error(id, label, e);
                continue;
            }
        };
        let rel = study.converged_variance / study.predicted_variance - 1.0;
        suite.check(
            id,
            &format!("binary ensemble converged variance, {label}"),
            rel.abs() <= 0.15,
            format!(
                "{:.0} vs sK/2 = {:.0} ({:+.1}%, tol 15%; reference measurement {reference:.0}); J={}, {:.1} s",
                study.converged_variance,
                study.predicted_variance,
                100.0 * rel,
                study.realizations,
                start.elapsed().as_secs_f64()
            ),
        );
        suite.check(
            &format!("{id}-band"),
            &format!("binary ensemble mean inside +-sqrt(v) band, {label}"),
            study.deviation_band_coverage >= 0.90,
            format!(
                "{:.1}% of {} checkpoint cells (need >= 90%)",
                100.0 * study.deviation_band_coverage,
                study.rows.len()
            ),
        );
        suite.info(
            id,
            "ensemble mean within its own standard error sqrt(var/J) of the curve",
            format!("{:.1}% of cells; mean bias after burn-in {:+.2}", 100.0 * study.mean_error_band_coverage, study.converged_bias),
        );
    }
    let per_match = SimConfig {
        step_policy: StepPolicy::uniform_choice(vec![10.0, 20.0, 30.0]),
        ..base
    };
    match ensemble_convergence(&per_match, &engine, scale, REALIZATIONS, stride, burn_in) {
        Ok(study) => suite.info(
            "3c",
            "K drawn afresh for every match",
            format!(
                "variance {:.0} vs sK/2 {:.0}; linear theory s E[K^2]/(2 E[K]) = {:.0}",
                study.converged_variance,
                study.predicted_variance,
                scale * (100.0 + 400.0 + 900.0) / 3.0 / (2.0 * 20.0)
            ),
        ),
        Err(e) => suite.info("3c", "K drawn afresh for every match", format!("error: {e}")),
    }
}

fn table1_row(report: &ScaleFitReport, name: &str) -> (f64, f64, f64, f64) {
    let row = report.row(name).expect("scale-fit row");
    (row.beta.mean, row.beta.std, row.eta.mean, row.log_score.mean)
}

fn table1(suite: &mut Suite) {
    let config = Preset::Example1.config();
    let engine = config.engine_config().unwrap();
    let scale = config.canonical_scale().unwrap();
    let base = config.sim_config().unwrap();
    let window = base.matches - 2000..base.matches;
    let cases: [(&str, f64, [f64; 3]); 2] = [("4a", 20.0, [0.59, 0.59, 0.59]), ("4b", 60.0, [0.62, 0.60, 0.60])];
    for (id, step, ls_ref) in cases {
        let sim = SimConfig {
            step_policy: StepPolicy::constant(step),
            ..base.clone()
        };
        let start = Instant::now();
        let report = match scale_fit(&sim, &engine, scale, REALIZATIONS, window.clone()) {
            Ok(r) => r,
            Err(e) => {
                suite.error(id, &format!("binary scale fit, K = {step}"), e);
                continue;
            }
        };
        let (beta, beta_std, eta, _) = table1_row(&report, "data-fit");
        if step == 20.0 {
            suite.check(
                id,
                "binary scale fit, data-fit scale, K = 20",
                within(beta, 1.13, 0.08),
                format!("beta {beta:.3} (std {beta_std:.3}) vs 1.13 +- 0.08"),
            );
            suite.check(
                id,
                "binary scale fit, data-fit advantage, K = 20",
                within(eta, 0.34, 0.08),
                format!("eta {eta:.3} vs 0.34 +- 0.08"),
            );
        } else {
            suite.check(
                id,
                "binary scale fit, data-fit scale, K = 60",
                within(beta, 1.45, 0.10),
                format!("beta {beta:.3} (std {beta_std:.3}) vs 1.45 +- 0.10; eta {eta:.3} (reference 0.33)"),
            );
        }
        let names = ["no-correction", "theoretical", "data-fit"];
        let ls: Vec<f64> = names.iter().map(|n| table1_row(&report, n).3).collect();
        let ok = ls.iter().zip(&ls_ref).all(|(v, r)| within(*v, *r, 0.02));
        suite.check(
            id,
            &format!("binary scale fit log-scores, K = {step}"),
            ok,
            format!(
                "({:.3}, {:.3}, {:.3}) vs ({:.2}, {:.2}, {:.2}) +- 0.02; J={}, {:.1} s",
                ls[0],
                ls[1],
                ls[2],
                ls_ref[0],
                ls_ref[1],
                ls_ref[2],
                report.realizations,
                start.elapsed().as_secs_f64()
            ),
        );
        let (theory, _, theory_eta, _) = table1_row(&report, "theoretical");
        if step == 20.0 {
            suite.check(
                id,
                "theoretical noise inflation, K = 20",
                (1.05..=1.20).contains(&theory),
                format!("beta_err {theory:.3} in [1.05, 1.20] (reference 1.10); eta {theory_eta:.3} (reference 0.34)"),
            );
        } else {
            suite.info(
                id,
                "theoretical noise inflation, K = 60",
                format!("beta_err {theory:.3} (reference 1.40); eta {theory_eta:.3} (reference 0.33)"),
            );
        }
    }
}

/// Reference log-scores `(mean, std)` by method for `K = 20` and `K = 60`.
fn table2_reference(method: Method) -> Option<[(f64, f64); 2]> {
    Some(match method {
        Method::Conventional => [(1.118, 0.010), (1.161, 0.011)],
        Method::SimpleNoHfa => [(0.999, 0.007), (1.026, 0.008)],
        Method::SimpleWithHfa => [(0.990, 0.008), (1.017, 0.008)],
        Method::OptimalScaling => [(0.989, 0.008), (1.004, 0.007)],
        Method::FullyAdaptive => [(0.987, 0.007), (1.003, 0.007)],
        Method::GeloReference => [(0.984, 0.007), (0.997, 0.007)],
        Method::GroundTruth => [(0.976, 0.007), (0.976, 0.007)],
        Method::OnlineAdaptive => return None,
    })
}

fn log_scores(results: &[RealizationResult], method: Method) -> Option<Vec<f64>> {
    results
        .iter()
        .map(|r| r.outcomes.iter().find(|o| o.method == method)?.log_score)
        .collect()
}

fn table2(suite: &mut Suite) {
    let spec = EvaluationSpec::example4();
    for (k, step) in [20.0, 60.0].into_iter().enumerate() {
        let id = if k == 0 { "5a" } else { "5b" };
        let start = Instant::now();
        let outcome = SyntheticSetup::example4(step)
            .and_then(|setup| run_synthetic_comparison(&spec, &setup, REALIZATIONS));
        let (report, results) = match outcome {
            Ok(r) => r,
            Err(e) => {
                suite.error(id, &format!("ternary method comparison, K = {step}"), e);
                continue;
            }
        };
        let elapsed = start.elapsed().as_secs_f64();
        let mut misses = Vec::new();
        let mut lines = Vec::new();
        for summary in &report.methods {
            let Some(ls) = summary.log_score else {
                misses.push(format!("{} has no log-score", summary.method.name()));
                continue;
            };
            match table2_reference(summary.method) {
                Some(reference) => {
                    let (mean, std) = reference[k];
                    let z = (ls.mean - mean) / std;
                    lines.push(format!("{} {:.3} ({:+.1} sd)", summary.method.name(), ls.mean, z));
                    if z.abs() > 2.0 {
                        misses.push(format!("{} {:.3} vs {mean:.3} +- 2x{std:.3}", summary.method.name(), ls.mean));
                    }
                }
                None => suite.info(
                    id,
                    &format!("online-adaptive log-score, K = {step}"),
                    format!("{:.3} (std {:.3}); no reference row", ls.mean, ls.std),
                ),
            }
        }
        suite.check(
            id,
            &format!("ternary comparison log-scores within 2 reference stds, K = {step}"),
            misses.is_empty(),
            if misses.is_empty() {
                format!("{}; J={}, {elapsed:.1} s", lines.join(", "), report.realizations)
            } else {
                format!("misses: {}", misses.join("; "))
            },
        );
        table2_ordering(suite, id, step, k, &results);
        for (method, reference) in [
            (Method::OptimalScaling, [0.89, 1.18]),
            (Method::FullyAdaptive, [0.86, 1.16]),
            (Method::GeloReference, [1.12, 1.40]),
        ] {
            if let Some(beta) = report.method(method).and_then(|m| m.beta) {
                suite.info(
                    id,
                    &format!("{} scale, K = {step}", method.name()),
                    format!("beta {:.3} (std {:.3}); reference {:.2}", beta.mean, beta.std, reference[k]),
                );
            }
        }
    }
}

/// Checks the ordering chain on ensemble means. Relations that the chain
/// states as strict need a gap of at least one paired standard error where
/// the reference table separates the two methods by 0.002 or more.
fn table2_ordering(suite: &mut Suite, id: &str, step: f64, k: usize, results: &[RealizationResult]) {
    use Method::*;
    let chain = [
        (Conventional, SimpleNoHfa, true),
        (SimpleNoHfa, SimpleWithHfa, true),
        (SimpleWithHfa, OptimalScaling, false),
        (OptimalScaling, FullyAdaptive, false),
        (FullyAdaptive, GeloReference, false),
        (GeloReference, GroundTruth, false),
    ];
    let mut broken = Vec::new();
    let mut parts = Vec::new();
    for (worse, better, strict) in chain {
        let (Some(a), Some(b)) = (log_scores(results, worse), log_scores(results, better)) else {
            broken.push(format!("{} or {} missing", worse.name(), better.name()));
            continue;
        };
        let diffs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let n = diffs.len() as f64;
        let gap = diffs.iter().sum::<f64>() / n;
        let sd = (diffs.iter().map(|d| (d - gap).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let se = sd / n.sqrt();
        let separation = table2_reference(worse).unwrap()[k].0 - table2_reference(better).unwrap()[k].0;
        let ok = if strict && separation >= 0.002 { gap >= se } else { gap >= 0.0 };
        parts.push(format!("{}{}{:.4}", if strict { ">" } else { ">=" }, if ok { "" } else { "!" }, gap));
        if !ok {
            broken.push(format!("{} vs {}: gap {gap:.4}, paired se {se:.4}", worse.name(), better.name()));
        }
    }
    suite.check(
        id,
        &format!("ternary comparison method ordering, K = {step}"),
        broken.is_empty(),
        if broken.is_empty() {
            format!("successive gaps {}", parts.join(" "))
        } else {
            broken.join("; ")
        },
    );
}

fn draw_table(suite: &mut Suite) {
    let alphas = [-1.0, 0.0, 0.7, 1.0, 2.0];
    let expected = ["0.16", "0.33", "0.50", "0.58", "0.79"];
    let mut got = Vec::new();
    let mut ok = true;
    for (a, e) in alphas.iter().zip(expected) {
        let model = AcParams::symmetric(&[*a], OutcomeScale::uniform(3).unwrap(), 1.0, 0.0).unwrap();
        let p = model.prob(1, 0.0, false).unwrap();
        let oracle = a.exp() / (2.0 + a.exp());
        ok &= (p - oracle).abs() < 1e-12 && format!("{p:.2}") == e;
        got.push(format!("{p:.2}"));
    }
    suite.check(
        "6",
        "draw probability at zero difference",
        ok,
        format!("[{}] vs [{}]", got.join(", "), expected.join(", ")),
    );
}

fn property_spot_checks(suite: &mut Suite) {
    // normalization and outcome symmetry
    let mut worst: f64 = 0.0;
    for levels in 2..=6 {
        let free: Vec<f64> = (0..free_alpha_count(levels)).map(|i| -0.7 + 0.45 * i as f64).collect();
        let model = AcParams::symmetric(&free, OutcomeScale::uniform(levels).unwrap(), 174.0, 0.3).unwrap();
        for i in -40..=40 {
            let z = 25.0 * i as f64;
            let p = model.probs(z, false).unwrap();
            let q = model.probs(-z, false).unwrap();
            worst = worst.max((p.iter().sum::<f64>() - 1.0).abs());
            for y in 0..levels {
                worst = worst.max((p[y] - q[levels - 1 - y]).abs());
            }
        }
    }
    suite.check("7a", "AC normalization and symmetry", worst < 1e-12, format!("max error {worst:.2e} (tol 1e-12)"));

    // analytic gradient against central differences
    let scores = OutcomeScale::uniform(3).unwrap();
    let samples: Vec<Observation> = (0..300)
        .map(|i| Observation::new(((i * 37) % 401) as f64 - 200.0, (i * 7) % 3, i % 4 != 0))
        .collect();
    let point = ModelPoint {
        gamma: 0.9,
        hfa: 0.25,
        free_alpha: vec![-0.5],
    };
    let grad = gradient_at(&samples, 174.0, &scores, &point);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for (i, g) in grad.iter().enumerate() {
        let bump = |d: f64| {
            let mut p = point.clone();
            match i {
                0 => p.gamma += d,
                1 => p.hfa += d,
                _ => p.free_alpha[i - 2] += d,
            }
            log_likelihood_at(&samples, 174.0, &scores, &p)
        };
        let fd = (bump(h) - bump(-h)) / (2.0 * h);
        worst = worst.max((g - fd).abs() / g.abs().max(1.0));
    }
    suite.check("7b", "gradient matches central differences", worst < 1e-6, format!("max relative error {worst:.2e} (tol 1e-6)"));

    // engine zero-sum and scale equivariance
    let sim = SimConfig {
        matches: 3000,
        ..SimConfig::example4(20.0)
    };
    let log = simulate(&sim).unwrap().matches;
    let run = |config: EngineConfig, records: &[MatchRecord]| {
        let mut state = SkillState::with_skills(config.clone(), (0..sim.players).map(|i| (player_id(i), 0.0))).unwrap();
        run_matches(&mut state, records, TrajectoryOptions::diffs_only()).unwrap();
        state
    };
    let params = AcParams::symmetric(&[-0.4], scores.clone(), 174.0, 0.35).unwrap();
    let mut worst_sum: f64 = 0.0;
    let mut worst_scale: f64 = 0.0;
    for config in [EngineConfig::elo(174.0, 0.2, scores.clone()), EngineConfig::gelo(&params)] {
        let a = run(config.clone(), &log);
        worst_sum = worst_sum.max(a.total_skill().abs() / config.scale);
        let c = 2.5;
        let scaled_log: Vec<MatchRecord> = log.iter().cloned().map(|mut m| {
            m.step *= c;
            m
        }).collect();
        let b = run(EngineConfig { scale: config.scale * c, ..config }, &scaled_log);
        for (x, y) in a.skills().iter().zip(b.skills()) {
            worst_scale = worst_scale.max((x * c - y).abs() / (1.0 + y.abs()));
        }
    }
    suite.check(
        "7c",
        "engine zero-sum and scale equivariance",
        worst_sum < 1e-10 && worst_scale < 1e-10,
        format!("|sum|/s {worst_sum:.2e}, scaling error {worst_scale:.2e} (tol 1e-10)"),
    );

    // Gaussian-CDF integral identity against quadrature
    let mut worst: f64 = 0.0;
    for (b, y, z, q) in [(1.0, 0.0, 0.0, 1.0), (1.6, 0.7, -0.2, 0.5), (0.4, -1.5, 0.9, 2.3), (2.0, 3.0, -1.0, 0.1)] {
        let closed = gaussian_cdf_expectation(b, y, z, q).unwrap();
        let quad = math::gaussian_expectation(|x| math::norm_cdf((x + z) / b), y, q * q, 1e-13);
        worst = worst.max((closed - quad).abs());
    }
    suite.check("7d", "Gaussian-CDF integral identity vs quadrature", worst < 1e-8, format!("max error {worst:.2e} (tol 1e-8)"));

    // base change is match-for-match equivalent
    let binary = SimConfig {
        matches: 3000,
        ..SimConfig::example1(StepPolicy::uniform_choice(vec![10.0, 20.0, 30.0]))
    };
    let blog = simulate(&binary).unwrap().matches;
    let factor = beta_base_change(10.0).unwrap().factor;
    let ten = EngineConfig::elo_with(400.0, 0.1, OutcomeScale::binary(), EloScore::GeneralizedLogistic { base: 10.0 });
    let natural = EngineConfig::elo(400.0 / factor, 0.1 * factor, OutcomeScale::binary());
    let mut s10 = SkillState::with_skills(ten, (0..30).map(|i| (player_id(i), 0.0))).unwrap();
    let mut se = SkillState::with_skills(natural, (0..30).map(|i| (player_id(i), 0.0))).unwrap();
    let mut worst: f64 = 0.0;
    for m in &blog {
        s10.update(m).unwrap();
        se.update(m).unwrap();
        for (x, y) in s10.skills().iter().zip(se.skills()) {
            worst = worst.max((x - y).abs());
        }
    }
    suite.check("7e", "base-10 and natural-base engines agree match for match", worst < 1e-9, format!("max skill gap {worst:.2e} over {} matches", blog.len()));

    // simulation export and ingestion round trip
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("m.csv");
    let out = simulate(&SimConfig {
        home_fraction: 0.6,
        ..SimConfig::example4(20.0)
    })
    .unwrap();
    let skills: Vec<(f64, f64)> = out.true_diffs.iter().map(|d| (d / 3.0, -d / 7.0)).collect();
    let back = write_matches(&path, &out.matches, Some(&skills))
        .and_then(|_| ingest_matches(&path, &IngestOptions { levels: 3, rule: None }));
    match back {
        Ok(log) => {
            let same_skills = log.supplied_skills.as_ref().is_some_and(|s| {
                s.iter().zip(&skills).all(|(a, b)| a.0.to_bits() == b.0.to_bits() && a.1.to_bits() == b.1.to_bits())
            });
            suite.check(
                "7f",
                "simulation export and ingestion round trip",
                log.records == out.matches && same_skills,
                format!("{} records and skill columns compared bit for bit", out.matches.len()),
            );
        }
        Err(e) => suite.error("7f", "simulation export and ingestion round trip", e),
    }
}

/// Calendar-like date strings spread over six years, nondecreasing in `t`.
fn synthetic_date(t: usize, n: usize) -> String {
    let d = 155 + t * 2232 / n;
    let (year, rest) = (2018 + d / 360, d % 360);
    format!("{year:04}-{:02}-{:02}", 1 + rest / 30, 1 + (rest % 30) * 27 / 29)
}

/// Writes a ternary log with FIFA-like steps (mostly friendlies), dates and pre-match skills
/// from a base-10 Elo engine at scale 600.
fn write_stand_in(path: &Path, config: &RunConfig) -> gelo_app::Result<()> {
    let sim = SimConfig {
        players: 300,
        matches: 5719,
        skill_variance: 1.0,
        step_policy: StepPolicy::uniform_choice(vec![5.0, 5.0, 10.0, 10.0, 10.0, 20.0, 25.0, 35.0, 50.0, 60.0]),
        home_fraction: 0.7,
        ..SimConfig::example4(20.0)
    };
    let mut matches = simulate(&sim)?.matches;
    let n = matches.len();
    for m in &mut matches {
        m.timestamp = Some(synthetic_date(m.t, n));
    }
    let mut state = SkillState::with_skills(config.engine_config()?, (0..sim.players).map(|i| (player_id(i), 1200.0)))?;
    let mut skills = Vec::with_capacity(n);
    for m in &matches {
        skills.push((state.skill(&m.home).unwrap_or(1200.0), state.skill(&m.away).unwrap_or(1200.0)));
        state.update(m)?;
    }
    write_matches(path, &matches, Some(&skills))
}

fn fifa(suite: &mut Suite) {
    let dir = TempDir::new().unwrap();
    let supplied = std::env::var_os("GELO_FIFA_CSV").map(std::path::PathBuf::from);
    let mut config = Preset::Fifa.config();
    let path = match &supplied {
        Some(p) => p.clone(),
        None => {
            let p = dir.path().join("stand_in.csv");
            if let Err(e) = write_stand_in(&p, &config) {
                suite.error("8", "FIFA pipeline on a synthetic stand-in", e);
                return;
            }
            p
        }
    };
    config.input.get_or_insert_with(Default::default).matches = Some(path.clone());
    let report = run_evaluate(&config, Some(&path), &dir.path().join("ev"));
    let convergence = run_convergence(&config, Some(&path), &dir.path().join("cv"));
    let (report, checkpoints) = match (report, convergence) {
        (Ok(r), Ok(ConvergenceOutput::Checkpoints(c))) => (r, c),
        (Err(e), _) | (_, Err(e)) => {
            suite.error("8", "FIFA pipeline", e);
            return;
        }
        (Ok(_), Ok(_)) => {
            suite.check("8", "FIFA pipeline", false, "expected checkpoint reports");
            return;
        }
    };
    let mean = |m: Method, f: fn(&gelo::evaluation::MethodSummary) -> Option<gelo::evaluation::Summary>| {
        report.method(m).and_then(f).map_or(f64::NAN, |s| s.mean)
    };
    let alpha1 = mean(Method::SimpleWithHfa, |m| m.alpha_1);
    let eta = mean(Method::SimpleWithHfa, |m| m.eta);
    let beta = mean(Method::SimpleNoHfa, |m| m.beta);
    let fully = mean(Method::FullyAdaptive, |m| m.log_score);
    let conventional = mean(Method::Conventional, |m| m.log_score);
    let below_one = checkpoints
        .iter()
        .find(|(s, _)| s.label == "2024-12-31")
        .map_or(f64::NAN, |(_, r)| r.fraction_below(1.0));
    let values = format!(
        "alpha_1 {alpha1:.3}, eta {eta:.3}, simple beta {beta:.3}, fully LS {fully:.3}, conventional LS {conventional:.3}, \
         share below one time constant by 2024 {:.1}%",
        100.0 * below_one
    );
    if supplied.is_some() {
        let targets = [
            ("alpha_1", alpha1, -0.588, 0.01),
            ("eta", eta, 0.730, 0.01),
            ("simple beta", beta, 0.783, 0.005),
            ("fully-adaptive LS", fully, 0.891, 0.005),
            ("conventional LS", conventional, 0.998, 0.005),
            ("share with Lambda < 1", below_one, 0.80, 0.05),
        ];
        for (name, v, target, tol) in targets {
            suite.check("8", &format!("FIFA {name}"), within(v, target, tol), format!("{v:.4} vs {target} +- {tol}"));
        }
    } else {
        let finite = [alpha1, eta, beta, fully, conventional, below_one].iter().all(|v| v.is_finite());
        suite.check(
            "8-stand-in",
            "FIFA pipeline on a synthetic stand-in log",
            finite && checkpoints.len() == 3 && fully < conventional && report.failures() == 0,
            format!("{values}; {} checkpoints", checkpoints.len()),
        );
        suite.skip("8", "FIFA reproduction", "conditional: set GELO_FIFA_CSV to a FIFA match log with skill columns");
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut suite = Suite::default();
    prop2_exactness(&mut suite);
    conversion_constants(&mut suite);
    draw_table(&mut suite);
    property_spot_checks(&mut suite);
    example1(&mut suite);
    table1(&mut suite);
    table2(&mut suite);
    fifa(&mut suite);
    println!(
        "acceptance: {} passed, {} failed in {:.0} s",
        suite.passed,
        suite.failed.len(),
        start.elapsed().as_secs_f64()
    );
    if suite.failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        for f in &suite.failed {
            println!("failed: {f}");
        }
        ExitCode::FAILURE
    }
}
