use gelo::diagnostics::{asymptotic_variance, time_constant};
use gelo::outcome_model::{AcParams, OutcomeScale};
use gelo::rating_engine::{EngineConfig, TrajectoryOptions};
use gelo::simulation::*;

#[test]
fn skill_variance_follows_law_of_large_numbers() {
    let mut c = SimConfig::example4(20.0);
    c.players = 100_000;
    c.standardize_skills = false;
    let s = generate_skills(&c).unwrap();
    let m = s.iter().sum::<f64>() / s.len() as f64;
    let v = s.iter().map(|x| (x - m).powi(2)).sum::<f64>() / s.len() as f64;
    assert!((v / 0.5 - 1.0).abs() < 0.02, "{v}");
}

#[test]
fn fixed_seed_is_reproducible() {
    let c = SimConfig::example4(20.0).with_seed(42);
    assert_eq!(simulate(&c).unwrap(), simulate(&c).unwrap());
    assert_ne!(simulate(&c).unwrap(), simulate(&c.clone().with_seed(43)).unwrap());
    let mut rng_a = stream_rng(5, 2);
    let mut rng_b = stream_rng(5, 2);
    let a: Vec<_> = (0..50).map(|_| schedule_pair(30, &mut rng_a)).collect();
    let b: Vec<_> = (0..50).map(|_| schedule_pair(30, &mut rng_b)).collect();
    assert_eq!(a, b);
}

#[test]
fn random_pairs_are_distinct_and_balanced() {
    let m = 30;
    let n = 100_000;
    let mut rng = stream_rng(1, 3);
    let mut counts = vec![0usize; m];
    for _ in 0..n {
        let (i, j) = schedule_pair(m, &mut rng);
        assert_ne!(i, j);
        counts[i] += 1;
        counts[j] += 1;
    }
    let p = 2.0 / m as f64;
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    for c in counts {
        assert!((c as f64 - n as f64 * p).abs() < 3.0 * sd + 1.0, "{c}");
    }
}

#[test]
fn outcome_frequencies_match_model() {
    let model = AcParams::symmetric(&[-0.4], OutcomeScale::uniform(3).unwrap(), 1.0, 0.35).unwrap();
    let mut rng = stream_rng(2, 4);
    let n = 1_000_000;
    for (z, home) in [(0.0, false), (0.7, true), (-1.2, true)] {
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[sample_outcome(z, home, &model, &mut rng)] += 1;
        }
        let p = model.probs(z, home).unwrap();
        for y in 0..3 {
            let sd = (n as f64 * p[y] * (1.0 - p[y])).sqrt();
            assert!((counts[y] as f64 - n as f64 * p[y]).abs() < 3.0 * sd, "{counts:?} {p:?}");
        }
        if z == 0.0 && !home {
            let draw = counts[1] as f64 / n as f64;
            assert!((draw - 0.251).abs() < 0.002);
        }
    }
}

#[test]
fn extreme_difference_gives_top_outcome() {
    let model = AcParams::symmetric(&[0.0], OutcomeScale::uniform(3).unwrap(), 1.0, 0.0).unwrap();
    let mut rng = stream_rng(0, 0);
    assert!((0..1000).all(|_| sample_outcome(60.0, false, &model, &mut rng) == 2));
}

#[test]
fn true_differences_match_skills() {
    let out = simulate(&SimConfig::example4(20.0)).unwrap();
    for (m, z) in out.matches.iter().zip(&out.true_diffs) {
        let i: usize = m.home.as_str()[1..].parse().unwrap();
        let j: usize = m.away.as_str()[1..].parse().unwrap();
        assert_eq!(*z, out.skills[i] - out.skills[j]);
    }
}

#[test]
fn single_replication_equals_direct_run() {
    let c = SimConfig::example4(20.0);
    let engine = EngineConfig::elo(174.0, 0.0, OutcomeScale::uniform(3).unwrap());
    let reps = run_replications(&c, &engine, 1, ReplicationOptions::default(), TrajectoryOptions::diffs_only()).unwrap();
    assert_eq!(reps.len(), 1);
    assert_eq!(reps[0].output, simulate(&c).unwrap());
}

#[test]
fn replications_share_skills_unless_redrawn() {
    let c = SimConfig::example4(20.0);
    let shared = map_replications(&c, 3, ReplicationOptions::default(), |_, o| Ok(o.skills)).unwrap();
    assert!(shared.windows(2).all(|w| w[0] == w[1]));
    let fresh = map_replications(&c, 3, ReplicationOptions { redraw_skills: true }, |_, o| Ok(o.skills)).unwrap();
    assert_ne!(fresh[0], fresh[1]);
}

#[test]
fn ensemble_tracks_scaled_true_skills() {
    // small binary replica: 10 players, K = 20, 400 rounds, J = 60
    let mut c = SimConfig::example1(StepPolicy::constant(20.0));
    c.players = 10;
    c.matches = 400 * 5;
    let engine = EngineConfig::elo(174.0, 0.35, OutcomeScale::binary());
    let j = 60;
    let finals = map_replications(&c, j, ReplicationOptions::default(), |_, out| {
        let mut st = gelo::rating_engine::SkillState::with_skills(
            engine.clone(),
            (0..c.players).map(|i| (player_id(i), 0.0)),
        )?;
        gelo::rating_engine::run_matches(&mut st, &out.matches, TrajectoryOptions::diffs_only())?;
        Ok(st.skills().to_vec())
    })
    .unwrap();
    let stats = EnsembleStats::from_samples(finals.iter().map(Vec::as_slice)).unwrap();
    let skills = generate_skills(&c).unwrap();
    let v = asymptotic_variance(174.0, 20.0).unwrap();
    assert!(400.0 > 5.0 * time_constant(174.0, 20.0).unwrap());
    for m in 0..c.players {
        let se = (stats.variance[m] / j as f64).sqrt();
        // finite-M skill coupling adds a little to the spread; allow 4 standard errors
        assert!((stats.mean[m] - 174.0 * skills[m]).abs() < 4.0 * se, "player {m}");
    }
    let mean_var = stats.variance.iter().sum::<f64>() / c.players as f64;
    assert!((mean_var / v - 1.0).abs() < 0.3, "{mean_var}");
}
