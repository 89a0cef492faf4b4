use gelo::outcome_model::{binomial_ac_params, AcParams, OutcomeScale, BASE10_FACTOR};
use gelo::rating_engine::*;
use proptest::prelude::*;

fn random_matches(spec: &[(u8, u8, u8, bool, f64)], players: u8, levels: usize) -> Vec<MatchRecord> {
    spec.iter()
        .enumerate()
        .filter_map(|(t, &(a, b, y, h, k))| {
            let (i, j) = (a % players, b % players);
            (i != j).then(|| {
                MatchRecord::new(t, format!("p{i}").as_str(), format!("p{j}").as_str(), y as usize % levels, h, k)
            })
        })
        .collect()
}

fn match_strategy() -> impl Strategy<Value = Vec<(u8, u8, u8, bool, f64)>> {
    prop::collection::vec((any::<u8>(), any::<u8>(), any::<u8>(), any::<bool>(), 1.0f64..60.0), 1..300)
}

proptest! {
    #[test]
    fn total_skill_is_conserved(spec in match_strategy(), levels in 2usize..6) {
        let scores = OutcomeScale::uniform(levels).unwrap();
        let ms = random_matches(&spec, 8, levels);
        for config in [
            EngineConfig::elo(174.0, 0.3, scores.clone()),
            EngineConfig::gelo(&AcParams::symmetric(
                &vec![-0.4; gelo::outcome_model::free_alpha_count(levels)],
                scores.clone(),
                174.0,
                0.3,
            ).unwrap()),
        ] {
            let mut st = SkillState::with_skills(config, (0..8).map(|i| (PlayerId(format!("p{i}")), 0.0))).unwrap();
            run_matches(&mut st, &ms, TrajectoryOptions::diffs_only()).unwrap();
            prop_assert!(st.total_skill().abs() < 1e-10);
        }
    }

    #[test]
    fn skills_scale_with_scale_and_step(spec in match_strategy(), c in 0.1f64..20.0) {
        let scores = OutcomeScale::uniform(3).unwrap();
        let ms = random_matches(&spec, 6, 3);
        let scaled: Vec<MatchRecord> = ms.iter().map(|m| MatchRecord { step: m.step * c, ..m.clone() }).collect();
        let mut a = SkillState::new(EngineConfig::elo(100.0, 0.2, scores.clone())).unwrap();
        let mut b = SkillState::new(EngineConfig::elo(100.0 * c, 0.2, scores)).unwrap();
        run_matches(&mut a, &ms, TrajectoryOptions::diffs_only()).unwrap();
        run_matches(&mut b, &scaled, TrajectoryOptions::diffs_only()).unwrap();
        for (x, y) in a.skills().iter().zip(b.skills()) {
            prop_assert!((x * c - y).abs() < 1e-10 * (1.0 + y.abs()), "{x} {y}");
        }
    }

    #[test]
    fn base_ten_engine_equals_canonical_engine(spec in match_strategy()) {
        let ms = random_matches(&spec, 6, 2);
        let base = EngineConfig::elo_with(400.0, 0.0, OutcomeScale::binary(), EloScore::GeneralizedLogistic { base: 10.0 });
        let canonical = EngineConfig::elo(400.0 / BASE10_FACTOR, 0.0, OutcomeScale::binary());
        let mut a = SkillState::new(base).unwrap();
        let mut b = SkillState::new(canonical).unwrap();
        let ta = run_matches(&mut a, &ms, TrajectoryOptions::diffs_only()).unwrap();
        let tb = run_matches(&mut b, &ms, TrajectoryOptions::diffs_only()).unwrap();
        for ((_, za), (_, zb)) in ta.diffs.iter().zip(&tb.diffs) {
            prop_assert!((za - zb).abs() < 1e-9);
        }
    }

    #[test]
    fn gelo_with_binomial_model_equals_multilevel_elo(spec in match_strategy(), levels in 2usize..6) {
        let ms = random_matches(&spec, 6, levels);
        let s = 174.0;
        let elo = EngineConfig::elo(s, 0.0, OutcomeScale::uniform(levels).unwrap());
        let gelo = EngineConfig::gelo(&binomial_ac_params(levels, s / (levels - 1) as f64, 0.0).unwrap());
        let mut a = SkillState::new(elo).unwrap();
        let mut b = SkillState::new(gelo).unwrap();
        run_matches(&mut a, &ms, TrajectoryOptions::diffs_only()).unwrap();
        run_matches(&mut b, &ms, TrajectoryOptions::diffs_only()).unwrap();
        for (x, y) in a.skills().iter().zip(b.skills()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }
}

#[test]
fn gaussian_engine_uses_normal_cdf() {
    let mut st = SkillState::new(EngineConfig::elo_with(
        100.0,
        0.0,
        OutcomeScale::binary(),
        EloScore::GaussianCdf,
    ))
    .unwrap();
    st.update(&MatchRecord::new(0, "a", "b", 1, false, 10.0)).unwrap();
    let r = st.update(&MatchRecord::new(1, "a", "b", 0, false, 10.0)).unwrap();
    let z: f64 = 10.0;
    assert!((r.expected - gelo::math::norm_cdf(z / 100.0)).abs() < 1e-15);
}
