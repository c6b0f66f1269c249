use lavatube::config::{
    parse_config, render_config, BodyConfig, Config, ModeName, ObstacleConfig, SelectionName,
};
use proptest::prelude::*;

fn config() -> impl Strategy<Value = Config> {
    (
        any::<u64>(),
        1u32..40,
        1usize..20,
        prop::bool::ANY,
        (1.0f64..4.0, 3.0f64..8.0, 4.0f64..10.0),
        prop::collection::vec((8.0f64..40.0, 0.3f64..0.9), 0..4),
        prop::collection::vec(0.5f64..200.0, 1..5),
        (prop::option::of(1u32..30), prop::bool::ANY),
        0.0f64..0.1,
    )
        .prop_map(|(seed, k, n, case_ii, (vision, comm, hop), obstacles, distances, (at, random), noise)| {
            let mut c = Config {
                seed,
                timesteps: k,
                explorers: n,
                mode: if case_ii { ModeName::CaseII } else { ModeName::CaseI },
                ..Config::default()
            };
            c.planner.vision_radius = vision;
            c.planner.comm_range = comm;
            c.planner.hop_range = hop;
            c.planner.selection = if random { SelectionName::Random } else { SelectionName::RoundRobin };
            // obstacles spaced 10 apart along the tube never overlap
            c.environment.obstacles = obstacles
                .into_iter()
                .enumerate()
                .map(|(i, (x, r))| ObstacleConfig { x: 8.0 + 10.0 * i as f64 + (x % 5.0), y: 4.0, radius: r })
                .collect();
            c.sweep.distances = distances;
            c.sweep.bodies.push(BodyConfig { name: "ceres".into(), gravity: 0.28 });
            c.return_home.at_timestep = at;
            c.localization.range = noise;
            c
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn render_then_parse_is_identity(c in config()) {
        let text = render_config(&c);
        prop_assert_eq!(parse_config(&text).unwrap(), c);
    }
}

#[test]
fn defaults_round_trip() {
    let c = Config::default();
    assert_eq!(parse_config(&render_config(&c)).unwrap(), c);
}
