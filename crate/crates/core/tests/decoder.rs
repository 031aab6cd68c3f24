use bciarm_core::arm::RobotParams;
use bciarm_core::decoder::*;
use bciarm_core::Error;
use proptest::prelude::*;

fn workspace() -> Workspace {
    Workspace::from_params(&RobotParams::default(), 0.05)
}

#[test]
fn paper_step_examples() {
    let cfg = DecisionConfig::default();
    assert_eq!(reference_from_direction((0.5, 0.5), Direction::Up, &cfg, &workspace()).unwrap(), (0.5, 0.6));
    assert_eq!(reference_from_direction((0.5, 0.5), Direction::Down, &cfg, &workspace()).unwrap(), (0.5, 0.4));
}

#[test]
fn outward_steps_near_reach_are_refused() {
    let cfg = DecisionConfig::default();
    let p = RobotParams::default();
    let r_max = p.l1 + p.l2;
    for k in 0..16 {
        let phi = k as f64 * std::f64::consts::PI / 8.0;
        let current = (0.92 * r_max * phi.cos(), 0.92 * r_max * phi.sin());
        for dir in Direction::ALL {
            let (ux, uz) = dir.unit();
            let next = (current.0 + 0.1 * ux, current.1 + 0.1 * uz);
            let r = next.0.hypot(next.1);
            let outside = r > r_max - 0.05 * r_max || r < 0.05 * r_max;
            match reference_from_direction(current, dir, &cfg, &workspace()) {
                Ok(q) => assert!(!outside && q == next),
                Err(Error::Workspace { x, z }) => assert!(outside && (x, z) == next),
                Err(e) => panic!("unexpected {e}"),
            }
        }
    }
}

#[test]
fn custom_bulb_map() {
    let cfg = DecisionConfig {
        bulb_direction_map: [Direction::Right, Direction::Left, Direction::Down, Direction::Up],
        ..Default::default()
    };
    cfg.validate().unwrap();
    assert_eq!(decide_direction(&[0.0, 0.0, 1.0, 0.0], &cfg), Some(Direction::Down));
    assert_eq!(cfg.bulb_for(Direction::Up), 4);
}

fn dyadic(lo: i32, hi: i32) -> impl Strategy<Value = f64> {
    (lo..hi).prop_map(|i| i as f64 / 64.0)
}

proptest! {
    #[test]
    fn shift_invariance(
        s in prop::array::uniform4(dyadic(-256, 256)),
        c in dyadic(-1024, 1024),
        margin in dyadic(0, 64),
    ) {
        let cfg = DecisionConfig { min_score_margin: margin, ..Default::default() };
        let shifted = s.map(|v| v + c);
        prop_assert_eq!(decide_direction(&s, &cfg), decide_direction(&shifted, &cfg));
    }

    #[test]
    fn up_then_down_returns_exactly(xi in -40..40i32, zi in -40..40i32, hk in 1..5u32) {
        let start = (xi as f64 / 64.0, zi as f64 / 64.0);
        let cfg = DecisionConfig { step_resolution: 1.0 / f64::from(1u32 << hk), ..Default::default() };
        let ws = workspace();
        if let Ok(up) = reference_from_direction(start, Direction::Up, &cfg, &ws) {
            prop_assert_eq!(reference_from_direction(up, Direction::Down, &cfg, &ws).unwrap(), start);
        }
    }

    #[test]
    fn accepted_references_stay_inside(x in -1.0..1.0f64, z in -1.0..1.0f64, d in 0..4usize, h in 0.01..0.3f64) {
        let cfg = DecisionConfig { step_resolution: h, ..Default::default() };
        let ws = workspace();
        if let Ok(p) = reference_from_direction((x, z), Direction::ALL[d], &cfg, &ws) {
            let r = p.0.hypot(p.1);
            prop_assert!(r >= ws.r_min + ws.margin && r <= ws.r_max - ws.margin);
        }
    }
}
