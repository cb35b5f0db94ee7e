use tiltwing_core::attitude::AttitudeSetpoint;
use tiltwing_core::math::{from_euler, Vec3, DEG};
use tiltwing_core::metrics::{overshoot, settling_time};
use tiltwing_core::sim::{run_scenario, Command, ControlMode, Scenario, SimConfig, TimedCommand, WindProfile};
use tiltwing_core::trim::{hover_guess, solve_trim_point, TrimConfig};
use tiltwing_core::{RigidBodyState, VehicleParams};

fn hover_attitude_scenario(steps: &[(f64, f64)], duration: f64) -> Scenario {
    let timeline = steps
        .iter()
        .map(|&(time, roll)| TimedCommand {
            time,
            command: Command::Attitude {
                setpoint: AttitudeSetpoint {
                    roll,
                    pitch: 0.0,
                    yaw_rate: 0.0,
                },
                wing: 1.0,
                main_throttle: 0.7698,
                flap: 0.0,
            },
        })
        .collect();
    Scenario {
        name: "roll_steps".into(),
        mode: ControlMode::Attitude,
        initial: RigidBodyState {
            position: Vec3::new(0.0, 0.0, -20.0),
            ..Default::default()
        },
        initial_actuators: None,
        wind: WindProfile::default(),
        timeline,
        duration,
    }
}

#[test]
fn held_hover_trim_keeps_altitude_within_half_a_meter_for_ten_seconds() {
    let p = VehicleParams::reference();
    let trim = solve_trim_point(0.0, 0.0, &hover_guess(&p), None, &p, &TrimConfig::default());
    assert!(trim.feasible);
    let act = trim.solution.actuators(&p);
    let sc = Scenario {
        name: "open_loop_hover".into(),
        mode: ControlMode::OpenLoop,
        initial: RigidBodyState {
            position: Vec3::new(0.0, 0.0, -20.0),
            attitude: from_euler(0.0, trim.solution.pitch, 0.0),
            ..Default::default()
        },
        initial_actuators: None,
        wind: WindProfile::default(),
        timeline: vec![TimedCommand {
            time: 0.0,
            command: Command::Actuators(act),
        }],
        duration: 10.0,
    };
    let log = run_scenario(&sc, &p, None, &SimConfig::default()).unwrap();
    assert!(log.fault.is_none());
    let drift = log
        .rows
        .iter()
        .map(|r| (r.position[2] - sc.initial.position.z).abs())
        .fold(0.0, f64::max);
    assert!(drift < 0.5, "altitude drift {drift} m");
}

#[test]
fn hover_roll_steps_settle_within_two_seconds_without_large_overshoot() {
    let p = VehicleParams::reference();
    let step = 15.0 * DEG;
    let sc = hover_attitude_scenario(&[(0.0, 0.0), (1.0, step), (4.0, -step), (7.0, 0.0)], 9.0);
    let log = run_scenario(&sc, &p, None, &SimConfig::default()).unwrap();
    assert!(log.fault.is_none());
    let time: Vec<f64> = log.rows.iter().map(|r| r.time).collect();
    let roll: Vec<f64> = log.rows.iter().map(|r| r.euler[0]).collect();
    for (t0, t1, from, to) in [(1.0, 4.0, 0.0, step), (4.0, 7.0, step, -step), (7.0, 9.0, -step, 0.0)] {
        let idx: Vec<usize> = (0..time.len()).filter(|&k| time[k] >= t0 && time[k] < t1).collect();
        let t: Vec<f64> = idx.iter().map(|&k| time[k]).collect();
        let r: Vec<f64> = idx.iter().map(|&k| roll[k]).collect();
        let band = 0.05 * (to - from).abs();
        let settle = settling_time(&t, &r, to, band, t0).expect("never settles");
        let over = overshoot(&r, from, to);
        assert!(settle < 2.0, "step at {t0}: settling {settle} s");
        assert!(over < 0.2, "step at {t0}: overshoot {over}");
    }
}

#[test]
fn log_has_one_row_per_tick_and_repeats_bit_identically() {
    let p = VehicleParams::reference();
    let sc = hover_attitude_scenario(&[(0.0, 0.0), (0.5, 0.1)], 2.0);
    let cfg = SimConfig::default();
    let a = run_scenario(&sc, &p, None, &cfg).unwrap();
    let b = run_scenario(&sc, &p, None, &cfg).unwrap();
    assert_eq!(a.rows.len(), 500);
    let bits = |rows: &[tiltwing_core::sim::LogRow]| -> Vec<u64> {
        rows.iter().flat_map(|r| r.values()).map(f64::to_bits).collect()
    };
    assert_eq!(bits(&a.rows), bits(&b.rows));
}

#[test]
fn cruise_mode_without_a_map_is_rejected() {
    let p = VehicleParams::reference();
    let sc = Scenario {
        name: "no_map".into(),
        mode: ControlMode::Cruise,
        initial: RigidBodyState::default(),
        initial_actuators: None,
        wind: WindProfile::default(),
        timeline: vec![TimedCommand {
            time: 0.0,
            command: Command::Cruise(Default::default()),
        }],
        duration: 1.0,
    };
    assert!(run_scenario(&sc, &p, None, &SimConfig::default()).is_err());
}
