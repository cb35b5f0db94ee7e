use std::path::PathBuf;

use tiltwing::config::{load_controller, load_vehicle, parse_controller, parse_vehicle, vehicle_to_toml, ControllerConfig};
use tiltwing_core::VehicleParams;

fn shipped(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("config").join(name)
}

#[test]
fn shipped_vehicle_is_the_reference_airframe() {
    let p = load_vehicle(&shipped("vehicle.toml")).unwrap();
    assert_eq!(p.mass, 1.9);
    assert_eq!(p.wing.span, 0.94);
    assert_eq!(p, VehicleParams::reference());
}

#[test]
fn vehicle_round_trip_is_bit_exact() {
    let p = VehicleParams::reference();
    let text = vehicle_to_toml(&p).unwrap();
    let back = parse_vehicle(&text).unwrap();
    assert_eq!(back, p);
    assert_eq!(vehicle_to_toml(&back).unwrap(), text);
}

#[test]
fn negative_mass_is_rejected() {
    let text = vehicle_to_toml(&VehicleParams::reference()).unwrap().replacen("mass = 1.9", "mass = -1.0", 1);
    let err = format!("{:#}", parse_vehicle(&text).unwrap_err());
    assert!(err.contains("mass"), "{err}");
}

#[test]
fn missing_fuselage_table_is_reported() {
    let text = vehicle_to_toml(&VehicleParams::reference()).unwrap();
    let start = text.find("[fuselage]").unwrap();
    let end = start + text[start + 1..].find("\n[").unwrap() + 1;
    let cut = format!("{}{}", &text[..start], &text[end..]);
    let err = format!("{:#}", parse_vehicle(&cut).unwrap_err());
    assert!(err.contains("fuselage"), "{err}");
}

#[test]
fn shipped_controller_matches_defaults() {
    let c = load_controller(Some(&shipped("controller.toml"))).unwrap();
    assert_eq!(c, ControllerConfig::default());
    assert_eq!(load_controller(None).unwrap(), c);
}

#[test]
fn partial_controller_file_keeps_other_defaults() {
    let c = parse_controller("rate = 500.0\n[cruise]\nbound_x = [2.0, 2.0]\n").unwrap();
    let d = ControllerConfig::default();
    assert_eq!(c.rate, 500.0);
    assert_eq!(c.cruise.bound_x, [2.0, 2.0]);
    assert_eq!(c.cruise.pid, d.cruise.pid);
    assert_eq!(c.attitude, d.attitude);
}

#[test]
fn controller_rejects_unknown_keys_and_zero_divider() {
    assert!(parse_controller("rates = 250.0\n").is_err());
    assert!(parse_controller("cruise_divider = 0\n").is_err());
}
