//! Metrics report of a run log: CSV of named values plus a text summary.

use std::fmt::Write as _;
use std::io::Write;

use anyhow::Result;
use tiltwing_core::math::DEG;
use tiltwing_core::metrics::{summarize, Summary};
use tiltwing_core::sim::LogRow;

pub fn metric_pairs(s: &Summary) -> Vec<(&'static str, f64)> {
    vec![
        ("rows", s.rows as f64),
        ("duration_s", s.duration),
        ("altitude_band_m", s.altitude_band),
        ("pitch_error_rms_rad", s.pitch_rms),
        ("pitch_error_p90_rad", s.pitch_p90),
        ("pitch_error_max_rad", s.pitch_max),
        ("roll_error_rms_rad", s.roll_rms),
        ("vx_error_rms_mps", s.velocity_rms[0]),
        ("vz_error_rms_mps", s.velocity_rms[1]),
        ("vx_error_max_mps", s.velocity_max[0]),
        ("vz_error_max_mps", s.velocity_max[1]),
        ("feed_forward_ratio", s.feed_forward_ratio),
        ("steady_feed_forward_ratio", s.steady_feed_forward_ratio),
        ("max_residual_moment_nm", s.max_residual),
        ("saturated_fraction", s.saturated_fraction),
        ("lookup_warnings", s.lookup_warnings as f64),
    ]
}

pub fn write_metrics_csv<W: Write>(s: &Summary, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["metric", "value"])?;
    for (k, v) in metric_pairs(s) {
        w.write_record([k.to_string(), format!("{v}")])?;
    }
    w.flush()?;
    Ok(())
}

pub fn summary_text(name: &str, s: &Summary, fault: Option<&str>) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "run: {name} ({} rows, {:.2} s)", s.rows, s.duration);
    if let Some(f) = fault {
        let _ = writeln!(t, "fault: {f}");
    }
    let _ = writeln!(t, "altitude band: {:.3} m", s.altitude_band);
    let _ = writeln!(
        t,
        "pitch error: rms {:.2} deg, p90 {:.2} deg, max {:.2} deg",
        s.pitch_rms / DEG,
        s.pitch_p90 / DEG,
        s.pitch_max / DEG
    );
    let _ = writeln!(t, "roll error rms: {:.2} deg", s.roll_rms / DEG);
    if s.feed_forward_ratio.is_finite() {
        let _ = writeln!(
            t,
            "airspeed error rms: vx {:.3} m/s, vz {:.3} m/s (max {:.3}, {:.3})",
            s.velocity_rms[0], s.velocity_rms[1], s.velocity_max[0], s.velocity_max[1]
        );
        let _ = writeln!(
            t,
            "feed-forward throttle share: {:.3} overall, {:.3} in steady segments",
            s.feed_forward_ratio, s.steady_feed_forward_ratio
        );
        let _ = writeln!(t, "trim lookups outside the map: {}", s.lookup_warnings);
    }
    let _ = writeln!(
        t,
        "allocation: max residual {:.3e} N·m, saturated {:.1}% of ticks",
        s.max_residual,
        100.0 * s.saturated_fraction
    );
    t
}

pub fn report(rows: &[LogRow]) -> Summary {
    summarize(rows)
}
