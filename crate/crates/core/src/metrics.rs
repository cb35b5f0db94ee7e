//! Tracking metrics over run logs.

use alloc::vec::Vec;

#[allow(unused_imports)] // f64 has inherent math methods whenever std is in the build graph
use num_traits::Float;

use crate::math::wrap_angle;
use crate::sim::LogRow;

pub fn rms(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Percentile `q` in [0, 100] with linear interpolation between order
/// statistics.
pub fn percentile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let pos = (q / 100.0).clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// First time after which `signal` stays within `band` of `target`, measured
/// from `start`. `None` if it never settles.
pub fn settling_time(time: &[f64], signal: &[f64], target: f64, band: f64, start: f64) -> Option<f64> {
    let mut settled_at = None;
    for (t, s) in time.iter().zip(signal) {
        if *t < start {
            continue;
        }
        if (s - target).abs() <= band {
            settled_at.get_or_insert(*t);
        } else {
            settled_at = None;
        }
    }
    settled_at.map(|t| t - start)
}

/// Overshoot of a step from `initial` to `target` as a fraction of the step.
pub fn overshoot(signal: &[f64], initial: f64, target: f64) -> f64 {
    let step = target - initial;
    if step == 0.0 {
        return 0.0;
    }
    let peak = signal.iter().map(|s| (s - initial) / step).fold(f64::NEG_INFINITY, f64::max);
    (peak - 1.0).max(0.0)
}

/// Height band `max(h) − min(h)` over the rows.
pub fn altitude_band(rows: &[LogRow]) -> f64 {
    let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        (lo.min(-r.position[2]), hi.max(-r.position[2]))
    });
    if rows.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

/// Pitch setpoint minus pitch for rows with an attitude setpoint.
pub fn pitch_errors(rows: &[LogRow]) -> Vec<f64> {
    rows.iter()
        .filter(|r| r.attitude_setpoint[1].is_finite())
        .map(|r| wrap_angle(r.attitude_setpoint[1] - r.euler[1]))
        .collect()
}

pub fn roll_errors(rows: &[LogRow]) -> Vec<f64> {
    rows.iter()
        .filter(|r| r.attitude_setpoint[0].is_finite())
        .map(|r| wrap_angle(r.attitude_setpoint[0] - r.euler[0]))
        .collect()
}

/// Velocity setpoint minus airspeed per axis, for rows with a setpoint.
pub fn velocity_errors(rows: &[LogRow]) -> [Vec<f64>; 2] {
    let mut out = [Vec::new(), Vec::new()];
    for r in rows.iter().filter(|r| r.velocity_setpoint[0].is_finite()) {
        out[0].push(r.velocity_setpoint[0] - r.airspeed[0]);
        out[1].push(r.velocity_setpoint[1] - r.airspeed[1]);
    }
    out
}

/// Share of the main-throttle command coming from the trim-map:
/// `Σ|δ^t| / Σ(|δ^t| + |δ^c|)` over rows with cruise data.
pub fn feed_forward_ratio(rows: &[LogRow]) -> f64 {
    let (ff, total) = rows
        .iter()
        .filter(|r| r.trim_throttle.is_finite() && r.correction[1].is_finite())
        .fold((0.0, 0.0), |(ff, tot), r| {
            let a = r.trim_throttle.abs();
            (ff + a, tot + a + r.correction[1].abs())
        });
    if total > 0.0 {
        ff / total
    } else {
        f64::NAN
    }
}

/// Index ranges `[start, end)` where the velocity setpoint has been constant
/// for at least `settle` seconds, up to the next change.
pub fn steady_segments(rows: &[LogRow], settle: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < rows.len() {
        let sp = rows[i].velocity_setpoint;
        if !sp[0].is_finite() {
            i += 1;
            continue;
        }
        let mut j = i;
        while j < rows.len() && rows[j].velocity_setpoint == sp {
            j += 1;
        }
        let t0 = rows[i].time + settle;
        let start = (i..j).find(|&k| rows[k].time >= t0);
        if let Some(s) = start {
            if s < j {
                out.push((s, j));
            }
        }
        i = j;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub rows: usize,
    pub duration: f64,
    pub altitude_band: f64,
    pub pitch_rms: f64,
    pub pitch_p90: f64,
    pub pitch_max: f64,
    pub roll_rms: f64,
    pub velocity_rms: [f64; 2],
    pub velocity_max: [f64; 2],
    /// Over all cruise rows and over steady segments only.
    pub feed_forward_ratio: f64,
    pub steady_feed_forward_ratio: f64,
    pub max_residual: f64,
    pub saturated_fraction: f64,
    pub lookup_warnings: usize,
}

/// Settling allowance before a setpoint segment counts as steady [s].
pub const STEADY_SETTLE: f64 = 4.0;

pub fn summarize(rows: &[LogRow]) -> Summary {
    let pitch = pitch_errors(rows);
    let roll = roll_errors(rows);
    let vel = velocity_errors(rows);
    let abs_pitch: Vec<f64> = pitch.iter().map(|e| e.abs()).collect();
    let steady: Vec<LogRow> = steady_segments(rows, STEADY_SETTLE)
        .into_iter()
        .flat_map(|(a, b)| rows[a..b].iter().copied())
        .collect();
    let residuals = rows
        .iter()
        .filter(|r| r.residual[0].is_finite())
        .map(|r| (r.residual[0].powi(2) + r.residual[1].powi(2) + r.residual[2].powi(2)).sqrt());
    let duration = match (rows.first(), rows.last()) {
        (Some(a), Some(b)) if rows.len() > 1 => b.time - a.time + (b.time - a.time) / (rows.len() - 1) as f64,
        _ => 0.0,
    };
    Summary {
        rows: rows.len(),
        duration,
        altitude_band: altitude_band(rows),
        pitch_rms: rms(&pitch),
        pitch_p90: percentile(&abs_pitch, 90.0),
        pitch_max: max_abs(&pitch),
        roll_rms: rms(&roll),
        velocity_rms: [rms(&vel[0]), rms(&vel[1])],
        velocity_max: [max_abs(&vel[0]), max_abs(&vel[1])],
        feed_forward_ratio: feed_forward_ratio(rows),
        steady_feed_forward_ratio: feed_forward_ratio(&steady),
        max_residual: residuals.fold(0.0, f64::max),
        saturated_fraction: if rows.is_empty() {
            0.0
        } else {
            rows.iter().filter(|r| r.saturated).count() as f64 / rows.len() as f64
        },
        lookup_warnings: rows.iter().filter(|r| r.lookup_warning).count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_stats() {
        assert_eq!(rms(&[3.0, -3.0]), 3.0);
        assert_eq!(rms(&[]), 0.0);
        assert_eq!(max_abs(&[1.0, -4.0, 2.0]), 4.0);
        let v: Vec<f64> = (1..=11).map(|x| x as f64).collect();
        assert_eq!(percentile(&v, 90.0), 10.0);
        assert_eq!(percentile(&v, 50.0), 6.0);
        assert_eq!(percentile(&[1.0, 2.0], 50.0), 1.5);
    }

    #[test]
    fn step_response() {
        let t: Vec<f64> = (0..100).map(|k| k as f64 * 0.1).collect();
        let s: Vec<f64> = t.iter().map(|t| if *t < 1.0 { 0.0 } else { 1.0 + (-(t - 1.0)).exp() * 0.0 }).collect();
        assert_eq!(settling_time(&t, &s, 1.0, 0.05, 0.5), Some(0.5));
        assert_eq!(overshoot(&[0.0, 0.5, 1.2, 1.0], 0.0, 1.0), 0.19999999999999996);
        assert_eq!(settling_time(&t, &t, 1.0, 0.05, 0.0), None);
    }
}
