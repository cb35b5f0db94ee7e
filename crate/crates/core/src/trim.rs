//! Longitudinal trim: steady operating points over airspeed and flight-path
//! angle, solved as a bound-constrained least-squares problem.
//!
//! The unknowns are the wing tilt, collective main throttle, symmetric aileron
//! deflection, elevator, tail throttle and the pitch angle. Besides the
//! steadiness residuals the objective carries a cost that makes the solution
//! unique: shaft power, a soft barrier against control-surface saturation,
//! deviation from a desired pitch and deviation from neighboring solutions.
//!
//! The map is built by propagating solutions between neighboring grid cells:
//! every cell is re-solved from each neighbor whose solution changed in the
//! previous sweep and keeps the cheapest feasible result.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 has inherent math methods whenever std is in the build graph
use num_traits::Float;

use crate::aero::{total_wrench, ForceMoment, Geometry, Source};
use crate::dynamics::{angular_acceleration, RigidBodyState};
use crate::lm::{self, Bounds, LmConfig};
use crate::math::{clamp, rot_y, Vec3, DEG};
use crate::vehicle::{Actuator, ActuatorSet, PropRole, VehicleParams};

/// Number of trim unknowns.
pub const TRIM_VARS: usize = 6;

const STEADINESS_RESIDUALS: usize = 3;
const RESIDUALS: usize = STEADINESS_RESIDUALS + 1 + 2 + 1 + TRIM_VARS;

/// Trim actuation `u_t` and pitch `θ_t`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrimSolution {
    pub wing: f64,
    pub main_throttle: f64,
    /// Symmetric aileron command (`al = -ar = aileron`, flap-like).
    pub aileron: f64,
    pub elevator: f64,
    pub tail_throttle: f64,
    pub pitch: f64,
}

impl TrimSolution {
    pub fn to_array(&self) -> [f64; TRIM_VARS] {
        [
            self.wing,
            self.main_throttle,
            self.aileron,
            self.elevator,
            self.tail_throttle,
            self.pitch,
        ]
    }

    pub fn from_array(x: &[f64]) -> Self {
        Self {
            wing: x[0],
            main_throttle: x[1],
            aileron: x[2],
            elevator: x[3],
            tail_throttle: x[4],
            pitch: x[5],
        }
    }

    pub fn bounds() -> Bounds {
        let h = core::f64::consts::FRAC_PI_2;
        Bounds {
            lower: vec![0.0, 0.0, -1.0, -1.0, 0.0, -h],
            upper: vec![1.0, 1.0, 1.0, 1.0, 1.0, h],
        }
    }

    /// Actuator set realizing this trim with the wing already at its tilt.
    pub fn actuators(&self, p: &VehicleParams) -> ActuatorSet {
        ActuatorSet::default()
            .with(Actuator::Wing, self.wing)
            .with(Actuator::ThrottleLeft, self.main_throttle)
            .with(Actuator::ThrottleRight, self.main_throttle)
            .with(Actuator::ThrottleTail, self.tail_throttle)
            .with(Actuator::AileronLeft, self.aileron)
            .with(Actuator::AileronRight, -self.aileron)
            .with(Actuator::Elevator, self.elevator)
            .settled(&p.actuators)
    }

    /// Physical wing tilt [rad].
    pub fn wing_tilt(&self, p: &VehicleParams) -> f64 {
        self.wing * p.actuators.wing_tilt_max
    }
}

/// Weights, thresholds and solver settings of the trim problem.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct TrimConfig {
    /// Diagonal of `Q_v` for the (x, z) acceleration residuals.
    pub q_v: [f64; 2],
    pub q_theta: f64,
    pub w_power: f64,
    pub w_saturation: f64,
    pub w_pitch: f64,
    pub w_neighbor: f64,
    /// Normalized deflection where the saturation barrier kicks in.
    pub saturation_onset: f64,
    pub barrier_sharpness: f64,
    /// Feasibility thresholds on ‖v̇‖ [m/s²] and |θ̈| [rad/s²].
    pub eps_v: f64,
    pub eps_theta: f64,
    /// Airspeed above which the desired pitch equals the flight-path angle.
    pub pitch_blend_speed: f64,
    pub lm: LmConfig,
}

impl Default for TrimConfig {
    fn default() -> Self {
        Self {
            q_v: [10.0, 10.0],
            q_theta: 10.0,
            w_power: 0.01,
            w_saturation: 1.0,
            w_pitch: 1.0,
            w_neighbor: 0.1,
            saturation_onset: 0.8,
            barrier_sharpness: 20.0,
            eps_v: 0.05,
            eps_theta: 0.05,
            pitch_blend_speed: 12.0,
            lm: LmConfig::default(),
        }
    }
}

impl TrimConfig {
    /// Desired pitch θ*: level near hover, aligned with the flight path in
    /// wing-borne flight, linear in between.
    pub fn desired_pitch(&self, airspeed: f64, gamma: f64) -> f64 {
        gamma * clamp(airspeed / self.pitch_blend_speed, 0.0, 1.0)
    }
}

/// Vehicle state for an operating point: air-relative velocity
/// `(v cos γ, 0, −v sin γ)`, wings level, no rotation.
pub fn trim_state(airspeed: f64, gamma: f64, pitch: f64) -> RigidBodyState {
    RigidBodyState {
        velocity: Vec3::new(airspeed * gamma.cos(), 0.0, -airspeed * gamma.sin()),
        attitude: rot_y(pitch),
        ..Default::default()
    }
}

/// Steadiness of a candidate trim.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Steadiness {
    /// Inertial (x, z) acceleration [m/s²].
    pub accel: [f64; 2],
    /// Pitch acceleration [rad/s²].
    pub pitch_accel: f64,
}

impl Steadiness {
    pub fn accel_norm(&self) -> f64 {
        (self.accel[0] * self.accel[0] + self.accel[1] * self.accel[1]).sqrt()
    }
}

fn evaluate(sol: &TrimSolution, airspeed: f64, gamma: f64, p: &VehicleParams) -> (Steadiness, ForceMoment) {
    let state = trim_state(airspeed, gamma, sol.pitch);
    let act = sol.actuators(p);
    let fm = total_wrench(&state, &act, p, &Vec3::zeros());
    let accel = p.gravity_vector() + state.attitude * fm.force / p.mass;
    let omega_dot = angular_acceleration(&p.inertia_matrix(), &Vec3::zeros(), &fm.moment);
    (
        Steadiness {
            accel: [accel.x, accel.z],
            pitch_accel: omega_dot.y,
        },
        fm,
    )
}

pub fn steadiness(sol: &TrimSolution, airspeed: f64, gamma: f64, p: &VehicleParams) -> Steadiness {
    evaluate(sol, airspeed, gamma, p).0
}

/// Net shaft-power measure `Σ ρ η³ D⁵ C_Q(J)` over all propellers.
pub fn shaft_power(fm: &ForceMoment, act: &ActuatorSet, p: &VehicleParams) -> f64 {
    let geometry = Geometry::new(p, act.wing_tilt, act.tail_tilt(&p.actuators));
    p.propellers
        .iter()
        .map(|prop| {
            let eta = act.prop_speed(prop);
            let flow = fm
                .contribution(Source::Propeller(prop.role))
                .map(|c| c.flow)
                .unwrap_or_default();
            let axial = flow.propeller_inflow(&geometry.prop(prop.role).axis).axial;
            let j = prop.advance_ratio(axial, eta);
            p.air_density * eta.powi(3) * prop.diameter.powi(5) * prop.torque_coefficient(j)
        })
        .sum()
}

fn softplus(z: f64) -> f64 {
    if z > 30.0 {
        z
    } else {
        z.exp().ln_1p()
    }
}

/// Soft saturation barrier, zero for a centered surface.
pub fn saturation_barrier(deflection: f64, cfg: &TrimConfig) -> f64 {
    let k = cfg.barrier_sharpness;
    let s2 = cfg.saturation_onset * cfg.saturation_onset;
    ((softplus(k * (deflection * deflection - s2)) - softplus(-k * s2)) / k).max(0.0)
}

/// Square roots of the individual cost terms (the `q` block of the residual).
fn cost_residuals(
    sol: &TrimSolution,
    power: f64,
    desired_pitch: f64,
    neighbor_mean: Option<&[f64; TRIM_VARS]>,
    cfg: &TrimConfig,
    out: &mut [f64],
) {
    out[0] = (cfg.w_power * power.max(0.0)).sqrt();
    out[1] = (cfg.w_saturation * saturation_barrier(sol.aileron, cfg)).sqrt();
    out[2] = (cfg.w_saturation * saturation_barrier(sol.elevator, cfg)).sqrt();
    out[3] = cfg.w_pitch.sqrt() * (sol.pitch - desired_pitch);
    let x = sol.to_array();
    for k in 0..TRIM_VARS {
        out[4 + k] = match neighbor_mean {
            Some(mean) => cfg.w_neighbor.sqrt() * (x[k] - mean[k]),
            None => 0.0,
        };
    }
}

/// Cost `q >= 0` for a candidate trim at an operating point.
pub fn trim_cost(
    sol: &TrimSolution,
    airspeed: f64,
    gamma: f64,
    neighbor_mean: Option<&[f64; TRIM_VARS]>,
    desired_pitch: f64,
    p: &VehicleParams,
    cfg: &TrimConfig,
) -> f64 {
    let act = sol.actuators(p);
    let fm = total_wrench(&trim_state(airspeed, gamma, sol.pitch), &act, p, &Vec3::zeros());
    let power = shaft_power(&fm, &act, p);
    let mut r = [0.0; RESIDUALS - STEADINESS_RESIDUALS];
    cost_residuals(sol, power, desired_pitch, neighbor_mean, cfg, &mut r);
    r.iter().map(|v| v * v).sum()
}

/// Full residual vector `[√Q_v v̇; √Q_θ θ̈; √q terms]`.
pub fn trim_residual(
    sol: &TrimSolution,
    airspeed: f64,
    gamma: f64,
    neighbor_mean: Option<&[f64; TRIM_VARS]>,
    p: &VehicleParams,
    cfg: &TrimConfig,
) -> Vec<f64> {
    let mut r = vec![0.0; RESIDUALS];
    fill_residual(sol, airspeed, gamma, neighbor_mean, p, cfg, &mut r);
    r
}

fn fill_residual(
    sol: &TrimSolution,
    airspeed: f64,
    gamma: f64,
    neighbor_mean: Option<&[f64; TRIM_VARS]>,
    p: &VehicleParams,
    cfg: &TrimConfig,
    r: &mut [f64],
) {
    let (st, fm) = evaluate(sol, airspeed, gamma, p);
    r[0] = cfg.q_v[0].sqrt() * st.accel[0];
    r[1] = cfg.q_v[1].sqrt() * st.accel[1];
    r[2] = cfg.q_theta.sqrt() * st.pitch_accel;
    let power = shaft_power(&fm, &sol.actuators(p), p);
    cost_residuals(
        sol,
        power,
        cfg.desired_pitch(airspeed, gamma),
        neighbor_mean,
        cfg,
        &mut r[STEADINESS_RESIDUALS..],
    );
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrimPoint {
    pub airspeed: f64,
    pub gamma: f64,
    pub solution: TrimSolution,
    /// ‖v̇‖ [m/s²].
    pub residual_v: f64,
    /// |θ̈| [rad/s²].
    pub residual_theta: f64,
    /// Total objective `v̇ᵀQ_v v̇ + Q_θ θ̈² + q`.
    pub cost: f64,
    pub feasible: bool,
    pub converged: bool,
    /// Neighbor average the cost was evaluated against.
    pub neighbor_mean: Option<[f64; TRIM_VARS]>,
}

/// Solves one operating point from an initial guess.
///
/// The guess is projected onto the admissible set. A point is feasible when
/// the solver terminated normally and both steadiness residuals are below the
/// configured thresholds.
pub fn solve_trim_point(
    airspeed: f64,
    gamma: f64,
    initial: &TrimSolution,
    neighbor_mean: Option<&[f64; TRIM_VARS]>,
    p: &VehicleParams,
    cfg: &TrimConfig,
) -> TrimPoint {
    let report = lm::minimize(
        |x, r| fill_residual(&TrimSolution::from_array(x), airspeed, gamma, neighbor_mean, p, cfg, r),
        RESIDUALS,
        &initial.to_array(),
        &TrimSolution::bounds(),
        &cfg.lm,
    );
    let solution = TrimSolution::from_array(&report.x);
    let st = steadiness(&solution, airspeed, gamma, p);
    let residual_v = st.accel_norm();
    let residual_theta = st.pitch_accel.abs();
    let converged = report.termination.converged();
    TrimPoint {
        airspeed,
        gamma,
        solution,
        residual_v,
        residual_theta,
        cost: report.cost,
        feasible: converged && residual_v < cfg.eps_v && residual_theta < cfg.eps_theta,
        converged,
        neighbor_mean: neighbor_mean.copied(),
    }
}

/// Uniform grid over airspeed and flight-path angle.
#[derive(Debug, Clone, PartialEq)]
pub struct TrimGrid {
    pub airspeed: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl TrimGrid {
    pub fn uniform(va_min: f64, va_max: f64, va_step: f64, g_min: f64, g_max: f64, g_step: f64) -> Self {
        let axis = |lo: f64, hi: f64, step: f64| {
            let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
            (0..n).map(|k| lo + step * k as f64).collect::<Vec<_>>()
        };
        Self {
            airspeed: axis(va_min, va_max, va_step),
            gamma: axis(g_min, g_max, g_step),
        }
    }

    /// 0–25 m/s in 1 m/s steps, ±30° in 5° steps.
    pub fn standard() -> Self {
        Self::uniform(0.0, 25.0, 1.0, -30.0 * DEG, 30.0 * DEG, 5.0 * DEG)
    }

    pub fn len(&self) -> usize {
        self.airspeed.len() * self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.gamma.len() + j
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx / self.gamma.len(), idx % self.gamma.len())
    }

    fn nearest(axis: &[f64], v: f64) -> usize {
        let mut best = 0;
        for (k, a) in axis.iter().enumerate() {
            if (a - v).abs() < (axis[best] - v).abs() {
                best = k;
            }
        }
        best
    }

    fn neighbors(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = self.coords(idx);
        let (ni, nj) = (self.airspeed.len() as isize, self.gamma.len() as isize);
        (-1isize..=1)
            .flat_map(move |di| (-1isize..=1).map(move |dj| (di, dj)))
            .filter(|&(di, dj)| di != 0 || dj != 0)
            .filter_map(move |(di, dj)| {
                let (a, b) = (i as isize + di, j as isize + dj);
                (a >= 0 && a < ni && b >= 0 && b < nj).then(|| self.index(a as usize, b as usize))
            })
    }

    fn validate(&self) -> Result<(), TrimError> {
        let increasing = |a: &[f64]| !a.is_empty() && a.windows(2).all(|w| w[1] > w[0]);
        if !increasing(&self.airspeed) || !increasing(&self.gamma) || self.airspeed[0] < 0.0 {
            return Err(TrimError::BadGrid);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrimMapMeta {
    pub sweeps: usize,
    pub solves: usize,
}

/// Trim solutions over a grid; every cell is present, feasible or not.
#[derive(Debug, Clone, PartialEq)]
pub struct TrimMap {
    pub grid: TrimGrid,
    /// Row-major over `(airspeed, gamma)`.
    pub points: Vec<TrimPoint>,
    pub config: TrimConfig,
    pub meta: TrimMapMeta,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrimError {
    #[error("grid axes must be non-empty and strictly increasing with airspeed >= 0")]
    BadGrid,
    #[error("seed point at va = {airspeed} m/s, gamma = {gamma} rad is infeasible (|dv| = {residual_v}, |ddtheta| = {residual_theta})")]
    SeedInfeasible {
        airspeed: f64,
        gamma: f64,
        residual_v: f64,
        residual_theta: f64,
    },
    #[error("trim map has no feasible cell")]
    NoFeasibleCell,
    #[error("trim map cell count {found} does not match the grid ({expected})")]
    Shape { expected: usize, found: usize },
}

/// Airspeeds below this are treated as hover, where γ is undefined.
pub const HOVER_SPEED: f64 = 0.5;

/// Work item of one sweep: a cell and the guesses to try on it.
#[derive(Debug, Clone, PartialEq)]
pub struct CellJob {
    pub cell: usize,
    pub guesses: Vec<TrimSolution>,
    pub neighbor_mean: Option<[f64; TRIM_VARS]>,
}

/// Incremental trim-map construction by neighbor propagation.
///
/// Each sweep works against a snapshot of the previous one, so the jobs of a
/// sweep are independent and may be solved in any order or in parallel;
/// [`TrimMapBuilder::apply`] merges them deterministically.
#[derive(Debug, Clone)]
pub struct TrimMapBuilder<'a> {
    grid: TrimGrid,
    params: &'a VehicleParams,
    config: TrimConfig,
    cells: Vec<Option<TrimPoint>>,
    changed: Vec<bool>,
    sweeps: usize,
    solves: usize,
    /// Cost history of every cell, appended when the kept solution changes.
    history: Vec<Vec<f64>>,
}

impl<'a> TrimMapBuilder<'a> {
    pub fn new(grid: TrimGrid, params: &'a VehicleParams, config: TrimConfig) -> Result<Self, TrimError> {
        grid.validate()?;
        let n = grid.len();
        Ok(Self {
            grid,
            params,
            config,
            cells: vec![None; n],
            changed: vec![false; n],
            sweeps: 0,
            solves: 0,
            history: vec![Vec::new(); n],
        })
    }

    pub fn grid(&self) -> &TrimGrid {
        &self.grid
    }

    pub fn cost_history(&self, cell: usize) -> &[f64] {
        &self.history[cell]
    }

    fn is_hover_row(&self, cell: usize) -> bool {
        self.grid.airspeed[self.grid.coords(cell).0] < HOVER_SPEED
    }

    /// Solves the seed at the grid node closest to `(airspeed, gamma)`.
    pub fn seed(&mut self, airspeed: f64, gamma: f64, guess: &TrimSolution) -> Result<(), TrimError> {
        let i = TrimGrid::nearest(&self.grid.airspeed, airspeed);
        let j = TrimGrid::nearest(&self.grid.gamma, gamma);
        let cell = self.grid.index(i, j);
        let point = self.solve_cell(cell, core::slice::from_ref(guess), None);
        self.solves += 1;
        if !point.feasible {
            return Err(TrimError::SeedInfeasible {
                airspeed: point.airspeed,
                gamma: point.gamma,
                residual_v: point.residual_v,
                residual_theta: point.residual_theta,
            });
        }
        self.store(cell, point);
        Ok(())
    }

    fn store(&mut self, cell: usize, point: TrimPoint) {
        let targets: Vec<usize> = if self.is_hover_row(cell) {
            let i = self.grid.coords(cell).0;
            (0..self.grid.gamma.len()).map(|j| self.grid.index(i, j)).collect()
        } else {
            vec![cell]
        };
        for t in targets {
            let mut pt = point;
            pt.gamma = self.grid.gamma[self.grid.coords(t).1];
            if pt.feasible {
                self.changed[t] = true;
                self.history[t].push(pt.cost);
            }
            self.cells[t] = Some(pt);
        }
    }

    fn solve_cell(&self, cell: usize, guesses: &[TrimSolution], mean: Option<&[f64; TRIM_VARS]>) -> TrimPoint {
        let (i, j) = self.grid.coords(cell);
        let va = self.grid.airspeed[i];
        let gamma = if va < HOVER_SPEED { 0.0 } else { self.grid.gamma[j] };
        let mut best: Option<TrimPoint> = None;
        for g in guesses {
            let pt = solve_trim_point(va, gamma, g, mean, self.params, &self.config);
            let better = match &best {
                None => true,
                Some(b) => match (pt.feasible, b.feasible) {
                    (true, false) => true,
                    (false, true) => false,
                    _ => pt.cost < b.cost,
                },
            };
            if better {
                best = Some(pt);
            }
        }
        let mut out = best.expect("at least one guess");
        out.gamma = self.grid.gamma[j];
        out
    }

    fn feasible_solution(&self, cell: usize) -> Option<TrimSolution> {
        self.cells[cell].filter(|p| p.feasible).map(|p| p.solution)
    }

    /// Jobs for the next sweep; empty once the map has converged.
    pub fn pending_jobs(&self) -> Vec<CellJob> {
        let mut jobs = Vec::new();
        for cell in 0..self.grid.len() {
            if self.is_hover_row(cell) && self.grid.coords(cell).1 != 0 {
                continue; // the whole hover row is solved through its first cell
            }
            let mut guesses = Vec::new();
            let mut sum = [0.0; TRIM_VARS];
            let mut count = 0usize;
            let neighbors: Vec<usize> = if self.is_hover_row(cell) {
                // the hover row behaves as a single cell
                let i = self.grid.coords(cell).0;
                let mut v: Vec<usize> = (0..self.grid.gamma.len())
                    .flat_map(|j| self.grid.neighbors(self.grid.index(i, j)))
                    .filter(|&n| !self.is_hover_row(n))
                    .collect();
                v.sort_unstable();
                v.dedup();
                v
            } else {
                self.grid.neighbors(cell).collect()
            };
            for &n in &neighbors {
                if let Some(sol) = self.feasible_solution(n) {
                    let x = sol.to_array();
                    for k in 0..TRIM_VARS {
                        sum[k] += x[k];
                    }
                    count += 1;
                    if self.changed[n] {
                        guesses.push(sol);
                    }
                }
            }
            if guesses.is_empty() {
                continue;
            }
            let neighbor_mean = (count > 0).then(|| sum.map(|s| s / count as f64));
            jobs.push(CellJob {
                cell,
                guesses,
                neighbor_mean,
            });
        }
        jobs
    }

    /// Solves one job against the current snapshot.
    pub fn run_job(&self, job: &CellJob) -> TrimPoint {
        self.solve_cell(job.cell, &job.guesses, job.neighbor_mean.as_ref())
    }

    /// Merges the results of one sweep. Returns true if any cell changed.
    pub fn apply(&mut self, results: Vec<(CellJob, TrimPoint)>) -> bool {
        self.sweeps += 1;
        self.changed.iter_mut().for_each(|c| *c = false);
        let mut any = false;
        for (job, point) in results {
            self.solves += job.guesses.len();
            let current = self.cells[job.cell];
            let adopt = match current {
                None => true,
                Some(cur) if cur.feasible => point.feasible && point.cost < cur.cost - 1e-9,
                Some(cur) => point.feasible || point.cost < cur.cost,
            };
            if adopt {
                any |= point.feasible;
                self.store(job.cell, point);
            }
        }
        any
    }

    pub fn finish(self) -> TrimMap {
        let grid = self.grid;
        let points = self
            .cells
            .into_iter()
            .enumerate()
            .map(|(idx, c)| {
                c.unwrap_or_else(|| {
                    let (i, j) = grid.coords(idx);
                    TrimPoint {
                        airspeed: grid.airspeed[i],
                        gamma: grid.gamma[j],
                        solution: TrimSolution::default(),
                        residual_v: f64::INFINITY,
                        residual_theta: f64::INFINITY,
                        cost: f64::INFINITY,
                        feasible: false,
                        converged: false,
                        neighbor_mean: None,
                    }
                })
            })
            .collect();
        TrimMap {
            grid,
            points,
            config: self.config,
            meta: TrimMapMeta {
                sweeps: self.sweeps,
                solves: self.solves,
            },
        }
    }
}

/// Upper bound on propagation sweeps.
pub const MAX_SWEEPS: usize = 200;

/// Builds a trim map sequentially from a seed guess.
pub fn build_trim_map(
    grid: TrimGrid,
    seed: (f64, f64, TrimSolution),
    p: &VehicleParams,
    cfg: &TrimConfig,
) -> Result<TrimMap, TrimError> {
    let mut builder = TrimMapBuilder::new(grid, p, *cfg)?;
    builder.seed(seed.0, seed.1, &seed.2)?;
    for _ in 0..MAX_SWEEPS {
        let jobs = builder.pending_jobs();
        if jobs.is_empty() {
            break;
        }
        let results = jobs
            .into_iter()
            .map(|job| {
                let pt = builder.run_job(&job);
                (job, pt)
            })
            .collect();
        if !builder.apply(results) {
            break;
        }
    }
    Ok(builder.finish())
}

/// Initial guess for the hover seed: wing vertical, level fuselage.
pub fn hover_guess(p: &VehicleParams) -> TrimSolution {
    let main = p.propeller(PropRole::Left);
    let eta = (p.weight() / 2.0 / (p.air_density * main.diameter.powi(4) * main.ct0)).sqrt();
    TrimSolution {
        wing: 1.0,
        main_throttle: clamp(eta / main.max_speed, 0.0, 1.0),
        aileron: 0.0,
        elevator: 0.0,
        tail_throttle: 0.3,
        pitch: 0.0,
    }
}

/// Result of a trim-map lookup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrimLookup {
    pub solution: TrimSolution,
    /// Query was outside the grid and got clamped onto it.
    pub clamped: bool,
    /// An enclosing corner was infeasible; the nearest feasible node was used.
    pub fallback: bool,
}

impl TrimMap {
    pub fn point(&self, i: usize, j: usize) -> &TrimPoint {
        &self.points[self.grid.index(i, j)]
    }

    pub fn feasible_count(&self) -> usize {
        self.points.iter().filter(|p| p.feasible).count()
    }

    pub fn check_shape(&self) -> Result<(), TrimError> {
        self.grid.validate()?;
        if self.points.len() != self.grid.len() {
            return Err(TrimError::Shape {
                expected: self.grid.len(),
                found: self.points.len(),
            });
        }
        Ok(())
    }

    /// Bilinear interpolation over the enclosing feasible cells.
    pub fn lookup(&self, airspeed: f64, gamma: f64) -> Result<TrimLookup, TrimError> {
        fn locate(axis: &[f64], v: f64) -> (usize, f64, bool) {
            let lo = axis[0];
            let hi = axis[axis.len() - 1];
            let clamped = v < lo || v > hi;
            let v = clamp(v, lo, hi);
            if axis.len() == 1 {
                return (0, 0.0, clamped);
            }
            let mut k = 0;
            while k + 2 < axis.len() && v >= axis[k + 1] {
                k += 1;
            }
            let t = (v - axis[k]) / (axis[k + 1] - axis[k]);
            (k, t, clamped)
        }
        let (i, ti, ci) = locate(&self.grid.airspeed, airspeed);
        let (j, tj, cj) = locate(&self.grid.gamma, gamma);
        let i1 = (i + 1).min(self.grid.airspeed.len() - 1);
        let j1 = (j + 1).min(self.grid.gamma.len() - 1);
        let corners = [
            (i, j, (1.0 - ti) * (1.0 - tj)),
            (i1, j, ti * (1.0 - tj)),
            (i, j1, (1.0 - ti) * tj),
            (i1, j1, ti * tj),
        ];
        let support_ok = corners
            .iter()
            .all(|&(a, b, w)| w == 0.0 || self.point(a, b).feasible);
        if support_ok {
            let mut x = [0.0; TRIM_VARS];
            for &(a, b, w) in &corners {
                if w == 0.0 {
                    continue;
                }
                let s = self.point(a, b).solution.to_array();
                for k in 0..TRIM_VARS {
                    x[k] += w * s[k];
                }
            }
            return Ok(TrimLookup {
                solution: TrimSolution::from_array(&x),
                clamped: ci || cj,
                fallback: false,
            });
        }
        // nearest feasible node in grid-index space
        let fi = i as f64 + ti;
        let fj = j as f64 + tj;
        let nearest = self
            .points
            .iter()
            .enumerate()
            .filter(|(_, p)| p.feasible)
            .map(|(idx, p)| {
                let (a, b) = self.grid.coords(idx);
                let d = (a as f64 - fi).powi(2) + (b as f64 - fj).powi(2);
                (d, idx, p)
            })
            .min_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then(x.1.cmp(&y.1)))
            .ok_or(TrimError::NoFeasibleCell)?;
        Ok(TrimLookup {
            solution: nearest.2.solution,
            clamped: ci || cj,
            fallback: true,
        })
    }
}
