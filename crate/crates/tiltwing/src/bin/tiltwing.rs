use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use tiltwing::{build, check, config, log_io, report, scenario, trim_io};
use tiltwing_core::math::{from_euler, Vec3, DEG};
use tiltwing_core::sim::run_scenario;
use tiltwing_core::trim::{hover_guess, TrimGrid};
use tiltwing_core::{total_wrench, ActuatorSet, RigidBodyState, VehicleParams};

#[derive(Parser)]
#[command(name = "tiltwing", version, about = "Tiltwing VTOL simulation, trim maps and controller checks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Vehicle and controller configuration files.
    #[command(subcommand)]
    Config(ConfigCmd),
    /// Evaluate the aerodynamic model.
    #[command(subcommand)]
    Model(ModelCmd),
    /// Build or query trim maps.
    #[command(subcommand)]
    Trim(TrimCmd),
    /// Closed-loop simulation.
    #[command(subcommand)]
    Sim(SimCmd),
    /// Metrics of a run log.
    Report(ReportArgs),
    /// Run the invariant suites; exit code 1 if any fails.
    Check(CheckArgs),
}

#[derive(Args)]
struct VehicleArg {
    /// Vehicle TOML; the built-in reference vehicle when omitted.
    #[arg(long)]
    vehicle: Option<PathBuf>,
}

impl VehicleArg {
    fn load(&self) -> Result<VehicleParams> {
        match &self.vehicle {
            Some(p) => config::load_vehicle(p),
            None => Ok(VehicleParams::reference()),
        }
    }
}

#[derive(Subcommand)]
enum ConfigCmd {
    /// Parse and validate configuration files.
    Validate {
        #[command(flatten)]
        vehicle: VehicleArg,
        #[arg(long)]
        controller: Option<PathBuf>,
    },
    /// Print the reference vehicle and default controller settings as TOML.
    Defaults {
        /// Write `vehicle.toml` and `controller.toml` into this directory instead.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ModelCmd {
    /// Net wrench and per-source breakdown for one state and actuation.
    Eval {
        #[command(flatten)]
        vehicle: VehicleArg,
        /// Inertial velocity [m/s].
        #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.0, 0.0, 0.0], allow_negative_numbers = true)]
        velocity: Vec<f64>,
        /// Roll, pitch, yaw [deg].
        #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.0, 0.0, 0.0], allow_negative_numbers = true)]
        euler: Vec<f64>,
        /// Body rates [rad/s].
        #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.0, 0.0, 0.0], allow_negative_numbers = true)]
        omega: Vec<f64>,
        /// Nine normalized commands: w, pl, pr, pt, al, ar, e, r, tt.
        #[arg(long, value_delimiter = ',', num_args = 9, allow_negative_numbers = true)]
        commands: Vec<f64>,
        /// Inertial wind [m/s].
        #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.0, 0.0, 0.0], allow_negative_numbers = true)]
        wind: Vec<f64>,
    },
}

#[derive(Subcommand)]
enum TrimCmd {
    /// Build a trim map on the default grid, seeded at hover.
    Build {
        #[command(flatten)]
        vehicle: VehicleArg,
        #[arg(long)]
        controller: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Airspeed axis min,max,step [m/s].
        #[arg(long, value_delimiter = ',', num_args = 3)]
        airspeed: Option<Vec<f64>>,
        /// Flight-path angle axis min,max,step [deg].
        #[arg(long, value_delimiter = ',', num_args = 3, allow_negative_numbers = true)]
        gamma: Option<Vec<f64>>,
    },
    /// Interpolated trim at one operating point.
    Query {
        #[arg(long)]
        map: PathBuf,
        /// Airspeed [m/s].
        #[arg(long)]
        airspeed: f64,
        /// Flight-path angle [deg].
        #[arg(long, allow_negative_numbers = true)]
        gamma: f64,
    },
}

#[derive(Subcommand)]
enum SimCmd {
    /// Run one scenario and write its log.
    Run {
        #[command(flatten)]
        vehicle: VehicleArg,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long)]
        controller: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    log: PathBuf,
    /// Metrics CSV; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    vehicle: VehicleArg,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Cmd::Config(ConfigCmd::Validate { vehicle, controller }) => {
            vehicle.load()?;
            config::load_controller(controller.as_deref())?;
            println!("ok");
        }
        Cmd::Config(ConfigCmd::Defaults { out_dir }) => {
            let v = format!("{}\n{}", config::VEHICLE_HEADER, config::vehicle_to_toml(&VehicleParams::reference())?);
            let c = toml::to_string(&config::ControllerConfig::default())?;
            match out_dir {
                Some(d) => {
                    std::fs::create_dir_all(&d)?;
                    std::fs::write(d.join("vehicle.toml"), v)?;
                    std::fs::write(d.join("controller.toml"), c)?;
                }
                None => println!("{v}\n{c}"),
            }
        }
        Cmd::Model(ModelCmd::Eval {
            vehicle,
            velocity,
            euler,
            omega,
            commands,
            wind,
        }) => {
            let p = vehicle.load()?;
            let mut act = ActuatorSet::default();
            act.commands.copy_from_slice(&commands);
            let act = act.settled(&p.actuators);
            let state = RigidBodyState {
                velocity: Vec3::from_column_slice(&velocity),
                attitude: from_euler(euler[0] * DEG, euler[1] * DEG, euler[2] * DEG),
                omega: Vec3::from_column_slice(&omega),
                ..Default::default()
            };
            let fm = total_wrench(&state, &act, &p, &Vec3::from_column_slice(&wind));
            println!("source,fx,fy,fz,mx,my,mz,alpha_deg,thrust");
            for c in &fm.breakdown {
                let w = c.wrench;
                println!(
                    "{:?},{},{},{},{},{},{},{},{}",
                    c.source,
                    w.force.x,
                    w.force.y,
                    w.force.z,
                    w.moment.x,
                    w.moment.y,
                    w.moment.z,
                    c.alpha.map_or(String::new(), |a| format!("{}", a / DEG)),
                    c.thrust.map_or(String::new(), |t| format!("{t}"))
                );
            }
            println!(
                "total,{},{},{},{},{},{},,",
                fm.force.x, fm.force.y, fm.force.z, fm.moment.x, fm.moment.y, fm.moment.z
            );
        }
        Cmd::Trim(TrimCmd::Build {
            vehicle,
            controller,
            out,
            threads,
            airspeed,
            gamma,
        }) => {
            let p = vehicle.load()?;
            let cfg = config::load_controller(controller.as_deref())?;
            let std_grid = TrimGrid::standard();
            let axis = |v: Option<Vec<f64>>, scale: f64| v.map(|v| [v[0] * scale, v[1] * scale, v[2] * scale]);
            let va = axis(airspeed, 1.0).unwrap_or([0.0, 25.0, 1.0]);
            let gm = axis(gamma, DEG).unwrap_or([std_grid.gamma[0], *std_grid.gamma.last().unwrap(), 5.0 * DEG]);
            let grid = TrimGrid::uniform(va[0], va[1], va[2], gm[0], gm[1], gm[2]);
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.unwrap_or(0)).build()?;
            let started = std::time::Instant::now();
            let map = pool.install(|| {
                build::build_trim_map_parallel(grid, (0.0, 0.0, hover_guess(&p)), &p, &cfg.trim, |sweep, jobs| {
                    eprintln!("sweep {sweep}: {jobs} cells");
                })
            })?;
            trim_io::save_trim_map(&map, &out)?;
            eprintln!(
                "{} of {} cells feasible, {} sweeps, {} solves, {:.1} s",
                map.feasible_count(),
                map.points.len(),
                map.meta.sweeps,
                map.meta.solves,
                started.elapsed().as_secs_f64()
            );
        }
        Cmd::Trim(TrimCmd::Query { map, airspeed, gamma }) => {
            let map = trim_io::load_trim_map(&map, Default::default())?;
            let l = map.lookup(airspeed, gamma * DEG)?;
            let s = l.solution;
            println!("wing_tilt_cmd,main_throttle,aileron,elevator,tail_throttle,pitch_deg,clamped,fallback");
            println!(
                "{},{},{},{},{},{},{},{}",
                s.wing,
                s.main_throttle,
                s.aileron,
                s.elevator,
                s.tail_throttle,
                s.pitch / DEG,
                l.clamped,
                l.fallback
            );
        }
        Cmd::Sim(SimCmd::Run {
            vehicle,
            scenario,
            map,
            controller,
            out,
        }) => {
            let p = vehicle.load()?;
            let cfg = config::load_controller(controller.as_deref())?;
            let sc = scenario::load_scenario(&scenario)?;
            let map = map.map(|m| trim_io::load_trim_map(&m, cfg.trim)).transpose()?;
            let log = run_scenario(&sc, &p, map.as_ref(), &cfg.sim())?;
            log_io::save_log(&log, &out)?;
            if let Some(f) = &log.fault {
                eprintln!("{}", log_io::describe_fault(f));
                return Ok(ExitCode::from(1));
            }
        }
        Cmd::Report(ReportArgs { log, out }) => {
            let loaded = log_io::load_log(&log)?;
            if loaded.rows.is_empty() {
                bail!("log {} has no rows", log.display());
            }
            let s = report::report(&loaded.rows);
            eprint!("{}", report::summary_text(&loaded.scenario, &s, loaded.fault.as_deref()));
            match out {
                Some(path) => write_metrics(&s, &path)?,
                None => report::write_metrics_csv(&s, std::io::stdout().lock())?,
            }
        }
        Cmd::Check(CheckArgs { vehicle }) => {
            let p = vehicle.load()?;
            let results = check::run_all(&p);
            let mut ok = true;
            for r in &results {
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
                ok &= r.passed;
            }
            return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn write_metrics(s: &tiltwing_core::metrics::Summary, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    report::write_metrics_csv(s, f)
}
