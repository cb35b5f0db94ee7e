//! Trim-map CSV files.
//!
//! One row per grid node, row-major over (airspeed, gamma). Lines starting
//! with `#` carry build metadata and are ignored on reading.

use std::io::{Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use tiltwing_core::trim::{TrimConfig, TrimGrid, TrimMap, TrimMapMeta, TrimPoint, TrimSolution};

pub const COLUMNS: [&str; 13] = [
    "airspeed",
    "gamma",
    "wing",
    "main_throttle",
    "aileron",
    "elevator",
    "tail_throttle",
    "pitch",
    "residual_v",
    "residual_theta",
    "cost",
    "feasible",
    "converged",
];

pub fn write_trim_map<W: Write>(map: &TrimMap, mut out: W) -> Result<()> {
    writeln!(
        out,
        "# trim map: {} x {} nodes, {} sweeps, {} solves",
        map.grid.airspeed.len(),
        map.grid.gamma.len(),
        map.meta.sweeps,
        map.meta.solves
    )?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for p in &map.points {
        let s = &p.solution;
        let f = |x: f64| format!("{x}");
        w.write_record([
            f(p.airspeed),
            f(p.gamma),
            f(s.wing),
            f(s.main_throttle),
            f(s.aileron),
            f(s.elevator),
            f(s.tail_throttle),
            f(s.pitch),
            f(p.residual_v),
            f(p.residual_theta),
            f(p.cost),
            (p.feasible as u8).to_string(),
            (p.converged as u8).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trim_map<R: Read>(input: R, config: TrimConfig) -> Result<TrimMap> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(COLUMNS.iter().copied()) {
        bail!("unexpected trim-map columns: {:?}", header);
    }
    let mut points = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let v: Vec<f64> = rec
            .iter()
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .with_context(|| format!("trim-map row {}", line + 1))?;
        points.push(TrimPoint {
            airspeed: v[0],
            gamma: v[1],
            solution: TrimSolution {
                wing: v[2],
                main_throttle: v[3],
                aileron: v[4],
                elevator: v[5],
                tail_throttle: v[6],
                pitch: v[7],
            },
            residual_v: v[8],
            residual_theta: v[9],
            cost: v[10],
            feasible: v[11] != 0.0,
            converged: v[12] != 0.0,
            neighbor_mean: None,
        });
    }
    let mut airspeed: Vec<f64> = Vec::new();
    let mut gamma: Vec<f64> = Vec::new();
    for p in &points {
        if !airspeed.contains(&p.airspeed) {
            airspeed.push(p.airspeed);
        }
        if !gamma.contains(&p.gamma) {
            gamma.push(p.gamma);
        }
    }
    let grid = TrimGrid { airspeed, gamma };
    let map = TrimMap {
        grid,
        points,
        config,
        meta: TrimMapMeta::default(),
    };
    map.check_shape()?;
    for (idx, p) in map.points.iter().enumerate() {
        let (i, j) = map.grid.coords(idx);
        if p.airspeed != map.grid.airspeed[i] || p.gamma != map.grid.gamma[j] {
            bail!("trim-map rows are not row-major over (airspeed, gamma) at row {}", idx + 1);
        }
    }
    Ok(map)
}

pub fn save_trim_map(map: &TrimMap, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_trim_map(map, std::io::BufWriter::new(f))
}

pub fn load_trim_map(path: &Path, config: TrimConfig) -> Result<TrimMap> {
    let f = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_trim_map(std::io::BufReader::new(f), config).with_context(|| format!("in {}", path.display()))
}
