//! Command-line front end. Results go to stdout as one JSON object holding
//! the result fields and a `manifest`; errors go to stderr as JSON with a
//! category, and set the exit code.

use crate::error::{Error, Result};
use crate::lattice_ym::{
    estimate_graph_wilson, standard_refinements, subdivision_check, subdivision_check_mc,
    u1_exact_wilson, SurfaceGraph,
};
use crate::master_field::{phi_plane, recursion_size, MasterFieldQuery};
use crate::planar_loops::{parse_loop_file, LoopFile, Surface};
use crate::rep_theory::{biane_rains_moment, plane_trace_moment};
use crate::sphere_eq::{self, SolverParams};
use crate::unitary_bm::{estimate_wilson_word, WordSpec};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Parser)]
#[command(
    name = "ym2d",
    version,
    about = "Wilson loops of two-dimensional U(N) Yang-Mills theory"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the faces of a loop file (ids to use on `area:` lines).
    Faces { loop_file: PathBuf },
    /// E tr(U_t^n) for unitary Brownian motion.
    Moment {
        #[arg(long = "n")]
        power: u32,
        #[arg(long)]
        t: f64,
        /// Rank; not used by `--method limit`.
        #[arg(long = "N")]
        rank: Option<usize>,
        #[arg(long, value_enum, default_value_t = Method::Character)]
        method: Method,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Large-N value of a planar loop diagram (areas from the file).
    MasterField {
        loop_file: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Monte Carlo Wilson loop on a planar graph file.
    McWilson {
        graph_file: PathBuf,
        #[arg(long = "N")]
        rank: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare exact U(1) values on a graph and three refinements of it;
    /// with `--N` also compare Monte Carlo means (plane only).
    CheckSubdivision {
        graph_file: PathBuf,
        #[arg(long = "N")]
        rank: Option<usize>,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Large-N sphere: equilibrium density, free energy, Wilson moments.
    Sphere {
        #[command(subcommand)]
        command: SphereCommand,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Character,
    Mc,
    Limit,
}

#[derive(Debug, Clone, clap::Args)]
pub struct SolverArgs {
    /// Number of grid cells (even).
    #[arg(long, default_value_t = sphere_eq::DEFAULT_GRID)]
    grid: usize,
    /// Stop once the energy falls by less than this over a window of iterations.
    #[arg(long, default_value_t = sphere_eq::DEFAULT_TOL)]
    tol: f64,
}

impl SolverArgs {
    fn params(&self) -> SolverParams {
        SolverParams {
            grid: self.grid,
            tol: self.tol,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum SphereCommand {
    /// Minimising density. CSV columns: x (cell centre), rho (density).
    Minimize {
        #[arg(long = "T")]
        total: f64,
        #[command(flatten)]
        solver: SolverArgs,
        /// CSV path; defaults to `sphere-minimize-T<T>.csv` in the current directory.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Free energy on an evenly spaced scan. CSV columns: T, F, F3 (centred
    /// third divided difference, empty at the ends).
    FreeEnergy {
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        points: usize,
        #[command(flatten)]
        solver: SolverArgs,
        /// CSV path; defaults to `sphere-free-energy-<from>-<to>-<points>.csv`.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Large-N E tr(H^n) for a simple loop enclosing area t.
    Moment {
        #[arg(long = "n")]
        power: u32,
        #[arg(long = "T")]
        total: f64,
        #[arg(long)]
        t: f64,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

/// Provenance attached to every result.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub version: &'static str,
    pub elapsed_seconds: f64,
    pub outputs: Vec<String>,
}

struct Outcome {
    result: Value,
    parameters: Value,
    seed: Option<u64>,
    outputs: Vec<String>,
}

impl Outcome {
    fn new(result: Value, parameters: Value) -> Self {
        Outcome {
            result,
            parameters,
            seed: None,
            outputs: Vec::new(),
        }
    }
}

fn read_loop_file(path: &Path) -> Result<LoopFile> {
    let src = std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    parse_loop_file(&src)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serialises")
}

fn cmd_faces(path: &Path) -> Result<Outcome> {
    let file = read_loop_file(path)?;
    let cm = &file.map;
    let outer = cm.outer_faces();
    let faces: Vec<Value> = (0..cm.num_faces())
        .map(|f| {
            let mut o = json!({
                "id": cm.face_label(f),
                "boundary": cm.face_boundary_arcs(f),
                "unbounded": f == cm.unbounded(),
                "adjacent_to_unbounded": outer.contains(&f),
            });
            if let Some(a) = &file.areas {
                if a[f].is_finite() {
                    o["area"] = json!(a[f]);
                }
            }
            o
        })
        .collect();
    let result = json!({
        "loops": cm.num_loops(),
        "crossings": cm.crossing_labels().len(),
        "bounded_faces": cm.num_faces() - 1,
        "faces": faces,
    });
    Ok(Outcome::new(result, json!({ "loop_file": path })))
}

#[allow(clippy::too_many_arguments)]
fn cmd_moment(
    power: u32,
    t: f64,
    rank: Option<usize>,
    method: Method,
    samples: usize,
    step: f64,
    seed: u64,
) -> Result<Outcome> {
    let need_rank =
        || rank.ok_or_else(|| Error::Argument("--N is required for this method".into()));
    let mut params = json!({ "n": power, "t": t, "method": method });
    let mut out_seed = None;
    let result = match method {
        Method::Character => {
            let n = need_rank()?;
            params["N"] = json!(n);
            json!({ "value": plane_trace_moment(power, t, n)? })
        }
        Method::Limit => {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(Error::Argument(format!(
                    "time must be non-negative, got {t}"
                )));
            }
            json!({ "value": biane_rains_moment(power, t) })
        }
        Method::Mc => {
            let n = need_rank()?;
            params["N"] = json!(n);
            params["samples"] = json!(samples);
            params["step"] = json!(step);
            out_seed = Some(seed);
            let word = WordSpec::parse(&format!("tr(U@t^{power})"))?;
            let times = BTreeMap::from([("t".to_string(), t)]);
            let est = estimate_wilson_word(&word, &times, n, samples, step, seed)?;
            json!({ "value": est.mean, "stderr": est.stderr })
        }
    };
    Ok(Outcome {
        seed: out_seed,
        ..Outcome::new(result, params)
    })
}

fn cmd_master_field(path: &Path, tol: f64) -> Result<Outcome> {
    let file = read_loop_file(path)?;
    if file.surface != Surface::Plane {
        return Err(Error::Unsupported(
            "the master field is computed in the plane only".into(),
        ));
    }
    let areas = file
        .bounded_areas()
        .ok_or_else(|| Error::Semantic("the loop file has no `area:` line".into()))?;
    let q = MasterFieldQuery::new(file.map.clone(), areas).with_tolerance(tol);
    let value = phi_plane(&q)?;
    let result = json!({ "value": value, "recursion_size": recursion_size(&q)? });
    Ok(Outcome::new(
        result,
        json!({ "loop_file": path, "tol": tol }),
    ))
}

fn cmd_mc_wilson(
    path: &Path,
    rank: usize,
    samples: usize,
    step: f64,
    seed: u64,
) -> Result<Outcome> {
    let file = read_loop_file(path)?;
    let (g, loops) = SurfaceGraph::from_loop_file(&file)?;
    let est = estimate_graph_wilson(&g, &loops, rank, samples, step, seed)?;
    let result = json!({ "mean": est.mean, "stderr": est.stderr });
    let params = json!({ "graph_file": path, "N": rank, "samples": samples, "step": step });
    Ok(Outcome {
        seed: Some(seed),
        ..Outcome::new(result, params)
    })
}

fn cmd_check_subdivision(
    path: &Path,
    rank: Option<usize>,
    samples: usize,
    step: f64,
    seed: u64,
) -> Result<Outcome> {
    let file = read_loop_file(path)?;
    let (g, loops) = SurfaceGraph::from_loop_file(&file)?;
    let mut entries = Vec::new();
    let mut max_u1: f64 = 0.0;
    let mut max_z: f64 = 0.0;
    for r in standard_refinements(&g)? {
        let rep = subdivision_check(&g, &r, &loops)?;
        max_u1 = max_u1.max(rep.max_difference);
        let mut e = json!({
            "edges": r.fine.num_edges(),
            "faces": r.fine.map().num_faces(),
            "u1": rep,
        });
        if let Some(n) = rank {
            let mc = subdivision_check_mc(&g, &r, &loops, n, samples, step, seed)?;
            max_z = max_z.max(mc.z);
            e["mc"] = to_value(&mc);
        }
        entries.push(e);
    }
    let mut result = json!({
        "coarse_u1": u1_exact_wilson(&g, &loops)?,
        "refinements": entries,
        "max_u1_difference": max_u1,
        "u1_equal": max_u1 <= 1e-12,
    });
    let mut params = json!({ "graph_file": path });
    let mut out_seed = None;
    if let Some(n) = rank {
        result["max_mc_z"] = json!(max_z);
        result["mc_consistent"] = json!(max_z <= 4.0);
        params["N"] = json!(n);
        params["samples"] = json!(samples);
        params["step"] = json!(step);
        out_seed = Some(seed);
    }
    Ok(Outcome {
        seed: out_seed,
        ..Outcome::new(result, params)
    })
}

fn write_csv(path: &Path, f: impl FnOnce(std::fs::File) -> Result<()>) -> Result<String> {
    let file = std::fs::File::create(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    f(file)?;
    Ok(path.display().to_string())
}

fn cmd_sphere(cmd: &SphereCommand) -> Result<Outcome> {
    match cmd {
        SphereCommand::Minimize { total, solver, csv } => {
            let r = sphere_eq::minimize_JT(*total, solver.params())?;
            let path = csv
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("sphere-minimize-T{total}.csv")));
            let written = write_csv(&path, |f| sphere_eq::write_density_csv(f, &r))?;
            let result = json!({
                "energy": r.energy,
                "free_energy": sphere_eq::free_energy_from(&r),
                "support": [r.support.0, r.support.1],
                "cap_interval": r.cap_interval.map(|(a, b)| [a, b]),
                "max_density": r.measure.max_density(),
                "iterations": r.iterations,
                "gap": r.gap,
                "discretization_estimate": r.discretization_estimate,
            });
            let params = json!({ "T": total, "grid": solver.grid, "tol": solver.tol });
            Ok(Outcome {
                outputs: vec![written],
                ..Outcome::new(result, params)
            })
        }
        SphereCommand::FreeEnergy {
            from,
            to,
            points,
            solver,
            csv,
        } => {
            if *points < 2 || !(to > from) {
                return Err(Error::Argument(
                    "need --to > --from and at least two points".into(),
                ));
            }
            let h = (to - from) / (*points - 1) as f64;
            let ts: Vec<f64> = (0..*points).map(|k| from + h * k as f64).collect();
            let f = sphere_eq::free_energy_scan(&ts, solver.params())?;
            let path = csv.clone().unwrap_or_else(|| {
                PathBuf::from(format!("sphere-free-energy-{from}-{to}-{points}.csv"))
            });
            let written = write_csv(&path, |file| {
                sphere_eq::write_free_energy_csv(file, &ts, &f)
            })?;
            let mut result = json!({ "points": points, "step": h });
            // the largest change between neighbouring third differences brackets the jump
            let d3 = sphere_eq::divided_differences(&f, h, 3);
            if d3.len() >= 2 {
                let k = (0..d3.len() - 1)
                    .max_by(|&a, &b| {
                        (d3[a + 1] - d3[a])
                            .abs()
                            .total_cmp(&(d3[b + 1] - d3[b]).abs())
                    })
                    .expect("non-empty");
                // stencil j covers ts[j..=j+3]
                result["third_difference_jump"] = json!({
                    "bracket": [ts[k] + 1.5 * h, ts[k + 1] + 1.5 * h],
                    "before": d3[k],
                    "after": d3[k + 1],
                });
            }
            let params = json!({ "from": from, "to": to, "points": points, "grid": solver.grid, "tol": solver.tol });
            Ok(Outcome {
                outputs: vec![written],
                ..Outcome::new(result, params)
            })
        }
        SphereCommand::Moment {
            power,
            total,
            t,
            solver,
        } => {
            let r = sphere_eq::minimize_JT(*total, solver.params())?;
            let value = sphere_eq::dn_moment(*power, *t, &r)?;
            let params =
                json!({ "n": power, "T": total, "t": t, "grid": solver.grid, "tol": solver.tol });
            Ok(Outcome::new(json!({ "value": value }), params))
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Faces { .. } => "faces",
        Command::Moment { .. } => "moment",
        Command::MasterField { .. } => "master-field",
        Command::McWilson { .. } => "mc-wilson",
        Command::CheckSubdivision { .. } => "check-subdivision",
        Command::Sphere {
            command: SphereCommand::Minimize { .. },
        } => "sphere minimize",
        Command::Sphere {
            command: SphereCommand::FreeEnergy { .. },
        } => "sphere free-energy",
        Command::Sphere {
            command: SphereCommand::Moment { .. },
        } => "sphere moment",
    }
}

/// Runs a parsed command and returns the JSON document for stdout.
pub fn execute(cli: &Cli) -> Result<Value> {
    let start = Instant::now();
    let out = match &cli.command {
        Command::Faces { loop_file } => cmd_faces(loop_file),
        Command::Moment {
            power,
            t,
            rank,
            method,
            samples,
            step,
            seed,
        } => cmd_moment(*power, *t, *rank, *method, *samples, *step, *seed),
        Command::MasterField { loop_file, tol } => cmd_master_field(loop_file, *tol),
        Command::McWilson {
            graph_file,
            rank,
            samples,
            step,
            seed,
        } => cmd_mc_wilson(graph_file, *rank, *samples, *step, *seed),
        Command::CheckSubdivision {
            graph_file,
            rank,
            samples,
            step,
            seed,
        } => cmd_check_subdivision(graph_file, *rank, *samples, *step, *seed),
        Command::Sphere { command } => cmd_sphere(command),
    }?;
    let parameters = match out.parameters {
        Value::Object(m) => m.into_iter().collect(),
        _ => BTreeMap::new(),
    };
    let manifest = RunManifest {
        command: command_name(&cli.command).into(),
        parameters,
        seed: out.seed,
        version: env!("CARGO_PKG_VERSION"),
        elapsed_seconds: start.elapsed().as_secs_f64(),
        outputs: out.outputs,
    };
    let mut doc = match out.result {
        Value::Object(m) => m,
        other => Map::from_iter([("result".to_string(), other)]),
    };
    doc.insert("manifest".into(), to_value(&manifest));
    Ok(Value::Object(doc))
}

/// Honours `YM2D_THREADS` by sizing the global rayon pool.
pub fn configure_threads() -> Result<()> {
    if let Ok(s) = std::env::var("YM2D_THREADS") {
        let n: usize = s.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            Error::Argument(format!(
                "YM2D_THREADS must be a positive integer, got `{s}`"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Resource(e.to_string()))?;
    }
    Ok(())
}

/// Entry point of the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match configure_threads().and_then(|_| execute(&cli)) {
        Ok(doc) => {
            use std::io::Write;
            let text = serde_json::to_string_pretty(&doc).expect("JSON values serialise");
            // a closed pipe downstream is not our failure
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            0
        }
        Err(e) => {
            let doc = json!({ "error": { "category": e.category(), "message": e.to_string() } });
            eprintln!("{doc}");
            e.exit_code()
        }
    }
}
