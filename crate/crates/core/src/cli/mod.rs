//! Scenario files, the command pipelines and their on-disk artifacts.

mod config;
mod scenario;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub use config::{AnalysisConfig, AutoOr, CoefficientsConfig, Format, MeshConfig, OutputConfig, ScenarioConfig, TimeConfig};
pub use scenario::{FunctionSpaceReport, ReportRun, Scenario, SpectrumSummary};

use crate::analysis::{to_json_string, Spectrum};
use crate::discretization::DiscreteSystem;
use crate::error::{Error, Result};
use crate::evolution::EvolutionTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Classify,
    Check,
    Simulate,
    Spectrum,
    Report,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Process exit code for a failed command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::BadDelta { .. } | Error::BadGrading(_) | Error::BadMesh(_) => EXIT_CONFIG,
        Error::HypothesisViolation(_)
        | Error::NonIntegrableDrift
        | Error::DivergentSupremum { .. }
        | Error::NonPositiveCoefficient { .. } => EXIT_HYPOTHESIS,
        _ => EXIT_NUMERICAL,
    }
}

/// Files written by a command, relative to the output directory, plus a
/// one-line summary for the terminal.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Artifacts {
    pub files: Vec<(PathBuf, String)>,
    pub summary: String,
}

impl Artifacts {
    fn add(&mut self, name: impl Into<PathBuf>, body: String) {
        self.files.push((name.into(), body));
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        for (name, body) in &self.files {
            let path = dir.join(name);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent)
                    .map_err(|e| Error::InvalidInput(format!("cannot create {}: {e}", parent.display())))?;
            }
            fs::write(&path, body).map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?;
        }
        Ok(())
    }
}

fn snapshot_files(out: &mut Artifacts, sys: &DiscreteSystem, trace: &EvolutionTrace) {
    let nodes = sys.mesh.nodes();
    for snap in &trace.snapshots {
        let y = sys.full_nodal(&snap.y);
        let v = sys.full_nodal(&snap.v);
        let mut body = format!("# x y v  t = {:.16e}\n", snap.t);
        for i in 0..nodes.len() {
            let _ = writeln!(body, "{:.16e} {:.16e} {:.16e}", nodes[i], y[i], v[i]);
        }
        out.add(format!("snapshots/snapshot_{:07}.dat", snap.step), body);
    }
}

fn plot_energy(trace: &EvolutionTrace, m: f64) -> (String, String) {
    let mut energy = String::from("# t E\n");
    let mut bound = String::from("# t E bound\n");
    let e0 = trace.energies[0];
    for (t, e) in trace.times.iter().zip(&trace.energies) {
        let _ = writeln!(energy, "{t:.16e} {e:.16e}");
        let _ = writeln!(bound, "{t:.16e} {e:.16e} {:.16e}", e0 * (1.0 - t / m).exp());
    }
    (energy, bound)
}

fn plot_eigenvalues(sp: &Spectrum) -> String {
    let mut out = String::from("# re im\n");
    for z in &sp.eigenvalues {
        let _ = writeln!(out, "{:.16e} {:.16e}", z.re, z.im);
    }
    out
}

/// Runs one pipeline and returns its artifacts without touching the disk.
pub fn execute(command: Command, config: ScenarioConfig) -> Result<Artifacts> {
    let scenario = Scenario::new(config)?;
    let cfg = &scenario.config;
    let mut out = Artifacts::default();
    match command {
        Command::Classify => {
            let h = scenario.hypotheses();
            let json = to_json_string(h);
            out.summary = json.trim_end().to_string();
            if cfg.wants(Format::Json) {
                out.add("hypotheses.json", json);
            }
        }
        Command::Check => {
            let report = scenario.check()?;
            let json = to_json_string(&report);
            out.summary = json.trim_end().to_string();
            if cfg.wants(Format::Json) {
                out.add("check.json", json);
            }
        }
        Command::Simulate => {
            let (sys, trace) = scenario.simulate()?;
            out.summary = format!(
                "steps = {}, E(0) = {:.6e}, E(T) = {:.6e}, snapshots = {}",
                trace.len() - 1,
                trace.energies[0],
                trace.energies[trace.len() - 1],
                trace.snapshots.len()
            );
            if cfg.wants(Format::Csv) {
                out.add("trace.csv", trace.to_csv());
            }
            snapshot_files(&mut out, &sys, &trace);
        }
        Command::Spectrum => {
            let sp = scenario.spectrum()?;
            let summary = sp.summary();
            out.summary = format!("abscissa = {:.16e}", sp.abscissa);
            if cfg.wants(Format::Csv) {
                out.add("spectrum.csv", sp.to_csv());
            }
            if cfg.wants(Format::Json) {
                out.add("spectrum.json", to_json_string(&summary));
            }
            if cfg.wants(Format::Plot) {
                out.add("eigenvalues.dat", plot_eigenvalues(&sp));
            }
        }
        Command::Report => {
            let run = scenario.report()?;
            let r = &run.report;
            out.summary = format!(
                "M = {:.6e}, fitted rate = {:.6e}, bound_ok = {}, inequalities ok = {}",
                r.constants.m, r.fitted_rate, r.bound_ok, r.inequality_slacks.all_ok
            );
            if cfg.wants(Format::Json) {
                out.add("report.json", to_json_string(r));
            }
            if cfg.wants(Format::Csv) {
                out.add("trace.csv", run.trace.to_csv());
                if let Some(sp) = &run.spectrum {
                    out.add("spectrum.csv", sp.to_csv());
                }
            }
            if cfg.wants(Format::Plot) {
                let (energy, bound) = plot_energy(&run.trace, r.constants.m);
                out.add("energy.dat", energy);
                out.add("bound.dat", bound);
                if let Some(sp) = &run.spectrum {
                    out.add("eigenvalues.dat", plot_eigenvalues(sp));
                }
            }
        }
    }
    Ok(out)
}

/// `report` on an in-memory config, returning the report JSON.
pub fn report_json(config_text: &str, base_dir: &Path) -> Result<String> {
    let scenario = Scenario::new(ScenarioConfig::parse(config_text, base_dir)?)?;
    Ok(to_json_string(&scenario.report()?.report))
}

/// Loads `config_path`, runs `command`, writes artifacts to `out_dir` (or the
/// configured directory) and returns the exit code. Messages go to stdout/stderr.
pub fn run_command(command: Command, config_path: &Path, out_dir: Option<&Path>) -> i32 {
    let result = ScenarioConfig::load(config_path).and_then(|cfg| {
        let dir = out_dir.map(Path::to_path_buf).unwrap_or_else(|| cfg.output.directory.clone());
        let artifacts = execute(command, cfg)?;
        artifacts.write_to(&dir)?;
        Ok(artifacts)
    });
    match result {
        Ok(a) => {
            println!("{}", a.summary);
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Runs `report` on every config concurrently, each into `<dir>/<config stem>`.
/// Returns the largest exit code.
pub fn run_sweep(configs: &[PathBuf], out_dir: Option<&Path>) -> i32 {
    let codes: Vec<i32> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|path| {
                s.spawn(move || -> (String, Result<Artifacts>) {
                    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                    let res = ScenarioConfig::load(path).and_then(|cfg| {
                        let base = out_dir.map(Path::to_path_buf).unwrap_or_else(|| cfg.output.directory.clone());
                        let artifacts = execute(Command::Report, cfg)?;
                        artifacts.write_to(&base.join(&stem))?;
                        Ok(artifacts)
                    });
                    (stem, res)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| match h.join() {
                Ok((stem, Ok(a))) => {
                    println!("{stem}: {}", a.summary);
                    EXIT_OK
                }
                Ok((stem, Err(e))) => {
                    eprintln!("{stem}: error: {e}");
                    exit_code(&e)
                }
                Err(_) => EXIT_NUMERICAL,
            })
            .collect()
    });
    codes.into_iter().max().unwrap_or(EXIT_OK)
}
