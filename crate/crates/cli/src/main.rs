//! Command-line interface: simulation, analytic propagation, parity logic,
//! generator inspection, and parameter sweeps.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 numerical
//! error, 4 encoding mismatch (physical parity witness failure).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use atomlogic::{
    integrate, parse_config, parse_sweep, readout, run_parity, superevolution, Error,
    GeneratorBasis, OutputFormat, ParityMode, Readout, SimulationConfig, StructureConstants,
    SweepSpec, Trajectory, TransitionRecord, COMMUTATIVITY_TOL,
};

#[derive(Parser)]
#[command(name = "atomlogic", version, about = "Coherence-vector atomic dynamics and logic")]
struct Cli {
    /// JSON configuration file (simulation config, or sweep spec for `sweep`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file for trajectory / table data.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Output file format.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Seed for randomized harness data generation; accepted for
    /// reproducibility plumbing, unused by the deterministic subcommands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Rk4,
    Sylvester,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StartArg {
    Even,
    Odd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Logical,
    Physical,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the equation of motion and print a summary (the default
    /// configuration reproduces the reference resonant pulse).
    Simulate,
    /// Evolve the initial state over the whole window analytically and/or
    /// numerically.
    Propagate {
        #[arg(long, value_enum, default_value = "both")]
        method: Method,
    },
    /// Run the serial parity checker over a bit string.
    Parity {
        #[arg(long)]
        bits: String,
        #[arg(long, value_enum, default_value = "even")]
        start: StartArg,
        #[arg(long, value_enum, default_value = "logical")]
        mode: ModeArg,
    },
    /// Print the generator basis for an N-level system.
    Generators {
        #[arg(long)]
        n: usize,
        /// Also compute and print orthonormality / antisymmetry /
        /// reconstruction residuals.
        #[arg(long)]
        check: bool,
    },
    /// Run a parameter sweep described by a sweep-spec config file.
    Sweep,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &CliError) -> u8 {
    match err {
        CliError::Io(_) => 1,
        CliError::Lib(Error::Config(_)) => 2,
        CliError::Lib(Error::EncodingMismatch { .. }) => 4,
        CliError::Lib(_) => 3,
        CliError::SweepFailures(_) => 3,
    }
}

enum CliError {
    Io(String),
    Lib(Error),
    SweepFailures(usize),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(msg) => write!(f, "{msg}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::SweepFailures(n) => write!(f, "{n} sweep row(s) failed"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate => cmd_simulate(cli),
        Command::Propagate { method } => cmd_propagate(cli, *method),
        Command::Parity { bits, start, mode } => cmd_parity(cli, bits, *start, *mode),
        Command::Generators { n, check } => cmd_generators(cli, *n, *check),
        Command::Sweep => cmd_sweep(cli),
    }
}

fn read_file(path: &PathBuf) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Load the simulation config, falling back to the built-in reference
/// parameters, and apply --output/--format overrides.
fn load_config(cli: &Cli) -> Result<SimulationConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => parse_config(&read_file(path)?)?,
        None => SimulationConfig::default(),
    };
    if let Some(path) = &cli.output {
        let format = match cli.format {
            Some(FormatArg::Json) => OutputFormat::Json,
            Some(FormatArg::Csv) => OutputFormat::Csv,
            None => cfg
                .output
                .as_ref()
                .map(|o| o.format.clone())
                .unwrap_or(OutputFormat::Csv),
        };
        cfg.output = Some(atomlogic::OutputSpec {
            path: path.display().to_string(),
            format,
        });
    }
    Ok(cfg)
}

/// Full-precision decimal formatting (17 significant digits round-trips f64).
fn full(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Serialize)]
struct Summary {
    t: f64,
    s: Vec<f64>,
    #[serde(flatten)]
    readout: Readout,
    norm_drift: f64,
    samples: usize,
}

fn summarize(cfg: &SimulationConfig, traj: &Trajectory) -> Result<Summary, CliError> {
    let s = traj.final_state();
    let obs = readout(&s, &cfg.thresholds)?;
    Ok(Summary {
        t: *traj.times().last().expect("trajectory is nonempty"),
        s: s.as_vector().iter().copied().collect(),
        readout: obs,
        norm_drift: traj.norm_drift(),
        samples: traj.len(),
    })
}

fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,S1,S2,S3,rho00,rho11,re_rho01,im_rho01\n");
    for (t, s) in traj.times().iter().zip(traj.states()) {
        let rho00 = (1.0 + s[2]) / 2.0;
        let rho11 = (1.0 - s[2]) / 2.0;
        let re01 = s[0] / 2.0;
        let im01 = -s[1] / 2.0;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            full(*t),
            full(s[0]),
            full(s[1]),
            full(s[2]),
            full(rho00),
            full(rho11),
            full(re01),
            full(im01),
        ));
    }
    out
}

#[derive(Serialize)]
struct TrajectoryDocument<'a> {
    config: &'a SimulationConfig,
    norm_drift: f64,
    columns: [&'static str; 8],
    rows: Vec<[f64; 8]>,
}

fn trajectory_json(cfg: &SimulationConfig, traj: &Trajectory) -> String {
    let rows = traj
        .times()
        .iter()
        .zip(traj.states())
        .map(|(t, s)| {
            [
                *t,
                s[0],
                s[1],
                s[2],
                (1.0 + s[2]) / 2.0,
                (1.0 - s[2]) / 2.0,
                s[0] / 2.0,
                -s[1] / 2.0,
            ]
        })
        .collect();
    let doc = TrajectoryDocument {
        config: cfg,
        norm_drift: traj.norm_drift(),
        columns: [
            "t", "S1", "S2", "S3", "rho00", "rho11", "re_rho01", "im_rho01",
        ],
        rows,
    };
    serde_json::to_string_pretty(&doc).expect("trajectory serializes")
}

fn write_trajectory(cfg: &SimulationConfig, traj: &Trajectory) -> Result<(), CliError> {
    if let Some(spec) = &cfg.output {
        let text = match spec.format {
            OutputFormat::Csv => trajectory_csv(traj),
            OutputFormat::Json => trajectory_json(cfg, traj),
        };
        write_file(&PathBuf::from(&spec.path), &text)?;
    }
    Ok(())
}

fn cmd_simulate(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    let traj = integrate(&cfg)?;
    write_trajectory(&cfg, &traj)?;
    let summary = summarize(&cfg, &traj)?;
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    Ok(())
}

#[derive(Serialize)]
struct PropagateReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    rk4: Option<Summary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sylvester: Option<SylvesterReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_deviation: Option<f64>,
}

#[derive(Serialize)]
struct SylvesterReport {
    s: Vec<f64>,
    matrix: Vec<Vec<f64>>,
    eigenvalues: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    zeta: Option<f64>,
    orthogonality_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostic: Option<&'static str>,
}

fn cmd_propagate(cli: &Cli, method: Method) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    cfg.validate()?;

    let rk4 = if method != Method::Sylvester {
        let traj = integrate(&cfg)?;
        Some(summarize(&cfg, &traj)?)
    } else {
        None
    };

    let sylvester = if method != Method::Rk4 {
        let system = atomlogic::BlochSystem::two_level(cfg.pulse.clone(), cfg.delta)?;
        let s0 = atomlogic::initial_coherence(&cfg, system.basis())?;
        let prop = superevolution(&system, cfg.window.0, cfg.window.1, COMMUTATIVITY_TOL)?;
        let s = prop.apply(&s0)?;
        Some(SylvesterReport {
            s: s.as_vector().iter().copied().collect(),
            matrix: prop
                .matrix
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
            eigenvalues: prop.eigenvalues.iter().map(|l| [l.re, l.im]).collect(),
            zeta: prop.zeta,
            orthogonality_residual: prop.orthogonality_residual(),
            diagnostic: prop.diagnostic,
        })
    } else {
        None
    };

    let max_deviation = match (&rk4, &sylvester) {
        (Some(a), Some(b)) => Some(
            a.s.iter()
                .zip(&b.s)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
        ),
        _ => None,
    };

    let report = PropagateReport {
        rk4,
        sylvester,
        max_deviation,
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

#[derive(Serialize)]
struct ParityReport<'a> {
    start: u8,
    final_state: u8,
    final_parity: &'static str,
    outputs: &'a [u8],
    transcript: &'a [TransitionRecord],
}

fn cmd_parity(cli: &Cli, bits: &str, start: StartArg, mode: ModeArg) -> Result<(), CliError> {
    let start_bit = match start {
        StartArg::Even => 0,
        StartArg::Odd => 1,
    };
    let mode = match mode {
        ModeArg::Logical => ParityMode::Logical,
        ModeArg::Physical => {
            let cfg = match &cli.config {
                Some(path) => parse_config(&read_file(path)?)?,
                None => SimulationConfig::default(),
            };
            ParityMode::Physical(Box::new(cfg))
        }
    };
    let (final_state, outputs, transcript) = run_parity(bits, start_bit, mode)?;

    let report = ParityReport {
        start: start_bit,
        final_state,
        final_parity: if final_state == 0 { "even" } else { "odd" },
        outputs: &outputs,
        transcript: &transcript,
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));

    if let Some(path) = &cli.output {
        // State-table export: truth-table column order PS, PI, NS, PO.
        match cli.format {
            None | Some(FormatArg::Csv) => {
                let mut out = String::from("PS,PI,NS,PO\n");
                for r in &transcript {
                    out.push_str(&format!(
                        "{},{},{},{}\n",
                        r.present_state, r.present_input, r.next_state, r.present_output
                    ));
                }
                write_file(path, &out)?;
            }
            Some(FormatArg::Json) => {
                let text =
                    serde_json::to_string_pretty(&report).expect("report serializes");
                write_file(path, &text)?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct GeneratorReport {
    n: usize,
    count: usize,
    generators: Vec<GeneratorEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    check: Option<GeneratorChecks>,
}

#[derive(Serialize)]
struct GeneratorEntry {
    index: usize,
    kind: String,
    /// Matrix entries as [re, im] pairs, row-major.
    matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize)]
struct GeneratorChecks {
    orthonormality_residual: f64,
    hermiticity_residual: f64,
    structure_antisymmetry_residual: f64,
    commutator_reconstruction_residual: f64,
    nonzero_structure_constants: usize,
}

fn cmd_generators(_cli: &Cli, n: usize, check: bool) -> Result<(), CliError> {
    let basis = GeneratorBasis::new(n)?;
    let generators = (0..basis.len())
        .map(|j| GeneratorEntry {
            index: j,
            kind: format!("{:?}", basis.label(j)),
            matrix: basis
                .generator(j)
                .row_iter()
                .map(|r| r.iter().map(|c| [c.re, c.im]).collect())
                .collect(),
        })
        .collect();
    let checks = if check {
        let f = StructureConstants::compute(&basis)?;
        Some(GeneratorChecks {
            orthonormality_residual: basis.orthonormality_residual(),
            hermiticity_residual: basis.hermiticity_residual(),
            structure_antisymmetry_residual: f.antisymmetry_residual(),
            commutator_reconstruction_residual: f.reconstruction_residual(&basis),
            nonzero_structure_constants: f.nonzero().len(),
        })
    } else {
        None
    };
    let report = GeneratorReport {
        n,
        count: basis.len(),
        generators,
        check: checks,
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

#[derive(Serialize)]
struct SweepRow {
    value: f64,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    summary: Option<Summary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct SweepReport<'a> {
    axis: &'a atomlogic::SweepAxis,
    rows: Vec<SweepRow>,
}

fn cmd_sweep(cli: &Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Lib(Error::Config(vec!["sweep requires --config".into()])))?;
    let spec: SweepSpec = parse_sweep(&read_file(path)?)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.parallelism)
        .build()
        .map_err(|e| CliError::Io(format!("cannot build worker pool: {e}")))?;

    // Each worker owns its config copy and produces one indexed row; the
    // aggregation below is single-threaded.
    use rayon::prelude::*;
    let mut results: Vec<(f64, Result<Summary, Error>)> = pool.install(|| {
        spec.values
            .par_iter()
            .map(|&value| {
                let cfg = spec.instantiate(value);
                let row = cfg
                    .validate()
                    .and_then(|()| integrate(&cfg))
                    .and_then(|traj| {
                        let s = traj.final_state();
                        let obs = readout(&s, &cfg.thresholds)?;
                        Ok(Summary {
                            t: *traj.times().last().expect("nonempty"),
                            s: s.as_vector().iter().copied().collect(),
                            readout: obs,
                            norm_drift: traj.norm_drift(),
                            samples: traj.len(),
                        })
                    });
                (value, row)
            })
            .collect()
    });
    // Row order follows the axis value, independent of worker scheduling.
    results.sort_by(|a, b| a.0.total_cmp(&b.0));

    let failures = results.iter().filter(|(_, r)| r.is_err()).count();
    let rows: Vec<SweepRow> = results
        .into_iter()
        .map(|(value, r)| match r {
            Ok(summary) => SweepRow {
                value,
                status: "ok",
                summary: Some(summary),
                error: None,
            },
            Err(e) => SweepRow {
                value,
                status: "failed",
                summary: None,
                error: Some(e.to_string()),
            },
        })
        .collect();

    let report = SweepReport {
        axis: &spec.axis,
        rows,
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));

    if let Some(out) = &cli.output {
        match cli.format {
            None | Some(FormatArg::Csv) => {
                let mut text = String::from(
                    "value,rho00,rho11,coherence,state_bit,coherence_bit,norm_drift,status\n",
                );
                for row in &report.rows {
                    match &row.summary {
                        Some(s) => text.push_str(&format!(
                            "{},{},{},{},{},{},{},ok\n",
                            full(row.value),
                            full(s.readout.rho00),
                            full(s.readout.rho11),
                            full(s.readout.coherence),
                            s.readout.state_bit,
                            s.readout.coherence_bit,
                            full(s.norm_drift),
                        )),
                        None => text.push_str(&format!("{},,,,,,,failed\n", full(row.value))),
                    }
                }
                write_file(out, &text)?;
            }
            Some(FormatArg::Json) => {
                let text = serde_json::to_string_pretty(&report).expect("report serializes");
                write_file(out, &text)?;
            }
        }
    }

    if failures > 0 {
        return Err(CliError::SweepFailures(failures));
    }
    Ok(())
}
