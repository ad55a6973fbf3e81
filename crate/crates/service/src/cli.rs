//! The `dclab` command line. Machine-readable output goes to stdout,
//! diagnostics to stderr. Exit codes: 0 success, 1 validation or grading
//! failure, 2 usage or input errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use dclab::design::{Design, InternalBackend, SimBackend};
use dclab::grader::{deserialize_test_points, grade};
use dclab::netlist::{deserialize_circuit, validate_circuit};
use dclab::sim::{export_vcd, SimConfig};
use dclab::stimulus::{deserialize_stimulus, StimulusSet};
use dclab::vhdl::ast::DesignUnit;
use dclab::vhdl::{emit_testbench, emit_vhdl, parse_vhdl, VhdlUnit};
use dclab::ComponentRegistry;

use crate::config::Config;
use crate::seed::seed_demo;
use crate::service::{ManualClock, Service, SystemClock};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "dclab", version, about = "Digital logic lab: validate, simulate, translate and grade circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a netlist file; prints the report as JSON.
    Validate { netlist: PathBuf },
    /// Simulate a netlist or VHDL sources and write the VCD trace.
    Simulate {
        /// One netlist (.json) or VHDL files (.vhd).
        #[arg(required = true)]
        design: Vec<PathBuf>,
        /// Stimulus file. VHDL testbenches may omit it.
        #[arg(long)]
        stim: Option<PathBuf>,
        /// Run length in ns; defaults to the stimulus or testbench horizon.
        #[arg(long)]
        horizon: Option<u64>,
        /// Top entity for VHDL; defaults to the last entity of the last file.
        #[arg(long)]
        top: Option<String>,
        /// Output file; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Translate a netlist to VHDL files in a directory.
    EmitVhdl {
        netlist: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write a testbench driven by this stimulus.
        #[arg(long)]
        stim: Option<PathBuf>,
    },
    /// Grade a design against a reference; prints the report as JSON.
    Grade {
        #[arg(required = true)]
        design: Vec<PathBuf>,
        #[arg(long, required = true, num_args = 1..)]
        reference: Vec<PathBuf>,
        #[arg(long)]
        testpoints: PathBuf,
        #[arg(long)]
        top: Option<String>,
        #[arg(long)]
        reference_top: Option<String>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Load the demo cohort into an empty store; prints a summary as JSON.
    SeedDemo {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

/// A failure with its exit code.
struct Failure(i32, String);

fn usage(msg: impl Into<String>) -> Failure {
    Failure(EXIT_USAGE, msg.into())
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_stimulus(path: &Path) -> Result<StimulusSet, Failure> {
    deserialize_stimulus(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn is_netlist(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Loads a netlist, or VHDL files with their top entity. Also returns the
/// testbench horizon pragma, if any.
pub fn load_design(paths: &[PathBuf], top: Option<&str>) -> Result<(Design, Option<u64>), String> {
    if let [p] = paths {
        if is_netlist(p) {
            let bytes = std::fs::read(p).map_err(|e| format!("{}: {e}", p.display()))?;
            return deserialize_circuit(&bytes).map(|c| (Design::Circuit(c), None)).map_err(|e| format!("{}: {e}", p.display()));
        }
    }
    let mut units = Vec::with_capacity(paths.len());
    for p in paths {
        if is_netlist(p) {
            return Err(format!("{}: a netlist cannot be mixed with other files", p.display()));
        }
        let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
        units.push(VhdlUnit::new(p.file_name().and_then(|n| n.to_str()).unwrap_or("input.vhd"), text));
    }
    let (ast, _) = parse_vhdl(&units);
    let top = match top {
        Some(t) => t.to_string(),
        None => ast
            .units
            .iter()
            .rev()
            .find_map(|u| match u {
                DesignUnit::Entity(e) => Some(e.name.name.clone()),
                _ => None,
            })
            .ok_or("no entity found; give --top")?,
    };
    Ok((Design::Vhdl { units, top }, ast.horizon_ns))
}

fn run_validate(netlist: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let bytes = read(netlist)?;
    let c = deserialize_circuit(&bytes).map_err(|e| usage(format!("{}: {e}", netlist.display())))?;
    let report = validate_circuit(&c, &ComponentRegistry::builtin());
    for i in report.errors.iter() {
        let _ = writeln!(err, "error: {i}");
    }
    for i in report.warnings.iter() {
        let _ = writeln!(err, "warning: {i}");
    }
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(if report.is_ok() { EXIT_OK } else { EXIT_FAIL })
}

/// Simulates a loaded design and returns the exact VCD bytes.
pub fn simulate_to_vcd(design: &Design, stim: &StimulusSet, horizon: u64) -> Result<(Vec<u8>, dclab::sim::SimRun), Vec<String>> {
    let backend = InternalBackend::builtin();
    let run = backend.run(design, stim, &SimConfig::new(horizon)).map_err(|e| e.diagnostics())?;
    Ok((export_vcd(&run.trace), run))
}

fn run_simulate(
    design: &[PathBuf],
    stim: Option<&Path>,
    horizon: Option<u64>,
    top: Option<&str>,
    output: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    let (d, pragma) = load_design(design, top).map_err(usage)?;
    let mut stim = match stim {
        Some(p) => read_stimulus(p)?,
        None => {
            let h = horizon.or(pragma).ok_or_else(|| usage("give --stim, --horizon or a testbench with a horizon pragma"))?;
            StimulusSet::new(h)
        }
    };
    let horizon = horizon.unwrap_or(stim.horizon_ns);
    stim.horizon_ns = horizon;
    let (vcd, run) = match simulate_to_vcd(&d, &stim, horizon) {
        Ok(r) => r,
        Err(diags) => {
            for l in diags {
                let _ = writeln!(err, "{l}");
            }
            return Ok(EXIT_FAIL);
        }
    };
    let _ = err.write_all(run.log.to_text().as_bytes());
    match output {
        Some(p) => std::fs::write(p, &vcd).map_err(|e| usage(format!("{}: {e}", p.display())))?,
        None => {
            let _ = out.write_all(&vcd);
        }
    }
    Ok(if run.fault.is_some() { EXIT_FAIL } else { EXIT_OK })
}

fn run_emit(netlist: &Path, output: &Path, stim: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let c = deserialize_circuit(&read(netlist)?).map_err(|e| usage(format!("{}: {e}", netlist.display())))?;
    let mut units = match emit_vhdl(&c, &ComponentRegistry::builtin()) {
        Ok(u) => u,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            return Ok(EXIT_FAIL);
        }
    };
    if let Some(p) = stim {
        let s = read_stimulus(p)?;
        match emit_testbench(&c, &s) {
            Ok(tb) => units.push(tb),
            Err(e) => {
                let _ = writeln!(err, "{e}");
                return Ok(EXIT_FAIL);
            }
        }
    }
    std::fs::create_dir_all(output).map_err(|e| usage(format!("{}: {e}", output.display())))?;
    let mut written = Vec::new();
    for u in &units {
        let p = output.join(&u.source_name);
        std::fs::write(&p, &u.text).map_err(|e| usage(format!("{}: {e}", p.display())))?;
        written.push(p.display().to_string());
    }
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(&written).expect("paths serialize"));
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn run_grade(
    design: &[PathBuf],
    reference: &[PathBuf],
    testpoints: &Path,
    top: Option<&str>,
    reference_top: Option<&str>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    let tps = deserialize_test_points(&read(testpoints)?).map_err(|e| usage(format!("{}: {e}", testpoints.display())))?;
    let (sub, _) = load_design(design, top).map_err(usage)?;
    let (reference, _) = load_design(reference, reference_top).map_err(usage)?;
    let report = grade(&InternalBackend::builtin(), &sub, &reference, &tps).map_err(|e| Failure(EXIT_FAIL, e.to_string()))?;
    for d in &report.diagnostics {
        let _ = writeln!(err, "{d}");
    }
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(if report.score == 100 { EXIT_OK } else { EXIT_FAIL })
}

fn load_config(path: Option<&Path>) -> Result<Config, Failure> {
    Config::from_env(path).map_err(|e| usage(e.to_string()))
}

fn run_serve(config: Option<&Path>) -> Result<i32, Failure> {
    let cfg = load_config(config)?;
    let _ = tracing_subscriber::fmt().with_env_filter(tracing_subscriber::EnvFilter::from_default_env()).try_init();
    let svc = Service::open(&cfg, Arc::new(SystemClock)).map_err(|e| Failure(EXIT_FAIL, e.to_string()))?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure(EXIT_FAIL, e.to_string()))?;
    rt.block_on(crate::http::serve(Arc::new(svc), &cfg.listen)).map_err(|e| Failure(EXIT_FAIL, format!("{}: {e}", cfg.listen)))?;
    Ok(EXIT_OK)
}

fn run_seed(config: Option<&Path>, out: &mut dyn Write) -> Result<i32, Failure> {
    let cfg = load_config(config)?;
    let clock = Arc::new(ManualClock::new(chrono::Utc::now()));
    let svc = Service::open(&cfg, clock.clone()).map_err(|e| Failure(EXIT_FAIL, e.to_string()))?;
    let summary = seed_demo(&svc, &clock).map_err(|e| Failure(EXIT_FAIL, e.to_string()))?;
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    Ok(EXIT_OK)
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
            } else {
                let _ = out.write_all(text.as_bytes());
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Validate { netlist } => run_validate(netlist, out, err),
        Command::Simulate { design, stim, horizon, top, output } => {
            run_simulate(design, stim.as_deref(), *horizon, top.as_deref(), output.as_deref(), out, err)
        }
        Command::EmitVhdl { netlist, output, stim } => run_emit(netlist, output, stim.as_deref(), out, err),
        Command::Grade { design, reference, testpoints, top, reference_top } => {
            run_grade(design, reference, testpoints, top.as_deref(), reference_top.as_deref(), out, err)
        }
        Command::Serve { config } => run_serve(config.as_deref()),
        Command::SeedDemo { config } => run_seed(config.as_deref(), out),
    };
    match result {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "dclab: {msg}");
            code
        }
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
