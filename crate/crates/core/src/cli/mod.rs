//! Command-line front end: `zzlab <task> --config run.json [--out table.csv]`.
//!
//! Exit codes: 0 ok, 2 configuration, 3 numerical failure, 4 I/O.

pub mod config;
pub mod svg;
pub mod table;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::dynamics::logical_frame;
use crate::gates::{metrics_from_propagator, GateKind, GateMetrics};
use crate::model::{build_hamiltonian, CouplingSpec};
use crate::optimize::{asymmetry_sweep, calibrate_gate_with};
use crate::pulse::sample_pulse;
use crate::spectrum::{eigensolve_labeled, sweep_levels, sweep_zz, zz_analytic, zz_numeric, zz_perturbative};
use crate::{dynamics, Error};

pub use config::{parse_config, Format, RunConfig};
pub use svg::{render_svg, PlotOptions};
pub use table::{emit_csv, emit_json, Cell, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numeric(Error),
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidDimension(_) | Error::LevelOutOfRange { .. } | Error::InvalidParameter(_) | Error::InvalidGrid(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Numeric(other),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "zzlab", version, about = "ZZ interaction and diabatic gate simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub task: Task,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output table path (overrides output.path).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// SVG plot path (overrides output.svg.path).
    #[arg(long, global = true)]
    pub svg: Option<PathBuf>,
    /// Worker threads for sweeps and calibration.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Accepted for compatibility; every run is deterministic.
    #[arg(long, global = true)]
    pub seedless: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Task {
    /// Labeled eigenenergies at one point, or along sweep.axis1.
    Spectrum,
    /// ζ at the configured device.
    Zz,
    /// ζ over a 1D or 2D grid.
    ZzSweep,
    /// Simulate one pulse and score it against a gate.
    Gate,
    /// Calibrate hold time and overshoot.
    Calibrate,
    /// Recalibrate across anharmonicity asymmetry.
    AsymmetrySweep,
    /// Sample the pulse trajectory.
    PulseDump,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Spectrum => "spectrum",
            Task::Zz => "zz",
            Task::ZzSweep => "zz-sweep",
            Task::Gate => "gate",
            Task::Calibrate => "calibrate",
            Task::AsymmetrySweep => "asymmetry-sweep",
            Task::PulseDump => "pulse-dump",
        }
    }
}

/// Result of one task: a table plus a one-line summary.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    pub summary: String,
    /// Columns plotted when the config does not choose any.
    pub default_y: Vec<String>,
}

/// Parses `args` (program name first), runs, prints, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run_cli(&cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("zzlab: {e}");
            e.exit_code()
        }
    }
}

pub fn run_cli(cli: &Cli) -> Result<String, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let cfg = parse_config(&text)?;
    if let Some(task) = &cfg.task {
        if task != cli.task.name() {
            return Err(CliError::Config(format!("task: config is for {task:?} but the subcommand is {:?}", cli.task.name())));
        }
    }

    let outcome = match cli.threads {
        Some(0) => return Err(CliError::Config("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?
            .install(|| run(cli.task, &cfg))?,
        None => run(cli.task, &cfg)?,
    };

    let output = cfg.output.clone().unwrap_or_default();
    if let Some(out) = cli.out.as_ref().or(output.path.as_ref()) {
        match cli.format.or(output.format).unwrap_or(Format::Csv) {
            Format::Csv => emit_csv(&outcome.table, out)?,
            Format::Json => emit_json(&outcome.table, out)?,
        }
    }
    let svg_cfg = output.svg.unwrap_or_default();
    if let Some(svg_path) = cli.svg.as_ref().or(svg_cfg.path.as_ref()) {
        let x = svg_cfg.x_column.clone().unwrap_or_else(|| outcome.table.columns[0].clone());
        let ys = svg_cfg.y_columns.clone().unwrap_or_else(|| outcome.default_y.clone());
        render_svg(&outcome.table, &x, &ys, &PlotOptions { log_y: svg_cfg.log_y, abs: svg_cfg.abs }, svg_path)?;
    }
    Ok(outcome.summary)
}

/// Dispatches a task without touching the filesystem.
pub fn run(task: Task, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match task {
        Task::Spectrum => spectrum(cfg),
        Task::Zz => zz(cfg),
        Task::ZzSweep => zz_sweep(cfg),
        Task::Gate => gate(cfg),
        Task::Calibrate => calibrate(cfg),
        Task::AsymmetrySweep => asymmetry(cfg),
        Task::PulseDump => pulse_dump(cfg),
    }
}

/// Rounds for display so that tiny negatives print as 0.
fn fixed(x: f64, digits: usize) -> String {
    let scale = 10f64.powi(digits as i32);
    format!("{:.*}", digits, (x * scale).round() / scale + 0.0)
}

fn spectrum(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let device = cfg.device.spec()?;
    if let Some(sweep) = &cfg.sweep {
        if sweep.axis2.is_some() {
            return Err(CliError::Config("sweep.axis2: spectrum sweeps take a single axis".into()));
        }
        let levels = sweep_levels(&device, &sweep.axis1.axis())?;
        let mut columns = vec![levels.param.column().to_string()];
        columns.extend(levels.labels.iter().map(|l| format!("e_{l}_ghz")));
        let mut table = Table::new(columns.clone());
        for (x, energies) in &levels.rows {
            let mut row = vec![Cell::Num(*x)];
            row.extend(energies.iter().map(|&e| Cell::Num(e)));
            table.push(row);
        }
        let summary = format!("{} levels at {} points of {}", levels.labels.len(), levels.rows.len(), levels.param.column());
        return Ok(Outcome { table, summary, default_y: columns[1..].to_vec() });
    }

    let spec = eigensolve_labeled(&build_hamiltonian(&device, None)?, &device.dims())?;
    let mut table = Table::new(["label", "excitations", "energy_ghz", "overlap_sq", "tie_gap", "ambiguous_flag"]);
    for e in &spec.entries {
        table.push(vec![
            Cell::Text(e.label.to_string()),
            e.label.excitations().into(),
            e.energy_ghz.into(),
            e.overlap_sq.into(),
            e.tie_gap.into(),
            e.ambiguous.into(),
        ]);
    }
    let s11 = spec.qubit_state(1, 1);
    let summary = format!(
        "{} levels; |~11> at {} GHz (overlap² {}); {} ambiguous",
        spec.entries.len(),
        fixed(s11.energy_ghz, 6),
        fixed(s11.overlap_sq, 4),
        spec.ambiguous_labels().count()
    );
    Ok(Outcome { table, summary, default_y: vec!["energy_ghz".into()] })
}

fn zz(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let device = cfg.device.spec()?;
    let numeric = zz_numeric(&device)?;
    let mut columns = vec!["delta_mhz", "delta_alpha_mhz", "zeta_numeric_mhz"];
    let mut row = vec![device.detuning_mhz().into(), device.asymmetry_mhz().into(), numeric.zeta_mhz.into()];
    let mut summary = format!("ζ = {} MHz", fixed(numeric.zeta_mhz, 3));
    if let CouplingSpec::Direct { g_mhz } = device.coupling {
        let (d, aa, ab) = (device.detuning_mhz(), device.mode_a.anharm_mhz, device.mode_b.anharm_mhz);
        let analytic = zz_analytic(d, aa, ab, g_mhz).map(|z| z.zeta_mhz).unwrap_or(f64::NAN);
        let perturbative = zz_perturbative(d, aa, ab, g_mhz).map(|z| z.zeta_mhz).unwrap_or(f64::NAN);
        columns.extend(["zeta_analytic_mhz", "zeta_perturbative_mhz"]);
        row.extend([analytic.into(), perturbative.into()]);
        summary += &format!(" (analytic {}, perturbative {})", fixed(analytic, 3), fixed(perturbative, 3));
    }
    columns.push("degenerate_flag");
    row.push(numeric.degenerate.into());
    if numeric.degenerate {
        summary += " [degenerate labeling]";
    }
    let mut table = Table::new(columns);
    table.push(row);
    Ok(Outcome { table, summary, default_y: vec!["zeta_numeric_mhz".into()] })
}

fn zz_sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let device = cfg.device.spec()?;
    let sweep = cfg.section(&cfg.sweep, "sweep")?;
    let axis2 = sweep.axis2.map(|a| a.axis());
    let result = sweep_zz(&device, &sweep.axis1.axis(), axis2.as_ref())?;
    let direct = !device.has_resonator();

    let mut columns: Vec<String> = result.axes.iter().map(|a| a.column().to_string()).collect();
    columns.push("zeta_numeric_mhz".into());
    if direct {
        columns.extend(["zeta_analytic_mhz".into(), "zeta_perturbative_mhz".into()]);
    }
    columns.push("degenerate_flag".into());
    let mut table = Table::new(columns);
    for r in &result.rows {
        let mut row: Vec<Cell> = r.params.iter().map(|&p| Cell::Num(p)).collect();
        row.push(r.numeric_mhz.into());
        if direct {
            row.push(r.analytic_mhz.unwrap_or(f64::NAN).into());
            row.push(r.perturbative_mhz.unwrap_or(f64::NAN).into());
        }
        row.push(r.degenerate.into());
        table.push(row);
    }

    let peak = result.rows.iter().max_by(|a, b| a.numeric_mhz.abs().total_cmp(&b.numeric_mhz.abs()));
    let summary = match peak {
        Some(p) => {
            let at: Vec<String> =
                result.axes.iter().zip(&p.params).map(|(a, v)| format!("{} = {}", a.column(), fixed(*v, 3))).collect();
            format!("{} points; max |ζ| = {} MHz at {}", result.rows.len(), fixed(p.numeric_mhz.abs(), 4), at.join(", "))
        }
        None => "0 points".into(),
    };
    let mut default_y = vec!["zeta_numeric_mhz".to_string()];
    if direct {
        default_y.extend(["zeta_analytic_mhz".into(), "zeta_perturbative_mhz".into()]);
    }
    Ok(Outcome { table, summary, default_y })
}

const METRIC_COLUMNS: [&str; 9] = ["fidelity", "eps_leak", "eps_swap", "theta", "phi", "d_theta", "d_phi", "vz_a", "vz_b"];

fn metric_cells(m: &GateMetrics) -> Vec<Cell> {
    vec![
        m.fidelity.into(),
        m.epsilon_leak.into(),
        m.epsilon_swap.into(),
        m.theta_measured.into(),
        m.phi_measured.into(),
        m.delta_theta.into(),
        m.delta_phi.into(),
        m.virtual_z.0.into(),
        m.virtual_z.1.into(),
    ]
}

fn metric_summary(m: &GateMetrics) -> String {
    format!(
        "F = {} (eps_leak = {:.3e}, eps_swap = {:.3e}, d_theta = {:.3e} rad, d_phi = {:.3e} rad)",
        fixed(m.fidelity, 7),
        m.epsilon_leak,
        m.epsilon_swap,
        m.delta_theta,
        m.delta_phi
    )
}

fn error_defaults() -> Vec<String> {
    vec!["eps_leak".into(), "eps_swap".into()]
}

fn gate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let device = cfg.device.spec()?;
    let kind = cfg.gate_kind()?;
    let pulse = cfg.pulse(&device, Some(kind))?;
    let u = dynamics::propagate(&device, &pulse)?;
    let frame = logical_frame(&device, pulse.parking_ghz)?;
    let m = metrics_from_propagator(&u, &frame, kind)?;

    let mut columns = vec!["hold_ns", "overshoot_mhz", "ramp_ns", "parking_ghz", "interaction_ghz"];
    columns.extend(METRIC_COLUMNS);
    let mut table = Table::new(columns);
    let mut row: Vec<Cell> = vec![
        pulse.hold_ns.into(),
        pulse.overshoot_mhz.into(),
        pulse.ramp_ns.into(),
        pulse.parking_ghz.into(),
        pulse.interaction_ghz.into(),
    ];
    row.extend(metric_cells(&m));
    table.push(row);
    Ok(Outcome { table, summary: format!("{}: {}", kind.label(), metric_summary(&m)), default_y: error_defaults() })
}

fn calibrate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let device = cfg.device.spec()?;
    let kind = cfg.gate_kind()?;
    let settings = cfg.calibration()?;
    let result = calibrate_gate_with(&device, kind, &settings)?;

    let mut columns = vec!["hold_ns", "overshoot_mhz", "objective"];
    columns.extend(METRIC_COLUMNS);
    let mut table = Table::new(columns);
    for h in &result.hold_profile {
        let mut row: Vec<Cell> = vec![h.hold_ns.into(), h.overshoot_mhz.into(), h.objective.into()];
        row.extend(metric_cells(&h.metrics));
        table.push(row);
    }
    let summary = format!(
        "{}: best hold {} ns, overshoot {} MHz; {}",
        kind.label(),
        fixed(result.best_hold, 2),
        fixed(result.best_overshoot, 3),
        metric_summary(&result.metrics_at_optimum)
    );
    Ok(Outcome { table, summary, default_y: error_defaults() })
}

fn asymmetry(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let device = cfg.device.spec()?;
    let kind = cfg.gate_kind()?;
    let settings = cfg.calibration()?;
    let a = cfg.section(&cfg.asymmetry, "asymmetry")?;
    let rows = asymmetry_sweep(&device, kind, (a.delta_alpha_min_mhz, a.delta_alpha_max_mhz), a.points, &settings)?;

    let mut columns = vec!["delta_alpha_mhz", "hold_ns", "overshoot_mhz"];
    columns.extend(METRIC_COLUMNS);
    columns.extend(["infidelity", "err_theta", "err_phi", "err_leak", "dominant"]);
    let mut table = Table::new(columns);
    for r in &rows {
        let mut row: Vec<Cell> = vec![r.delta_alpha_mhz.into(), r.best_hold.into(), r.best_overshoot.into()];
        row.extend(metric_cells(&r.metrics));
        row.push((1.0 - r.metrics.fidelity).into());
        row.extend(r.contributions.iter().map(|&c| Cell::Num(c)));
        row.push(Cell::Text(
            serde_json::to_value(r.dominant).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
        ));
        table.push(row);
    }
    let worst = rows.iter().min_by(|x, y| x.metrics.fidelity.total_cmp(&y.metrics.fidelity));
    let summary = match worst {
        Some(w) => format!(
            "{}: {} points; lowest F = {} at delta_alpha = {} MHz",
            kind.label(),
            rows.len(),
            fixed(w.metrics.fidelity, 6),
            fixed(w.delta_alpha_mhz, 2)
        ),
        None => "0 points".into(),
    };
    Ok(Outcome { table, summary, default_y: vec!["infidelity".into()] })
}

fn pulse_dump(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let device = cfg.device.spec()?;
    let kind: Option<GateKind> = cfg.gate.as_ref().map(|g| g.kind()).transpose()?;
    let pulse = cfg.pulse(&device, kind)?;
    let mut table = Table::new(["t_ns", "freq_ghz"]);
    for (t, f) in sample_pulse(&pulse)? {
        table.push(vec![t.into(), f.into()]);
    }
    let summary = format!(
        "{} samples over {} ns, plateau at {} GHz",
        table.rows.len(),
        fixed(pulse.total_duration(), 3),
        fixed(pulse.target_ghz(), 6)
    );
    Ok(Outcome { table, summary, default_y: vec!["freq_ghz".into()] })
}

/// Runs a config file through a task and writes the table, as the binary does.
pub fn run_file(task: Task, config: &Path, out: &Path, format: Format) -> Result<String, CliError> {
    let cli = Cli {
        task,
        config: Some(config.to_path_buf()),
        out: Some(out.to_path_buf()),
        format: Some(format),
        svg: None,
        threads: None,
        seedless: false,
    };
    run_cli(&cli)
}
