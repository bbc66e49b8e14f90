//! Command-line front end: planning queries against the PNP and graph
//! families, catalog validation, and seeded Monte Carlo runs, all emitted as
//! self-describing text (a `#` metadata block, then a CSV header and rows,
//! or a single result line).
//!
//! Exit statuses: 0 success, 1 usage error, 2 infeasible or no violation,
//! 3 I/O or catalog failure.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use bellplan::bell::{Behavior, BellInequality};
use bellplan::catalog::Catalog;
use bellplan::error::Error;
use bellplan::graph;
use bellplan::montecarlo::{self, ContextSampling, DetectorModel};
use bellplan::planner;
use bellplan::pnp;

pub mod output;

use output::format_sig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Infeasible(String),
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Infeasible(_) => EXIT_INFEASIBLE,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Infeasible(m) | CliError::Failure(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) => CliError::Usage(e.to_string()),
            Error::NoViolation { .. } | Error::Infeasible(_) | Error::NotFound { .. } => {
                CliError::Infeasible(e.to_string())
            }
            Error::SampleTooLarge { .. } => CliError::Infeasible(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Pnp,
    Graph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Instance {
    Chsh,
    Pnp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphSource {
    /// Closed form when the structure is stored, calibration otherwise.
    Auto,
    /// Ratio-law calibration from the entry's published rows.
    Calibrated,
    /// Closed form from |V|, |E|, C, Q.
    ClosedForm,
}

#[derive(Debug, Parser)]
#[command(
    name = "bellplan",
    version,
    about = "Plan and simulate loophole-free Bell tests that measure only a random fraction of the contexts"
)]
pub struct Cli {
    /// Catalog file; the built-in catalog is used when absent.
    #[arg(long, global = true)]
    pub catalog: Option<PathBuf>,

    /// Write the emitted artifact to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Significant digits for printed floating-point values.
    #[arg(long, global = true, default_value_t = 6)]
    pub precision: usize,

    /// Cap on compute threads (Monte Carlo trials run in parallel).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fraction of contexts needed for a loophole-free test at the given
    /// detection efficiency and visibility.
    Design {
        #[arg(long, value_enum)]
        family: Family,
        /// Number of CHSH copies (pnp family).
        #[arg(long)]
        n: Option<u32>,
        /// Catalog graph name (graph family).
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        eta: f64,
        #[arg(long, default_value_t = 1.0)]
        visibility: f64,
        #[arg(long, default_value_t = 3e-5)]
        delta: f64,
        /// Marginal penalty sum A + B (pnp family).
        #[arg(long, default_value_t = 0.0)]
        penalty: f64,
        /// Safety factor in (0, 1] multiplying the error margin.
        #[arg(long, default_value_t = 1.0)]
        safety: f64,
    },

    /// Fractions for a grid of efficiencies at fixed n: CSV (n, eta, nu).
    PnpTable {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 3e-5)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        visibility: f64,
        /// Comma-separated efficiencies.
        #[arg(long, default_value = "0.4,0.6,0.8,0.95")]
        etas: String,
        #[arg(long, default_value_t = 0.0)]
        penalty: f64,
    },

    /// Minimum efficiency as a function of the fraction: CSV (n, nu, eta_nu).
    PnpCurve {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 3e-5)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        visibility: f64,
        /// Number of fraction grid points (log-spaced up to 1).
        #[arg(long, default_value_t = 25)]
        points: usize,
    },

    /// Fraction needed for one catalog graph at one efficiency.
    GraphNu {
        #[arg(long)]
        name: String,
        #[arg(long)]
        eta: f64,
        #[arg(long, default_value_t = 3e-5)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = GraphSource::Auto)]
        source: GraphSource,
    },

    /// All catalog rows: CSV (name, d, M, eta, nu, source).
    GraphTable {
        /// Also emit ratio-law predictions for rows beyond each entry's
        /// first.
        #[arg(long)]
        predict: bool,
        /// Efficiencies for closed-form rows of explicitly stored graphs.
        #[arg(long, default_value = "0.95")]
        etas: String,
        #[arg(long, default_value_t = 3e-5)]
        delta: f64,
    },

    /// Seeded Monte Carlo trials of the subset protocol:
    /// CSV (trial, Y, beta_true, within_epsilon, certified).
    Simulate {
        #[arg(long, value_enum)]
        instance: Instance,
        /// Copies for the pnp instance.
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 1.0)]
        visibility: f64,
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        trials: u64,
        /// Base seed; per-trial streams are derived from the trial index.
        #[arg(long)]
        seed: u64,
        /// Draw contexts i.i.d. instead of as a distinct subset.
        #[arg(long)]
        with_replacement: bool,
        /// Per-context estimation error for finite-round mode.
        #[arg(long)]
        rounds_epsilon: Option<f64>,
        /// Per-context failure probability for finite-round mode.
        #[arg(long)]
        rounds_delta: Option<f64>,
    },

    /// Load a catalog and check its structural invariants.
    ValidateCatalog,
}

/// Result of a command: the artifact text plus the process exit status
/// (design-style commands report infeasibility through the status while
/// still emitting an artifact).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutput {
    pub text: String,
    pub exit_code: i32,
}

impl CommandOutput {
    fn ok(text: String) -> Self {
        CommandOutput {
            text,
            exit_code: EXIT_OK,
        }
    }

    fn infeasible(text: String) -> Self {
        CommandOutput {
            text,
            exit_code: EXIT_INFEASIBLE,
        }
    }
}

fn load_catalog(cli: &Cli) -> Result<Catalog, CliError> {
    match &cli.catalog {
        Some(path) => Catalog::load(path).map_err(|e| CliError::Failure(e.to_string())),
        None => Ok(Catalog::builtin()),
    }
}

fn metadata_block(command: &str, params: &[(&str, String)]) -> String {
    let mut block = String::new();
    let _ = writeln!(block, "# bellplan {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(block, "# command: {command}");
    for (key, value) in params {
        let _ = writeln!(block, "# {key}: {value}");
    }
    block
}

fn parse_eta_list(text: &str) -> Result<Vec<f64>, CliError> {
    let mut etas = Vec::new();
    for piece in text.split(',') {
        let eta: f64 = piece
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("invalid efficiency list entry {piece:?}")))?;
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(CliError::Usage(format!(
                "efficiency {eta} outside (0, 1]"
            )));
        }
        etas.push(eta);
    }
    if etas.is_empty() {
        return Err(CliError::Usage("empty efficiency list".into()));
    }
    Ok(etas)
}

/// Parses an argument vector without exiting on failure. Exposed for the
/// binary, the tests, and the argv fuzz harness.
pub fn parse_args<I, T>(argv: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Cli::try_parse_from(argv)
}

pub fn run(cli: &Cli) -> Result<CommandOutput, CliError> {
    match &cli.command {
        Command::Design {
            family,
            n,
            name,
            eta,
            visibility,
            delta,
            penalty,
            safety,
        } => design(
            cli, *family, *n, name.as_deref(), *eta, *visibility, *delta, *penalty, *safety,
        ),
        Command::PnpTable {
            n,
            delta,
            visibility,
            etas,
            penalty,
        } => pnp_table(cli, *n, *delta, *visibility, etas, *penalty),
        Command::PnpCurve {
            n,
            delta,
            visibility,
            points,
        } => pnp_curve(cli, *n, *delta, *visibility, *points),
        Command::GraphNu {
            name,
            eta,
            delta,
            source,
        } => graph_nu(cli, name, *eta, *delta, *source),
        Command::GraphTable {
            predict,
            etas,
            delta,
        } => graph_table(cli, *predict, etas, *delta),
        Command::Simulate {
            instance,
            n,
            visibility,
            eta,
            epsilon,
            delta,
            trials,
            seed,
            with_replacement,
            rounds_epsilon,
            rounds_delta,
        } => simulate(
            cli,
            *instance,
            *n,
            *visibility,
            *eta,
            *epsilon,
            *delta,
            *trials,
            *seed,
            *with_replacement,
            *rounds_epsilon,
            *rounds_delta,
        ),
        Command::ValidateCatalog => validate_catalog(cli),
    }
}

#[allow(clippy::too_many_arguments)]
fn design(
    cli: &Cli,
    family: Family,
    n: Option<u32>,
    name: Option<&str>,
    eta: f64,
    visibility: f64,
    delta: f64,
    penalty: f64,
    safety: f64,
) -> Result<CommandOutput, CliError> {
    let p = cli.precision;
    match family {
        Family::Pnp => {
            let n = n.ok_or_else(|| CliError::Usage("--n is required for --family pnp".into()))?;
            let params = vec![
                ("family", "pnp".to_string()),
                ("n", n.to_string()),
                ("eta", format_sig(eta, p)),
                ("visibility", format_sig(visibility, p)),
                ("delta", format_sig(delta, p)),
                ("penalty", format_sig(penalty, p)),
                ("safety", format_sig(safety, p)),
            ];
            let mut text = metadata_block("design", &params);
            match pnp::fraction_required_with_safety(n, eta, visibility, delta, penalty, safety) {
                Ok(nu) if nu <= 1.0 => {
                    let _ = writeln!(text, "nu = {}", format_sig(nu, p));
                    Ok(CommandOutput::ok(text))
                }
                Ok(nu) => {
                    let _ = writeln!(
                        text,
                        "infeasible: nu = {} exceeds 1 (no strict subset suffices)",
                        format_sig(nu, p)
                    );
                    Ok(CommandOutput::infeasible(text))
                }
                Err(Error::NoViolation {
                    beta_eff,
                    local_bound,
                }) => {
                    let _ = writeln!(
                        text,
                        "infeasible: no violation ({} does not exceed {})",
                        format_sig(beta_eff, p),
                        format_sig(local_bound, p)
                    );
                    Ok(CommandOutput::infeasible(text))
                }
                Err(e) => Err(e.into()),
            }
        }
        Family::Graph => {
            let name = name
                .ok_or_else(|| CliError::Usage("--name is required for --family graph".into()))?;
            if visibility != 1.0 {
                return Err(CliError::Usage(
                    "graph-family constants assume visibility 1".into(),
                ));
            }
            let _ = penalty;
            let _ = safety;
            graph_nu(cli, name, eta, delta, GraphSource::Auto)
        }
    }
}

fn pnp_table(
    cli: &Cli,
    n: u32,
    delta: f64,
    visibility: f64,
    etas: &str,
    penalty: f64,
) -> Result<CommandOutput, CliError> {
    let p = cli.precision;
    let etas = parse_eta_list(etas)?;
    let crit = pnp::critical_efficiency(n, visibility).map_err(CliError::from)?;
    let mut params = vec![
        ("n", n.to_string()),
        ("visibility", format_sig(visibility, p)),
        ("delta", format_sig(delta, p)),
        ("penalty", format_sig(penalty, p)),
        ("eta_crit", format_sig(crit, p)),
    ];
    let mut rows = String::new();
    let mut feasible_rows = 0;
    for &eta in &etas {
        match pnp::fraction_required(n, eta, visibility, delta, penalty) {
            Ok(nu) => {
                let _ = writeln!(
                    rows,
                    "{n},{},{}",
                    format_sig(eta, p),
                    format_sig(nu, p)
                );
                feasible_rows += 1;
            }
            Err(Error::NoViolation { .. }) => {
                params.push(("skipped", format!("eta {} gives no violation", format_sig(eta, p))));
            }
            Err(e) => return Err(e.into()),
        }
    }
    if feasible_rows == 0 {
        return Err(CliError::Infeasible(format!(
            "no efficiency in the list admits a violation at n = {n}"
        )));
    }
    let mut text = metadata_block("pnp-table", &params);
    text.push_str("n,eta,nu\n");
    text.push_str(&rows);
    Ok(CommandOutput::ok(text))
}

fn pnp_curve(
    cli: &Cli,
    n: u32,
    delta: f64,
    visibility: f64,
    points: usize,
) -> Result<CommandOutput, CliError> {
    let p = cli.precision;
    if points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let nu_min = pnp::fraction_required(n, 1.0, visibility, delta, 0.0).map_err(CliError::from)?;
    if nu_min > 1.0 {
        return Err(CliError::Infeasible(format!(
            "even the full context set fails at n = {n}: nu(eta = 1) = {}",
            format_sig(nu_min, p)
        )));
    }
    let params = vec![
        ("n", n.to_string()),
        ("visibility", format_sig(visibility, p)),
        ("delta", format_sig(delta, p)),
        ("nu_min", format_sig(nu_min, p)),
    ];
    let mut text = metadata_block("pnp-curve", &params);
    text.push_str("n,nu,eta_nu\n");
    let log_min = nu_min.ln();
    for k in 0..points {
        let frac = k as f64 / (points - 1) as f64;
        // Clamp against ln/exp round-off so the first point is exactly
        // attainable at eta = 1.
        let nu = (log_min * (1.0 - frac)).exp().clamp(nu_min, 1.0);
        let eta = pnp::min_efficiency(n, nu, visibility, delta).map_err(CliError::from)?;
        let _ = writeln!(text, "{n},{},{}", format_sig(nu, p), format_sig(eta, p));
    }
    Ok(CommandOutput::ok(text))
}

fn graph_nu(
    cli: &Cli,
    name: &str,
    eta: f64,
    delta: f64,
    source: GraphSource,
) -> Result<CommandOutput, CliError> {
    let p = cli.precision;
    let catalog = load_catalog(cli)?;
    let entry = catalog
        .find_graph(name)
        .ok_or_else(|| CliError::Usage(format!("no graph named {name:?} in the catalog")))?;

    let has_structure = entry.vertices.is_some()
        && entry.edge_count.is_some()
        && entry.independence.is_some()
        && entry.quantum.is_some();
    let use_closed_form = match source {
        GraphSource::Auto => has_structure,
        GraphSource::ClosedForm => {
            if !has_structure {
                return Err(CliError::Usage(format!(
                    "{}: closed form needs |V|, |E|, C and Q in the catalog",
                    entry.name
                )));
            }
            true
        }
        GraphSource::Calibrated => false,
    };

    let params = |src: &str| {
        vec![
            ("name", entry.name.clone()),
            ("dimension", entry.dimension.to_string()),
            ("total_contexts", format_sig(entry.total_contexts, p)),
            ("eta", format_sig(eta, p)),
            ("delta", format_sig(delta, p)),
            ("source", src.to_string()),
            (
                "note",
                "closed forms follow the published estimator range; the simulator's \
                 signed estimator uses the unbiased weight -M/(2*Xi)"
                    .to_string(),
            ),
        ]
    };

    if use_closed_form {
        let result = graph::fraction_from_counts(
            entry.vertices.unwrap(),
            entry.edge_count.unwrap(),
            entry.independence.unwrap() as f64,
            entry.quantum.unwrap(),
            eta,
            delta,
        );
        let mut text = metadata_block("graph-nu", &params("computed"));
        return match result {
            Ok(nu) if nu <= 1.0 => {
                let _ = writeln!(text, "nu = {}", format_sig(nu, p));
                Ok(CommandOutput::ok(text))
            }
            Ok(nu) => {
                let _ = writeln!(
                    text,
                    "infeasible: nu = {} exceeds 1 (no strict subset suffices)",
                    format_sig(nu, p)
                );
                Ok(CommandOutput::infeasible(text))
            }
            Err(Error::NoViolation { .. }) => {
                let _ = writeln!(
                    text,
                    "infeasible: eta = {} is at or below the statistics-free threshold",
                    format_sig(eta, p)
                );
                Ok(CommandOutput::infeasible(text))
            }
            Err(e) => Err(e.into()),
        };
    }

    let calibration = graph::calibrate_from_rows(entry).map_err(CliError::from)?;
    let mut text = metadata_block("graph-nu", &params("calibrated"));
    let _ = writeln!(
        text,
        "# c_over_q: {}",
        format_sig(calibration.c_over_q, p)
    );
    let _ = writeln!(
        text,
        "# stat_const: {}",
        format_sig(calibration.stat_const, p)
    );
    match graph::calibrated_fraction(&calibration, eta) {
        Ok(nu) if nu <= 1.0 => {
            let _ = writeln!(text, "nu = {}", format_sig(nu, p));
            Ok(CommandOutput::ok(text))
        }
        Ok(nu) => {
            let _ = writeln!(
                text,
                "infeasible: nu = {} exceeds 1 (no strict subset suffices)",
                format_sig(nu, p)
            );
            Ok(CommandOutput::infeasible(text))
        }
        Err(Error::Infeasible(_)) => {
            let _ = writeln!(
                text,
                "infeasible: eta = {} is at or below the critical efficiency {}",
                format_sig(eta, p),
                format_sig(entry.eta_crit, p)
            );
            Ok(CommandOutput::infeasible(text))
        }
        Err(e) => Err(e.into()),
    }
}

fn graph_table(
    cli: &Cli,
    predict: bool,
    etas: &str,
    delta: f64,
) -> Result<CommandOutput, CliError> {
    let p = cli.precision;
    let etas = parse_eta_list(etas)?;
    let catalog = load_catalog(cli)?;
    let params = vec![
        ("delta", format_sig(delta, p)),
        ("predict", predict.to_string()),
        (
            "note",
            "nu greater than 1 means no strict subset suffices".to_string(),
        ),
    ];
    let mut text = metadata_block("graph-table", &params);
    text.push_str("name,d,M,eta,nu,source\n");
    for entry in &catalog.graphs {
        let head = format!(
            "{},{},{}",
            entry.name,
            entry.dimension,
            format_sig(entry.total_contexts, p)
        );
        for row in &entry.rows {
            let _ = writeln!(
                text,
                "{head},{},{},paper",
                format_sig(row.eta, p),
                format_sig(row.nu, p)
            );
        }
        if predict && entry.rows.len() > 1 {
            if let Ok((calibration, predictions)) = graph::calibration_rows(entry) {
                for pred in predictions {
                    let _ = calibration;
                    let _ = writeln!(
                        text,
                        "{head},{},{},calibrated",
                        format_sig(pred.eta, p),
                        format_sig(pred.predicted_nu, p)
                    );
                }
            }
        }
        let explicit = entry.vertices.is_some()
            && entry.edge_count.is_some()
            && entry.independence.is_some()
            && entry.quantum.is_some();
        if explicit {
            for &eta in &etas {
                match graph::fraction_from_counts(
                    entry.vertices.unwrap(),
                    entry.edge_count.unwrap(),
                    entry.independence.unwrap() as f64,
                    entry.quantum.unwrap(),
                    eta,
                    delta,
                ) {
                    Ok(nu) => {
                        let _ = writeln!(
                            text,
                            "{head},{},{},computed",
                            format_sig(eta, p),
                            format_sig(nu, p)
                        );
                    }
                    Err(Error::NoViolation { .. }) => {}
                    Err(e) => return Err(e.into()),
                }
            }
        }
    }
    Ok(CommandOutput::ok(text))
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    cli: &Cli,
    instance: Instance,
    n: u32,
    visibility: f64,
    eta: f64,
    epsilon: f64,
    delta: f64,
    trials: u64,
    seed: u64,
    with_replacement: bool,
    rounds_epsilon: Option<f64>,
    rounds_delta: Option<f64>,
) -> Result<CommandOutput, CliError> {
    let p = cli.precision;
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let (label, inequality, behavior) = match instance {
        Instance::Chsh => (
            "chsh".to_string(),
            BellInequality::chsh(),
            Behavior::chsh_quantum(visibility).map_err(CliError::from)?,
        ),
        Instance::Pnp => (
            format!("pnp(n={n})"),
            BellInequality::chsh_product(n).map_err(CliError::from)?,
            Behavior::chsh_product_quantum(n, visibility).map_err(CliError::from)?,
        ),
    };
    let detector = DetectorModel::new(eta, visibility).map_err(CliError::from)?;
    let binned = montecarlo::simulate_detector(&behavior, &detector).map_err(CliError::from)?;
    let beta = inequality.evaluate(&binned).map_err(CliError::from)?;
    let m = inequality.num_contexts() as u64;
    let mode = if with_replacement {
        ContextSampling::WithReplacement
    } else {
        ContextSampling::WithoutReplacement
    };

    let mut plan = planner::chebyshev_plan(m, beta, epsilon, delta).map_err(CliError::from)?;
    if !with_replacement && plan.contexts_required > m {
        return Err(CliError::Infeasible(format!(
            "plan needs {} contexts but only {m} exist; rerun with --with-replacement",
            plan.contexts_required
        )));
    }
    match (rounds_epsilon, rounds_delta) {
        (Some(re), Some(rd)) => {
            plan = plan
                .with_rounds(re, rd, inequality.max_abs_coefficient())
                .map_err(CliError::from)?;
        }
        (None, None) => {}
        _ => {
            return Err(CliError::Usage(
                "--rounds-epsilon and --rounds-delta must be given together".into(),
            ));
        }
    }

    let mut results = Vec::with_capacity(trials as usize);
    let mut failures = 0u64;
    let mut certified = 0u64;
    for stream in 0..trials {
        let trial = montecarlo::run_trial(
            &inequality,
            &behavior,
            &detector,
            &plan,
            mode,
            seed,
            stream,
        )
        .map_err(CliError::from)?;
        failures += u64::from(!trial.within_epsilon);
        certified += u64::from(trial.certified);
        results.push(trial);
    }

    let params = vec![
        ("instance", label),
        ("visibility", format_sig(visibility, p)),
        ("eta", format_sig(eta, p)),
        ("epsilon", format_sig(epsilon, p)),
        ("delta", format_sig(delta, p)),
        ("seed", seed.to_string()),
        ("trials", trials.to_string()),
        ("contexts_total", m.to_string()),
        ("contexts_per_trial", plan.contexts_required.to_string()),
        (
            "rounds_per_context",
            plan.rounds
                .map(|r| r.rounds.to_string())
                .unwrap_or_else(|| "exact".to_string()),
        ),
        (
            "sampling",
            if with_replacement {
                "with-replacement".to_string()
            } else {
                "without-replacement".to_string()
            },
        ),
        ("beta_true", format_sig(beta, p)),
        (
            "failure_rate",
            format_sig(failures as f64 / trials as f64, p),
        ),
        (
            "certified_rate",
            format_sig(certified as f64 / trials as f64, p),
        ),
    ];
    let mut text = metadata_block("simulate", &params);
    text.push_str("trial,Y,beta_true,within_epsilon,certified\n");
    for (index, trial) in results.iter().enumerate() {
        let _ = writeln!(
            text,
            "{index},{},{},{},{}",
            format_sig(trial.y, p),
            format_sig(trial.beta_true, p),
            trial.within_epsilon,
            trial.certified
        );
    }
    Ok(CommandOutput::ok(text))
}

fn validate_catalog(cli: &Cli) -> Result<CommandOutput, CliError> {
    let catalog = load_catalog(cli)?;
    // load_catalog already validates; restate the summary.
    let text = format!(
        "catalog OK: format_version {}, {} inequalities, {} graphs\n",
        catalog.format_version,
        catalog.inequalities.len(),
        catalog.graphs.len()
    );
    Ok(CommandOutput::ok(text))
}
