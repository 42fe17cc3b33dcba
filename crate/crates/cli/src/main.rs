use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cohpow::repro::lemma_scan;
use cohpow::{
    classify, cohering_power, decohering_power, generalized_cohering_power, generalized_decohering_power,
    parse_channel_file, reproduce, reproduce_all, CoherenceMeasure, OptimizerConfig, PowerReport, ReproConfig,
    ReproReport, StateFile, Tolerance, PROP_IDS,
};
use serde_json::{json, Value};

/// Cohering and de-cohering powers of quantum channels.
#[derive(Parser)]
#[command(name = "cohpow", version)]
struct Cli {
    /// Validation tolerance for input files
    #[arg(long, global = true, value_name = "EPS")]
    tol: Option<f64>,
    /// Validate inputs at four-decimal print precision (5e-4)
    #[arg(long, global = true, conflicts_with = "tol")]
    relaxed: bool,
    /// Print one JSON document instead of a table
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// MIO / DIO / incoherent-Kraus membership of a channel file
    Classify { channel: PathBuf },
    /// One power functional of a channel file
    Power {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, value_enum)]
        measure: MeasureArg,
        #[command(flatten)]
        search: SearchArgs,
        channel: PathBuf,
    },
    /// Re-check reference claims
    Reproduce {
        #[arg(long, value_parser = PROP_IDS, conflicts_with = "all", required_unless_present = "all")]
        prop: Option<String>,
        #[arg(long)]
        all: bool,
        /// Random instances per sampled claim
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Scan the binary-entropy lemma margin on [0, 1]
    LemmaCheck {
        #[arg(long, default_value_t = 10_001)]
        grid: usize,
    },
}

#[derive(Args)]
struct SearchArgs {
    /// Random starts per search
    #[arg(long, default_value_t = 64)]
    starts: usize,
    #[arg(long, env = "COHPOW_SEED", default_value_t = 0)]
    seed: u64,
}

impl SearchArgs {
    fn config(&self) -> OptimizerConfig {
        OptimizerConfig { starts: self.starts, seed: self.seed, ..OptimizerConfig::default() }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Cohering,
    GenCohering,
    Decohering,
    GenDecohering,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    L1,
    RelEnt,
}

impl From<MeasureArg> for CoherenceMeasure {
    fn from(m: MeasureArg) -> Self {
        match m {
            MeasureArg::L1 => CoherenceMeasure::L1,
            MeasureArg::RelEnt => CoherenceMeasure::RelativeEntropy,
        }
    }
}

enum Outcome {
    Ok,
    Failed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn tolerance(cli: &Cli) -> cohpow::Result<Tolerance> {
    match (cli.tol, cli.relaxed) {
        (Some(eps), _) => Tolerance::new(eps),
        (None, true) => Ok(Tolerance::PRINTED),
        (None, false) => Ok(Tolerance::DEFAULT),
    }
}

fn emit(json: bool, doc: Value, table: impl FnOnce() -> String) {
    let text = if json { serde_json::to_string_pretty(&doc).expect("JSON values serialize") + "\n" } else { table() };
    // a closed pipe (e.g. `| head`) is not an error worth reporting
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn run(cli: &Cli) -> cohpow::Result<Outcome> {
    let tol = tolerance(cli)?;
    match &cli.command {
        Command::Classify { channel } => {
            let phi = parse_channel_file(channel, tol)?;
            let r = classify(&phi, tol)?;
            let doc = json!({ "file": channel, "dim": phi.dim_in(), "tolerance": tol.eps(), "report": r });
            emit(cli.json, doc, || {
                let rows = [
                    ("MIO", r.is_mio, r.mio_violation),
                    ("DIO", r.is_dio, r.dio_violation),
                    ("incoherent-Kraus", r.has_incoherent_kraus, r.incoherent_kraus_violation),
                ];
                rows.iter()
                    .map(|(name, member, v)| {
                        format!("{:<18}{:<5}violation {v:.3e}\n", format!("{name}:"), yes_no(*member))
                    })
                    .collect()
            });
            Ok(Outcome::Ok)
        }
        Command::Power { kind, measure, search, channel } => {
            let phi = parse_channel_file(channel, tol)?;
            let measure = CoherenceMeasure::from(*measure);
            let cfg = search.config();
            let report = match kind {
                KindArg::Cohering => cohering_power(&phi, measure)?,
                KindArg::GenCohering => generalized_cohering_power(&phi, measure, &cfg)?,
                KindArg::Decohering => decohering_power(&phi, measure, &cfg)?,
                KindArg::GenDecohering => generalized_decohering_power(&phi, measure, &cfg)?,
            };
            emit(cli.json, power_json(&report), || power_table(&report));
            Ok(Outcome::Ok)
        }
        Command::Reproduce { prop, all, samples, search } => {
            let cfg = ReproConfig { optimizer: search.config(), samples: *samples };
            let reports = match (prop, all) {
                (Some(id), _) => vec![reproduce(id, &cfg)?],
                (None, _) => reproduce_all(&cfg)?,
            };
            let pass = reports.iter().all(|r| r.pass);
            let doc = json!({ "pass": pass, "seed": search.seed, "reports": reports });
            emit(cli.json, doc, || reports.iter().map(repro_table).collect());
            Ok(if pass { Outcome::Ok } else { Outcome::Failed })
        }
        Command::LemmaCheck { grid } => {
            let (min, zeros) = lemma_scan(*grid)?;
            let pass = min >= -1e-12;
            let doc = json!({ "grid": grid, "min_margin": min, "zeros": zeros, "pass": pass });
            emit(cli.json, doc, || {
                let zs: Vec<String> = zeros.iter().map(|z| format!("{z}")).collect();
                format!(
                    "grid points: {grid}\nmin margin:  {min:.3e}\nzeros at:    {}\n{}\n",
                    zs.join(", "),
                    if pass { "PASS" } else { "FAIL" }
                )
            });
            Ok(if pass { Outcome::Ok } else { Outcome::Failed })
        }
    }
}

/// Fixed-point, switching to scientific for small nonzero magnitudes.
fn num(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-4 {
        format!("{v:.3e}")
    } else {
        format!("{v:.9}")
    }
}

fn power_json(r: &PowerReport) -> Value {
    json!({
        "kind": r.kind.name(),
        "measure": r.measure,
        "value": r.value,
        "converged": r.converged,
        "starts_used": r.starts_used,
        "best_start": r.best_start,
        "iterations": r.iterations,
        "witness": StateFile::from_state(&r.witness),
    })
}

fn power_table(r: &PowerReport) -> String {
    let d = r.witness.dim();
    let m = r.witness.matrix();
    let mut out = format!(
        "kind:       {}\nmeasure:    {}\nvalue:      {:.10}\nconverged:  {}\nstarts:     {} (best #{})\niterations: {}\nwitness:\n",
        r.kind.name(),
        r.measure.name(),
        r.value,
        r.converged,
        r.starts_used,
        r.best_start,
        r.iterations
    );
    for i in 0..d {
        let row: Vec<String> = (0..d).map(|j| format!("{:>9.5}{:+.5}i", m[(i, j)].re, m[(i, j)].im)).collect();
        out.push_str(&format!("  {}\n", row.join("  ")));
    }
    out
}

fn repro_table(r: &ReproReport) -> String {
    let mut out = format!(
        "[{}] {:<6} {} ({:.0} ms)\n",
        if r.pass { "PASS" } else { "FAIL" },
        r.id,
        r.description,
        r.wall_time_ms
    );
    for c in &r.checks {
        let rel = match c.relation {
            cohpow::Relation::Equal => "=",
            cohpow::Relation::AtLeast => ">=",
            cohpow::Relation::AtMost => "<=",
            cohpow::Relation::Exceeds => ">",
        };
        out.push_str(&format!(
            "    {:<4} {:<48} computed {:<14} {rel} {} ({}, tol {})\n",
            if c.pass { "ok" } else { "FAIL" },
            c.name,
            num(c.computed),
            num(c.expected),
            c.source,
            if c.tolerance == 0.0 { "0".to_string() } else { format!("{:e}", c.tolerance) }
        ));
    }
    out
}
