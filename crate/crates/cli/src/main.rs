use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use flowhand_core::config::{self, ConfigFile};
use flowhand_core::design::{self, DesignTargets, OrificeKnob};
use flowhand_core::scenario::{run_scenario, Scenario};
use flowhand_core::sweep;
use flowhand_core::table1::{self, PrototypeSpec};
use flowhand_core::{Error, SystemConfig};
use serde_json::Value;

/// Exit status for a check that ran but did not match its target.
const EXIT_MISMATCH: u8 = 2;
const EXIT_CONFIG: u8 = 1;

#[derive(Parser)]
#[command(name = "flowhand", version, about = "Quasi-static simulator for a flow-switched soft hand")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its trace as CSV.
    Simulate {
        scenario: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Vary one config key and summarise a scenario run per value.
    Sweep {
        /// Dotted key such as `fcs.epsilon`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, conflicts_with = "range", required_unless_present = "range")]
        values: Option<String>,
        /// Inclusive `start:stop:step`.
        #[arg(long)]
        range: Option<String>,
        /// Defaults to a 0 to full-open ramp.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tune the lever and injector to target switching flows.
    DesignSearch {
        #[arg(long, default_value_t = DesignTargets::PROTOTYPE_A.q_ab_lpm)]
        q_ab: f64,
        #[arg(long, default_value_t = DesignTargets::PROTOTYPE_A.q_bc_lpm)]
        q_bc: f64,
        #[arg(long, default_value_t = DesignTargets::PROTOTYPE_A.q2_activation_lpm)]
        q2: f64,
        /// Base hardware; the untuned Prototype A geometry when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Tune::OrificeArea)]
        tune: Tune,
        /// Where to write the tuned config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Recompute the prototype comparison table.
    Table1 {
        /// JSON array of prototype rows; the built-in table when omitted.
        #[arg(long)]
        prototypes: Option<PathBuf>,
        /// Source of the physical constants.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Check a config and optionally a scenario.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Print the fully resolved config.
        #[arg(long)]
        emit_config: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Tune {
    OrificeArea,
    TubeHeight,
}

impl From<Tune> for OrificeKnob {
    fn from(t: Tune) -> Self {
        match t {
            Tune::OrificeArea => OrificeKnob::OrificeArea,
            Tune::TubeHeight => OrificeKnob::TubeHeight,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let infeasible = e
                .chain()
                .any(|c| matches!(c.downcast_ref::<Error>(), Some(Error::Infeasible { .. })));
            ExitCode::from(if infeasible { EXIT_MISMATCH } else { EXIT_CONFIG })
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Simulate { scenario, config, out } => simulate(&scenario, config.as_deref(), out.as_deref()),
        Command::Sweep {
            param,
            values,
            range,
            scenario,
            config,
            out,
        } => {
            let values = match (values, range) {
                (Some(v), _) => parse_values(&v)?,
                (None, Some(r)) => parse_range(&r)?,
                (None, None) => bail!("one of --values or --range is required"),
            };
            run_sweep(&param, &values, scenario.as_deref(), config.as_deref(), out.as_deref())
        }
        Command::DesignSearch {
            q_ab,
            q_bc,
            q2,
            config,
            tune,
            out,
            json,
        } => {
            let targets = DesignTargets {
                q_ab_lpm: q_ab,
                q_bc_lpm: q_bc,
                q2_activation_lpm: q2,
            };
            design_search(targets, config.as_deref(), tune.into(), out.as_deref(), json)
        }
        Command::Table1 { prototypes, config } => table1(prototypes.as_deref(), config.as_deref()),
        Command::Validate {
            config,
            scenario,
            emit_config,
        } => validate(config.as_deref(), scenario.as_deref(), emit_config),
    }
}

fn load_system(path: Option<&Path>) -> Result<SystemConfig> {
    match path {
        Some(p) => config::load_config(p).with_context(|| format!("loading config {}", p.display())),
        None => Ok(SystemConfig::prototype_a()),
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => io::stdout().lock().write_all(text.as_bytes()).context("writing stdout"),
    }
}

fn simulate(scenario: &Path, config: Option<&Path>, out: Option<&Path>) -> Result<ExitCode> {
    let cfg = load_system(config)?;
    let sc = config::load_scenario(scenario).with_context(|| format!("loading scenario {}", scenario.display()))?;
    let trace = run_scenario(&sc, &cfg)?;
    write_output(out, &trace.to_csv_string()?)?;
    Ok(ExitCode::SUCCESS)
}

fn parse_values(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().with_context(|| format!("bad value `{s}`")))
        .collect()
}

fn parse_range(text: &str) -> Result<Vec<f64>> {
    let parts = parse_values(&text.replace(':', ","))?;
    let [start, stop, step] = parts[..] else {
        bail!("range must be start:stop:step, got `{text}`");
    };
    if !(step > 0.0 && step.is_finite() && start.is_finite() && stop.is_finite()) {
        bail!("range step must be a positive finite number");
    }
    if stop < start {
        return Ok(Vec::new());
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| start + step * k as f64).collect())
}

fn run_sweep(
    param: &str,
    values: &[f64],
    scenario: Option<&Path>,
    config: Option<&Path>,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let base = match config {
        Some(p) => config::load_config_value(p)?,
        None => Value::Object(Default::default()),
    };
    let sc = match scenario {
        Some(p) => config::load_scenario(p)?,
        None => Scenario::ramp_to_injection(&config::parse_config_value(base.clone())?),
    };
    let rows = sweep::sweep(&base, param, values, &sc)?;
    write_output(out, &sweep::sweep_csv(param, &rows)?)?;
    Ok(ExitCode::SUCCESS)
}

fn design_search(
    targets: DesignTargets,
    config: Option<&Path>,
    knob: OrificeKnob,
    out: Option<&Path>,
    json: bool,
) -> Result<ExitCode> {
    let base = match config {
        Some(p) => config::load_config(p)?,
        None => SystemConfig::prototype_a_geometry(),
    };
    let report = design::design_search(&base, &targets, knob)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        let show = |x: Option<f64>| x.map_or("none".to_string(), |v| format!("{v:.3}"));
        println!("targets: q_ab {} L/min, q_bc {} L/min, q2 {} L/min", targets.q_ab_lpm, targets.q_bc_lpm, targets.q2_activation_lpm);
        println!("s3          {:.4} mm^2", report.s3_mm2);
        println!("f_rot       {:.4e} N", report.f_rot_n);
        println!("gamma       {:.4}", report.gamma);
        println!("s_out       {:.4} mm^2", report.s_out_mm2);
        println!("h_t         {:.3} mm", report.h_t_mm);
        println!("{:<12}{:>10}{:>10}{:>12}{:>10}", "route", "q_ab", "q_bc", "activation", "q2");
        for (name, t) in [("bisection", report.bisection), ("scan", report.scan)] {
            println!(
                "{:<12}{:>10}{:>10}{:>12}{:>10}",
                name,
                show(t.q_ab_lpm),
                show(t.q_bc_lpm),
                show(t.q_activation_lpm),
                show(t.q2_activation_lpm)
            );
        }
        println!(
            "max error {:.4} L/min: {}",
            report.max_error_lpm,
            if report.within_tolerance { "PASS" } else { "FAIL" }
        );
    }
    if let Some(p) = out {
        let text = serde_json::to_string_pretty(&ConfigFile::from_system(&report.config))?;
        fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(if report.within_tolerance {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_MISMATCH)
    })
}

fn table1(prototypes: Option<&Path>, config: Option<&Path>) -> Result<ExitCode> {
    let specs: Vec<PrototypeSpec> = match prototypes {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => table1::table1_prototypes(),
    };
    let consts = load_system(config)?.constants;
    let report = match table1::validate_table1(&specs, &consts) {
        Err(e @ Error::MissingRow(_)) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(EXIT_MISMATCH));
        }
        other => other?,
    };
    print!("{}", report.render());
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_MISMATCH)
    })
}

fn validate(config: Option<&Path>, scenario: Option<&Path>, emit_config: bool) -> Result<ExitCode> {
    let cfg = load_system(config)?;
    if let Some(p) = scenario {
        let sc = config::load_scenario(p)?;
        let warnings = sc.validate(&cfg)?;
        for w in &warnings {
            eprintln!("warning: {w}");
        }
        println!("scenario {}: ok ({} warnings)", sc.name, warnings.len());
    }
    if emit_config {
        println!("{}", serde_json::to_string_pretty(&ConfigFile::from_system(&cfg))?);
    } else {
        println!("config: ok");
    }
    Ok(ExitCode::SUCCESS)
}
