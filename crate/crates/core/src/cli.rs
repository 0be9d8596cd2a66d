//! Command-line front end.
//!
//! Exit codes: `0` certified result, `2` heuristic or otherwise unconfirmed
//! result, `3` cell budget or width tolerance exhausted, `1` usage error.
//! JSON artifacts carry a top-level `"schema": 1`; CSV artifacts have the
//! fixed columns `cells,lo,hi,width`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::darboux::{certify_integrable, AdaptiveRefiner, Certification, Enclosure, Rigor, DEFAULT_BUDGET};
use crate::error::Error;
use crate::functions::{resolve, RangeEnclosure};
use crate::partition::ClosedInterval;
use crate::stieltjes::Integrator;
use crate::substitution::{
    build_verification_partition, change_of_variable, classify, eta_partition, verify_ledger, CellClass,
};

/// Environment variable overriding the default cell budget.
pub const BUDGET_ENV: &str = "DARBOUX_BUDGET";

/// Version of the JSON artifact layout.
pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_CERTIFIED: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_HEURISTIC: i32 = 2;
pub const EXIT_EXHAUSTED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "darboux", version, about = "Certified Darboux enclosures and change-of-variable checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Base interval `A B`.
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true, required = true)]
    pub interval: Vec<f64>,
    /// Total cell budget (defaults to $DARBOUX_BUDGET or 2^20).
    #[arg(long)]
    pub budget: Option<usize>,
    /// Write the artifact here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct IntegratorArgs {
    /// Explicit nondecreasing integrator, as a gallery id.
    #[arg(long, conflicts_with = "phi")]
    pub integrator: Option<String>,
    /// Density `φ`; the integrator becomes `anchor + ∫_a^x φ`.
    #[arg(long)]
    pub phi: Option<String>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub anchor: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enclose `∫ f dΦ` to width `tol`.
    Enclose {
        #[arg(long = "f")]
        /// Integrand, as a gallery id
        f: String,
        #[command(flatten)]
        integrator: IntegratorArgs,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Search for a partition with oscillation sum at most `eps`.
    Certify {
        #[arg(long = "f")]
        /// Integrand, as a gallery id
        f: String,
        #[command(flatten)]
        integrator: IntegratorArgs,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Enclose both sides of the change-of-variable formula.
    Substitute {
        #[arg(long = "f")]
        /// Integrand, as a gallery id
        f: String,
        #[arg(long)]
        phi: String,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        anchor: f64,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate the bound ledger for a given η.
    Ledger {
        #[arg(long = "f")]
        /// Integrand, as a gallery id
        f: String,
        #[arg(long)]
        phi: String,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        anchor: f64,
        #[arg(long, default_value_t = 0.1)]
        eta: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Record the enclosure after 2, 4, 8, ... cells of greedy refinement.
    Converge {
        #[arg(long = "f")]
        /// Integrand, as a gallery id
        f: String,
        #[command(flatten)]
        integrator: IntegratorArgs,
        /// Largest cell count of the sweep.
        #[arg(long, default_value_t = 1024)]
        cells: usize,
        #[command(flatten)]
        common: Common,
    },
}

/// Serialized artifact plus the exit status it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub artifact: String,
    pub status: i32,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}

fn status_of(rigor: Rigor, ok: bool) -> i32 {
    if ok && rigor == Rigor::Certified {
        EXIT_CERTIFIED
    } else {
        EXIT_HEURISTIC
    }
}

fn interval_of(common: &Common) -> Result<ClosedInterval, Error> {
    ClosedInterval::new(common.interval[0], common.interval[1])
}

fn budget_of(common: &Common) -> Result<usize, Error> {
    let budget = match common.budget {
        Some(b) => b,
        None => match std::env::var(BUDGET_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| usage(format!("{BUDGET_ENV} must be a positive integer, got '{v}'")))?,
            Err(_) => DEFAULT_BUDGET,
        },
    };
    if budget == 0 {
        return Err(usage("budget must be at least 1"));
    }
    Ok(budget)
}

fn positive(name: &str, v: f64) -> Result<f64, Error> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("{name} must be positive and finite, got {v}")))
    }
}

fn build_integrator(args: &IntegratorArgs, interval: ClosedInterval) -> Result<Integrator, Error> {
    match (&args.integrator, &args.phi) {
        (Some(id), _) if id == "identity" || id == "x" => Ok(Integrator::identity(interval)),
        (Some(id), _) => Integrator::explicit(resolve(id, interval)?),
        (None, Some(phi)) => Integrator::indefinite(&resolve(phi, interval)?, interval, args.anchor),
        (None, None) => Ok(Integrator::identity(interval)),
    }
}

fn enclosure_json(e: &Enclosure) -> Value {
    json!({
        "lo": e.lo,
        "hi": e.hi,
        "width": e.width(),
        "cells": e.cells,
        "osc_sum": e.osc_sum,
        "rigor": e.rigor,
    })
}

fn csv(rows: &[(usize, f64, f64)]) -> String {
    let mut out = String::from("cells,lo,hi,width\n");
    for &(cells, lo, hi) in rows {
        out.push_str(&format!("{cells},{lo:?},{hi:?},{:?}\n", hi - lo));
    }
    out
}

fn render(format: Format, value: Value, rows: Option<Vec<(usize, f64, f64)>>) -> Result<String, Error> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&value).expect("artifact serializes");
            s.push('\n');
            Ok(s)
        }
        Format::Csv => rows
            .map(|r| csv(&r))
            .ok_or_else(|| usage("CSV output is available for enclose, substitute and converge")),
    }
}

fn exhausted(command: &str, err: &Error) -> Option<(Value, Option<Vec<(usize, f64, f64)>>)> {
    match err {
        Error::WidthExceeded { tol, width, cells, best } => Some((
            json!({
                "schema": SCHEMA_VERSION,
                "command": command,
                "status": "width_exceeded",
                "tol": tol,
                "width": width,
                "cells": cells,
                "best": enclosure_json(best),
            }),
            Some(vec![(best.cells, best.lo, best.hi)]),
        )),
        Error::BudgetExceeded {
            budget,
            best,
            target,
            cell,
        } => Some((
            json!({
                "schema": SCHEMA_VERSION,
                "command": command,
                "status": "budget_exceeded",
                "budget": budget,
                "best": best,
                "target": target,
                "cell": cell,
            }),
            None,
        )),
        _ => None,
    }
}

/// Runs one parsed command and returns its artifact and exit status.
pub fn execute(command: &Command) -> Result<Outcome, Error> {
    let (name, common) = match command {
        Command::Enclose { common, .. } => ("enclose", common),
        Command::Certify { common, .. } => ("certify", common),
        Command::Substitute { common, .. } => ("substitute", common),
        Command::Ledger { common, .. } => ("ledger", common),
        Command::Converge { common, .. } => ("converge", common),
    };
    match execute_inner(command) {
        Ok(o) => Ok(o),
        Err(e) => match exhausted(name, &e) {
            Some((value, rows)) => {
                let rows = if common.format == Format::Csv { rows.or(Some(Vec::new())) } else { rows };
                Ok(Outcome {
                    artifact: render(common.format, value, rows)?,
                    status: EXIT_EXHAUSTED,
                })
            }
            None => Err(e),
        },
    }
}

fn execute_inner(command: &Command) -> Result<Outcome, Error> {
    match command {
        Command::Enclose {
            f,
            integrator,
            tol,
            common,
        } => {
            let interval = interval_of(common)?;
            let budget = budget_of(common)?;
            let tol = positive("tol", *tol)?;
            let phi = build_integrator(integrator, interval)?;
            let f = resolve(f, interval)?;
            let e = crate::darboux::integral_enclosure(&f, &phi, interval, tol, budget)?;
            let value = json!({
                "schema": SCHEMA_VERSION,
                "command": "enclose",
                "f": f.name(),
                "integrator": phi.name(),
                "interval": [interval.a(), interval.b()],
                "tol": tol,
                "lo": e.lo,
                "hi": e.hi,
                "width": e.width(),
                "cells": e.cells,
                "osc_sum": e.osc_sum,
                "rigor": e.rigor,
            });
            Ok(Outcome {
                artifact: render(common.format, value, Some(vec![(e.cells, e.lo, e.hi)]))?,
                status: status_of(e.rigor, true),
            })
        }
        Command::Certify {
            f,
            integrator,
            eps,
            common,
        } => {
            let interval = interval_of(common)?;
            let budget = budget_of(common)?;
            let eps = positive("eps", *eps)?;
            let phi = build_integrator(integrator, interval)?;
            let f = resolve(f, interval)?;
            let cert = certify_integrable(&f, &phi, interval, eps, budget)?;
            let (value, status) = match &cert {
                Certification::Certified(c) => (
                    json!({
                        "schema": SCHEMA_VERSION,
                        "command": "certify",
                        "status": "certified",
                        "f": f.name(),
                        "integrator": phi.name(),
                        "epsilon": c.epsilon,
                        "osc_sum": c.osc_sum,
                        "cells": c.partition.len(),
                        "rigor": c.rigor,
                        "partition": c.partition,
                    }),
                    status_of(c.rigor, true),
                ),
                Certification::Inconclusive(i) => (
                    json!({
                        "schema": SCHEMA_VERSION,
                        "command": "certify",
                        "status": "inconclusive",
                        "f": f.name(),
                        "integrator": phi.name(),
                        "epsilon": i.epsilon,
                        "best_osc_sum": i.best_osc_sum,
                        "cells": i.cells,
                        "rigor": i.rigor,
                    }),
                    EXIT_EXHAUSTED,
                ),
            };
            Ok(Outcome {
                artifact: render(common.format, value, None)?,
                status,
            })
        }
        Command::Substitute {
            f,
            phi,
            anchor,
            eta,
            tol,
            common,
        } => {
            let interval = interval_of(common)?;
            let budget = budget_of(common)?;
            let tol = positive("tol", *tol)?;
            if let Some(eta) = eta {
                positive("eta", *eta)?;
            }
            let phi = resolve(phi, interval)?;
            let f = resolve_on_image(f, &phi, interval, *anchor)?;
            let v = change_of_variable(&f, &phi, interval, *anchor, *eta, tol, budget)?;
            let value = json!({
                "schema": SCHEMA_VERSION,
                "command": "substitute",
                "f": f.name(),
                "phi": phi.name(),
                "interval": [interval.a(), interval.b()],
                "anchor": anchor,
                "tol": tol,
                "eta": v.eta,
                "lhs": enclosure_json(&v.lhs),
                "rhs": enclosure_json(&v.rhs),
                "overlap": v.overlap,
                "max_width": v.max_width,
                "rigor": v.rigor,
                "ledger": v.ledger,
            });
            let rows = vec![(v.lhs.cells, v.lhs.lo, v.lhs.hi), (v.rhs.cells, v.rhs.lo, v.rhs.hi)];
            Ok(Outcome {
                artifact: render(common.format, value, Some(rows))?,
                status: status_of(v.rigor, v.overlap && v.max_width <= tol),
            })
        }
        Command::Ledger {
            f,
            phi,
            anchor,
            eta,
            common,
        } => {
            let interval = interval_of(common)?;
            let budget = budget_of(common)?;
            let eta = positive("eta", *eta)?;
            let phi = resolve(phi, interval)?;
            let f = resolve_on_image(f, &phi, interval, *anchor)?;
            let integrator = Integrator::indefinite(&phi, interval, *anchor)?;
            let p = eta_partition(&phi, interval, eta, budget)?;
            let c = classify(&p, &phi, eta)?;
            let v = build_verification_partition(&f, &phi, &integrator, &c, eta, budget)?;
            let ledger = verify_ledger(&f, &phi, &integrator, &c, &v)?;
            let count = |class| c.classes.iter().filter(|&&k| k == class).count();
            let value = json!({
                "schema": SCHEMA_VERSION,
                "command": "ledger",
                "f": f.name(),
                "phi": phi.name(),
                "interval": [interval.a(), interval.b()],
                "eta": eta,
                "cells": p.len(),
                "verification_cells": v.cells,
                "good": count(CellClass::Good),
                "bounded": count(CellClass::Bounded),
                "undulating": count(CellClass::Undulating),
                "rows": ledger.rows,
                "all_ok": ledger.all_ok,
                "rigor": ledger.rigor,
            });
            Ok(Outcome {
                artifact: render(common.format, value, None)?,
                status: status_of(ledger.rigor, ledger.all_ok),
            })
        }
        Command::Converge {
            f,
            integrator,
            cells,
            common,
        } => {
            let interval = interval_of(common)?;
            let budget = budget_of(common)?;
            if *cells < 1 {
                return Err(usage("cells must be at least 1"));
            }
            let phi = build_integrator(integrator, interval)?;
            let f = resolve(f, interval)?;
            let mut refiner = AdaptiveRefiner::new(&f, &phi, interval)?;
            let max = (*cells).min(budget);
            let mut rows = Vec::new();
            let mut n = 2usize;
            while n <= max {
                refiner.refine_to(n);
                let e = refiner.enclosure();
                rows.push((e.cells, e.lo, e.hi));
                n *= 2;
            }
            let rigor = refiner.rigor();
            let value = json!({
                "schema": SCHEMA_VERSION,
                "command": "converge",
                "f": f.name(),
                "integrator": phi.name(),
                "interval": [interval.a(), interval.b()],
                "rigor": rigor,
                "rows": rows
                    .iter()
                    .map(|&(c, lo, hi)| json!({"cells": c, "lo": lo, "hi": hi, "width": hi - lo}))
                    .collect::<Vec<_>>(),
            });
            Ok(Outcome {
                artifact: render(common.format, value, Some(rows))?,
                status: status_of(rigor, true),
            })
        }
    }
}

/// Resolves `f` on the image `Φ(I)` of the integrator built from `φ`.
fn resolve_on_image(
    f: &str,
    phi: &crate::functions::RealFunction,
    interval: ClosedInterval,
    anchor: f64,
) -> Result<crate::functions::RealFunction, Error> {
    let image: RangeEnclosure = Integrator::indefinite(phi, interval, anchor)?.image()?;
    resolve(f, ClosedInterval::new(image.lo, image.hi)?)
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::WidthExceeded { .. } | Error::BudgetExceeded { .. } => EXIT_EXHAUSTED,
        _ => EXIT_USAGE,
    }
}

/// Parses `args`, runs the command, writes the artifact and returns the exit
/// status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_CERTIFIED };
        }
    };
    let output = match &cli.command {
        Command::Enclose { common, .. }
        | Command::Certify { common, .. }
        | Command::Substitute { common, .. }
        | Command::Ledger { common, .. }
        | Command::Converge { common, .. } => common.output.clone(),
    };
    match execute(&cli.command) {
        Ok(outcome) => {
            let written = match &output {
                Some(path) => std::fs::write(path, &outcome.artifact),
                None => std::io::stdout().write_all(outcome.artifact.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: cannot write artifact: {e}");
                return EXIT_USAGE;
            }
            outcome.status
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
