//! Verbs of the `exo` command line.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use exo_core::balance::{equilibrium_report, BalanceSystem};
use exo_core::forms::{exterior_derivative_flat, hodge_star, wedge, Form, Metric, Pseudostructure};
use exo_core::geometry::{evolutionary_derivative, form_commutator, Connection};
use exo_core::relations::{
    classify, integrate_relation, integration_chain, is_closed, is_closed_on,
    pseudostructure_search, restrict_relation, verify_canonical, Relation,
};
use exo_core::symexpr::ParseError;
use exo_core::{Chart, Confidence, Rational, Sampler};

use crate::document::{parse_document, Document, Potential};
use crate::report::{ChartInfo, Item, Report, CANONICAL, CLOSED, VERSION, ZERO};

#[derive(Debug, Parser)]
#[command(
    name = "exo",
    version,
    about = "Exterior calculus for evolutionary forms"
)]
pub struct Cli {
    /// Emit the JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed of the zero-test sampler.
    #[arg(long, global = true, default_value_t = Sampler::DEFAULT_SEED)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct FormArgs {
    /// Document in the `.exo` language.
    pub file: PathBuf,
    pub form: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exterior derivative; evolutionary derivative with `--connection`.
    D {
        #[command(flatten)]
        target: FormArgs,
        #[arg(long)]
        connection: Option<String>,
    },
    /// Exterior product of two forms.
    Wedge { file: PathBuf, a: String, b: String },
    /// Hodge dual.
    Star {
        #[command(flatten)]
        target: FormArgs,
        /// `euclidean` or the name of a declared metric.
        #[arg(long, default_value = "euclidean")]
        metric: String,
    },
    /// Coefficient, metric and total commutator of a form.
    Commutator {
        #[command(flatten)]
        target: FormArgs,
        #[arg(long)]
        connection: Option<String>,
        /// Point at which the commutator norm is evaluated, e.g. `1,1/2,0`.
        #[arg(long)]
        probe: Option<String>,
    },
    /// Closure of a form, optionally on a pseudostructure.
    Closure {
        #[command(flatten)]
        target: FormArgs,
        #[arg(long)]
        on: Option<String>,
        #[arg(long)]
        connection: Option<String>,
    },
    /// Slices on which an unclosed form and its dual both close.
    PseudoSearch {
        #[command(flatten)]
        target: FormArgs,
        #[arg(long, default_value = "euclidean")]
        metric: String,
        #[arg(long)]
        connection: Option<String>,
    },
    /// Restricts a nonidentical relation to a pseudostructure.
    Restrict {
        file: PathBuf,
        relation: String,
        pseudostructure: String,
    },
    /// Integrates an identical relation once, or down to degree 0.
    Integrate {
        file: PathBuf,
        relation: String,
        /// Restrict to this pseudostructure first.
        #[arg(long)]
        on: Option<String>,
        #[arg(long)]
        chain: bool,
    },
    /// Interaction label of a generated closed form.
    Classify {
        #[arg(long = "p")]
        p: usize,
        #[arg(long = "k")]
        k: usize,
        /// Dimension of the original space; defaults to N.
        #[arg(long = "n")]
        n: Option<usize>,
        /// Dimension of the space the structures form.
        #[arg(long = "N")]
        big_n: usize,
    },
    /// Checks the declared canonical maps.
    Canonical { file: PathBuf, names: Vec<String> },
    /// Equilibrium diagnosis of balance systems.
    Balance {
        file: PathBuf,
        system: Option<String>,
        #[arg(long, default_value = "euclidean")]
        metric: String,
        #[arg(long)]
        probe: Option<String>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}:{err}")]
    Parse { path: String, err: ParseError },
    #[error("{0}")]
    Engine(#[from] exo_core::Error),
    #[error("cannot read {path}: {err}")]
    Io { path: String, err: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn load(path: &Path) -> Result<Document> {
    let text = fs::read_to_string(path).map_err(|err| CliError::Io {
        path: path.display().to_string(),
        err,
    })?;
    parse_document(&text).map_err(|err| CliError::Parse {
        path: path.display().to_string(),
        err,
    })
}

struct Ctx {
    doc: Document,
    sampler: Sampler,
}

impl Ctx {
    fn chart(&self) -> Result<&Arc<Chart>> {
        self.doc
            .chart()
            .ok_or_else(|| usage("the document declares no chart"))
    }

    fn form(&self, name: &str) -> Result<&Form> {
        self.doc
            .form(name)
            .ok_or_else(|| usage(format!("unknown form `{name}`")))
    }

    fn connection(&self, name: Option<&str>) -> Result<Connection> {
        match name {
            None => Ok(Connection::zero(self.chart()?.clone())),
            Some(n) => self
                .doc
                .connections
                .get(n)
                .map(|c| c.value.clone())
                .ok_or_else(|| usage(format!("unknown connection `{n}`"))),
        }
    }

    fn metric(&self, name: &str) -> Result<Metric> {
        if name == "euclidean" {
            return Ok(Metric::euclidean(self.chart()?.clone()));
        }
        self.doc
            .metrics
            .get(name)
            .map(|m| m.value.clone())
            .ok_or_else(|| usage(format!("unknown metric `{name}`")))
    }

    fn pseudostructure(&self, name: &str) -> Result<&Pseudostructure> {
        self.doc
            .pseudostructures
            .get(name)
            .map(|p| &p.value)
            .ok_or_else(|| usage(format!("unknown pseudostructure `{name}`")))
    }

    fn relation(&self, name: &str) -> Result<Relation> {
        let decl = &self
            .doc
            .relations
            .get(name)
            .ok_or_else(|| usage(format!("unknown relation `{name}`")))?
            .value;
        let lhs = match &decl.potential {
            Potential::Form(f) => Some(self.form(f)?.clone()),
            Potential::Unknown(_) => None,
        };
        let rhs = self.form(&decl.rhs)?.clone();
        let c = self.connection(decl.connection.as_deref())?;
        Ok(Relation::new(lhs, rhs, c, &self.sampler)?)
    }

    fn probe(&self, text: Option<&str>) -> Result<Vec<Rational>> {
        let n = self.chart()?.dim();
        let Some(text) = text else {
            return Ok(vec![Rational::from_integer(1.into()); n]);
        };
        let probe = text
            .split(',')
            .map(|s| {
                Rational::from_str(s.trim())
                    .map_err(|_| usage(format!("`{s}` is not a rational number")))
            })
            .collect::<Result<Vec<_>>>()?;
        if probe.len() != n {
            return Err(usage(format!(
                "--probe needs {n} coordinates, got {}",
                probe.len()
            )));
        }
        Ok(probe)
    }
}

fn with_on(name: &str, on: Option<&str>) -> String {
    match on {
        Some(pi) => format!("{name} on {pi}"),
        None => name.to_string(),
    }
}

/// Runs one verb and builds its report.
pub fn run(cli: &Cli) -> Result<Report> {
    let sampler = Sampler::new(cli.seed);
    if let Command::Classify { p, k, n, big_n } = &cli.command {
        let class = classify(*p, *k, n.unwrap_or(*big_n), *big_n)?;
        let mut command = format!("classify --p {p} --k {k}");
        if let Some(n) = n {
            command.push_str(&format!(" --n {n}"));
        }
        command.push_str(&format!(" --N {big_n}"));
        return Ok(Report {
            command,
            chart: ChartInfo::none(),
            results: vec![Item::class(format!("k={k}"), &class)],
            seed: cli.seed,
            version: VERSION,
        });
    }
    let file = match &cli.command {
        Command::D { target, .. }
        | Command::Star { target, .. }
        | Command::Commutator { target, .. }
        | Command::Closure { target, .. }
        | Command::PseudoSearch { target, .. } => &target.file,
        Command::Wedge { file, .. }
        | Command::Restrict { file, .. }
        | Command::Integrate { file, .. }
        | Command::Canonical { file, .. }
        | Command::Balance { file, .. } => file,
        Command::Classify { .. } => unreachable!("handled above"),
    };
    let ctx = Ctx {
        doc: load(file)?,
        sampler,
    };
    let (command, results) = dispatch(&ctx, &cli.command)?;
    Ok(Report {
        command,
        chart: ctx
            .doc
            .chart()
            .map_or_else(ChartInfo::none, |c| ChartInfo::of(c)),
        results,
        seed: cli.seed,
        version: VERSION,
    })
}

fn dispatch(ctx: &Ctx, command: &Command) -> Result<(String, Vec<Item>)> {
    let s = &ctx.sampler;
    Ok(match command {
        Command::D { target, connection } => {
            let t = ctx.form(&target.form)?;
            match connection {
                None => (
                    format!("d {}", target.form),
                    vec![Item::form(
                        format!("d({})", target.form),
                        &exterior_derivative_flat(t),
                    )],
                ),
                Some(cn) => {
                    let c = ctx.connection(Some(cn))?;
                    (
                        format!("d {} --connection {cn}", target.form),
                        vec![Item::form(
                            format!("d({}) with {cn}", target.form),
                            &evolutionary_derivative(t, &c)?,
                        )],
                    )
                }
            }
        }
        Command::Wedge { a, b, .. } => {
            let w = wedge(ctx.form(a)?, ctx.form(b)?)?;
            (
                format!("wedge {a} {b}"),
                vec![Item::form(format!("{a}^{b}"), &w)],
            )
        }
        Command::Star { target, metric } => {
            let g = ctx.metric(metric)?;
            let star = hodge_star(ctx.form(&target.form)?, &g)?;
            (
                format!("star {} --metric {metric}", target.form),
                vec![Item::form(format!("*{}", target.form), &star)],
            )
        }
        Command::Commutator {
            target,
            connection,
            probe,
        } => {
            let name = &target.form;
            let c = ctx.connection(connection.as_deref())?;
            let point = ctx.probe(probe.as_deref())?;
            let r = form_commutator(ctx.form(name)?, &c, &point, s)?;
            let mut command = format!("commutator {name}");
            if let Some(cn) = connection {
                command.push_str(&format!(" --connection {cn}"));
            }
            if let Some(p) = probe {
                command.push_str(&format!(" --probe {p}"));
            }
            let results = vec![
                Item::form(format!("{name}.coefficient_term"), &r.coefficient_term),
                Item::verdict(
                    format!("{name}.coefficient_term.vanishes"),
                    r.coefficient_vanishes,
                    ZERO,
                ),
                Item::form(format!("{name}.metric_term"), &r.metric_term),
                Item::verdict(
                    format!("{name}.metric_term.vanishes"),
                    r.metric_vanishes,
                    ZERO,
                ),
                Item::form(format!("{name}.total"), &r.total),
                Item::verdict(format!("{name}.total.vanishes"), r.total_vanishes, ZERO),
                Item::scalar(
                    format!("{name}.discontinuity"),
                    r.discontinuity,
                    Confidence::Exact,
                ),
            ];
            (command, results)
        }
        Command::Closure {
            target,
            on,
            connection,
        } => {
            let name = &target.form;
            let t = ctx.form(name)?;
            let c = ctx.connection(connection.as_deref())?;
            let v = match on {
                Some(pi) => is_closed_on(t, ctx.pseudostructure(pi)?, &c, s)?,
                None => is_closed(t, &c, s)?,
            };
            let mut command = format!("closure {name}");
            if let Some(pi) = on {
                command.push_str(&format!(" --on {pi}"));
            }
            if let Some(cn) = connection {
                command.push_str(&format!(" --connection {cn}"));
            }
            (
                command,
                vec![Item::verdict(with_on(name, on.as_deref()), v, CLOSED)],
            )
        }
        Command::PseudoSearch {
            target,
            metric,
            connection,
        } => {
            let name = &target.form;
            let t = ctx.form(name)?;
            let g = ctx.metric(metric)?;
            let c = ctx.connection(connection.as_deref())?;
            let residual = evolutionary_derivative(t, &c)?;
            let mut results = vec![Item::verdict(
                format!("{name}.residual"),
                residual.vanishes(s),
                ZERO,
            )];
            for (i, e) in pseudostructure_search(t, &g, &c, s)?.iter().enumerate() {
                results.push(Item::event(format!("{name}.event{}", i + 1), e));
            }
            let mut command = format!("pseudo-search {name} --metric {metric}");
            if let Some(cn) = connection {
                command.push_str(&format!(" --connection {cn}"));
            }
            (command, results)
        }
        Command::Restrict {
            relation,
            pseudostructure,
            ..
        } => {
            let r = ctx.relation(relation)?;
            let pi = ctx.pseudostructure(pseudostructure)?;
            let restricted = restrict_relation(&r, pi, s)?;
            (
                format!("restrict {relation} {pseudostructure}"),
                vec![
                    Item::relation(relation.clone(), &r),
                    Item::relation(format!("{relation} on {pseudostructure}"), &restricted),
                ],
            )
        }
        Command::Integrate {
            relation,
            on,
            chain,
            ..
        } => {
            let mut r = ctx.relation(relation)?;
            let mut name = relation.clone();
            let mut command = format!("integrate {relation}");
            let mut results = Vec::new();
            if let Some(pi) = on {
                results.push(Item::relation(name.clone(), &r));
                r = restrict_relation(&r, ctx.pseudostructure(pi)?, s)?;
                name = with_on(&name, Some(pi));
                command.push_str(&format!(" --on {pi}"));
            }
            if *chain {
                command.push_str(" --chain");
                for step in integration_chain(&r, s)? {
                    let step_name = format!("{name}.k{}", step.degree);
                    results.push(Item::relation(step_name.clone(), &step.relation));
                    results.push(Item::verdict(step_name, step.closed, CLOSED));
                }
            } else {
                results.push(Item::relation(name.clone(), &r));
                results.push(Item::relation(
                    format!("{name}.integrated"),
                    &integrate_relation(&r, s)?,
                ));
            }
            (command, results)
        }
        Command::Canonical { names, .. } => {
            let selected: Vec<&String> = if names.is_empty() {
                ctx.doc.canonicals.keys().collect()
            } else {
                names.iter().collect()
            };
            let mut results = Vec::new();
            for name in &selected {
                let decl = &ctx
                    .doc
                    .canonicals
                    .get(name.as_str())
                    .ok_or_else(|| usage(format!("unknown canonical map `{name}`")))?
                    .value;
                let report = verify_canonical(&decl.map, s)?;
                results.push(Item::verdict(
                    name.to_string(),
                    report.is_canonical,
                    CANONICAL,
                ));
                results.push(Item::form(format!("{name}.delta"), &report.delta));
                if let Some(w) = &report.generating_function {
                    results.push(Item::form(format!("{name}.generating_function"), w));
                }
            }
            let mut command = "canonical".to_string();
            for n in names {
                command.push(' ');
                command.push_str(n);
            }
            (command, results)
        }
        Command::Balance {
            system,
            metric,
            probe,
            ..
        } => {
            let selected: Vec<&String> = match system {
                Some(n) => vec![n],
                None => ctx.doc.balances.keys().collect(),
            };
            let g = ctx.metric(metric)?;
            let point = ctx.probe(probe.as_deref())?;
            let mut results = Vec::new();
            for name in selected {
                let sys: BalanceSystem = ctx
                    .doc
                    .balance_system(name)
                    .ok_or_else(|| usage(format!("unknown balance system `{name}`")))??;
                let d = equilibrium_report(&sys, &g, &point, s)?;
                results.push(Item::form(format!("{name}.form"), d.relation.rhs()));
                results.push(Item::form(
                    format!("{name}.commutator"),
                    &d.commutator.total,
                ));
                results.push(Item::label(
                    format!("{name}.state"),
                    d.state.as_str(),
                    d.confidence,
                ));
                results.push(Item::scalar(
                    format!("{name}.internal_force"),
                    d.internal_force,
                    Confidence::Exact,
                ));
                for (i, e) in d.events.iter().enumerate() {
                    results.push(Item::event(format!("{name}.event{}", i + 1), e));
                }
            }
            let mut command = match system {
                Some(n) => format!("balance {n} --metric {metric}"),
                None => format!("balance --metric {metric}"),
            };
            if let Some(p) = probe {
                command.push_str(&format!(" --probe {p}"));
            }
            (command, results)
        }
        Command::Classify { .. } => unreachable!("handled in run"),
    })
}
