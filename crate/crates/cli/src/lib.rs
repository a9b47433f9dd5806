//! The `fsl` command-line tool.
//!
//! Every subcommand writes one deterministic payload (JSON, or DOT for
//! `hasse`) to stdout or `--out`. Exit codes: 0 when the requested property
//! holds, 1 when it fails (the payload then carries a witness), 2 for usage
//! and input errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use fsemilattice::algebra::{
    validate_axioms, AlgebraTables, FSemilattice, Validation, DEFAULT_CONGRUENCE_LIMIT,
};
use fsemilattice::constructions::{
    a_k, maroti, one_element, transversal_independence_check, twisted_multiple, two_element,
    TwistedSpec,
};
use fsemilattice::group::{GroupElement, GroupSpec, Subgroup, Transversal};
use fsemilattice::irrational::{check_separating_identity, rational_between, QuadraticIrrational};
use fsemilattice::quasivar::{
    decompose_ku, holds_quasi_identity, is_minimal_free, simplicity_report, verify_bijection,
    Minimality, ModelCheck, DEFAULT_BLOCK_BOUND,
};
use fsemilattice::term::{QuasiIdentity, VARIABLES};

pub mod dot;

#[derive(Debug, Parser)]
#[command(name = "fsl", version, about = "Semilattices over abelian groups")]
struct Cli {
    /// Write the payload here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print run metadata (version, command, timestamp) as JSON on stderr.
    #[arg(long, global = true)]
    meta: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Group computations.
    #[command(subcommand)]
    Group(GroupCommand),
    /// Build an algebra and emit it as JSON.
    #[command(subcommand)]
    Build(BuildCommand),
    /// Check the F-semilattice axioms of an algebra file.
    Validate(AlgebraArg),
    /// Emit the Hasse diagram as DOT.
    Hasse {
        #[command(flatten)]
        algebra: AlgebraArg,
        /// DOT output path (defaults to `--out` or stdout).
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Draw each generator's action as dashed arcs.
        #[arg(long)]
        actions: bool,
    },
    /// Decide whether the algebra generates a minimal quasivariety.
    CheckMinimal(GeneratedArgs),
    /// Check the subgroup correspondence for a finite group.
    VerifyBijection(OrdersArg),
    /// Model-check a quasi-identity.
    Quasi {
        #[command(flatten)]
        algebra: AlgebraArg,
        /// Quasi-identity, e.g. "g0(x) = x -> x = x ^ y".
        #[arg(long)]
        qi: String,
    },
    /// Recover K and U from a minimal free algebra.
    Decompose {
        #[command(flatten)]
        gen: GeneratedArgs,
        /// Largest number of translates in the block-condition check.
        #[arg(long, default_value_t = DEFAULT_BLOCK_BOUND)]
        bound: usize,
    },
    /// Enumerate congruences and check every proper quotient.
    Simplicity {
        #[command(flatten)]
        gen: GeneratedArgs,
        /// Largest carrier for congruence enumeration.
        #[arg(long, default_value_t = DEFAULT_CONGRUENCE_LIMIT)]
        limit: usize,
    },
    /// Separate B_alpha from B_beta by an identity.
    Balpha {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
        /// Number of window elements evaluated in each algebra.
        #[arg(long, default_value_t = 25)]
        samples: usize,
        /// Sample window: m, n in [-W, W].
        #[arg(long, default_value_t = 8)]
        window: i64,
    },
}

#[derive(Debug, Subcommand)]
enum GroupCommand {
    /// List all subgroups.
    Subgroups(OrdersArg),
}

#[derive(Debug, Subcommand)]
enum BuildCommand {
    /// Cosets of a subgroup plus a zero.
    Maroti(GroupAndSubgroup),
    /// Twisted multiple of an inner algebra over a subgroup.
    Twisted {
        #[command(flatten)]
        base: GroupAndSubgroup,
        /// Inner algebra JSON over the subgroup's abstract group (default: one element).
        #[arg(long)]
        inner: Option<PathBuf>,
        /// Coset representatives, semicolon separated (default: normalized).
        #[arg(long)]
        transversal: Option<String>,
    },
    /// k atoms over the infinite cyclic group.
    Ak {
        #[arg(long)]
        k: usize,
    },
    /// The chain 0 < 1 with trivial action.
    TwoElement(OrdersArg),
}

#[derive(Debug, Args)]
struct OrdersArg {
    /// Cyclic factor orders, comma separated (0 = infinite).
    #[arg(long, value_delimiter = ',', required = true)]
    orders: Vec<u64>,
}

#[derive(Debug, Args)]
struct GroupAndSubgroup {
    #[command(flatten)]
    orders: OrdersArg,
    /// Subgroup generators, e.g. "1,0;0,2" (empty for the trivial subgroup).
    #[arg(long, default_value = "")]
    subgroup: String,
}

#[derive(Debug, Args)]
struct AlgebraArg {
    /// Algebra JSON file.
    #[arg(long)]
    algebra: PathBuf,
}

#[derive(Debug, Args)]
struct GeneratedArgs {
    #[command(flatten)]
    algebra: AlgebraArg,
    /// Label of the generator (default: first generating element).
    #[arg(long)]
    generator: Option<String>,
}

/// Runs the tool on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    return 0;
                }
                _ => 2,
            };
            let _ = write!(stderr, "{e}");
            return code;
        }
    };
    if cli.meta {
        let command: Vec<String> = args
            .iter()
            .map(|a| a.to_string_lossy().into_owned())
            .collect();
        let ts = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let meta =
            json!({"version": env!("CARGO_PKG_VERSION"), "command": command, "timestamp": ts});
        let _ = writeln!(stderr, "{meta}");
    }
    match execute(&cli) {
        Ok(out) => {
            if let Err(e) = emit(
                &out.payload,
                out.path.as_deref().or(cli.out.as_deref()),
                stdout,
            ) {
                let _ = writeln!(stderr, "error: {e:#}");
                return 2;
            }
            if out.ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            2
        }
    }
}

struct Output {
    payload: String,
    /// Overrides `--out` (used by `hasse --dot`).
    path: Option<PathBuf>,
    ok: bool,
}

impl Output {
    fn json<T: Serialize>(value: &T, ok: bool) -> Result<Output> {
        Ok(Output {
            payload: serde_json::to_string_pretty(value)?,
            path: None,
            ok,
        })
    }
}

fn emit(payload: &str, path: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => {
            fs::write(p, format!("{payload}\n")).with_context(|| format!("writing {}", p.display()))
        }
        None => writeln!(stdout, "{payload}").context("writing to stdout"),
    }
}

fn group(orders: &OrdersArg) -> Result<GroupSpec> {
    Ok(GroupSpec::new(orders.orders.clone())?)
}

fn parse_elements(group: &GroupSpec, text: &str) -> Result<Vec<GroupElement>> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let coords = s
                .split(',')
                .map(|c| {
                    c.trim()
                        .parse::<i64>()
                        .with_context(|| format!("bad coordinate in {s:?}"))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(group.element(coords)?)
        })
        .collect()
}

fn subgroup(g: &GroupSpec, text: &str) -> Result<Subgroup> {
    Ok(Subgroup::generated_by(g, &parse_elements(g, text)?)?)
}

fn read_tables(path: &Path) -> Result<AlgebraTables> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing algebra JSON in {}", path.display()))
}

fn read_algebra(path: &Path) -> Result<FSemilattice> {
    FSemilattice::new(read_tables(path)?).with_context(|| format!("loading {}", path.display()))
}

fn generator(a: &FSemilattice, label: Option<&str>) -> Result<usize> {
    match label {
        Some(l) => Ok(a.index_of(l)?),
        None => (0..a.size())
            .find(|&x| a.generates(x))
            .ok_or_else(|| anyhow!("no single element generates the algebra")),
    }
}

fn algebra_output(a: &FSemilattice) -> Result<Output> {
    Ok(Output {
        payload: serde_json::to_string(a)?,
        path: None,
        ok: true,
    })
}

fn execute(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Group(GroupCommand::Subgroups(orders)) => {
            let g = group(orders)?;
            let list: Vec<Value> = g
                .subgroups()?
                .iter()
                .map(|h| json!({"order": h.order(), "generators": h.generators(), "elements": h.elements()}))
                .collect();
            Output::json(&list, true)
        }
        Command::Build(b) => algebra_output(&build(b)?),
        Command::Validate(arg) => {
            let tables = read_tables(&arg.algebra)?;
            match validate_axioms(&tables)? {
                Validation::Valid => Output::json(&json!({"valid": true}), true),
                Validation::Invalid(v) => Output::json(
                    &json!({
                        "valid": false,
                        "axiom": v.axiom.to_string(),
                        "detail": v.detail,
                        "generator": v.generator,
                        "witness": v.witness,
                    }),
                    false,
                ),
            }
        }
        Command::Hasse {
            algebra,
            dot,
            actions,
        } => {
            let a = read_algebra(&algebra.algebra)?;
            Ok(Output {
                payload: dot::hasse(&a, *actions),
                path: dot.clone(),
                ok: true,
            })
        }
        Command::CheckMinimal(args) => {
            let a = read_algebra(&args.algebra.algebra)?;
            let gen = generator(&a, args.generator.as_deref())?;
            match is_minimal_free(&a, gen)? {
                Minimality::Minimal => Output::json(
                    &json!({"generator": a.label(gen), "size": a.size(), "minimal": true}),
                    true,
                ),
                Minimality::NotMinimal { witness, verdict } => {
                    let sub = a.subalgebra_generated(witness)?;
                    Output::json(
                        &json!({
                            "generator": a.label(gen),
                            "size": a.size(),
                            "minimal": false,
                            "witness": a.label(witness),
                            "witness_subalgebra": sub.embedding.iter().map(|&x| a.label(x)).collect::<Vec<_>>(),
                            "reason": format!("{verdict:?}"),
                        }),
                        false,
                    )
                }
            }
        }
        Command::VerifyBijection(orders) => {
            let report = verify_bijection(&group(orders)?)?;
            let ok = report.ok;
            Output::json(&report, ok)
        }
        Command::Quasi { algebra, qi } => {
            let a = read_algebra(&algebra.algebra)?;
            let qi = QuasiIdentity::parse(qi, a.group())?;
            let check = holds_quasi_identity(&a, &qi)?;
            let (ok, verdict, witness) = match &check {
                ModelCheck::Holds => (true, "holds".to_string(), Value::Null),
                ModelCheck::Fails { valuation } => {
                    let named: Vec<String> = valuation
                        .iter()
                        .enumerate()
                        .map(|(v, &x)| format!("{}={}", VARIABLES[v], a.label(x)))
                        .collect();
                    let map: serde_json::Map<String, Value> = valuation
                        .iter()
                        .enumerate()
                        .map(|(v, &x)| (VARIABLES[v].to_string(), Value::from(a.label(x))))
                        .collect();
                    (
                        false,
                        format!("fails, witness {}", named.join(",")),
                        Value::Object(map),
                    )
                }
            };
            Output::json(
                &json!({"quasi_identity": qi.to_string(), "holds": ok, "verdict": verdict, "witness": witness}),
                ok,
            )
        }
        Command::Decompose { gen, bound } => {
            let a = read_algebra(&gen.algebra.algebra)?;
            let g = generator(&a, gen.generator.as_deref())?;
            let d = decompose_ku(&a, g, *bound)?;
            Output::json(
                &json!({
                    "generator": a.label(g),
                    "acting_group": d.acting_group,
                    "k": {"elements": d.k.elements(), "generators": d.k.generators()},
                    "u": d.u,
                    "u_elements": d.u_embedding.iter().map(|&x| a.label(x)).collect::<Vec<_>>(),
                    "twisted_multiple": d.twisted,
                    "isomorphism": d.isomorphism,
                    "block_checks": d.block_checks,
                    "block_bound": d.block_bound,
                }),
                true,
            )
        }
        Command::Simplicity { gen, limit } => {
            let a = read_algebra(&gen.algebra.algebra)?;
            let g = generator(&a, gen.generator.as_deref())?;
            let report = simplicity_report(&a, g, *limit)?;
            let ok = report.ok;
            let mut value = serde_json::to_value(&report)?;
            value["verdict"] = Value::from(if report.simple {
                "simple"
            } else {
                "not simple"
            });
            Output::json(&value, ok)
        }
        Command::Balpha {
            alpha,
            beta,
            samples,
            window,
        } => {
            let alpha: QuadraticIrrational = alpha.parse()?;
            let beta: QuadraticIrrational = beta.parse()?;
            let (p, q) = rational_between(&alpha, &beta)?;
            let report = check_separating_identity(&alpha, &beta, p, q, *samples, *window)?;
            let ok = report.in_alpha.holds && !report.in_beta.holds;
            Output::json(
                &json!({"rational": format!("{p}/{q}"), "report": report}),
                ok,
            )
        }
    }
}

fn build(b: &BuildCommand) -> Result<FSemilattice> {
    Ok(match b {
        BuildCommand::Maroti(gs) => {
            let g = group(&gs.orders)?;
            maroti(&g, &subgroup(&g, &gs.subgroup)?)?
        }
        BuildCommand::Twisted {
            base,
            inner,
            transversal,
        } => {
            let g = group(&base.orders)?;
            let k = subgroup(&g, &base.subgroup)?;
            let inner = match inner {
                Some(path) => read_algebra(path)?,
                None => {
                    let factors = k.invariant_factors();
                    one_element(&GroupSpec::new(if factors.is_empty() {
                        vec![1]
                    } else {
                        factors
                    })?)
                }
            };
            let spec = TwistedSpec::new(&k, inner)?;
            match transversal {
                None => twisted_multiple(&spec)?,
                Some(text) => {
                    let t = Transversal::new(&k, parse_elements(&g, text)?)?;
                    // the result does not depend on the transversal; check it anyway
                    transversal_independence_check(&spec, &t)?;
                    twisted_multiple(&spec.with_transversal(t)?)?
                }
            }
        }
        BuildCommand::Ak { k } => a_k(*k)?,
        BuildCommand::TwoElement(orders) => two_element(&group(orders)?),
    })
}
