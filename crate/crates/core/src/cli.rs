//! Command-line front end.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 usage or input error.

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::catalog::{build_catalog, decompose, exponentiate_entry, structure_constants, CatalogEntry, Provenance};
use crate::deteq::{determining_equations, finite_check, solve_ansatz, verify, verify_batch, Verdict};
use crate::dsl::parse_generator;
use crate::error::{Error, Result};
use crate::jetspace::JetRegistry;
use crate::liegen::{bracket, GeneratorSpec, GroupParam};
use crate::report::{self, Report};
use crate::symcore::Rational;
use crate::system::BalanceSystem;

#[derive(Parser, Debug)]
#[command(name = "nonpolar", version, about = "Equivalence generators of the nonpolar continuum balance laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct Common {
    /// Number of spatial dimensions (1, 2 or 3).
    #[arg(long)]
    dim: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check invariance of the balance laws under generators.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Catalog name, `all-theorem`, `all`, `@file` or a generator in DSL syntax.
        #[arg(long, default_value = "all-theorem")]
        gen: String,
    },
    /// Print the split determining equations.
    Deteq {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        gen: String,
        /// Unknown constants of the generator, solved for when given.
        #[arg(long, value_delimiter = ',')]
        unknowns: Vec<String>,
    },
    /// Commutator of two generators, or the table of the theorem entries.
    Bracket {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        table: bool,
        #[arg(long)]
        gen: Vec<String>,
    },
    /// Pull the balance laws back through a finite transformation.
    Transform {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        gen: String,
        /// Group parameter: a rational number or a symbol name.
        #[arg(long, default_value = "a")]
        param: String,
    },
    /// Print the catalog.
    List {
        #[command(flatten)]
        common: Common,
    },
    /// Print the balance laws.
    #[command(name = "system-dump")]
    SystemDump {
        #[command(flatten)]
        common: Common,
    },
    /// Balance-law utilities.
    System {
        #[command(subcommand)]
        action: SystemAction,
    },
}

#[derive(Subcommand, Debug)]
enum SystemAction {
    /// Print the balance laws.
    Dump {
        #[command(flatten)]
        common: Common,
    },
}

/// Captured result of one invocation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

struct Context {
    dim: usize,
    registry: JetRegistry,
    system: BalanceSystem,
    catalog: Vec<CatalogEntry>,
}

impl Context {
    fn new(dim: usize) -> Result<Self> {
        let registry = JetRegistry::new(dim)?;
        let system = BalanceSystem::new(dim, &registry)?;
        let catalog = build_catalog(dim, &registry)?;
        Ok(Context { dim, registry, system, catalog })
    }
}

struct Selected {
    name: String,
    generator: GeneratorSpec,
    catalog: bool,
}

fn select(ctx: &Context, sel: &str, unknowns: &BTreeSet<String>) -> Result<Vec<Selected>> {
    let from_entry = |e: &CatalogEntry| Selected { name: e.name.clone(), generator: e.generator.clone(), catalog: true };
    match sel {
        "all-theorem" => Ok(ctx.catalog.iter().filter(|e| e.provenance == Provenance::Theorem).map(from_entry).collect()),
        "all" => Ok(ctx.catalog.iter().map(from_entry).collect()),
        _ => {
            if let Some(e) = ctx.catalog.iter().find(|e| e.name == sel) {
                return Ok(vec![from_entry(e)]);
            }
            let (name, src) = match sel.strip_prefix('@') {
                Some(path) => {
                    let src = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
                    (sel.to_string(), src)
                }
                None => (sel.trim().to_string(), sel.to_string()),
            };
            let generator = parse_generator(&src, &ctx.registry, unknowns)?;
            Ok(vec![Selected { name, generator, catalog: false }])
        }
    }
}

fn emit<T: Serialize>(common: &Common, report: Report<T>, text: impl FnOnce(&T) -> String) -> Result<Outcome> {
    let body = match common.format {
        Format::Json => report.to_json(),
        Format::Text => text(&report.results),
    };
    let code = report.exit_code;
    match &common.out {
        Some(path) => {
            std::fs::write(path, body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            Ok(Outcome { code, ..Default::default() })
        }
        None => Ok(Outcome { stdout: body, code, ..Default::default() }),
    }
}

fn run_verify(common: &Common, gen: &str) -> Result<Outcome> {
    let ctx = Context::new(common.dim)?;
    let selected = select(&ctx, gen, &BTreeSet::new())?;
    let entries: Vec<&CatalogEntry> = selected
        .iter()
        .filter(|s| s.catalog)
        .map(|s| ctx.catalog.iter().find(|e| e.name == s.name).expect("selected from catalog"))
        .collect();
    let mut verdicts: Vec<Verdict> = verify_batch(&ctx.system, &ctx.catalog, &entries)?;
    for s in selected.iter().filter(|s| !s.catalog) {
        verdicts.push(verify(&ctx.system, &s.name, &s.generator)?);
    }
    let out: Vec<report::VerdictOut> = verdicts
        .iter()
        .map(|v| {
            let g = selected.iter().find(|s| s.name == v.name).expect("verdict for a selection");
            report::VerdictOut::new(&ctx.registry, g.generator.to_dsl(&ctx.registry), v)
        })
        .collect();
    let code = if out.iter().all(report::VerdictOut::passes) { 0 } else { 1 };
    emit(common, Report::new("verify", ctx.dim, out, code), |v| report::render_verify(ctx.dim, v))
}

fn run_deteq(common: &Common, gen: &str, unknowns: &[String]) -> Result<Outcome> {
    let ctx = Context::new(common.dim)?;
    let names: BTreeSet<String> = unknowns.iter().cloned().collect();
    let selected = select(&ctx, gen, &names)?;
    let mut items = Vec::new();
    for s in &selected {
        let ds = determining_equations(&ctx.system, &s.generator)?;
        let solution = if unknowns.is_empty() {
            None
        } else {
            let refs: Vec<&str> = unknowns.iter().map(String::as_str).collect();
            Some(solve_ansatz(&ds, &refs)?)
        };
        items.push(report::DeteqOut::new(
            &ctx.registry,
            s.name.clone(),
            s.generator.to_dsl(&ctx.registry),
            &ds,
            unknowns.to_vec(),
            solution.as_ref(),
        ));
    }
    emit(common, Report::new("deteq", ctx.dim, items, 0), |d| report::render_deteq(ctx.dim, d))
}

fn run_bracket(common: &Common, table: bool, gens: &[String]) -> Result<Outcome> {
    let ctx = Context::new(common.dim)?;
    if table {
        if !gens.is_empty() {
            return Err(Error::UnsupportedForm("--table takes no --gen".into()));
        }
        let t = structure_constants(&ctx.catalog, &ctx.registry)?;
        let out = report::TableOut::new(&t, t.is_antisymmetric());
        let code = if out.closed && out.antisymmetric { 0 } else { 1 };
        return emit(common, Report::new("bracket", ctx.dim, out, code), |t| report::render_table(ctx.dim, t));
    }
    if gens.len() != 2 {
        return Err(Error::UnsupportedForm("bracket needs --table or exactly two --gen".into()));
    }
    let none = BTreeSet::new();
    let pick = |sel: &str| -> Result<Selected> {
        let mut v = select(&ctx, sel, &none)?;
        if v.len() != 1 {
            return Err(Error::UnsupportedForm(format!("`{sel}` selects {} generators", v.len())));
        }
        Ok(v.remove(0))
    };
    let (a, b) = (pick(&gens[0])?, pick(&gens[1])?);
    let br = bracket(&a.generator, &b.generator, &ctx.registry)?;
    let theorem: Vec<&CatalogEntry> = ctx.catalog.iter().filter(|e| e.provenance == Provenance::Theorem).collect();
    let basis: Vec<&GeneratorSpec> = theorem.iter().map(|e| &e.generator).collect();
    let names: Vec<String> = theorem.iter().map(|e| e.name.clone()).collect();
    let out = vec![report::BracketOut {
        left: a.name,
        right: b.name,
        bracket: br.to_dsl(&ctx.registry),
        in_span: decompose(&br, &basis).map(|c| c.render(&names)),
    }];
    emit(common, Report::new("bracket", ctx.dim, out, 0), |b| report::render_bracket(ctx.dim, b))
}

fn parse_param(s: &str) -> Result<GroupParam> {
    if let Ok(r) = s.parse::<Rational>() {
        return Ok(GroupParam::rational(r));
    }
    let ok = s.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ok {
        Ok(GroupParam::symbol(s))
    } else {
        Err(Error::UnsupportedForm(format!("parameter `{s}` is neither a rational nor a name")))
    }
}

fn run_transform(common: &Common, gen: &str, param: &str) -> Result<Outcome> {
    let ctx = Context::new(common.dim)?;
    let a = parse_param(param)?;
    let f = exponentiate_entry(&ctx.catalog, gen, &a, &ctx.registry)?;
    let maps = f.full_map(&ctx.registry)?;
    let outcome = finite_check(&ctx.system, &f)?;
    let mut pullbacks = Vec::new();
    for (id, e) in ctx.system.equations() {
        pullbacks.push((id.to_string(), e.replace(&maps)?));
    }
    let out = report::TransformOut::new(&ctx.registry, &f, &maps, pullbacks, &outcome);
    let code = if out.pass { 0 } else { 1 };
    emit(common, Report::new("transform", ctx.dim, out, code), |t| report::render_transform(ctx.dim, t))
}

fn run_list(common: &Common) -> Result<Outcome> {
    let ctx = Context::new(common.dim)?;
    let out: Vec<report::EntryOut> = ctx.catalog.iter().map(|e| report::EntryOut::new(&ctx.registry, e)).collect();
    emit(common, Report::new("list", ctx.dim, out, 0), |e| report::render_list(ctx.dim, e))
}

fn run_system_dump(common: &Common) -> Result<Outcome> {
    let ctx = Context::new(common.dim)?;
    let out = report::SystemOut::new(&ctx.system);
    let text = ctx.system.dump();
    emit(common, Report::new("system-dump", ctx.dim, out, 0), |_| text)
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { stderr: text, code: 2, ..Default::default() }
            } else {
                Outcome { stdout: text, code: 0, ..Default::default() }
            };
        }
    };
    let result = match &cli.command {
        Command::Verify { common, gen } => run_verify(common, gen),
        Command::Deteq { common, gen, unknowns } => run_deteq(common, gen, unknowns),
        Command::Bracket { common, table, gen } => run_bracket(common, *table, gen),
        Command::Transform { common, gen, param } => run_transform(common, gen, param),
        Command::List { common } => run_list(common),
        Command::SystemDump { common } | Command::System { action: SystemAction::Dump { common } } => {
            run_system_dump(common)
        }
    };
    result.unwrap_or_else(|e| Outcome { stderr: format!("error: {e}\n"), code: 2, ..Default::default() })
}
