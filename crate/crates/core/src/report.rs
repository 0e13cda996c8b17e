//! Serializable reports and their text rendering.
//!
//! Field order in every struct is the key order of the JSON output.

use std::fmt::Write as _;

use serde::Serialize;

use crate::catalog::{CatalogEntry, Provenance, StructureTable};
use crate::deteq::{AnsatzSolution, DeterminingSystem, FiniteOutcome, Verdict};
use crate::jetspace::JetRegistry;
use crate::liegen::{Ansatz, FiniteTransformation};
use crate::symcore::{Expr, Monomial};
use crate::system::BalanceSystem;

pub const TOOL: &str = "nonpolar";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Serialize)]
pub struct Assumptions {
    pub ansatz: Ansatz,
    pub pressure_equation: &'static str,
    pub parametric_atoms: &'static str,
    pub stress_derivatives: &'static str,
}

impl Assumptions {
    pub fn adopted() -> Self {
        Assumptions {
            ansatz: Ansatz::classical(),
            pressure_equation: "p_t + sum_i u_i p_xi + G div u + H Phi = 0, Phi = sum_ij Pi_ij u_i,xj",
            parametric_atoms: "non-principal jets of order 1 and 2, Pi, its derivatives, G, H",
            stress_derivatives: "Pi_ij,kl are independent coordinates; only Pi_ij = Pi_ji is imposed",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub dim: usize,
    pub assumptions: Assumptions,
    pub results: T,
    pub exit_code: i32,
}

impl<T: Serialize> Report<T> {
    pub fn new(command: &'static str, dim: usize, results: T, exit_code: i32) -> Self {
        Report { tool: TOOL, version: VERSION, command, dim, assumptions: Assumptions::adopted(), results, exit_code }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn header(command: &str, dim: usize) -> String {
    let a = Assumptions::adopted();
    format!(
        "{TOOL} {VERSION} {command} dim={dim}\nassumptions:\n  xi, eta depend on: {}\n  mu_Pi depends on: {}\n  mu_G, mu_H depend on: {}\n  pressure equation: {}\n  parametric atoms: {}\n  stress derivatives: {}\n",
        a.ansatz.xi_eta, a.ansatz.mu_pi, a.ansatz.mu_g_h, a.pressure_equation, a.parametric_atoms, a.stress_derivatives
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct TermOut {
    pub monomial: String,
    pub coefficient: String,
}

impl TermOut {
    fn new(r: &JetRegistry, m: &Monomial, c: &Expr) -> Self {
        TermOut { monomial: m.display(r).to_string(), coefficient: c.to_text(r) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EquationOut {
    pub source: String,
    pub status: &'static str,
    pub rho_power: u32,
    pub witness: Option<TermOut>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LambdaOut {
    pub equation: String,
    pub lambda: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FiniteOut {
    pub pass: bool,
    pub param: String,
    pub class_preserved: bool,
    pub lambdas: Vec<LambdaOut>,
}

impl FiniteOut {
    pub fn new(r: &JetRegistry, f: &FiniteOutcome) -> Self {
        FiniteOut {
            pass: f.pass,
            param: f.param.clone(),
            class_preserved: f.class_preserved,
            lambdas: f
                .lambdas
                .iter()
                .map(|(id, l)| LambdaOut { equation: id.to_string(), lambda: l.as_ref().map(|e| e.to_text(r)) })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerdictOut {
    pub name: String,
    pub generator: String,
    pub status: &'static str,
    pub equations: Vec<EquationOut>,
    pub finite: Option<FiniteOut>,
    pub agreement: Option<bool>,
}

fn zero_str(z: bool) -> &'static str {
    if z {
        "zero"
    } else {
        "nonzero"
    }
}

impl VerdictOut {
    pub fn new(r: &JetRegistry, generator: String, v: &Verdict) -> Self {
        VerdictOut {
            name: v.name.clone(),
            generator,
            status: zero_str(v.is_zero()),
            equations: v
                .statuses
                .iter()
                .map(|s| EquationOut {
                    source: s.source.to_string(),
                    status: zero_str(s.is_zero()),
                    rho_power: s.rho_power,
                    witness: s.witness.as_ref().map(|(m, c)| TermOut::new(r, m, c)),
                })
                .collect(),
            finite: v.finite.as_ref().map(|f| FiniteOut::new(r, f)),
            agreement: v.agreement(),
        }
    }

    /// Zero verdict, and the finite check (if any) agrees.
    pub fn passes(&self) -> bool {
        self.status == "zero" && self.agreement != Some(false)
    }
}

pub fn render_verify(dim: usize, verdicts: &[VerdictOut]) -> String {
    let mut s = header("verify", dim);
    for v in verdicts {
        let _ = write!(s, "{}: {}", v.name, v.status);
        if let Some(f) = &v.finite {
            let ls: Vec<String> = f
                .lambdas
                .iter()
                .map(|l| format!("{}={}", l.equation, l.lambda.as_deref().unwrap_or("none")))
                .collect();
            let _ = write!(
                s,
                "; finite {} ({}); agreement {}",
                if f.pass { "pass" } else { "fail" },
                ls.join(", "),
                if v.agreement == Some(true) { "yes" } else { "no" }
            );
        }
        s.push('\n');
        for e in &v.equations {
            if let Some(w) = &e.witness {
                let _ = writeln!(s, "  witness in {}: [{}] {}", e.source, w.monomial, w.coefficient);
            }
        }
    }
    let pass = verdicts.iter().filter(|v| v.passes()).count();
    let _ = writeln!(s, "summary: {pass} pass, {} fail", verdicts.len() - pass);
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockOut {
    pub source: String,
    pub rho_power: u32,
    pub equations: Vec<TermOut>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolutionOut {
    pub kind: &'static str,
    pub values: Vec<(String, String)>,
    pub free_directions: Vec<Vec<(String, String)>>,
}

impl SolutionOut {
    pub fn new(s: &AnsatzSolution) -> Self {
        let pairs = |m: &std::collections::BTreeMap<String, crate::symcore::Rational>| {
            m.iter().map(|(k, v)| (k.clone(), v.to_string())).collect::<Vec<_>>()
        };
        match s {
            AnsatzSolution::Unique(v) => SolutionOut { kind: "unique", values: pairs(v), free_directions: vec![] },
            AnsatzSolution::Family { particular, directions } => SolutionOut {
                kind: "family",
                values: pairs(particular),
                free_directions: directions.iter().map(pairs).collect(),
            },
            AnsatzSolution::Inconsistent => {
                SolutionOut { kind: "inconsistent", values: vec![], free_directions: vec![] }
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DeteqOut {
    pub name: String,
    pub generator: String,
    pub parametric: Vec<String>,
    pub blocks: Vec<BlockOut>,
    pub unknowns: Vec<String>,
    pub solution: Option<SolutionOut>,
}

impl DeteqOut {
    pub fn new(
        r: &JetRegistry,
        name: String,
        generator: String,
        ds: &DeterminingSystem,
        unknowns: Vec<String>,
        solution: Option<&AnsatzSolution>,
    ) -> Self {
        DeteqOut {
            name,
            generator,
            parametric: ds.parametric.iter().map(|a| r.name(a)).collect(),
            blocks: ds
                .blocks
                .iter()
                .map(|b| BlockOut {
                    source: b.source.to_string(),
                    rho_power: b.rho_power,
                    equations: b.entries.iter().map(|(m, c)| TermOut::new(r, m, c)).collect(),
                })
                .collect(),
            unknowns,
            solution: solution.map(SolutionOut::new),
        }
    }
}

pub fn render_deteq(dim: usize, items: &[DeteqOut]) -> String {
    let mut s = header("deteq", dim);
    for d in items {
        let _ = writeln!(s, "{}: {}", d.name, d.generator);
        for b in &d.blocks {
            let _ = writeln!(s, "  {} (rho^{}): {} equations", b.source, b.rho_power, b.equations.len());
            for t in &b.equations {
                let _ = writeln!(s, "    [{}] {} = 0", t.monomial, t.coefficient);
            }
        }
        if let Some(sol) = &d.solution {
            let vals: Vec<String> = sol.values.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let _ = writeln!(s, "  solution ({}): {}", sol.kind, vals.join(", "));
            for dir in &sol.free_directions {
                let vals: Vec<String> = dir.iter().map(|(k, v)| format!("{k}={v}")).collect();
                let _ = writeln!(s, "  free direction: {}", vals.join(", "));
            }
        }
    }
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct BracketOut {
    pub left: String,
    pub right: String,
    pub bracket: String,
    pub in_span: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableOut {
    pub names: Vec<String>,
    pub cells: Vec<Vec<String>>,
    pub closed: bool,
    pub antisymmetric: bool,
    pub outside_span: Vec<(String, String)>,
}

impl TableOut {
    pub fn new(t: &StructureTable, antisymmetric: bool) -> Self {
        TableOut {
            names: t.names.clone(),
            cells: t.names.iter().map(|a| t.names.iter().map(|b| t.render_cell(a, b)).collect()).collect(),
            closed: t.is_closed(),
            antisymmetric,
            outside_span: t.non_closure(),
        }
    }
}

pub fn render_bracket(dim: usize, items: &[BracketOut]) -> String {
    let mut s = header("bracket", dim);
    for b in items {
        let _ = writeln!(s, "[{}, {}] = {}", b.left, b.right, b.bracket);
        if let Some(c) = &b.in_span {
            let _ = writeln!(s, "  = {c}");
        }
    }
    s
}

pub fn render_table(dim: usize, t: &TableOut) -> String {
    let mut s = header("bracket", dim);
    let width = t.cells.iter().flatten().chain(&t.names).map(String::len).max().unwrap_or(1);
    let _ = write!(s, "{:width$}", "");
    for n in &t.names {
        let _ = write!(s, " | {n:width$}");
    }
    s.push('\n');
    for (n, row) in t.names.iter().zip(&t.cells) {
        let _ = write!(s, "{n:width$}");
        for c in row {
            let _ = write!(s, " | {c:width$}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "closed: {}, antisymmetric: {}", t.closed, t.antisymmetric);
    for (a, b) in &t.outside_span {
        let _ = writeln!(s, "outside span: [{a}, {b}]");
    }
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct MapOut {
    pub coordinate: String,
    pub image: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct PullbackOut {
    pub equation: String,
    pub pullback: String,
    pub lambda: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransformOut {
    pub name: String,
    pub param: String,
    pub maps: Vec<MapOut>,
    pub equations: Vec<PullbackOut>,
    pub class_preserved: bool,
    pub pass: bool,
}

impl TransformOut {
    pub fn new(
        r: &JetRegistry,
        f: &FiniteTransformation,
        maps: &std::collections::BTreeMap<crate::symcore::Atom, Expr>,
        pullbacks: Vec<(String, Expr)>,
        outcome: &FiniteOutcome,
    ) -> Self {
        TransformOut {
            name: f.name.clone(),
            param: f.param.label().to_string(),
            maps: maps
                .iter()
                .filter(|(a, e)| **e != Expr::atom((*a).clone()))
                .map(|(a, e)| MapOut { coordinate: r.name(a), image: e.to_text(r) })
                .collect(),
            equations: pullbacks
                .into_iter()
                .zip(&outcome.lambdas)
                .map(|((id, e), (_, l))| PullbackOut {
                    equation: id,
                    pullback: e.to_text(r),
                    lambda: l.as_ref().map(|x| x.to_text(r)),
                })
                .collect(),
            class_preserved: outcome.class_preserved,
            pass: outcome.pass,
        }
    }
}

pub fn render_transform(dim: usize, t: &TransformOut) -> String {
    let mut s = header("transform", dim);
    let _ = writeln!(s, "{} with parameter {}", t.name, t.param);
    for m in &t.maps {
        let _ = writeln!(s, "  {} -> {}", m.coordinate, m.image);
    }
    for e in &t.equations {
        let _ = writeln!(s, "{}: {} = 0", e.equation, e.pullback);
        let _ = writeln!(s, "  lambda = {}", e.lambda.as_deref().unwrap_or("none (not a multiple)"));
    }
    let _ = writeln!(s, "class preserved: {}\nresult: {}", t.class_preserved, if t.pass { "pass" } else { "fail" });
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct EntryOut {
    pub name: String,
    pub provenance: Provenance,
    pub closed_form_flow: bool,
    pub generator: String,
}

impl EntryOut {
    pub fn new(r: &JetRegistry, e: &CatalogEntry) -> Self {
        EntryOut {
            name: e.name.clone(),
            provenance: e.provenance,
            closed_form_flow: e.flow.is_some(),
            generator: e.generator.to_dsl(r),
        }
    }
}

pub fn render_list(dim: usize, entries: &[EntryOut]) -> String {
    let mut s = header("list", dim);
    for e in entries {
        let tag = match e.provenance {
            Provenance::Theorem => "theorem",
            Provenance::RotationCandidate => "rotation-candidate",
        };
        let _ = writeln!(s, "{} [{tag}]: {}", e.name, e.generator);
    }
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct SystemOut {
    pub equations: Vec<(String, String)>,
    pub dissipation: String,
    pub principal: Vec<PrincipalOut>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PrincipalOut {
    pub derivative: String,
    pub numerator: String,
    pub rho_power: u32,
}

impl SystemOut {
    pub fn new(s: &BalanceSystem) -> Self {
        let r = s.registry();
        SystemOut {
            equations: s.equations().iter().map(|(id, e)| (id.to_string(), e.to_text(r))).collect(),
            dissipation: s.dissipation().to_text(r),
            principal: s
                .solve_principal()
                .iter()
                .map(|(a, b)| PrincipalOut { derivative: r.name(a), numerator: b.numerator.to_text(r), rho_power: b.rho_power })
                .collect(),
        }
    }
}
