//! Python bindings. Each `Session` owns the jet registry, balance system and
//! catalog for one spatial dimension; results come back as small frozen
//! classes or as the same JSON reports the command line prints.

use std::collections::{BTreeMap, BTreeSet};

use nonpolar::catalog::{build_catalog, decompose, structure_constants, CatalogEntry, Provenance};
use nonpolar::deteq::{determining_equations, solve_ansatz, verify, verify_batch, Verdict as CoreVerdict};
use nonpolar::dsl::parse_generator;
use nonpolar::jetspace::JetRegistry;
use nonpolar::liegen::{bracket, GeneratorSpec};
use nonpolar::report::{self, Report};
use nonpolar::system::BalanceSystem;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: nonpolar::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A catalog entry: name, canonical generator text, provenance.
#[pyclass(frozen, get_all, skip_from_py_object, module = "nonpolar_py")]
#[derive(Clone)]
pub struct Entry {
    name: String,
    generator: String,
    provenance: String,
    closed_form_flow: bool,
}

#[pymethods]
impl Entry {
    fn __repr__(&self) -> String {
        format!("Entry({:?}, {:?})", self.name, self.generator)
    }
}

/// Outcome of checking one generator against the system.
#[pyclass(frozen, module = "nonpolar_py")]
pub struct Verdict {
    out: report::VerdictOut,
}

#[pymethods]
impl Verdict {
    #[getter]
    fn name(&self) -> &str {
        &self.out.name
    }

    #[getter]
    fn generator(&self) -> &str {
        &self.out.generator
    }

    /// "zero" or "nonzero".
    #[getter]
    fn status(&self) -> &str {
        self.out.status
    }

    #[getter]
    fn passes(&self) -> bool {
        self.out.passes()
    }

    /// None when no closed-form flow was available.
    #[getter]
    fn agreement(&self) -> Option<bool> {
        self.out.agreement
    }

    /// First nonzero term as (source, monomial, coefficient).
    #[getter]
    fn witness(&self) -> Option<(String, String, String)> {
        self.out.equations.iter().find_map(|e| {
            e.witness.as_ref().map(|w| (e.source.clone(), w.monomial.clone(), w.coefficient.clone()))
        })
    }

    /// Per equation (source, status).
    #[getter]
    fn equations(&self) -> Vec<(String, String)> {
        self.out.equations.iter().map(|e| (e.source.clone(), e.status.to_string())).collect()
    }

    fn __repr__(&self) -> String {
        format!("Verdict({:?}, {})", self.out.name, self.out.status)
    }
}

/// Determining equations for one generator, optionally solved for unknowns.
#[pyclass(frozen, module = "nonpolar_py")]
pub struct DeterminingSystem {
    out: report::DeteqOut,
}

#[pymethods]
impl DeterminingSystem {
    #[getter]
    fn generator(&self) -> &str {
        &self.out.generator
    }

    /// Each equation as (source, monomial, coefficient); the coefficient must vanish.
    #[getter]
    fn equations(&self) -> Vec<(String, String, String)> {
        self.out
            .blocks
            .iter()
            .flat_map(|b| b.equations.iter().map(|t| (b.source.clone(), t.monomial.clone(), t.coefficient.clone())))
            .collect()
    }

    #[getter]
    fn parametric(&self) -> Vec<String> {
        self.out.parametric.clone()
    }

    /// "unique", "family", "inconsistent", or None without unknowns.
    #[getter]
    fn solution_kind(&self) -> Option<&str> {
        self.out.solution.as_ref().map(|s| s.kind)
    }

    /// Unknown name to rational text; the particular solution for a family.
    #[getter]
    fn solution(&self) -> Option<BTreeMap<String, String>> {
        self.out.solution.as_ref().map(|s| s.values.iter().cloned().collect())
    }

    fn is_zero(&self) -> bool {
        self.out.blocks.iter().all(|b| b.equations.is_empty())
    }
}

/// Registry, balance laws and catalog for one spatial dimension.
#[pyclass(frozen, module = "nonpolar_py")]
pub struct Session {
    dim: usize,
    registry: JetRegistry,
    system: BalanceSystem,
    catalog: Vec<CatalogEntry>,
}

impl Session {
    fn generator(&self, sel: &str, unknowns: &BTreeSet<String>) -> PyResult<(String, GeneratorSpec)> {
        match self.catalog.iter().find(|e| e.name == sel) {
            Some(e) => Ok((e.name.clone(), e.generator.clone())),
            None => {
                let g = parse_generator(sel, &self.registry, unknowns).map_err(err)?;
                Ok((sel.trim().to_string(), g))
            }
        }
    }

    fn verdict(&self, v: &CoreVerdict, g: &GeneratorSpec) -> Verdict {
        Verdict { out: report::VerdictOut::new(&self.registry, g.to_dsl(&self.registry), v) }
    }
}

#[pymethods]
impl Session {
    #[new]
    fn new(dim: usize) -> PyResult<Self> {
        let registry = JetRegistry::new(dim).map_err(err)?;
        let system = BalanceSystem::new(dim, &registry).map_err(err)?;
        let catalog = build_catalog(dim, &registry).map_err(err)?;
        Ok(Session { dim, registry, system, catalog })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.dim
    }

    /// The balance laws as text.
    fn dump(&self) -> String {
        self.system.dump()
    }

    fn catalog(&self) -> Vec<Entry> {
        self.catalog
            .iter()
            .map(|e| {
                let out = report::EntryOut::new(&self.registry, e);
                Entry {
                    name: out.name,
                    generator: out.generator,
                    provenance: match out.provenance {
                        Provenance::Theorem => "theorem".into(),
                        Provenance::RotationCandidate => "rotation-candidate".into(),
                    },
                    closed_form_flow: out.closed_form_flow,
                }
            })
            .collect()
    }

    /// Canonical text of a generator written in the DSL.
    #[pyo3(signature = (text, unknowns = Vec::new()))]
    fn parse_generator(&self, text: &str, unknowns: Vec<String>) -> PyResult<String> {
        let names: BTreeSet<String> = unknowns.into_iter().collect();
        let g = parse_generator(text, &self.registry, &names).map_err(err)?;
        Ok(g.to_dsl(&self.registry))
    }

    /// Verify "all-theorem", "all", a catalog name, or DSL text.
    #[pyo3(signature = (selection = "all-theorem"))]
    fn verify(&self, py: Python<'_>, selection: &str) -> PyResult<Vec<Verdict>> {
        let picked: Vec<&CatalogEntry> = match selection {
            "all-theorem" => self.catalog.iter().filter(|e| e.provenance == Provenance::Theorem).collect(),
            "all" => self.catalog.iter().collect(),
            name => self.catalog.iter().filter(|e| e.name == name).collect(),
        };
        if !picked.is_empty() {
            let verdicts = py.detach(|| verify_batch(&self.system, &self.catalog, &picked)).map_err(err)?;
            return Ok(verdicts
                .iter()
                .map(|v| {
                    let e = picked.iter().find(|e| e.name == v.name).expect("verdict for a selection");
                    self.verdict(v, &e.generator)
                })
                .collect());
        }
        let (name, g) = self.generator(selection, &BTreeSet::new())?;
        let v = verify(&self.system, &name, &g).map_err(err)?;
        Ok(vec![self.verdict(&v, &g)])
    }

    /// Determining equations; with unknowns, also solve the linear ansatz.
    #[pyo3(signature = (generator, unknowns = Vec::new()))]
    fn deteq(&self, generator: &str, unknowns: Vec<String>) -> PyResult<DeterminingSystem> {
        let names: BTreeSet<String> = unknowns.iter().cloned().collect();
        let (name, g) = self.generator(generator, &names)?;
        let ds = determining_equations(&self.system, &g).map_err(err)?;
        let solution = if unknowns.is_empty() {
            None
        } else {
            let refs: Vec<&str> = unknowns.iter().map(String::as_str).collect();
            Some(solve_ansatz(&ds, &refs).map_err(err)?)
        };
        let out = report::DeteqOut::new(&self.registry, name, g.to_dsl(&self.registry), &ds, unknowns, solution.as_ref());
        Ok(DeterminingSystem { out })
    }

    /// Commutator text, and its decomposition over the theorem entries if any.
    fn bracket(&self, a: &str, b: &str) -> PyResult<(String, Option<String>)> {
        let none = BTreeSet::new();
        let (_, ga) = self.generator(a, &none)?;
        let (_, gb) = self.generator(b, &none)?;
        let br = bracket(&ga, &gb, &self.registry).map_err(err)?;
        let theorem: Vec<&CatalogEntry> = self.catalog.iter().filter(|e| e.provenance == Provenance::Theorem).collect();
        let basis: Vec<&GeneratorSpec> = theorem.iter().map(|e| &e.generator).collect();
        let names: Vec<String> = theorem.iter().map(|e| e.name.clone()).collect();
        Ok((br.to_dsl(&self.registry), decompose(&br, &basis).map(|c| c.render(&names))))
    }

    /// Theorem-entry names and the rendered bracket cells.
    fn structure_table(&self) -> PyResult<(Vec<String>, Vec<Vec<String>>)> {
        let t = structure_constants(&self.catalog, &self.registry).map_err(err)?;
        let out = report::TableOut::new(&t, t.is_antisymmetric());
        Ok((out.names, out.cells))
    }

    /// The JSON report `verify --format json` would print.
    #[pyo3(signature = (selection = "all-theorem"))]
    fn verify_report(&self, py: Python<'_>, selection: &str) -> PyResult<String> {
        let verdicts = self.verify(py, selection)?;
        let out: Vec<report::VerdictOut> = verdicts.into_iter().map(|v| v.out).collect();
        let code = if out.iter().all(report::VerdictOut::passes) { 0 } else { 1 };
        Ok(Report::new("verify", self.dim, out, code).to_json())
    }

    fn __repr__(&self) -> String {
        format!("Session(dim={})", self.dim)
    }
}

/// Run the command line in-process; returns (exit code, stdout, stderr).
#[pyfunction]
fn run(py: Python<'_>, args: Vec<String>) -> (i32, String, String) {
    let argv = std::iter::once("nonpolar".to_string()).chain(args);
    let o = py.detach(|| nonpolar::cli::run(argv));
    (o.code, o.stdout, o.stderr)
}

#[pymodule]
pub fn nonpolar_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", report::VERSION)?;
    m.add_class::<Session>()?;
    m.add_class::<Entry>()?;
    m.add_class::<Verdict>()?;
    m.add_class::<DeterminingSystem>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
