//! Known equivalence generators: the translations, pressure shift, Galilean
//! boosts, stress shift and the two scalings, plus rotation candidates for
//! `N >= 2` (with and without a co-rotating stress).

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jetspace::JetRegistry;
use crate::liegen::{bracket, exponentiate, FiniteTransformation, FlowRecipe, GeneratorSpec, GroupParam};
use crate::linalg::{solve, Solution};
use crate::symcore::{Atom, Expr, Monomial, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Theorem,
    RotationCandidate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub generator: GeneratorSpec,
    pub flow: Option<FlowRecipe>,
    pub provenance: Provenance,
}

fn entry(
    r: &JetRegistry,
    name: String,
    terms: Vec<(Atom, Expr)>,
    flow: Option<FlowRecipe>,
    provenance: Provenance,
) -> Result<CatalogEntry> {
    Ok(CatalogEntry { name, generator: GeneratorSpec::new(r, terms)?, flow, provenance })
}

pub fn build_catalog(dim: usize, r: &JetRegistry) -> Result<Vec<CatalogEntry>> {
    if !(1..=3).contains(&dim) {
        return Err(Error::UnsupportedDimension(dim));
    }
    if r.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: r.dim() });
    }
    use Provenance::*;
    let at = |a: Atom| Expr::atom(a);
    let n = dim;
    let mut out = Vec::new();

    out.push(entry(r, "X0".into(), vec![(r.t(), Expr::one())], Some(FlowRecipe::Translate(r.t())), Theorem)?);
    for i in 1..=n {
        let f = Some(FlowRecipe::Translate(r.x(i)));
        out.push(entry(r, format!("X{i}"), vec![(r.x(i), Expr::one())], f, Theorem)?);
    }
    out.push(entry(r, "S".into(), vec![(r.p(), Expr::one())], Some(FlowRecipe::Translate(r.p())), Theorem)?);
    for i in 1..=n {
        let terms = vec![(r.x(i), at(r.t())), (r.u(i), Expr::one())];
        out.push(entry(r, format!("Y{i}"), terms, Some(FlowRecipe::Galilean(i)), Theorem)?);
    }
    let mut t_terms: Vec<(Atom, Expr)> = (1..=n).map(|k| (r.pi(k, k), Expr::one())).collect();
    t_terms.push((r.g(), -at(r.h())));
    out.push(entry(r, "T".into(), t_terms, Some(FlowRecipe::StressShift), Theorem)?);

    let mut z1 = Vec::new();
    let mut z1_weights = Vec::new();
    for i in 1..=n {
        z1.push((r.x(i), at(r.x(i))));
        z1_weights.push((r.x(i), 1));
    }
    for i in 1..=n {
        z1.push((r.u(i), at(r.u(i))));
        z1_weights.push((r.u(i), 1));
    }
    let mut z2 = vec![(r.rho(), at(r.rho())), (r.p(), at(r.p()))];
    let mut z2_weights = vec![(r.rho(), 1), (r.p(), 1)];
    z1.push((r.p(), at(r.p()).scale(&crate::symcore::int(2))));
    z1_weights.push((r.p(), 2));
    for (i, j) in r.pi_pairs() {
        z1.push((r.pi(i, j), at(r.pi(i, j)).scale(&crate::symcore::int(2))));
        z1_weights.push((r.pi(i, j), 2));
        z2.push((r.pi(i, j), at(r.pi(i, j))));
        z2_weights.push((r.pi(i, j), 1));
    }
    z1.push((r.g(), at(r.g()).scale(&crate::symcore::int(2))));
    z1_weights.push((r.g(), 2));
    z2.push((r.g(), at(r.g())));
    z2_weights.push((r.g(), 1));
    out.push(entry(r, "Z1".into(), z1, Some(FlowRecipe::Scale(z1_weights)), Theorem)?);
    out.push(entry(r, "Z2".into(), z2, Some(FlowRecipe::Scale(z2_weights)), Theorem)?);

    let pairs: Vec<(usize, usize)> = (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect();
    for &(i, j) in &pairs {
        out.push(entry(r, format!("J{i}{j}_naive"), rotation(r, i, j), None, RotationCandidate)?);
    }
    for &(i, j) in &pairs {
        let mut terms = rotation(r, i, j);
        terms.extend(co_rotation(r, i, j));
        out.push(entry(r, format!("J{i}{j}_tensorial"), terms, None, RotationCandidate)?);
    }
    Ok(out)
}

/// Rotation in the `(i, j)` plane acting on `x` and `u` only.
fn rotation(r: &JetRegistry, i: usize, j: usize) -> Vec<(Atom, Expr)> {
    let at = |a: Atom| Expr::atom(a);
    vec![
        (r.x(i), -at(r.x(j))),
        (r.x(j), at(r.x(i))),
        (r.u(i), -at(r.u(j))),
        (r.u(j), at(r.u(i))),
    ]
}

/// `delta Pi = Omega Pi - Pi Omega` for the rotation generator `Omega` with
/// `Omega_ij = -1`, `Omega_ji = 1`.
fn co_rotation(r: &JetRegistry, i: usize, j: usize) -> Vec<(Atom, Expr)> {
    let n = r.dim();
    let omega = |a: usize, b: usize| -> i64 {
        match (a, b) {
            _ if a == i && b == j => -1,
            _ if a == j && b == i => 1,
            _ => 0,
        }
    };
    let mut out = Vec::new();
    for (a, b) in r.pi_pairs() {
        let mut d = Expr::zero();
        for c in 1..=n {
            if omega(a, c) != 0 {
                d += Expr::atom(r.pi(c, b)).scale(&crate::symcore::int(omega(a, c)));
            }
            if omega(c, b) != 0 {
                d -= &Expr::atom(r.pi(a, c)).scale(&crate::symcore::int(omega(c, b)));
            }
        }
        if !d.is_zero() {
            out.push((r.pi(a, b), d));
        }
    }
    out
}

pub fn find<'a>(entries: &'a [CatalogEntry], name: &str) -> Result<&'a CatalogEntry> {
    entries.iter().find(|e| e.name == name).ok_or_else(|| Error::UnknownEntry(name.to_string()))
}

/// Finite transformation of a catalog entry.
pub fn exponentiate_entry(entries: &[CatalogEntry], name: &str, a: &GroupParam, r: &JetRegistry) -> Result<FiniteTransformation> {
    let e = find(entries, name)?;
    let recipe = e.flow.as_ref().ok_or_else(|| Error::NoClosedForm(format!("{name} has no closed-form flow")))?;
    exponentiate(name, recipe, a, r)
}

/// Rational combination of basis generators, by index.
#[derive(Clone, Debug, PartialEq)]
pub struct Combination(pub Vec<(usize, Rational)>);

impl Combination {
    pub fn render(&self, names: &[String]) -> String {
        if self.0.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, (idx, c)) in self.0.iter().enumerate() {
            let neg = c < &Rational::zero();
            let abs = if neg { -c.clone() } else { c.clone() };
            match (k, neg) {
                (0, true) => s.push('-'),
                (0, false) => {}
                (_, true) => s.push_str(" - "),
                (_, false) => s.push_str(" + "),
            }
            if abs != Rational::from_integer(1.into()) {
                s.push_str(&format!("{abs}*"));
            }
            s.push_str(&names[*idx]);
        }
        s
    }
}

/// Brackets of every ordered pair, expressed in the basis. A `None` cell
/// means the bracket left the span.
#[derive(Clone, Debug)]
pub struct StructureTable {
    pub names: Vec<String>,
    pub cells: Vec<Vec<Option<Combination>>>,
}

impl StructureTable {
    pub fn is_closed(&self) -> bool {
        self.cells.iter().flatten().all(Option::is_some)
    }

    pub fn cell(&self, a: &str, b: &str) -> Option<&Combination> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        self.cells[i][j].as_ref()
    }

    pub fn render_cell(&self, a: &str, b: &str) -> String {
        self.cell(a, b).map(|c| c.render(&self.names)).unwrap_or_else(|| "<outside span>".into())
    }

    /// `[a, b] = -[b, a]` for every pair inside the span.
    pub fn is_antisymmetric(&self) -> bool {
        let n = self.names.len();
        (0..n).all(|i| {
            (0..n).all(|j| match (&self.cells[i][j], &self.cells[j][i]) {
                (Some(a), Some(b)) => {
                    a.0.len() == b.0.len() && a.0.iter().zip(&b.0).all(|((ia, ca), (ib, cb))| ia == ib && *ca == -cb.clone())
                }
                (None, None) => true,
                _ => false,
            })
        })
    }

    pub fn non_closure(&self) -> Vec<(String, String)> {
        let mut v = Vec::new();
        for (i, row) in self.cells.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if c.is_none() {
                    v.push((self.names[i].clone(), self.names[j].clone()));
                }
            }
        }
        v
    }
}

/// Flattens a generator into (target, monomial) -> coefficient.
fn coordinates(g: &GeneratorSpec) -> BTreeMap<(Atom, Monomial), Rational> {
    let mut v = BTreeMap::new();
    for (t, e) in g.coefficients() {
        for (m, c) in e.terms() {
            v.insert((t.clone(), m.clone()), c.clone());
        }
    }
    v
}

/// Expresses `g` in the basis, if it lies in the span.
pub fn decompose(g: &GeneratorSpec, basis: &[&GeneratorSpec]) -> Option<Combination> {
    let cols: Vec<BTreeMap<(Atom, Monomial), Rational>> = basis.iter().map(|b| coordinates(b)).collect();
    let target = coordinates(g);
    let mut keys: Vec<&(Atom, Monomial)> = cols.iter().flat_map(|c| c.keys()).chain(target.keys()).collect();
    keys.sort();
    keys.dedup();
    let rows: Vec<Vec<Rational>> = keys
        .iter()
        .map(|k| cols.iter().map(|c| c.get(*k).cloned().unwrap_or_else(Rational::zero)).collect())
        .collect();
    let rhs: Vec<Rational> = keys.iter().map(|k| target.get(*k).cloned().unwrap_or_else(Rational::zero)).collect();
    match solve(&rows, &rhs, basis.len()) {
        Solution::Unique(x) | Solution::Family { particular: x, .. } => Some(Combination(
            x.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect(),
        )),
        Solution::Inconsistent => None,
    }
}

/// Bracket table of the theorem entries.
pub fn structure_constants(entries: &[CatalogEntry], r: &JetRegistry) -> Result<StructureTable> {
    let basis: Vec<&CatalogEntry> = entries.iter().filter(|e| e.provenance == Provenance::Theorem).collect();
    let gens: Vec<&GeneratorSpec> = basis.iter().map(|e| &e.generator).collect();
    let mut cells = Vec::with_capacity(basis.len());
    for a in &basis {
        let mut row = Vec::with_capacity(basis.len());
        for b in &basis {
            let br = bracket(&a.generator, &b.generator, r)?;
            row.push(decompose(&br, &gens));
        }
        cells.push(row);
    }
    Ok(StructureTable { names: basis.iter().map(|e| e.name.clone()).collect(), cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entry_counts() {
        for (n, theorem, rot) in [(1, 7, 0), (2, 9, 2), (3, 11, 6)] {
            let r = JetRegistry::new(n).unwrap();
            let c = build_catalog(n, &r).unwrap();
            assert_eq!(c.iter().filter(|e| e.provenance == Provenance::Theorem).count(), theorem);
            assert_eq!(c.iter().filter(|e| e.provenance == Provenance::RotationCandidate).count(), rot);
        }
    }

    #[test]
    fn z2_coefficients() {
        let r = JetRegistry::new(2).unwrap();
        let c = build_catalog(2, &r).unwrap();
        let z2 = &find(&c, "Z2").unwrap().generator;
        assert_eq!(z2.coefficient(&r.rho()), Expr::atom(r.rho()));
        assert_eq!(z2.coefficient(&r.p()), Expr::atom(r.p()));
        for (i, j) in r.pi_pairs() {
            assert_eq!(z2.coefficient(&r.pi(i, j)), Expr::atom(r.pi(i, j)));
        }
        assert_eq!(z2.coefficient(&r.g()), Expr::atom(r.g()));
        assert!(z2.coefficient(&r.h()).is_zero());
    }

    #[test]
    fn tensorial_rotation_conjugates_stress() {
        let r = JetRegistry::new(2).unwrap();
        let c = build_catalog(2, &r).unwrap();
        let j = &find(&c, "J12_tensorial").unwrap().generator;
        // Omega = [[0,-1],[1,0]]: dPi11 = -2 Pi12, dPi22 = 2 Pi12, dPi12 = Pi11 - Pi22
        let at = |a: Atom| Expr::atom(a);
        assert_eq!(j.coefficient(&r.pi(1, 1)), at(r.pi(1, 2)).scale(&crate::symcore::int(-2)));
        assert_eq!(j.coefficient(&r.pi(2, 2)), at(r.pi(1, 2)).scale(&crate::symcore::int(2)));
        assert_eq!(j.coefficient(&r.pi(1, 2)), at(r.pi(1, 1)) - at(r.pi(2, 2)));
    }

    #[test]
    fn rotations_have_no_flow() {
        let r = JetRegistry::new(2).unwrap();
        let c = build_catalog(2, &r).unwrap();
        let err = exponentiate_entry(&c, "J12_naive", &GroupParam::symbol("a"), &r).unwrap_err();
        assert!(matches!(err, Error::NoClosedForm(_)));
        assert!(matches!(exponentiate_entry(&c, "Q", &GroupParam::symbol("a"), &r), Err(Error::UnknownEntry(_))));
    }
}
