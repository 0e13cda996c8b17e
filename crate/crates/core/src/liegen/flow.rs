//! Closed-form one-parameter flows and the maps they induce on jets and on
//! the derivative coordinates of `Pi`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::jetspace::{Dependent, Element, Independent, JetRegistry};
use crate::symcore::{Atom, Expr, Monomial, Rational};

/// Group parameter: its value and the `exp` atoms whose product is `e^a`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupParam {
    value: Expr,
    exp_names: Vec<String>,
    label: String,
}

impl GroupParam {
    pub fn symbol(name: &str) -> Self {
        GroupParam {
            value: Expr::atom(Atom::symbol(name)),
            exp_names: vec![name.to_string()],
            label: name.to_string(),
        }
    }

    /// A numeric parameter; `e^r` stays symbolic as `exp(r)`.
    pub fn rational(r: Rational) -> Self {
        let label = r.to_string();
        let exp_names = if r.is_zero() { Vec::new() } else { vec![label.clone()] };
        GroupParam { value: Expr::constant(r), exp_names, label }
    }

    /// The parameter `a + b`, with `e^(a+b) = e^a e^b`.
    pub fn sum(a: &GroupParam, b: &GroupParam) -> Self {
        GroupParam {
            value: &a.value + &b.value,
            exp_names: a.exp_names.iter().chain(&b.exp_names).cloned().collect(),
            label: format!("{} + {}", a.label, b.label),
        }
    }

    pub fn value(&self) -> &Expr {
        &self.value
    }

    /// `e^(k a)`.
    pub fn exp(&self, k: i32) -> Expr {
        let mut m = Monomial::one();
        for n in &self.exp_names {
            m = m.mul(&Monomial::power(Atom::exp(n), k).expect("exp atom"));
        }
        Expr::term(Rational::one(), m)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Atom bindings placing a symbolic parameter at the number `a`.
    pub fn numeric_bindings(&self, a: f64) -> Vec<(Atom, f64)> {
        let mut v = Vec::new();
        for n in &self.exp_names {
            v.push((Atom::symbol(n), a));
            v.push((Atom::exp(n), a.exp()));
        }
        v
    }
}

impl fmt::Display for GroupParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)
    }
}

/// Closed-form flow of a catalog generator.
#[derive(Clone, Debug, PartialEq)]
pub enum FlowRecipe {
    /// `c -> c + a`.
    Translate(Atom),
    /// `x_i -> x_i + a t`, `u_i -> u_i + a` (1-based axis).
    Galilean(usize),
    /// `c -> e^(w a) c` for each weighted coordinate or element.
    Scale(Vec<(Atom, i32)>),
    /// `Pi_kk -> Pi_kk + a`, `G -> G - a H`.
    StressShift,
}

/// Finite transformation of the point coordinates and the elements; jets
/// and derivative coordinates follow from [`FiniteTransformation::full_map`].
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteTransformation {
    pub name: String,
    pub param: GroupParam,
    dim: usize,
    maps: BTreeMap<Atom, Expr>,
}

pub fn exponentiate(name: &str, recipe: &FlowRecipe, a: &GroupParam, r: &JetRegistry) -> Result<FiniteTransformation> {
    let at = |x: Atom| Expr::atom(x);
    let mut maps = BTreeMap::new();
    match recipe {
        FlowRecipe::Translate(c) => {
            maps.insert(c.clone(), at(c.clone()) + a.value());
        }
        FlowRecipe::Galilean(i) => {
            maps.insert(r.x(*i), at(r.x(*i)) + a.value() * at(r.t()));
            maps.insert(r.u(*i), at(r.u(*i)) + a.value());
        }
        FlowRecipe::Scale(weights) => {
            for (c, w) in weights {
                maps.insert(c.clone(), a.exp(*w) * at(c.clone()));
            }
        }
        FlowRecipe::StressShift => {
            for k in 1..=r.dim() {
                maps.insert(r.pi(k, k), at(r.pi(k, k)) + a.value());
            }
            maps.insert(r.g(), at(r.g()) - a.value() * at(r.h()));
        }
    }
    Ok(FiniteTransformation { name: name.to_string(), param: a.clone(), dim: r.dim(), maps })
}

fn det(m: &[Vec<Expr>]) -> Expr {
    match m.len() {
        0 => Expr::one(),
        1 => m[0][0].clone(),
        n => {
            let mut acc = Expr::zero();
            for (j, pivot) in m[0].iter().enumerate() {
                if pivot.is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Expr>> = (1..n)
                    .map(|i| (0..n).filter(|&c| c != j).map(|c| m[i][c].clone()).collect())
                    .collect();
                let t = pivot * &det(&minor);
                if j % 2 == 0 {
                    acc += t;
                } else {
                    acc -= &t;
                }
            }
            acc
        }
    }
}

/// Inverse of a matrix whose determinant is a unit (a nonzero rational times
/// `exp` factors).
fn invert(m: &[Vec<Expr>]) -> Result<Vec<Vec<Expr>>> {
    let n = m.len();
    let d = det(m);
    if d.is_zero() {
        return Err(Error::SingularTransformation("independent-variable Jacobian vanishes".into()));
    }
    let inv_d = match d.leading_term() {
        Some((mono, c)) if d.len() == 1 && mono.factors().iter().all(|(a, _)| matches!(a, Atom::Exp(_))) => {
            let inv: Vec<(Atom, i32)> = mono.factors().iter().map(|(a, k)| (a.clone(), -k)).collect();
            let mut mm = Monomial::one();
            for (a, k) in inv {
                mm = mm.mul(&Monomial::power(a, k)?);
            }
            Expr::term(c.recip(), mm)
        }
        _ => return Err(Error::NoClosedForm("Jacobian determinant is not invertible in closed form".into())),
    };
    let mut out = vec![vec![Expr::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<Expr>> = (0..n)
                .filter(|&r| r != i)
                .map(|r| (0..n).filter(|&c| c != j).map(|c| m[r][c].clone()).collect())
                .collect();
            let cof = det(&minor);
            // adjugate is the transposed cofactor matrix
            out[j][i] = if (i + j) % 2 == 0 { &cof * &inv_d } else { -(&cof * &inv_d) };
        }
    }
    Ok(out)
}

impl FiniteTransformation {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Non-identity point and element maps.
    pub fn point_maps(&self) -> &BTreeMap<Atom, Expr> {
        &self.maps
    }

    pub fn point_map(&self, a: &Atom) -> Expr {
        self.maps.get(a).cloned().unwrap_or_else(|| Expr::atom(a.clone()))
    }

    /// Maps of every coordinate the balance laws use: point coordinates,
    /// first-order jets, spatial second-order velocity jets, `Pi`, its
    /// gradient derivatives, `G` and `H`.
    pub fn full_map(&self, r: &JetRegistry) -> Result<BTreeMap<Atom, Expr>> {
        let inds = r.independents();
        let n = inds.len();
        let mut jac = vec![vec![Expr::zero(); n]; n];
        for (wi, &w) in inds.iter().enumerate() {
            for (vi, &v) in inds.iter().enumerate() {
                let d = r.total_derivative(&self.point_map(&r.independent(v)), w)?;
                if d.atoms().iter().any(|a| !a.is_constant_symbol()) {
                    return Err(Error::NoClosedForm(format!(
                        "{} is not affine in the independents",
                        r.name(&r.independent(v))
                    )));
                }
                jac[wi][vi] = d;
            }
        }
        let inv = invert(&jac)?;

        let mut out = BTreeMap::new();
        for a in r.coords_of_order(0) {
            out.insert(a.clone(), self.point_map(&a));
        }
        let mut first: BTreeMap<(Dependent, Independent), Expr> = BTreeMap::new();
        for dep in r.dependents() {
            let image = self.point_map(&r.dependent(dep));
            let mut d = Vec::with_capacity(n);
            for &w in &inds {
                d.push(r.total_derivative(&image, w)?);
            }
            for (vi, &v) in inds.iter().enumerate() {
                let mut z = Expr::zero();
                for wi in 0..n {
                    if !inv[vi][wi].is_zero() {
                        z += &inv[vi][wi] * &d[wi];
                    }
                }
                out.insert(r.jet(dep, v), z.clone());
                first.insert((dep, v), z);
            }
        }
        for k in 1..=r.dim() {
            for l in 1..=r.dim() {
                for j in l..=r.dim() {
                    let base = &first[&(Dependent::U(k), Independent::X(l))];
                    let mut z = Expr::zero();
                    for (wi, &w) in inds.iter().enumerate() {
                        let c = &inv[j][wi];
                        if !c.is_zero() {
                            z += c * &r.total_derivative(base, w)?;
                        }
                    }
                    out.insert(r.u_xx(k, l, j), z);
                }
            }
        }

        for e in r.elements() {
            let a = r.element(e);
            out.insert(a.clone(), self.point_map(&a));
        }
        // Pi' by the chain rule; requires the velocity gradient to be invariant
        for k in 1..=r.dim() {
            for l in 1..=r.dim() {
                let g = r.grad_u(k, l);
                if out[&g] != Expr::atom(g.clone()) {
                    return Err(Error::NoClosedForm(format!(
                        "{} is not invariant; the induced map on Pi derivatives is not implemented",
                        r.name(&g)
                    )));
                }
            }
        }
        for (i, j) in r.pi_pairs() {
            let image = self.point_map(&r.element(Element::Pi(i, j)));
            for k in 1..=r.dim() {
                for l in 1..=r.dim() {
                    out.insert(r.pi_d(i, j, k, l), image.diff_partial(&r.grad_u(k, l))?);
                }
            }
        }
        Ok(out)
    }

    /// Point maps of `self` after `first`.
    pub fn compose_after(&self, first: &FiniteTransformation, r: &JetRegistry) -> Result<BTreeMap<Atom, Expr>> {
        let mut out = BTreeMap::new();
        for a in r.coords_of_order(0).into_iter().chain(r.elements().into_iter().map(|e| r.element(e))) {
            out.insert(a.clone(), self.point_map(&a).replace(&first.maps)?);
        }
        Ok(out)
    }

    /// Central difference in the parameter at zero of every mapped
    /// coordinate, evaluated at `point`. The transformation must have been
    /// built with a symbolic parameter.
    pub fn numeric_tangent(
        &self,
        r: &JetRegistry,
        point: &HashMap<Atom, f64>,
        h: f64,
    ) -> Result<BTreeMap<Atom, f64>> {
        let full = self.full_map(r)?;
        let at = |a: f64| {
            let mut pt = point.clone();
            pt.extend(self.param.numeric_bindings(a));
            pt
        };
        let (plus, minus) = (at(h), at(-h));
        let mut out = BTreeMap::new();
        for (atom, image) in &full {
            let d = (image.evaluate(&plus)? - image.evaluate(&minus)?) / (2.0 * h);
            out.insert(atom.clone(), d);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_unipotent_and_scaling() {
        let a = Expr::atom(Atom::symbol("a"));
        let m = vec![vec![Expr::one(), a.clone()], vec![Expr::zero(), Expr::one()]];
        let inv = invert(&m).unwrap();
        assert_eq!(inv[0][1], -a);
        let s = vec![vec![Expr::exp_power("a", 1)]];
        assert_eq!(invert(&s).unwrap()[0][0], Expr::exp_power("a", -1));
        let z = vec![vec![Expr::zero()]];
        assert!(matches!(invert(&z), Err(Error::SingularTransformation(_))));
    }

    fn catalog(n: usize) -> (JetRegistry, Vec<crate::catalog::CatalogEntry>) {
        let r = JetRegistry::new(n).unwrap();
        let c = crate::catalog::build_catalog(n, &r).unwrap();
        (r, c)
    }

    #[test]
    fn zero_parameter_is_identity() {
        let (r, c) = catalog(2);
        let zero = GroupParam::rational(Rational::zero());
        for e in c.iter().filter(|e| e.flow.is_some()) {
            let f = crate::catalog::exponentiate_entry(&c, &e.name, &zero, &r).unwrap();
            for (a, image) in f.full_map(&r).unwrap() {
                assert_eq!(image, Expr::atom(a.clone()), "{} moves {}", e.name, r.name(&a));
            }
        }
    }

    #[test]
    fn flows_compose_additively() {
        let (r, c) = catalog(2);
        let (a, b) = (GroupParam::symbol("a"), GroupParam::symbol("b"));
        let ab = GroupParam::sum(&a, &b);
        for e in c.iter().filter(|e| e.flow.is_some()) {
            let fa = crate::catalog::exponentiate_entry(&c, &e.name, &a, &r).unwrap();
            let fb = crate::catalog::exponentiate_entry(&c, &e.name, &b, &r).unwrap();
            let fab = crate::catalog::exponentiate_entry(&c, &e.name, &ab, &r).unwrap();
            let composed = fa.compose_after(&fb, &r).unwrap();
            for (atom, image) in composed {
                assert_eq!(image, fab.point_map(&atom), "{}", e.name);
            }
        }
    }

    #[test]
    fn galilean_jets() {
        let (r, c) = catalog(1);
        let f = crate::catalog::exponentiate_entry(&c, "Y1", &GroupParam::symbol("a"), &r).unwrap();
        let m = f.full_map(&r).unwrap();
        let a = Expr::atom(Atom::symbol("a"));
        let ux = Expr::atom(r.grad_u(1, 1));
        // u_t' = u_t - a u_x
        let ut = r.jet(Dependent::U(1), Independent::T);
        assert_eq!(m[&ut], Expr::atom(ut.clone()) - &a * &ux);
        assert_eq!(m[&r.grad_u(1, 1)], ux);
    }

    #[test]
    fn scaling_inverts_jacobian() {
        let (r, c) = catalog(1);
        let f = crate::catalog::exponentiate_entry(&c, "Z1", &GroupParam::symbol("a"), &r).unwrap();
        let m = f.full_map(&r).unwrap();
        let px = r.jet(Dependent::P, Independent::X(1));
        assert_eq!(m[&px], Expr::exp_power("a", 1) * Expr::atom(px.clone()));
        let rx = r.jet(Dependent::Rho, Independent::X(1));
        assert_eq!(m[&rx], Expr::exp_power("a", -1) * Expr::atom(rx.clone()));
    }
}
