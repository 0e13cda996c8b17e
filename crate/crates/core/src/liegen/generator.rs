use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jetspace::{CoordKind, Element, JetRegistry};
use crate::symcore::{Atom, Expr, Rational};

/// Which arguments each generator coefficient may depend on.
///
/// Point coefficients (`xi`, `eta`) follow the classical ansatz. Element
/// coefficients mirror the elements' own signatures: `mu_Pi` may depend on
/// the velocity gradient and on `Pi`, `mu_G` and `mu_H` on `p, rho, G, H`.
/// Free symbols (unknown constants) are allowed everywhere.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Ansatz {
    pub xi_eta: &'static str,
    pub mu_pi: &'static str,
    pub mu_g_h: &'static str,
}

impl Ansatz {
    pub fn classical() -> Self {
        Ansatz {
            xi_eta: "t, x, u, p, rho",
            mu_pi: "u_k,x_l, Pi",
            mu_g_h: "p, rho, G, H",
        }
    }

    /// Whether a coefficient of `target` may contain `atom`.
    pub fn allows(&self, r: &JetRegistry, target: &Atom, atom: &Atom) -> bool {
        if let Atom::Symbol(_) = atom {
            return true;
        }
        match (r.coord_kind(target), r.element_of(target)) {
            (Some(k), _) if k.order() == 0 => r.coord_kind(atom).is_some_and(|a| a.order() == 0),
            (_, Some(Element::Pi(..))) => match atom {
                Atom::Func(_) => matches!(r.element_of(atom), Some(Element::Pi(..))),
                Atom::Coord(_) => matches!(
                    r.coord_kind(atom),
                    Some(CoordKind::Jet1(crate::jetspace::Dependent::U(_), crate::jetspace::Independent::X(_)))
                ),
                _ => false,
            },
            (_, Some(Element::G | Element::H)) => match atom {
                Atom::Func(_) => matches!(r.element_of(atom), Some(Element::G | Element::H)),
                Atom::Coord(_) => *atom == r.p() || *atom == r.rho(),
                _ => false,
            },
            _ => false,
        }
    }
}

/// Infinitesimal equivalence generator
/// `xi^t d_t + xi^x d_x + eta^u d_u + eta^p d_p + eta^rho d_rho + mu^Pi d_Pi + mu^G d_G + mu^H d_H`.
///
/// Coefficients are keyed by the coordinate or element they act on; zero
/// coefficients are not stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSpec {
    dim: usize,
    coefficients: BTreeMap<Atom, Expr>,
}

impl GeneratorSpec {
    pub fn zero(dim: usize) -> Self {
        GeneratorSpec { dim, coefficients: BTreeMap::new() }
    }

    /// Builds a generator, summing repeated targets and checking the
    /// classical ansatz.
    pub fn new(r: &JetRegistry, terms: impl IntoIterator<Item = (Atom, Expr)>) -> Result<Self> {
        let mut coefficients: BTreeMap<Atom, Expr> = BTreeMap::new();
        for (target, c) in terms {
            let is_point = r.coord_kind(&target).is_some_and(|k| k.order() == 0);
            let is_element = matches!(target, Atom::Func(_)) && r.element_of(&target).is_some();
            if !is_point && !is_element {
                return Err(Error::InvalidTarget(r.name(&target)));
            }
            *coefficients.entry(target).or_default() += c;
        }
        coefficients.retain(|_, c| !c.is_zero());
        let g = GeneratorSpec { dim: r.dim(), coefficients };
        g.check_ansatz(r, &Ansatz::classical())?;
        Ok(g)
    }

    pub fn check_ansatz(&self, r: &JetRegistry, ansatz: &Ansatz) -> Result<()> {
        for (target, c) in &self.coefficients {
            if let Some(bad) = c.atoms().into_iter().find(|a| !ansatz.allows(r, target, a)) {
                return Err(Error::Ansatz { target: r.name(target), atom: r.name(&bad) });
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coefficients(&self) -> &BTreeMap<Atom, Expr> {
        &self.coefficients
    }

    pub fn coefficient(&self, target: &Atom) -> Expr {
        self.coefficients.get(target).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// `sum_i c_i g_i`.
    pub fn combine(dim: usize, parts: &[(Rational, &GeneratorSpec)]) -> GeneratorSpec {
        let mut coefficients: BTreeMap<Atom, Expr> = BTreeMap::new();
        for (c, g) in parts {
            for (t, e) in &g.coefficients {
                *coefficients.entry(t.clone()).or_default() += e.scale(c);
            }
        }
        coefficients.retain(|_, c| !c.is_zero());
        GeneratorSpec { dim, coefficients }
    }

    pub(crate) fn from_map_unchecked(dim: usize, mut coefficients: BTreeMap<Atom, Expr>) -> Self {
        coefficients.retain(|_, c| !c.is_zero());
        GeneratorSpec { dim, coefficients }
    }

    /// The generator in DSL syntax, e.g. `t*d/dx1 + d/du1`.
    pub fn to_dsl(&self, r: &JetRegistry) -> String {
        if self.coefficients.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (target, c)) in self.coefficients.iter().enumerate() {
            let text = c.to_text(r);
            let single = c.len() == 1;
            let (neg, body) = match text.strip_prefix('-') {
                Some(rest) if single => (true, rest.to_string()),
                _ => (false, text),
            };
            if i > 0 {
                out.push_str(if neg { " - " } else { " + " });
            } else if neg {
                out.push('-');
            }
            let d = format!("d/d{}", r.name(target));
            if single && body == "1" {
                out.push_str(&d);
            } else if single {
                out.push_str(&format!("{body}*{d}"));
            } else {
                out.push_str(&format!("({body})*{d}"));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::int;

    #[test]
    fn ansatz_rejects_element_dependence_of_xi() {
        let r = JetRegistry::new(1).unwrap();
        let err = GeneratorSpec::new(&r, [(r.t(), Expr::atom(r.pi(1, 1)))]).unwrap_err();
        assert_eq!(err, Error::Ansatz { target: "t".into(), atom: "Pi11".into() });
        let err = GeneratorSpec::new(&r, [(r.g(), Expr::atom(r.grad_u(1, 1)))]).unwrap_err();
        assert!(matches!(err, Error::Ansatz { .. }));
        assert!(GeneratorSpec::new(&r, [(r.pi(1, 1), Expr::atom(r.grad_u(1, 1)))]).is_ok());
        assert!(GeneratorSpec::new(&r, [(r.g(), Expr::atom(r.h()))]).is_ok());
    }

    #[test]
    fn jets_are_not_targets() {
        let r = JetRegistry::new(1).unwrap();
        let err = GeneratorSpec::new(&r, [(r.grad_u(1, 1), Expr::one())]).unwrap_err();
        assert!(matches!(err, Error::InvalidTarget(_)));
    }

    #[test]
    fn repeated_targets_are_summed() {
        let r = JetRegistry::new(1).unwrap();
        let g = GeneratorSpec::new(&r, [(r.p(), Expr::one()), (r.p(), Expr::int(-1))]).unwrap();
        assert!(g.is_zero());
        let g = GeneratorSpec::new(&r, [(r.x(1), Expr::atom(r.t())), (r.u(1), Expr::one())]).unwrap();
        assert_eq!(g.to_dsl(&r), "t*d/dx1 + d/du1");
        let h = GeneratorSpec::combine(1, &[(int(-2), &g)]);
        assert_eq!(h.to_dsl(&r), "-2*t*d/dx1 - 2*d/du1");
    }
}
