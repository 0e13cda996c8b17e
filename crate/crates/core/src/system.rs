//! The balance laws of the medium:
//!
//! ```text
//! continuity   rho_t + sum_i (u_i rho_xi + rho u_i,xi)                       = 0
//! momentum_i   rho (u_i,t + sum_j u_j u_i,xj) - sum_j D_xj Pi_ij + p_xi        = 0
//! pressure     p_t + sum_i u_i p_xi + G div u + H Phi                         = 0
//! ```
//!
//! with the dissipation `Phi = sum_ij Pi_ij u_i,xj`, and the map solving the
//! three balance laws for `rho_t`, `u_k,t`, `p_t`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::jetspace::{Dependent, Independent, JetRegistry};
use crate::symcore::{Atom, Expr, Monomial};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EquationId {
    Continuity,
    /// Momentum component, 1-based.
    Momentum(usize),
    Pressure,
}

impl fmt::Display for EquationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquationId::Continuity => write!(f, "continuity"),
            EquationId::Momentum(i) => write!(f, "momentum_{i}"),
            EquationId::Pressure => write!(f, "pressure"),
        }
    }
}

/// Value of a principal derivative: `numerator / rho^rho_power`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrincipalBinding {
    pub numerator: Expr,
    pub rho_power: u32,
}

#[derive(Clone, Debug)]
pub struct BalanceSystem {
    dim: usize,
    registry: JetRegistry,
    equations: Vec<(EquationId, Expr)>,
    dissipation: Expr,
    principal: BTreeMap<Atom, PrincipalBinding>,
}

/// Result of eliminating the principal derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct Restriction {
    pub expr: Expr,
    /// Power of `rho` the input was multiplied by.
    pub rho_power: u32,
}

impl BalanceSystem {
    pub fn new(dim: usize, r: &JetRegistry) -> Result<Self> {
        if r.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: r.dim() });
        }
        let at = |a: Atom| Expr::atom(a);
        let xs: Vec<Independent> = (1..=dim).map(Independent::X).collect();
        let rho = at(r.rho());
        let rho_t = r.jet(Dependent::Rho, Independent::T);
        let p_t = r.jet(Dependent::P, Independent::T);

        let div_u: Expr = (1..=dim).map(|i| at(r.grad_u(i, i))).sum();
        let mut dissipation = Expr::zero();
        for i in 1..=dim {
            for j in 1..=dim {
                dissipation += at(r.pi(i, j)) * at(r.grad_u(i, j));
            }
        }

        // rho_t + principal_rho = 0
        let transport_rho: Expr = xs
            .iter()
            .enumerate()
            .map(|(i, &w)| at(r.u(i + 1)) * at(r.jet(Dependent::Rho, w)) + &rho * &at(r.grad_u(i + 1, i + 1)))
            .sum();
        let continuity = at(rho_t.clone()) + &transport_rho;

        let mut equations = vec![(EquationId::Continuity, continuity)];
        let mut principal = BTreeMap::new();
        principal.insert(rho_t, PrincipalBinding { numerator: -&transport_rho, rho_power: 0 });

        for i in 1..=dim {
            let u_t = r.jet(Dependent::U(i), Independent::T);
            let convect: Expr = (1..=dim).map(|j| at(r.u(j)) * at(r.grad_u(i, j))).sum();
            let mut div_pi = Expr::zero();
            for j in 1..=dim {
                div_pi += r.total_derivative(&at(r.pi(i, j)), Independent::X(j))?;
            }
            let grad_p = at(r.jet(Dependent::P, Independent::X(i)));
            let eq = &rho * &(at(u_t.clone()) + &convect) - &div_pi + &grad_p;
            equations.push((EquationId::Momentum(i), eq));
            // rho u_i,t = div Pi_i - p_xi - rho (u . grad) u_i
            let numerator = &div_pi - &grad_p - &rho * &convect;
            principal.insert(u_t, PrincipalBinding { numerator, rho_power: 1 });
        }

        let transport_p: Expr = xs
            .iter()
            .enumerate()
            .map(|(i, &w)| at(r.u(i + 1)) * at(r.jet(Dependent::P, w)))
            .sum();
        let rest = &transport_p + &(at(r.g()) * &div_u) + at(r.h()) * &dissipation;
        equations.push((EquationId::Pressure, at(p_t.clone()) + &rest));
        principal.insert(p_t, PrincipalBinding { numerator: -rest, rho_power: 0 });

        Ok(BalanceSystem {
            dim,
            registry: r.clone(),
            equations,
            dissipation,
            principal,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn registry(&self) -> &JetRegistry {
        &self.registry
    }

    pub fn equations(&self) -> &[(EquationId, Expr)] {
        &self.equations
    }

    pub fn equation(&self, id: EquationId) -> Option<&Expr> {
        self.equations.iter().find(|(e, _)| *e == id).map(|(_, x)| x)
    }

    pub fn dissipation(&self) -> &Expr {
        &self.dissipation
    }

    /// `rho_t`, `u_k,t`, `p_t` solved from the balance laws.
    pub fn solve_principal(&self) -> &BTreeMap<Atom, PrincipalBinding> {
        &self.principal
    }

    /// Eliminates every principal derivative from `e`. The result is
    /// multiplied by the smallest power of `rho` that keeps it polynomial.
    pub fn restrict_to_manifold(&self, e: &Expr) -> Result<Restriction> {
        for b in self.principal.values() {
            if let Some(a) = b.numerator.atoms().into_iter().find(|a| self.principal.contains_key(a)) {
                return Err(Error::CyclicSubstitution(self.registry.name(&a)));
            }
        }
        let rho = self.registry.rho();
        let denom = |m: &Monomial| -> u32 {
            m.factors()
                .iter()
                .filter_map(|(a, k)| self.principal.get(a).map(|b| b.rho_power * (*k as u32)))
                .sum()
        };
        let top = e.terms().map(|(m, _)| denom(m)).max().unwrap_or(0);

        let mut cache: BTreeMap<(Atom, i32), Expr> = BTreeMap::new();
        let mut out = Expr::zero();
        for (m, c) in e.terms() {
            let (pr, rest) = m.split(|a| self.principal.contains_key(a));
            let mut t = Expr::term(c.clone(), rest);
            for (a, k) in pr.factors() {
                let p = cache
                    .entry((a.clone(), *k))
                    .or_insert_with(|| self.principal[a].numerator.pow(*k as u32));
                t = &t * &*p;
            }
            let lift = top - denom(m);
            if lift > 0 {
                t = t.mul_monomial(&Monomial::power(rho.clone(), lift as i32)?);
            }
            out += t;
        }
        if out.is_zero() {
            return Ok(Restriction { expr: out, rho_power: 0 });
        }
        let common = out
            .terms()
            .map(|(m, _)| m.degree_of(&rho) as u32)
            .min()
            .unwrap_or(0)
            .min(top);
        if common > 0 {
            let mut divided = Expr::zero();
            for (m, c) in out.terms() {
                let k = m.degree_of(&rho);
                divided += Expr::term(c.clone(), m.with_exponent(&rho, k - common as i32));
            }
            out = divided;
        }
        Ok(Restriction { expr: out, rho_power: top - common })
    }

    /// All equations in the text form, one per line.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (id, e) in &self.equations {
            s.push_str(&format!("{id}: {} = 0\n", e.to_text(&self.registry)));
        }
        s.push_str(&format!("dissipation: Phi = {}\n", self.dissipation.to_text(&self.registry)));
        s
    }
}
