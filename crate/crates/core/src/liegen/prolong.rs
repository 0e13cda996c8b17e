use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::jetspace::{Dependent, Independent, JetRegistry};
use crate::symcore::{Atom, Expr};

use super::generator::GeneratorSpec;

/// A generator extended to the jets and to the derivative coordinates
/// `Pi_ij` by `u_k,x_l`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProlongedGenerator {
    base: GeneratorSpec,
    coefficients: BTreeMap<Atom, Expr>,
    /// Jets whose coefficient needs a jet outside the registry, with the
    /// reason. Applying the generator to anything depending on them fails.
    unavailable: BTreeMap<Atom, String>,
}

/// Prolongs `g` to first-order jets, spatial second-order jets `u_k,xl xj`,
/// mixed jets `u_k,t xl` where they stay inside the registry, and the
/// derivative coordinates of `Pi`:
///
/// ```text
/// zeta^a_w      = D_w(eta^a) - sum_v D_w(xi^v) a_v
/// zeta^a_wv     = D_v(zeta^a_w) - sum_z D_v(xi^z) a_wz
/// mu^Pi_ij,kl   = Dk_kl(mu^Pi_ij) - sum_rs Pi_ij,rs Dk_kl(zeta^u_r,xs)
/// ```
///
/// where `Dk_kl` differentiates by `u_k,x_l` through the arguments of `Pi`.
pub fn prolong(g: &GeneratorSpec, r: &JetRegistry) -> Result<ProlongedGenerator> {
    if g.dim() != r.dim() {
        return Err(Error::DimensionMismatch { expected: r.dim(), found: g.dim() });
    }
    g.check_ansatz(r, &super::Ansatz::classical())?;
    let mut coefficients = g.coefficients().clone();
    let mut unavailable = BTreeMap::new();
    let inds = r.independents();

    // D_w(xi^v), indexed [w][v]
    let mut dxi: Vec<Vec<Expr>> = Vec::with_capacity(inds.len());
    for &w in &inds {
        let mut row = Vec::with_capacity(inds.len());
        for &v in &inds {
            row.push(r.total_derivative(&g.coefficient(&r.independent(v)), w)?);
        }
        dxi.push(row);
    }

    let mut first: BTreeMap<(Dependent, Independent), Expr> = BTreeMap::new();
    for dep in r.dependents() {
        let eta = g.coefficient(&r.dependent(dep));
        for (wi, &w) in inds.iter().enumerate() {
            let mut z = r.total_derivative(&eta, w)?;
            for (vi, &v) in inds.iter().enumerate() {
                if !dxi[wi][vi].is_zero() {
                    z -= &(&dxi[wi][vi] * &Expr::atom(r.jet(dep, v)));
                }
            }
            first.insert((dep, w), z);
        }
    }
    for ((dep, w), z) in &first {
        if !z.is_zero() {
            coefficients.insert(r.jet(*dep, *w), z.clone());
        }
    }

    // second-order velocity jets: zeta_{w v} = D_v(zeta_w) - sum_z D_v(xi^z) u_{w z}
    for k in 1..=r.dim() {
        let dep = Dependent::U(k);
        for (wi, &w) in inds.iter().enumerate() {
            for (vi, &v) in inds.iter().enumerate().skip(wi) {
                let Some(target) = r.jet2(dep, w, v) else { continue };
                let second = || -> Result<Expr> {
                    let mut z = r.total_derivative(&first[&(dep, w)], v)?;
                    for (zi, &zz) in inds.iter().enumerate() {
                        if dxi[vi][zi].is_zero() {
                            continue;
                        }
                        let jet = r.jet2(dep, w, zz).ok_or_else(|| {
                            Error::JetOrder(format!("{} needs an unregistered jet", r.name(&target)))
                        })?;
                        z -= &(&dxi[vi][zi] * &Expr::atom(jet));
                    }
                    Ok(z)
                };
                match second() {
                    Ok(z) if z.is_zero() => {}
                    Ok(z) => {
                        coefficients.insert(target, z);
                    }
                    Err(e) => {
                        unavailable.insert(target, e.to_string());
                    }
                }
            }
        }
    }

    // derivative coordinates of Pi
    let n = r.dim();
    for (i, j) in r.pi_pairs() {
        let mu = g.coefficient(&r.pi(i, j));
        for k in 1..=n {
            for l in 1..=n {
                let pkl = r.grad_u(k, l);
                let mut m = mu.diff_partial(&pkl)?;
                for rr in 1..=n {
                    for s in 1..=n {
                        let z = &first[&(Dependent::U(rr), Independent::X(s))];
                        let dz = z.diff_partial(&pkl)?;
                        if !dz.is_zero() {
                            m -= &(&Expr::atom(r.pi_d(i, j, rr, s)) * &dz);
                        }
                    }
                }
                if !m.is_zero() {
                    coefficients.insert(r.pi_d(i, j, k, l), m);
                }
            }
        }
    }

    Ok(ProlongedGenerator { base: g.clone(), coefficients, unavailable })
}

impl ProlongedGenerator {
    pub fn base(&self) -> &GeneratorSpec {
        &self.base
    }

    pub fn coefficients(&self) -> &BTreeMap<Atom, Expr> {
        &self.coefficients
    }

    pub fn coefficient(&self, a: &Atom) -> Expr {
        self.coefficients.get(a).cloned().unwrap_or_default()
    }

    /// Per-coordinate contributions `coefficient(c) * de/dc`, unsummed.
    pub fn apply_traced(&self, e: &Expr, r: &JetRegistry) -> Result<Vec<(Atom, Expr)>> {
        let atoms: BTreeSet<Atom> = e.atoms();
        let mut out = Vec::new();
        for a in atoms {
            if a.is_constant_symbol() {
                continue;
            }
            if !r.is_space_atom(&a) {
                return Err(Error::UnknownSymbol(r.name(&a)));
            }
            if let Some(why) = self.unavailable.get(&a) {
                return Err(Error::JetOrder(why.clone()));
            }
            let Some(c) = self.coefficients.get(&a) else { continue };
            out.push((a.clone(), c * &e.diff_atom(&a)));
        }
        Ok(out)
    }

    /// Directional derivative of `e` along the prolonged generator.
    pub fn apply(&self, e: &Expr, r: &JetRegistry) -> Result<Expr> {
        Ok(self.apply_traced(e, r)?.into_iter().map(|(_, c)| c).sum())
    }
}

/// Commutator `[g1, g2]`, each generator acting as a derivation through its
/// prolongation.
pub fn bracket(g1: &GeneratorSpec, g2: &GeneratorSpec, r: &JetRegistry) -> Result<GeneratorSpec> {
    let p1 = prolong(g1, r)?;
    let p2 = prolong(g2, r)?;
    let targets: BTreeSet<&Atom> = g1.coefficients().keys().chain(g2.coefficients().keys()).collect();
    let mut out = BTreeMap::new();
    for t in targets {
        let c = p1.apply(&g2.coefficient(t), r)? - p2.apply(&g1.coefficient(t), r)?;
        out.insert(t.clone(), c);
    }
    let g = GeneratorSpec::from_map_unchecked(r.dim(), out);
    g.check_ansatz(r, &super::Ansatz::classical())?;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_catalog, find};
    use crate::system::{BalanceSystem, EquationId};

    fn setup(n: usize) -> (JetRegistry, Vec<crate::catalog::CatalogEntry>) {
        let r = JetRegistry::new(n).unwrap();
        let c = build_catalog(n, &r).unwrap();
        (r, c)
    }

    #[test]
    fn time_translation_has_trivial_prolongation() {
        let (r, c) = setup(2);
        let p = prolong(&find(&c, "X0").unwrap().generator, &r).unwrap();
        assert_eq!(p.coefficients().len(), 1);
    }

    #[test]
    fn galilean_boost_shifts_time_jets() {
        let (r, c) = setup(2);
        let p = prolong(&find(&c, "Y1").unwrap().generator, &r).unwrap();
        for dep in r.dependents() {
            let want = -Expr::atom(r.jet(dep, Independent::X(1)));
            assert_eq!(p.coefficient(&r.jet(dep, Independent::T)), want);
        }
        assert!(p.coefficient(&r.grad_u(1, 1)).is_zero());
    }

    #[test]
    fn scaling_keeps_velocity_gradient() {
        let (r, c) = setup(2);
        let p = prolong(&find(&c, "Z1").unwrap().generator, &r).unwrap();
        for k in 1..=2 {
            for l in 1..=2 {
                assert!(p.coefficient(&r.grad_u(k, l)).is_zero());
            }
        }
        // p_x scales with weight 2 - 1
        assert_eq!(p.coefficient(&r.jet(Dependent::P, Independent::X(1))), Expr::atom(r.jet(Dependent::P, Independent::X(1))));
        // Pi derivatives scale with weight 2
        let d = r.pi_d(1, 2, 2, 1);
        assert_eq!(p.coefficient(&d), Expr::atom(d).scale(&crate::symcore::int(2)));
    }

    #[test]
    fn stress_shift_annihilates_pressure_equation() {
        let (r, c) = setup(2);
        let s = BalanceSystem::new(2, &r).unwrap();
        let p = prolong(&find(&c, "T").unwrap().generator, &r).unwrap();
        let e = s.equation(EquationId::Pressure).unwrap();
        let image = p.apply(e, &r).unwrap();
        assert!(s.restrict_to_manifold(&image).unwrap().expr.is_zero());
    }

    #[test]
    fn apply_is_linear_in_the_generator() {
        let (r, c) = setup(2);
        let s = BalanceSystem::new(2, &r).unwrap();
        let a = &find(&c, "Z1").unwrap().generator;
        let b = &find(&c, "Y2").unwrap().generator;
        let two = crate::symcore::int(2);
        let sum = GeneratorSpec::combine(2, &[(two.clone(), a), (crate::symcore::int(-3), b)]);
        let (pa, pb, ps) = (prolong(a, &r).unwrap(), prolong(b, &r).unwrap(), prolong(&sum, &r).unwrap());
        for (_, e) in s.equations() {
            let lhs = ps.apply(e, &r).unwrap();
            let rhs = pa.apply(e, &r).unwrap().scale(&two) - pb.apply(e, &r).unwrap().scale(&crate::symcore::int(3));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn constants_are_inert_and_unregistered_jets_fail() {
        let (r, c) = setup(1);
        let p = prolong(&find(&c, "Z1").unwrap().generator, &r).unwrap();
        let e = Expr::atom(Atom::symbol("c")) * Expr::atom(r.p());
        assert_eq!(p.apply(&e, &r).unwrap(), e.scale(&crate::symcore::int(2)));
        let jet = r.jet(Dependent::Rho, Independent::T);
        assert!(matches!(r.total_derivative(&Expr::atom(jet), Independent::T), Err(Error::JetOrder(_))));
    }

    #[test]
    fn brackets_of_known_pairs() {
        let (r, c) = setup(2);
        let g = |n: &str| find(&c, n).unwrap().generator.clone();
        assert_eq!(bracket(&g("X0"), &g("Y1"), &r).unwrap(), g("X1"));
        let neg = |x: GeneratorSpec| GeneratorSpec::combine(2, &[(crate::symcore::int(-1), &x)]);
        assert_eq!(bracket(&g("Z1"), &g("Y2"), &r).unwrap(), neg(g("Y2")));
        let two = |x: GeneratorSpec| GeneratorSpec::combine(2, &[(crate::symcore::int(2), &x)]);
        assert_eq!(bracket(&g("S"), &g("Z1"), &r).unwrap(), two(g("S")));
        assert_eq!(bracket(&g("T"), &g("Z1"), &r).unwrap(), two(g("T")));
        assert_eq!(bracket(&g("T"), &g("Z2"), &r).unwrap(), g("T"));
        assert!(bracket(&g("Z1"), &g("Z2"), &r).unwrap().is_zero());
    }
}
