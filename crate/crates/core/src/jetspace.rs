//! Variables of the extended space: independents `t, x1..xN`, dependents
//! `u1..uN, p, rho`, jets up to second order, and the arbitrary elements
//! `Pi_ij(grad u)`, `G(p, rho)`, `H(p, rho)` with their first derivatives
//! `Pi_ij` by `u_k,x_l`.
//!
//! # Names
//!
//! ```text
//! t  x{i}  u{k}  p  rho
//! u{k}_t  u{k}_x{l}  p_t  p_x{i}  rho_t  rho_x{i}
//! u{k}_x{l}x{j}   (l <= j)      u{k}_tx{l}
//! Pi{i}{j}        (i <= j; Pi{j}{i} reads as Pi{i}{j})
//! Pi{i}{j}_d_u{k}x{l}[_d_u{k'}x{l'}...]
//! G  H  G_p  G_rho  G_prho  H_rhorho ...
//! ```

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::symcore::{Atom, CoordId, Expr, FuncId, FuncSymbol, Monomial, Namer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Independent {
    T,
    /// Spatial axis, 1-based.
    X(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dependent {
    /// Velocity component, 1-based.
    U(usize),
    P,
    Rho,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoordKind {
    Independent(Independent),
    Dependent(Dependent),
    Jet1(Dependent, Independent),
    /// Second-order jet of a velocity component; the pair is sorted.
    Jet2(usize, Independent, Independent),
}

impl CoordKind {
    pub fn order(&self) -> usize {
        match self {
            CoordKind::Independent(_) | CoordKind::Dependent(_) => 0,
            CoordKind::Jet1(..) => 1,
            CoordKind::Jet2(..) => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    /// Stress component, `i <= j`.
    Pi(usize, usize),
    G,
    H,
}

#[derive(Clone, Debug)]
struct CoordInfo {
    name: String,
    kind: CoordKind,
}

#[derive(Clone, Debug)]
struct FuncInfo {
    name: String,
    element: Element,
    symbol: FuncSymbol,
}

/// Sizes of the space: `n` independents, `m` dependents, `a` coordinates
/// of the arbitrary-element space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpaceCounts {
    pub n: usize,
    pub m: usize,
    pub a: usize,
}

/// Immutable registry of every coordinate and element of the space for a
/// fixed spatial dimension.
#[derive(Clone, Debug)]
pub struct JetRegistry {
    dim: usize,
    coords: Vec<CoordInfo>,
    funcs: Vec<FuncInfo>,
    coord_ids: HashMap<CoordKind, CoordId>,
    func_ids: HashMap<Element, FuncId>,
    names: HashMap<String, Atom>,
}

fn pair(a: Independent, b: Independent) -> (Independent, Independent) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn dep_name(d: Dependent) -> String {
    match d {
        Dependent::U(k) => format!("u{k}"),
        Dependent::P => "p".into(),
        Dependent::Rho => "rho".into(),
    }
}

fn ind_name(w: Independent) -> String {
    match w {
        Independent::T => "t".into(),
        Independent::X(i) => format!("x{i}"),
    }
}

impl JetRegistry {
    pub fn new(dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        let mut r = JetRegistry {
            dim,
            coords: Vec::new(),
            funcs: Vec::new(),
            coord_ids: HashMap::new(),
            func_ids: HashMap::new(),
            names: HashMap::new(),
        };
        for w in r.independents() {
            r.add_coord(ind_name(w), CoordKind::Independent(w));
        }
        for d in r.dependents() {
            r.add_coord(dep_name(d), CoordKind::Dependent(d));
        }
        for d in r.dependents() {
            for w in r.independents() {
                r.add_coord(format!("{}_{}", dep_name(d), ind_name(w)), CoordKind::Jet1(d, w));
            }
        }
        for k in 1..=dim {
            for l in 1..=dim {
                let kind = CoordKind::Jet2(k, Independent::T, Independent::X(l));
                r.add_coord(format!("u{k}_tx{l}"), kind);
            }
            for l in 1..=dim {
                for j in l..=dim {
                    let kind = CoordKind::Jet2(k, Independent::X(l), Independent::X(j));
                    r.add_coord(format!("u{k}_x{l}x{j}"), kind);
                }
            }
        }

        let grad: Vec<CoordId> = (1..=dim)
            .flat_map(|k| (1..=dim).map(move |l| (k, l)))
            .map(|(k, l)| r.coord_ids[&CoordKind::Jet1(Dependent::U(k), Independent::X(l))])
            .collect();
        for i in 1..=dim {
            for j in i..=dim {
                r.add_func(format!("Pi{i}{j}"), Element::Pi(i, j), grad.clone());
            }
        }
        let pr = vec![
            r.coord_ids[&CoordKind::Dependent(Dependent::P)],
            r.coord_ids[&CoordKind::Dependent(Dependent::Rho)],
        ];
        r.add_func("G".into(), Element::G, pr.clone());
        r.add_func("H".into(), Element::H, pr);

        // first derivatives of Pi by the velocity gradient, and Pi{j}{i} aliases
        for (i, j) in r.pi_pairs() {
            let f = r.func_symbol(Element::Pi(i, j));
            for &c in grad.iter() {
                let d = Atom::deriv(&f, &[c]).expect("declared argument");
                let name = r.deriv_name(&f, &[c]);
                r.names.insert(name, d);
            }
            if i != j {
                r.names.insert(format!("Pi{j}{i}"), Atom::Func(f.clone()));
            }
        }
        Ok(r)
    }

    fn add_coord(&mut self, name: String, kind: CoordKind) {
        let id = CoordId(self.coords.len() as u32);
        self.names.insert(name.clone(), Atom::Coord(id));
        self.coord_ids.insert(kind, id);
        self.coords.push(CoordInfo { name, kind });
    }

    fn add_func(&mut self, name: String, element: Element, args: Vec<CoordId>) {
        let id = FuncId(self.funcs.len() as u32);
        let symbol = FuncSymbol::new(id, args);
        self.names.insert(name.clone(), Atom::Func(symbol.clone()));
        self.func_ids.insert(element, id);
        self.funcs.push(FuncInfo { name, element, symbol });
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn counts(&self) -> SpaceCounts {
        let reps = self.dim * (self.dim + 1) / 2;
        SpaceCounts {
            n: self.dim + 1,
            m: self.dim + 2,
            a: reps + reps * self.dim * self.dim + 2,
        }
    }

    pub fn independents(&self) -> Vec<Independent> {
        std::iter::once(Independent::T)
            .chain((1..=self.dim).map(Independent::X))
            .collect()
    }

    pub fn dependents(&self) -> Vec<Dependent> {
        (1..=self.dim)
            .map(Dependent::U)
            .chain([Dependent::P, Dependent::Rho])
            .collect()
    }

    pub fn pi_pairs(&self) -> Vec<(usize, usize)> {
        (1..=self.dim)
            .flat_map(|i| (i..=self.dim).map(move |j| (i, j)))
            .collect()
    }

    pub fn elements(&self) -> Vec<Element> {
        self.funcs.iter().map(|f| f.element).collect()
    }

    pub fn coord(&self, kind: CoordKind) -> Option<Atom> {
        self.coord_ids.get(&kind).map(|c| Atom::Coord(*c))
    }

    pub fn coord_kind(&self, atom: &Atom) -> Option<CoordKind> {
        match atom {
            Atom::Coord(c) => self.coords.get(c.0 as usize).map(|i| i.kind),
            _ => None,
        }
    }

    pub fn independent(&self, w: Independent) -> Atom {
        self.coord(CoordKind::Independent(w)).expect("registered independent")
    }

    pub fn dependent(&self, d: Dependent) -> Atom {
        self.coord(CoordKind::Dependent(d)).expect("registered dependent")
    }

    pub fn t(&self) -> Atom {
        self.independent(Independent::T)
    }

    pub fn x(&self, i: usize) -> Atom {
        self.independent(Independent::X(i))
    }

    pub fn u(&self, k: usize) -> Atom {
        self.dependent(Dependent::U(k))
    }

    pub fn p(&self) -> Atom {
        self.dependent(Dependent::P)
    }

    pub fn rho(&self) -> Atom {
        self.dependent(Dependent::Rho)
    }

    /// First-order jet `dep_w`.
    pub fn jet(&self, dep: Dependent, w: Independent) -> Atom {
        self.coord(CoordKind::Jet1(dep, w)).expect("registered first-order jet")
    }

    /// Second-order jet, if registered (velocity only, no `u_tt`).
    pub fn jet2(&self, dep: Dependent, a: Independent, b: Independent) -> Option<Atom> {
        let Dependent::U(k) = dep else { return None };
        let (a, b) = pair(a, b);
        self.coord(CoordKind::Jet2(k, a, b))
    }

    /// Velocity gradient entry `u{k}_x{l}`.
    pub fn grad_u(&self, k: usize, l: usize) -> Atom {
        self.jet(Dependent::U(k), Independent::X(l))
    }

    pub fn u_xx(&self, k: usize, l: usize, j: usize) -> Atom {
        self.jet2(Dependent::U(k), Independent::X(l), Independent::X(j))
            .expect("registered spatial second jet")
    }

    pub fn func_symbol(&self, e: Element) -> FuncSymbol {
        let e = match e {
            Element::Pi(i, j) if i > j => Element::Pi(j, i),
            other => other,
        };
        self.funcs[self.func_ids[&e].0 as usize].symbol.clone()
    }

    pub fn element(&self, e: Element) -> Atom {
        Atom::Func(self.func_symbol(e))
    }

    /// `Pi_ij` resolved to its symmetric representative.
    pub fn pi(&self, i: usize, j: usize) -> Atom {
        self.element(Element::Pi(i, j))
    }

    /// `dPi_ij / du{k}_x{l}`.
    pub fn pi_d(&self, i: usize, j: usize, k: usize, l: usize) -> Atom {
        let f = self.func_symbol(Element::Pi(i, j));
        let c = self.grad_u(k, l).as_coord().expect("coordinate");
        Atom::deriv(&f, &[c]).expect("declared argument")
    }

    pub fn g(&self) -> Atom {
        self.element(Element::G)
    }

    pub fn h(&self) -> Atom {
        self.element(Element::H)
    }

    pub fn element_of(&self, atom: &Atom) -> Option<Element> {
        match atom {
            Atom::Func(f) | Atom::Deriv(f, _) => self.funcs.get(f.id.0 as usize).map(|i| i.element),
            _ => None,
        }
    }

    /// Every coordinate atom of the given jet order.
    pub fn coords_of_order(&self, order: usize) -> Vec<Atom> {
        (0..self.coords.len())
            .filter(|&i| self.coords[i].kind.order() == order)
            .map(|i| Atom::Coord(CoordId(i as u32)))
            .collect()
    }

    /// All first derivatives `Pi_ij` by `u_k,x_l`, in atom order.
    pub fn pi_derivs(&self) -> Vec<Atom> {
        let mut v = Vec::new();
        for (i, j) in self.pi_pairs() {
            for k in 1..=self.dim {
                for l in 1..=self.dim {
                    v.push(self.pi_d(i, j, k, l));
                }
            }
        }
        v.sort();
        v
    }

    /// True for the coordinates a prolonged generator acts on: every
    /// registered coordinate, the elements and their first derivatives.
    pub fn is_space_atom(&self, atom: &Atom) -> bool {
        match atom {
            Atom::Coord(c) => (c.0 as usize) < self.coords.len(),
            Atom::Func(f) => (f.id.0 as usize) < self.funcs.len(),
            Atom::Deriv(f, ms) => {
                ms.len() == 1 && matches!(self.element_of(atom), Some(Element::Pi(..))) && (f.id.0 as usize) < self.funcs.len()
            }
            _ => false,
        }
    }

    pub fn lookup(&self, name: &str) -> Option<Atom> {
        if let Some(a) = self.names.get(name) {
            return Some(a.clone());
        }
        self.parse_deriv_name(name)
    }

    fn parse_deriv_name(&self, name: &str) -> Option<Atom> {
        if let Some(rest) = name.strip_prefix("G_").map(|r| (Element::G, r)).or_else(|| name.strip_prefix("H_").map(|r| (Element::H, r))) {
            let (el, mut s) = rest;
            let (p, rho) = (self.p().as_coord()?, self.rho().as_coord()?);
            let mut wrt = Vec::new();
            while !s.is_empty() {
                if let Some(r) = s.strip_prefix("rho") {
                    wrt.push(rho);
                    s = r;
                } else {
                    s = s.strip_prefix('p')?;
                    wrt.push(p);
                }
            }
            return Atom::deriv(&self.func_symbol(el), &wrt).ok();
        }
        let mut parts = name.split("_d_");
        let base = parts.next()?;
        let Some(Atom::Func(f)) = self.names.get(base) else { return None };
        let mut wrt = Vec::new();
        for part in parts {
            let (k, l) = part.strip_prefix('u')?.split_once('x')?;
            let c = self.names.get(&format!("u{k}_x{l}"))?.as_coord()?;
            wrt.push(c);
        }
        if wrt.is_empty() {
            return None;
        }
        Atom::deriv(f, &wrt).ok()
    }

    fn deriv_name(&self, f: &FuncSymbol, wrt: &[CoordId]) -> String {
        let info = &self.funcs[f.id.0 as usize];
        match info.element {
            Element::Pi(..) => {
                let mut s = info.name.clone();
                for c in wrt {
                    s.push_str("_d_");
                    s.push_str(&self.coords[c.0 as usize].name.replace('_', ""));
                }
                s
            }
            _ => {
                let mut s = format!("{}_", info.name);
                for c in wrt {
                    s.push_str(&self.coords[c.0 as usize].name);
                }
                s
            }
        }
    }

    pub fn name(&self, atom: &Atom) -> String {
        self.atom_name(atom)
    }

    /// Total derivative `D_w`, chaining through the jets and the declared
    /// arguments of every arbitrary element.
    pub fn total_derivative(&self, e: &Expr, w: Independent) -> Result<Expr> {
        let mut cache: HashMap<Atom, Expr> = HashMap::new();
        for a in e.atoms() {
            let d = self.total_derivative_atom(&a, w)?;
            cache.insert(a, d);
        }
        let mut out = Expr::zero();
        for (m, c) in e.terms() {
            for (a, k) in m.factors() {
                let da = &cache[a];
                if da.is_zero() {
                    continue;
                }
                let rest = Expr::term(c * crate::symcore::int(*k as i64), m.with_exponent(a, k - 1));
                out += &rest * da;
            }
        }
        Ok(out)
    }

    fn total_derivative_atom(&self, a: &Atom, w: Independent) -> Result<Expr> {
        match a {
            Atom::Coord(_) => match self.coord_kind(a) {
                Some(CoordKind::Independent(v)) => Ok(if v == w { Expr::one() } else { Expr::zero() }),
                Some(CoordKind::Dependent(d)) => Ok(Expr::atom(self.jet(d, w))),
                Some(CoordKind::Jet1(d, v)) => self.jet2(d, v, w).map(Expr::atom).ok_or_else(|| {
                    Error::JetOrder(format!("D_{} of {} is not a registered jet", ind_name(w), self.name(a)))
                }),
                Some(CoordKind::Jet2(..)) => Err(Error::JetOrder(format!(
                    "{} is already second order",
                    self.name(a)
                ))),
                None => Err(Error::UnknownSymbol(format!("{a:?}"))),
            },
            Atom::Func(f) | Atom::Deriv(f, _) => {
                let base: Vec<CoordId> = match a {
                    Atom::Deriv(_, ms) => ms.to_vec(),
                    _ => Vec::new(),
                };
                let mut out = Expr::zero();
                for &arg in f.args.iter() {
                    let darg = self.total_derivative_atom(&Atom::Coord(arg), w)?;
                    if darg.is_zero() {
                        continue;
                    }
                    let mut wrt = base.clone();
                    wrt.push(arg);
                    let da = Atom::deriv(f, &wrt)?;
                    out += darg.mul_monomial(&Monomial::atom(da));
                }
                Ok(out)
            }
            Atom::Symbol(_) | Atom::Exp(_) => Ok(Expr::zero()),
        }
    }
}

impl Namer for JetRegistry {
    fn registry_name(&self, atom: &Atom) -> Option<String> {
        match atom {
            Atom::Coord(c) => self.coords.get(c.0 as usize).map(|i| i.name.clone()),
            Atom::Func(f) => self.funcs.get(f.id.0 as usize).map(|i| i.name.clone()),
            Atom::Deriv(f, ms) => {
                self.funcs.get(f.id.0 as usize)?;
                Some(self.deriv_name(f, ms))
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        let r1 = JetRegistry::new(1).unwrap();
        assert_eq!(r1.counts(), SpaceCounts { n: 2, m: 3, a: 4 });
        // 6 stress components, 6 * 9 gradient derivatives, G and H
        let r3 = JetRegistry::new(3).unwrap();
        assert_eq!(r3.counts(), SpaceCounts { n: 4, m: 5, a: 6 + 6 * 9 + 2 });
        assert_eq!(r3.pi_derivs().len(), 54);
        assert!(matches!(JetRegistry::new(4), Err(Error::UnsupportedDimension(4))));
        assert!(matches!(JetRegistry::new(0), Err(Error::UnsupportedDimension(0))));
    }

    #[test]
    fn names_round_trip() {
        let r = JetRegistry::new(3).unwrap();
        for order in 0..=2 {
            for a in r.coords_of_order(order) {
                assert_eq!(r.lookup(&r.name(&a)).unwrap(), a);
            }
        }
        for a in r.pi_derivs() {
            assert_eq!(r.lookup(&r.name(&a)).unwrap(), a);
        }
        assert_eq!(r.name(&r.pi_d(1, 2, 1, 2)), "Pi12_d_u1x2");
        assert_eq!(r.lookup("Pi21").unwrap(), r.pi(1, 2));
        assert_eq!(r.name(&r.u_xx(1, 2, 1)), "u1_x1x2");
        let gp = r.lookup("G_p").unwrap();
        assert_eq!(r.name(&gp), "G_p");
        let grp = r.lookup("G_rhop").unwrap();
        assert_eq!(r.name(&grp), "G_prho");
        assert!(r.lookup("q").is_none());
        assert!(r.lookup("u4").is_none());
    }

    #[test]
    fn total_derivative_examples() {
        let r = JetRegistry::new(2).unwrap();
        let rho = Expr::atom(r.rho());
        assert_eq!(
            r.total_derivative(&rho, Independent::X(1)).unwrap(),
            Expr::atom(r.jet(Dependent::Rho, Independent::X(1)))
        );
        let p = Expr::atom(r.p());
        let d = r.total_derivative(&(&p * &p), Independent::T).unwrap();
        let expect = (&p * &Expr::atom(r.jet(Dependent::P, Independent::T))).scale(&crate::symcore::int(2));
        assert_eq!(d, expect);

        // chain rule over the declared arguments u_k,x_l of Pi11
        let d = r.total_derivative(&Expr::atom(r.pi(1, 1)), Independent::X(1)).unwrap();
        let mut expect = Expr::zero();
        for k in 1..=2 {
            for l in 1..=2 {
                expect = expect + Expr::atom(r.pi_d(1, 1, k, l)) * Expr::atom(r.u_xx(k, l, 1));
            }
        }
        assert_eq!(d, expect);
    }

    #[test]
    fn second_order_input_is_rejected() {
        let r = JetRegistry::new(1).unwrap();
        let e = Expr::atom(r.u_xx(1, 1, 1));
        assert!(matches!(r.total_derivative(&e, Independent::X(1)), Err(Error::JetOrder(_))));
        let ut = Expr::atom(r.jet(Dependent::U(1), Independent::T));
        assert!(matches!(r.total_derivative(&ut, Independent::T), Err(Error::JetOrder(_))));
    }
}
