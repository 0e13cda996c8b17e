use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Signed, Zero};

use super::atom::{Atom, Namer};
use super::raw::RawExpr;
use super::scalar::Scalar;
use super::Rational;
use crate::error::{Error, Result};

/// Product of atom powers, sorted by atom. Exponents are nonzero; only
/// `Atom::Exp` factors may carry a negative exponent.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<(Atom, i32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn atom(a: Atom) -> Self {
        Monomial(vec![(a, 1)])
    }

    pub fn power(a: Atom, k: i32) -> Result<Self> {
        if k < 0 && !matches!(a, Atom::Exp(_)) {
            return Err(Error::UnsupportedForm(format!("negative exponent {k}")));
        }
        if k == 0 {
            return Ok(Monomial::one());
        }
        Ok(Monomial(vec![(a, k)]))
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Atom, i32)] {
        &self.0
    }

    pub fn degree_of(&self, a: &Atom) -> i32 {
        self.0
            .binary_search_by(|(x, _)| x.cmp(a))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn total_degree(&self) -> i32 {
        self.0.iter().map(|(_, k)| *k).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a, ka) = &self.0[i];
            let (b, kb) = &other.0[j];
            match a.cmp(b) {
                std::cmp::Ordering::Less => {
                    out.push((a.clone(), *ka));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((b.clone(), *kb));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    if ka + kb != 0 {
                        out.push((a.clone(), ka + kb));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// Same monomial with the exponent of `a` set to `k`.
    pub fn with_exponent(&self, a: &Atom, k: i32) -> Monomial {
        let mut v = self.0.clone();
        match v.binary_search_by(|(x, _)| x.cmp(a)) {
            Ok(i) if k == 0 => {
                v.remove(i);
            }
            Ok(i) => v[i].1 = k,
            Err(i) if k != 0 => v.insert(i, (a.clone(), k)),
            Err(_) => {}
        }
        Monomial(v)
    }

    /// Splits into (factors satisfying `pred`, the rest).
    pub fn split(&self, pred: impl Fn(&Atom) -> bool) -> (Monomial, Monomial) {
        let (a, b): (Vec<_>, Vec<_>) = self.0.iter().cloned().partition(|(x, _)| pred(x));
        (Monomial(a), Monomial(b))
    }

    pub fn display<'a>(&'a self, names: &'a dyn Namer) -> impl fmt::Display + 'a {
        MonomialDisplay { m: self, names }
    }
}

struct MonomialDisplay<'a> {
    m: &'a Monomial,
    names: &'a dyn Namer,
}

impl fmt::Display for MonomialDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.m.is_one() {
            return write!(f, "1");
        }
        for (i, (a, k)) in self.m.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "{}", self.names.atom_name(a))?;
            if *k != 1 {
                write!(f, "^{k}")?;
            }
        }
        Ok(())
    }
}

/// Canonical sum of rational multiples of monomials.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Expr {
    terms: BTreeMap<Monomial, Rational>,
}

impl Expr {
    pub fn zero() -> Self {
        Expr::default()
    }

    pub fn one() -> Self {
        Expr::constant(Rational::one())
    }

    pub fn int(n: i64) -> Self {
        Expr::constant(super::int(n))
    }

    pub fn constant(c: Rational) -> Self {
        Expr::term(c, Monomial::one())
    }

    pub fn atom(a: Atom) -> Self {
        Expr::term(Rational::one(), Monomial::atom(a))
    }

    pub fn term(c: Rational, m: Monomial) -> Self {
        let mut e = Expr::zero();
        e.add_term(m, c);
        e
    }

    /// `exp(name)^k`.
    pub fn exp_power(name: &str, k: i32) -> Self {
        Expr::term(
            Rational::one(),
            Monomial::power(Atom::exp(name), k).expect("exp atoms accept any exponent"),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value if this is a constant (including zero).
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next()
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Expr {
        let mut out = Expr::zero();
        for (mm, c) in &self.terms {
            out.add_term(mm.mul(m), c.clone());
        }
        out
    }

    pub fn pow(&self, k: u32) -> Expr {
        let mut acc = Expr::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.terms
            .keys()
            .flat_map(|m| m.factors().iter().map(|(a, _)| a.clone()))
            .collect()
    }

    pub fn contains_atom(&self, a: &Atom) -> bool {
        self.terms.keys().any(|m| m.degree_of(a) != 0)
    }

    /// Highest exponent of `a` over all terms (0 if absent).
    pub fn degree_in(&self, a: &Atom) -> i32 {
        self.terms.keys().map(|m| m.degree_of(a)).max().unwrap_or(0)
    }

    /// Explicit partial derivative by an atom, every other atom held fixed.
    pub fn diff_atom(&self, a: &Atom) -> Expr {
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            let k = m.degree_of(a);
            if k != 0 {
                out.add_term(m.with_exponent(a, k - 1), c * super::int(k as i64));
            }
        }
        out
    }

    /// Partial derivative by a coordinate. Function symbols are treated as
    /// functions of their declared arguments, so `G(p, rho)` differentiates
    /// to the formal derivative `G_p`.
    pub fn diff_partial(&self, coord: &Atom) -> Result<Expr> {
        let Some(c) = coord.as_coord() else {
            return Err(Error::UnknownSymbol(format!("{coord:?} is not a coordinate")));
        };
        let mut out = Expr::zero();
        for (m, coef) in &self.terms {
            for (a, k) in m.factors() {
                let Some(d) = a.partial_by(c) else { continue };
                let mut mm = m.with_exponent(a, k - 1);
                if let Some(d) = d {
                    mm = mm.mul(&Monomial::atom(d));
                }
                out.add_term(mm, coef * super::int(*k as i64));
            }
        }
        Ok(out)
    }

    /// Simultaneous substitution. Keys may not occur in any binding value.
    pub fn substitute(&self, bindings: &BTreeMap<Atom, Expr>) -> Result<Expr> {
        for v in bindings.values() {
            if let Some(a) = v.atoms().into_iter().find(|a| bindings.contains_key(a)) {
                return Err(Error::CyclicSubstitution(format!("{a:?}")));
            }
        }
        self.replace(bindings)
    }

    /// Simultaneous replacement without the acyclicity check; used for
    /// coordinate changes such as `t -> t + a`.
    pub fn replace(&self, bindings: &BTreeMap<Atom, Expr>) -> Result<Expr> {
        if bindings.is_empty() {
            return Ok(self.clone());
        }
        let mut out = Expr::zero();
        let mut cache: HashMap<(Atom, i32), Expr> = HashMap::new();
        for (m, c) in &self.terms {
            let mut kept = Monomial::one();
            let mut acc = Expr::constant(c.clone());
            for (a, k) in m.factors() {
                match bindings.get(a) {
                    None => kept = kept.mul(&Monomial(vec![(a.clone(), *k)])),
                    Some(v) => {
                        let key = (a.clone(), *k);
                        let p = match cache.get(&key) {
                            Some(p) => p.clone(),
                            None => {
                                let p = if *k >= 0 {
                                    v.pow(*k as u32)
                                } else {
                                    v.invert_monomial()?.pow((-*k) as u32)
                                };
                                cache.insert(key, p.clone());
                                p
                            }
                        };
                        acc = &acc * &p;
                    }
                }
            }
            for (mm, cc) in acc.terms {
                out.add_term(mm.mul(&kept), cc);
            }
        }
        Ok(out)
    }

    /// Inverse of a single term built from `exp` factors.
    fn invert_monomial(&self) -> Result<Expr> {
        match self.terms.iter().next() {
            Some((m, c))
                if self.terms.len() == 1 && m.factors().iter().all(|(a, _)| matches!(a, Atom::Exp(_))) =>
            {
                let inv = Monomial(m.factors().iter().map(|(a, k)| (a.clone(), -k)).collect());
                Ok(Expr::term(c.recip(), inv))
            }
            _ => Err(Error::UnsupportedForm(
                "negative power of a non-monomial binding".into(),
            )),
        }
    }

    /// Groups terms by their factor on `parametric` atoms. Re-summing
    /// `key * value` over the result gives back `self`.
    pub fn collect(&self, parametric: &BTreeSet<Atom>) -> BTreeMap<Monomial, Expr> {
        self.split_by(|a| parametric.contains(a))
    }

    pub fn split_by(&self, is_parametric: impl Fn(&Atom) -> bool) -> BTreeMap<Monomial, Expr> {
        let mut out: BTreeMap<Monomial, Expr> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (key, rest) = m.split(&is_parametric);
            out.entry(key).or_default().add_term(rest, c.clone());
        }
        out
    }

    /// Evaluates with every atom looked up in `point`.
    pub fn evaluate<S: Scalar>(&self, point: &HashMap<Atom, S>) -> Result<S> {
        self.evaluate_with(|a| point.get(a).cloned())
    }

    pub fn evaluate_with<S: Scalar>(&self, lookup: impl Fn(&Atom) -> Option<S>) -> Result<S> {
        let mut total = S::zero_scalar();
        for (m, c) in &self.terms {
            let mut t = S::from_rational(c);
            for (a, k) in m.factors() {
                let v = lookup(a).ok_or_else(|| Error::MissingBinding(format!("{a:?}")))?;
                t = t.mul_scalar(&v.powi(*k)?);
            }
            total = total.add_scalar(&t);
        }
        Ok(total)
    }

    pub fn to_raw(&self) -> RawExpr {
        RawExpr::Add(
            self.terms
                .iter()
                .map(|(m, c)| {
                    let mut factors = vec![RawExpr::Num(c.clone())];
                    for (a, k) in m.factors() {
                        factors.push(RawExpr::Pow(Box::new(RawExpr::Atom(a.clone())), *k as i64));
                    }
                    RawExpr::Mul(factors)
                })
                .collect(),
        )
    }

    pub fn display<'a>(&'a self, names: &'a dyn Namer) -> ExprDisplay<'a> {
        ExprDisplay { e: self, names }
    }

    /// Text form using `names`; parses back to the same expression.
    pub fn to_text(&self, names: &dyn Namer) -> String {
        self.display(names).to_string()
    }
}

pub struct ExprDisplay<'a> {
    e: &'a Expr,
    names: &'a dyn Namer,
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.e.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.e.terms.iter().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let abs = c.abs();
            if m.is_one() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{}", m.display(self.names))?;
            } else {
                write!(f, "{abs}*{}", m.display(self.names))?;
            }
        }
        Ok(())
    }
}

impl From<Atom> for Expr {
    fn from(a: Atom) -> Self {
        Expr::atom(a)
    }
}

impl From<Rational> for Expr {
    fn from(c: Rational) -> Self {
        Expr::constant(c)
    }
}

impl<'a> Add<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn add(self, rhs: &'a Expr) -> Expr {
        let (big, small) = if self.terms.len() >= rhs.terms.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn sub(self, rhs: &'a Expr) -> Expr {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn mul(self, rhs: &'a Expr) -> Expr {
        let mut out = Expr::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(mut self) -> Expr {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl AddAssign<&Expr> for Expr {
    fn add_assign(&mut self, rhs: &Expr) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl AddAssign<Expr> for Expr {
    fn add_assign(&mut self, rhs: Expr) {
        if self.terms.len() < rhs.terms.len() {
            let lhs = std::mem::replace(self, rhs);
            for (m, c) in lhs.terms {
                self.add_term(m, c);
            }
        } else {
            for (m, c) in rhs.terms {
                self.add_term(m, c);
            }
        }
    }
}

impl SubAssign<&Expr> for Expr {
    fn sub_assign(&mut self, rhs: &Expr) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Add<Expr> for Expr {
    type Output = Expr;
    fn add(mut self, rhs: Expr) -> Expr {
        self += rhs;
        self
    }
}

impl<'a> Add<&'a Expr> for Expr {
    type Output = Expr;
    fn add(mut self, rhs: &'a Expr) -> Expr {
        self += rhs;
        self
    }
}

impl Add<Expr> for &Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        rhs + self
    }
}

impl Sub<Expr> for Expr {
    type Output = Expr;
    fn sub(mut self, rhs: Expr) -> Expr {
        self -= &rhs;
        self
    }
}

impl<'a> Sub<&'a Expr> for Expr {
    type Output = Expr;
    fn sub(mut self, rhs: &'a Expr) -> Expr {
        self -= rhs;
        self
    }
}

impl Sub<Expr> for &Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        -rhs + self
    }
}

impl Mul<Expr> for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        &self * &rhs
    }
}

impl<'a> Mul<&'a Expr> for Expr {
    type Output = Expr;
    fn mul(self, rhs: &'a Expr) -> Expr {
        &self * rhs
    }
}

impl Mul<Expr> for &Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        self * &rhs
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        let mut acc = Expr::zero();
        for e in iter {
            for (m, c) in e.terms {
                acc.add_term(m, c);
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::{int, CoordId, FuncId, FuncSymbol, RawNames};

    fn c(i: u32) -> Expr {
        Expr::atom(Atom::Coord(CoordId(i)))
    }

    #[test]
    fn difference_of_squares() {
        let (p, rho) = (c(0), c(1));
        let lhs = (&p + &rho) * (&p - &rho);
        let rhs = &p * &p - &rho * &rho;
        assert_eq!(lhs, rhs);
        assert_eq!(lhs.len(), 2);
    }

    #[test]
    fn cancellation_gives_empty_sum() {
        let p = c(0);
        let e = &p + &p.scale(&int(-1));
        assert!(e.is_zero());
        assert_eq!(e.to_text(&RawNames), "0");
    }

    #[test]
    fn commutative_merge() {
        let (rho, u) = (c(1), c(2));
        let e = (&rho * &u).scale(&int(2)) + (&u * &rho).scale(&int(3));
        assert_eq!(e, (&rho * &u).scale(&int(5)));
    }

    #[test]
    fn chain_rule_through_function_symbol() {
        let g = FuncSymbol::new(FuncId(0), vec![CoordId(0), CoordId(1)]);
        let e = Expr::atom(Atom::Func(g.clone()));
        let d = e.diff_partial(&Atom::Coord(CoordId(1))).unwrap();
        assert_eq!(d, Expr::atom(Atom::deriv(&g, &[CoordId(1)]).unwrap()));
        assert!(e.diff_partial(&Atom::Coord(CoordId(5))).unwrap().is_zero());
        // explicit derivative does not see through the function symbol
        assert!(e.diff_atom(&Atom::Coord(CoordId(1))).is_zero());
    }

    #[test]
    fn exp_atoms_invert() {
        let e = Expr::exp_power("a", 2) * Expr::exp_power("a", -2);
        assert_eq!(e, Expr::one());
        let mut b = BTreeMap::new();
        b.insert(Atom::Coord(CoordId(0)), Expr::exp_power("a", 1).scale(&int(2)));
        let x = Expr::term(
            int(1),
            Monomial::power(Atom::Coord(CoordId(0)), 2).unwrap(),
        );
        assert_eq!(x.replace(&b).unwrap(), Expr::exp_power("a", 2).scale(&int(4)));
    }

    #[test]
    fn cyclic_binding_is_rejected() {
        let mut b = BTreeMap::new();
        b.insert(Atom::Coord(CoordId(0)), &c(0) + &c(1));
        assert!(matches!(c(0).substitute(&b), Err(Error::CyclicSubstitution(_))));
        assert_eq!(c(0).replace(&b).unwrap(), &c(0) + &c(1));
    }

    #[test]
    fn missing_binding() {
        let pt: HashMap<Atom, f64> = HashMap::new();
        assert!(matches!(c(0).evaluate(&pt), Err(Error::MissingBinding(_))));
    }
}
