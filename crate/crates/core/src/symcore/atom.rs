use std::cmp::Ordering;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Registry id of a coordinate (independent, dependent or jet variable).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoordId(pub u32);

/// Registry id of a function symbol (an arbitrary element).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FuncId(pub u32);

/// A function symbol together with its declared argument coordinates.
///
/// Identity is the id alone; the argument list is fixed at registration.
#[derive(Clone, Debug)]
pub struct FuncSymbol {
    pub id: FuncId,
    pub args: Arc<[CoordId]>,
}

impl FuncSymbol {
    pub fn new(id: FuncId, args: impl Into<Arc<[CoordId]>>) -> Self {
        FuncSymbol { id, args: args.into() }
    }

    pub fn has_arg(&self, c: CoordId) -> bool {
        self.args.contains(&c)
    }
}

impl PartialEq for FuncSymbol {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for FuncSymbol {}

impl Hash for FuncSymbol {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state)
    }
}

/// Indivisible factor of a monomial.
///
/// Ordering is lexicographic on (kind, registry id, derivative multiset);
/// symbols sort by name after every registry atom.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    Coord(CoordId),
    /// Application of an arbitrary element to its declared arguments.
    Func(FuncSymbol),
    /// Formal partial derivative of a function symbol. The multiset is
    /// stored sorted, so mixed derivatives in any order are one atom.
    Deriv(FuncSymbol, Arc<[CoordId]>),
    /// Free constant (unknown ansatz coefficient, group parameter).
    Symbol(Arc<str>),
    /// `exp(name)`; the only atom allowed a negative exponent.
    Exp(Arc<str>),
}

impl Atom {
    pub fn symbol(name: &str) -> Atom {
        Atom::Symbol(Arc::from(name))
    }

    pub fn exp(name: &str) -> Atom {
        Atom::Exp(Arc::from(name))
    }

    /// Formal derivative of `f` by the multiset `wrt`.
    pub fn deriv(f: &FuncSymbol, wrt: &[CoordId]) -> Result<Atom> {
        if wrt.is_empty() {
            return Ok(Atom::Func(f.clone()));
        }
        if let Some(bad) = wrt.iter().find(|c| !f.has_arg(**c)) {
            return Err(Error::InvalidDerivative(format!(
                "coordinate #{} is not an argument of function #{}",
                bad.0, f.id.0
            )));
        }
        let mut ms = wrt.to_vec();
        ms.sort_unstable();
        Ok(Atom::Deriv(f.clone(), ms.into()))
    }

    fn kind_rank(&self) -> u8 {
        match self {
            Atom::Coord(_) => 0,
            Atom::Func(_) => 1,
            Atom::Deriv(..) => 2,
            Atom::Symbol(_) => 3,
            Atom::Exp(_) => 4,
        }
    }

    pub fn as_coord(&self) -> Option<CoordId> {
        match self {
            Atom::Coord(c) => Some(*c),
            _ => None,
        }
    }

    /// True for free constants (symbols and exponentials).
    pub fn is_constant_symbol(&self) -> bool {
        matches!(self, Atom::Symbol(_) | Atom::Exp(_))
    }

    /// Partial derivative of this atom by a coordinate, chaining through
    /// function symbols. `None` means zero, `Some(None)` means one.
    pub(crate) fn partial_by(&self, c: CoordId) -> Option<Option<Atom>> {
        match self {
            Atom::Coord(id) if *id == c => Some(None),
            Atom::Func(f) if f.has_arg(c) => Some(Some(Atom::Deriv(f.clone(), Arc::from([c])))),
            Atom::Deriv(f, ms) if f.has_arg(c) => {
                let mut v = ms.to_vec();
                let pos = v.partition_point(|x| *x <= c);
                v.insert(pos, c);
                Some(Some(Atom::Deriv(f.clone(), v.into())))
            }
            _ => None,
        }
    }
}

impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        self.kind_rank().cmp(&other.kind_rank()).then_with(|| match (self, other) {
            (Atom::Coord(a), Atom::Coord(b)) => a.cmp(b),
            (Atom::Func(a), Atom::Func(b)) => a.id.cmp(&b.id),
            (Atom::Deriv(a, ma), Atom::Deriv(b, mb)) => {
                a.id.cmp(&b.id).then_with(|| ma.cmp(mb))
            }
            (Atom::Symbol(a), Atom::Symbol(b)) | (Atom::Exp(a), Atom::Exp(b)) => a.cmp(b),
            _ => Ordering::Equal,
        })
    }
}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Names atoms for printing. Symbols and exponentials name themselves.
pub trait Namer {
    fn registry_name(&self, atom: &Atom) -> Option<String>;

    fn atom_name(&self, atom: &Atom) -> String {
        match atom {
            Atom::Symbol(s) => s.to_string(),
            Atom::Exp(s) => format!("exp({s})"),
            other => self.registry_name(other).unwrap_or_else(|| match other {
                Atom::Coord(c) => format!("c#{}", c.0),
                Atom::Func(f) => format!("f#{}", f.id.0),
                Atom::Deriv(f, ms) => {
                    let ids: Vec<String> = ms.iter().map(|c| c.0.to_string()).collect();
                    format!("f#{}_d_{}", f.id.0, ids.join("_"))
                }
                _ => unreachable!(),
            }),
        }
    }
}

/// Fallback namer that prints raw ids.
pub struct RawNames;

impl Namer for RawNames {
    fn registry_name(&self, _atom: &Atom) -> Option<String> {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> FuncSymbol {
        FuncSymbol::new(FuncId(0), vec![CoordId(3), CoordId(4)])
    }

    #[test]
    fn mixed_derivatives_are_one_atom() {
        let a = Atom::deriv(&g(), &[CoordId(3), CoordId(4)]).unwrap();
        let b = Atom::deriv(&g(), &[CoordId(4), CoordId(3)]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn derivative_by_non_argument_is_rejected() {
        assert!(Atom::deriv(&g(), &[CoordId(7)]).is_err());
    }

    #[test]
    fn kind_order() {
        let c = Atom::Coord(CoordId(99));
        let f = Atom::Func(g());
        let d = Atom::deriv(&g(), &[CoordId(3)]).unwrap();
        let s = Atom::symbol("a");
        assert!(c < f && f < d && d < s && s < Atom::exp("a"));
    }
}
