//! Exact-arithmetic polynomial expressions over symbolic atoms.
//!
//! An [`Expr`] is a finite sum of rational multiples of monomials, kept in
//! canonical form: no zero coefficients, no repeated monomials, terms sorted
//! by the monomial order. Two expressions are equal iff their canonical forms
//! are structurally equal, so zero-testing is exact.
//!
//! Atoms come in five kinds: coordinates, arbitrary-element applications,
//! formal derivatives of those, free symbols and `exp(name)` factors. The
//! atom order is (kind, registry id, derivative multiset); monomials compare
//! lexicographically as sorted `(atom, exponent)` sequences.

mod atom;
mod expr;
mod raw;
mod scalar;

pub use atom::{Atom, CoordId, FuncId, FuncSymbol, Namer, RawNames};
pub use expr::{Expr, Monomial};
pub use raw::{normalize, RawExpr};
pub use scalar::Scalar;

pub type Rational = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}
