use super::atom::Atom;
use super::expr::{Expr, Monomial};
use super::Rational;
use crate::error::{Error, Result};

/// Unnormalized expression tree, as produced by the parser or by callers
/// assembling formulas by hand.
#[derive(Clone, Debug, PartialEq)]
pub enum RawExpr {
    Atom(Atom),
    Num(Rational),
    Add(Vec<RawExpr>),
    Mul(Vec<RawExpr>),
    Neg(Box<RawExpr>),
    Pow(Box<RawExpr>, i64),
}

impl RawExpr {
    pub fn pow(self, k: i64) -> RawExpr {
        RawExpr::Pow(Box::new(self), k)
    }
}

/// Brings a tree into canonical form.
///
/// Exponents must be non-negative integers, except on a bare `exp(..)` atom.
pub fn normalize(raw: &RawExpr) -> Result<Expr> {
    match raw {
        RawExpr::Atom(a) => Ok(Expr::atom(a.clone())),
        RawExpr::Num(c) => Ok(Expr::constant(c.clone())),
        RawExpr::Add(xs) => {
            let mut acc = Expr::zero();
            for x in xs {
                acc = &acc + &normalize(x)?;
            }
            Ok(acc)
        }
        RawExpr::Mul(xs) => {
            let mut acc = Expr::one();
            for x in xs {
                acc = &acc * &normalize(x)?;
            }
            Ok(acc)
        }
        RawExpr::Neg(x) => Ok(-normalize(x)?),
        RawExpr::Pow(base, k) => {
            let k32 = i32::try_from(*k)
                .map_err(|_| Error::UnsupportedForm(format!("exponent {k} out of range")))?;
            if k32 < 0 {
                if let RawExpr::Atom(a @ Atom::Exp(_)) = base.as_ref() {
                    return Ok(Expr::term(Rational::from_integer(1.into()), Monomial::power(a.clone(), k32)?));
                }
                return Err(Error::UnsupportedForm(format!("negative exponent {k}")));
            }
            Ok(normalize(base)?.pow(k32 as u32))
        }
    }
}
