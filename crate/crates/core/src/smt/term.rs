use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write};

use num_bigint::BigUint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sort {
    Int,
    Real,
    Bool,
}

impl Sort {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Int => "Int",
            Self::Real => "Real",
            Self::Bool => "Bool",
        }
    }
}

/// Index into [`super::ConstraintSystem::decls`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

/// Quantifier-free formula over integer, real and boolean terms.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Bool(bool),
    Int(i64),
    /// A finite binary64 value, emitted as its exact decimal expansion.
    Real(f64),
    Var(VarId),
    Add(Vec<Term>),
    Sub(Box<Term>, Box<Term>),
    Le(Box<Term>, Box<Term>),
    Ge(Box<Term>, Box<Term>),
    Eq(Box<Term>, Box<Term>),
    Not(Box<Term>),
    And(Vec<Term>),
    Or(Vec<Term>),
    Ite(Box<Term>, Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(id: VarId) -> Self {
        Self::Var(id)
    }

    pub fn le(a: Term, b: Term) -> Self {
        Self::Le(Box::new(a), Box::new(b))
    }

    pub fn ge(a: Term, b: Term) -> Self {
        Self::Ge(Box::new(a), Box::new(b))
    }

    pub fn eq(a: Term, b: Term) -> Self {
        Self::Eq(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Term, b: Term) -> Self {
        Self::Sub(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Term) -> Self {
        Self::Not(Box::new(a))
    }

    pub fn ite(c: Term, a: Term, b: Term) -> Self {
        Self::Ite(Box::new(c), Box::new(a), Box::new(b))
    }

    /// Sum; a single summand is returned unwrapped.
    pub fn add(mut terms: Vec<Term>) -> Self {
        assert!(!terms.is_empty(), "empty sum has no sort");
        if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Self::Add(terms)
        }
    }

    /// Conjunction; `true` when empty.
    pub fn and(mut terms: Vec<Term>) -> Self {
        match terms.len() {
            0 => Self::Bool(true),
            1 => terms.pop().unwrap(),
            _ => Self::And(terms),
        }
    }

    /// Disjunction; `false` when empty.
    pub fn or(mut terms: Vec<Term>) -> Self {
        match terms.len() {
            0 => Self::Bool(false),
            1 => terms.pop().unwrap(),
            _ => Self::Or(terms),
        }
    }

    /// Visit every variable occurrence.
    pub fn for_each_var(&self, f: &mut impl FnMut(VarId)) {
        match self {
            Self::Bool(_) | Self::Int(_) | Self::Real(_) => {}
            Self::Var(v) => f(*v),
            Self::Add(ts) | Self::And(ts) | Self::Or(ts) => ts.iter().for_each(|t| t.for_each_var(f)),
            Self::Sub(a, b) | Self::Le(a, b) | Self::Ge(a, b) | Self::Eq(a, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
            Self::Not(a) => a.for_each_var(f),
            Self::Ite(c, a, b) => {
                c.for_each_var(f);
                a.for_each_var(f);
                b.for_each_var(f);
            }
        }
    }

    /// Write in SMT-LIB 2 syntax, resolving variables through `name`.
    pub fn write_smtlib<'a, W: Write>(
        &self,
        out: &mut W,
        name: &dyn Fn(VarId) -> &'a str,
    ) -> fmt::Result {
        let nary = |out: &mut W, op: &str, ts: &[Term]| -> fmt::Result {
            write!(out, "({op}")?;
            for t in ts {
                out.write_char(' ')?;
                t.write_smtlib(out, name)?;
            }
            out.write_char(')')
        };
        match self {
            Self::Bool(b) => write!(out, "{b}"),
            Self::Int(i) if *i < 0 => write!(out, "(- {})", i.unsigned_abs()),
            Self::Int(i) => write!(out, "{i}"),
            Self::Real(x) => out.write_str(&exact_decimal(*x)),
            Self::Var(v) => out.write_str(name(*v)),
            Self::Add(ts) => nary(out, "+", ts),
            Self::And(ts) => nary(out, "and", ts),
            Self::Or(ts) => nary(out, "or", ts),
            Self::Sub(a, b) => binary(out, "-", a, b, name),
            Self::Le(a, b) => binary(out, "<=", a, b, name),
            Self::Ge(a, b) => binary(out, ">=", a, b, name),
            Self::Eq(a, b) => binary(out, "=", a, b, name),
            Self::Not(a) => {
                out.write_str("(not ")?;
                a.write_smtlib(out, name)?;
                out.write_char(')')
            }
            Self::Ite(c, a, b) => {
                out.write_str("(ite ")?;
                c.write_smtlib(out, name)?;
                out.write_char(' ')?;
                a.write_smtlib(out, name)?;
                out.write_char(' ')?;
                b.write_smtlib(out, name)?;
                out.write_char(')')
            }
        }
    }
}

fn binary<'a, W: Write>(
    out: &mut W,
    op: &str,
    a: &Term,
    b: &Term,
    name: &dyn Fn(VarId) -> &'a str,
) -> fmt::Result {
    write!(out, "({op} ")?;
    a.write_smtlib(out, name)?;
    out.write_char(' ')?;
    b.write_smtlib(out, name)?;
    out.write_char(')')
}

/// Exact SMT-LIB decimal literal of a finite double, e.g. `0.1` becomes
/// `0.1000000000000000055511151231257827021181583404541015625`; negative
/// values are wrapped as `(- x)`.
pub fn exact_decimal(x: f64) -> String {
    assert!(x.is_finite(), "non-finite literal {x}");
    let bits = x.to_bits();
    let negative = bits >> 63 == 1;
    let biased = ((bits >> 52) & 0x7ff) as i64;
    let fraction = bits & ((1u64 << 52) - 1);
    let (mut mantissa, mut exp) = if biased == 0 {
        (fraction, -1074)
    } else {
        (fraction | (1u64 << 52), biased - 1075)
    };
    if mantissa == 0 {
        return "0.0".to_string();
    }
    let tz = mantissa.trailing_zeros();
    mantissa >>= tz;
    exp += i64::from(tz);

    let magnitude = if exp >= 0 {
        let mut s = (BigUint::from(mantissa) << exp as usize).to_string();
        s.push_str(".0");
        s
    } else {
        // m * 2^-k = m * 5^k / 10^k; m odd, so the digit string has no trailing zero
        let k = (-exp) as usize;
        let digits = (BigUint::from(mantissa) * BigUint::from(5u8).pow(k as u32)).to_string();
        let mut s = String::with_capacity(digits.len() + k + 2);
        if digits.len() <= k {
            s.push_str("0.");
            s.extend(core::iter::repeat_n('0', k - digits.len()));
            s.push_str(&digits);
        } else {
            let (int, frac) = digits.split_at(digits.len() - k);
            s.push_str(int);
            s.push('.');
            s.push_str(frac);
        }
        s
    };
    if negative {
        alloc::format!("(- {magnitude})")
    } else {
        magnitude
    }
}
