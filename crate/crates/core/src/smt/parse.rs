//! Reader for solver responses: the `sat`/`unsat`/`unknown` line and the
//! `(get-model)` answer.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Atom(String),
    List(Vec<SExpr>),
}

impl SExpr {
    fn atom(&self) -> Option<&str> {
        match self {
            Self::Atom(s) => Some(s),
            Self::List(_) => None,
        }
    }
}

/// Parse a sequence of s-expressions. `;` comments, `|quoted|` symbols and
/// `"strings"` are understood.
pub fn parse_sexprs(text: &str) -> Result<Vec<SExpr>> {
    let mut stack: Vec<Vec<SExpr>> = alloc::vec![Vec::new()];
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        match c {
            '(' => stack.push(Vec::new()),
            ')' => {
                let list = stack.pop().filter(|_| !stack.is_empty()).ok_or_else(|| {
                    Error::Decode(format!("unbalanced ')' at byte {i}"))
                })?;
                stack.last_mut().unwrap().push(SExpr::List(list));
            }
            ';' => {
                for (_, c) in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            c if c.is_whitespace() => {}
            '|' | '"' => {
                let close = c;
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some((_, x)) if x == close => {
                            // "" is an escaped quote inside strings
                            if close == '"' && matches!(chars.peek(), Some((_, '"'))) {
                                chars.next();
                                s.push('"');
                            } else {
                                break;
                            }
                        }
                        Some((_, x)) => s.push(x),
                        None => return Err(Error::Decode("unterminated literal".into())),
                    }
                }
                stack.last_mut().unwrap().push(SExpr::Atom(s));
            }
            _ => {
                let mut s = String::new();
                s.push(c);
                while let Some(&(_, x)) = chars.peek() {
                    if x.is_whitespace() || x == '(' || x == ')' || x == ';' {
                        break;
                    }
                    s.push(x);
                    chars.next();
                }
                stack.last_mut().unwrap().push(SExpr::Atom(s));
            }
        }
    }
    if stack.len() != 1 {
        return Err(Error::Decode("unbalanced '('".into()));
    }
    Ok(stack.pop().unwrap())
}

/// Exact rational `num / den` with `den > 0`, in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rational {
    pub num: BigInt,
    pub den: BigInt,
}

impl Rational {
    pub fn new(num: BigInt, den: BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Decode("zero denominator".into()));
        }
        let g = num.gcd(&den);
        let sign = if den.is_negative() { -BigInt::one() } else { BigInt::one() };
        Ok(Self {
            num: sign.clone() * num / &g,
            den: sign * den / g,
        })
    }

    pub fn integer(n: BigInt) -> Self {
        Self {
            num: n,
            den: BigInt::one(),
        }
    }

    /// Exact value of a finite double.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite());
        if x == 0.0 {
            return Self::integer(BigInt::zero());
        }
        let bits = x.to_bits();
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let fraction = bits & ((1u64 << 52) - 1);
        let (m, e) = if biased == 0 {
            (fraction, -1074)
        } else {
            (fraction | (1 << 52), biased - 1075)
        };
        let mut num = BigInt::from(m);
        if bits >> 63 == 1 {
            num = -num;
        }
        if e >= 0 {
            Self::integer(num << e as usize)
        } else {
            Self::new(num, BigInt::one() << (-e) as usize).unwrap()
        }
    }

    fn parse_decimal(s: &str) -> Option<Self> {
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if int.is_empty() || !int.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        if !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let digits = format!("{int}{frac}");
        let num: BigInt = digits.parse().ok()?;
        let den = num_traits::pow(BigInt::from(10u8), frac.len());
        Self::new(num, den).ok()
    }
}

/// A constant from a solver model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Bool(bool),
    Int(BigInt),
    Real(Rational),
}

impl Value {
    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Self::Int(i) => Some(i),
            _ => None,
        }
    }
}

pub type Assignment = BTreeMap<String, Value>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverStatus {
    Sat,
    Unsat,
    Unknown,
}

impl SolverStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Sat => "sat",
            Self::Unsat => "unsat",
            Self::Unknown => "unknown",
        }
    }
}

fn numeric(e: &SExpr) -> Result<Rational> {
    match e {
        SExpr::Atom(a) => Rational::parse_decimal(a)
            .ok_or_else(|| Error::Decode(format!("not a numeral: {a}"))),
        SExpr::List(items) => match items.as_slice() {
            [op, x] if op.atom() == Some("-") => {
                let r = numeric(x)?;
                Ok(Rational {
                    num: -r.num,
                    den: r.den,
                })
            }
            [op, a, b] if op.atom() == Some("/") => {
                let (a, b) = (numeric(a)?, numeric(b)?);
                Rational::new(a.num * b.den, a.den * b.num)
            }
            _ => Err(Error::Decode(format!("unsupported value term {e:?}"))),
        },
    }
}

fn value(sort: &SExpr, e: &SExpr) -> Result<Value> {
    match sort.atom() {
        Some("Bool") => match e.atom() {
            Some("true") => Ok(Value::Bool(true)),
            Some("false") => Ok(Value::Bool(false)),
            _ => Err(Error::Decode(format!("bad Bool value {e:?}"))),
        },
        Some("Int") => {
            let r = numeric(e)?;
            if r.den != BigInt::one() {
                return Err(Error::Decode(format!("fractional Int value {e:?}")));
            }
            Ok(Value::Int(r.num))
        }
        Some("Real") => numeric(e).map(Value::Real),
        _ => Err(Error::Decode(format!("unsupported sort {sort:?}"))),
    }
}

fn collect_definitions(items: &[SExpr], into: &mut Assignment) -> Result<()> {
    for item in items {
        let SExpr::List(def) = item else {
            return Err(Error::Decode(format!("unexpected model entry {item:?}")));
        };
        match def.as_slice() {
            [head, SExpr::Atom(name), SExpr::List(args), sort, body]
                if head.atom() == Some("define-fun") && args.is_empty() =>
            {
                into.insert(name.clone(), value(sort, body)?);
            }
            // functions with arguments never occur in our queries
            [head, ..] if head.atom() == Some("define-fun") => {}
            _ => return Err(Error::Decode(format!("unexpected model entry {item:?}"))),
        }
    }
    Ok(())
}

/// Status token plus, for `sat`, the constants of the printed model.
///
/// Anything before the status token (warnings, echoed output) is ignored;
/// a `sat` answer without a model yields an empty assignment.
pub fn parse_solver_output(text: &str) -> Result<(SolverStatus, Option<Assignment>)> {
    let exprs = parse_sexprs(text)?;
    let mut rest = exprs.iter();
    let status = rest
        .by_ref()
        .find_map(|e| match e.atom() {
            Some("sat") => Some(SolverStatus::Sat),
            Some("unsat") => Some(SolverStatus::Unsat),
            Some("unknown") => Some(SolverStatus::Unknown),
            _ => None,
        })
        .ok_or_else(|| Error::Decode("no sat/unsat/unknown in solver output".to_string()))?;
    if status != SolverStatus::Sat {
        return Ok((status, None));
    }

    let mut assignment = Assignment::new();
    for e in rest {
        let SExpr::List(items) = e else { continue };
        let body = match items.first().and_then(SExpr::atom) {
            Some("model") => &items[1..],
            Some("error") => {
                return Err(Error::Decode(format!("solver error {:?}", items.get(1))));
            }
            _ => &items[..],
        };
        collect_definitions(body, &mut assignment)?;
        break;
    }
    Ok((status, Some(assignment)))
}
