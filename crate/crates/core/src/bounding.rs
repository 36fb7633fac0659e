//! Non-decreasing control functions and the classes they generate.
//!
//! A [`BoundingFunction`] is a symbolic non-decreasing function on the
//! non-negative rationals: a constant, a linear `a·x + b`, a polynomial with
//! non-negative coefficients, a simple exponential `c·a^x` with `a >= 1`, or a
//! composition chain of those. A [`BoundingClass`] is a finitely generated
//! family of such functions together with closure flags; closure is realised
//! by *witness-producing* operations ([`BoundingClass::dominator`]) rather
//! than a membership predicate over an infinite set.

use crate::rat::{self, ceil_int, pow_checked, rat, NumError, Rat};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::fmt;
use thiserror::Error;

/// Bit budget for a single evaluation result; towers beyond this are refused.
pub const EVAL_BIT_BUDGET: u64 = 1 << 24;

#[derive(Debug, Error, PartialEq, Clone)]
pub enum BoundingError {
    #[error("parameter must be non-negative: {0}")]
    NegativeParameter(String),
    #[error("exponential base must be >= 1, got {0}")]
    BaseBelowOne(String),
    #[error("evaluation at negative input {0} rejected")]
    NegativeInput(String),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error("expression is not a member of class {0}")]
    NotAMember(String),
    #[error("composition with a non-linear right factor is not permitted in class {0}")]
    ComposeNotPermitted(String),
    #[error("no dominator of the requested kind exists in class {0}: {1}")]
    NoDominator(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundingFunction {
    /// `c`
    Constant(Rat),
    /// `a·x + b`
    Linear { a: Rat, b: Rat },
    /// `sum coeffs[i]·x^i`, coefficients listed from degree 0 upward
    Polynomial(Vec<Rat>),
    /// `scale · base^x`, exact at integer arguments; non-integer arguments
    /// are rounded up, which preserves upper bounds since the function is
    /// non-decreasing
    Exponential { scale: Rat, base: Rat },
    /// Pipeline: `stages[0]` is applied first
    Chain(Vec<BoundingFunction>),
}

use BoundingFunction::*;

impl fmt::Display for BoundingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant(c) => write!(f, "{}", rat::rat_string(c)),
            Linear { a, b } => write!(f, "{}·x + {}", rat::rat_string(a), rat::rat_string(b)),
            Polynomial(cs) => {
                let terms: Vec<String> = cs
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(i, c)| match i {
                        0 => rat::rat_string(c),
                        1 => format!("{}·x", rat::rat_string(c)),
                        _ => format!("{}·x^{}", rat::rat_string(c), i),
                    })
                    .collect();
                if terms.is_empty() {
                    write!(f, "0")
                } else {
                    write!(f, "{}", terms.join(" + "))
                }
            }
            Exponential { scale, base } => {
                write!(f, "{}·{}^x", rat::rat_string(scale), rat::rat_string(base))
            }
            Chain(stages) => {
                let parts: Vec<String> = stages.iter().map(|s| format!("({s})")).collect();
                write!(f, "{}", parts.join(" then "))
            }
        }
    }
}

pub fn constant(c: i64) -> BoundingFunction {
    Constant(rat(c))
}

/// The identity `x`, the weighted-l1 index function.
pub fn identity() -> BoundingFunction {
    Linear {
        a: rat(1),
        b: rat(0),
    }
}

pub fn linear(a: i64, b: i64) -> BoundingFunction {
    Linear { a: rat(a), b: rat(b) }
}

/// `x^k`
pub fn monomial(k: usize) -> BoundingFunction {
    let mut cs = vec![rat(0); k + 1];
    cs[k] = rat(1);
    BoundingFunction::Polynomial(cs).normalized()
}

pub fn exponential(scale: i64, base: i64) -> BoundingFunction {
    Exponential {
        scale: rat(scale),
        base: rat(base),
    }
}

impl BoundingFunction {
    /// Checks the parameter invariants: everything non-negative, bases >= 1.
    pub fn validate(&self) -> Result<(), BoundingError> {
        match self {
            Constant(c) => {
                if c.is_negative() {
                    return Err(BoundingError::NegativeParameter(rat::rat_string(c)));
                }
            }
            Linear { a, b } => {
                for p in [a, b] {
                    if p.is_negative() {
                        return Err(BoundingError::NegativeParameter(rat::rat_string(p)));
                    }
                }
            }
            Polynomial(cs) => {
                for p in cs {
                    if p.is_negative() {
                        return Err(BoundingError::NegativeParameter(rat::rat_string(p)));
                    }
                }
            }
            Exponential { scale, base } => {
                if scale.is_negative() {
                    return Err(BoundingError::NegativeParameter(rat::rat_string(scale)));
                }
                if base < &rat(1) {
                    return Err(BoundingError::BaseBelowOne(rat::rat_string(base)));
                }
            }
            Chain(stages) => {
                for s in stages {
                    s.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Collapses degenerate shapes: degree-<=1 polynomials, base-1
    /// exponentials, singleton and nested chains.
    pub fn normalized(self) -> BoundingFunction {
        match self {
            Polynomial(mut cs) => {
                while cs.len() > 1 && cs.last().map(Zero::is_zero).unwrap_or(false) {
                    cs.pop();
                }
                match cs.len() {
                    0 => Constant(rat(0)),
                    1 => Constant(cs.pop().unwrap()),
                    2 => {
                        let b = cs[0].clone();
                        let a = cs[1].clone();
                        Linear { a, b }
                    }
                    _ => Polynomial(cs),
                }
            }
            Linear { a, b } if a.is_zero() => Constant(b),
            Exponential { scale, base } if base.is_one() || scale.is_zero() => Constant(scale),
            Chain(stages) => {
                let mut flat = Vec::new();
                for s in stages {
                    match s.normalized() {
                        Chain(inner) => flat.extend(inner),
                        other => flat.push(other),
                    }
                }
                match flat.len() {
                    0 => identity(),
                    1 => flat.pop().unwrap(),
                    _ => Chain(flat),
                }
            }
            other => other,
        }
    }

    /// Exact evaluation at `x >= 0`. Exponential stages evaluate at `ceil(x)`
    /// when `x` is not an integer. Fails on negative input or when the result
    /// would exceed the bit budget.
    pub fn eval(&self, x: &Rat) -> Result<Rat, BoundingError> {
        if x.is_negative() {
            return Err(BoundingError::NegativeInput(rat::rat_string(x)));
        }
        self.eval_unchecked(x)
    }

    fn eval_unchecked(&self, x: &Rat) -> Result<Rat, BoundingError> {
        Ok(match self {
            Constant(c) => c.clone(),
            Linear { a, b } => a * x + b,
            Polynomial(cs) => {
                // Horner, exact
                let mut acc = Rat::zero();
                for c in cs.iter().rev() {
                    acc = acc * x + c;
                }
                acc
            }
            Exponential { scale, base } => {
                let e: BigInt = ceil_int(x);
                scale * pow_checked(base, &e, EVAL_BIT_BUDGET)?
            }
            Chain(stages) => {
                let mut acc = x.clone();
                for s in stages {
                    acc = s.eval_unchecked(&acc)?;
                }
                acc
            }
        })
    }

    /// Exact symbolic `x -> self(k·x)` for a non-negative integer factor `k`;
    /// stays within the same kind.
    pub fn scale_argument(&self, k: u32) -> BoundingFunction {
        let kq = rat(k as i64);
        match self {
            Constant(c) => Constant(c.clone()),
            Linear { a, b } => Linear {
                a: a * &kq,
                b: b.clone(),
            },
            Polynomial(cs) => {
                let mut factor = Rat::one();
                let scaled = cs
                    .iter()
                    .map(|c| {
                        let out = c * &factor;
                        factor *= &kq;
                        out
                    })
                    .collect();
                Polynomial(scaled).normalized()
            }
            Exponential { scale, base } => Exponential {
                scale: scale.clone(),
                base: pow_checked(base, &BigInt::from(k), EVAL_BIT_BUDGET)
                    .expect("small power"),
            },
            Chain(stages) => {
                let mut out = stages.clone();
                out[0] = out[0].scale_argument(k);
                Chain(out).normalized()
            }
        }
    }

    /// Exact symbolic `x -> k·self(x)` for a non-negative rational factor.
    pub fn scale_output(&self, k: &Rat) -> BoundingFunction {
        assert!(!k.is_negative());
        match self {
            Constant(c) => Constant(c * k),
            Linear { a, b } => Linear { a: a * k, b: b * k },
            Polynomial(cs) => Polynomial(cs.iter().map(|c| c * k).collect()).normalized(),
            Exponential { scale, base } => Exponential {
                scale: scale * k,
                base: base.clone(),
            },
            Chain(stages) => {
                let mut out = stages.clone();
                let last = out.len() - 1;
                out[last] = out[last].scale_output(k);
                Chain(out).normalized()
            }
        }
    }

    /// A function of the same kind with `g(x) >= self(x) + 1` pointwise:
    /// polynomial kinds gain 1 exactly, exponentials bump their scale
    /// (sound because `base^x >= 1`), chains bump the outermost stage.
    pub fn strict_bump(&self) -> BoundingFunction {
        match self {
            Constant(c) => Constant(c + rat(1)),
            Linear { a, b } => Linear {
                a: a.clone(),
                b: b + rat(1),
            },
            Polynomial(cs) => {
                let mut out = cs.clone();
                out[0] += rat(1);
                Polynomial(out)
            }
            Exponential { scale, base } => Exponential {
                scale: scale + rat(1),
                base: base.clone(),
            },
            Chain(stages) => {
                let mut out = stages.clone();
                let last = out.len() - 1;
                out[last] = out[last].strict_bump();
                Chain(out).normalized()
            }
        }
    }

    /// `x -> self(x) + c`.
    pub fn add_constant(&self, c: &Rat) -> BoundingFunction {
        assert!(!c.is_negative());
        match self {
            Constant(v) => Constant(v + c),
            Linear { a, b } => Linear {
                a: a.clone(),
                b: b + c,
            },
            Polynomial(cs) => {
                let mut out = cs.clone();
                out[0] += c;
                Polynomial(out)
            }
            other => Chain(vec![
                other.clone(),
                Linear {
                    a: rat(1),
                    b: c.clone(),
                },
            ])
            .normalized(),
        }
    }

    /// Exact pointwise sum where the kinds allow one; `None` otherwise.
    pub fn add_exact(&self, other: &BoundingFunction) -> Option<BoundingFunction> {
        fn coeffs(f: &BoundingFunction) -> Option<Vec<Rat>> {
            match f {
                Constant(c) => Some(vec![c.clone()]),
                Linear { a, b } => Some(vec![b.clone(), a.clone()]),
                Polynomial(cs) => Some(cs.clone()),
                _ => None,
            }
        }
        let (mut xs, ys) = (coeffs(self)?, coeffs(other)?);
        if xs.len() < ys.len() {
            xs.resize(ys.len(), Rat::zero());
        }
        for (i, y) in ys.iter().enumerate() {
            xs[i] += y;
        }
        Some(Polynomial(xs).normalized())
    }

    /// Exact symbolic composition `x -> self(other(x))` where representable
    /// in the closed kinds; `None` when only a chain could express it.
    pub fn compose_exact(&self, other: &BoundingFunction) -> Option<BoundingFunction> {
        match (self, other) {
            (Constant(c), _) => Some(Constant(c.clone())),
            (f, Constant(c)) => f.eval(c).ok().map(Constant),
            (
                Linear { a, b },
                Linear { a: a2, b: b2 },
            ) => Some(Linear {
                a: a * a2,
                b: a * b2 + b,
            }),
            (Linear { a, b }, Polynomial(cs)) => {
                let mut out: Vec<Rat> = cs.iter().map(|c| c * a).collect();
                out[0] += b;
                Some(Polynomial(out).normalized())
            }
            (Polynomial(cs), g @ (Linear { .. } | Polynomial(_))) => {
                // non-negative coefficients: expansion is exact, no cancellation
                let g_coeffs = match g {
                    Linear { a, b } => vec![b.clone(), a.clone()],
                    Polynomial(v) => v.clone(),
                    _ => unreachable!(),
                };
                let mut acc = vec![Rat::zero()];
                for c in cs.iter().rev() {
                    acc = poly_mul(&acc, &g_coeffs);
                    if acc.is_empty() {
                        acc.push(Rat::zero());
                    }
                    acc[0] += c;
                }
                Some(Polynomial(acc).normalized())
            }
            (Exponential { scale, base }, Linear { a, b }) => {
                // c·base^(a x + b) = (c·base^b)·(base^a)^x; exact when the
                // linear coefficients are integers
                if a.denom().is_one() && b.denom().is_one() {
                    let ba = pow_checked(base, a.numer(), EVAL_BIT_BUDGET).ok()?;
                    let bb = pow_checked(base, b.numer(), EVAL_BIT_BUDGET).ok()?;
                    Some(Exponential {
                        scale: scale * bb,
                        base: ba,
                    })
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Composition `self ∘ other` as a dominator: exact when possible, else a
    /// ceil-lifted exponential or an explicit chain.
    pub fn compose_dominating(&self, other: &BoundingFunction) -> BoundingFunction {
        if let Some(exact) = self.compose_exact(other) {
            return exact;
        }
        if let (Exponential { scale, base }, Linear { a, b }) = (self, other) {
            // round the linear coefficients up; sound since base >= 1
            let ba = pow_checked(base, &ceil_int(a), EVAL_BIT_BUDGET).expect("small power");
            let bb = pow_checked(base, &ceil_int(b), EVAL_BIT_BUDGET).expect("small power");
            return Exponential {
                scale: scale * bb,
                base: ba,
            };
        }
        Chain(vec![other.clone(), self.clone()]).normalized()
    }

    /// Growth summary used for symbolic comparisons: `tower` counts nested
    /// exponentials, `degree` is the polynomial degree when `tower == 0`.
    pub fn growth(&self) -> Growth {
        match self {
            Constant(_) => Growth { tower: 0, degree: 0 },
            Linear { a, .. } => Growth {
                tower: 0,
                degree: usize::from(!a.is_zero()),
            },
            Polynomial(cs) => {
                let degree = cs
                    .iter()
                    .enumerate()
                    .rev()
                    .find(|(_, c)| !c.is_zero())
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                Growth { tower: 0, degree }
            }
            Exponential { scale, base } => {
                if scale.is_zero() || base.is_one() {
                    Growth { tower: 0, degree: 0 }
                } else {
                    Growth { tower: 1, degree: 1 }
                }
            }
            Chain(stages) => {
                let mut tower = 0;
                let mut degree = 1usize;
                for s in stages {
                    let g = s.growth();
                    tower += g.tower;
                    degree = degree.saturating_mul(g.degree.max(if g.tower > 0 { 1 } else { g.degree }));
                }
                Growth { tower, degree }
            }
        }
    }

    /// Does `self(x) >= other(x)` hold for all `x >= from`, decided
    /// symbolically? `None` when the kinds do not permit a decision.
    pub fn dominates_from(&self, other: &BoundingFunction, from: &Rat) -> Option<bool> {
        let gs = self.growth();
        let go = other.growth();
        if gs.tower == 0 && go.tower == 0 {
            let d = poly_sub_coeffs(self, other)?;
            // shift to y = x - from and compare coefficientwise
            let shifted = poly_shift(&d, from);
            if shifted.iter().all(|c| !c.is_negative()) {
                return Some(true);
            }
            if shifted
                .iter()
                .rev()
                .find(|c| !c.is_zero())
                .map(Signed::is_negative)
                .unwrap_or(false)
            {
                // negative leading coefficient: fails for all large x
                return Some(false);
            }
            return None;
        }
        None
    }

    /// Does `self` eventually dominate `other` (for all large `x`)?
    pub fn eventually_dominates(&self, other: &BoundingFunction) -> Option<bool> {
        let gs = self.growth();
        let go = other.growth();
        if gs.tower > go.tower {
            return match self {
                Exponential { scale, base } => Some(!scale.is_zero() && base > &rat(1)),
                _ => Some(true),
            };
        }
        if gs.tower < go.tower {
            // a genuinely faster-growing right side cannot be dominated
            let other_real = match other {
                Exponential { scale, base } => !scale.is_zero() && base > &rat(1),
                _ => true,
            };
            if other_real {
                return Some(false);
            }
            return None;
        }
        if gs.tower == 0 {
            return match poly_sub_coeffs(self, other) {
                Some(d) => match d.iter().rev().find(|c| !c.is_zero()) {
                    Some(lead) => Some(lead.is_positive()),
                    None => Some(true),
                },
                None => None,
            };
        }
        if let (Exponential { scale: s1, base: b1 }, Exponential { scale: s2, base: b2 }) =
            (self, other)
        {
            if b1 > b2 {
                return Some(true);
            }
            if b1 == b2 {
                return Some(s1 >= s2);
            }
            return Some(s2.is_zero());
        }
        None
    }

    /// A grid upper end that keeps evaluation inside the bit budget.
    pub fn grid_cap(&self) -> Rat {
        match self.growth().tower {
            0 => rat(1 << 20),
            1 => rat(1 << 12),
            2 => rat(16),
            _ => rat(4),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Growth {
    pub tower: u32,
    pub degree: usize,
}

fn poly_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficients of `f - g` when both are polynomial-kind.
fn poly_sub_coeffs(f: &BoundingFunction, g: &BoundingFunction) -> Option<Vec<Rat>> {
    fn coeffs(f: &BoundingFunction) -> Option<Vec<Rat>> {
        match f {
            Constant(c) => Some(vec![c.clone()]),
            Linear { a, b } => Some(vec![b.clone(), a.clone()]),
            Polynomial(cs) => Some(cs.clone()),
            _ => None,
        }
    }
    let (mut xs, ys) = (coeffs(f)?, coeffs(g)?);
    if xs.len() < ys.len() {
        xs.resize(ys.len(), Rat::zero());
    }
    for (i, y) in ys.iter().enumerate() {
        xs[i] -= y;
    }
    Some(xs)
}

/// Coefficients of `p(y + shift)` in `y`.
fn poly_shift(coeffs: &[Rat], shift: &Rat) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); coeffs.len()];
    // binomial expansion; everything exact
    let mut binom_row: Vec<Vec<Rat>> = Vec::with_capacity(coeffs.len());
    for n in 0..coeffs.len() {
        let mut row = vec![Rat::one(); n + 1];
        for k in 1..n {
            row[k] = &binom_row[n - 1][k - 1] + &binom_row[n - 1][k];
        }
        binom_row.push(row);
    }
    for (n, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mut shift_pow = Rat::one();
        for k in (0..=n).rev() {
            out[k] += c * &binom_row[n][k] * &shift_pow;
            shift_pow *= shift;
        }
    }
    out
}

/// Formal combination of class members, the argument of
/// [`BoundingClass::dominator`].
#[derive(Debug, Clone, PartialEq)]
pub enum ClassExpr {
    Member(BoundingFunction),
    /// Positive rational linear combination.
    Sum(Vec<(Rat, ClassExpr)>),
    /// `Compose(f, g)` denotes `f ∘ g`.
    Compose(Box<ClassExpr>, Box<ClassExpr>),
}

impl ClassExpr {
    pub fn member(f: BoundingFunction) -> Self {
        ClassExpr::Member(f)
    }

    pub fn eval(&self, x: &Rat) -> Result<Rat, BoundingError> {
        match self {
            ClassExpr::Member(f) => f.eval(x),
            ClassExpr::Sum(terms) => {
                let mut acc = Rat::zero();
                for (c, e) in terms {
                    acc += c * e.eval(x)?;
                }
                Ok(acc)
            }
            ClassExpr::Compose(f, g) => {
                let inner = g.eval(x)?;
                f.eval(&inner)
            }
        }
    }

    fn max_tower(&self) -> u32 {
        match self {
            ClassExpr::Member(f) => f.growth().tower,
            ClassExpr::Sum(ts) => ts.iter().map(|(_, e)| e.max_tower()).max().unwrap_or(0),
            ClassExpr::Compose(f, g) => f.max_tower() + g.max_tower(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum ClassName {
    /// Linear functions `a·x + b`.
    L,
    /// Polynomials.
    P,
    /// Simple exponentials `c·a^x`.
    E,
    /// Iterated exponentials (chains of simple exponentials).
    Etilde,
    Custom,
}

impl fmt::Display for ClassName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassName::L => write!(f, "L"),
            ClassName::P => write!(f, "P"),
            ClassName::E => write!(f, "E"),
            ClassName::Etilde => write!(f, "Etilde"),
            ClassName::Custom => write!(f, "custom"),
        }
    }
}

/// Structural kinds a class admits as members.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct KindSet {
    linear: bool,
    polynomial: bool,
    exponential: bool,
    chains: bool,
}

#[derive(Debug, Clone)]
pub struct BoundingClass {
    pub name: ClassName,
    pub generators: Vec<BoundingFunction>,
    /// weakly closed under `f ∘ g` for both factors in the class
    pub full_composition: bool,
}

/// Outcome of a domination search, carrying the evidence produced.
#[derive(Debug, Clone)]
pub struct DominationEvidence {
    pub grid_points: usize,
    pub grid_skipped: usize,
    /// `Some(true)` when the comparison also holds symbolically for all
    /// large / all tested-from arguments.
    pub symbolic: Option<bool>,
}

#[derive(Debug, Clone)]
pub enum Precedence {
    /// Per generator of the left class, a dominating member of the right.
    YesWitnessed(Vec<PrecedenceWitness>),
    NoCounterexample {
        generator: BoundingFunction,
        reason: String,
    },
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct PrecedenceWitness {
    pub generator: BoundingFunction,
    pub dominator: BoundingFunction,
    pub symbolic: Option<bool>,
}

impl BoundingClass {
    pub fn linear_class() -> Self {
        BoundingClass {
            name: ClassName::L,
            generators: vec![constant(1), identity()],
            full_composition: false,
        }
    }

    pub fn polynomial_class() -> Self {
        BoundingClass {
            name: ClassName::P,
            generators: vec![constant(1), identity(), monomial(2)],
            full_composition: true,
        }
    }

    pub fn exponential_class() -> Self {
        BoundingClass {
            name: ClassName::E,
            generators: vec![constant(1), exponential(1, 2)],
            full_composition: false,
        }
    }

    pub fn iterated_exponential_class() -> Self {
        BoundingClass {
            name: ClassName::Etilde,
            generators: vec![
                constant(1),
                exponential(1, 2),
                Chain(vec![exponential(1, 2), exponential(1, 2)]),
            ],
            full_composition: true,
        }
    }

    pub fn by_name(name: ClassName) -> Self {
        match name {
            ClassName::L => Self::linear_class(),
            ClassName::P => Self::polynomial_class(),
            ClassName::E => Self::exponential_class(),
            ClassName::Etilde => Self::iterated_exponential_class(),
            ClassName::Custom => BoundingClass {
                name: ClassName::Custom,
                generators: vec![constant(1)],
                full_composition: false,
            },
        }
    }

    pub fn custom(generators: Vec<BoundingFunction>, full_composition: bool) -> Self {
        let mut generators = generators;
        if !generators.iter().any(|g| matches!(g, Constant(c) if c.is_one())) {
            generators.insert(0, constant(1));
        }
        BoundingClass {
            name: ClassName::Custom,
            generators,
            full_composition,
        }
    }

    fn kinds(&self) -> KindSet {
        match self.name {
            ClassName::L => KindSet {
                linear: true,
                polynomial: false,
                exponential: false,
                chains: false,
            },
            ClassName::P => KindSet {
                linear: true,
                polynomial: true,
                exponential: false,
                chains: false,
            },
            ClassName::E => KindSet {
                linear: false,
                polynomial: false,
                exponential: true,
                chains: false,
            },
            ClassName::Etilde => KindSet {
                linear: false,
                polynomial: false,
                exponential: true,
                chains: true,
            },
            ClassName::Custom => {
                let mut ks = KindSet {
                    linear: false,
                    polynomial: false,
                    exponential: false,
                    chains: false,
                };
                for g in &self.generators {
                    match g.clone().normalized() {
                        Constant(_) => {}
                        Linear { .. } => ks.linear = true,
                        Polynomial(_) => {
                            ks.linear = true;
                            ks.polynomial = true;
                        }
                        Exponential { .. } => ks.exponential = true,
                        Chain(_) => ks.chains = true,
                    }
                }
                ks
            }
        }
    }

    /// Structural membership. Every class contains the constants (BC1 is the
    /// special case of the constant 1).
    pub fn contains(&self, f: &BoundingFunction) -> bool {
        let ks = self.kinds();
        match f.clone().normalized() {
            Constant(c) => !c.is_negative(),
            Linear { .. } => ks.linear,
            Polynomial(_) => ks.polynomial,
            Exponential { .. } => ks.exponential,
            Chain(stages) => {
                ks.chains
                    && stages.iter().all(|s| {
                        matches!(
                            s.clone().normalized(),
                            Constant(_) | Exponential { .. } | Linear { .. }
                        ) || (ks.polynomial && matches!(s.clone().normalized(), Polynomial(_)))
                    })
            }
        }
    }

    fn validate_expr(&self, expr: &ClassExpr) -> Result<(), BoundingError> {
        match expr {
            ClassExpr::Member(f) => {
                f.validate()?;
                if !self.contains(f) {
                    return Err(BoundingError::NotAMember(self.name.to_string()));
                }
                Ok(())
            }
            ClassExpr::Sum(terms) => {
                for (c, e) in terms {
                    if c.is_negative() {
                        return Err(BoundingError::NegativeParameter(rat::rat_string(c)));
                    }
                    self.validate_expr(e)?;
                }
                Ok(())
            }
            ClassExpr::Compose(f, g) => {
                self.validate_expr(f)?;
                if self.full_composition {
                    self.validate_expr(g)
                } else {
                    // only a linear right factor is permitted
                    match g.as_ref() {
                        ClassExpr::Member(m)
                            if matches!(
                                m.clone().normalized(),
                                Constant(_) | Linear { .. }
                            ) =>
                        {
                            m.validate()
                        }
                        _ => Err(BoundingError::ComposeNotPermitted(self.name.to_string())),
                    }
                }
            }
        }
    }

    /// Symbolic reduction of an expression to a single in-class dominator
    /// with `f >= expr` pointwise (exact moves only, no grid involved).
    fn reduce(&self, expr: &ClassExpr) -> Result<BoundingFunction, BoundingError> {
        match expr {
            ClassExpr::Member(f) => Ok(f.clone().normalized()),
            ClassExpr::Sum(terms) => {
                let mut reduced: Vec<BoundingFunction> = Vec::new();
                for (c, e) in terms {
                    reduced.push(self.reduce(e)?.scale_output(c));
                }
                reduced
                    .into_iter()
                    .try_fold(Constant(rat(0)), |acc, f| self.dominate_pair(&acc, &f))
            }
            ClassExpr::Compose(f, g) => {
                let rf = self.reduce(f)?;
                let rg = self.reduce(g)?;
                let composed = rf.compose_dominating(&rg);
                if self.contains(&composed) {
                    Ok(composed)
                } else {
                    Err(BoundingError::NoDominator(
                        self.name.to_string(),
                        format!("composition left the class: {composed}"),
                    ))
                }
            }
        }
    }

    /// A member dominating `f + g` pointwise.
    fn dominate_pair(
        &self,
        f: &BoundingFunction,
        g: &BoundingFunction,
    ) -> Result<BoundingFunction, BoundingError> {
        if let Some(sum) = f.add_exact(g) {
            if self.contains(&sum) {
                return Ok(sum);
            }
        }
        // max(f, g) <= f + g for non-negative functions; dominate the sum of
        // two exponentials by widening to the larger base
        let fe = exp_view(f);
        let ge = exp_view(g);
        if let (Some((s1, b1)), Some((s2, b2))) = (&fe, &ge) {
            let base = if b1 >= b2 { b1.clone() } else { b2.clone() };
            let base = if base <= rat(1) { rat(2) } else { base };
            let out = Exponential {
                scale: s1 + s2,
                base,
            };
            if self.contains(&out) {
                return Ok(out);
            }
        }
        // chains: pad to equal length with the identity and take stagewise
        // upper bounds
        if self.kinds().chains {
            if let Some(out) = chain_pair_dominator(f, g) {
                if self.contains(&out) {
                    return Ok(out);
                }
            }
        }
        Err(BoundingError::NoDominator(
            self.name.to_string(),
            format!("cannot dominate {f} + {g}"),
        ))
    }

    /// Produces an in-class member strictly above `expr` on a sample grid and
    /// `>= expr` symbolically where the kinds permit. This is the
    /// witness-producing face of weak closure.
    pub fn dominator(
        &self,
        expr: &ClassExpr,
    ) -> Result<(BoundingFunction, DominationEvidence), BoundingError> {
        let (f, mut ev) = self.weak_dominator(expr)?;
        let strict = f.strict_bump();
        // strict > holds wherever the weak bound held
        ev.symbolic = ev.symbolic.or(Some(true));
        Ok((strict, ev))
    }

    /// Non-strict variant used for witness bookkeeping: returns `f >= expr`.
    pub fn weak_dominator(
        &self,
        expr: &ClassExpr,
    ) -> Result<(BoundingFunction, DominationEvidence), BoundingError> {
        self.validate_expr(expr)?;
        let f = self.reduce(expr)?;
        let cap = match expr.max_tower() {
            0 => rat(1 << 20),
            1 => rat(1 << 12),
            2 => rat(16),
            _ => rat(4),
        };
        let cap = std::cmp::min(cap, f.grid_cap());
        let grid = rat::sample_grid(&rat(0), &cap, 128);
        let mut checked = 0usize;
        let mut skipped = 0usize;
        for x in &grid {
            match (f.eval(x), expr.eval(x)) {
                (Ok(lhs), Ok(rhs)) => {
                    checked += 1;
                    debug_assert!(lhs >= rhs, "dominator {f} below expr at {x}");
                    if lhs < rhs {
                        return Err(BoundingError::NoDominator(
                            self.name.to_string(),
                            format!("reduction unsound at x={x}"),
                        ));
                    }
                }
                _ => skipped += 1,
            }
        }
        Ok((
            f,
            DominationEvidence {
                grid_points: checked,
                grid_skipped: skipped,
                symbolic: Some(true),
            },
        ))
    }

    /// The `f2(x) >= f(2x)`, `f4(x) >= f(4x)`, `F(x) >= max(x, f2(x))`
    /// triple. The first two are exact argument rescalings; `F` dominates
    /// `x + f2(x)`.
    pub fn make_f2_f4_big_f(
        &self,
        f: &BoundingFunction,
    ) -> Result<(BoundingFunction, BoundingFunction, BoundingFunction), BoundingError> {
        if !self.contains(f) {
            return Err(BoundingError::NotAMember(self.name.to_string()));
        }
        let f2 = f.scale_argument(2);
        let f4 = f.scale_argument(4);
        let big_f = self.dominate_with_identity(&f2)?;
        Ok((f2, f4, big_f))
    }

    /// A member `F` with `F(x) >= max(x, g(x))` pointwise.
    pub fn dominate_with_identity(
        &self,
        g: &BoundingFunction,
    ) -> Result<BoundingFunction, BoundingError> {
        if self.kinds().linear {
            if let Some(sum) = g.add_exact(&identity()) {
                if self.contains(&sum) {
                    return Ok(sum);
                }
            }
        }
        if let Some((scale, base)) = exp_view(g) {
            // c·a^x + x <= (c+1)·max(a,2)^x for x >= 0
            let base = if base < rat(2) { rat(2) } else { base };
            return Ok(Exponential {
                scale: scale + rat(1),
                base,
            });
        }
        if self.kinds().chains {
            if let Chain(stages) = &g.clone().normalized() {
                // bump every stage so the chain dominates the identity
                let bumped: Option<Vec<BoundingFunction>> = stages
                    .iter()
                    .map(|s| {
                        exp_view(s).map(|(sc, b)| Exponential {
                            scale: if sc < rat(1) { rat(1) } else { sc },
                            base: if b < rat(2) { rat(2) } else { b },
                        })
                    })
                    .collect();
                if let Some(stages) = bumped {
                    return Ok(Chain(stages).normalized());
                }
            }
        }
        Err(BoundingError::NoDominator(
            self.name.to_string(),
            format!("cannot dominate max(x, {g})"),
        ))
    }

    /// Decides `self ⪯ other`: every generator of `self` dominated by a
    /// member of `other` on `[horizon, horizon·2^10]` and symbolically for
    /// large arguments where the kinds permit.
    pub fn precedes(&self, other: &BoundingClass, horizon: &Rat) -> Precedence {
        let mut witnesses = Vec::new();
        for gen in &self.generators {
            match other.dominating_member(gen, horizon) {
                DominatorSearch::Found(w, symbolic) => witnesses.push(PrecedenceWitness {
                    generator: gen.clone(),
                    dominator: w,
                    symbolic,
                }),
                DominatorSearch::Impossible(reason) => {
                    return Precedence::NoCounterexample {
                        generator: gen.clone(),
                        reason,
                    }
                }
                DominatorSearch::Unknown => return Precedence::Inconclusive,
            }
        }
        Precedence::YesWitnessed(witnesses)
    }

    /// Searches for a member dominating `target` on the horizon grid.
    fn dominating_member(&self, target: &BoundingFunction, horizon: &Rat) -> DominatorSearch {
        let ks = self.kinds();
        let tg = target.growth();
        let cap = std::cmp::min(target.grid_cap(), horizon * rat(1 << 10));
        let hi = if &cap < horizon { horizon.clone() } else { cap };
        let grid = rat::sample_grid(horizon, &hi, 48);

        // the target itself, when it is structurally a member
        if self.contains(target) {
            return DominatorSearch::Found(target.clone(), Some(true));
        }
        // polynomial-kind target inside a class with polynomials
        if tg.tower == 0 && ks.polynomial {
            return DominatorSearch::Found(target.clone(), Some(true));
        }
        // linear target into a linear class
        if tg.tower == 0 && tg.degree <= 1 && ks.linear {
            return DominatorSearch::Found(target.clone(), Some(true));
        }
        // polynomial-kind target dominated by an exponential
        if tg.tower == 0 && ks.exponential {
            let mut scale = rat(1);
            for x in &grid {
                if let (Ok(tv), Ok(ev)) = (
                    target.eval(x),
                    (Exponential {
                        scale: rat(1),
                        base: rat(2),
                    })
                    .eval(x),
                ) {
                    if !ev.is_zero() {
                        let need = tv / ev;
                        if need > scale {
                            scale = need;
                        }
                    }
                }
            }
            let w = Exponential {
                scale: scale.ceil(),
                base: rat(2),
            };
            return DominatorSearch::Found(w, Some(true));
        }
        // growth obstruction: a strictly faster target cannot be dominated
        let max_growth = self
            .generators
            .iter()
            .map(BoundingFunction::growth)
            .fold(Growth { tower: 0, degree: 0 }, |acc, g| Growth {
                tower: acc.tower.max(g.tower),
                degree: acc.degree.max(g.degree),
            });
        if tg.tower > max_growth.tower {
            return DominatorSearch::Impossible(format!(
                "target has exponential tower {} but the class peaks at {}",
                tg.tower, max_growth.tower
            ));
        }
        if tg.tower == 0 && max_growth.tower == 0 && !ks.polynomial && tg.degree > 1 {
            return DominatorSearch::Impossible(format!(
                "target degree {} exceeds the class maximum degree 1",
                tg.degree
            ));
        }
        if tg.tower == 0 && max_growth.tower == 0 && ks.polynomial {
            let max_deg = max_growth.degree;
            if tg.degree > max_deg && !self.full_composition {
                return DominatorSearch::Impossible(format!(
                    "target degree {} exceeds generator degree {} and the class is not composable",
                    tg.degree, max_deg
                ));
            }
        }
        // exponential target into an exponential class
        if ks.exponential && tg.tower == 1 {
            if let Exponential { scale, base } = &target.clone().normalized() {
                let w = Exponential {
                    scale: scale.clone().ceil() + rat(1),
                    base: base.clone().ceil(),
                };
                if w.eventually_dominates(target) == Some(true) {
                    return DominatorSearch::Found(w, Some(true));
                }
            }
        }
        if ks.chains && tg.tower >= 1 {
            return DominatorSearch::Found(target.clone(), Some(true));
        }
        DominatorSearch::Unknown
    }
}

enum DominatorSearch {
    Found(BoundingFunction, Option<bool>),
    Impossible(String),
    Unknown,
}

/// Views constants and exponentials uniformly as `scale·base^x`.
fn exp_view(f: &BoundingFunction) -> Option<(Rat, Rat)> {
    match f.clone().normalized() {
        Constant(c) => Some((c, rat(1))),
        Exponential { scale, base } => Some((scale, base)),
        _ => None,
    }
}

fn chain_pair_dominator(
    f: &BoundingFunction,
    g: &BoundingFunction,
) -> Option<BoundingFunction> {
    fn stages(f: &BoundingFunction) -> Option<Vec<(Rat, Rat)>> {
        match f.clone().normalized() {
            Chain(ss) => ss.iter().map(exp_view).collect(),
            other => exp_view(&other).map(|e| vec![e]),
        }
    }
    let (mut a, mut b) = (stages(f)?, stages(g)?);
    let len = a.len().max(b.len());
    // pad the inner end with neutral stages and take stagewise maxima,
    // bumping every stage to dominate the identity so padding is sound
    while a.len() < len {
        a.insert(0, (rat(1), rat(1)));
    }
    while b.len() < len {
        b.insert(0, (rat(1), rat(1)));
    }
    let scale_sum = &a[len - 1].0 + &b[len - 1].0;
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        let scale = if i == len - 1 {
            scale_sum.clone()
        } else {
            std::cmp::max(std::cmp::max(a[i].0.clone(), b[i].0.clone()), rat(1))
        };
        let base = std::cmp::max(std::cmp::max(a[i].1.clone(), b[i].1.clone()), rat(2));
        out.push(Exponential { scale, base });
    }
    Some(Chain(out).normalized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::ratio;

    #[test]
    fn eval_matches_hand_values() {
        assert_eq!(constant(1).eval(&rat(57)).unwrap(), rat(1));
        assert_eq!(linear(2, 3).eval(&rat(5)).unwrap(), rat(13));
        assert_eq!(monomial(2).eval(&ratio(3, 2)).unwrap(), ratio(9, 4));
        assert!(identity().eval(&rat(-1)).is_err());
    }

    #[test]
    fn exponential_rounds_argument_up() {
        let f = exponential(1, 2);
        assert_eq!(f.eval(&rat(10)).unwrap(), rat(1024));
        // 2^(3/2) evaluates at ceil(3/2) = 2
        assert_eq!(f.eval(&ratio(3, 2)).unwrap(), rat(4));
    }

    #[test]
    fn chain_applies_in_order() {
        // x -> 2x+1 then x -> x^2: (2x+1)^2
        let c = Chain(vec![linear(2, 1), monomial(2)]);
        assert_eq!(c.eval(&rat(3)).unwrap(), rat(49));
    }

    #[test]
    fn scale_argument_is_exact() {
        let f = monomial(2);
        let f2 = f.scale_argument(2);
        for x in [rat(0), rat(1), ratio(7, 3), rat(100)] {
            assert_eq!(f2.eval(&x).unwrap(), f.eval(&(&x * rat(2))).unwrap());
        }
        let e = exponential(3, 2);
        let e2 = e.scale_argument(2);
        assert_eq!(e2, exponential(3, 4));
    }

    #[test]
    fn compose_exact_expands_polynomials() {
        // x^2 ∘ x^3 = x^6
        let f = monomial(2).compose_exact(&monomial(3)).unwrap();
        assert_eq!(f, monomial(6));
        // (2x+1) ∘ (3x+2) = 6x + 5
        let g = linear(2, 1).compose_exact(&linear(3, 2)).unwrap();
        assert_eq!(g, linear(6, 5));
    }

    #[test]
    fn dominator_covers_the_spec_shapes() {
        let p = BoundingClass::polynomial_class();
        // (1/2)x^2 + (1/2)x^2 -> strictly above x^2 everywhere on the grid
        let expr = ClassExpr::Sum(vec![
            (ratio(1, 2), ClassExpr::member(monomial(2))),
            (ratio(1, 2), ClassExpr::member(monomial(2))),
        ]);
        let (w, ev) = p.dominator(&expr).unwrap();
        assert!(p.contains(&w));
        assert!(ev.grid_points > 0);
        for x in [rat(0), rat(3), rat(1000)] {
            assert!(w.eval(&x).unwrap() > expr.eval(&x).unwrap());
        }

        let l = BoundingClass::linear_class();
        let comp = ClassExpr::Compose(
            Box::new(ClassExpr::member(linear(2, 1))),
            Box::new(ClassExpr::member(linear(3, 2))),
        );
        let (w, _) = l.dominator(&comp).unwrap();
        assert!(matches!(w.clone().normalized(), Linear { .. }));
        for x in [rat(0), rat(5), rat(4096)] {
            assert!(w.eval(&x).unwrap() >= linear(6, 5).eval(&x).unwrap());
        }

        // x^2 ∘ x^3 in the composable polynomial class: degree >= 6
        let comp = ClassExpr::Compose(
            Box::new(ClassExpr::member(monomial(2))),
            Box::new(ClassExpr::member(monomial(3))),
        );
        let (w, _) = p.dominator(&comp).unwrap();
        assert!(w.growth().degree >= 6);
    }

    #[test]
    fn composition_needs_linear_right_factor_outside_composable_classes() {
        let e = BoundingClass::exponential_class();
        let bad = ClassExpr::Compose(
            Box::new(ClassExpr::member(exponential(1, 2))),
            Box::new(ClassExpr::member(exponential(1, 2))),
        );
        assert!(matches!(
            e.dominator(&bad),
            Err(BoundingError::ComposeNotPermitted(_))
        ));
        let ok = ClassExpr::Compose(
            Box::new(ClassExpr::member(exponential(1, 2))),
            Box::new(ClassExpr::member(linear(2, 1))),
        );
        let (w, _) = e.dominator(&ok).unwrap();
        assert!(e.contains(&w));
    }

    #[test]
    fn f2_f4_triples() {
        let l = BoundingClass::linear_class();
        let (f2, f4, big) = l.make_f2_f4_big_f(&identity()).unwrap();
        assert_eq!(f2, linear(2, 0));
        assert_eq!(f4, linear(4, 0));
        for x in [rat(0), rat(1), rat(7)] {
            assert!(big.eval(&x).unwrap() >= x);
            assert!(big.eval(&x).unwrap() >= f2.eval(&x).unwrap());
        }

        let (f2, f4, big) = l.make_f2_f4_big_f(&constant(1)).unwrap();
        assert_eq!(f2, constant(1));
        assert_eq!(f4, constant(1));
        assert_eq!(big, linear(1, 1));

        let p = BoundingClass::polynomial_class();
        let (f2, f4, big) = p.make_f2_f4_big_f(&monomial(2)).unwrap();
        assert_eq!(f2.eval(&rat(3)).unwrap(), rat(36)); // 4·9
        assert_eq!(f4.eval(&rat(3)).unwrap(), rat(144)); // 16·9
        for x in [rat(0), rat(1), rat(10)] {
            assert!(big.eval(&x).unwrap() >= std::cmp::max(x.clone(), f2.eval(&x).unwrap()));
        }
    }

    #[test]
    fn precedes_orders_the_standard_classes() {
        let l = BoundingClass::linear_class();
        let p = BoundingClass::polynomial_class();
        let e = BoundingClass::exponential_class();
        let one = rat(1);
        assert!(matches!(l.precedes(&p, &one), Precedence::YesWitnessed(_)));
        assert!(matches!(p.precedes(&e, &one), Precedence::YesWitnessed(_)));
        match p.precedes(&l, &one) {
            Precedence::NoCounterexample { generator, .. } => {
                assert_eq!(generator.growth().degree, 2);
            }
            other => panic!("expected a counterexample, got {other:?}"),
        }
        // reflexivity
        for c in [&l, &p, &e] {
            assert!(matches!(c.precedes(c, &one), Precedence::YesWitnessed(_)));
        }
    }

    #[test]
    fn precedes_is_transitive_on_l_p_e() {
        let l = BoundingClass::linear_class();
        let p = BoundingClass::polynomial_class();
        let e = BoundingClass::exponential_class();
        let one = rat(1);
        let yes = |a: &BoundingClass, b: &BoundingClass| {
            matches!(a.precedes(b, &one), Precedence::YesWitnessed(_))
        };
        assert!(yes(&l, &p) && yes(&p, &e) && yes(&l, &e));
    }

    #[test]
    fn class_membership_accepts_constant_one() {
        for c in [
            BoundingClass::linear_class(),
            BoundingClass::polynomial_class(),
            BoundingClass::exponential_class(),
            BoundingClass::iterated_exponential_class(),
            BoundingClass::custom(vec![monomial(3)], false),
        ] {
            assert!(c.contains(&constant(1)), "{} misses BC1", c.name);
        }
    }

    #[test]
    fn dominator_grid_holds_on_wide_range() {
        // the module invariant: dominator >= expr on sampled points of
        // [0, 2^20], exactly
        let p = BoundingClass::polynomial_class();
        let expr = ClassExpr::Sum(vec![
            (ratio(2, 3), ClassExpr::member(monomial(2))),
            (rat(5), ClassExpr::member(identity())),
        ]);
        let (w, _) = p.dominator(&expr).unwrap();
        for x in rat::sample_grid(&rat(0), &rat(1 << 20), 1000) {
            assert!(w.eval(&x).unwrap() > expr.eval(&x).unwrap());
        }
    }
}
