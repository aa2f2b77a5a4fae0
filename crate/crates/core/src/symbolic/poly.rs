//! Multivariate Laurent polynomials with Gaussian-rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::SymbolicError;

/// Exact `p + q i` with `p, q` rational.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn int(n: i64) -> Self {
        GaussRat::new(BigRational::from_integer(n.into()), BigRational::zero())
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        GaussRat::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    pub fn i() -> Self {
        GaussRat::new(BigRational::zero(), BigRational::one())
    }

    pub fn gaussian(re: i64, im: i64) -> Self {
        GaussRat::new(
            BigRational::from_integer(re.into()),
            BigRational::from_integer(im.into()),
        )
    }

    pub fn conj(&self) -> Self {
        GaussRat::new(self.re.clone(), -self.im.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl Add for &GaussRat {
    type Output = GaussRat;
    fn add(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl Mul for &GaussRat {
    type Output = GaussRat;
    fn mul(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat::new(-self.re.clone(), -self.im.clone())
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) => write!(f, "({} + {}i)", self.re, self.im),
        }
    }
}

/// The symbol alphabet. `A..D` stand for the four Higgs fields, `G` for
/// `(h/k)^(-1/2)`, `E` for `e^{iθ}`, `W` for the jet scalar `c`, and `U`
/// for the free direction parameter used in the domination lemma.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    A,
    B,
    C,
    D,
    ABar,
    BBar,
    CBar,
    DBar,
    H,
    K,
    G,
    E,
    W,
    WBar,
    U,
    UBar,
}

pub const NSYM: usize = 16;

impl Symbol {
    pub const ALL: [Symbol; NSYM] = [
        Symbol::A,
        Symbol::B,
        Symbol::C,
        Symbol::D,
        Symbol::ABar,
        Symbol::BBar,
        Symbol::CBar,
        Symbol::DBar,
        Symbol::H,
        Symbol::K,
        Symbol::G,
        Symbol::E,
        Symbol::W,
        Symbol::WBar,
        Symbol::U,
        Symbol::UBar,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Symbol::A => "a",
            Symbol::B => "b",
            Symbol::C => "c",
            Symbol::D => "d",
            Symbol::ABar => "abar",
            Symbol::BBar => "bbar",
            Symbol::CBar => "cbar",
            Symbol::DBar => "dbar",
            Symbol::H => "h",
            Symbol::K => "k",
            Symbol::G => "g",
            Symbol::E => "E",
            Symbol::W => "w",
            Symbol::WBar => "wbar",
            Symbol::U => "u",
            Symbol::UBar => "ubar",
        }
    }

    /// Partner under formal conjugation; `None` for `E`, which inverts.
    fn conj_partner(self) -> Option<Symbol> {
        use Symbol::*;
        Some(match self {
            A => ABar,
            ABar => A,
            B => BBar,
            BBar => B,
            C => CBar,
            CBar => C,
            D => DBar,
            DBar => D,
            W => WBar,
            WBar => W,
            U => UBar,
            UBar => U,
            H => H,
            K => K,
            G => G,
            E => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub [i32; NSYM]);

impl Monomial {
    pub fn one() -> Self {
        Monomial([0; NSYM])
    }

    pub fn exp(&self, s: Symbol) -> i32 {
        self.0[s.index()]
    }

    fn times(&self, o: &Monomial) -> Monomial {
        Monomial(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

/// Numeric values for the alphabet. Barred symbols evaluate to the complex
/// conjugate of their partner, `g` to `sqrt(k/h)` and `E` to `e^{iθ}`.
#[derive(Debug, Clone, Copy)]
pub struct Assignment {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
    pub h: f64,
    pub k: f64,
    pub theta: f64,
    pub w: Complex64,
    pub u: Complex64,
}

impl Assignment {
    pub fn g(&self) -> f64 {
        (self.k / self.h).sqrt()
    }

    pub fn value(&self, s: Symbol) -> Complex64 {
        use Symbol::*;
        match s {
            A => self.a,
            B => self.b,
            C => self.c,
            D => self.d,
            ABar => self.a.conj(),
            BBar => self.b.conj(),
            CBar => self.c.conj(),
            DBar => self.d.conj(),
            H => self.h.into(),
            K => self.k.into(),
            G => self.g().into(),
            E => Complex64::from_polar(1.0, self.theta),
            W => self.w,
            WBar => self.w.conj(),
            U => self.u,
            UBar => self.u.conj(),
        }
    }
}

/// Sparse Laurent polynomial: exponent vector to nonzero coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LaurentPoly {
    terms: BTreeMap<Monomial, GaussRat>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly::default()
    }

    pub fn constant(c: GaussRat) -> Self {
        let mut p = LaurentPoly::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn int(n: i64) -> Self {
        Self::constant(GaussRat::int(n))
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn i() -> Self {
        Self::constant(GaussRat::i())
    }

    pub fn sym(s: Symbol) -> Self {
        Self::monomial(&[(s, 1)])
    }

    /// Product of symbol powers with coefficient one.
    pub fn monomial(powers: &[(Symbol, i32)]) -> Self {
        let mut m = Monomial::one();
        for &(s, e) in powers {
            m.0[s.index()] += e;
        }
        let mut p = LaurentPoly::zero();
        p.add_term(m, GaussRat::int(1));
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: GaussRat) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing = &*existing + &c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussRat)> {
        self.terms.iter()
    }

    pub fn scale(&self, c: &GaussRat) -> Self {
        let mut p = LaurentPoly::zero();
        for (m, v) in &self.terms {
            p.add_term(*m, v * c);
        }
        p
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(LaurentPoly::one(), |acc, _| &acc * self)
    }

    /// Formal complex conjugation: swaps each symbol with its barred
    /// partner, inverts `E`, and conjugates coefficients.
    pub fn conjugate(&self) -> Self {
        let mut p = LaurentPoly::zero();
        for (m, c) in &self.terms {
            let mut out = [0i32; NSYM];
            for s in Symbol::ALL {
                let e = m.exp(s);
                match s.conj_partner() {
                    Some(t) => out[t.index()] += e,
                    None => out[s.index()] -= e,
                }
            }
            p.add_term(Monomial(out), c.conj());
        }
        p
    }

    /// Formal `∂/∂θ`: only `E = e^{iθ}` depends on the angle.
    pub fn d_theta(&self) -> Self {
        let mut p = LaurentPoly::zero();
        for (m, c) in &self.terms {
            let n = m.exp(Symbol::E) as i64;
            p.add_term(*m, &GaussRat::gaussian(0, n) * c);
        }
        p
    }

    /// Largest-magnitude odd exponent of `g`, if any.
    pub fn odd_g_exponent(&self) -> Option<i32> {
        self.terms
            .keys()
            .map(|m| m.exp(Symbol::G))
            .filter(|e| e % 2 != 0)
            .max_by_key(|e| e.abs())
    }

    /// Applies `g² → h⁻¹k` until every `g` exponent is 0 or 1.
    pub fn reduce_g(&self) -> Self {
        let mut p = LaurentPoly::zero();
        for (m, c) in &self.terms {
            let e = m.exp(Symbol::G);
            let r = e.rem_euclid(2);
            let q = (e - r) / 2;
            let mut out = *m;
            out.0[Symbol::G.index()] = r;
            out.0[Symbol::H.index()] -= q;
            out.0[Symbol::K.index()] += q;
            p.add_term(out, c.clone());
        }
        p
    }

    /// Normal form of a scalar identity residual: asserts that only even
    /// powers of `g` occur, then rewrites them.
    pub fn normal_form(&self, identity: &str) -> Result<Self, SymbolicError> {
        if let Some(e) = self.odd_g_exponent() {
            return Err(SymbolicError::OddGPower {
                identity: identity.to_string(),
                exponent: e,
            });
        }
        Ok(self.reduce_g())
    }

    /// Sets `s = 0`. Fails if some term has a negative power of `s`.
    pub fn specialize_zero(&self, s: Symbol) -> Result<Self, SymbolicError> {
        let mut p = LaurentPoly::zero();
        for (m, c) in &self.terms {
            let e = m.exp(s);
            if e < 0 {
                return Err(SymbolicError::NegativePowerOfZero { symbol: s.name() });
            }
            if e == 0 {
                p.add_term(*m, c.clone());
            }
        }
        Ok(p)
    }

    /// Replaces every power `s^e` with `image^e`, where `image` is a single
    /// monomial (so negative exponents stay Laurent).
    pub fn substitute_monomial(&self, s: Symbol, image: &[(Symbol, i32)]) -> Self {
        let mut p = LaurentPoly::zero();
        for (m, c) in &self.terms {
            let e = m.exp(s);
            let mut out = *m;
            out.0[s.index()] = 0;
            for &(t, f) in image {
                out.0[t.index()] += e * f;
            }
            p.add_term(out, c.clone());
        }
        p
    }

    pub fn eval(&self, at: &Assignment) -> Complex64 {
        let vals: [Complex64; NSYM] = std::array::from_fn(|i| at.value(Symbol::ALL[i]));
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut v = c.to_complex();
                for (i, &e) in m.0.iter().enumerate() {
                    if e != 0 {
                        v *= vals[i].powi(e);
                    }
                }
                v
            })
            .sum()
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, o: &LaurentPoly) -> LaurentPoly {
        let mut p = self.clone();
        for (m, c) in &o.terms {
            p.add_term(*m, c.clone());
        }
        p
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, o: &LaurentPoly) -> LaurentPoly {
        let mut p = self.clone();
        for (m, c) in &o.terms {
            p.add_term(*m, -c);
        }
        p
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, o: &LaurentPoly) -> LaurentPoly {
        let mut p = LaurentPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                p.add_term(m1.times(m2), c1 * c2);
            }
        }
        p
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.scale(&GaussRat::int(-1))
    }
}

impl AddAssign<&LaurentPoly> for LaurentPoly {
    fn add_assign(&mut self, o: &LaurentPoly) {
        for (m, c) in &o.terms {
            self.add_term(*m, c.clone());
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for LaurentPoly {
            type Output = LaurentPoly;
            fn $f(self, o: LaurentPoly) -> LaurentPoly {
                (&self).$f(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for s in Symbol::ALL {
                let e = m.exp(s);
                if e == 1 {
                    write!(f, "*{}", s.name())?;
                } else if e != 0 {
                    write!(f, "*{}^{}", s.name(), e)?;
                }
            }
        }
        Ok(())
    }
}

/// Absolute value of the largest coefficient component, for diagnostics.
pub fn max_coefficient(p: &LaurentPoly) -> BigRational {
    p.terms()
        .flat_map(|(_, c)| [c.re.abs(), c.im.abs()])
        .max()
        .unwrap_or_else(BigRational::zero)
}
