//! Exact arithmetic in Q(√2) and quadratic polynomials over it.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

/// A number `r + s√2` with rational `r` and `s`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct QSqrt2 {
    rational: BigRational,
    surd: BigRational,
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl QSqrt2 {
    pub fn new(rational: BigRational, surd: BigRational) -> Self {
        QSqrt2 { rational, surd }
    }

    pub fn zero() -> Self {
        QSqrt2::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        QSqrt2::integer(1)
    }

    pub fn integer(n: i64) -> Self {
        QSqrt2::new(BigRational::from_integer(n.into()), BigRational::zero())
    }

    pub fn fraction(n: i64, d: i64) -> Self {
        QSqrt2::new(ratio(n, d), BigRational::zero())
    }

    pub fn sqrt2() -> Self {
        QSqrt2::new(BigRational::zero(), BigRational::one())
    }

    /// `(a + b√2) / d`.
    pub fn from_parts(a: i64, b: i64, d: i64) -> Self {
        QSqrt2::new(ratio(a, d), ratio(b, d))
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rational
    }

    pub fn surd_part(&self) -> &BigRational {
        &self.surd
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.surd.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.surd.is_zero()
    }

    pub fn conjugate(&self) -> Self {
        QSqrt2::new(self.rational.clone(), -self.surd.clone())
    }

    /// `r² - 2s²`, the product with the conjugate.
    pub fn norm(&self) -> BigRational {
        &self.rational * &self.rational
            - BigRational::from_integer(2.into()) * &self.surd * &self.surd
    }

    /// Exact sign.
    pub fn signum(&self) -> Ordering {
        let r = self.rational.cmp(&BigRational::zero());
        let s = self.surd.cmp(&BigRational::zero());
        match (r, s) {
            (Ordering::Equal, s) => s,
            (r, Ordering::Equal) => r,
            (r, s) if r == s => r,
            // Opposite signs: compare r² with 2s².
            (r, _) => {
                let r2 = &self.rational * &self.rational;
                let s2 = BigRational::from_integer(2.into()) * &self.surd * &self.surd;
                match r2.cmp(&s2) {
                    Ordering::Greater => r,
                    Ordering::Less => r.reverse(),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    pub fn checked_div(&self, other: &QSqrt2) -> Option<QSqrt2> {
        let norm = other.norm();
        if norm.is_zero() {
            return None;
        }
        let num = self * &other.conjugate();
        Some(QSqrt2::new(num.rational / &norm, num.surd / norm))
    }

    /// Square root of a rational number when it lies in Q(√2), i.e. when the
    /// number is `q²` or `2q²` for rational `q`. Returns the nonnegative root.
    pub fn sqrt_rational(value: &BigRational) -> Option<QSqrt2> {
        if value.is_negative() {
            return None;
        }
        if let Some(q) = rational_sqrt(value) {
            return Some(QSqrt2::new(q, BigRational::zero()));
        }
        let half = value / BigRational::from_integer(2.into());
        rational_sqrt(&half).map(|q| QSqrt2::new(BigRational::zero(), q))
    }

    pub fn to_f64(&self) -> f64 {
        let r = self.rational.to_f64().unwrap_or(f64::NAN);
        let s = self.surd.to_f64().unwrap_or(f64::NAN);
        r + s * std::f64::consts::SQRT_2
    }

    /// Integers `(a, b, d)` with `self = (a + b√2)/d`, `d > 0` and
    /// `gcd(a, b, d) = 1`.
    pub fn parts(&self) -> (BigInt, BigInt, BigInt) {
        let d = self.rational.denom().lcm(self.surd.denom());
        let a = self.rational.numer() * (&d / self.rational.denom());
        let b = self.surd.numer() * (&d / self.surd.denom());
        let g = a.gcd(&b).gcd(&d);
        (a / &g, b / &g, d / g)
    }

    /// Decimal expansion rounded to `digits` places after the point, computed
    /// exactly with integer square roots.
    pub fn to_decimal(&self, digits: u32) -> String {
        let (a, b, d) = self.parts();
        let scale = BigInt::from(10u32).pow(digits);
        let mut guard_digits = 6u32;
        loop {
            let guard = BigInt::from(10u32).pow(guard_digits);
            let unit = &scale * &guard;
            // floor(|b| * unit * √2) via the integer square root.
            let irr = (BigInt::from(2) * &b * &b * &unit * &unit).sqrt();
            let (lo, hi) = match b.sign() {
                Sign::Minus => (&a * &unit - &irr - 1, &a * &unit - &irr),
                Sign::NoSign => (&a * &unit, &a * &unit),
                Sign::Plus => (&a * &unit + &irr, &a * &unit + &irr + 1),
            };
            // value * 10^digits lies in [lo, hi] / (d * guard).
            let den = &d * &guard;
            let round = |x: &BigInt| -> BigInt {
                (BigInt::from(2) * x + &den).div_floor(&(BigInt::from(2) * &den))
            };
            let (r_lo, r_hi) = (round(&lo), round(&hi));
            if r_lo == r_hi {
                return format_scaled(&r_lo, digits);
            }
            guard_digits += 6;
        }
    }
}

fn rational_sqrt(value: &BigRational) -> Option<BigRational> {
    let n = value.numer();
    let d = value.denom();
    let rn = n.sqrt();
    let rd = d.sqrt();
    (&rn * &rn == *n && &rd * &rd == *d).then(|| BigRational::new(rn, rd))
}

fn format_scaled(value: &BigInt, digits: u32) -> String {
    let negative = value.is_negative();
    let magnitude = value.abs().to_string();
    let width = digits as usize + 1;
    let padded = format!("{magnitude:0>width$}");
    let (int_part, frac_part) = padded.split_at(padded.len() - digits as usize);
    let sign = if negative { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

impl fmt::Display for QSqrt2 {
    /// `(a+b√2)/d`, dropping zero terms, unit coefficients and `/1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b, d) = self.parts();
        let surd = |b: &BigInt| -> String {
            if b.is_one() {
                "√2".to_string()
            } else if *b == -BigInt::one() {
                "-√2".to_string()
            } else {
                format!("{b}√2")
            }
        };
        let (numerator, compound) = match (a.is_zero(), b.is_zero()) {
            (_, true) => (a.to_string(), false),
            (true, false) => (surd(&b), false),
            (false, false) => {
                let sign = if b.is_negative() { "-" } else { "+" };
                (format!("{a}{sign}{}", surd(&b.abs())), true)
            }
        };
        if d.is_one() {
            write!(f, "{numerator}")
        } else if compound {
            write!(f, "({numerator})/{d}")
        } else {
            write!(f, "{numerator}/{d}")
        }
    }
}

impl Serialize for QSqrt2 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ExactNumber::from(self).serialize(serializer)
    }
}

/// JSON form of an exact number: integer parts as strings and a rendering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExactNumber {
    pub a: String,
    pub b: String,
    pub d: String,
    pub exact: String,
}

impl From<&QSqrt2> for ExactNumber {
    fn from(x: &QSqrt2) -> Self {
        let (a, b, d) = x.parts();
        ExactNumber {
            a: a.to_string(),
            b: b.to_string(),
            d: d.to_string(),
            exact: x.to_string(),
        }
    }
}

impl PartialOrd for QSqrt2 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QSqrt2 {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

impl Add<&QSqrt2> for &QSqrt2 {
    type Output = QSqrt2;
    fn add(self, rhs: &QSqrt2) -> QSqrt2 {
        QSqrt2::new(&self.rational + &rhs.rational, &self.surd + &rhs.surd)
    }
}

impl Sub<&QSqrt2> for &QSqrt2 {
    type Output = QSqrt2;
    fn sub(self, rhs: &QSqrt2) -> QSqrt2 {
        QSqrt2::new(&self.rational - &rhs.rational, &self.surd - &rhs.surd)
    }
}

impl Mul<&QSqrt2> for &QSqrt2 {
    type Output = QSqrt2;
    fn mul(self, rhs: &QSqrt2) -> QSqrt2 {
        let two = BigRational::from_integer(2.into());
        QSqrt2::new(
            &self.rational * &rhs.rational + two * &self.surd * &rhs.surd,
            &self.rational * &rhs.surd + &self.surd * &rhs.rational,
        )
    }
}

impl Neg for &QSqrt2 {
    type Output = QSqrt2;
    fn neg(self) -> QSqrt2 {
        QSqrt2::new(-self.rational.clone(), -self.surd.clone())
    }
}

macro_rules! forward_owned {
    ($($tr:ident $method:ident),*) => {$(
        impl $tr<QSqrt2> for QSqrt2 {
            type Output = QSqrt2;
            fn $method(self, rhs: QSqrt2) -> QSqrt2 {
                (&self).$method(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for QSqrt2 {
    type Output = QSqrt2;
    fn neg(self) -> QSqrt2 {
        -&self
    }
}

/// `c0 + c1·x + c2·x²` with coefficients in Q(√2).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct QuadPoly {
    pub c0: QSqrt2,
    pub c1: QSqrt2,
    pub c2: QSqrt2,
}

impl QuadPoly {
    pub fn new(c0: QSqrt2, c1: QSqrt2, c2: QSqrt2) -> Self {
        QuadPoly { c0, c1, c2 }
    }

    pub fn zero() -> Self {
        QuadPoly::constant(QSqrt2::zero())
    }

    pub fn constant(c: QSqrt2) -> Self {
        QuadPoly::new(c, QSqrt2::zero(), QSqrt2::zero())
    }

    /// `c0 + c1·x`.
    pub fn linear(c0: QSqrt2, c1: QSqrt2) -> Self {
        QuadPoly::new(c0, c1, QSqrt2::zero())
    }

    /// The variable itself.
    pub fn x() -> Self {
        QuadPoly::linear(QSqrt2::zero(), QSqrt2::one())
    }

    pub fn from_integers(c0: i64, c1: i64, c2: i64) -> Self {
        QuadPoly::new(
            QSqrt2::integer(c0),
            QSqrt2::integer(c1),
            QSqrt2::integer(c2),
        )
    }

    pub fn degree(&self) -> Option<usize> {
        if !self.c2.is_zero() {
            Some(2)
        } else if !self.c1.is_zero() {
            Some(1)
        } else if !self.c0.is_zero() {
            Some(0)
        } else {
            None
        }
    }

    pub fn scale(&self, k: &QSqrt2) -> QuadPoly {
        QuadPoly::new(&self.c0 * k, &self.c1 * k, &self.c2 * k)
    }

    /// Product, or `None` when it would exceed degree two.
    pub fn checked_mul(&self, other: &QuadPoly) -> Option<QuadPoly> {
        let (da, db) = (self.degree().unwrap_or(0), other.degree().unwrap_or(0));
        if da + db > 2 {
            return None;
        }
        Some(QuadPoly::new(
            &self.c0 * &other.c0,
            &self.c0 * &other.c1 + &self.c1 * &other.c0,
            &self.c0 * &other.c2 + &self.c1 * &other.c1 + &self.c2 * &other.c0,
        ))
    }

    pub fn square(&self) -> Option<QuadPoly> {
        self.checked_mul(self)
    }

    pub fn eval(&self, x: &QSqrt2) -> QSqrt2 {
        &(&self.c0 + &(&self.c1 * x)) + &(&(&self.c2 * x) * x)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.c0.to_f64() + self.c1.to_f64() * x + self.c2.to_f64() * x * x
    }

    pub fn is_rational(&self) -> bool {
        self.c0.is_rational() && self.c1.is_rational() && self.c2.is_rational()
    }

    /// For rational coefficients, the positive multiple with coprime integer
    /// coefficients. Multiplying by a positive constant keeps `self <= 0`
    /// equivalent.
    pub fn primitive(&self) -> Option<QuadPoly> {
        if !self.is_rational() {
            return None;
        }
        let coeffs = [&self.c0, &self.c1, &self.c2].map(|c| c.rational_part().clone());
        let lcm = coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = coeffs
            .iter()
            .map(|c| c.numer() * (&lcm / c.denom()))
            .collect();
        let gcd = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if gcd.is_zero() {
            return Some(QuadPoly::zero());
        }
        let scaled: Vec<QSqrt2> = ints
            .iter()
            .map(|c| QSqrt2::new(BigRational::from_integer(c / &gcd), BigRational::zero()))
            .collect();
        Some(QuadPoly::new(
            scaled[0].clone(),
            scaled[1].clone(),
            scaled[2].clone(),
        ))
    }

    /// Real roots `(smaller, larger)` of a quadratic with rational coefficients
    /// whose discriminant has a square root in Q(√2).
    pub fn roots(&self) -> Option<(QSqrt2, QSqrt2)> {
        if self.c2.is_zero() || !self.is_rational() {
            return None;
        }
        let disc = &(&self.c1 * &self.c1) - &(&QSqrt2::integer(4) * &(&self.c2 * &self.c0));
        let root = QSqrt2::sqrt_rational(disc.rational_part())?;
        let two_a = &QSqrt2::integer(2) * &self.c2;
        let r1 = (&(-&self.c1) - &root).checked_div(&two_a)?;
        let r2 = (&(-&self.c1) + &root).checked_div(&two_a)?;
        Some(if r1 <= r2 { (r1, r2) } else { (r2, r1) })
    }

    /// Renders the polynomial in `var`, highest degree first, e.g.
    /// `32p^2 - 16p + 1`.
    pub fn render(&self, var: &str) -> String {
        let terms = [(&self.c2, 2), (&self.c1, 1), (&self.c0, 0)];
        let mut out = String::new();
        for (c, power) in terms {
            if c.is_zero() {
                continue;
            }
            let negative = c.signum() == Ordering::Less;
            let magnitude = if negative { -c } else { c.clone() };
            let coeff = magnitude.to_string();
            let needs_parens = coeff.contains(['+', '-']) && !coeff.starts_with('(');
            let coeff = if needs_parens {
                format!("({coeff})")
            } else {
                coeff
            };
            let body = match (power, magnitude.is_rational() && magnitude == QSqrt2::one()) {
                (0, _) => coeff,
                (1, true) => var.to_string(),
                (1, false) => format!("{coeff}{var}"),
                (_, true) => format!("{var}^2"),
                (_, false) => format!("{coeff}{var}^2"),
            };
            if out.is_empty() {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

impl Add<&QuadPoly> for &QuadPoly {
    type Output = QuadPoly;
    fn add(self, rhs: &QuadPoly) -> QuadPoly {
        QuadPoly::new(&self.c0 + &rhs.c0, &self.c1 + &rhs.c1, &self.c2 + &rhs.c2)
    }
}

impl Sub<&QuadPoly> for &QuadPoly {
    type Output = QuadPoly;
    fn sub(self, rhs: &QuadPoly) -> QuadPoly {
        QuadPoly::new(&self.c0 - &rhs.c0, &self.c1 - &rhs.c1, &self.c2 - &rhs.c2)
    }
}

impl Serialize for QuadPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [&self.c0, &self.c1, &self.c2].serialize(serializer)
    }
}
