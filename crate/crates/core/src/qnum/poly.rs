//! Exact Laurent polynomials and Laurent-rational functions in a formal variable `q`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `q^shift * (c_0 + c_1 q + ... + c_d q^d)` with integer coefficients.
///
/// Normalized so that `c_0 != 0` and `c_d != 0`; the zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    shift: i64,
    coeffs: Vec<BigInt>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self { shift: 0, coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::monomial(1, 0)
    }

    pub fn monomial(c: i64, exp: i64) -> Self {
        Self::from_coeffs(exp, vec![BigInt::from(c)])
    }

    /// Builds `q^shift * sum c_i q^i` and normalizes.
    pub fn from_coeffs(shift: i64, coeffs: Vec<BigInt>) -> Self {
        let mut p = Self { shift, coeffs };
        p.normalize();
        p
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        let lead_zeros = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead_zeros > 0 {
            self.coeffs.drain(..lead_zeros);
            self.shift += lead_zeros as i64;
        }
        if self.coeffs.is_empty() {
            self.shift = 0;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.shift == 0 && self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// Lowest exponent present (0 for the zero polynomial).
    pub fn low_exp(&self) -> i64 {
        self.shift
    }

    /// Highest exponent present.
    pub fn high_exp(&self) -> i64 {
        self.shift + self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Coefficient of `q^e`.
    pub fn coeff(&self, e: i64) -> BigInt {
        let i = e - self.shift;
        if i < 0 || i >= self.coeffs.len() as i64 {
            BigInt::zero()
        } else {
            self.coeffs[i as usize].clone()
        }
    }

    /// The substitution q -> 1/q.
    pub fn invert_variable(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut c = self.coeffs.clone();
        c.reverse();
        Self::from_coeffs(-self.high_exp(), c)
    }

    pub fn is_symmetric(&self) -> bool {
        *self == self.invert_variable()
    }

    pub fn mul_q_pow(&self, e: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Self { shift: self.shift + e, coeffs: self.coeffs.clone() }
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::from_coeffs(self.shift, self.coeffs.iter().map(|x| x * c).collect())
    }

    /// gcd of the coefficients, positive (0 for the zero polynomial).
    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    /// Evaluates at a real `q > 0` with Horner's rule.
    pub fn eval(&self, q: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * q + c.to_f64().unwrap_or(f64::NAN);
        }
        acc * q.powi(self.shift as i32)
    }

    /// Exact division; `None` unless `other` divides `self` in Z[q, 1/q].
    pub fn div_exact(&self, other: &Self) -> Option<Self> {
        assert!(!other.is_zero(), "division by the zero polynomial");
        if self.is_zero() {
            return Some(Self::zero());
        }
        let (quot, rem) = poly_divrem(&self.coeffs, &other.coeffs)?;
        if rem.iter().any(|c| !c.is_zero()) {
            return None;
        }
        Some(Self::from_coeffs(self.shift - other.shift, quot))
    }
}

/// Long division of ordinary polynomials over Z; fails if a non-integer quotient coefficient appears.
fn poly_divrem(a: &[BigInt], b: &[BigInt]) -> Option<(Vec<BigInt>, Vec<BigInt>)> {
    if a.len() < b.len() {
        return Some((vec![BigInt::zero()], a.to_vec()));
    }
    let mut rem = a.to_vec();
    let lb = b.last().unwrap();
    let mut quot = vec![BigInt::zero(); a.len() - b.len() + 1];
    for i in (0..quot.len()).rev() {
        let top = &rem[i + b.len() - 1];
        if top.is_zero() {
            continue;
        }
        let (qc, r) = top.div_rem(lb);
        if !r.is_zero() {
            return None;
        }
        for (j, bj) in b.iter().enumerate() {
            rem[i + j] -= &qc * bj;
        }
        quot[i] = qc;
    }
    rem.truncate(b.len() - 1);
    Some((quot, rem))
}

/// Pseudo-remainder of a by b (deg a >= deg b).
fn pseudo_rem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut rem = a.to_vec();
    let lb = b.last().unwrap().clone();
    while rem.len() >= b.len() {
        let top = rem.last().unwrap().clone();
        let off = rem.len() - b.len();
        for c in rem.iter_mut() {
            *c *= &lb;
        }
        for (j, bj) in b.iter().enumerate() {
            rem[off + j] -= &top * bj;
        }
        rem.pop();
        while rem.last().is_some_and(|c| c.is_zero()) {
            rem.pop();
        }
    }
    rem
}

fn primitive(v: &[BigInt]) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    if g.is_zero() || g.is_one() {
        return v.to_vec();
    }
    v.iter().map(|c| c / &g).collect()
}

/// Primitive gcd of two nonzero ordinary polynomials (ignores shifts), leading coefficient positive.
fn poly_gcd(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut x = primitive(a);
    let mut y = primitive(b);
    if x.len() < y.len() {
        std::mem::swap(&mut x, &mut y);
    }
    while !y.is_empty() {
        let r = pseudo_rem(&x, &y);
        x = y;
        y = primitive(&r);
    }
    if x.last().is_some_and(|c| c.is_negative()) {
        x = x.iter().map(|c| -c).collect();
    }
    x
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let lo = self.shift.min(rhs.shift);
        let hi = self.high_exp().max(rhs.high_exp());
        let coeffs = (lo..=hi).map(|e| self.coeff(e) + rhs.coeff(e)).collect();
        LaurentPoly::from_coeffs(lo, coeffs)
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly { shift: self.shift, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self + &(-rhs)
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() || rhs.is_zero() {
            return LaurentPoly::zero();
        }
        let mut c = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        LaurentPoly::from_coeffs(self.shift + rhs.shift, c)
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let e = self.shift + i as i64;
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            let unit = mag.is_one();
            match e {
                0 => write!(f, "{mag}")?,
                1 if unit => write!(f, "q")?,
                1 => write!(f, "{mag}q")?,
                _ if unit => write!(f, "q^{e}")?,
                _ => write!(f, "{mag}q^{e}")?,
            }
        }
        Ok(())
    }
}

/// A quotient `num/den` of Laurent polynomials, kept in lowest terms.
///
/// Invariants: `den` is a primitive ordinary polynomial (shift 0) with positive
/// leading coefficient and `gcd(num, den) = 1`; zero is `0/1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QRational {
    num: LaurentPoly,
    den: LaurentPoly,
}

impl QRational {
    pub fn new(num: LaurentPoly, den: LaurentPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return Self::zero();
        }
        // Move the denominator's q-power into the numerator.
        let num = num.mul_q_pow(-den.shift);
        let den_c = den.coeffs.clone();
        let g = poly_gcd(&num.coeffs, &den_c);
        let num_c = poly_divrem(&num.coeffs, &g).expect("gcd divides numerator").0;
        let den_c = poly_divrem(&den_c, &g).expect("gcd divides denominator").0;
        let mut num = LaurentPoly::from_coeffs(num.shift, num_c);
        let mut den = LaurentPoly::from_coeffs(0, den_c);
        // Remaining powers of q in den were removed by from_coeffs normalization; push them back.
        num = num.mul_q_pow(-den.shift);
        den.shift = 0;
        let dc = den.content();
        let nc = num.content();
        let cg = dc.gcd(&nc);
        if !cg.is_one() {
            num = LaurentPoly::from_coeffs(num.shift, num.coeffs.iter().map(|c| c / &cg).collect());
            den = LaurentPoly::from_coeffs(0, den.coeffs.iter().map(|c| c / &cg).collect());
        }
        if den.leading().is_some_and(|c| c.is_negative()) {
            num = -&num;
            den = -&den;
        }
        Self { num, den }
    }

    pub fn zero() -> Self {
        Self { num: LaurentPoly::zero(), den: LaurentPoly::one() }
    }

    pub fn one() -> Self {
        Self::from_poly(LaurentPoly::one())
    }

    pub fn from_int(c: i64) -> Self {
        Self::from_poly(LaurentPoly::monomial(c, 0))
    }

    pub fn from_poly(p: LaurentPoly) -> Self {
        Self::new(p, LaurentPoly::one())
    }

    pub fn num(&self) -> &LaurentPoly {
        &self.num
    }

    pub fn den(&self) -> &LaurentPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// True when the value is a Laurent polynomial (denominator is a constant 1).
    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn eval(&self, q: f64) -> f64 {
        self.num.eval(q) / self.den.eval(q)
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn invert_variable(&self) -> Self {
        Self::new(self.num.invert_variable(), self.den.invert_variable())
    }

    pub fn pow(&self, e: i32) -> Self {
        let base = if e < 0 { self.recip() } else { self.clone() };
        let mut acc = Self::one();
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        acc
    }
}

impl Add for &QRational {
    type Output = QRational;
    fn add(self, rhs: &QRational) -> QRational {
        if self.den == rhs.den {
            return QRational::new(&self.num + &rhs.num, self.den.clone());
        }
        QRational::new(&(&self.num * &rhs.den) + &(&rhs.num * &self.den), &self.den * &rhs.den)
    }
}

impl Neg for &QRational {
    type Output = QRational;
    fn neg(self) -> QRational {
        QRational { num: -&self.num, den: self.den.clone() }
    }
}

impl Sub for &QRational {
    type Output = QRational;
    fn sub(self, rhs: &QRational) -> QRational {
        self + &(-rhs)
    }
}

impl Mul for &QRational {
    type Output = QRational;
    fn mul(self, rhs: &QRational) -> QRational {
        QRational::new(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl std::ops::Div for &QRational {
    type Output = QRational;
    fn div(self, rhs: &QRational) -> QRational {
        self * &rhs.recip()
    }
}

impl fmt::Display for QRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_polynomial() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(shift: i64, c: &[i64]) -> LaurentPoly {
        LaurentPoly::from_coeffs(shift, c.iter().map(|&x| BigInt::from(x)).collect())
    }

    #[test]
    fn normalization_strips_zeros() {
        let a = p(-2, &[0, 0, 1, 0]);
        assert_eq!(a, LaurentPoly::one());
        assert!(p(3, &[0, 0]).is_zero());
    }

    #[test]
    fn exact_division() {
        // (q^2 - 1) / (q - 1) = q + 1
        let a = p(0, &[-1, 0, 1]);
        let b = p(0, &[-1, 1]);
        assert_eq!(a.div_exact(&b), Some(p(0, &[1, 1])));
        assert_eq!(b.div_exact(&a), None);
    }

    #[test]
    fn rational_reduces() {
        // (q^2-1)/(q^2+2q+1) = (q-1)/(q+1)
        let r = QRational::new(p(0, &[-1, 0, 1]), p(0, &[1, 2, 1]));
        assert_eq!(r.num(), &p(0, &[-1, 1]));
        assert_eq!(r.den(), &p(0, &[1, 1]));
        let s = &r - &r;
        assert!(s.is_zero());
    }

    #[test]
    fn shifts_and_constants_cancel() {
        // (2q^-1 + 2q) / (4q^3) = (1 + q^2) / (2 q^4)
        let r = QRational::new(p(-1, &[2, 0, 2]), p(3, &[4]));
        assert_eq!(r.num(), &p(-4, &[1, 0, 1]));
        assert_eq!(r.den(), &p(0, &[2]));
        assert!((r.eval(0.5) - (1.25 / (2.0 * 0.0625))).abs() < 1e-12);
    }

    #[test]
    fn display() {
        assert_eq!(p(-1, &[1, 0, 1]).to_string(), "q + q^-1");
        assert_eq!(p(0, &[3, -2]).to_string(), "-2q + 3");
    }
}
