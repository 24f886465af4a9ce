//! q-integers, quantum dimensions, fusion triples, κ coefficients and random-walk weights.
//!
//! Every value is produced twice: as an exact Laurent-rational function of a
//! formal `q` and as a float at the model's numeric `q`.

mod poly;
mod product;

pub use poly::{LaurentPoly, QRational};
pub use product::QIntProduct;

use serde::Serialize;

use crate::error::{Error, Result};

/// An exact value together with its evaluation at a numeric `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct QValue {
    pub exact: QRational,
    pub float: f64,
}

impl QValue {
    pub fn from_exact(exact: QRational, q: f64) -> Self {
        let float = exact.eval(q);
        Self { exact, float }
    }

    /// Relative gap between the exact form evaluated at `q` and the float path.
    pub fn consistency(&self, q: f64) -> f64 {
        let e = self.exact.eval(q);
        (e - self.float).abs() / e.abs().max(f64::MIN_POSITIVE)
    }
}

/// Solves `q + 1/q = tr` for `q ∈ (0, 1]`.
pub fn q_from_trace(tr: f64) -> Result<f64> {
    // roundoff in Tr(F_1) for unitary Q may land a few ulps below 2
    if !tr.is_finite() || tr < 2.0 - 1e-12 {
        return Err(Error::InvalidParameter(format!("trace of F_1 must be at least 2, got {tr}")));
    }
    let tr = tr.max(2.0);
    // 2/(t + sqrt(t^2-4)) avoids the cancellation in (t - sqrt(t^2-4))/2.
    Ok(2.0 / (tr + (tr * tr - 4.0).max(0.0).sqrt()))
}

/// `[n]_q` as an exact symmetric Laurent polynomial; `[0] = 0`.
pub fn qint_exact(n: u32) -> LaurentPoly {
    if n == 0 {
        return LaurentPoly::zero();
    }
    let n = n as i64;
    // q^{n-1} + q^{n-3} + ... + q^{-(n-1)}
    let mut c = vec![num_bigint::BigInt::from(0); (2 * n - 1) as usize];
    for i in (0..c.len()).step_by(2) {
        c[i] = 1.into();
    }
    LaurentPoly::from_coeffs(-(n - 1), c)
}

/// `[n]_q` in floating point; `n` at `q = 1`.
pub fn qint_float(n: u32, q: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if (q - 1.0).abs() < 1e-12 {
        return n as f64;
    }
    let n = n as i32;
    (q.powi(-n) - q.powi(n)) / (q.powi(-1) - q)
}

/// Quantum dimension of level `n`, `[n+1]_q`, as a float.
pub fn qdim_float(n: u32, q: f64) -> f64 {
    qint_float(n + 1, q)
}

/// Quantum dimension with a negative level mapped to 0.
pub fn qdim_float_signed(n: i64, q: f64) -> f64 {
    if n < 0 {
        0.0
    } else {
        qdim_float(n as u32, q)
    }
}

pub fn qdim(n: u32, q: f64) -> QValue {
    QValue { exact: QRational::from_poly(qint_exact(n + 1)), float: qdim_float(n, q) }
}

/// An admissible fusion channel `t ⊂ r ⊗ s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FusionTriple {
    pub r: u32,
    pub s: u32,
    pub t: u32,
    pub a: u32,
}

impl FusionTriple {
    pub fn new(r: u32, s: u32, t: u32) -> Result<Self> {
        let sum = r + s;
        if t > sum || (sum - t) % 2 != 0 || (sum - t) / 2 > r.min(s) {
            return Err(Error::Fusion { r, s, t });
        }
        Ok(Self { r, s, t, a: (sum - t) / 2 })
    }

    pub fn admissible(r: u32, s: u32, t: u32) -> bool {
        Self::new(r, s, t).is_ok()
    }

    /// All channels `t ⊂ r ⊗ s`, from `r+s` downward.
    pub fn channels(r: u32, s: u32) -> impl Iterator<Item = FusionTriple> {
        (0..=r.min(s)).map(move |a| FusionTriple { r, s, t: r + s - 2 * a, a })
    }
}

/// `κ^{-2}` as a product of q-integers.
pub fn kappa_inv_sq_product(tr: FusionTriple) -> QIntProduct {
    let FusionTriple { r, s, t, a } = tr;
    let mut p = QIntProduct::one();
    p.mul_factorial(a, 1);
    p.mul_factorial(r - a, 1);
    p.mul_factorial(s - a, 1);
    p.mul_factorial(t + a + 1, 1);
    p.mul_factorial(r, -1);
    p.mul_factorial(s, -1);
    p.mul_factorial(t + 1, -1);
    p
}

/// κ_t^{r,s}: exact `κ^{-2}` plus the float value of κ.
#[derive(Clone, Debug)]
pub struct Kappa {
    pub triple: FusionTriple,
    pub inv_sq: QIntProduct,
    pub inv_sq_exact: QRational,
    pub value: f64,
}

impl Kappa {
    /// Display form, e.g. `1/sqrt([2]_q)`.
    pub fn exact_string(&self) -> String {
        if self.inv_sq.is_one() {
            "1".to_string()
        } else {
            format!("1/sqrt({})", self.inv_sq)
        }
    }
}

pub fn kappa(triple: FusionTriple, q: f64) -> Kappa {
    let inv_sq = kappa_inv_sq_product(triple);
    let value = inv_sq.eval(q).powf(-0.5);
    let inv_sq_exact = inv_sq.to_rational();
    Kappa { triple, inv_sq, inv_sq_exact, value }
}

/// `|1 − (κ_{t−k}^{r−k,s}/κ_t^{r,s})²|`.
pub fn kappa_ratio_defect(r: u32, s: u32, t: u32, k: u32, q: f64) -> Result<f64> {
    let big = FusionTriple::new(r, s, t)?;
    if k > r || k > t {
        return Err(Error::Fusion { r: r.saturating_sub(k), s, t: t.saturating_sub(k) });
    }
    let small = FusionTriple::new(r - k, s, t - k)?;
    // (κ_small/κ_big)^2 = inv_sq(big)/inv_sq(small), done on the product form so it cancels exactly
    let mut ratio = kappa_inv_sq_product(big);
    ratio.mul_assign(&kappa_inv_sq_product(small).recip());
    Ok((1.0 - ratio.eval(q)).abs())
}

/// Exact version of [`kappa_ratio_defect`] before the absolute value.
pub fn kappa_ratio_exact(r: u32, s: u32, t: u32, k: u32) -> Result<QRational> {
    let big = FusionTriple::new(r, s, t)?;
    let small = FusionTriple::new(r - k, s, t - k)?;
    let mut ratio = kappa_inv_sq_product(big);
    ratio.mul_assign(&kappa_inv_sq_product(small).recip());
    Ok(&QRational::one() - &ratio.to_rational())
}

/// Transition probabilities of the level walk driven by `qtr_1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WalkWeights {
    pub n: u32,
    pub p_down: f64,
    pub p_up: f64,
}

pub fn walk_weights(n: u32, q: f64) -> WalkWeights {
    let base = qdim_float(1, q) * qdim_float(n, q);
    let p_down = if n == 0 { 0.0 } else { qdim_float(n - 1, q) / base };
    let p_up = qdim_float(n + 1, q) / base;
    WalkWeights { n, p_down, p_up }
}

/// Exact `(p_down, p_up)`.
pub fn walk_weights_exact(n: u32) -> (QRational, QRational) {
    let base = QRational::from_poly(&qint_exact(2) * &qint_exact(n + 1));
    let down = QRational::from_poly(qint_exact(n));
    let up = QRational::from_poly(qint_exact(n + 2));
    (&down / &base, &up / &base)
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q3: f64 = 0.381_966_011_250_105_1;

    #[test]
    fn trace_to_q() {
        assert_eq!(q_from_trace(2.0).unwrap(), 1.0);
        assert!((q_from_trace(3.0).unwrap() - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-15);
        let q = q_from_trace(3.5).unwrap();
        assert!((q * q - 3.5 * q + 1.0).abs() < 1e-15);
        assert!((q - 0.313_859_338_365_492_8).abs() < 1e-15);
        assert!(q_from_trace(1.9).is_err());
        assert_eq!(q_from_trace(2.0 - 4e-16).unwrap(), 1.0);
    }

    #[test]
    fn kac3_dims() {
        let want = [1.0, 3.0, 8.0, 21.0, 55.0, 144.0];
        for (n, w) in want.iter().enumerate() {
            assert!((qdim_float(n as u32, Q3) - w).abs() < 1e-12 * w);
        }
    }

    #[test]
    fn triple_validation() {
        assert!(FusionTriple::new(1, 1, 1).is_err());
        assert!(FusionTriple::new(1, 2, 4).is_err());
        assert_eq!(FusionTriple::new(4, 3, 5).unwrap().a, 1);
        assert_eq!(FusionTriple::channels(2, 3).map(|t| t.t).collect::<Vec<_>>(), vec![5, 3, 1]);
    }

    #[test]
    fn kappa_examples() {
        let k = kappa(FusionTriple::new(1, 1, 0).unwrap(), Q3);
        assert_eq!(k.exact_string(), "1/sqrt([2]_q)");
        assert!((k.value - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        let k = kappa(FusionTriple::new(1, 2, 1).unwrap(), Q3);
        assert!((k.value - (3.0f64 / 8.0).sqrt()).abs() < 1e-14);
        assert_eq!(kappa(FusionTriple::new(3, 2, 5).unwrap(), Q3).exact_string(), "1");
    }

    #[test]
    fn walk_examples() {
        let w = walk_weights(1, Q3);
        assert!((w.p_down - 1.0 / 9.0).abs() < 1e-14 && (w.p_up - 8.0 / 9.0).abs() < 1e-14);
        let w = walk_weights(0, Q3);
        assert_eq!((w.p_down, w.p_up), (0.0, 1.0));
    }
}
