use std::collections::BTreeMap;
use std::fmt;

use super::{qint_exact, qint_float, LaurentPoly, QRational};

/// A monomial `∏ [n]_q^{e_n}` over q-integers with `n ≥ 2`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QIntProduct {
    exps: BTreeMap<u32, i32>,
}

impl QIntProduct {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn mul_qint(&mut self, n: u32, e: i32) {
        assert!(n > 0, "[0]_q = 0 cannot enter a product");
        if n == 1 || e == 0 {
            return;
        }
        let v = self.exps.entry(n).or_insert(0);
        *v += e;
        if *v == 0 {
            self.exps.remove(&n);
        }
    }

    /// Multiplies by `([n]_q!)^e`.
    pub fn mul_factorial(&mut self, n: u32, e: i32) {
        for i in 2..=n {
            self.mul_qint(i, e);
        }
    }

    pub fn mul_assign(&mut self, other: &Self) {
        for (&n, &e) in &other.exps {
            self.mul_qint(n, e);
        }
    }

    pub fn recip(&self) -> Self {
        Self { exps: self.exps.iter().map(|(&n, &e)| (n, -e)).collect() }
    }

    pub fn eval(&self, q: f64) -> f64 {
        self.exps.iter().map(|(&n, &e)| qint_float(n, q).powi(e)).product()
    }

    pub fn to_rational(&self) -> QRational {
        let mut num = LaurentPoly::one();
        let mut den = LaurentPoly::one();
        for (&n, &e) in &self.exps {
            let f = qint_exact(n);
            for _ in 0..e.unsigned_abs() {
                if e > 0 {
                    num = &num * &f;
                } else {
                    den = &den * &f;
                }
            }
        }
        QRational::new(num, den)
    }
}

impl fmt::Display for QIntProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let part = |f: &mut fmt::Formatter<'_>, pos: bool| -> fmt::Result {
            let mut first = true;
            for (&n, &e) in &self.exps {
                if (e > 0) != pos {
                    continue;
                }
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                write!(f, "[{n}]_q")?;
                if e.abs() > 1 {
                    write!(f, "^{}", e.abs())?;
                }
            }
            if first {
                write!(f, "1")?;
            }
            Ok(())
        };
        part(f, true)?;
        if self.exps.values().any(|&e| e < 0) {
            write!(f, "/")?;
            let multi = self.exps.values().filter(|&&e| e < 0).count() > 1;
            if multi {
                write!(f, "(")?;
            }
            part(f, false)?;
            if multi {
                write!(f, ")")?;
            }
        }
        Ok(())
    }
}
