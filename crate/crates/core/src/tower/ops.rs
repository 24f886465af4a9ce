//! Intertwiners, quantum traces, the transpose-like map, coproduct blocks and
//! Jones–Wenzl comparisons on a built tower.

use faer::MatRef;
use serde::Serialize;

use super::{Morphism, Tower};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, C64};
use crate::qnum::{self, FusionTriple};

/// `‖J_{n−m,m} J_{k,n−k}* − (J_{k,n−m−k}* ⊗ id_m)(id_k ⊗ J_{n−m−k,m})‖`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct JwDefect {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub norm: f64,
}

impl Tower {
    fn triple(&self, r: usize, s: usize, t: usize) -> Result<FusionTriple> {
        self.check_level(r)?;
        self.check_level(s)?;
        self.check_level(t)?;
        let tr = FusionTriple::new(r as u32, s as u32, t as u32)?;
        // the embeddings used inside V touch level max(r, s)
        Ok(tr)
    }

    pub fn kappa(&self, r: usize, s: usize, t: usize) -> Result<f64> {
        Ok(qnum::kappa(self.triple(r, s, t)?, self.q()).value)
    }

    /// Unnormalized `(J_{r−a,a}* ⊗ J_{a,s−a}*)(id ⊗ t_a ⊗ id) J_{r−a,s−a} X` for `X` on `H_t`.
    fn intertwiner_raw_apply(&self, tr: FusionTriple, x: MatRef<'_, C64>) -> CMat {
        let (r, s, a) = (tr.r as usize, tr.s as usize, tr.a as usize);
        let (dra, da, dsa) = (self.dims[r - a], self.dims[a], self.dims[s - a]);
        let e = self.apply_embed(r - a, s - a, x);
        let tm = &self.duality[a];
        let cols = e.ncols();
        let y = CMat::from_fn(dra * da * da * dsa, cols, |row, col| {
            let v = row % dsa;
            let rest = row / dsa;
            let (beta, rest) = (rest % da, rest / da);
            let (alpha, u) = (rest % da, rest / da);
            tm[(alpha, beta)] * e[(u * dsa + v, col)]
        });
        let z = linalg::apply_left_factor(y.as_ref(), dra * da, da * dsa, |b| {
            self.apply_embed_adj(r - a, a, b)
        });
        linalg::apply_right_factor(z.as_ref(), self.dims[r], da * dsa, |b| self.apply_embed_adj(a, s - a, b))
    }

    fn intertwiner_raw_adj_apply(&self, tr: FusionTriple, y: MatRef<'_, C64>) -> CMat {
        let (r, s, a) = (tr.r as usize, tr.s as usize, tr.a as usize);
        let (dra, da, dsa) = (self.dims[r - a], self.dims[a], self.dims[s - a]);
        let z = linalg::apply_right_factor(y, self.dims[r], self.dims[s], |b| self.apply_embed(a, s - a, b));
        let w = linalg::apply_left_factor(z.as_ref(), self.dims[r], da * dsa, |b| {
            self.apply_embed(r - a, a, b)
        });
        let tm = &self.duality[a];
        let cols = w.ncols();
        let mut x = linalg::zeros(dra * dsa, cols);
        for u in 0..dra {
            for alpha in 0..da {
                for beta in 0..da {
                    let coef = tm[(alpha, beta)].conj();
                    if coef == c(0.0, 0.0) {
                        continue;
                    }
                    for v in 0..dsa {
                        let src = ((u * da + alpha) * da + beta) * dsa + v;
                        for col in 0..cols {
                            x[(u * dsa + v, col)] += coef * w[(src, col)];
                        }
                    }
                }
            }
        }
        self.apply_embed_adj(r - a, s - a, x.as_ref())
    }

    /// `V_t^{r,s} X`, the isometric intertwiner `H_t → H_r ⊗ H_s` applied to `X`.
    pub fn apply_intertwiner(&self, r: usize, s: usize, t: usize, x: MatRef<'_, C64>) -> Result<CMat> {
        let tr = self.triple(r, s, t)?;
        self.check_level(r.max(s).max(t))?;
        if x.nrows() != self.dims[t] {
            return Err(Error::Shape(format!("intertwiner input needs {} rows", self.dims[t])));
        }
        let k = qnum::kappa(tr, self.q()).value;
        Ok(linalg::scale_re(self.intertwiner_raw_apply(tr, x).as_ref(), k))
    }

    /// `V_t^{r,s}* Y`.
    pub fn apply_intertwiner_adj(&self, r: usize, s: usize, t: usize, y: MatRef<'_, C64>) -> Result<CMat> {
        let tr = self.triple(r, s, t)?;
        if y.nrows() != self.dims[r] * self.dims[s] {
            return Err(Error::Shape(format!(
                "intertwiner adjoint input needs {} rows",
                self.dims[r] * self.dims[s]
            )));
        }
        let k = qnum::kappa(tr, self.q()).value;
        Ok(linalg::scale_re(self.intertwiner_raw_adj_apply(tr, y).as_ref(), k))
    }

    /// The unnormalized intertwiner applied to `X` on `H_t`.
    pub fn apply_intertwiner_raw(&self, r: usize, s: usize, t: usize, x: MatRef<'_, C64>) -> Result<CMat> {
        let tr = self.triple(r, s, t)?;
        if x.nrows() != self.dims[t] {
            return Err(Error::Shape(format!("intertwiner input needs {} rows", self.dims[t])));
        }
        Ok(self.intertwiner_raw_apply(tr, x))
    }

    /// The unnormalized intertwiner as a matrix; its Gram matrix is `κ^{-2}·id` in theory.
    pub fn intertwiner_raw(&self, r: usize, s: usize, t: usize) -> Result<CMat> {
        let tr = self.triple(r, s, t)?;
        Ok(self.intertwiner_raw_apply(tr, linalg::eye(self.dims[t]).as_ref()))
    }

    pub fn intertwiner(&self, r: usize, s: usize, t: usize) -> Result<Morphism> {
        let m = self.apply_intertwiner(r, s, t, linalg::eye(self.dims[t]).as_ref())?;
        Morphism::new(self, vec![t], vec![r, s], m)
    }

    /// `qTr_n(a) = t_n*(a ⊗ 1)t_n = Tr(F_n a)`.
    pub fn qtrace(&self, n: usize, a: MatRef<'_, C64>) -> Result<C64> {
        let f = self.modular(n)?;
        check_square(a, self.dims[n])?;
        Ok(linalg::trace_prod(f.as_ref(), a))
    }

    /// `qTr'_n(a) = t_n*(1 ⊗ a)t_n = Tr(F_n^{-1} a)`.
    pub fn qtrace_right(&self, n: usize, a: MatRef<'_, C64>) -> Result<C64> {
        check_square(a, self.dims[n])?;
        let fi = self.modular_inverse(n)?;
        Ok(linalg::trace_prod(fi.as_ref(), a))
    }

    /// `t_n*(1 ⊗ a)t_n` computed directly from the duality vector, without `F_n^{-1}`.
    pub fn qtrace_right_direct(&self, n: usize, a: MatRef<'_, C64>) -> Result<C64> {
        check_square(a, self.dims[n])?;
        let m = self.duality_matrix(n)?;
        // Σ conj(M[i,k]) a[k,l] M[i,l] = Tr(a Mᵀ conj(M))
        let x = linalg::transpose(m.as_ref()) * m.conjugate();
        Ok(linalg::trace_prod(a, x.as_ref()))
    }

    /// Normalized quantum trace `qtr_n = qTr_n / dim_q(n)`.
    pub fn qtr(&self, n: usize, a: MatRef<'_, C64>) -> Result<C64> {
        Ok(self.qtrace(n, a)? / self.qdim(n))
    }

    /// `(qTr_n ⊗ id)(X)` for `X` acting on `H_n ⊗ H_m`.
    pub fn qtrace_slice_left(&self, n: usize, x: MatRef<'_, C64>) -> Result<CMat> {
        let f = self.modular(n)?;
        check_divisible(x, self.dims[n])?;
        Ok(linalg::ptrace_first(x, self.dims[n], f.as_ref()))
    }

    /// `(id ⊗ qTr'_n)(X)` for `X` acting on `H_m ⊗ H_n`.
    pub fn qtrace_slice_right(&self, n: usize, x: MatRef<'_, C64>) -> Result<CMat> {
        let fi = self.modular_inverse(n)?;
        check_divisible(x, self.dims[n])?;
        Ok(linalg::ptrace_second(x, self.dims[n], fi.as_ref()))
    }

    /// `(id ⊗ qtr_n)(X)` with the normalized trace `Tr(F_n ·)/dim_q(n)` on the second factor.
    pub fn qtr_slice_second(&self, n: usize, x: MatRef<'_, C64>) -> Result<CMat> {
        let f = self.modular(n)?;
        check_divisible(x, self.dims[n])?;
        let out = linalg::ptrace_second(x, self.dims[n], f.as_ref());
        Ok(linalg::scale_re(out.as_ref(), 1.0 / self.qdim(n)))
    }

    /// `ã` with `(ã ⊗ 1)t_n = (1 ⊗ a)t_n`, i.e. `ã = (M⁻¹ a M)ᵀ` for `t_n ↔ M`.
    pub fn tilde(&self, n: usize, a: MatRef<'_, C64>) -> Result<CMat> {
        check_square(a, self.dims[n])?;
        let m = self.duality_matrix(n)?;
        let am = a * m;
        Ok(linalg::transpose(linalg::solve(m.as_ref(), am.as_ref()).as_ref()))
    }

    /// `V_t^{r,s} X V_t^{r,s}*`, or zero when `t ⊄ r ⊗ s`.
    pub fn coproduct_block(&self, x: MatRef<'_, C64>, r: usize, s: usize) -> Result<CMat> {
        self.check_level(r)?;
        self.check_level(s)?;
        let t = {
            let d = x.nrows();
            if x.ncols() != d {
                return Err(Error::Shape("coproduct block input must be square".into()));
            }
            match self.dims.iter().position(|&dd| dd == d) {
                Some(t) => t,
                None => return Err(Error::Shape(format!("no level of dimension {d}"))),
            }
        };
        self.coproduct_block_at(x, t, r, s)
    }

    /// As [`Tower::coproduct_block`] with the level of `X` given explicitly.
    pub fn coproduct_block_at(&self, x: MatRef<'_, C64>, t: usize, r: usize, s: usize) -> Result<CMat> {
        self.check_level(t)?;
        check_square(x, self.dims[t])?;
        let big = self.dims[r] * self.dims[s];
        if !FusionTriple::admissible(r as u32, s as u32, t as u32) {
            return Ok(linalg::zeros(big, big));
        }
        let v = self.apply_intertwiner(r, s, t, linalg::eye(self.dims[t]).as_ref())?;
        Ok(&v * x * v.adjoint())
    }

    /// Operator norm of the Jones–Wenzl comparison defect; needs `0 ≤ k ≤ n−m ≤ n ≤ L`.
    pub fn jw_defect(&self, n: usize, m: usize, k: usize) -> Result<JwDefect> {
        self.check_level(n)?;
        if m > n || k > n - m {
            return Err(Error::InvalidParameter(format!("jw_defect needs k <= n-m <= n, got n={n} m={m} k={k}")));
        }
        let j_kn = self.embed_matrix(k, n - k)?;
        let first = self.apply_embed(n - m, m, linalg::adj(j_kn.as_ref().as_ref()).as_ref());
        let (dk, dmid, dm) = (self.dims[k], self.dims[n - m - k], self.dims[m]);
        let inner = self.embed_matrix(n - m - k, m)?;
        let inner: &CMat = &inner;
        let second = linalg::kron(linalg::eye(dk).as_ref(), inner.as_ref());
        let second = linalg::apply_left_factor(second.as_ref(), dk * dmid, dm, |b| {
            self.apply_embed_adj(k, n - m - k, b)
        });
        let diff = linalg::sub(first.as_ref(), second.as_ref());
        let norm = linalg::op_norm(diff.as_ref())?;
        Ok(JwDefect { n, m, k, norm })
    }

    /// The unnormalized lower map `H_{n−1} → H_n ⊗ H_1`, `(J_{n−1,1}* ⊗ id)(id ⊗ t_1)`.
    pub fn lower_apply(&self, n: usize, x: MatRef<'_, C64>) -> CMat {
        let big_n = self.params.n;
        let dn1 = self.dims[n - 1];
        assert_eq!(x.nrows(), dn1);
        let t1 = &self.duality[1];
        let y = CMat::from_fn(dn1 * big_n * big_n, x.ncols(), |row, col| {
            let beta = row % big_n;
            let rest = row / big_n;
            let (alpha, u) = (rest % big_n, rest / big_n);
            t1[(alpha, beta)] * x[(u, col)]
        });
        let step = &self.steps[n - 1];
        linalg::apply_left_factor(y.as_ref(), step.nrows(), big_n, |b| step.adjoint() * b)
    }

    /// Adjoint of [`Tower::lower_apply`].
    pub fn lower_apply_adj(&self, n: usize, y: MatRef<'_, C64>) -> CMat {
        let big_n = self.params.n;
        let dn1 = self.dims[n - 1];
        let step = &self.steps[n - 1];
        let w = linalg::kron_left(step.as_ref(), big_n, y);
        let t1 = &self.duality[1];
        let cols = w.ncols();
        CMat::from_fn(dn1, cols, |u, col| {
            let mut s = c(0.0, 0.0);
            for alpha in 0..big_n {
                for beta in 0..big_n {
                    s += t1[(alpha, beta)].conj() * w[((u * big_n + alpha) * big_n + beta, col)];
                }
            }
            s
        })
    }

    /// Projection of `H_L ⊗ H_1` onto the image of the (unstored) level `L+1`.
    pub fn top_projector_apply(&self, y: MatRef<'_, C64>) -> Result<CMat> {
        let l = self.max_level;
        if y.nrows() != self.dims[l] * self.params.n {
            return Err(Error::Shape(format!("top projector input needs {} rows", self.dims[l] * self.params.n)));
        }
        let k = self.kappa(l, 1, l - 1)?;
        let low = self.lower_apply(l, self.lower_apply_adj(l, y).as_ref());
        Ok(linalg::sub(y, linalg::scale_re(low.as_ref(), k * k).as_ref()))
    }
}

pub(crate) fn check_square(a: MatRef<'_, C64>, d: usize) -> Result<()> {
    if a.nrows() != d || a.ncols() != d {
        return Err(Error::Shape(format!("expected a {d}x{d} matrix, got {}x{}", a.nrows(), a.ncols())));
    }
    Ok(())
}

pub(crate) fn check_divisible(a: MatRef<'_, C64>, d: usize) -> Result<()> {
    if a.nrows() != a.ncols() || a.nrows() % d != 0 {
        return Err(Error::Shape(format!(
            "expected a square matrix with a factor of dimension {d}, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}
