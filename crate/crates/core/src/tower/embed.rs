//! The inclusions `J_{p,q}: H_{p+q} → H_p ⊗ H_q`, applied lazily through the step isometries.

use std::sync::Arc;

use faer::MatRef;

use super::{CacheKey, Morphism, Tower};
use crate::error::Result;
use crate::linalg::{self, CMat, C64};

impl Tower {
    /// `J_{p,q} X` for `X` with `d_{p+q}` rows.
    ///
    /// Uses `J_{p,q+1} = (id_p ⊗ J_{q,1}*)(J_{p,q} ⊗ id_1) J_{p+q,1}`.
    pub fn apply_embed(&self, p: usize, q: usize, x: MatRef<'_, C64>) -> CMat {
        assert!(p + q <= self.max_level, "embed beyond the tower");
        assert_eq!(x.nrows(), self.dims[p + q], "apply_embed: row count");
        if p == 0 || q == 0 {
            return x.to_owned();
        }
        if q == 1 {
            return &self.steps[p] * x;
        }
        let n1 = self.params.n;
        let y = &self.steps[p + q - 1] * x;
        let y = linalg::apply_left_factor(y.as_ref(), self.dims[p + q - 1], n1, |b| {
            self.apply_embed(p, q - 1, b)
        });
        let back = &self.steps[q - 1];
        linalg::apply_right_factor(y.as_ref(), self.dims[p], back.nrows(), |b| back.adjoint() * b)
    }

    /// `J_{p,q}* Y` for `Y` with `d_p d_q` rows.
    pub fn apply_embed_adj(&self, p: usize, q: usize, y: MatRef<'_, C64>) -> CMat {
        assert!(p + q <= self.max_level, "embed beyond the tower");
        assert_eq!(y.nrows(), self.dims[p] * self.dims[q], "apply_embed_adj: row count");
        if p == 0 || q == 0 {
            return y.to_owned();
        }
        if q == 1 {
            return self.steps[p].adjoint() * y;
        }
        let n1 = self.params.n;
        let z = linalg::kron_right(self.dims[p], self.steps[q - 1].as_ref(), y);
        let z = linalg::apply_left_factor(z.as_ref(), self.dims[p] * self.dims[q - 1], n1, |b| {
            self.apply_embed_adj(p, q - 1, b)
        });
        self.steps[p + q - 1].adjoint() * z
    }

    /// The full matrix of `J_{p,q}`, memoized within the tower's budget.
    pub fn embed_matrix(&self, p: usize, q: usize) -> Result<Arc<CMat>> {
        self.check_level(p + q)?;
        if p > 0 && q > 1 {
            if let Some(j) = self.memo_get(CacheKey::Embed(p, q)) {
                return Ok(j);
            }
        }
        let j = self.apply_embed(p, q, linalg::eye(self.dims[p + q]).as_ref());
        if p > 0 && q > 1 {
            Ok(self.memo_put(CacheKey::Embed(p, q), j))
        } else {
            Ok(Arc::new(j))
        }
    }

    pub fn embed(&self, p: usize, q: usize) -> Result<Morphism> {
        let m = self.embed_matrix(p, q)?;
        Morphism::new(self, vec![p + q], vec![p, q], m.as_ref().clone())
    }
}
