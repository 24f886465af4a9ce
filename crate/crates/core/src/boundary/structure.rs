//! Structural identities of the projector calculus: the higher-weight Wenzl relation,
//! cut-down norms and the conjugate Cauchy–Schwarz estimate.

use faer::MatRef;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, C64};
use crate::tower::Tower;

/// Least-squares fit of the Wenzl scalar for one `(p, q, n)` and one vector `ζ ∈ H_{p+q}`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WenzlFit {
    pub p: usize,
    pub q: usize,
    pub n: usize,
    pub alpha_re: f64,
    pub alpha_im: f64,
    /// `‖L − αR‖_F / ‖L‖_F`.
    pub residual: f64,
    pub lhs_norm: f64,
}

impl WenzlFit {
    pub fn alpha_abs(&self) -> f64 {
        self.alpha_re.hypot(self.alpha_im)
    }
}

/// Compares `L = Σ (ζ̄^{(1)*} ⊗ id_{n−p}) P_n (ζ^{(2)} ⊗ id_{n−q})` (with `ζ ∈ H_p ⊗ H_q`) against
/// `R = Σ P_{n−p}(ζ_{(1)} ζ̄_{(2)}* ⊗ id_{n−p−q})P_{n−q}` (with `ζ ∈ H_q ⊗ H_p`), both maps
/// `H_{n−q} → H_{n−p}`.
pub fn wenzl_relation(tower: &Tower, p: usize, q: usize, n: usize, zeta: MatRef<'_, C64>) -> Result<WenzlFit> {
    if p == 0 || q == 0 || p + q > n {
        return Err(Error::Index(format!("Wenzl relation needs p,q >= 1 and p+q <= n, got p={p} q={q} n={n}")));
    }
    tower.check_level(n)?;
    if zeta.nrows() != tower.dim(p + q) || zeta.ncols() != 1 {
        return Err(Error::Shape(format!("zeta must be a vector of length {}", tower.dim(p + q))));
    }
    let (dp, dq, dnp, dnq) = (tower.dim(p), tower.dim(q), tower.dim(n - p), tower.dim(n - q));
    let x = linalg::unvec(tower.apply_embed(p, q, zeta).as_ref(), dp, dq);
    let z = linalg::unvec(tower.apply_embed(q, p, zeta).as_ref(), dq, dp);
    let tp = tower.conj_matrix(p)?;

    // ζ̄^{(1)*} contributes conj(T_p e_a) paired against H_p
    let kmat = linalg::conj(tp.as_ref()) * &x;
    let jq = tower.apply_embed(q, n - q, linalg::eye(tower.dim(n)).as_ref());
    let y = tower.apply_embed(p, n - p, linalg::adj(jq.as_ref()).as_ref());
    let lhs = CMat::from_fn(dnp, dnq, |u, v| {
        let mut s = c(0.0, 0.0);
        for cc in 0..dp {
            for b in 0..dq {
                s += kmat[(cc, b)] * y[(cc * dnp + u, b * dnq + v)];
            }
        }
        s
    });

    let o = &z * tp.adjoint();
    let m = n - p - q;
    let jp = tower.apply_embed(p, m, linalg::eye(dnq).as_ref());
    let r = linalg::kron_left(o.as_ref(), tower.dim(m), jp.as_ref());
    let rhs = tower.apply_embed_adj(q, m, r.as_ref());

    let rr = c(linalg::frob(rhs.as_ref()).powi(2), 0.0);
    let rl = linalg::trace_prod(linalg::adj(rhs.as_ref()).as_ref(), lhs.as_ref());
    let alpha = if rr.re > 0.0 { rl / rr } else { c(0.0, 0.0) };
    let lhs_norm = linalg::frob(lhs.as_ref());
    let diff = linalg::sub(lhs.as_ref(), linalg::scale(rhs.as_ref(), alpha).as_ref());
    let residual = if lhs_norm > 0.0 { linalg::frob(diff.as_ref()) / lhs_norm } else { linalg::frob(diff.as_ref()) };
    Ok(WenzlFit { p, q, n, alpha_re: alpha.re, alpha_im: alpha.im, residual, lhs_norm })
}

/// `‖(P_l ⊗ P_{k−l})(id_{l−1} ⊗ t_1 ⊗ id_{k−l−1})P_m^{l−1,k−l−1}‖²` with `m = k−2−2b`,
/// measured and from the dimension formula `dim_q(b)dim_q(k−b−1)/(dim_q(l−1)dim_q(k−l−1))`.
pub fn cutdown_norm(tower: &Tower, k: usize, l: usize, b: usize) -> Result<(f64, f64)> {
    if l == 0 || l >= k || b > (l - 1).min(k - l - 1) {
        return Err(Error::Index(format!("cut-down norm needs 1 <= l < k and b <= min(l-1, k-l-1), got k={k} l={l} b={b}")));
    }
    tower.check_level(k)?;
    let (a, r) = (l - 1, k - l - 1);
    let m = k - 2 - 2 * b;
    let big_n = tower.params().n();
    let (da, dr) = (tower.dim(a), tower.dim(r));
    let v = tower.apply_intertwiner(a, r, m, linalg::eye(tower.dim(m)).as_ref())?;
    let t1 = tower.duality_matrix(1)?;
    let y = CMat::from_fn(da * big_n * big_n * dr, v.ncols(), |row, col| {
        let w = row % dr;
        let rest = row / dr;
        let (beta, rest) = (rest % big_n, rest / big_n);
        let (alpha, u) = (rest % big_n, rest / big_n);
        t1[(alpha, beta)] * v[(u * dr + w, col)]
    });
    let y = linalg::apply_left_factor(y.as_ref(), da * big_n, big_n * dr, |x| tower.apply_embed_adj(a, 1, x));
    let y = linalg::apply_right_factor(y.as_ref(), tower.dim(l), big_n * dr, |x| tower.apply_embed_adj(1, r, x));
    let measured = linalg::frob(y.as_ref()).powi(2) / tower.dim(m) as f64;
    let formula = tower.qdim(b) * tower.qdim(k - b - 1) / (tower.qdim(a) * tower.qdim(r));
    Ok((measured, formula))
}

/// `(Σ_i ‖ξ^{(1)}_i‖ ‖j* f_i‖, ‖ξ‖ dim_q(l)^{1/2})` for `ξ = Σ_i ξ^{(1)}_i ⊗ f_i ∈ H_{k−l} ⊗ H_l`,
/// where `f_i` runs over an eigenbasis of `F_l`.
pub fn sim_form(tower: &Tower, k: usize, l: usize, xi: MatRef<'_, C64>) -> Result<(f64, f64)> {
    if l > k {
        return Err(Error::Index(format!("sim_form needs l <= k, got k={k} l={l}")));
    }
    tower.check_level(k)?;
    let (da, db) = (tower.dim(k - l), tower.dim(l));
    if xi.nrows() != da * db || xi.ncols() != 1 {
        return Err(Error::Shape(format!("xi must be a vector of length {}", da * db)));
    }
    let x = linalg::unvec(xi, da, db);
    let f = tower.modular(l)?;
    let (_, basis) = linalg::herm_eigen(f.as_ref())?;
    let tl = tower.conj_matrix(l)?;
    let tlt = linalg::transpose(tl.as_ref());
    let mut lhs = 0.0;
    for i in 0..db {
        let fc = linalg::conj(basis.col(i).as_mat());
        let first = &x * &fc;
        // j*(v) = T_lᵀ conj(v)
        let jstar = &tlt * &fc;
        lhs += linalg::frob(first.as_ref()) * linalg::frob(jstar.as_ref());
    }
    Ok((lhs, linalg::frob(xi) * tower.qdim(l).sqrt()))
}
