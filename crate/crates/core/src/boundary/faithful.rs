//! The witnesses used for faithfulness of the harmonic state: the element `A_n`,
//! the `w`-operators and the finite-horizon blocks of `z_n`.

use std::sync::Arc;

use faer::MatRef;

use super::psi;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, C64};
use crate::qnum::FusionTriple;
use crate::tower::ops::check_square;
use crate::tower::{ModularPower, Morphism, Tower};

/// Largest level dimension for which `A_n` is formed densely (`d² × d²`).
pub const A_DENSE_MAX_DIM: usize = 64;

/// `A_n = Σ_{i,j} e_j (F_n^{-1} e_i)* ⊗ e_i e_j*` as a dense operator on `H_n ⊗ H_n`.
pub fn a_element_dense(tower: &Tower, n: usize) -> Result<CMat> {
    let d = tower.dim(n);
    if d > A_DENSE_MAX_DIM {
        return Err(Error::Unsupported(format!("dense A_n needs d_n <= {A_DENSE_MAX_DIM}, level {n} has {d}")));
    }
    let fi = tower.modular_inverse(n)?;
    // entry ((a,b),(c,d')) = δ_{a d'} conj(F^{-1}[c,b])
    Ok(CMat::from_fn(d * d, d * d, |row, col| {
        let (a, b) = (row / d, row % d);
        let (cc, dd) = (col / d, col % d);
        if a == dd {
            fi[(cc, b)].conj()
        } else {
            c(0.0, 0.0)
        }
    }))
}

/// `Σ A_{(1)} g A_{(2)}`, read off a dense two-leg operator `A` on `H ⊗ H`.
pub fn leg_contract_dense(a: MatRef<'_, C64>, g: MatRef<'_, C64>) -> CMat {
    let d = g.nrows();
    // Σ_{c,b} A[(a,b),(c,d')] g[c,b]
    CMat::from_fn(d, d, |ai, di| {
        let mut s = c(0.0, 0.0);
        for cc in 0..d {
            for b in 0..d {
                s += a[(ai * d + b, cc * d + di)] * g[(cc, b)];
            }
        }
        s
    })
}

/// `Σ A_{(1)} g A_{(2)}` summed over the rank-one legs of `A_n`, without forming `A_n`.
pub fn a_average(tower: &Tower, n: usize, g: MatRef<'_, C64>) -> Result<CMat> {
    let d = tower.dim(n);
    check_square(g, d)?;
    let fi = tower.modular_inverse(n)?;
    let mut out = linalg::zeros(d, d);
    for i in 0..d {
        // (F^{-1} e_i)* g e_i
        let mut s = c(0.0, 0.0);
        for cc in 0..d {
            s += fi[(cc, i)].conj() * g[(cc, i)];
        }
        for j in 0..d {
            out[(j, j)] += s;
        }
    }
    Ok(out)
}

/// `Σ qTr_n(f A_{(1)} g A_{(2)})`.
pub fn a_split_trace(tower: &Tower, n: usize, f: MatRef<'_, C64>, g: MatRef<'_, C64>) -> Result<C64> {
    check_square(f, tower.dim(n))?;
    let avg = a_average(tower, n, g)?;
    tower.qtrace(n, (f * &avg).as_ref())
}

/// `(tilde ⊗ id)(A_n)` formed densely, slice by slice through [`Tower::tilde`].
pub fn a_tilde_dense(tower: &Tower, n: usize) -> Result<CMat> {
    let a = a_element_dense(tower, n)?;
    let d = tower.dim(n);
    let mut out = linalg::zeros(d * d, d * d);
    for b in 0..d {
        for dd in 0..d {
            let slice = CMat::from_fn(d, d, |ai, cc| a[(ai * d + b, cc * d + dd)]);
            let t = tower.tilde(n, slice.as_ref())?;
            for ai in 0..d {
                for cc in 0..d {
                    out[(ai * d + b, cc * d + dd)] = t[(ai, cc)];
                }
            }
        }
    }
    Ok(out)
}

/// `(tilde ⊗ id)(A_n) Y` for columns of `Y` in `H_n ⊗ H_n`, summed over the rank-one legs.
///
/// With `ã = (M^{-1} a M)ᵀ`, the leg `e_j (F^{-1}e_i)*` maps to `x_i w_jᵀ`, where
/// `x_i = conj(M* F^{-1} e_i)` and `w_j = M^{-1} e_j`.
pub fn a_tilde_apply(tower: &Tower, n: usize, y: MatRef<'_, C64>) -> Result<CMat> {
    let d = tower.dim(n);
    if y.nrows() != d * d {
        return Err(Error::Shape(format!("A-tilde input needs {} rows", d * d)));
    }
    let m = tower.duality_matrix(n)?;
    let minv = linalg::inverse(m.as_ref());
    let fi = tower.modular_inverse(n)?;
    let x = linalg::conj((m.adjoint() * &fi).as_ref());
    let mut out = linalg::zeros(d * d, y.ncols());
    for col in 0..y.ncols() {
        // Σ_j w_jᵀ Y[:, j]
        let mut s = c(0.0, 0.0);
        for j in 0..d {
            for a in 0..d {
                s += minv[(a, j)] * y[(a * d + j, col)];
            }
        }
        for a in 0..d {
            for i in 0..d {
                out[(a * d + i, col)] = s * x[(a, i)];
            }
        }
    }
    Ok(out)
}

/// Level data shared by all `w`-operators with the same `(n, t, k, l)`.
struct WFrame {
    n: usize,
    t: usize,
    k: usize,
    l: usize,
    s: usize,
    j_n_s: Arc<CMat>,
    j_l: Arc<CMat>,
    fj: CMat,
    fj_right: CMat,
}

impl WFrame {
    fn new(tower: &Tower, n: usize, t: usize, k: usize, l: usize) -> Result<Self> {
        if !(l <= k && k <= n && n <= t) {
            return Err(Error::Index(format!("w-operator needs l <= k <= n <= t, got n={n} t={t} k={k} l={l}")));
        }
        let s = t + k - 2 * l;
        if s < n {
            return Err(Error::Index(format!("w-operator needs s = t+k-2l >= n, got s={s} n={n}")));
        }
        tower.check_level(s.max(t))?;
        let j_n_s = tower.embed_matrix(n, s - n)?;
        let j_n_t = tower.embed_matrix(n, t - n)?;
        let j_l = tower.embed_matrix(l, t - l)?;
        let f = tower.modular(n)?;
        let fi = tower.modular_inverse(n)?;
        let fj = linalg::kron_left(f.as_ref(), tower.dim(t - n), j_n_t.as_ref().as_ref());
        let fj_right = linalg::kron_left(fi.as_ref(), tower.dim(t - n), j_n_t.as_ref().as_ref());
        Ok(Self { n, t, k, l, s, j_n_s, j_l, fj, fj_right })
    }

    /// Returns `(w, w')` for `ξ` given as a `d_{k−l} × d_l` matrix.
    fn apply(&self, tower: &Tower, x: MatRef<'_, C64>) -> Result<(CMat, CMat)> {
        let (t, k, l, n) = (self.t, self.k, self.l, self.n);
        let tm = tower.duality_matrix(l)?;
        let m_xi = x * tm.conjugate();
        let g = if k == 0 {
            // A is the scalar ξ times id_t
            linalg::scale(self.j_n_s.as_ref().as_ref(), m_xi[(0, 0)])
        } else {
            let a = linalg::kron_left(m_xi.as_ref(), tower.dim(t - l), self.j_l.as_ref().as_ref());
            let a = tower.apply_embed_adj(k - l, t - l, a.as_ref());
            self.j_n_s.as_ref() * a
        };
        let norm = 1.0 / tower.qdim(t).sqrt();
        let d = tower.dim(n);
        let w = linalg::scale_re(linalg::block_trace_pair(g.as_ref(), self.fj.as_ref(), d).as_ref(), norm);
        let wr = linalg::scale_re(linalg::block_trace_pair(g.as_ref(), self.fj_right.as_ref(), d).as_ref(), norm);
        Ok((w, wr))
    }
}

fn xi_matrix(tower: &Tower, k: usize, l: usize, xi: MatRef<'_, C64>) -> Result<CMat> {
    let (da, db) = (tower.dim(k - l), tower.dim(l));
    if xi.nrows() != da * db || xi.ncols() != 1 {
        return Err(Error::Shape(format!("xi must be a vector of length {}", da * db)));
    }
    Ok(linalg::unvec(xi, da, db))
}

/// `w^{k,l}_{n,t}(ξ) = dim_q(t)^{-1/2} (qTr_n ⊗ id)(P_s(ξ^{(1)} ξ̄^{(2)*} ⊗ id_{t−l})P_t)`,
/// a map `H_{t−n} → H_{s−n}` with `s = t+k−2l`; `ξ ∈ H_{k−l} ⊗ H_l`.
/// With `right = true` the trace is `qTr'_n`.
pub fn w_op(
    tower: &Tower,
    n: usize,
    t: usize,
    k: usize,
    l: usize,
    xi: MatRef<'_, C64>,
    right: bool,
) -> Result<Morphism> {
    let frame = WFrame::new(tower, n, t, k, l)?;
    let x = xi_matrix(tower, k, l, xi)?;
    let (w, wr) = frame.apply(tower, x.as_ref())?;
    Morphism::new(tower, vec![t - n], vec![frame.s - n], if right { wr } else { w })
}

/// `‖w‖_HS = qTr_p(w* w)^{1/2}` for `w` with source level `p`.
pub fn hs_norm(tower: &Tower, p: usize, w: MatRef<'_, C64>) -> Result<f64> {
    let ww = w.adjoint() * w;
    Ok(tower.qtrace(p, ww.as_ref())?.re.max(0.0).sqrt())
}

/// `(F_l^{1/2} ⊗ F_{k−l}^{1/2}) ξ̄` for `ξ ∈ H_{k−l} ⊗ H_l`, a vector of `H_l ⊗ H_{k−l}`.
pub fn conjugate_vector(tower: &Tower, k: usize, l: usize, xi: MatRef<'_, C64>) -> Result<CMat> {
    let x = xi_matrix(tower, k, l, xi)?;
    let tl = tower.conj_matrix(l)?;
    let tkl = tower.conj_matrix(k - l)?;
    let y = &tl * x.adjoint() * linalg::transpose(tkl.as_ref());
    let hl = tower.modular_power(l, ModularPower::Half)?;
    let hkl = tower.modular_power(k - l, ModularPower::Half)?;
    let (hl, hkl): (&CMat, &CMat) = (&hl, &hkl);
    let y = hl * y * linalg::transpose(hkl.as_ref());
    Ok(linalg::vec_of(y.as_ref()))
}

/// Both sides of the conjugation symmetry
/// `dim_q(t)^{1/2}‖w^{k,l}_{n,t}(ξ)‖_HS = dim_q(s)^{1/2}‖w^{k,k−l}_{n,s}((F^{1/2} ⊗ F^{1/2})ξ̄)‖_HS`.
pub fn w_conjugation_sides(
    tower: &Tower,
    n: usize,
    t: usize,
    k: usize,
    l: usize,
    xi: MatRef<'_, C64>,
) -> Result<(f64, f64)> {
    let s = t + k - 2 * l;
    let w = w_op(tower, n, t, k, l, xi, false)?;
    let lhs = tower.qdim(t).sqrt() * hs_norm(tower, t - n, w.matrix.as_ref())?;
    let xb = conjugate_vector(tower, k, l, xi)?;
    let wb = w_op(tower, n, s, k, k - l, xb.as_ref(), false)?;
    let rhs = tower.qdim(s).sqrt() * hs_norm(tower, s - n, wb.matrix.as_ref())?;
    Ok((lhs, rhs))
}

fn check_z_range(tower: &Tower, k: usize, n: usize, t: usize) -> Result<()> {
    if !(k <= n && n <= t) {
        return Err(Error::Index(format!("z-block needs k <= n <= t, got k={k} n={n} t={t}")));
    }
    tower.check_level(t + k)
}

/// Finite-horizon `p_k`-block of `z_n`:
/// `Z[a,b] = Σ_l (κ_s^{k,t})² qTr_{t−n}(w^{k,l}_{n,t}(ξ_a)* w'^{k,l}_{n,t}(ξ_b))`,
/// with `ξ_a` the `a`-th column of `J_{k−l,l}`.
pub fn z_block(tower: &Tower, k: usize, n: usize, t: usize) -> Result<CMat> {
    check_z_range(tower, k, n, t)?;
    let dk = tower.dim(k);
    let mut z = linalg::zeros(dk, dk);
    for l in 0..=k {
        let s = t + k - 2 * l;
        if s < n {
            continue;
        }
        let frame = WFrame::new(tower, n, t, k, l)?;
        let jk = tower.apply_embed(k - l, l, linalg::eye(dk).as_ref());
        let mut ws = Vec::with_capacity(dk);
        let mut wrs = Vec::with_capacity(dk);
        for a in 0..dk {
            let x = linalg::unvec(jk.col(a).as_mat(), tower.dim(k - l), tower.dim(l));
            let (w, wr) = frame.apply(tower, x.as_ref())?;
            ws.push(w);
            wrs.push(wr);
        }
        let kap = tower.kappa(k, t, s)?;
        let f = tower.modular(t - n)?;
        for a in 0..dk {
            let fw = f * ws[a].adjoint();
            for b in 0..dk {
                z[(a, b)] += linalg::trace_prod(fw.as_ref(), wrs[b].as_ref()) * (kap * kap);
            }
        }
    }
    Ok(z)
}

/// The same block by direct slicing of the coproduct:
/// the `p_k` part of `(id ⊗ qtr_t)(Δ(ψ_{n,·}(A_{(1)}))(1 ⊗ ψ_{n,t}(A_{(2)})))`. Small levels only.
pub fn z_block_direct(tower: &Tower, k: usize, n: usize, t: usize) -> Result<CMat> {
    check_z_range(tower, k, n, t)?;
    let (dk, dn, dt) = (tower.dim(k), tower.dim(n), tower.dim(t));
    let fi = tower.modular_inverse(n)?;
    let ft = tower.modular(t)?;
    let mut channels = Vec::new();
    for tr in FusionTriple::channels(k as u32, t as u32) {
        let s = tr.t as usize;
        if s < n {
            continue;
        }
        channels.push((s, tower.apply_intertwiner(k, t, s, linalg::eye(tower.dim(s)).as_ref())?));
    }
    let mut z = linalg::zeros(dk, dk);
    for i in 0..dn {
        for j in 0..dn {
            // A_(1) = e_j (F^{-1} e_i)*, A_(2) = e_i e_j*
            let a1 = CMat::from_fn(dn, dn, |r, cc| if r == j { fi[(cc, i)].conj() } else { c(0.0, 0.0) });
            let mut a2 = linalg::zeros(dn, dn);
            a2[(i, j)] = c(1.0, 0.0);
            let mut x = linalg::zeros(dk * dt, dk * dt);
            for (s, v) in &channels {
                let p = psi(tower, n, *s, a1.as_ref())?;
                x += v * p * v.adjoint();
            }
            let p2 = psi(tower, n, t, a2.as_ref())?;
            let x = x * linalg::kron(linalg::eye(dk).as_ref(), p2.as_ref());
            z += linalg::ptrace_second(x.as_ref(), dt, ft.as_ref());
        }
    }
    Ok(linalg::scale_re(z.as_ref(), 1.0 / tower.qdim(t)))
}

/// Finite-horizon blocks `p_k z_n` for `k = 0..=k_max` at horizon `t`.
#[derive(Clone, Debug)]
pub struct FaithfulnessWitness {
    pub n: usize,
    pub t: usize,
    pub blocks: Vec<CMat>,
}

impl FaithfulnessWitness {
    pub fn compute(tower: &Tower, n: usize, t: usize, k_max: usize) -> Result<Self> {
        let blocks = (0..=k_max).map(|k| z_block(tower, k, n, t)).collect::<Result<Vec<_>>>()?;
        Ok(Self { n, t, blocks })
    }

    /// `|block_0 − dim_q(t)/dim_q(t−n)|`.
    pub fn unit_defect(&self, tower: &Tower) -> f64 {
        let want = tower.qdim(self.t) / tower.qdim(self.t - self.n);
        (self.blocks[0][(0, 0)] - c(want, 0.0)).norm()
    }

    /// Largest `‖Z − Z*‖_F` over the blocks.
    pub fn hermitian_defect(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| linalg::frob(linalg::sub(b.as_ref(), linalg::adj(b.as_ref()).as_ref()).as_ref()))
            .fold(0.0, f64::max)
    }
}

/// `(|qtr_t(B ψ_{n,t}(e))|, dim_q(t−n)/dim_q(t) ‖B‖ ‖e F_n‖)` for rank-one `e`.
pub fn cone_bound_check(
    tower: &Tower,
    n: usize,
    t: usize,
    b: MatRef<'_, C64>,
    e: MatRef<'_, C64>,
) -> Result<(f64, f64)> {
    if n > t {
        return Err(Error::Index(format!("cone bound needs n <= t, got n={n} t={t}")));
    }
    check_square(b, tower.dim(t))?;
    check_square(e, tower.dim(n))?;
    let top = linalg::frob(e);
    if !is_rank_one(e) {
        return Err(Error::InvalidParameter("cone bound needs a rank-one e".into()));
    }
    let p = psi(tower, n, t, e)?;
    let lhs = tower.qtr(t, (b * p).as_ref())?.norm();
    if top == 0.0 {
        return Ok((lhs, 0.0));
    }
    let f = tower.modular(n)?;
    let ef = e * f;
    let rhs = tower.qdim(t - n) / tower.qdim(t) * linalg::op_norm(b)? * linalg::op_norm(ef.as_ref())?;
    Ok((lhs, rhs))
}

/// `e` equals its projection onto its largest column, up to `1e-10‖e‖_F`.
fn is_rank_one(e: MatRef<'_, C64>) -> bool {
    let total = linalg::frob(e);
    if total == 0.0 {
        return true;
    }
    let best = (0..e.ncols())
        .max_by(|&a, &b| linalg::frob(e.col(a).as_mat()).total_cmp(&linalg::frob(e.col(b).as_mat())))
        .unwrap_or(0);
    let u = e.col(best).as_mat().to_owned();
    let uu = linalg::frob(u.as_ref()).powi(2);
    let proj = linalg::scale_re((&u * (u.adjoint() * e)).as_ref(), 1.0 / uu);
    linalg::frob(linalg::sub(e, proj.as_ref()).as_ref()) <= 1e-10 * total
}
