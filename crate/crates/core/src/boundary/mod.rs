//! Finite-horizon boundary data: ψ maps, the harmonic state, the level walk,
//! stationarity scans and Poisson blocks.

mod faithful;
mod structure;

pub use faithful::*;
pub use structure::*;

use faer::MatRef;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, C64};
use crate::qnum::{self, FusionTriple};
use crate::tower::ops::check_square;
use crate::tower::{Morphism, Tower};

/// `ψ_{m,n}(a) = J_{m,n−m}*(a ⊗ 1)J_{m,n−m}` on `H_n`.
pub fn psi(tower: &Tower, m: usize, n: usize, a: MatRef<'_, C64>) -> Result<CMat> {
    if m > n {
        return Err(Error::Index(format!("psi needs m <= n, got m={m} n={n}")));
    }
    tower.check_level(n)?;
    check_square(a, tower.dim(m))?;
    if m == n {
        return Ok(a.to_owned());
    }
    let j = tower.embed_matrix(m, n - m)?;
    let j: &CMat = &j;
    let y = linalg::kron_left(a, tower.dim(n - m), j.as_ref());
    Ok(j.adjoint() * y)
}

/// `Σ_c ⟨x_c, ψ_{m,n}(a) x_c⟩` over the columns of `x`, without forming `ψ_{m,n}(a)`.
pub fn psi_expectation(tower: &Tower, m: usize, n: usize, a: MatRef<'_, C64>, x: MatRef<'_, C64>) -> Result<C64> {
    if m > n {
        return Err(Error::Index(format!("psi needs m <= n, got m={m} n={n}")));
    }
    tower.check_level(n)?;
    check_square(a, tower.dim(m))?;
    let z = tower.apply_embed(m, n - m, x);
    let az = linalg::kron_left(a, tower.dim(n - m), z.as_ref());
    Ok(inner(z.as_ref(), az.as_ref()))
}

/// `Σ conj(x)·y` over all entries.
fn inner(x: MatRef<'_, C64>, y: MatRef<'_, C64>) -> C64 {
    let mut s = c(0.0, 0.0);
    for j in 0..x.ncols() {
        for i in 0..x.nrows() {
            s += x[(i, j)].conj() * y[(i, j)];
        }
    }
    s
}

/// An element of the finite-horizon algebra, given by its blocks from a base level up to a horizon.
#[derive(Clone, Debug)]
pub struct BoundaryElement {
    base: usize,
    blocks: Vec<CMat>,
}

impl BoundaryElement {
    /// `ψ_{m,·}(a)` on levels `m..=horizon`.
    pub fn from_base(tower: &Tower, m: usize, a: MatRef<'_, C64>, horizon: usize) -> Result<Self> {
        if horizon < m {
            return Err(Error::Index(format!("horizon {horizon} below base level {m}")));
        }
        tower.check_level(horizon)?;
        let blocks = (m..=horizon).map(|n| psi(tower, m, n, a)).collect::<Result<Vec<_>>>()?;
        Ok(Self { base: m, blocks })
    }

    /// Wraps explicit blocks for levels `base, base+1, …`; coherence is not enforced.
    pub fn from_blocks(tower: &Tower, base: usize, blocks: Vec<CMat>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidParameter("a boundary element needs at least one block".into()));
        }
        tower.check_level(base + blocks.len() - 1)?;
        for (i, b) in blocks.iter().enumerate() {
            check_square(b.as_ref(), tower.dim(base + i))?;
        }
        Ok(Self { base, blocks })
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn horizon(&self) -> usize {
        self.base + self.blocks.len() - 1
    }

    /// Block at level `n`, or `None` outside `base..=horizon`.
    pub fn block(&self, n: usize) -> Option<&CMat> {
        n.checked_sub(self.base).and_then(|i| self.blocks.get(i))
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    /// `max_n ‖b_n − ψ_{m,n}(b_m)‖_F`.
    pub fn coherence_defect(&self, tower: &Tower) -> Result<f64> {
        let mut worst = 0.0f64;
        for (i, b) in self.blocks.iter().enumerate().skip(1) {
            let want = psi(tower, self.base, self.base + i, self.blocks[0].as_ref())?;
            worst = worst.max(linalg::frob(linalg::sub(b.as_ref(), want.as_ref()).as_ref()));
        }
        Ok(worst)
    }

    /// Operator norms of the blocks, base level first.
    pub fn norms(&self) -> Result<Vec<f64>> {
        self.blocks.iter().map(|b| linalg::op_norm(b.as_ref())).collect()
    }

    /// Norm of the top block, the finite-horizon stand-in for the limit norm.
    pub fn boundary_norm(&self) -> Result<f64> {
        linalg::op_norm(self.blocks[self.blocks.len() - 1].as_ref())
    }
}

/// The harmonic state at finite horizon: `qtr_T(b_T)`.
pub fn omega(tower: &Tower, b: &BoundaryElement) -> Result<C64> {
    tower.qtr(b.horizon(), b.blocks[b.blocks.len() - 1].as_ref())
}

/// A state `ν(a) = Tr(ρ a)` on `B(H_k)`.
#[derive(Clone, Debug)]
pub struct LevelState {
    level: usize,
    density: CMat,
}

impl LevelState {
    /// The normalized quantum trace, `ρ = F_k / dim_q(k)`.
    pub fn qtr(tower: &Tower, k: usize) -> Result<Self> {
        let f = tower.modular(k)?;
        Ok(Self { level: k, density: linalg::scale_re(f.as_ref(), 1.0 / tower.qdim(k)) })
    }

    /// The vector state of `v` (normalized here).
    pub fn pure(tower: &Tower, k: usize, v: MatRef<'_, C64>) -> Result<Self> {
        tower.check_level(k)?;
        if v.nrows() != tower.dim(k) || v.ncols() != 1 {
            return Err(Error::Shape(format!("pure state at level {k} needs a {}-vector", tower.dim(k))));
        }
        let nrm = linalg::frob(v);
        if !(nrm > 0.0) || !nrm.is_finite() {
            return Err(Error::InvalidParameter("pure state from a zero or non-finite vector".into()));
        }
        let u = linalg::scale_re(v, 1.0 / nrm);
        Ok(Self { level: k, density: &u * u.adjoint() })
    }

    /// Validates positivity (eigenvalues ≥ −1e-12) and unit trace (1e-12).
    pub fn from_density(tower: &Tower, k: usize, rho: CMat) -> Result<Self> {
        tower.check_level(k)?;
        check_square(rho.as_ref(), tower.dim(k))?;
        let herm = linalg::frob(linalg::sub(rho.as_ref(), linalg::adj(rho.as_ref()).as_ref()).as_ref());
        if herm > 1e-10 * (1.0 + linalg::frob(rho.as_ref())) {
            return Err(Error::InvalidParameter(format!("density is not Hermitian (defect {herm:.3e})")));
        }
        let ev = linalg::herm_eigenvalues(rho.as_ref())?;
        if ev.iter().any(|&x| x < -1e-12) {
            return Err(Error::InvalidParameter("density has a negative eigenvalue".into()));
        }
        let tr = linalg::trace(rho.as_ref());
        if (tr - c(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::InvalidParameter(format!("density trace is {tr}, expected 1")));
        }
        Ok(Self { level: k, density: rho })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn density(&self) -> &CMat {
        &self.density
    }

    pub fn eval(&self, a: MatRef<'_, C64>) -> Result<C64> {
        check_square(a, self.density.nrows())?;
        Ok(linalg::trace_prod(self.density.as_ref(), a))
    }

    /// Vectors `y_i` with `ρ = Σ y_i y_i*` (weights folded in), dropping null directions.
    fn factor(&self) -> Result<CMat> {
        let (vals, vecs) = linalg::herm_eigen(self.density.as_ref())?;
        let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 1e-15).collect();
        Ok(CMat::from_fn(vecs.nrows(), keep.len(), |r, j| vecs[(r, keep[j])] * vals[keep[j]].sqrt()))
    }
}

/// One step of the walk `(qtr_1 ⊗ ν)∘Δ` from level `n`.
#[derive(Clone, Debug)]
pub struct MarkovStep {
    pub n: usize,
    pub p_down: f64,
    pub p_up: f64,
    /// Normalized state at level `n−1` (absent for `n = 0`).
    pub down: Option<LevelState>,
    pub up: LevelState,
}

/// Level-`u` part of `(qtr_1 ⊗ ν)∘Δ`, as an unnormalized density on `H_u`.
fn markov_density(tower: &Tower, n: usize, rho: MatRef<'_, C64>, u: usize) -> Result<CMat> {
    let f1 = tower.modular(1)?;
    let d = linalg::kron(linalg::scale_re(f1.as_ref(), 1.0 / tower.qdim(1)).as_ref(), rho);
    let v = tower.apply_intertwiner(1, n, u, linalg::eye(tower.dim(u)).as_ref())?;
    Ok(v.adjoint() * (&d * &v))
}

/// Splits `(qtr_1 ⊗ ν)∘Δ` into its level-`(n−1)` and level-`(n+1)` parts.
pub fn markov_apply(tower: &Tower, n: usize, state: &LevelState) -> Result<MarkovStep> {
    if state.level != n {
        return Err(Error::InvalidParameter(format!("state lives on level {}, expected {n}", state.level)));
    }
    tower.check_level(n + 1)?;
    let split = |u: usize| -> Result<(f64, LevelState)> {
        let rho = markov_density(tower, n, state.density.as_ref(), u)?;
        let p = linalg::trace(rho.as_ref()).re;
        let density = if p > 0.0 { linalg::scale_re(rho.as_ref(), 1.0 / p) } else { rho };
        Ok((p, LevelState { level: u, density }))
    };
    let (p_up, up) = split(n + 1)?;
    let (p_down, down) = if n == 0 {
        (0.0, None)
    } else {
        let (p, s) = split(n - 1)?;
        (p, Some(s))
    };
    Ok(MarkovStep { n, p_down, p_up, down, up })
}

/// Comparison of the walk step from `qtr_n` with the exact transition weights.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MarkovResidual {
    pub n: usize,
    pub p_down: f64,
    pub p_up: f64,
    /// `max_u ‖ρ_u − p_u·F_u/dim_q(u)‖_F` with the exact weights `p_u`.
    pub residual: f64,
    /// Largest deviation of the measured weights from the exact ones.
    pub weight_error: f64,
}

pub fn markov_residual(tower: &Tower, n: usize) -> Result<MarkovResidual> {
    tower.check_level(n + 1)?;
    let exact = qnum::walk_weights(n as u32, tower.q());
    let f = tower.modular(n)?;
    let rho = linalg::scale_re(f.as_ref(), 1.0 / tower.qdim(n));
    let mut residual = 0.0f64;
    let mut weight_error = 0.0f64;
    let mut measured = [0.0, 0.0];
    let levels: Vec<(usize, f64, usize)> = if n == 0 {
        vec![(1, exact.p_up, 1)]
    } else {
        vec![(n - 1, exact.p_down, 0), (n + 1, exact.p_up, 1)]
    };
    for (u, p, slot) in levels {
        let got = markov_density(tower, n, rho.as_ref(), u)?;
        let fu = tower.modular(u)?;
        let want = linalg::scale_re(fu.as_ref(), p / tower.qdim(u));
        residual = residual.max(linalg::frob(linalg::sub(got.as_ref(), want.as_ref()).as_ref()));
        let pm = linalg::trace(got.as_ref()).re;
        weight_error = weight_error.max((pm - p).abs());
        measured[slot] = pm;
    }
    Ok(MarkovResidual { n, p_down: measured[0], p_up: measured[1], residual, weight_error })
}

/// `ν_k^{n,r}(a) = Σ_m (qtr_n ⊗ ν_r)(V^s_{n,r} ψ_{k,s}(a) V^{s*})`, `s = n+r−2m`.
///
/// The top channel `s = n+r` may sit one level above the tower; it is evaluated through
/// the projection onto the unstored level `L+1`.
pub fn stationarity_value(
    tower: &Tower,
    k: usize,
    n: usize,
    nu: &LevelState,
    a: MatRef<'_, C64>,
) -> Result<C64> {
    let r = nu.level;
    let l = tower.max_level();
    tower.check_level(n)?;
    tower.check_level(r)?;
    check_square(a, tower.dim(k))?;
    if n.abs_diff(r) < k {
        return Err(Error::Index(format!("stationarity needs |n-r| >= k, got n={n} r={r} k={k}")));
    }
    if n + r > l + 1 {
        return Err(Error::OutOfTower { level: n + r, max: l + 1 });
    }
    // (F_n/dim_q(n)) ⊗ ρ = Σ y y*
    let fq = LevelState::qtr(tower, n)?.factor()?;
    let g = nu.factor()?;
    let y = linalg::kron(fq.as_ref(), g.as_ref());
    let mut total = c(0.0, 0.0);
    for s in (n.abs_diff(r)..=n + r).step_by(2) {
        if s > l {
            total += top_channel_value(tower, k, n, r, a, y.as_ref())?;
            continue;
        }
        let x = tower.apply_intertwiner_adj(n, r, s, y.as_ref())?;
        total += psi_expectation(tower, k, s, a, x.as_ref())?;
    }
    Ok(total)
}

/// Channel `s = L+1 = n+r`, where `V^s_{n,r} = J_{n,r}` and `J_{k,L+1−k} = (J_{k,L−k} ⊗ 1)J_{L,1}`.
fn top_channel_value(tower: &Tower, k: usize, n: usize, r: usize, a: MatRef<'_, C64>, y: MatRef<'_, C64>) -> Result<C64> {
    let l = tower.max_level();
    let big_n = tower.params().n();
    let step = tower.step(r - 1)?;
    let z = linalg::kron_right(tower.dim(n), step.as_ref(), y);
    let z = linalg::apply_left_factor(z.as_ref(), tower.dim(n) * tower.dim(r - 1), big_n, |b| {
        tower.apply_embed_adj(n, l - n, b)
    });
    let u = tower.top_projector_apply(z.as_ref())?;
    let w = linalg::apply_left_factor(u.as_ref(), tower.dim(l), big_n, |b| tower.apply_embed(k, l - k, b));
    let aw = linalg::kron_left(a, tower.dim(l - k) * big_n, w.as_ref());
    Ok(inner(w.as_ref(), aw.as_ref()))
}

/// `ν_k^{n,r}(a) − qtr_k(a)`.
pub fn stationarity_residual(
    tower: &Tower,
    k: usize,
    n: usize,
    nu: &LevelState,
    a: MatRef<'_, C64>,
) -> Result<C64> {
    Ok(stationarity_value(tower, k, n, nu, a)? - tower.qtr(k, a)?)
}

/// `(id ⊗ ν_r)` of the `(k, r)` coproduct block of `b`: `Σ_u (id ⊗ ν_r)(V^u_{k,r} b_u V^{u*})`.
///
/// Channels below the base level of `b` contribute nothing.
pub fn poisson_block(tower: &Tower, k: usize, nu: &LevelState, b: &BoundaryElement) -> Result<CMat> {
    let r = nu.level;
    tower.check_level(k)?;
    if k + r > b.horizon() {
        return Err(Error::OutOfTower { level: k + r, max: b.horizon() });
    }
    let mut out = linalg::zeros(tower.dim(k), tower.dim(k));
    for u in (k.abs_diff(r)..=k + r).step_by(2) {
        let Some(bu) = b.block(u) else { continue };
        let v = tower.apply_intertwiner(k, r, u, linalg::eye(tower.dim(u)).as_ref())?;
        let x = &v * bu * v.adjoint();
        out += linalg::ptrace_second(x.as_ref(), tower.dim(r), nu.density.as_ref());
    }
    Ok(out)
}

/// `φ^{n,r}_{s,s'}(a) = V^{s*}_{n,r}(ψ_{k,n}(a) ⊗ 1_r)V^{s'}_{n,r}`, a map `H_{s'} → H_s`.
pub fn phi_op(
    tower: &Tower,
    n: usize,
    r: usize,
    s: usize,
    s2: usize,
    k: usize,
    a: MatRef<'_, C64>,
) -> Result<Morphism> {
    for t in [s, s2] {
        if !FusionTriple::admissible(n as u32, r as u32, t as u32) {
            return Err(Error::Fusion { r: n as u32, s: r as u32, t: t as u32 });
        }
    }
    let pa = psi(tower, k, n, a)?;
    let v2 = tower.apply_intertwiner(n, r, s2, linalg::eye(tower.dim(s2)).as_ref())?;
    let x = linalg::kron_left(pa.as_ref(), tower.dim(r), v2.as_ref());
    let m = tower.apply_intertwiner_adj(n, r, s, x.as_ref())?;
    Morphism::new(tower, vec![s2], vec![s], m)
}

/// The `(r, s)` block of `Δ(p_0)`.
pub fn delta_p0_block(tower: &Tower, r: usize, s: usize) -> Result<CMat> {
    tower.coproduct_block_at(linalg::eye(1).as_ref(), 0, r, s)
}

/// Frobenius distance between the `(r, s)` block of `Δ(p_0)` and `δ_{rs} t_r t_r*/dim_q(r)`,
/// computed from the vectors without forming the blocks.
pub fn delta_p0_defect(tower: &Tower, r: usize, s: usize) -> Result<f64> {
    tower.check_level(r.max(s))?;
    if r != s {
        // no channel H_0 ⊂ H_r ⊗ H_s: the block is zero by the fusion rules
        return Ok(0.0);
    }
    let v = tower.apply_intertwiner(r, r, 0, linalg::eye(1).as_ref())?;
    let t = tower.duality_vector(r)?;
    // target u u* with ‖u‖² = 1; split v = α û + w, w ⊥ û, so every term below is non-negative
    let unit = linalg::scale_re(t.as_ref(), 1.0 / linalg::frob(t.as_ref()));
    let uu = linalg::frob(t.as_ref()).powi(2) / tower.qdim(r);
    let alpha = inner(unit.as_ref(), v.as_ref());
    let w = linalg::sub(v.as_ref(), linalg::scale(unit.as_ref(), alpha).as_ref());
    let (a2, w2) = (alpha.norm_sqr(), linalg::frob(w.as_ref()).powi(2));
    Ok(((a2 - uu).powi(2) + 2.0 * a2 * w2 + w2 * w2).sqrt())
}
