//! The registered checks. Each walks its index range and feeds a [`Recorder`].

use std::collections::BTreeMap;

use faer::MatRef;

use super::{check_rng, trend_violation, CheckParams, Recorder, Session};
use crate::boundary;
use crate::error::Result;
use crate::linalg::{self, c, CMat, C64};
use crate::qnum::{self, FusionTriple};
use crate::tower::Tower;

/// Matrices with more rows than this are checked on random probe columns instead of densely.
const DENSE_GRAM_MAX: usize = 1000;
const PROBE_COLUMNS: usize = 8;
/// Per-cell work cap (complex multiply-adds) for the spanning-set trace coherence test.
const COHERENCE_CELL_BUDGET: f64 = 4e9;
/// Highest level for the ψ norm scan and the Jones–Wenzl scan.
const PSI_SCAN_MAX: usize = 7;
const JW_SCAN_MAX: usize = 7;
/// Highest level for the φ estimate (`n + r`).
const PHI_SCAN_MAX: usize = 7;

/// The tolerance that the `--tol` option replaces.
fn tol(p: &CheckParams) -> f64 {
    p.tol
}

/// `q^{-1/2}`: the growth a bounded ratio sequence may show between its first and last thirds.
fn trend_slack(tower: &Tower) -> f64 {
    tower.q().powf(-0.5)
}

fn trend(rec: &mut Recorder, tower: &Tower, label: &str, seq: &[f64]) -> Result<()> {
    match trend_violation(seq, trend_slack(tower)) {
        Some(v) => {
            rec.violation(v);
            rec.constant(format!("trend[{label}]"), v)?;
        }
        None => rec.note(format!("{label}: {} point(s), no trend test", seq.len())),
    }
    Ok(())
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// `‖X*X − I‖_F / √cols` for the Gram matrix of an isometry candidate's columns.
fn gram_defect(x: MatRef<'_, C64>) -> f64 {
    let g = x.adjoint() * x;
    linalg::dist_to_identity(g.as_ref()) / (x.ncols() as f64).sqrt()
}

/// Isometry defect of `apply`, densely for small sources and on probes otherwise:
/// `‖(AX)*(AX) − X*X‖_F / ‖X*X‖_F`.
fn isometry_defect(
    d: usize,
    rng: &mut impl rand::Rng,
    apply: impl Fn(MatRef<'_, C64>) -> Result<CMat>,
) -> Result<f64> {
    if d <= DENSE_GRAM_MAX {
        let y = apply(linalg::eye(d).as_ref())?;
        return Ok(gram_defect(y.as_ref()));
    }
    let x = linalg::gaussian(rng, d, PROBE_COLUMNS);
    let y = apply(x.as_ref())?;
    let gx = x.adjoint() * &x;
    let gy = y.adjoint() * &y;
    Ok(linalg::frob(linalg::sub(gy.as_ref(), gx.as_ref()).as_ref()) / linalg::frob(gx.as_ref()))
}

fn unit_hermitian(rng: &mut impl rand::Rng, d: usize) -> Result<CMat> {
    let a = linalg::random_hermitian(rng, d);
    let nrm = linalg::herm_norm(a.as_ref())?;
    Ok(linalg::scale_re(a.as_ref(), 1.0 / nrm))
}

pub(super) fn kappa_oracle(ses: &Session<'_>, p: &CheckParams, rec: &mut Recorder) -> Result<()> {
    let tower = ses.tower();
    let (l, q) = (tower.max_level(), tower.q());
    let tol = tol(p);
    rec.expect("κ from the closed formula = inverse norm of the raw intertwiner; raw Gram ∝ id", tol);
    let mut rng = check_rng(p, "kappa-oracle");
    let (mut d1, mut d2, mut count) = (f64::INFINITY, 0.0f64, 0usize);
    for r in 0..=l {
        for s in 0..=l - r {
            for tr in FusionTriple::channels(r as u32, s as u32) {
                let t = tr.t as usize;
                let dt = tower.dim(t);
                let x = if dt <= 64 { linalg::eye(dt) } else { linalg::gaussian(&mut rng, dt, PROBE_COLUMNS) };
                let y = tower.apply_intertwiner_raw(r, s, t, x.as_ref())?;
                let gx = x.adjoint() * &x;
                let gy = y.adjoint() * &y;
                let scale = linalg::trace(gy.as_ref()).re / linalg::trace(gx.as_ref()).re;
                let gram = linalg::frob(linalg::sub(gy.as_ref(), linalg::scale_re(gx.as_ref(), scale).as_ref()).as_ref())
                    / (scale * linalg::frob(gx.as_ref()));
                let measured = scale.sqrt().recip();
                let exact = tower.kappa(r, s, t)?;
                rec.error(&[r, s, t], rel(measured, exact).max(gram), tol)?;
                let scaled = exact / q.powf(f64::from(tr.a) / 2.0);
                d1 = d1.min(scaled);
                d2 = d2.max(scaled);
                count += 1;
            }
        }
    }
    rec.constant("D1", d1)?;
    rec.constant("D2", d2)?;
    rec.constant("D2/D1", d2 / d1)?;
    rec.constant("triples", count as f64)?;
    Ok(())
}

pub(super) fn kappa_ratio(ses: &Session<'_>, _p: &CheckParams, rec: &mut Recorder) -> Result<()> {
    let tower = ses.tower();
    let (l, q) = (tower.max_level(), tower.q());
    rec.expect(
        "|1 − (κ_{t−k}^{r−k,s}/κ_t^{r,s})²| / q^{2(r−a)} bounded (E_k), no upward trend over the depth r−a; float = exact within 1e-10",
        1e-10,
    );
    for k in 1..=3usize {
        let mut by_depth: BTreeMap<usize, f64> = BTreeMap::new();
        for r in k..=l {
            for s in 0..=l - r {
                for tr in FusionTriple::channels(r as u32, s as u32) {
                    let (t, a) = (tr.t as usize, tr.a as usize);
                    if t < k || !FusionTriple::admissible((r - k) as u32, s as u32, (t - k) as u32) {
                        continue;
                    }
                    let defect = qnum::kappa_ratio_defect(r as u32, s as u32, t as u32, k as u32, q)?;
                    let exact = qnum::kappa_ratio_exact(r as u32, s as u32, t as u32, k as u32)?.eval(q).abs();
                    rec.violation((defect - exact).abs() - 1e-10 * exact.max(1.0));
                    let scaled = defect / q.powi(2 * (r - a) as i32);
                    rec.obs(&[k, r, s, t], scaled)?;
                    if a == 0 {
                        // both κ equal 1: identically zero, no information for the trend
                        continue;
                    }
                    let e = by_depth.entry(r - a).or_insert(0.0);
                    *e = e.max(scaled);
                }
            }
        }
        let seq: Vec<f64> = by_depth.values().copied().collect();
        rec.constant(format!("E_{k}"), seq.iter().copied().fold(0.0, f64::max))?;
        trend(rec, tower, &format!("k={k}"), &seq)?;
    }
    Ok(())
}

pub(super) fn markov_identity(ses: &Session<'_>, _p: &CheckParams, rec: &mut Recorder) -> Result<()> {
    let tower = ses.tower();
    rec.expect("(qtr_1 ⊗ qtr_n)∘Δ = p_down qtr_{n−1} + p_up qtr_{n+1}; indices [n, 0] residual, [n, 1] weight error", 1e-9);
    for n in 0..tower.max_level() {
        let m = boundary::markov_residual(tower, n)?;
        rec.error(&[n, 0], m.residual, 1e-9)?;
        rec.error(&[n, 1], m.weight_error, 1e-9)?;
        rec.constant(format!("p_up[{n}]"), m.p_up)?;
    }
    Ok(())
}

pub(super) fn trace_coherence(ses: &Session<'_>, _p: &CheckParams, rec: &mut Recorder) -> Result<()> {
    let tower = ses.tower();
    let l = tower.max_level();
    rec.expect("a ↦ qtr_n(ψ_{m,n}(a)) equals qtr_m on all matrix units (Frobenius distance of densities)", 1e-9);
    let mut skipped = Vec::new();
    for n in 0..=l {
        let fn_ = tower.modular(n)?;
        for m in 0..=n {
            let (dm, dr, dn) = (tower.dim(m), tower.dim(n - m), tower.dim(n));
            if (dm * dr) as f64 * (dn * dn) as f64 > COHERENCE_CELL_BUDGET {
                skipped.push(format!("({m},{n})"));
                continue;
            }
            // density of a ↦ qtr_n(J*(a⊗1)J): (id ⊗ Tr)(J F_n J*)/dim_q(n)
            let j = tower.embed_matrix(m, n - m)?;
            let j: &CMat = &j;
            let w = j * fn_;
            let mut k = linalg::zeros(dm, dm);
            for i in 0..dm {
                for i2 in 0..dm {
                    let mut s = c(0.0, 0.0);
                    for v in 0..dr {
                        let (ra, rb) = (i * dr + v, i2 * dr + v);
                        for x in 0..dn {
                            s += w[(ra, x)] * j[(rb, x)].conj();
                        }
                    }
                    k[(i2, i)] = s;
                }
            }
            let expected = linalg::scale_re(tower.modular(m)?.as_ref(), 1.0 / tower.qdim(m));
            let k = linalg::scale_re(k.as_ref(), 1.0 / tower.qdim(n));
            let err = linalg::frob(linalg::sub(k.as_ref(), expected.as_ref()).as_ref());
            rec.error(&[m, n], err, 1e-9)?;
        }
    }
    if !skipped.is_empty() {
        rec.note(format!("truncated: cells (m,n) over the work cap skipped: {}", skipped.join(" ")));
    }
    Ok(())
}

pub(super) fn psi_norm_monotone(ses: &Session<'_>, p: &CheckParams, rec: &mut Recorder) -> Result<()> {
    let tower = ses.tower();
    let (l, q) = (tower.max_level(), tower.q());
    rec.expect(
        "‖ψ_{m,n+1}(a)‖ ≤ ‖ψ_{m,n}(a)‖ + 1e-10 (indices [0, m, n]); ‖ψ_{k,s}(a) − φ_{s,s}(a)‖/q^{n−m} and ‖φ_{s,s'}(a)‖/(q^n(q^{-m}+q^{-m'})) bounded by F_k (indices [1|2, k, n, r, m, m'])",
        1e-10,
    );
    let mut rng = check_rng(p, "psi-norm-monotone");
    let top = l.min(PSI_SCAN_MAX);
    if l > top {
        rec.note(format!("truncated: ψ norm scan stops at level {top}"));
    }
    for m in 1..=2usize.min(top) {
        let a = unit_hermitian(&mut rng, tower.dim(m))?;
        let mut prev = f64::INFINITY;
        for n in m..=top {
            let nrm = linalg::herm_norm(boundary::psi(tower, m, n, a.as_ref())?.as_ref())?;
            rec.obs(&[0, m, n], nrm)?;
            if prev.is_finite() {
                rec.violation(nrm - prev - 1e-10);
            }
            prev = nrm;
        }
    }

    let top = l.min(PHI_SCAN_MAX);
    if l > top {
        rec.note(format!("truncated: φ estimate uses n + r <= {top}"));
    }
    for k in 1..=2usize {
        if k > top {
            continue;
        }
        let a = unit_hermitian(&mut rng, tower.dim(k))?;
        let mut per_n = Vec::new();
        let mut fk = 0.0f64;
        for n in k..top {
            let mut best = 0.0f64;
            for r in 1..=top - n {
                // channels s = n+r−2m with m <= n−k, so that ψ_{k,s} is defined
                let ms: Vec<usize> = (0..=(n - k).min(r)).collect();
                let mut phis = BTreeMap::new();
                for &m in &ms {
                    for &m2 in &ms {
                        let (s, s2) = (n + r - 2 * m, n + r - 2 * m2);
                        let phi = boundary::phi_op(tower, n, r, s, s2, k, a.as_ref())?;
                        phis.insert((m, m2), phi.matrix);
                    }
                }
                for (&(m, m2), phi) in &phis {
                    let s = n + r - 2 * m;
                    let v = if m == m2 {
                        let ps = boundary::psi(tower, k, s, a.as_ref())?;
                        let d = linalg::sub(ps.as_ref(), phi.as_ref());
                        linalg::op_norm(d.as_ref())? / q.powi((n - m) as i32)
                    } else {
                        linalg::op_norm(phi.as_ref())? / (q.powi(n as i32) * (q.powi(-(m as i32)) + q.powi(-(m2 as i32))))
                    };
                    rec.obs(&[if m == m2 { 1 } else { 2 }, k, n, r, m, m2], v)?;
                    best = best.max(v);
                }
            }
            per_n.push(best);
            fk = fk.max(best);
        }
        rec.constant(format!("F_{k}"), fk)?;
        trend(rec, tower, &format!("phi k={k}"), &per_n)?;
    }
    Ok(())
}

pub(super) fn trace_splitting(ses: &Session<'_>, p: &CheckParams, rec: &mut Recorder) -> Result<()> {
    let tower = ses.tower();
    let tol = tol(p);
    rec.expect("|Σ qTr_n(f A_(1) g A_(2)) − qTr_n(f) qTr'_n(g)| / dim_q(n)² ≤ tol for random Hermitian f, g", tol);
    let mut rng = check_rng(p, "trace-splitting");
    let top = tower.max_level().min(5);
    let per_level = p.trials.div_ceil(top + 1);
    let mut violations = 0usize;
    for n in 0..=top {
        let d = tower.dim(n);
        let dim2 = tower.qdim(n).powi(2);
        let pairs: Vec<(CMat, CMat)> = (0..per_level)
            .map(|_| (linalg::random_hermitian(&mut rng, d), linalg::random_hermitian(&mut rng, d)))
            .collect();
        let splits: Vec<C64> = if d <= boundary::A_DENSE_MAX_DIM {
            // dense A_n, all trials at once: avg[(a,d')] = Σ_{b,c} A[(a,b),(c,d')] g[c,b]
            let a = boundary::a_element_dense(tower, n)?;
            let perm = CMat::from_fn(d * d, d * d, |row, col| a[((row / d) * d + col / d, (col % d) * d + row % d)]);
            let gs = CMat::from_fn(d * d, per_level, |row, j| pairs[j].1[(row % d, row / d)]);
            let avgs = &perm * &gs;
            pairs
                .iter()
                .enumerate()
                .map(|(j, (f, _))| {
                    let avg = linalg::unvec(avgs.col(j).as_mat(), d, d);
                    tower.qtrace(n, (f * &avg).as_ref())
                })
                .collect::<Result<_>>()?
        } else {
            pairs.iter().map(|(f, g)| boundary::a_split_trace(tower, n, f.as_ref(), g.as_ref())).collect::<Result<_>>()?
        };
        for (trial, ((f, g), split)) in pairs.iter().zip(splits).enumerate() {
            let want = tower.qtrace(n, f.as_ref())? * tower.qtrace_right(n, g.as_ref())?;
            let err = (split - want).norm() / dim2;
            if err > tol {
                violations += 1;
            }
            rec.error(&[n, trial], err, tol)?;
        }
    }
    rec.constant("trials", (per_level * (top + 1)) as f64)?;
    rec.constant("violations", violations as f64)?;
    Ok(())
}

pub(super) fn a_defining(ses: &Session<'_>, p: &CheckParams, rec: &mut Recorder) -> Result<()> {
    let tower = ses.tower();
    rec.expect(
        "(tilde ⊗ id)(A_n) = t_n t_n*: dense relative error (indices [0, n]) and randomized columns (indices [1, n, trial])",
        1e-9,
    );
    let mut rng = check_rng(p, "A-defining");
    for n in 0..=tower.max_level().min(4) {
        let t = tower.duality_vector(n)?;
        let want = &t * t.adjoint();
        let got = boundary::a_tilde_dense(tower, n)?;
        let err = linalg::frob(linalg::sub(got.as_ref(), want.as_ref()).as_ref()) / tower.qdim(n);
        rec.error(&[0, n], err, 1e-9)?;
    }
    let top = tower.max_level().min(5);
    let per_level = p.trials.div_ceil(top + 1);
    let mut violations = 0usize;
    for n in 0..=top {
        let d = tower.dim(n);
        let t = tower.duality_vector(n)?;
        for trial in 0..per_level {
            let y = linalg::gaussian(&mut rng, d * d, 1);
            let got = boundary::a_tilde_apply(tower, n, y.as_ref())?;
            let want = &t * (t.adjoint() * &y);
            let err = linalg::frob(linalg::sub(got.as_ref(), want.as_ref()).as_ref()) / (tower.qdim(n) * linalg::frob(y.as_ref()));
            if err > 1e-9 {
                violations += 1;
            }
            rec.error(&[1, n, trial], err, 1e-9)?;
        }
    }
    rec.constant("trials", (per_level * (top + 1)) as f64)?;
    rec.constant("violations", violations as f64)?;
    Ok(())
}

pub(super) fn eval_unit(ses: &Session<'_>, _p: &CheckParams, rec: &mut Recorder) -> Result<()> {
    let tower = ses.tower();
    let (l, q) = (tower.max_level(), tower.q());
    rec.expect(
        "z_block(0,n,t) = dim_q(t)/dim_q(t−n) within 1e-9 (relative); monotone in t toward q^{-n}; for n = 1 the value at t = L within 0.3% of q^{-1}",
        1e-9,
    );
    for n in 0..=l.min(4) {
        let limit = q.powi(-(n as i32));
        let mut prev: Option<f64> = None;
        for t in n..=l {
            let z = ses.z_block(0, n, t)?;
            let v = z[(0, 0)].re;
            let want = tower.qdim(t) / tower.qdim(t - n);
            rec.error(&[n, t], rel(v, want) + z[(0, 0)].im.abs(), 1e-9)?;
            if let Some(pv) = prev {
                // the distance to the limit may not grow
                rec.violation((v - limit).abs() - (pv - limit).abs() - 1e-12 * limit);
            }
            prev = Some(v);
        }
        rec.constant(format!("z0[{n},{l}]"), prev.unwrap_or(f64::NAN))?;
        if n == 1 {
            if let Some(v) = prev {
                let gap = (v - limit).abs() / limit;
                rec.constant("terminal-gap[n=1]", gap)?;
                rec.violation(gap - 0.003);
            }
        }
    }
    Ok(())
}

pub(super) fn cone_bound(ses: &Session<'_>, p: &CheckParams, rec: &mut Recorder) -> Result<()> {
    let tower = ses.tower();
    let l = tower.max_level();
    let (n, t) = if l >= 5 { (2, 5) } else { (l.min(2), l) };
    if (n, t) != (2, 5) {
        rec.note(format!("truncated: tower too short for (n,t) = (2,5), using ({n},{t})"));
    }
    rec.expect("|qtr_t(B ψ_{n,t}(e))| ≤ dim_q(t−n)/dim_q(t) ‖B‖ ‖e F_n‖ + 1e-10 for random B and rank-one e; observed lhs/rhs", 1e-10);
    let mut rng = check_rng(p, "cone-bound");
    let (dn, dt) = (tower.dim(n), tower.dim(t));
    let mut violations = 0usize;
    let mut worst = 0.0f64;
    for trial in 0..p.trials {
        let b = linalg::gaussian(&mut rng, dt, dt);
        let u = linalg::random_unit(&mut rng, dn);
        let v = linalg::random_unit(&mut rng, dn);
        let e = &u * v.adjoint();
        let (lhs, rhs) = boundary::cone_bound_check(tower, n, t, b.as_ref(), e.as_ref())?;
        if lhs > rhs + 1e-10 {
            violations += 1;
        }
        rec.violation(lhs - rhs - 1e-10);
        let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
        worst = worst.max(ratio);
        rec.obs(&[n, t, trial], ratio)?;
    }
    rec.constant("max-ratio", worst)?;
    rec.constant("trials", p.trials as f64)?;
    rec.constant("violations", violations as f64)?;
    Ok(())
}

pub(super) fn global_bound(ses: &Session<'_>, _p: &CheckParams, rec: &mut Recorder) -> Result<()> {
    let tower = ses.tower();
    let (l, q) = (tower.max_level(), tower.q());
    const OFFSET: usize = 3;
    rec.expect("q^n ‖z_block(k,n,n+3)‖ bounded (M_k, M); no upward trend in n", 0.0);
    let mut m_all = 0.0f64;
    for k in 0..=2usize {
        let mut seq = Vec::new();
        let mut n = k;
        while n + OFFSET + k <= l {
            let z = ses.z_block(k, n, n + OFFSET)?;
            let v = q.powi(n as i32) * linalg::herm_norm(linalg::herm_part(z.as_ref()).as_ref())?;
            rec.obs(&[k, n, n + OFFSET], v)?;
            seq.push(v);
            n += 1;
        }
        if seq.is_empty() {
            rec.note(format!("truncated: no computable cell for k={k}"));
            continue;
        }
        let mk = seq.iter().copied().fold(0.0, f64::max);
        rec.constant(format!("M_{k}"), mk)?;
        m_all = m_all.max(mk);
        trend(rec, tower, &format!("k={k}"), &seq)?;
    }
    rec.constant("M", m_all)?;
    Ok(())
}

pub(super) fn w_easy_bound(ses: &Session<'_>, p: &CheckParams, rec: &mut Recorder) -> Result<()> {
    let tower = ses.tower();
    let (l, q) = (tower.max_level(), tower.q());
    rec.expect("‖w^{k,l}_{n,n+2}(ξ)‖_HS / (q^{-n/2} q^{-l/2} ‖ξ‖) bounded (C); no upward trend in n", 0.0);
    let mut rng = check_rng(p, "w-easy-bound");
    let mut c_fit = 0.0f64;
    for k in 1..=2usize {
        for lw in 0..=k {
            let mut seq = Vec::new();
            for n in k..=l {
                let t = n + 2;
                let s = t + k - 2 * lw;
                if s.max(t) > l || s < n {
                    continue;
                }
                let xi = linalg::random_unit(&mut rng, tower.dim(k - lw) * tower.dim(lw));
                let w = boundary::w_op(tower, n, t, k, lw, xi.as_ref(), false)?;
                let hs = boundary::hs_norm(tower, t - n, w.matrix.as_ref())?;
                let v = hs / (q.powf(-(n as f64) / 2.0) * q.powf(-(lw as f64) / 2.0));
                rec.obs(&[k, lw, n, t], v)?;
                seq.push(v);
            }
            if seq.is_empty() {
                continue;
            }
            c_fit = seq.iter().copied().fold(c_fit, f64::max);
            trend(rec, tower, &format!("k={k} l={lw}"), &seq)?;
        }
    }
    rec.constant("C", c_fit)?;
    Ok(())
}

pub(super) fn w_conjugation(ses: &Session<'_>, p: &CheckParams, rec: &mut Recorder) -> Result<()> {
    let tower = ses.tower();
    let top = tower.max_level().min(7);
    let tol = tol(p);
    rec.expect("dim_q(t)^{1/2}‖w^{k,l}_{n,t}(ξ)‖_HS = dim_q(s)^{1/2}‖w^{k,k−l}_{n,s}((F^{1/2}⊗F^{1/2})ξ̄)‖_HS (relative)", tol);
    let mut rng = check_rng(p, "w-conjugation");
    for k in 1..=3usize {
        for lw in 0..=k {
            for n in k..=k + 2 {
                for t in n..=n + 2 {
                    let s = t + k - 2 * lw;
                    if s < n || s.max(t) > top {
                        continue;
                    }
                    let xi = linalg::random_unit(&mut rng, tower.dim(k - lw) * tower.dim(lw));
                    let (lhs, rhs) = boundary::w_conjugation_sides(tower, n, t, k, lw, xi.as_ref())?;
                    rec.error(&[k, lw, n, t], rel(lhs, rhs), tol)?;
                }
            }
        }
    }
    Ok(())
}

pub(super) fn decomp_consistency(ses: &Session<'_>, _p: &CheckParams, rec: &mut Recorder) -> Result<()> {
    let tower = ses.tower();
    let l = tower.max_level();
    rec.expect("z_block from the w-formula = direct coproduct slicing, relative Frobenius error, k ≤ 2, n ≤ 2, t ≤ 4", 1e-7);
    for k in 0..=2usize {
        for n in k..=2 {
            for t in n..=4 {
                if t + k > l {
                    continue;
                }
                let z = ses.z_block(k, n, t)?;
                let direct = boundary::z_block_direct(tower, k, n, t)?;
                let scale = linalg::frob(direct.as_ref()).max(f64::MIN_POSITIVE);
                let err = linalg::frob(linalg::sub(z.as_ref(), direct.as_ref()).as_ref()) / scale;
                rec.error(&[k, n, t], err, 1e-7)?;
            }
        }
    }
    Ok(())
}

pub(super) fn wenzl_higher(ses: &Session<'_>, p: &CheckParams, rec: &mut Recorder) -> Result<()> {
    let tower = ses.tower();
    let top = tower.max_level().min(7);
    rec.expect("L = α R with relative residual < 1e-8 and |α| ≤ 1 + 1e-8, all p, q ≥ 1, p+q ≤ n ≤ 7", 1e-8);
    let mut rng = check_rng(p, "wenzl-higher");
    let mut worst = 0.0f64;
    for n in 2..=top {
        for pw in 1..n {
            for qw in 1..=n - pw {
                let zeta = linalg::random_unit(&mut rng, tower.dim(pw + qw));
                let fit = boundary::wenzl_relation(tower, pw, qw, n, zeta.as_ref())?;
                rec.error(&[pw, qw, n], fit.residual, 1e-8)?;
                rec.violation(fit.alpha_abs() - 1.0 - 1e-8);
                rec.constant(format!("alpha_re[{pw},{qw},{n}]"), fit.alpha_re)?;
                rec.constant(format!("alpha_im[{pw},{qw},{n}]"), fit.alpha_im)?;
                worst = worst.max(fit.alpha_abs());
            }
        }
    }
    rec.constant("max|alpha|", worst)?;
    Ok(())
}

pub(super) fn cutdown_norm(ses: &Session<'_>, p: &CheckParams, rec: &mut Recorder) -> Result<()> {
    let tower = ses.tower();
    let tol = tol(p);
    rec.expect("measured cut-down norm² = dim_q(b)dim_q(k−b−1)/(dim_q(l−1)dim_q(k−l−1)) (relative)", tol);
    for k in 2..=tower.max_level() {
        for lw in 1..k {
            for b in 0..=(lw - 1).min(k - lw - 1) {
                let (measured, formula) = boundary::cutdown_norm(tower, k, lw, b)?;
                rec.error(&[k, lw, b], rel(measured, formula), tol)?;
            }
        }
    }
    Ok(())
}

pub(super) fn jw_defect_decay(ses: &Session<'_>, _p: &CheckParams, rec: &mut Recorder) -> Result<()> {
    let tower = ses.tower();
    let (l, q) = (tower.max_level(), tower.q());
    let top = l.min(JW_SCAN_MAX);
    if l > top {
        rec.note(format!("truncated: Jones–Wenzl scan stops at level {top}"));
    }
    rec.expect("jw_defect(n,m,k)/q^{n−m−k} bounded (B); no upward trend in n", 0.0);
    let mut b_fit = 0.0f64;
    for (m, k) in [(1usize, 1usize), (1, 2), (2, 1), (2, 2)] {
        let mut seq = Vec::new();
        for n in m + k + 1..=top {
            let d = tower.jw_defect(n, m, k)?;
            let v = d.norm / q.powi((n - m - k) as i32);
            rec.obs(&[m, k, n], v)?;
            seq.push(v);
        }
        if seq.is_empty() {
            continue;
        }
        b_fit = seq.iter().copied().fold(b_fit, f64::max);
        trend(rec, tower, &format!("m={m} k={k}"), &seq)?;
    }
    rec.constant("B", b_fit)?;
    Ok(())
}

pub(super) fn delta_p0(ses: &Session<'_>, _p: &CheckParams, rec: &mut Recorder) -> Result<()> {
    let tower = ses.tower();
    let top = tower.max_level().min(6);
    rec.expect(
        "(r,s) block of Δ(p_0) = δ_{rs} t_r t_r*/dim_q(r): off-diagonal < 1e-10, diagonal within 1e-9 (Frobenius); small blocks also formed densely",
        1e-9,
    );
    for r in 0..=top {
        for s in 0..=top {
            let tol = if r == s { 1e-9 } else { 1e-10 };
            let mut err = boundary::delta_p0_defect(tower, r, s)?;
            let (dr, ds) = (tower.dim(r), tower.dim(s));
            if dr * ds <= 64 {
                let block = boundary::delta_p0_block(tower, r, s)?;
                let want = if r == s {
                    let t = tower.duality_vector(r)?;
                    linalg::scale_re((&t * t.adjoint()).as_ref(), 1.0 / tower.qdim(r))
                } else {
                    linalg::zeros(dr * ds, dr * ds)
                };
                err = err.max(linalg::frob(linalg::sub(block.as_ref(), want.as_ref()).as_ref()));
            }
            rec.error(&[r, s], err, tol)?;
        }
    }
    Ok(())
}

pub(super) fn faithfulness_decay(ses: &Session<'_>, _p: &CheckParams, rec: &mut Recorder) -> Result<()> {
    let tower = ses.tower();
    let (l, q) = (tower.max_level(), tower.q());
    let rho = tower.params().rho();
    let bound = (q * rho).sqrt() + 0.05;
    rec.expect(
        format!("q^n ‖z_block(k,n,n+o)‖ strictly decreasing in n over n ∈ {{k..5}}, envelope ratio ≤ sqrt(q‖F_1‖)+0.05 = {bound:.6}"),
        0.0,
    );
    rec.constant("ratio-bound", bound)?;
    for k in 1..=3usize {
        for off in [3usize, 4] {
            let label = format!("k={k} offset={off}");
            let mut seq: Vec<(usize, f64)> = Vec::new();
            let mut missing = Vec::new();
            for n in k..=5 {
                if n + off + k > l {
                    missing.push(n);
                    continue;
                }
                let z = ses.z_block(k, n, n + off)?;
                let v = q.powi(n as i32) * linalg::herm_norm(linalg::herm_part(z.as_ref()).as_ref())?;
                rec.obs(&[k, n, n + off], v)?;
                seq.push((n, v));
            }
            if !missing.is_empty() {
                rec.note(format!("truncated: {label}: n = {missing:?} need level n+offset+k > {l}"));
            }
            for w in seq.windows(2) {
                rec.violation(w[1].1 / w[0].1 - 1.0 + 1e-12);
            }
            if seq.len() >= 2 {
                let (n0, v0) = seq[0];
                let ratio = seq[1..]
                    .iter()
                    .map(|&(n, v)| (v / v0).powf(1.0 / (n - n0) as f64))
                    .fold(0.0f64, f64::max);
                rec.constant(format!("ratio[{label}]"), ratio)?;
                rec.constant(format!("envelope[{label}]"), v0)?;
                rec.violation(ratio - bound);
            } else {
                rec.note(format!("{label}: {} computable cell(s), no decay test", seq.len()));
            }
        }
    }
    Ok(())
}

pub(super) fn duality_coherence(ses: &Session<'_>, p: &CheckParams, rec: &mut Recorder) -> Result<()> {
    let tower = ses.tower();
    let tol = tol(p);
    rec.expect(
        "per level n, index [n, c]: c=0 ‖t_n‖² = dim_q(n), c=1 Tr F_n = dim_q(n), c=2 Tr F_n^{-1} = dim_q(n), c=3 j² = ±1 (all 1e-10, relative); c=4 t_n = ±(flip)(F_n^{-1}⊗1)t_n, c=5 (F_n⊗F_n)t_n = t_n (tol)",
        tol,
    );
    for n in 0..=tower.max_level() {
        let dimq = tower.qdim(n);
        let m = tower.duality_matrix(n)?;
        let f = tower.modular(n)?;
        let fi = tower.modular_inverse(n)?;
        let d = tower.dim(n);
        rec.error(&[n, 0], rel(linalg::frob(m.as_ref()).powi(2), dimq), 1e-10)?;
        rec.error(&[n, 1], rel(linalg::trace(f.as_ref()).re, dimq), 1e-10)?;
        rec.error(&[n, 2], rel(linalg::trace(fi.as_ref()).re, dimq), 1e-10)?;
        let tm = tower.conj_matrix(n)?;
        let jj = &tm * linalg::conj(tm.as_ref());
        let eps = linalg::trace(jj.as_ref()) / c(d as f64, 0.0);
        let sign = eps.re.signum();
        let j_err = linalg::dist_to_scalar(jj.as_ref(), c(sign, 0.0)) / (d as f64).sqrt();
        rec.error(&[n, 3], j_err, 1e-10)?;
        rec.constant(format!("j2-sign[{n}]"), sign)?;
        let flipped = linalg::scale_re(linalg::transpose((&fi * m).as_ref()).as_ref(), sign);
        let m_norm = linalg::frob(m.as_ref());
        rec.error(&[n, 4], linalg::frob(linalg::sub(m.as_ref(), flipped.as_ref()).as_ref()) / m_norm, tol)?;
        let inv = f * m * linalg::transpose(f.as_ref());
        rec.error(&[n, 5], linalg::frob(linalg::sub(inv.as_ref(), m.as_ref()).as_ref()) / m_norm, tol)?;
    }
    Ok(())
}

pub(super) fn fusion_completeness(ses: &Session<'_>, p: &CheckParams, rec: &mut Recorder) -> Result<()> {
    let tower = ses.tower();
    let l = tower.max_level();
    let tol = tol(p);
    rec.expect("[V_t]_t is unitary H_r ⊗ H_s → ⊕_t H_t: Σ d_t = d_r d_s and ‖U*U − I‖_F/√dim (probe columns above 1000 rows)", tol);
    let mut rng = check_rng(p, "fusion-completeness");
    for r in 1..=l {
        for s in 1..=l - r {
            let channels: Vec<usize> = FusionTriple::channels(r as u32, s as u32).map(|t| t.t as usize).collect();
            let total: usize = channels.iter().map(|&t| tower.dim(t)).sum();
            let big = tower.dim(r) * tower.dim(s);
            if total != big {
                rec.note(format!("dimension count fails at ({r},{s}): {total} != {big}"));
                rec.error(&[r, s], 1.0, tol)?;
                continue;
            }
            let err = isometry_defect(total, &mut rng, |x| {
                let mut out = linalg::zeros(big, x.ncols());
                let mut row = 0;
                for &t in &channels {
                    let dt = tower.dim(t);
                    out += tower.apply_intertwiner(r, s, t, x.subrows(row, dt))?;
                    row += dt;
                }
                Ok(out)
            })?;
            rec.error(&[r, s], err, tol)?;
        }
    }
    Ok(())
}

pub(super) fn tower_isometries(ses: &Session<'_>, p: &CheckParams, rec: &mut Recorder) -> Result<()> {
    let tower = ses.tower();
    let l = tower.max_level();
    let tol = tol(p);
    rec.expect("J_{p,q}*J_{p,q} = id: steps at [n, 1], composite embeddings at [p, q] (probe columns above 1000 rows)", tol);
    let mut rng = check_rng(p, "tower-isometries");
    for n in 0..l {
        rec.error(&[n, 1], gram_defect(tower.step(n)?.as_ref()), tol)?;
    }
    for pw in 1..l {
        for qw in 2..=l - pw {
            let err = isometry_defect(tower.dim(pw + qw), &mut rng, |x| Ok(tower.apply_embed(pw, qw, x)))?;
            rec.error(&[pw, qw], err, tol)?;
        }
    }
    Ok(())
}

pub(super) fn embed_associativity(ses: &Session<'_>, p: &CheckParams, rec: &mut Recorder) -> Result<()> {
    let tower = ses.tower();
    let l = tower.max_level();
    let tol = tol(p);
    rec.expect("(J_{p,q} ⊗ id)J_{p+q,r} = (id ⊗ J_{q,r})J_{p,q+r} on random columns (relative)", tol);
    let mut rng = check_rng(p, "embed-associativity");
    for pw in 1..=l {
        for qw in 1..=l - pw {
            for rw in 1..=l - pw - qw {
                let total = pw + qw + rw;
                let x = linalg::gaussian(&mut rng, tower.dim(total), 4);
                let a = tower.apply_embed(pw + qw, rw, x.as_ref());
                let lhs = linalg::apply_left_factor(a.as_ref(), tower.dim(pw + qw), tower.dim(rw), |b| {
                    tower.apply_embed(pw, qw, b)
                });
                let b = tower.apply_embed(pw, qw + rw, x.as_ref());
                let rhs = linalg::apply_right_factor(b.as_ref(), tower.dim(pw), tower.dim(qw + rw), |y| {
                    tower.apply_embed(qw, rw, y)
                });
                let err = linalg::frob(linalg::sub(lhs.as_ref(), rhs.as_ref()).as_ref()) / linalg::frob(x.as_ref());
                rec.error(&[pw, qw, rw], err, tol)?;
            }
        }
    }
    Ok(())
}
