//! Dense complex helpers on top of `faer`.
//!
//! Tensor products use the row-major multi-index convention: the basis vector
//! `e_i ⊗ e_j` of `C^a ⊗ C^b` has index `i*b + j`.

use faer::{Mat, MatRef, Side};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = faer::c64;
pub type CMat = Mat<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn zeros(r: usize, cols: usize) -> CMat {
    Mat::zeros(r, cols)
}

pub fn eye(n: usize) -> CMat {
    Mat::identity(n, n)
}

pub fn mm(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> CMat {
    a * b
}

pub fn adj(a: MatRef<'_, C64>) -> CMat {
    a.adjoint().to_owned()
}

pub fn transpose(a: MatRef<'_, C64>) -> CMat {
    a.transpose().to_owned()
}

pub fn conj(a: MatRef<'_, C64>) -> CMat {
    a.conjugate().to_owned()
}

pub fn frob(a: MatRef<'_, C64>) -> f64 {
    a.norm_l2()
}

pub fn trace(a: MatRef<'_, C64>) -> C64 {
    assert_eq!(a.nrows(), a.ncols(), "trace of a non-square matrix");
    (0..a.nrows()).map(|i| a[(i, i)]).sum()
}

/// `Tr(a b)` without forming the product.
pub fn trace_prod(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> C64 {
    assert_eq!(a.ncols(), b.nrows());
    assert_eq!(a.nrows(), b.ncols());
    let mut s = c(0.0, 0.0);
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s
}

pub fn sub(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> CMat {
    a - b
}

pub fn scale(a: MatRef<'_, C64>, s: C64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

pub fn scale_re(a: MatRef<'_, C64>, s: f64) -> CMat {
    scale(a, c(s, 0.0))
}

/// Distance to `λ·I` measured in Frobenius norm.
pub fn dist_to_scalar(a: MatRef<'_, C64>, lambda: C64) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..n {
            let want = if i == j { lambda } else { c(0.0, 0.0) };
            s += (a[(i, j)] - want).norm_sqr();
        }
    }
    s.sqrt()
}

pub fn dist_to_identity(a: MatRef<'_, C64>) -> f64 {
    dist_to_scalar(a, c(1.0, 0.0))
}

/// Hermitian part `(a + a*)/2`.
pub fn herm_part(a: MatRef<'_, C64>) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

pub fn kron(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> CMat {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Flattens a matrix into a column vector with row-major indexing (`v[i*cols + j] = m[i,j]`).
pub fn vec_of(m: MatRef<'_, C64>) -> CMat {
    let cols = m.ncols();
    Mat::from_fn(m.nrows() * cols, 1, |k, _| m[(k / cols, k % cols)])
}

/// Inverse of [`vec_of`].
pub fn unvec(v: MatRef<'_, C64>, rows: usize, cols: usize) -> CMat {
    assert_eq!(v.nrows(), rows * cols);
    Mat::from_fn(rows, cols, |i, j| v[(i * cols + j, 0)])
}

/// Regroups `X` (rows indexed `(i, k)`, `i < da`, `k < m`) into `da × (cols·m)` with column `(c, k)`.
fn split_first(x: MatRef<'_, C64>, da: usize, m: usize) -> CMat {
    let cols = x.ncols();
    Mat::from_fn(da, cols * m, |i, ck| x[(i * m + ck % m, ck / m)])
}

fn merge_first(z: MatRef<'_, C64>, m: usize, cols: usize) -> CMat {
    let dr = z.nrows();
    Mat::from_fn(dr * m, cols, |ik, col| z[(ik / m, col * m + ik % m)])
}

/// `(A ⊗ I_m) X` where `A` is given by its action on blocks of columns.
pub fn apply_left_factor(
    x: MatRef<'_, C64>,
    da: usize,
    m: usize,
    f: impl FnOnce(MatRef<'_, C64>) -> CMat,
) -> CMat {
    assert_eq!(x.nrows(), da * m, "apply_left_factor: row count");
    let cols = x.ncols();
    let y = split_first(x, da, m);
    let z = f(y.as_ref());
    merge_first(z.as_ref(), m, cols)
}

/// `(A ⊗ I_m) X` for an explicit matrix `A`.
pub fn kron_left(a: MatRef<'_, C64>, m: usize, x: MatRef<'_, C64>) -> CMat {
    apply_left_factor(x, a.ncols(), m, |y| a * y)
}

/// `(I_m ⊗ B) X` where `B` (input dimension `db`) is given by its action on blocks of columns.
pub fn apply_right_factor(
    x: MatRef<'_, C64>,
    m: usize,
    db: usize,
    f: impl FnOnce(MatRef<'_, C64>) -> CMat,
) -> CMat {
    assert_eq!(x.nrows(), m * db, "apply_right_factor: row count");
    let cols = x.ncols();
    let y = Mat::from_fn(db, m * cols, |j, ci| x[((ci % m) * db + j, ci / m)]);
    let z = f(y.as_ref());
    let dr = z.nrows();
    Mat::from_fn(m * dr, cols, |ij, col| z[(ij % dr, col * m + ij / dr)])
}

/// `(I_m ⊗ B) X` for an explicit matrix `B`.
pub fn kron_right(m: usize, b: MatRef<'_, C64>, x: MatRef<'_, C64>) -> CMat {
    apply_right_factor(x, m, b.ncols(), |y| b * y)
}

/// `Σ_i G_i K_i*`, where `G_i`, `K_i` are the row blocks belonging to index `i` of a leading
/// factor of dimension `d`. This is `(Tr ⊗ id)(G K*)` on the first tensor factor.
pub fn block_trace_pair(g: MatRef<'_, C64>, k: MatRef<'_, C64>, d: usize) -> CMat {
    assert_eq!(g.nrows() % d, 0);
    assert_eq!(k.nrows() % d, 0);
    assert_eq!(g.ncols(), k.ncols());
    let (rg, rk) = (g.nrows() / d, k.nrows() / d);
    let mut out = zeros(rg, rk);
    for i in 0..d {
        let gi = g.subrows(i * rg, rg);
        let ki = k.subrows(i * rk, rk);
        faer::linalg::matmul::matmul(
            out.as_mut(),
            faer::Accum::Add,
            gi,
            ki.adjoint(),
            c(1.0, 0.0),
            faer::Par::Seq,
        );
    }
    out
}

/// `(φ ⊗ id)(X)` with `φ(a) = Tr(W a)` on the first factor of dimension `da`.
/// `X` maps `C^da ⊗ C^cb` to `C^da ⊗ C^rb`.
pub fn ptrace_first(x: MatRef<'_, C64>, da: usize, w: MatRef<'_, C64>) -> CMat {
    let (rb, cb) = (x.nrows() / da, x.ncols() / da);
    let mut out = zeros(rb, cb);
    for i in 0..da {
        for ip in 0..da {
            let wt = w[(ip, i)];
            if wt == c(0.0, 0.0) {
                continue;
            }
            let blk = x.submatrix(i * rb, ip * cb, rb, cb);
            for col in 0..cb {
                for row in 0..rb {
                    out[(row, col)] += wt * blk[(row, col)];
                }
            }
        }
    }
    out
}

/// `(id ⊗ φ)(X)` with `φ(a) = Tr(W a)` on the second factor of dimension `db`.
pub fn ptrace_second(x: MatRef<'_, C64>, db: usize, w: MatRef<'_, C64>) -> CMat {
    let (ra, ca) = (x.nrows() / db, x.ncols() / db);
    Mat::from_fn(ra, ca, |i, ip| {
        let mut s = c(0.0, 0.0);
        for j in 0..db {
            for jp in 0..db {
                s += w[(jp, j)] * x[(i * db + j, ip * db + jp)];
            }
        }
        s
    })
}

/// Eigen-decomposition of a Hermitian matrix: eigenvalues ascending, eigenvectors as columns.
pub fn herm_eigen(a: MatRef<'_, C64>) -> Result<(Vec<f64>, CMat)> {
    let h = herm_part(a);
    let e = h.self_adjoint_eigen(Side::Lower).map_err(|e| Error::IllConditioned(format!("eigen: {e:?}")))?;
    let vals = (0..h.nrows()).map(|i| e.S()[i].re).collect();
    Ok((vals, e.U().to_owned()))
}

pub fn herm_eigenvalues(a: MatRef<'_, C64>) -> Result<Vec<f64>> {
    let h = herm_part(a);
    let v = h
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::IllConditioned(format!("eigen: {e:?}")))?;
    Ok(v)
}

/// `f(A)` for a Hermitian `A` through its spectral decomposition.
pub fn herm_fn(a: MatRef<'_, C64>, f: impl Fn(f64) -> f64) -> Result<CMat> {
    let (vals, u) = herm_eigen(a)?;
    let n = vals.len();
    let d = Mat::from_fn(n, n, |i, j| u[(i, j)] * f(vals[j]));
    Ok(&d * u.adjoint())
}

/// Spectral norm of a Hermitian matrix.
pub fn herm_norm(a: MatRef<'_, C64>) -> Result<f64> {
    let v = herm_eigenvalues(a)?;
    Ok(v.iter().fold(0.0f64, |m, x| m.max(x.abs())))
}

/// Largest singular value.
pub fn op_norm(a: MatRef<'_, C64>) -> Result<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0.0);
    }
    let g = if a.nrows() >= a.ncols() { a.adjoint() * a } else { a * a.adjoint() };
    Ok(herm_norm(g.as_ref())?.sqrt())
}

pub fn inverse(a: MatRef<'_, C64>) -> CMat {
    use faer::linalg::solvers::DenseSolveCore;
    a.partial_piv_lu().inverse()
}

/// Solves `A X = B`.
pub fn solve(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> CMat {
    use faer::linalg::solvers::Solve;
    a.partial_piv_lu().solve(b)
}

/// Orthonormal basis of the orthogonal complement of `range(U)` (U with orthonormal columns),
/// by block classical Gram–Schmidt with reorthogonalization over the canonical basis vectors in
/// index order. A candidate is accepted when its residual exceeds `threshold` (inputs have norm 1).
pub fn orth_complement(u: MatRef<'_, C64>, threshold: f64) -> CMat {
    let m = u.nrows();
    let k = u.ncols();
    let target = m - k.min(m);
    let mut basis = zeros(m, m.max(1));
    basis.as_mut().subcols_mut(0, k).copy_from(u);
    let mut count = k;
    const BLOCK: usize = 96;
    let mut start = 0;
    while start < m && count < m {
        let b = BLOCK.min(m - start);
        let mut x = zeros(m, b);
        for j in 0..b {
            x[(start + j, j)] = c(1.0, 0.0);
        }
        for _ in 0..2 {
            let bq = basis.as_ref().subcols(0, count);
            let coef = bq.adjoint() * x.as_ref();
            faer::linalg::matmul::matmul(
                x.as_mut(),
                faer::Accum::Add,
                bq,
                coef.as_ref(),
                c(-1.0, 0.0),
                faer::Par::Seq,
            );
        }
        let block_start = count;
        for j in 0..b {
            let mut v = x.as_ref().subcols(j, 1).to_owned();
            let mut prev = v.norm_l2();
            for pass in 0..4 {
                let lo = if pass < 2 { block_start } else { 0 };
                if count > lo {
                    let bq = basis.as_ref().subcols(lo, count - lo);
                    let coef = bq.adjoint() * v.as_ref();
                    faer::linalg::matmul::matmul(
                        v.as_mut(),
                        faer::Accum::Add,
                        bq,
                        coef.as_ref(),
                        c(-1.0, 0.0),
                        faer::Par::Seq,
                    );
                }
                let now = v.norm_l2();
                // "twice is enough" unless the norm collapsed; then sweep the whole basis again
                if pass >= 1 && now > 0.5 * prev {
                    break;
                }
                prev = now;
            }
            let nrm = v.norm_l2();
            if nrm > threshold && count < m {
                for i in 0..m {
                    basis[(i, count)] = v[(i, 0)] / nrm;
                }
                count += 1;
            }
        }
        start += b;
    }
    let found = count - k;
    if found != target {
        // caller reports the mismatch; return what was found
        return basis.as_ref().subcols(k, found).to_owned();
    }
    basis.as_ref().subcols(k, target).to_owned()
}

/// Complex standard Gaussian matrix, entries `(x + iy)/√2`.
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, r: usize, cols: usize) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = zeros(r, cols);
    for j in 0..cols {
        for i in 0..r {
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            m[(i, j)] = c(x * s, y * s);
        }
    }
    m
}

/// Random Hermitian matrix `(G + G*)/2`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    herm_part(gaussian(rng, n, n).as_ref())
}

/// Random unit vector as an `n × 1` matrix.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let g = gaussian(rng, n, 1);
    let nrm = g.norm_l2();
    scale_re(g.as_ref(), 1.0 / nrm)
}

pub fn all_finite(a: MatRef<'_, C64>) -> bool {
    (0..a.ncols()).all(|j| (0..a.nrows()).all(|i| a[(i, j)].re.is_finite() && a[(i, j)].im.is_finite()))
}
