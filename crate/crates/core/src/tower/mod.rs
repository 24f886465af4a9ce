//! The compressed representation tower: levels `H_0 … H_L` with their step isometries,
//! duality vectors, conjugation and modular matrices.

mod cache;
mod embed;
pub(crate) mod ops;

pub use cache::{read_cache, write_cache, CACHE_MAGIC, CACHE_VERSION};
pub use ops::JwDefect;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use faer::MatRef;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, C64};
use crate::qnum::{self, FusionTriple};

/// Defining data of one O_Q^+.
#[derive(Clone, Debug)]
pub struct ModelParams {
    n: usize,
    q_mat: CMat,
    sign: i32,
    q: f64,
    f1: CMat,
    rho: f64,
}

impl ModelParams {
    /// Validates `Q·conj(Q) = sign·I` and derives `F_1 = ᵗ(Q*Q)` and `q`.
    pub fn new(q_mat: CMat, sign: i32) -> Result<Self> {
        let n = q_mat.nrows();
        if n < 2 || q_mat.ncols() != n {
            return Err(Error::InvalidParameter(format!(
                "Q must be square with N >= 2, got {}x{}",
                q_mat.nrows(),
                q_mat.ncols()
            )));
        }
        if sign != 1 && sign != -1 {
            return Err(Error::InvalidParameter(format!("sign must be +1 or -1, got {sign}")));
        }
        if !linalg::all_finite(q_mat.as_ref()) {
            return Err(Error::NonFinite("Q".into()));
        }
        let qq = &q_mat * q_mat.conjugate();
        let dev = linalg::dist_to_scalar(qq.as_ref(), c(sign as f64, 0.0));
        if dev > 1e-12 * (n as f64) {
            return Err(Error::InvalidParameter(format!(
                "Q*conj(Q) differs from {sign}*I by {dev:.3e}"
            )));
        }
        let f1 = linalg::transpose((q_mat.adjoint() * &q_mat).as_ref());
        let tr = linalg::trace(f1.as_ref()).re;
        let q = qnum::q_from_trace(tr)?;
        let rho = linalg::herm_norm(f1.as_ref())?;
        Ok(Self { n, q_mat, sign, q, f1, rho })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q_matrix(&self) -> &CMat {
        &self.q_mat
    }

    pub fn sign(&self) -> i32 {
        self.sign
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn f1(&self) -> &CMat {
        &self.f1
    }

    /// `ρ = ‖F_1‖`.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// True for models outside the standing assumption `q‖F_1‖ < 1` (only meaningful for N ≥ 3).
    pub fn flagged(&self) -> bool {
        self.n >= 3 && self.q * self.rho >= 1.0
    }

    /// SHA-256 over N, sign, the entries of Q and the level cap.
    pub fn hash(&self, level: usize) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"oqlab-model");
        h.update((self.n as u32).to_le_bytes());
        h.update(self.sign.to_le_bytes());
        for i in 0..self.n {
            for j in 0..self.n {
                let z = self.q_mat[(i, j)];
                h.update(z.re.to_le_bytes());
                h.update(z.im.to_le_bytes());
            }
        }
        h.update((level as u32).to_le_bytes());
        h.finalize().into()
    }

    pub fn hash_hex(&self, level: usize) -> String {
        self.hash(level).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// A dense matrix between compressed tensor words of levels.
#[derive(Clone, Debug)]
pub struct Morphism {
    pub source: Vec<usize>,
    pub target: Vec<usize>,
    pub matrix: CMat,
}

impl Morphism {
    pub fn new(tower: &Tower, source: Vec<usize>, target: Vec<usize>, matrix: CMat) -> Result<Self> {
        let rows = tower.word_dim(&target)?;
        let cols = tower.word_dim(&source)?;
        if matrix.nrows() != rows || matrix.ncols() != cols {
            return Err(Error::Shape(format!(
                "morphism {source:?} -> {target:?} needs {rows}x{cols}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { source, target, matrix })
    }

    /// `‖M*M − I‖_F`.
    pub fn isometry_defect(&self) -> f64 {
        linalg::dist_to_identity((self.matrix.adjoint() * &self.matrix).as_ref())
    }
}

/// Exponents for which powers of `F_n` are available.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModularPower {
    One,
    MinusOne,
    Half,
    MinusHalf,
}

impl ModularPower {
    pub const ALL: [ModularPower; 4] = [Self::One, Self::MinusOne, Self::Half, Self::MinusHalf];

    pub fn exponent(self) -> f64 {
        match self {
            Self::One => 1.0,
            Self::MinusOne => -1.0,
            Self::Half => 0.5,
            Self::MinusHalf => -0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum CacheKey {
    Embed(usize, usize),
    Power(usize, ModularPower),
}

/// Entries of memoized matrices kept per tower (complex doubles).
const MEMO_BUDGET: usize = 40_000_000;

struct Memo {
    map: HashMap<CacheKey, Arc<CMat>>,
    used: usize,
}

/// The compressed tower up to level `L`. Immutable after construction.
pub struct Tower {
    params: ModelParams,
    max_level: usize,
    dims: Vec<usize>,
    /// `steps[n] = J_{n,1}`, for `0 ≤ n < L`.
    steps: Vec<CMat>,
    /// `duality[n]` is `t_n` as a `d_n × d_n` matrix, `t_n = Σ duality[i,k] e_i ⊗ e_k`.
    duality: Vec<CMat>,
    modular: Vec<CMat>,
    memo: Mutex<Memo>,
}

impl std::fmt::Debug for Tower {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Tower")
            .field("N", &self.params.n)
            .field("q", &self.params.q)
            .field("max_level", &self.max_level)
            .field("dims", &self.dims)
            .finish()
    }
}

/// Relative tolerance on `‖t_n‖² = dim_q(n)` enforced during the build.
const DUALITY_NORM_TOL: f64 = 1e-9;

impl Tower {
    pub fn build(params: ModelParams, max_level: usize) -> Result<Self> {
        if max_level < 1 {
            return Err(Error::InvalidParameter("tower level cap must be at least 1".into()));
        }
        if params.q >= 1.0 {
            return Err(Error::Unsupported(format!("q = {} (the tower needs q < 1)", params.q)));
        }
        let n = params.n;
        let mut tower = Tower {
            max_level,
            dims: vec![1, n],
            steps: vec![linalg::eye(n)],
            duality: vec![linalg::eye(1), linalg::transpose(params.q_mat.as_ref())],
            modular: Vec::new(),
            params,
            memo: Mutex::new(Memo { map: HashMap::new(), used: 0 }),
        };
        for lvl in 1..max_level {
            let step = tower.next_step(lvl)?;
            tower.dims.push(step.ncols());
            tower.steps.push(step);
        }
        for lvl in 1..max_level {
            let t = tower.next_duality(lvl);
            tower.duality.push(t);
        }
        for lvl in 0..=max_level {
            let t = &tower.duality[lvl];
            let norm2 = t.squared_norm_l2();
            let want = qnum::qdim_float(lvl as u32, tower.params.q);
            if !norm2.is_finite() || (norm2 - want).abs() > DUALITY_NORM_TOL * want {
                return Err(Error::IllConditioned(format!(
                    "duality vector t_{lvl} has squared norm {norm2} but dim_q = {want}"
                )));
            }
            tower.modular.push(t * t.adjoint());
        }
        Ok(tower)
    }

    /// `J_{n,1}` as the orthogonal complement of the lower embedding `H_{n−1} → H_n ⊗ H_1`.
    fn next_step(&self, n: usize) -> Result<CMat> {
        let big_n = self.params.n;
        let dn = self.dims[n];
        let dn1 = self.dims[n - 1];
        let lower = self.lower_apply(n, linalg::eye(dn1).as_ref());
        let kappa = qnum::kappa(FusionTriple::new(n as u32, 1, n as u32 - 1)?, self.params.q).value;
        let u = linalg::scale_re(lower.as_ref(), kappa);
        let gram_dev = linalg::dist_to_identity((u.adjoint() * &u).as_ref());
        if !gram_dev.is_finite() || gram_dev > 1e-8 {
            return Err(Error::IllConditioned(format!(
                "lower embedding into H_{n} ⊗ H_1 is not an isometry (defect {gram_dev:.3e})"
            )));
        }
        let comp = linalg::orth_complement(u.as_ref(), 1e-8);
        let want = big_n * dn - dn1;
        if comp.ncols() != want {
            return Err(Error::IllConditioned(format!(
                "complement at level {} has dimension {} instead of {want}",
                n + 1,
                comp.ncols()
            )));
        }
        Ok(comp)
    }

    /// `t_{n+1} = (J_{1,n}* ⊗ J_{n,1}*)(id ⊗ t_n ⊗ id) t_1`.
    fn next_duality(&self, n: usize) -> CMat {
        let big_n = self.params.n;
        let dn = self.dims[n];
        let t1 = &self.duality[1];
        let tn = &self.duality[n];
        // X[(i,a),(b,k)] = t1[i,k] tn[a,b], i.e. X = flip ∘ (tn ⊗ t1); apply it factor-wise to conj(J_{n,1})
        let w = linalg::conj(self.steps[n].as_ref());
        let y = linalg::kron_left(tn.as_ref(), big_n, w.as_ref());
        let y = linalg::kron_right(dn, t1.as_ref(), y.as_ref());
        let flipped = CMat::from_fn(big_n * dn, y.ncols(), |ia, col| {
            let (i, a) = (ia / dn, ia % dn);
            y[(a * big_n + i, col)]
        });
        self.apply_embed_adj(1, n, flipped.as_ref())
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn q(&self) -> f64 {
        self.params.q
    }

    pub fn max_level(&self) -> usize {
        self.max_level
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, n: usize) -> usize {
        self.dims[n]
    }

    /// Quantum dimension `dim_q(n)`.
    pub fn qdim(&self, n: usize) -> f64 {
        qnum::qdim_float(n as u32, self.params.q)
    }

    pub fn check_level(&self, n: usize) -> Result<()> {
        if n > self.max_level {
            Err(Error::OutOfTower { level: n, max: self.max_level })
        } else {
            Ok(())
        }
    }

    pub fn word_dim(&self, word: &[usize]) -> Result<usize> {
        word.iter().try_fold(1usize, |acc, &n| {
            self.check_level(n)?;
            Ok(acc * self.dims[n])
        })
    }

    /// The stored step isometry `J_{n,1}` (`n < L`).
    pub fn step(&self, n: usize) -> Result<&CMat> {
        self.steps.get(n).ok_or(Error::OutOfTower { level: n + 1, max: self.max_level })
    }

    /// `t_n` as a `d_n × d_n` matrix with `t_n = Σ m[i,k] e_i ⊗ e_k`.
    pub fn duality_matrix(&self, n: usize) -> Result<&CMat> {
        self.check_level(n)?;
        Ok(&self.duality[n])
    }

    /// `t_n` as a column vector of length `d_n²`.
    pub fn duality_vector(&self, n: usize) -> Result<CMat> {
        Ok(linalg::vec_of(self.duality_matrix(n)?.as_ref()))
    }

    /// Matrix `T_n` of the antilinear map `j_n ξ = T_n conj(ξ)`.
    pub fn conj_matrix(&self, n: usize) -> Result<CMat> {
        Ok(linalg::transpose(self.duality_matrix(n)?.as_ref()))
    }

    /// `F_n = j_n* j_n`, read off from `t_n`.
    pub fn modular(&self, n: usize) -> Result<&CMat> {
        self.check_level(n)?;
        Ok(&self.modular[n])
    }

    /// `F_n^{-1} = j_n j_n*`, read off from `t_n`.
    pub fn modular_inverse(&self, n: usize) -> Result<CMat> {
        let m = self.duality_matrix(n)?;
        Ok(linalg::conj((m.adjoint() * m).as_ref()))
    }

    /// `F_n^p` through the eigen-free recursion `F_{n+1}^p = J_{n,1}*(F_n^p ⊗ F_1^p)J_{n,1}`.
    pub fn modular_power(&self, n: usize, p: ModularPower) -> Result<Arc<CMat>> {
        self.check_level(n)?;
        let key = CacheKey::Power(n, p);
        if let Some(m) = self.memo_get(key) {
            return Ok(m);
        }
        let out = match n {
            0 => linalg::eye(1),
            1 => {
                let e = p.exponent();
                linalg::herm_fn(self.params.f1.as_ref(), |x| x.powf(e))?
            }
            _ => {
                let prev = self.modular_power(n - 1, p)?;
                let one = self.modular_power(1, p)?;
                let j = &self.steps[n - 1];
                let (prev, one): (&CMat, &CMat) = (&prev, &one);
                let x = linalg::kron_left(prev.as_ref(), self.params.n, j.as_ref());
                let x = linalg::kron_right(self.dims[n - 1], one.as_ref(), x.as_ref());
                j.adjoint() * x
            }
        };
        Ok(self.memo_put(key, out))
    }

    fn memo_get(&self, key: CacheKey) -> Option<Arc<CMat>> {
        self.memo.lock().expect("memo poisoned").map.get(&key).cloned()
    }

    fn memo_put(&self, key: CacheKey, m: CMat) -> Arc<CMat> {
        let size = m.nrows() * m.ncols();
        let arc = Arc::new(m);
        let mut memo = self.memo.lock().expect("memo poisoned");
        if let Some(existing) = memo.map.get(&key) {
            return existing.clone();
        }
        if memo.used + size <= MEMO_BUDGET {
            memo.used += size;
            memo.map.insert(key, arc.clone());
        }
        arc
    }

    /// Drops memoized embeddings and modular powers.
    pub fn clear_memo(&self) {
        let mut memo = self.memo.lock().expect("memo poisoned");
        memo.map.clear();
        memo.used = 0;
    }

    /// Assembles a tower from stored parts (used by the cache reader).
    pub(crate) fn from_parts(
        params: ModelParams,
        max_level: usize,
        dims: Vec<usize>,
        steps: Vec<CMat>,
        duality: Vec<CMat>,
        modular: Vec<CMat>,
    ) -> Self {
        Tower {
            params,
            max_level,
            dims,
            steps,
            duality,
            modular,
            memo: Mutex::new(Memo { map: HashMap::new(), used: 0 }),
        }
    }

    pub(crate) fn steps(&self) -> &[CMat] {
        &self.steps
    }
}

/// Sum of squared moduli, used for relative error reports.
pub fn sq_norm(m: MatRef<'_, C64>) -> f64 {
    m.squared_norm_l2()
}
