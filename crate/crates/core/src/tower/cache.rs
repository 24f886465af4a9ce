//! Binary tower cache.
//!
//! Layout (little endian): `"OQTW"`, `u32` version, 32-byte model hash, `u32` level cap `L`,
//! `u32` N, then for each level `n = 0..=L`: `u32 d_n`, `J_{n,1}` (only for `n < L`), `t_n`,
//! `T_n`, `F_n`, each a row-major array of `(re, im)` f64 pairs. A SHA-256 digest of everything
//! before it closes the file.

use std::fs;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{ModelParams, Tower};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};

pub const CACHE_MAGIC: &[u8; 4] = b"OQTW";
pub const CACHE_VERSION: u32 = 1;

fn put_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_mat(buf: &mut Vec<u8>, m: &CMat) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
}

/// Writes the tower atomically (temporary file plus rename).
pub fn write_cache(tower: &Tower, path: &Path) -> Result<()> {
    let l = tower.max_level();
    let params = tower.params();
    let mut buf = Vec::new();
    buf.extend_from_slice(CACHE_MAGIC);
    put_u32(&mut buf, CACHE_VERSION);
    buf.extend_from_slice(&params.hash(l));
    put_u32(&mut buf, l as u32);
    put_u32(&mut buf, params.n() as u32);
    for n in 0..=l {
        put_u32(&mut buf, tower.dim(n) as u32);
        if n < l {
            put_mat(&mut buf, &tower.steps()[n]);
        }
        put_mat(&mut buf, tower.duality_matrix(n)?);
        put_mat(&mut buf, &tower.conj_matrix(n)?);
        put_mat(&mut buf, tower.modular(n)?);
    }
    let digest: [u8; 32] = Sha256::digest(&buf).into();
    buf.extend_from_slice(&digest);

    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&buf)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Cache(format!("truncated at byte {}", self.pos)));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn mat(&mut self, rows: usize, cols: usize) -> Result<CMat> {
        let needed = rows.checked_mul(cols).and_then(|x| x.checked_mul(16));
        match needed {
            Some(b) if self.pos + b <= self.buf.len() => {}
            _ => return Err(Error::Cache(format!("truncated matrix at byte {}", self.pos))),
        }
        let mut m = linalg::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let re = self.f64()?;
                let im = self.f64()?;
                m[(i, j)] = c(re, im);
            }
        }
        if !linalg::all_finite(m.as_ref()) {
            return Err(Error::Cache("non-finite entry".into()));
        }
        Ok(m)
    }
}

/// Loads a tower written by [`write_cache`] for the same model and level cap.
pub fn read_cache(path: &Path, params: ModelParams, max_level: usize) -> Result<Tower> {
    let bytes = fs::read(path)?;
    if bytes.len() < 4 + 4 + 32 + 32 {
        return Err(Error::Cache("file too short".into()));
    }
    let (body, digest) = bytes.split_at(bytes.len() - 32);
    let want: [u8; 32] = Sha256::digest(body).into();
    if want.as_slice() != digest {
        return Err(Error::Cache("payload digest mismatch".into()));
    }
    let mut r = Reader { buf: body, pos: 0 };
    if r.take(4)? != CACHE_MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let version = r.u32()?;
    if version != CACHE_VERSION {
        return Err(Error::Cache(format!("unsupported version {version}")));
    }
    if r.take(32)? != params.hash(max_level).as_slice() {
        return Err(Error::Cache("model hash mismatch".into()));
    }
    let l = r.u32()? as usize;
    let big_n = r.u32()? as usize;
    if l != max_level || big_n != params.n() {
        return Err(Error::Cache("header does not match the model".into()));
    }
    let mut dims = Vec::with_capacity(l + 1);
    let mut steps = Vec::with_capacity(l);
    let mut duality = Vec::with_capacity(l + 1);
    let mut modular = Vec::with_capacity(l + 1);
    for n in 0..=l {
        let d = r.u32()? as usize;
        dims.push(d);
        if n < l {
            // J_{n,1}: rows d_n N, columns d_{n+1}; d_{n+1} follows from the fusion rule
            let next = if n == 0 { Some(big_n) } else { (big_n * d).checked_sub(dims[n - 1]) };
            let next = next.ok_or_else(|| Error::Cache(format!("bad dimension at level {n}")))?;
            steps.push(r.mat(d * big_n, next)?);
        }
        duality.push(r.mat(d, d)?);
        let _conj = r.mat(d, d)?;
        modular.push(r.mat(d, d)?);
    }
    for n in 1..=l {
        if steps[n - 1].ncols() != dims[n] {
            return Err(Error::Cache(format!("inconsistent dimension at level {n}")));
        }
    }
    if r.pos != body.len() {
        return Err(Error::Cache("trailing bytes".into()));
    }
    Ok(Tower::from_parts(params, l, dims, steps, duality, modular))
}
