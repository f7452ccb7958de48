//! CSV export and a binary cache for converged fields.
//!
//! CSV columns: `re1,im1[,re2,im2],value` for every non-exterior node, in
//! flat index order.
//!
//! Cache files (`<key>.bin`, little endian): magic `EXGF`, format version
//! `u32`, complex dimension `u32`, `h: f64`, then per real axis the first
//! lattice index `i64` and node count `u64`, then one `u8` class and one
//! `f64` value per node.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::grid::{GridSpec, NodeClass};
use super::solver::{GridField, SolverParams};
use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, SetExpr};

pub fn write_csv<W: Write>(field: &GridField, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    let dim = field.grid().dim();
    let header: Vec<String> = (1..=dim)
        .flat_map(|k| [format!("re{k}"), format!("im{k}")])
        .chain(std::iter::once("value".to_string()))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for (i, v) in field.live() {
        let c = field.grid().coords(i);
        let cols: Vec<String> = c.iter().map(|x| format!("{x}")).collect();
        writeln!(w, "{},{}", cols.join(","), v)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv(field: &GridField, path: &Path) -> Result<()> {
    write_csv(field, fs::File::create(path)?)
}

#[derive(Serialize)]
struct CacheKey<'a> {
    domain: &'a DomainSpec,
    set: &'a SetExpr,
    h: f64,
    params: &'a SolverParams,
}

/// Hex SHA-256 of the canonical JSON of (domain, set, grid, solver params).
pub fn cache_key(domain: &DomainSpec, set: &SetExpr, params: &SolverParams) -> Result<String> {
    let key = CacheKey {
        domain,
        set,
        h: params.h_for(domain.dim()),
        params,
    };
    // round-trip through Value so object keys come out sorted
    let canonical = serde_json::to_vec(&serde_json::to_value(&key)?)?;
    Ok(hex::encode(Sha256::digest(&canonical)))
}

const MAGIC: &[u8; 4] = b"EXGF";
const VERSION: u32 = 1;

pub fn encode_field(field: &GridField) -> Vec<u8> {
    let g = field.grid();
    let mut buf = Vec::with_capacity(32 + g.len() * 9);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    buf.extend_from_slice(&g.h().to_le_bytes());
    for (f, n) in g.first_index().iter().zip(g.shape()) {
        buf.extend_from_slice(&f.to_le_bytes());
        buf.extend_from_slice(&(*n as u64).to_le_bytes());
    }
    for c in g.classes() {
        buf.push(*c as u8);
    }
    for v in field.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf
}

/// Decodes a cached field, re-attaching it to `grid`; fails if the stored
/// layout differs from the grid.
pub fn decode_field(bytes: &[u8], grid: &Arc<GridSpec>) -> Result<GridField> {
    let mut r = bytes;
    let mut take = |n: usize| -> Result<&[u8]> {
        if r.len() < n {
            return Err(Error::invalid("truncated field cache"));
        }
        let (a, b) = r.split_at(n);
        r = b;
        Ok(a)
    };
    if take(4)? != MAGIC {
        return Err(Error::invalid("bad field cache magic"));
    }
    let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
    let dim = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let h = f64::from_le_bytes(take(8)?.try_into().unwrap());
    if version != VERSION || dim != grid.dim() || h != grid.h() {
        return Err(Error::invalid("field cache does not match grid"));
    }
    for (f, n) in grid.first_index().iter().zip(grid.shape()) {
        let ff = i64::from_le_bytes(take(8)?.try_into().unwrap());
        let nn = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
        if ff != *f || nn != *n {
            return Err(Error::invalid("field cache does not match grid"));
        }
    }
    let classes = take(grid.len())?;
    if classes
        .iter()
        .zip(grid.classes())
        .any(|(a, b)| *a != *b as u8)
    {
        return Err(Error::invalid("field cache classification differs"));
    }
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        values.push(f64::from_le_bytes(take(8)?.try_into().unwrap()));
    }
    let field = GridField::new(Arc::clone(grid), values)?;
    debug_assert!(field
        .values()
        .iter()
        .zip(grid.classes())
        .all(|(v, c)| (*c == NodeClass::Exterior) == v.is_nan()));
    Ok(field)
}

/// Directory of encoded fields keyed by [`cache_key`].
#[derive(Debug, Clone)]
pub struct FieldCache {
    dir: PathBuf,
}

impl FieldCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.bin"))
    }

    pub fn load(&self, key: &str, grid: &Arc<GridSpec>) -> Result<Option<GridField>> {
        let p = self.path(key);
        if !p.exists() {
            return Ok(None);
        }
        let mut bytes = Vec::new();
        fs::File::open(p)?.read_to_end(&mut bytes)?;
        decode_field(&bytes, grid).map(Some)
    }

    pub fn store(&self, key: &str, field: &GridField) -> Result<()> {
        let tmp = self.dir.join(format!("{key}.tmp"));
        fs::write(&tmp, encode_field(field))?;
        fs::rename(tmp, self.path(key))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<GridSpec> {
        Arc::new(GridSpec::new(&DomainSpec::UnitDisc, 0.25, 1000).unwrap())
    }

    #[test]
    fn binary_roundtrip() {
        let g = grid();
        let mut f = GridField::constant(Arc::clone(&g), -0.5);
        f.values_mut()[g.index_of(&[0, 0]).unwrap()] = -1.0;
        let back = decode_field(&encode_field(&f), &g).unwrap();
        assert_eq!(back.values().len(), f.values().len());
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!(a == b || (a.is_nan() && b.is_nan()));
        }
        let other = Arc::new(GridSpec::new(&DomainSpec::UnitDisc, 0.125, 1000).unwrap());
        assert!(decode_field(&encode_field(&f), &other).is_err());
        assert!(decode_field(&encode_field(&f)[..20], &g).is_err());
    }

    #[test]
    fn csv_has_header_and_live_rows() {
        let g = grid();
        let f = GridField::constant(Arc::clone(&g), 0.0);
        let mut out = Vec::new();
        write_csv(&f, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("re1,im1,value"));
        assert_eq!(lines.count(), f.live().count());
    }

    #[test]
    fn cache_key_depends_on_inputs() {
        let d = DomainSpec::UnitDisc;
        let a = SetExpr::closed_disc0(0.5);
        let p = SolverParams::default();
        let k1 = cache_key(&d, &a, &p).unwrap();
        assert_eq!(k1, cache_key(&d, &a, &p).unwrap());
        assert_ne!(k1, cache_key(&d, &SetExpr::closed_disc0(0.4), &p).unwrap());
        assert_ne!(k1, cache_key(&d, &a, &SolverParams::with_h(0.01)).unwrap());
    }
}
