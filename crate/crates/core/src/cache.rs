//! On-disk cache of one-period operators.
//!
//! File layout (little endian): magic `FLQU`, format version `u32`, the
//! 32-byte key digest, dimension `u64`, then `dim²` pairs of `f64`
//! (real, imaginary) in row-major order.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use num_complex::Complex64 as C64;
use sha2::{Digest, Sha256};

use crate::drive::{DriveAssignment, LatticeConfig};
use crate::error::{Error, Result};
use crate::propagator::{Propagator, PropagatorOptions, UnitaryMatrix};

const MAGIC: &[u8; 4] = b"FLQU";
pub const FORMAT_VERSION: u32 = 1;

fn key_material(cfg: &LatticeConfig, drive: &DriveAssignment, opts: &PropagatorOptions) -> String {
    let mult: Vec<String> = drive.multipliers().iter().map(u32::to_string).collect();
    format!(
        "v{FORMAT_VERSION};L={};g={:016x};J0={:016x};omega={:016x};k={};dt={:016x};order={};method={}",
        cfg.num_sites,
        cfg.field.to_bits(),
        cfg.coupling.to_bits(),
        drive.base_frequency().to_bits(),
        mult.join(","),
        opts.dt.to_bits(),
        opts.series_order,
        opts.method,
    )
}

fn digest(cfg: &LatticeConfig, drive: &DriveAssignment, opts: &PropagatorOptions) -> [u8; 32] {
    Sha256::digest(key_material(cfg, drive, opts).as_bytes()).into()
}

/// Hex key identifying `(L, g, J0, drive, dt, series order, method)`.
pub fn cache_key(cfg: &LatticeConfig, drive: &DriveAssignment, opts: &PropagatorOptions) -> String {
    digest(cfg, drive, opts).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone)]
pub struct UnitaryCache {
    dir: PathBuf,
}

impl UnitaryCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, cfg: &LatticeConfig, drive: &DriveAssignment, opts: &PropagatorOptions) -> PathBuf {
        self.dir.join(format!("{}.flqu", cache_key(cfg, drive, opts)))
    }

    pub fn load(
        &self,
        cfg: &LatticeConfig,
        drive: &DriveAssignment,
        opts: &PropagatorOptions,
    ) -> Result<Option<UnitaryMatrix>> {
        let path = self.path(cfg, drive, opts);
        let mut bytes = Vec::new();
        match fs::File::open(&path) {
            Ok(mut f) => f.read_to_end(&mut bytes)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let bad = |what: &str| Error::Cache(format!("{}: {what}", path.display()));
        if bytes.len() < 48 || &bytes[..4] != MAGIC {
            return Err(bad("not a cache file"));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
        if version != FORMAT_VERSION {
            return Err(bad(&format!("format version {version}, expected {FORMAT_VERSION}")));
        }
        if bytes[8..40] != digest(cfg, drive, opts) {
            return Err(bad("key mismatch"));
        }
        let dim = u64::from_le_bytes(bytes[40..48].try_into().expect("8 bytes")) as usize;
        if dim != cfg.dim() || bytes.len() != 48 + dim * dim * 16 {
            return Err(bad("unexpected size"));
        }
        let values: Vec<C64> = bytes[48..]
            .chunks_exact(16)
            .map(|c| {
                C64::new(
                    f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                    f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
                )
            })
            .collect();
        let matrix = Array2::from_shape_vec((dim, dim), values).map_err(|e| bad(&e.to_string()))?;
        Ok(Some(UnitaryMatrix::new(matrix, "U(T)")))
    }

    pub fn store(
        &self,
        cfg: &LatticeConfig,
        drive: &DriveAssignment,
        opts: &PropagatorOptions,
        u: &UnitaryMatrix,
    ) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let dim = u.dim();
        let mut bytes = Vec::with_capacity(48 + dim * dim * 16);
        bytes.extend_from_slice(MAGIC);
        bytes.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        bytes.extend_from_slice(&digest(cfg, drive, opts));
        bytes.extend_from_slice(&(dim as u64).to_le_bytes());
        for z in u.matrix().iter() {
            bytes.extend_from_slice(&z.re.to_le_bytes());
            bytes.extend_from_slice(&z.im.to_le_bytes());
        }
        let path = self.path(cfg, drive, opts);
        let tmp = path.with_extension("tmp");
        fs::File::create(&tmp)?.write_all(&bytes)?;
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    /// Cached operator if present, otherwise builds and stores it.
    pub fn get_or_build(
        &self,
        cfg: &LatticeConfig,
        drive: &DriveAssignment,
        opts: &PropagatorOptions,
    ) -> Result<UnitaryMatrix> {
        if let Some(u) = self.load(cfg, drive, opts)? {
            log::info!("loaded one-period operator from {}", self.path(cfg, drive, opts).display());
            return Ok(u);
        }
        let u = Propagator::new(cfg, drive, *opts)?.one_period()?;
        self.store(cfg, drive, opts, &u)?;
        Ok(u)
    }
}
