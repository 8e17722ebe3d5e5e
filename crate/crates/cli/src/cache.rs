//! On-disk cache of `xx` correlators, one file per `(N, lambda, grid, version)`.
//!
//! File layout (little endian): magic `IMXX`, `u32` engine version, `u32` grid
//! code, `u64` N, `f64` lambda, then N `f64` values.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use isingmacro::{GridConvention, ENGINE_VERSION};

use crate::format::g12;

const MAGIC: &[u8; 4] = b"IMXX";
const HEADER_LEN: usize = 4 + 4 + 4 + 8 + 8;

/// `lambda` rounded to 12 significant digits. Every computation goes through
/// this value, so cold and warm runs see identical inputs.
pub fn canonical_lambda(lambda: f64) -> f64 {
    g12(lambda).parse().expect("g12 output parses")
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub n_sites: usize,
    pub lambda: String,
    pub grid: GridConvention,
    pub engine_version: u32,
}

impl CacheKey {
    pub fn new(n_sites: usize, lambda: f64, grid: GridConvention) -> Self {
        Self {
            n_sites,
            lambda: g12(lambda),
            grid,
            engine_version: ENGINE_VERSION,
        }
    }

    fn file_name(&self) -> String {
        format!(
            "xx_v{}_{}_N{}_l{}.bin",
            self.engine_version, self.grid, self.n_sites, self.lambda
        )
    }

    fn grid_code(&self) -> u32 {
        match self.grid {
            GridConvention::NeveuSchwarzEven => 0,
            GridConvention::PaperOdd => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn open(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(key.file_name())
    }

    /// `None` on a miss or on any header mismatch.
    pub fn load(&self, key: &CacheKey) -> Option<Vec<f64>> {
        let bytes = fs::read(self.path(key)).ok()?;
        if bytes.len() != HEADER_LEN + 8 * key.n_sites || &bytes[..4] != MAGIC {
            return None;
        }
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let u64_at = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
        if u32_at(4) != key.engine_version || u32_at(8) != key.grid_code() || u64_at(12) != key.n_sites as u64 {
            return None;
        }
        if g12(f64::from_bits(u64_at(20))) != key.lambda {
            return None;
        }
        Some(
            bytes[HEADER_LEN..]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        )
    }

    /// Writes through a temporary file and a rename, so concurrent writers
    /// of the same key never expose a partial file.
    pub fn store(&self, key: &CacheKey, lambda: f64, xx: &[f64]) -> io::Result<()> {
        let mut bytes = Vec::with_capacity(HEADER_LEN + 8 * xx.len());
        bytes.extend_from_slice(MAGIC);
        bytes.extend_from_slice(&key.engine_version.to_le_bytes());
        bytes.extend_from_slice(&key.grid_code().to_le_bytes());
        bytes.extend_from_slice(&(key.n_sites as u64).to_le_bytes());
        bytes.extend_from_slice(&lambda.to_le_bytes());
        for v in xx {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let target = self.path(key);
        let tmp = target.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, &bytes)?;
        fs::rename(&tmp, &target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_key_isolation() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path()).unwrap();
        let key = CacheKey::new(4, 0.5, GridConvention::NeveuSchwarzEven);
        assert!(cache.load(&key).is_none());
        cache.store(&key, 0.5, &[1.0, 0.25, 0.125, 0.25]).unwrap();
        assert_eq!(cache.load(&key).unwrap(), vec![1.0, 0.25, 0.125, 0.25]);
        assert!(cache.load(&CacheKey::new(4, 0.51, GridConvention::NeveuSchwarzEven)).is_none());
        let mut other_version = key.clone();
        other_version.engine_version += 1;
        assert!(cache.load(&other_version).is_none());
    }

    #[test]
    fn keys_round_to_twelve_digits() {
        let a = CacheKey::new(8, 0.8 + 3.0 * 0.0005, GridConvention::NeveuSchwarzEven);
        let b = CacheKey::new(8, 0.8015, GridConvention::NeveuSchwarzEven);
        assert_eq!(a, b);
        assert_eq!(canonical_lambda(0.1 + 0.2), 0.3);
    }

    #[test]
    fn truncated_file_is_a_miss() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path()).unwrap();
        let key = CacheKey::new(4, 0.5, GridConvention::NeveuSchwarzEven);
        cache.store(&key, 0.5, &[1.0, 0.5, 0.5, 0.5]).unwrap();
        let path = cache.path(&key);
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        assert!(cache.load(&key).is_none());
    }
}
