//! Stored spectral constants `Γ_a`, `Δ_a`.
//!
//! One record per line, whitespace-separated `key=value` fields:
//!
//! ```text
//! preset=hydrogen name=gamma_a bits=41a2b0f4c8000000 value=6.2682320e8 window=1e4 version=0.1.0
//! ```
//!
//! `bits` is the IEEE-754 pattern in hex and is what gets read back; `value`
//! is only for people. A record whose `window` or `version` differs from the
//! running code is a miss.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub struct CacheRecord {
    pub preset: String,
    pub name: String,
    pub value: f64,
    pub window: f64,
    pub version: String,
}

impl CacheRecord {
    fn to_line(&self) -> String {
        format!(
            "preset={} name={} bits={} value={:e} window={:e} version={}",
            self.preset,
            self.name,
            hex::encode(self.value.to_bits().to_be_bytes()),
            self.value,
            self.window,
            self.version
        )
    }

    fn from_line(line: &str) -> Result<Self> {
        let fields: BTreeMap<&str, &str> = line
            .split_whitespace()
            .map(|f| f.split_once('=').context("field without `=`"))
            .collect::<Result<_>>()?;
        let field = |k: &str| fields.get(k).copied().with_context(|| format!("missing `{k}`"));
        let bytes: [u8; 8] = hex::decode(field("bits")?)?
            .try_into()
            .map_err(|_| anyhow::anyhow!("`bits` must be 8 bytes"))?;
        Ok(Self {
            preset: field("preset")?.to_string(),
            name: field("name")?.to_string(),
            value: f64::from_bits(u64::from_be_bytes(bytes)),
            window: field("window")?.parse()?,
            version: field("version")?.to_string(),
        })
    }
}

/// In-memory view of a cache file; `save` rewrites it whole.
#[derive(Debug, Default)]
pub struct ResultCache {
    path: Option<PathBuf>,
    records: Vec<CacheRecord>,
    dirty: bool,
}

impl ResultCache {
    /// A cache that never stores anything.
    pub fn disabled() -> Self {
        Self::default()
    }

    /// Loads `path`, or starts empty if it does not exist yet.
    pub fn open(path: &Path) -> Result<Self> {
        let mut records = Vec::new();
        if path.exists() {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading cache {}", path.display()))?;
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let rec = CacheRecord::from_line(line)
                    .with_context(|| format!("{}:{}", path.display(), i + 1))?;
                records.push(rec);
            }
        }
        Ok(Self {
            path: Some(path.to_path_buf()),
            records,
            dirty: false,
        })
    }

    /// The stored value if it was produced with the same window and code version.
    pub fn get(&self, preset: &str, name: &str, window: f64) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.preset == preset && r.name == name)
            .filter(|r| r.window.to_bits() == window.to_bits() && r.version == CODE_VERSION)
            .map(|r| r.value)
    }

    pub fn put(&mut self, preset: &str, name: &str, value: f64, window: f64) {
        if self.path.is_none() {
            return;
        }
        let rec = CacheRecord {
            preset: preset.to_string(),
            name: name.to_string(),
            value,
            window,
            version: CODE_VERSION.to_string(),
        };
        match self
            .records
            .iter_mut()
            .find(|r| r.preset == preset && r.name == name)
        {
            Some(old) if *old == rec => return,
            Some(old) => *old = rec,
            None => self.records.push(rec),
        }
        self.dirty = true;
    }

    /// Writes through a temporary file so a crash never leaves half a cache.
    pub fn save(&mut self) -> Result<()> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        if !self.dirty {
            return Ok(());
        }
        let mut sorted = self.records.clone();
        sorted.sort_by(|a, b| (&a.preset, &a.name).cmp(&(&b.preset, &b.name)));
        let tmp = path.with_extension("tmp");
        {
            let mut f = fs::File::create(&tmp)
                .with_context(|| format!("creating {}", tmp.display()))?;
            writeln!(f, "# lyman spectral constants")?;
            for r in &sorted {
                writeln!(f, "{}", r.to_line())?;
            }
            f.sync_all()?;
        }
        fs::rename(&tmp, path).with_context(|| format!("replacing {}", path.display()))?;
        self.dirty = false;
        Ok(())
    }

    pub fn is_enabled(&self) -> bool {
        self.path.is_some()
    }
}

/// Cache key for a preset; synthetic keys carry the exact bits of `A` and `B`.
pub fn preset_key(a_b: Option<(f64, f64)>) -> String {
    match a_b {
        None => "hydrogen".to_string(),
        Some((a, b)) => format!(
            "synthetic:{}:{}",
            hex::encode(a.to_bits().to_be_bytes()),
            hex::encode(b.to_bits().to_be_bytes())
        ),
    }
}

pub fn check_value(name: &str, v: f64) -> Result<f64> {
    if !v.is_finite() {
        bail!("cached {name} is not finite");
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_round_trips_bits() {
        let rec = CacheRecord {
            preset: "hydrogen".into(),
            name: "delta_a".into(),
            value: 0.1 + 0.2,
            window: 1e4,
            version: CODE_VERSION.into(),
        };
        let back = CacheRecord::from_line(&rec.to_line()).unwrap();
        assert_eq!(back.value.to_bits(), rec.value.to_bits());
        assert_eq!(back, rec);
    }
}
