//! Plain `key = value` run configuration with command-line overrides.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ldg_core::material::{reduce, MaterialParams, ReducedParams};
use ldg_core::{Error, Result};

/// Parsed configuration: a flat, ordered key/value map plus typed access.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

const MATERIAL_KEYS: [&str; 5] = ["a2", "b2", "c2", "L", "R0"];
const REDUCED_KEYS: [&str; 2] = ["t", "R"];

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            cfg.set_pair(line).map_err(|e| {
                Error::InvalidParameter(format!("{}:{}: {e}", path.display(), lineno + 1))
            })?;
        }
        Ok(cfg)
    }

    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (key, value) = pair.split_once('=').ok_or_else(|| {
            Error::InvalidParameter(format!("expected key=value, got `{pair}`"))
        })?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "expected key=value, got `{pair}`"
            )));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| {
                Error::InvalidParameter(format!("key {key}: `{v}` is not a number"))
            }),
        }
    }

    pub fn f64_required(&self, key: &str) -> Result<f64> {
        let v = self
            .get(key)
            .ok_or_else(|| Error::InvalidParameter(format!("missing required key {key}")))?;
        let x: f64 = v
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("key {key}: `{v}` is not a number")))?;
        if !x.is_finite() {
            return Err(Error::InvalidParameter(format!("key {key}: must be finite")));
        }
        Ok(x)
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| {
                Error::InvalidParameter(format!("key {key}: `{v}` is not a count"))
            }),
        }
    }

    pub fn u64(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| {
                Error::InvalidParameter(format!("key {key}: `{v}` is not an integer"))
            }),
        }
    }

    pub fn bool(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true") | Some("1") => Ok(true),
            Some("false") | Some("0") => Ok(false),
            Some(v) => Err(Error::InvalidParameter(format!(
                "key {key}: `{v}` is not a boolean"
            ))),
        }
    }

    pub fn str(&self, key: &str, default: &str) -> String {
        self.get(key).unwrap_or(default).to_string()
    }

    fn has_any(&self, keys: &[&str]) -> bool {
        keys.iter().any(|k| self.get(k).is_some())
    }

    /// Resolve the reduced parameter block: exactly one of the material
    /// block (a2, b2, c2, L, R0) or the reduced block (t, R) must be present.
    pub fn reduced_params(&self) -> Result<ReducedParams<f64>> {
        let has_material = self.has_any(&MATERIAL_KEYS);
        let has_reduced = self.has_any(&REDUCED_KEYS);
        match (has_material, has_reduced) {
            (true, true) => Err(Error::InvalidParameter(
                "give either the material block (a2,b2,c2,L,R0) or the reduced block (t,R), not both"
                    .into(),
            )),
            (false, false) => Err(Error::InvalidParameter(
                "missing parameters: give t and R, or the material block a2,b2,c2,L,R0".into(),
            )),
            (true, false) => {
                let p = MaterialParams::new(
                    self.f64_required("a2")?,
                    self.f64_required("b2")?,
                    self.f64_required("c2")?,
                    self.f64_required("L")?,
                    self.f64_required("R0")?,
                )?;
                reduce(&p)
            }
            (false, true) => {
                ReducedParams::from_t_r(self.f64_required("t")?, self.f64_required("R")?)
            }
        }
    }

    /// All resolved pairs in sorted key order (for provenance echoes).
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}
