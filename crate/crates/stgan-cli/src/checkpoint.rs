//! Single-file binary checkpoints: a length-prefixed plain-text key-value
//! manifest (human-inspectable with `head`) followed by a little-endian
//! 32-bit float payload.
//!
//! Layout:
//!   bytes 0..8   payload-independent u64 LE manifest byte length
//!   manifest     UTF-8 "key=value" lines: format_version, kind, cfg.*
//!                entries, then one "tensor.<i>=<name>|<dims>|<offset>" line
//!                per tensor (offset in f32 elements)
//!   payload      all tensor values as f32 LE, concatenated in index order
//!
//! Compute is f64 throughout; storage is f32, with a documented reload
//! tolerance of 1e-6 relative. save -> load -> save is byte-identical.

use std::path::Path;

use stgan::tensor::ParamStore;

use crate::{CliError, Result};

pub const FORMAT_VERSION: u32 = 1;

pub struct Checkpoint {
    pub kind: String,
    /// Config entries in file order (order is preserved for byte-identical
    /// round trips).
    pub config: Vec<(String, String)>,
    pub tensors: Vec<(String, Vec<usize>, Vec<f64>)>,
}

impl Checkpoint {
    pub fn new(kind: &str) -> Checkpoint {
        Checkpoint { kind: kind.to_string(), config: Vec::new(), tensors: Vec::new() }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.config.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.config.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| CliError::runtime(format!("checkpoint is missing key {key:?}")))
    }

    pub fn require_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.require(key)?
            .parse()
            .map_err(|_| CliError::runtime(format!("checkpoint key {key:?} failed to parse")))
    }

    /// Append every parameter of a store under a name prefix.
    pub fn push_store(&mut self, prefix: &str, store: &ParamStore) {
        for id in store.ids() {
            self.tensors.push((
                format!("{prefix}{}", store.name(id)),
                store.shape(id).to_vec(),
                store.value(id).to_vec(),
            ));
        }
    }

    /// Copy tensors under `prefix` back into a store by name. Every store
    /// parameter must be present with a matching shape.
    pub fn restore_store(&self, prefix: &str, store: &mut ParamStore) -> Result<()> {
        for id in store.ids().collect::<Vec<_>>() {
            let name = format!("{prefix}{}", store.name(id));
            let Some((_, shape, data)) = self.tensors.iter().find(|(n, _, _)| *n == name) else {
                return Err(CliError::runtime(format!("checkpoint is missing tensor {name:?}")));
            };
            if shape != store.shape(id) {
                return Err(CliError::runtime(format!(
                    "checkpoint tensor {name:?} has shape {shape:?}, expected {:?}",
                    store.shape(id)
                )));
            }
            store
                .set_value(id, data.clone())
                .map_err(|e| CliError::runtime(e.to_string()))?;
        }
        Ok(())
    }

    pub fn tensor(&self, name: &str) -> Result<(&[usize], &[f64])> {
        self.tensors
            .iter()
            .find(|(n, _, _)| n == name)
            .map(|(_, s, d)| (s.as_slice(), d.as_slice()))
            .ok_or_else(|| CliError::runtime(format!("checkpoint is missing tensor {name:?}")))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut manifest = String::new();
        manifest.push_str(&format!("format_version={FORMAT_VERSION}\n"));
        manifest.push_str(&format!("kind={}\n", self.kind));
        for (k, v) in &self.config {
            manifest.push_str(&format!("cfg.{k}={v}\n"));
        }
        let mut offset = 0usize;
        for (i, (name, shape, data)) in self.tensors.iter().enumerate() {
            let dims =
                shape.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x");
            manifest.push_str(&format!("tensor.{i}={name}|{dims}|{offset}\n"));
            offset += data.len();
        }
        let mut bytes = Vec::with_capacity(8 + manifest.len() + offset * 4);
        bytes.extend_from_slice(&(manifest.len() as u64).to_le_bytes());
        bytes.extend_from_slice(manifest.as_bytes());
        for (_, _, data) in &self.tensors {
            for &v in data {
                bytes.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        bytes
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Checkpoint> {
        if bytes.len() < 8 {
            return Err(CliError::runtime("checkpoint file too short"));
        }
        let manifest_len = u64::from_le_bytes(bytes[0..8].try_into().unwrap()) as usize;
        if bytes.len() < 8 + manifest_len {
            return Err(CliError::runtime("checkpoint manifest truncated"));
        }
        let manifest = std::str::from_utf8(&bytes[8..8 + manifest_len])
            .map_err(|_| CliError::runtime("checkpoint manifest is not UTF-8"))?;
        let payload = &bytes[8 + manifest_len..];
        if !payload.len().is_multiple_of(4) {
            return Err(CliError::runtime("checkpoint payload length not a multiple of 4"));
        }
        let values: Vec<f64> = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();

        let mut kind = String::new();
        let mut config = Vec::new();
        let mut tensor_lines: Vec<(String, Vec<usize>, usize)> = Vec::new();
        for line in manifest.lines() {
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::runtime(format!("bad manifest line {line:?}")));
            };
            if key == "format_version" {
                let version: u32 = value
                    .parse()
                    .map_err(|_| CliError::runtime("bad format_version"))?;
                if version != FORMAT_VERSION {
                    return Err(CliError::runtime(format!(
                        "unsupported checkpoint version {version} (expected {FORMAT_VERSION})"
                    )));
                }
            } else if key == "kind" {
                kind = value.to_string();
            } else if let Some(cfg_key) = key.strip_prefix("cfg.") {
                config.push((cfg_key.to_string(), value.to_string()));
            } else if key.starts_with("tensor.") {
                let parts: Vec<&str> = value.split('|').collect();
                if parts.len() != 3 {
                    return Err(CliError::runtime(format!("bad tensor line {line:?}")));
                }
                let shape: Vec<usize> = if parts[1].is_empty() {
                    vec![]
                } else {
                    parts[1]
                        .split('x')
                        .map(|d| d.parse().map_err(|_| CliError::runtime("bad tensor dims")))
                        .collect::<Result<_>>()?
                };
                let offset: usize =
                    parts[2].parse().map_err(|_| CliError::runtime("bad tensor offset"))?;
                tensor_lines.push((parts[0].to_string(), shape, offset));
            }
        }
        if kind.is_empty() {
            return Err(CliError::runtime("checkpoint has no kind"));
        }
        let mut tensors = Vec::with_capacity(tensor_lines.len());
        for (name, shape, offset) in tensor_lines {
            let len: usize = shape.iter().product();
            if offset + len > values.len() {
                return Err(CliError::runtime(format!(
                    "tensor {name:?} extends past the payload"
                )));
            }
            tensors.push((name, shape, values[offset..offset + len].to_vec()));
        }
        Ok(Checkpoint { kind, config, tensors })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::runtime(format!("cannot read {}: {e}", path.display())))?;
        Checkpoint::from_bytes(&bytes)
    }
}
