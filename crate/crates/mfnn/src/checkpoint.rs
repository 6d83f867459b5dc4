//! Model checkpoint container.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic   b"MFNN"
//! version u16 (currently 1)
//! config  u16 field count, then per field:
//!         u16 name length, name bytes (UTF-8), u64 value
//! tensors in parameter declaration order, each:
//!         u16 rank, rank × u32 dims, dims-product × f32 values
//! ```
//!
//! The variant field is encoded as 0 = mfnn, 1 = one-trunk, 2 = relu-m.
//! A textual manifest (`<path>.manifest`) listing name, shape, byte offset,
//! and SHA-256 of every tensor is written alongside. Writing the same model
//! twice produces byte-identical files.
//!
//! The parser never trusts lengths from the file: every size is checked
//! against the remaining input before any allocation.

use crate::error::{Error, Result};
use crate::model::{MfnnModel, ModelConfig, ModelVariant};
use crate::scalar::Scalar;
use sha2::{Digest, Sha256};
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"MFNN";
pub const VERSION: u16 = 1;

/// A parsed parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTensor {
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

const CONFIG_FIELDS: [&str; 11] = [
    "num_branches",
    "branch_filters",
    "kernel",
    "pool",
    "trunk_filters",
    "fc_width",
    "num_classes",
    "in_channels",
    "input_length",
    "variant",
    "seed",
];

fn variant_code(v: ModelVariant) -> u64 {
    match v {
        ModelVariant::Mfnn => 0,
        ModelVariant::OneTrunk => 1,
        ModelVariant::ReluM => 2,
    }
}

fn variant_from_code(code: u64) -> Result<ModelVariant> {
    match code {
        0 => Ok(ModelVariant::Mfnn),
        1 => Ok(ModelVariant::OneTrunk),
        2 => Ok(ModelVariant::ReluM),
        other => Err(Error::format("checkpoint", format!("unknown variant code {other}"))),
    }
}

fn config_field(cfg: &ModelConfig, name: &str) -> u64 {
    match name {
        "num_branches" => cfg.num_branches as u64,
        "branch_filters" => cfg.branch_filters as u64,
        "kernel" => cfg.kernel as u64,
        "pool" => cfg.pool as u64,
        "trunk_filters" => cfg.trunk_filters as u64,
        "fc_width" => cfg.fc_width as u64,
        "num_classes" => cfg.num_classes as u64,
        "in_channels" => cfg.in_channels as u64,
        "input_length" => cfg.input_length as u64,
        "variant" => variant_code(cfg.variant),
        "seed" => cfg.seed,
        _ => unreachable!("unknown config field"),
    }
}

fn encode_config(cfg: &ModelConfig, out: &mut Vec<u8>) {
    out.extend_from_slice(&(CONFIG_FIELDS.len() as u16).to_le_bytes());
    for name in CONFIG_FIELDS {
        out.extend_from_slice(&(name.len() as u16).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&config_field(cfg, name).to_le_bytes());
    }
}

/// Bounded reader over a byte slice.
struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a str,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::format(
                self.path,
                format!("truncated while reading {what} ({n} bytes at offset {})", self.pos),
            ));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

fn decode_config(cur: &mut Cursor) -> Result<ModelConfig> {
    let n_fields = cur.u16("config field count")? as usize;
    if n_fields > 64 {
        return Err(Error::format(cur.path, format!("implausible config field count {n_fields}")));
    }
    let mut fields = std::collections::BTreeMap::new();
    for _ in 0..n_fields {
        let name_len = cur.u16("config field name length")? as usize;
        if name_len > 256 {
            return Err(Error::format(cur.path, "config field name too long"));
        }
        let name_bytes = cur.take(name_len, "config field name")?;
        let name = std::str::from_utf8(name_bytes)
            .map_err(|_| Error::format(cur.path, "config field name is not UTF-8"))?
            .to_string();
        let value = cur.u64("config field value")?;
        fields.insert(name, value);
    }
    let get = |name: &str| -> Result<u64> {
        fields
            .get(name)
            .copied()
            .ok_or_else(|| Error::format("checkpoint", format!("missing config field `{name}`")))
    };
    let as_usize = |name: &str| -> Result<usize> {
        let v = get(name)?;
        usize::try_from(v).map_err(|_| Error::format("checkpoint", format!("config field `{name}` out of range")))
    };
    let cfg = ModelConfig {
        num_branches: as_usize("num_branches")?,
        branch_filters: as_usize("branch_filters")?,
        kernel: as_usize("kernel")?,
        pool: as_usize("pool")?,
        trunk_filters: as_usize("trunk_filters")?,
        fc_width: as_usize("fc_width")?,
        num_classes: as_usize("num_classes")?,
        in_channels: as_usize("in_channels")?,
        input_length: as_usize("input_length")?,
        variant: variant_from_code(get("variant")?)?,
        seed: get("seed")?,
    };
    cfg.validate()
        .map_err(|e| Error::format("checkpoint", format!("invalid config: {e}")))?;
    Ok(cfg)
}

/// Serialize a model to the checkpoint byte layout.
pub fn encode_model<T: Scalar>(model: &MfnnModel<T>) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    encode_config(&model.config, &mut out);
    model.visit_params(&mut |_, shape, data| {
        out.extend_from_slice(&(shape.len() as u16).to_le_bytes());
        for &d in shape {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &v in data {
            out.extend_from_slice(&v.as_f32().to_le_bytes());
        }
    });
    out
}

/// Parse checkpoint bytes into the config and raw tensors.
///
/// Rejects bad magic, unknown versions, truncation, and tensor headers whose
/// element counts exceed the bytes actually present.
pub fn parse_checkpoint(bytes: &[u8], path: &str) -> Result<(ModelConfig, Vec<RawTensor>)> {
    let mut cur = Cursor { bytes, pos: 0, path };
    let magic = cur.take(4, "magic")?;
    if magic != MAGIC {
        return Err(Error::format(path, format!("bad magic {magic:02x?}, expected \"MFNN\"")));
    }
    let version = cur.u16("version")?;
    if version != VERSION {
        return Err(Error::format(path, format!("unsupported version {version}")));
    }
    let config = decode_config(&mut cur)?;
    let mut tensors = Vec::new();
    while cur.remaining() > 0 {
        let rank = cur.u16("tensor rank")? as usize;
        if rank == 0 || rank > 8 {
            return Err(Error::format(path, format!("implausible tensor rank {rank}")));
        }
        let mut shape = Vec::with_capacity(rank);
        let mut numel = 1usize;
        for _ in 0..rank {
            let d = cur.u32("tensor dim")? as usize;
            if d == 0 {
                return Err(Error::format(path, "zero tensor dimension"));
            }
            numel = numel
                .checked_mul(d)
                .ok_or_else(|| Error::format(path, "tensor size overflow"))?;
            shape.push(d);
        }
        if numel.checked_mul(4).is_none_or(|b| b > cur.remaining()) {
            return Err(Error::format(
                path,
                format!("tensor of {numel} elements exceeds remaining {} bytes", cur.remaining()),
            ));
        }
        let raw = cur.take(numel * 4, "tensor data")?;
        let data = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        tensors.push(RawTensor { shape, data });
    }
    Ok((config, tensors))
}

/// Write a model checkpoint plus its textual manifest.
pub fn save_model<T: Scalar>(model: &MfnnModel<T>, path: &Path) -> Result<()> {
    let bytes = encode_model(model);
    std::fs::write(path, &bytes)?;
    std::fs::write(manifest_path(path), manifest_text(model, &bytes))?;
    Ok(())
}

/// Manifest file path for a checkpoint path.
pub fn manifest_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".manifest");
    os.into()
}

fn manifest_text<T: Scalar>(model: &MfnnModel<T>, bytes: &[u8]) -> String {
    let mut lines = String::from("name\tshape\toffset\tsha256\n");
    // recompute the same offsets the encoder produced
    let mut offset = 4 + 2; // magic + version
    offset += 2 + CONFIG_FIELDS.iter().map(|n| 2 + n.len() + 8).sum::<usize>();
    model.visit_params(&mut |name, shape, data| {
        let header = 2 + 4 * shape.len();
        let data_off = offset + header;
        let data_len = data.len() * 4;
        let digest = Sha256::digest(&bytes[data_off..data_off + data_len]);
        let shape_str = shape
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join("x");
        lines.push_str(&format!("{name}\t{shape_str}\t{data_off}\t{digest:x}\n"));
        offset = data_off + data_len;
    });
    lines
}

/// Load a model from a checkpoint file at the caller's precision.
pub fn load_model<T: Scalar>(path: &Path) -> Result<MfnnModel<T>> {
    let bytes = std::fs::read(path)?;
    let (config, tensors) = parse_checkpoint(&bytes, &path.display().to_string())?;
    let mut model = MfnnModel::<T>::new(config)?;
    let mut idx = 0usize;
    let mut mismatch: Option<String> = None;
    model.visit_params_mut(&mut |name, param, _| {
        if mismatch.is_some() {
            return;
        }
        match tensors.get(idx) {
            Some(t) if t.data.len() == param.len() => {
                for (p, &v) in param.iter_mut().zip(&t.data) {
                    *p = T::of_f32(v);
                }
            }
            Some(t) => {
                mismatch = Some(format!(
                    "tensor `{name}`: expected {} elements, file has {}",
                    param.len(),
                    t.data.len()
                ));
            }
            None => mismatch = Some(format!("missing tensor `{name}`")),
        }
        idx += 1;
    });
    if let Some(msg) = mismatch {
        return Err(Error::format(path.display().to_string(), msg));
    }
    if idx != tensors.len() {
        return Err(Error::format(
            path.display().to_string(),
            format!("{} extra tensors in file", tensors.len() - idx),
        ));
    }
    Ok(model)
}
