//! Binary checkpoints: `EXPASSCK`, u32 version, u8 architecture tag, u64
//! epoch, u32 depth, u32 tensor count, then per tensor u32 rows, u32 cols and
//! row-major little-endian f64 values.

use std::fs;
use std::path::Path;

use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::layers::{Architecture, ModelParams};

const MAGIC: &[u8; 8] = b"EXPASSCK";
const VERSION: u32 = 1;

pub fn encode_checkpoint(params: &ModelParams, epoch: usize) -> Vec<u8> {
    let tensors = params.tensors();
    let mut out = Vec::with_capacity(32 + tensors.iter().map(|t| 8 + 8 * t.len()).sum::<usize>());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(params.architecture().tag());
    out.extend_from_slice(&(epoch as u64).to_le_bytes());
    out.extend_from_slice(&(params.depth() as u32).to_le_bytes());
    out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for t in tensors {
        out.extend_from_slice(&(t.rows() as u32).to_le_bytes());
        out.extend_from_slice(&(t.cols() as u32).to_le_bytes());
        for x in t.data() {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Checkpoint(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

/// Returns `(epoch, params)`.
pub fn decode_checkpoint(bytes: &[u8]) -> Result<(usize, ModelParams)> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let tag = r.take(1)?[0];
    let arch = Architecture::from_tag(tag).ok_or_else(|| Error::Checkpoint(format!("unknown architecture tag {tag}")))?;
    let epoch = r.u64()? as usize;
    let depth = r.u32()? as usize;
    let count = r.u32()? as usize;
    if count != depth * arch.weights_per_layer() + 1 {
        return Err(Error::Checkpoint(format!("{count} tensors for {arch} of depth {depth}")));
    }
    let mut tensors = Vec::with_capacity(count);
    for _ in 0..count {
        let rows = r.u32()? as usize;
        let cols = r.u32()? as usize;
        let raw = r.take(rows.checked_mul(cols).and_then(|n| n.checked_mul(8)).ok_or_else(|| Error::Checkpoint("tensor too large".into()))?)?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        tensors.push(Tensor::new(rows, cols, data)?);
    }
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    let readout = tensors.pop().expect("count >= 1");
    let per = arch.weights_per_layer();
    let mut layers = Vec::with_capacity(depth);
    let mut it = tensors.into_iter();
    for _ in 0..depth {
        layers.push(it.by_ref().take(per).collect());
    }
    let params = ModelParams::from_parts(arch, layers, readout).map_err(|e| Error::Checkpoint(e.to_string()))?;
    Ok((epoch, params))
}

pub fn save_checkpoint(path: &Path, params: &ModelParams, epoch: usize) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, encode_checkpoint(params, epoch))?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<(usize, ModelParams)> {
    if !path.exists() {
        return Err(Error::Checkpoint(format!("missing checkpoint {}", path.display())));
    }
    decode_checkpoint(&fs::read(path)?)
}
