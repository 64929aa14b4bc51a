//! Little-endian binary containers.
//!
//! Tensor: `"PQT1"`, `u32` C, H, W, then C·H·W `f32` in category-major, row-major
//! order. Probability map: `"PQM1"`, `u32` H, W, then H·W `f32`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{ProbabilityMap, ProbabilityTensor};

pub const TENSOR_MAGIC: &[u8; 4] = b"PQT1";
pub const PROB_MAP_MAGIC: &[u8; 4] = b"PQM1";

fn push_u32(buf: &mut Vec<u8>, v: usize) {
    buf.extend_from_slice(&(v as u32).to_le_bytes());
}

fn push_floats(buf: &mut Vec<u8>, values: &[f32]) {
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn encode_tensor(t: &ProbabilityTensor) -> Vec<u8> {
    let mut buf = Vec::with_capacity(16 + 4 * t.values().len());
    buf.extend_from_slice(TENSOR_MAGIC);
    push_u32(&mut buf, t.categories());
    push_u32(&mut buf, t.height());
    push_u32(&mut buf, t.width());
    push_floats(&mut buf, t.values());
    buf
}

pub fn encode_prob_map(p: &ProbabilityMap) -> Vec<u8> {
    let mut buf = Vec::with_capacity(12 + 4 * p.values().len());
    buf.extend_from_slice(PROB_MAP_MAGIC);
    push_u32(&mut buf, p.height());
    push_u32(&mut buf, p.width());
    push_floats(&mut buf, p.values());
    buf
}

/// Splits off the header, checking magic and exact payload length.
fn parse<'a>(
    bytes: &'a [u8],
    magic: &[u8; 4],
    dims: usize,
    path: &Path,
) -> Result<(Vec<usize>, &'a [u8])> {
    let header = 4 + 4 * dims;
    if bytes.len() < 4 || &bytes[..4] != magic {
        return Err(Error::format(
            path,
            format!("expected magic {:?}", String::from_utf8_lossy(magic)),
        ));
    }
    if bytes.len() < header {
        return Err(Error::format(path, "truncated header"));
    }
    let shape: Vec<usize> = bytes[4..header]
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]) as usize)
        .collect();
    let count = shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::format(path, "shape overflows"))?;
    let payload = &bytes[header..];
    if payload.len() < count {
        return Err(Error::format(
            path,
            format!("truncated payload: {} of {count} bytes", payload.len()),
        ));
    }
    if payload.len() > count {
        return Err(Error::format(
            path,
            format!("{} trailing bytes after payload", payload.len() - count),
        ));
    }
    Ok((shape, payload))
}

fn floats(payload: &[u8], path: &Path) -> Result<Vec<f32>> {
    let values: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::format(path, format!("non-finite value at index {i}")));
    }
    Ok(values)
}

pub fn decode_tensor(bytes: &[u8], path: &Path) -> Result<ProbabilityTensor> {
    let (shape, payload) = parse(bytes, TENSOR_MAGIC, 3, path)?;
    let values = floats(payload, path)?;
    ProbabilityTensor::new(shape[0], shape[1], shape[2], values)
        .map_err(|e| Error::format(path, e.to_string()))
}

pub fn decode_prob_map(bytes: &[u8], path: &Path) -> Result<ProbabilityMap> {
    let (shape, payload) = parse(bytes, PROB_MAP_MAGIC, 2, path)?;
    let values = floats(payload, path)?;
    ProbabilityMap::new(shape[0], shape[1], values).map_err(|e| Error::format(path, e.to_string()))
}

pub fn read_tensor(path: &Path) -> Result<ProbabilityTensor> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_tensor(&bytes, path)
}

pub fn write_tensor(path: &Path, t: &ProbabilityTensor) -> Result<()> {
    std::fs::write(path, encode_tensor(t)).map_err(|e| Error::io(path, e))
}

pub fn read_prob_map(path: &Path) -> Result<ProbabilityMap> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_prob_map(&bytes, path)
}

pub fn write_prob_map(path: &Path, p: &ProbabilityMap) -> Result<()> {
    std::fs::write(path, encode_prob_map(p)).map_err(|e| Error::io(path, e))
}
