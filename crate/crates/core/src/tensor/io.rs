//! Binary tensor files.
//!
//! Layout, all integers little-endian:
//!
//! | offset | size | field                                              |
//! |--------|------|----------------------------------------------------|
//! | 0      | 4    | magic `TUB3`                                       |
//! | 4      | 4    | version (`u32`, currently 1)                       |
//! | 8      | 24   | `n1`, `n2`, `n3` (`u64` each)                      |
//! | 32     | 4    | ordering (`u32`, 0 = slice-major, column-major slices) |
//! | 36     | 4    | DFT convention (`u32`, 0 = forward unnormalized)   |
//! | 40     | 8·N  | `n1·n2·n3` entries as `f64`, slice-major           |

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::{Dims, SliceLayoutDescriptor, SliceOrdering, Tensor3};
use crate::error::{Result, TubalError};

pub const MAGIC: &[u8; 4] = b"TUB3";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 40;

fn layout_codes(layout: SliceLayoutDescriptor) -> (u32, u32) {
    let ordering = match layout.ordering {
        SliceOrdering::SliceMajor => 0,
    };
    let fft = if layout.forward_unnormalized { 0 } else { 1 };
    (ordering, fft)
}

pub fn write_tensor<W: Write>(mut w: W, t: &Tensor3) -> Result<()> {
    let d = t.dims();
    let (ordering, fft) = layout_codes(SliceLayoutDescriptor::CURRENT);
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * d.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    for n in [d.n1, d.n2, d.n3] {
        buf.extend_from_slice(&(n as u64).to_le_bytes());
    }
    buf.extend_from_slice(&ordering.to_le_bytes());
    buf.extend_from_slice(&fft.to_le_bytes());
    for v in t.as_slice() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_tensor<R: Read>(mut r: R) -> Result<Tensor3> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)
        .map_err(|e| TubalError::Format(format!("short header: {e}")))?;
    if &header[0..4] != MAGIC {
        return Err(TubalError::Format("bad magic".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(header[o..o + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(TubalError::Format(format!("unsupported version {version}")));
    }
    let expected = layout_codes(SliceLayoutDescriptor::CURRENT);
    if (u32_at(32), u32_at(36)) != expected {
        return Err(TubalError::Format("unsupported layout descriptor".into()));
    }
    let to_usize = |v: u64| {
        usize::try_from(v).map_err(|_| TubalError::Format(format!("dimension {v} too large")))
    };
    let dims = Dims::new(to_usize(u64_at(8))?, to_usize(u64_at(16))?, to_usize(u64_at(24))?);
    let n = dims
        .n1
        .checked_mul(dims.n2)
        .and_then(|x| x.checked_mul(dims.n3))
        .ok_or_else(|| TubalError::Format("dimensions overflow".into()))?;
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() != 8 * n {
        return Err(TubalError::Format(format!(
            "expected {} payload bytes, found {}",
            8 * n,
            body.len()
        )));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Tensor3::from_vec(dims, data)
}

pub fn save(path: impl AsRef<Path>, t: &Tensor3) -> Result<()> {
    let mut buf = Vec::new();
    write_tensor(&mut buf, t)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<Tensor3> {
    read_tensor(fs::File::open(path)?)
}
