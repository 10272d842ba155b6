//! Binary field snapshots.
//!
//! Layout (all little-endian): magic `b"NLSF"`, version `u32`, dim `u32`,
//! n `u32`, one `f64` length per axis, then `(re, im)` pairs of `f64` in
//! row-major order.

use std::io::{Read, Write};

use num_complex::Complex64 as C64;

use super::{ComplexField, Grid};
use crate::error::{NlsError, Result};

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"NLSF";
pub const SNAPSHOT_VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(mut w: W, field: &ComplexField) -> Result<()> {
    let g = &field.grid;
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    w.write_all(&(g.n() as u32).to_le_bytes())?;
    for _ in 0..g.dim() {
        w.write_all(&g.length().to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(field.values.len() * 16);
    for z in &field.values {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<ComplexField> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(NlsError::Snapshot(format!("bad magic {magic:?}")));
    }
    let version = read_u32(&mut r)?;
    if version != SNAPSHOT_VERSION {
        return Err(NlsError::Snapshot(format!("unsupported version {version}")));
    }
    let dim = read_u32(&mut r)? as usize;
    let n = read_u32(&mut r)? as usize;
    if dim != 1 && dim != 2 {
        return Err(NlsError::Snapshot(format!("bad dim {dim}")));
    }
    let mut lengths = Vec::with_capacity(dim);
    for _ in 0..dim {
        lengths.push(read_f64(&mut r)?);
    }
    if lengths.iter().any(|&l| l != lengths[0]) {
        return Err(NlsError::Snapshot("anisotropic grids are not supported".into()));
    }
    let grid = Grid::new(n, lengths[0], dim)?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let re = read_f64(&mut r)?;
        let im = read_f64(&mut r)?;
        values.push(C64::new(re, im));
    }
    ComplexField::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_1d_and_2d() {
        for dim in [1, 2] {
            let g = Grid::new(16, 3.5, dim).unwrap();
            let values = (0..g.len()).map(|i| C64::new(i as f64 * 0.5, -(i as f64))).collect();
            let f = ComplexField::new(g, values).unwrap();
            let mut bytes = Vec::new();
            write_snapshot(&mut bytes, &f).unwrap();
            assert_eq!(bytes.len(), 16 + 8 * dim + 16 * f.values.len());
            let back = read_snapshot(bytes.as_slice()).unwrap();
            assert_eq!(back.grid, f.grid);
            assert_eq!(back.values, f.values);
        }
    }

    #[test]
    fn header_layout() {
        let g = Grid::new(16, 2.0, 1).unwrap();
        let f = ComplexField::zeros(&g);
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, &f).unwrap();
        assert_eq!(&bytes[0..4], b"NLSF");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 16);
        assert_eq!(f64::from_le_bytes(bytes[16..24].try_into().unwrap()), 2.0);
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_snapshot(&b"XXXX\x01\x00\x00\x00"[..]).is_err());
        assert!(read_snapshot(&b"NLSF\x07\x00\x00\x00"[..]).is_err());
    }
}
