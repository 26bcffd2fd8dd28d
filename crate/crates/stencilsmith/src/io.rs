//! Binary grid container.
//!
//! Little-endian layout: magic `NSG1`, precision code (u8), three zero
//! bytes, `nx ny nz` as u64, halo `i j k` as u32, then every point in layout
//! order.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use stencilsmith_core::grid::{Dims3, Grid3D, GridError, Halo};
use stencilsmith_core::{Precision, Real};

pub const MAGIC: [u8; 4] = *b"NSG1";
pub const HEADER_LEN: usize = 4 + 4 + 3 * 8 + 3 * 4;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("bad magic {0:?}, expected \"NSG1\"")]
    BadMagic([u8; 4]),
    #[error("unknown precision code {0}")]
    UnknownPrecision(u8),
    #[error("reserved header bytes are not zero")]
    Reserved,
    #[error("header does not fit in memory: {0}")]
    Header(&'static str),
    #[error("payload has {found} bytes, header requires {expected}")]
    PayloadLength { expected: u64, found: u64 },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Scalars the container can store.
pub trait Storable: Real {
    fn put(self, out: &mut Vec<u8>);
    fn take(bytes: &[u8]) -> Self;
}

impl Storable for f32 {
    fn put(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn take(bytes: &[u8]) -> Self {
        f32::from_le_bytes(bytes.try_into().expect("4-byte chunk"))
    }
}

impl Storable for f64 {
    fn put(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn take(bytes: &[u8]) -> Self {
        f64::from_le_bytes(bytes.try_into().expect("8-byte chunk"))
    }
}

/// A grid of either precision, as read back from a file.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyGrid {
    F32(Grid3D<f32>),
    F64(Grid3D<f64>),
}

impl AnyGrid {
    pub fn precision(&self) -> Precision {
        match self {
            AnyGrid::F32(_) => Precision::F32,
            AnyGrid::F64(_) => Precision::F64,
        }
    }

    pub fn dims(&self) -> Dims3 {
        match self {
            AnyGrid::F32(g) => g.dims(),
            AnyGrid::F64(g) => g.dims(),
        }
    }

    pub fn interior_checksum(&self) -> f64 {
        match self {
            AnyGrid::F32(g) => g.interior_checksum(),
            AnyGrid::F64(g) => g.interior_checksum(),
        }
    }
}

impl From<Grid3D<f32>> for AnyGrid {
    fn from(g: Grid3D<f32>) -> Self {
        AnyGrid::F32(g)
    }
}

impl From<Grid3D<f64>> for AnyGrid {
    fn from(g: Grid3D<f64>) -> Self {
        AnyGrid::F64(g)
    }
}

pub fn encode<T: Storable>(g: &Grid3D<T>) -> Vec<u8> {
    let d = g.dims();
    let h = g.halo();
    let mut out = Vec::with_capacity(HEADER_LEN + d.len() * T::PRECISION.bytes());
    out.extend_from_slice(&MAGIC);
    out.push(T::PRECISION.code());
    out.extend_from_slice(&[0; 3]);
    for n in [d.nx, d.ny, d.nz] {
        out.extend_from_slice(&(n as u64).to_le_bytes());
    }
    for n in [h.i, h.j, h.k] {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for &v in g.data() {
        v.put(&mut out);
    }
    out
}

pub fn write_grid<T: Storable>(mut w: impl Write, g: &Grid3D<T>) -> Result<(), FormatError> {
    w.write_all(&encode(g))?;
    w.flush()?;
    Ok(())
}

pub fn write_any(w: impl Write, g: &AnyGrid) -> Result<(), FormatError> {
    match g {
        AnyGrid::F32(g) => write_grid(w, g),
        AnyGrid::F64(g) => write_grid(w, g),
    }
}

fn decode_payload<T: Storable>(
    dims: Dims3,
    halo: Halo,
    payload: &[u8],
) -> Result<Grid3D<T>, FormatError> {
    let data = payload
        .chunks_exact(T::PRECISION.bytes())
        .map(T::take)
        .collect();
    Ok(Grid3D::from_vec(dims, halo, data)?)
}

pub fn read_grid(mut r: impl Read) -> Result<AnyGrid, FormatError> {
    let mut head = [0u8; HEADER_LEN];
    r.read_exact(&mut head)?;
    let magic: [u8; 4] = head[0..4].try_into().expect("4 bytes");
    if magic != MAGIC {
        return Err(FormatError::BadMagic(magic));
    }
    let precision = Precision::from_code(head[4]).ok_or(FormatError::UnknownPrecision(head[4]))?;
    if head[5..8] != [0, 0, 0] {
        return Err(FormatError::Reserved);
    }
    let u64_at = |o: usize| u64::from_le_bytes(head[o..o + 8].try_into().expect("8 bytes"));
    let u32_at = |o: usize| u32::from_le_bytes(head[o..o + 4].try_into().expect("4 bytes"));
    let size = |v: u64| usize::try_from(v).map_err(|_| FormatError::Header("extent exceeds usize"));
    let dims = Dims3::new(size(u64_at(8))?, size(u64_at(16))?, size(u64_at(24))?)?;
    let halo = Halo::new(
        u32_at(32) as usize,
        u32_at(36) as usize,
        u32_at(40) as usize,
    );

    let expected = (dims.len() as u64)
        .checked_mul(precision.bytes() as u64)
        .ok_or(FormatError::Header("payload size overflows"))?;
    let mut payload = Vec::new();
    r.take(expected.saturating_add(1))
        .read_to_end(&mut payload)?;
    if payload.len() as u64 != expected {
        return Err(FormatError::PayloadLength {
            expected,
            found: payload.len() as u64,
        });
    }
    Ok(match precision {
        Precision::F32 => AnyGrid::F32(decode_payload(dims, halo, &payload)?),
        Precision::F64 => AnyGrid::F64(decode_payload(dims, halo, &payload)?),
    })
}

pub fn save(path: impl AsRef<Path>, g: &AnyGrid) -> Result<(), FormatError> {
    write_any(BufWriter::new(File::create(path)?), g)
}

pub fn load(path: impl AsRef<Path>) -> Result<AnyGrid, FormatError> {
    read_grid(BufReader::new(File::open(path)?))
}
