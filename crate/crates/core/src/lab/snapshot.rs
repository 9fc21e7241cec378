//! Binary snapshot format: magic "GKDV", u32 version, u32 p, f64 L, u64 N, f64 t,
//! then N values, all little-endian.
//!
//! The time step is not part of the format; loaded fields carry [`SNAPSHOT_DT`] unless
//! the caller supplies one.

use crate::error::{Error, Result};
use crate::field::{Exponent, Field, GridSpec};
use std::io::Write;
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"GKDV";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 8 + 8 + 8;
/// Time step assigned to loaded fields.
pub const SNAPSHOT_DT: f64 = 1e-3;

pub fn encode_snapshot(u: &Field) -> Vec<u8> {
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * u.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&u.p().get().to_le_bytes());
    buf.extend_from_slice(&u.grid().length.to_le_bytes());
    buf.extend_from_slice(&(u.len() as u64).to_le_bytes());
    buf.extend_from_slice(&u.t().to_le_bytes());
    for v in u.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf
}

pub fn decode_snapshot(bytes: &[u8], dt: f64) -> Result<Field> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "snapshot truncated: {} bytes < header",
            bytes.len()
        )));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::Format("bad magic, not a GKDV snapshot".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported snapshot version {version}")));
    }
    let p = Exponent::new(u32_at(8)).map_err(|e| Error::Format(e.to_string()))?;
    let length = f64_at(12);
    let n = u64::from_le_bytes(bytes[20..28].try_into().unwrap());
    let t = f64_at(28);
    let expected = (n as usize)
        .checked_mul(8)
        .and_then(|b| b.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::Format(format!("implausible N = {n}")))?;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "snapshot has {} bytes, header announces {expected}",
            bytes.len()
        )));
    }
    let grid = GridSpec::new(length, n as usize, dt).map_err(|e| Error::Format(e.to_string()))?;
    let values = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Field::new(grid, p, t, values).map_err(|e| Error::Format(e.to_string()))
}

pub fn save_snapshot(u: &Field, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&encode_snapshot(u)).map_err(|e| Error::io(path, e))
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<Field> {
    load_snapshot_with_dt(path, SNAPSHOT_DT)
}

pub fn load_snapshot_with_dt(path: impl AsRef<Path>, dt: f64) -> Result<Field> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_snapshot(&bytes, dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Field {
        let g = GridSpec::new(12.5, 64, SNAPSHOT_DT).unwrap();
        Field::from_fn(g, Exponent::new(3).unwrap(), 1.25, |x| (x * 0.3).sin() * 1e-7 + x).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.gkdv");
        let u = sample();
        save_snapshot(&u, &path).unwrap();
        let back = load_snapshot(&path).unwrap();
        assert_eq!(back, u);
        assert_eq!(std::fs::read(&path).unwrap(), encode_snapshot(&back));
    }

    #[test]
    fn header_layout() {
        let b = encode_snapshot(&sample());
        assert_eq!(&b[..4], b"GKDV");
        assert_eq!(u32::from_le_bytes(b[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(b[8..12].try_into().unwrap()), 3);
        assert_eq!(f64::from_le_bytes(b[12..20].try_into().unwrap()), 12.5);
        assert_eq!(u64::from_le_bytes(b[20..28].try_into().unwrap()), 64);
        assert_eq!(f64::from_le_bytes(b[28..36].try_into().unwrap()), 1.25);
        assert_eq!(b.len(), 36 + 64 * 8);
    }

    #[test]
    fn rejects_corruption() {
        let b = encode_snapshot(&sample());
        assert!(matches!(
            decode_snapshot(&b[..b.len() - 3], SNAPSHOT_DT),
            Err(Error::Format(_))
        ));
        assert!(matches!(decode_snapshot(&b[..10], SNAPSHOT_DT), Err(Error::Format(_))));
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(matches!(decode_snapshot(&bad, SNAPSHOT_DT), Err(Error::Format(_))));
        let mut bad = b;
        bad[4] = 9;
        assert!(matches!(decode_snapshot(&bad, SNAPSHOT_DT), Err(Error::Format(_))));
    }
}
