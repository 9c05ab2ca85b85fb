//! Binary hypervector files.
//!
//! Layout (all integers little-endian):
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 4    | magic `b"MCRV"`                          |
//! | 4      | 1    | format version (1)                      |
//! | 5      | 2    | modulus `r` (`0` encodes `r = 65536`)   |
//! | 7      | 1    | bits per component `b`                  |
//! | 8      | 4    | dimension `D`                           |
//! | 12     | 4    | reserved, zero                          |
//! | 16     | ..   | packed payload, `ceil(D*b/8)` bytes      |

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::ring::{Hypervector, Modulus};

pub const MAGIC: [u8; 4] = *b"MCRV";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 16;

/// Decoded file header.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Header {
    pub modulus: Modulus,
    pub dim: usize,
}

impl Header {
    pub fn encode(&self) -> Result<[u8; HEADER_LEN]> {
        let dim = u32::try_from(self.dim)
            .map_err(|_| Error::invalid(format!("dimension {} does not fit the header", self.dim)))?;
        let mut h = [0u8; HEADER_LEN];
        h[0..4].copy_from_slice(&MAGIC);
        h[4] = VERSION;
        let r = self.modulus.r();
        let r_field = if r == Modulus::MAX { 0 } else { r as u16 };
        h[5..7].copy_from_slice(&r_field.to_le_bytes());
        h[7] = self.modulus.bits() as u8;
        h[8..12].copy_from_slice(&dim.to_le_bytes());
        Ok(h)
    }

    pub fn decode(h: &[u8; HEADER_LEN]) -> Result<Header> {
        if h[0..4] != MAGIC {
            return Err(Error::Format("bad magic, not an MCRV file".into()));
        }
        if h[4] != VERSION {
            return Err(Error::Format(format!("unsupported format version {}", h[4])));
        }
        let r_field = u16::from_le_bytes([h[5], h[6]]) as u32;
        let r = if r_field == 0 { Modulus::MAX } else { r_field };
        let modulus = Modulus::new(r).map_err(|e| Error::Format(e.to_string()))?;
        if h[7] as u32 != modulus.bits() {
            return Err(Error::Format(format!(
                "header declares {} bits per component but r={} needs {}",
                h[7],
                r,
                modulus.bits()
            )));
        }
        let dim = u32::from_le_bytes([h[8], h[9], h[10], h[11]]) as usize;
        if dim == 0 {
            return Err(Error::Format("zero dimension".into()));
        }
        Ok(Header { modulus, dim })
    }
}

pub fn write_hypervector<W: Write>(mut w: W, hv: &Hypervector) -> Result<()> {
    let header = Header { modulus: hv.modulus(), dim: hv.dim() }.encode()?;
    w.write_all(&header)?;
    w.write_all(&hv.to_payload())?;
    Ok(())
}

pub fn read_hypervector<R: Read>(mut r: R) -> Result<Hypervector> {
    let mut h = [0u8; HEADER_LEN];
    r.read_exact(&mut h)?;
    let header = Header::decode(&h)?;
    let mut payload = vec![0u8; crate::ring::payload_len(header.modulus, header.dim)];
    r.read_exact(&mut payload)?;
    Hypervector::from_payload(header.modulus, header.dim, &payload)
}

pub fn to_bytes(hv: &Hypervector) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(HEADER_LEN + hv.payload_len());
    write_hypervector(&mut out, hv)?;
    Ok(out)
}
