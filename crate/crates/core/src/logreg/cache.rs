//! Binary cache for preprocessed corpora.
//!
//! Layout (little endian): b"HSGD", u16 version, u64 n, u64 d, n*d f64
//! row-major features, n u8 labels.

use std::io::{Read, Write};

use super::Corpus;
use crate::error::{Error, Result};

pub const CACHE_MAGIC: &[u8; 4] = b"HSGD";
pub const CACHE_VERSION: u16 = 1;

pub fn write_cache<W: Write>(corpus: &Corpus, mut w: W) -> Result<()> {
    w.write_all(CACHE_MAGIC)?;
    w.write_all(&CACHE_VERSION.to_le_bytes())?;
    w.write_all(&(corpus.len() as u64).to_le_bytes())?;
    w.write_all(&(corpus.dim as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(corpus.features.len() * 8 + corpus.len());
    for v in &corpus.features {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf.extend_from_slice(&corpus.labels);
    w.write_all(&buf)?;
    Ok(())
}

pub fn cache_bytes(corpus: &Corpus) -> Vec<u8> {
    let mut out = Vec::new();
    write_cache(corpus, &mut out).expect("writing to a Vec cannot fail");
    out
}

pub fn read_cache<R: Read>(mut r: R) -> Result<Corpus> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    parse_cache(&bytes)
}

pub fn parse_cache(bytes: &[u8]) -> Result<Corpus> {
    if bytes.len() < 22 {
        return Err(Error::ShortRead {
            expected: 22,
            found: bytes.len(),
        });
    }
    if &bytes[..4] != CACHE_MAGIC {
        return Err(Error::UnrecognizedMagic(u32::from_be_bytes(bytes[..4].try_into().unwrap())));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != CACHE_VERSION {
        return Err(Error::Config(format!("unsupported cache version {version}")));
    }
    let n = u64::from_le_bytes(bytes[6..14].try_into().unwrap()) as usize;
    let d = u64::from_le_bytes(bytes[14..22].try_into().unwrap()) as usize;
    let expected = n
        .checked_mul(d)
        .and_then(|v| v.checked_mul(8))
        .and_then(|v| v.checked_add(22 + n))
        .ok_or_else(|| Error::Config("cache header overflows".into()))?;
    if bytes.len() < expected {
        return Err(Error::ShortRead {
            expected,
            found: bytes.len(),
        });
    }
    let body = &bytes[22..22 + n * d * 8];
    let features = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let labels = bytes[22 + n * d * 8..expected].to_vec();
    Ok(Corpus { dim: d, features, labels })
}
