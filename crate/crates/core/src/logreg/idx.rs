//! IDX container reader/writer (the format the standard handwritten-digit
//! corpus ships in). Header: two zero bytes, a type byte, a rank byte, then
//! one big-endian u32 per dimension.

use crate::error::{Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdxArray {
    Images {
        count: usize,
        rows: usize,
        cols: usize,
        pixels: Vec<u8>,
    },
    Labels(Vec<u8>),
}

fn read_u32(bytes: &[u8], at: usize) -> Result<u32> {
    let chunk = bytes.get(at..at + 4).ok_or(Error::ShortRead {
        expected: at + 4,
        found: bytes.len(),
    })?;
    Ok(u32::from_be_bytes(chunk.try_into().expect("4 bytes")))
}

pub fn parse_idx(bytes: &[u8]) -> Result<IdxArray> {
    let magic = read_u32(bytes, 0)?;
    let rank = match magic {
        IMAGES_MAGIC => 3,
        LABELS_MAGIC => 1,
        other => return Err(Error::UnrecognizedMagic(other)),
    };
    let mut dims = Vec::with_capacity(rank);
    for i in 0..rank {
        dims.push(read_u32(bytes, 4 + 4 * i)? as usize);
    }
    let header = 4 + 4 * rank;
    let len: usize = dims.iter().product();
    let payload = bytes.get(header..header + len).ok_or(Error::ShortRead {
        expected: header + len,
        found: bytes.len(),
    })?;
    Ok(if rank == 3 {
        IdxArray::Images {
            count: dims[0],
            rows: dims[1],
            cols: dims[2],
            pixels: payload.to_vec(),
        }
    } else {
        IdxArray::Labels(payload.to_vec())
    })
}

pub fn write_idx_images(count: usize, rows: usize, cols: usize, pixels: &[u8]) -> Vec<u8> {
    assert_eq!(pixels.len(), count * rows * cols);
    let mut out = Vec::with_capacity(16 + pixels.len());
    out.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    for v in [count, rows, cols] {
        out.extend_from_slice(&(v as u32).to_be_bytes());
    }
    out.extend_from_slice(pixels);
    out
}

pub fn write_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

/// Paired images and digit labels.
#[derive(Debug, Clone, PartialEq)]
pub struct IdxDataset {
    pub rows: usize,
    pub cols: usize,
    /// count x (rows * cols), row-major.
    pub pixels: Vec<u8>,
    pub labels: Vec<u8>,
}

impl IdxDataset {
    pub fn from_bytes(images: &[u8], labels: &[u8]) -> Result<Self> {
        let (count, rows, cols, pixels) = match parse_idx(images)? {
            IdxArray::Images {
                count,
                rows,
                cols,
                pixels,
            } => (count, rows, cols, pixels),
            IdxArray::Labels(_) => return Err(Error::contract("expected an image file, got labels")),
        };
        let labels = match parse_idx(labels)? {
            IdxArray::Labels(l) => l,
            IdxArray::Images { .. } => return Err(Error::contract("expected a label file, got images")),
        };
        if labels.len() != count {
            return Err(Error::contract(format!(
                "{count} images but {} labels",
                labels.len()
            )));
        }
        if labels.iter().any(|&l| l > 9) {
            return Err(Error::contract("labels must be digits 0..=9"));
        }
        Ok(IdxDataset {
            rows,
            cols,
            pixels,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Pixels scaled to [0, 1].
    pub fn features(&self) -> nalgebra::DMatrix<f64> {
        let d = self.rows * self.cols;
        nalgebra::DMatrix::from_row_iterator(self.len(), d, self.pixels.iter().map(|&p| p as f64 / 255.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_built_image_buffer() {
        let mut buf = vec![0, 0, 8, 3, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 2];
        buf.extend_from_slice(&[0, 255, 16, 32]);
        assert_eq!(buf.len(), 20);
        assert_eq!(
            parse_idx(&buf).unwrap(),
            IdxArray::Images {
                count: 1,
                rows: 2,
                cols: 2,
                pixels: vec![0, 255, 16, 32]
            }
        );
    }

    #[test]
    fn bad_magic_and_truncation() {
        let e = parse_idx(&[0x12, 0x34, 0x56, 0x78, 0, 0, 0, 0]).unwrap_err();
        assert!(e.to_string().contains("unrecognized magic"));
        let mut buf = write_idx_labels(&[1, 2, 3]);
        buf.pop();
        assert!(parse_idx(&buf).unwrap_err().to_string().contains("short read"));
        assert!(parse_idx(&[0, 0]).unwrap_err().to_string().contains("short read"));
    }

    #[test]
    fn empty_label_file() {
        assert_eq!(parse_idx(&write_idx_labels(&[])).unwrap(), IdxArray::Labels(vec![]));
        let ds = IdxDataset::from_bytes(&write_idx_images(0, 2, 2, &[]), &write_idx_labels(&[])).unwrap();
        assert!(ds.is_empty());
    }

    #[test]
    fn round_trip() {
        let px: Vec<u8> = (0..24).collect();
        let ds = IdxDataset::from_bytes(&write_idx_images(2, 3, 4, &px), &write_idx_labels(&[7, 2])).unwrap();
        assert_eq!(ds.pixels, px);
        assert_eq!(ds.labels, vec![7, 2]);
        assert_eq!(ds.features()[(1, 0)], 12.0 / 255.0);
    }
}
