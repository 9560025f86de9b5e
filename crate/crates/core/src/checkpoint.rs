//! Binary checkpoint container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic        8 bytes  "SPNCNCK1"
//! config_len   u64
//! config       config_len bytes of UTF-8 (the resolved experiment config)
//! n_matrices   u32
//! repeated n_matrices times:
//!   name_len   u16
//!   name       name_len bytes of UTF-8
//!   rows       u64
//!   cols       u64
//!   data       rows * cols f64, row-major
//! ```

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"SPNCNCK1";

#[derive(Debug, Clone, PartialEq)]
pub struct NamedMatrix {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    /// Row-major values.
    pub data: Vec<f64>,
}

impl NamedMatrix {
    pub fn from_array(name: impl Into<String>, m: &Array2<f64>) -> Self {
        Self {
            name: name.into(),
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.iter().copied().collect(),
        }
    }

    pub fn to_array(&self) -> Array2<f64> {
        Array2::from_shape_vec((self.rows, self.cols), self.data.clone())
            .expect("row-major data matches declared shape")
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Checkpoint {
    pub config: String,
    pub matrices: Vec<NamedMatrix>,
}

impl Checkpoint {
    /// Looks up a matrix and checks its shape.
    pub fn get(&self, name: &str, rows: usize, cols: usize) -> Result<Array2<f64>> {
        let m = self
            .matrices
            .iter()
            .find(|m| m.name == name)
            .ok_or_else(|| Error::Checkpoint(format!("missing matrix {name}")))?;
        if (m.rows, m.cols) != (rows, cols) {
            return Err(Error::Checkpoint(format!(
                "matrix {name}: expected {rows}x{cols}, found {}x{}",
                m.rows, m.cols
            )));
        }
        Ok(m.to_array())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.config.len() as u64).to_le_bytes());
        out.extend_from_slice(self.config.as_bytes());
        out.extend_from_slice(&(self.matrices.len() as u32).to_le_bytes());
        for m in &self.matrices {
            out.extend_from_slice(&(m.name.len() as u16).to_le_bytes());
            out.extend_from_slice(m.name.as_bytes());
            out.extend_from_slice(&(m.rows as u64).to_le_bytes());
            out.extend_from_slice(&(m.cols as u64).to_le_bytes());
            for v in &m.data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let config_len = r.u64()? as usize;
        let config = String::from_utf8(r.take(config_len)?.to_vec())
            .map_err(|e| Error::Checkpoint(format!("config is not UTF-8: {e}")))?;
        let n = r.u32()? as usize;
        let mut matrices = Vec::with_capacity(n);
        for _ in 0..n {
            let name_len = u16::from_le_bytes(r.take(2)?.try_into().unwrap()) as usize;
            let name = String::from_utf8(r.take(name_len)?.to_vec())
                .map_err(|e| Error::Checkpoint(format!("matrix name is not UTF-8: {e}")))?;
            let rows = r.u64()? as usize;
            let cols = r.u64()? as usize;
            let count = rows
                .checked_mul(cols)
                .ok_or_else(|| Error::Checkpoint(format!("matrix {name}: shape overflow")))?;
            let raw = r.take(count.checked_mul(8).ok_or_else(|| {
                Error::Checkpoint(format!("matrix {name}: shape overflow"))
            })?)?;
            let data = raw
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            matrices.push(NamedMatrix {
                name,
                rows,
                cols,
                data,
            });
        }
        if r.pos != bytes.len() {
            return Err(Error::Checkpoint(format!(
                "{} trailing bytes",
                bytes.len() - r.pos
            )));
        }
        Ok(Self { config, matrices })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        w.write_all(&self.to_bytes())?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Checkpoint("truncated checkpoint".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{arr2, ShapeBuilder};
    use proptest::prelude::*;

    #[test]
    fn byte_layout_is_row_major_le() {
        let mut m = Array2::zeros((2, 2).f());
        m.assign(&arr2(&[[1.0, 2.0], [3.0, 4.0]]));
        let ck = Checkpoint {
            config: "a = 1".into(),
            matrices: vec![NamedMatrix::from_array("W1", &m)],
        };
        let b = ck.to_bytes();
        assert_eq!(&b[..8], MAGIC);
        assert_eq!(u64::from_le_bytes(b[8..16].try_into().unwrap()), 5);
        let header = 16 + 5 + 4 + 2 + 2 + 16;
        let vals: Vec<f64> = b[header..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        assert_eq!(vals, vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn truncation_and_shape_errors() {
        let ck = Checkpoint {
            config: String::new(),
            matrices: vec![NamedMatrix::from_array("E1", &arr2(&[[1.0, 2.0, 3.0]]))],
        };
        let b = ck.to_bytes();
        assert!(Checkpoint::from_bytes(&b[..b.len() - 3]).is_err());
        let back = Checkpoint::from_bytes(&b).unwrap();
        assert!(back.get("E1", 1, 3).is_ok());
        assert!(back.get("E1", 3, 1).is_err());
        assert!(back.get("W1", 1, 3).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip(
            config in ".{0,40}",
            mats in prop::collection::vec((1usize..5, 1usize..5, any::<u64>()), 0..4),
        ) {
            let matrices = mats
                .into_iter()
                .enumerate()
                .map(|(i, (r, c, seed))| NamedMatrix {
                    name: format!("M{i}"),
                    rows: r,
                    cols: c,
                    data: (0..r * c).map(|k| (seed.wrapping_add(k as u64) as f64).sin()).collect(),
                })
                .collect();
            let ck = Checkpoint { config, matrices };
            prop_assert_eq!(Checkpoint::from_bytes(&ck.to_bytes()).unwrap(), ck);
        }
    }
}
