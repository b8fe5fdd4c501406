//! Binary named-tensor archive.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic    b"DDGCLCKP"
//! version  u32
//! meta     u32 length + UTF-8 text
//! tensors  u32 count, then per tensor:
//!          u32 name length + UTF-8 name, u32 rank, u64 per dim,
//!          f64 values (row-major)
//! optim    u8 present flag; if 1: u64 step, f64 base_lr, u64 period,
//!          f64 floor_lr, then first and second moments as one tensor each
//!          per parameter, in parameter order, named "m/<name>" and "v/<name>"
//! ```

use std::io::{Read, Write};

use super::{AutodiffError, OptimizerState, Tensor};

pub const MAGIC: &[u8; 8] = b"DDGCLCKP";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    /// Free-form metadata, usually the serialized training configuration.
    pub meta: String,
    pub tensors: Vec<(String, Tensor)>,
    pub optimizer: Option<OptimizerState>,
}

fn put_u32(w: &mut impl Write, x: u32) -> std::io::Result<()> {
    w.write_all(&x.to_le_bytes())
}

fn put_u64(w: &mut impl Write, x: u64) -> std::io::Result<()> {
    w.write_all(&x.to_le_bytes())
}

fn put_str(w: &mut impl Write, s: &str) -> std::io::Result<()> {
    put_u32(w, s.len() as u32)?;
    w.write_all(s.as_bytes())
}

fn put_tensor(w: &mut impl Write, name: &str, t: &Tensor) -> std::io::Result<()> {
    put_str(w, name)?;
    put_u32(w, 2)?;
    put_u64(w, t.rows() as u64)?;
    put_u64(w, t.cols() as u64)?;
    for x in t.data() {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], AutodiffError> {
        if self.buf.len() - self.pos < n {
            return Err(AutodiffError::Checkpoint(format!("truncated at byte {}", self.pos)));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, AutodiffError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, AutodiffError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, AutodiffError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64, AutodiffError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn string(&mut self) -> Result<String, AutodiffError> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|e| AutodiffError::Checkpoint(format!("invalid UTF-8: {e}")))
    }

    fn tensor(&mut self) -> Result<(String, Tensor), AutodiffError> {
        let name = self.string()?;
        let rank = self.u32()? as usize;
        let dims = (0..rank).map(|_| self.u64().map(|d| d as usize)).collect::<Result<Vec<_>, _>>()?;
        let (rows, cols) = match dims.as_slice() {
            [] => (1, 1),
            [n] => (1, *n),
            [r, c] => (*r, *c),
            _ => return Err(AutodiffError::Checkpoint(format!("tensor {name} has rank {rank}"))),
        };
        let count = rows.checked_mul(cols).ok_or_else(|| AutodiffError::Checkpoint("tensor too large".into()))?;
        if count > (self.buf.len() - self.pos) / 8 {
            return Err(AutodiffError::Checkpoint(format!("tensor {name} exceeds file size")));
        }
        let data = (0..count).map(|_| self.f64()).collect::<Result<Vec<_>, _>>()?;
        Ok((name, Tensor::new(rows, cols, data)?))
    }
}

impl Checkpoint {
    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        put_u32(w, VERSION)?;
        put_str(w, &self.meta)?;
        put_u32(w, self.tensors.len() as u32)?;
        for (name, t) in &self.tensors {
            put_tensor(w, name, t)?;
        }
        match &self.optimizer {
            None => w.write_all(&[0]),
            Some(s) => {
                w.write_all(&[1])?;
                put_u64(w, s.step)?;
                w.write_all(&s.base_lr.to_le_bytes())?;
                put_u64(w, s.period)?;
                w.write_all(&s.floor_lr.to_le_bytes())?;
                for ((name, _), (m, v)) in self.tensors.iter().zip(s.first_moment.iter().zip(&s.second_moment)) {
                    put_tensor(w, &format!("m/{name}"), m)?;
                    put_tensor(w, &format!("v/{name}"), v)?;
                }
                Ok(())
            }
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self, AutodiffError> {
        let mut r = Reader { buf, pos: 0 };
        if r.take(MAGIC.len())? != MAGIC {
            return Err(AutodiffError::Checkpoint("bad magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(AutodiffError::Checkpoint(format!("unsupported version {version}")));
        }
        let meta = r.string()?;
        let count = r.u32()? as usize;
        let tensors = (0..count).map(|_| r.tensor()).collect::<Result<Vec<_>, _>>()?;
        let optimizer = match r.u8()? {
            0 => None,
            1 => {
                let step = r.u64()?;
                let base_lr = r.f64()?;
                let period = r.u64()?;
                let floor_lr = r.f64()?;
                let mut first_moment = Vec::with_capacity(count);
                let mut second_moment = Vec::with_capacity(count);
                for (name, p) in &tensors {
                    for (prefix, store) in [("m/", &mut first_moment), ("v/", &mut second_moment)] {
                        let (n, t) = r.tensor()?;
                        if n != format!("{prefix}{name}") || t.shape() != p.shape() {
                            return Err(AutodiffError::Checkpoint(format!("moment {n} does not match parameter {name}")));
                        }
                        store.push(t);
                    }
                }
                Some(OptimizerState { first_moment, second_moment, step, base_lr, period, floor_lr })
            }
            f => return Err(AutodiffError::Checkpoint(format!("bad optimizer flag {f}"))),
        };
        if r.pos != buf.len() {
            return Err(AutodiffError::Checkpoint("trailing bytes".into()));
        }
        Ok(Checkpoint { meta, tensors, optimizer })
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<(), AutodiffError> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, AutodiffError> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        Checkpoint::from_bytes(&buf)
    }
}
