//! Binary checkpoint container. All integers and floats are little-endian.
//!
//! ```text
//! magic        8 bytes   "DRGNCKPT"
//! version      u32       currently 1
//! architecture str
//! vocabulary   u32 count, then count × str   (token order = index order)
//! labels       u32 count, then count × str   (output label enumeration)
//! tensors      u32 count, then per tensor:
//!                str name, u32 rank, rank × u64 dim, product(dims) × f64
//!
//! str = u32 byte length followed by UTF-8 bytes
//! ```

use std::io::{self, Read, Write};

use super::tensor::Tensor;
use super::NeuralError;

pub const MAGIC: &[u8; 8] = b"DRGNCKPT";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub architecture: String,
    pub vocabulary: Vec<String>,
    pub labels: Vec<String>,
    pub tensors: Vec<(String, Tensor)>,
}

impl Checkpoint {
    pub fn tensor(&self, name: &str) -> Result<&Tensor, NeuralError> {
        self.tensors
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
            .ok_or_else(|| NeuralError::Checkpoint(format!("missing tensor {name:?}")))
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        write_str(w, &self.architecture)?;
        write_strings(w, &self.vocabulary)?;
        write_strings(w, &self.labels)?;
        write_len(w, self.tensors.len())?;
        for (name, t) in &self.tensors {
            write_str(w, name)?;
            write_len(w, t.shape().len())?;
            for &d in t.shape() {
                w.write_all(&(d as u64).to_le_bytes())?;
            }
            for v in t.data() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, NeuralError> {
        let mut r = bytes;
        let ckpt = Self::read_from(&mut r)?;
        if !r.is_empty() {
            return Err(NeuralError::Checkpoint(format!("{} trailing bytes", r.len())));
        }
        Ok(ckpt)
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self, NeuralError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(truncated)?;
        if &magic != MAGIC {
            return Err(NeuralError::Checkpoint("not a checkpoint (bad magic)".into()));
        }
        let version = read_u32(r)?;
        if version != VERSION {
            return Err(NeuralError::Checkpoint(format!(
                "unsupported checkpoint version {version}"
            )));
        }
        let architecture = read_str(r)?;
        let vocabulary = read_strings(r)?;
        let labels = read_strings(r)?;
        let count = read_u32(r)? as usize;
        let mut tensors = Vec::with_capacity(count.min(1024));
        for _ in 0..count {
            let name = read_str(r)?;
            let rank = read_u32(r)? as usize;
            let mut shape = Vec::with_capacity(rank.min(8));
            for _ in 0..rank {
                let mut b = [0u8; 8];
                r.read_exact(&mut b).map_err(truncated)?;
                shape.push(u64::from_le_bytes(b) as usize);
            }
            let n: usize = shape.iter().product();
            let mut data = Vec::with_capacity(n.min(1 << 24));
            for _ in 0..n {
                let mut b = [0u8; 8];
                r.read_exact(&mut b).map_err(truncated)?;
                data.push(f64::from_le_bytes(b));
            }
            tensors.push((name, Tensor::from_vec(&shape, data)?));
        }
        Ok(Self {
            architecture,
            vocabulary,
            labels,
            tensors,
        })
    }
}

fn truncated(e: io::Error) -> NeuralError {
    NeuralError::Checkpoint(format!("truncated checkpoint: {e}"))
}

fn write_len<W: Write>(w: &mut W, n: usize) -> io::Result<()> {
    let n = u32::try_from(n).map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "length overflow"))?;
    w.write_all(&n.to_le_bytes())
}

fn write_str<W: Write>(w: &mut W, s: &str) -> io::Result<()> {
    write_len(w, s.len())?;
    w.write_all(s.as_bytes())
}

fn write_strings<W: Write>(w: &mut W, items: &[String]) -> io::Result<()> {
    write_len(w, items.len())?;
    items.iter().try_for_each(|s| write_str(w, s))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, NeuralError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u32::from_le_bytes(b))
}

fn read_str<R: Read>(r: &mut R) -> Result<String, NeuralError> {
    let len = read_u32(r)? as usize;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf).map_err(truncated)?;
    String::from_utf8(buf).map_err(|e| NeuralError::Checkpoint(format!("invalid UTF-8: {e}")))
}

fn read_strings<R: Read>(r: &mut R) -> Result<Vec<String>, NeuralError> {
    let n = read_u32(r)? as usize;
    (0..n).map(|_| read_str(r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        Checkpoint {
            architecture: "j-draggn".into(),
            vocabulary: vec!["<pad>".into(), "<unk>".into(), "go".into()],
            labels: vec![],
            tensors: vec![
                (
                    "a".into(),
                    Tensor::from_vec(&[2, 2], vec![1.0, -2.5, 0.0, 1e-300]).unwrap(),
                ),
                ("b".into(), Tensor::from_vec(&[1], vec![3.0]).unwrap()),
            ],
        }
    }

    #[test]
    fn layout_starts_with_magic_and_version() {
        let bytes = sample().to_bytes();
        assert_eq!(&bytes[..8], MAGIC);
        assert_eq!(&bytes[8..12], &1u32.to_le_bytes());
        assert_eq!(Checkpoint::from_bytes(&bytes).unwrap(), sample());
    }

    #[test]
    fn corrupt_inputs_are_rejected() {
        let bytes = sample().to_bytes();
        assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 3]).is_err());
        let mut wrong_version = bytes.clone();
        wrong_version[8] = 9;
        assert!(Checkpoint::from_bytes(&wrong_version).is_err());
        let mut wrong_magic = bytes.clone();
        wrong_magic[0] = b'X';
        assert!(Checkpoint::from_bytes(&wrong_magic).is_err());
        let mut extra = bytes;
        extra.push(0);
        assert!(Checkpoint::from_bytes(&extra).is_err());
    }
}
