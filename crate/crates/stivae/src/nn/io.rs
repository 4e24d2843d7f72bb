//! Binary weight container.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic  8 bytes  "STIVAEW\0"
//! version 1 byte  (currently 1)
//! count  1 byte   number of networks
//! per network:
//!   seed   u64
//!   layers u8
//!   per layer: in u32, out u32, activation u8, weights out*in f64, biases out f64
//! ```

use std::io::{Read, Write};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::nn::activation::Activation;
use crate::nn::mlp::{DenseLayer, Mlp};

const MAGIC: &[u8; 8] = b"STIVAEW\0";
const VERSION: u8 = 1;

fn act_code(a: Activation) -> u8 {
    match a {
        Activation::Linear => 0,
        Activation::LeakyRelu => 1,
        Activation::Elu => 2,
    }
}

fn act_from_code(c: u8) -> Result<Activation> {
    match c {
        0 => Ok(Activation::Linear),
        1 => Ok(Activation::LeakyRelu),
        2 => Ok(Activation::Elu),
        _ => Err(Error::Data(format!("unknown activation code {c}"))),
    }
}

/// Write a group of networks to `out`.
pub fn write_mlps<W: Write>(out: &mut W, mlps: &[&Mlp]) -> Result<()> {
    if mlps.len() > u8::MAX as usize {
        return Err(Error::Config("too many networks for container".into()));
    }
    out.write_all(MAGIC)?;
    out.write_all(&[VERSION, mlps.len() as u8])?;
    for mlp in mlps {
        out.write_all(&mlp.seed.to_le_bytes())?;
        out.write_all(&[mlp.layers.len() as u8])?;
        for layer in &mlp.layers {
            out.write_all(&(layer.in_dim() as u32).to_le_bytes())?;
            out.write_all(&(layer.out_dim() as u32).to_le_bytes())?;
            out.write_all(&[act_code(layer.act)])?;
            for v in layer.w.iter() {
                out.write_all(&v.to_le_bytes())?;
            }
            for v in layer.b.iter() {
                out.write_all(&v.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

fn read_exact_array<R: Read>(inp: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; n * 8];
    inp.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

/// Read back a group of networks written by [`write_mlps`].
pub fn read_mlps<R: Read>(inp: &mut R) -> Result<Vec<Mlp>> {
    let mut magic = [0u8; 8];
    inp.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Data("not a stivae weight container".into()));
    }
    let mut head = [0u8; 2];
    inp.read_exact(&mut head)?;
    if head[0] != VERSION {
        return Err(Error::Data(format!("unsupported container version {}", head[0])));
    }
    let count = head[1] as usize;
    let mut mlps = Vec::with_capacity(count);
    for _ in 0..count {
        let mut seed_buf = [0u8; 8];
        inp.read_exact(&mut seed_buf)?;
        let seed = u64::from_le_bytes(seed_buf);
        let mut nl = [0u8; 1];
        inp.read_exact(&mut nl)?;
        let mut layers = Vec::with_capacity(nl[0] as usize);
        for _ in 0..nl[0] {
            let mut dims = [0u8; 9];
            inp.read_exact(&mut dims)?;
            let in_dim = u32::from_le_bytes(dims[0..4].try_into().unwrap()) as usize;
            let out_dim = u32::from_le_bytes(dims[4..8].try_into().unwrap()) as usize;
            let act = act_from_code(dims[8])?;
            let w = Array2::from_shape_vec((out_dim, in_dim), read_exact_array(inp, out_dim * in_dim)?)
                .map_err(|e| Error::Data(format!("weight block malformed: {e}")))?;
            let b = Array2::from_shape_vec((1, out_dim), read_exact_array(inp, out_dim)?)
                .map_err(|e| Error::Data(format!("bias block malformed: {e}")))?;
            if w.iter().chain(b.iter()).any(|v| !v.is_finite()) {
                return Err(Error::Numeric("non-finite weight in container".into()));
            }
            layers.push(DenseLayer { w, b, act });
        }
        mlps.push(Mlp { layers, seed });
    }
    Ok(mlps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_weights_bit_exactly() {
        let a = Mlp::new(&[3, 5, 2], &[Activation::LeakyRelu, Activation::Linear], 7).unwrap();
        let b = Mlp::new(&[2, 4, 4], &[Activation::Elu, Activation::Linear], 8).unwrap();
        let mut buf = Vec::new();
        write_mlps(&mut buf, &[&a, &b]).unwrap();
        let back = read_mlps(&mut buf.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        for (orig, got) in [&a, &b].into_iter().zip(&back) {
            assert_eq!(orig.seed, got.seed);
            for (lo, lg) in orig.layers.iter().zip(&got.layers) {
                assert_eq!(lo.w, lg.w);
                assert_eq!(lo.b, lg.b);
                assert_eq!(lo.act, lg.act);
            }
        }
    }

    #[test]
    fn bad_magic_is_a_data_error() {
        let buf = b"NOTAFILE anything".to_vec();
        assert!(matches!(read_mlps(&mut buf.as_slice()), Err(Error::Data(_))));
    }
}
