//! Binary network format: `MSDN` magic, version, layer count, input shape,
//! fixed-size layer records, then little-endian f32 parameters in layer order.

use std::path::Path;

use super::layers::{Conv1d, Dense, MaxPool1d};
use super::network::{Layer, Network};
use crate::error::{Error, Result};
use crate::Scalar;

pub const MODEL_MAGIC: &[u8; 4] = b"MSDN";
pub const MODEL_VERSION: u32 = 1;

const TAG_CONV: u32 = 1;
const TAG_POOL: u32 = 2;
const TAG_DENSE: u32 = 3;
const TAG_RELU: u32 = 4;

pub fn to_bytes<S: Scalar>(net: &Network<S>) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + net.param_count() * 4);
    out.extend_from_slice(MODEL_MAGIC);
    let put = |out: &mut Vec<u8>, v: u32| out.extend_from_slice(&v.to_le_bytes());
    put(&mut out, MODEL_VERSION);
    put(&mut out, net.layers().len() as u32);
    put(&mut out, net.input_len() as u32);
    put(&mut out, net.input_channels() as u32);
    for layer in net.layers() {
        let rec: [usize; 7] = match layer {
            Layer::Conv(c) => [TAG_CONV as usize, c.in_channels, c.out_channels, c.kernel, c.stride, c.weight.len(), c.bias.len()],
            Layer::Pool(p) => [TAG_POOL as usize, p.window, p.stride, 0, 0, 0, 0],
            Layer::Dense(d) => [TAG_DENSE as usize, d.in_dim, d.out_dim, 0, 0, d.weight.len(), d.bias.len()],
            Layer::Relu => [TAG_RELU as usize, 0, 0, 0, 0, 0, 0],
        };
        for v in rec {
            put(&mut out, v as u32);
        }
    }
    for layer in net.layers() {
        let (w, b) = match layer {
            Layer::Conv(c) => (&c.weight, &c.bias),
            Layer::Dense(d) => (&d.weight, &d.bias),
            _ => continue,
        };
        for v in w.iter().chain(b) {
            out.extend_from_slice(&v.to_f32_lossy().to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize, what: &str) -> Result<&[u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Format(format!("model truncated while reading {what}")));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn floats<S: Scalar>(&mut self, n: usize) -> Result<Vec<S>> {
        let raw = self.take(n.checked_mul(4).ok_or_else(|| Error::Format("parameter count overflow".into()))?, "parameters")?;
        Ok(raw
            .chunks_exact(4)
            .map(|c| S::from_f64_lossy(f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64))
            .collect())
    }
}

pub fn from_bytes<S: Scalar>(bytes: &[u8]) -> Result<Network<S>> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic")? != MODEL_MAGIC {
        return Err(Error::Format("not a network model (bad magic)".into()));
    }
    let version = r.u32("version")?;
    if version != MODEL_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let count = r.u32("layer count")? as usize;
    let input_len = r.u32("input length")? as usize;
    let input_channels = r.u32("input channels")? as usize;
    if count > 64 {
        return Err(Error::Format(format!("implausible layer count {count}")));
    }
    let mut records = Vec::with_capacity(count);
    for _ in 0..count {
        let mut rec = [0usize; 7];
        for v in &mut rec {
            *v = r.u32("layer record")? as usize;
        }
        records.push(rec);
    }
    let mut layers = Vec::with_capacity(count);
    for rec in records {
        let layer = match rec[0] as u32 {
            TAG_CONV => {
                let (cin, cout, k, stride) = (rec[1], rec[2], rec[3], rec[4]);
                if rec[5] != cout * k * cin || rec[6] != cout {
                    return Err(Error::Format("conv record sizes do not match its shape".into()));
                }
                Layer::Conv(Conv1d {
                    in_channels: cin,
                    out_channels: cout,
                    kernel: k,
                    stride,
                    weight: r.floats(rec[5])?,
                    bias: r.floats(rec[6])?,
                })
            }
            TAG_POOL => Layer::Pool(MaxPool1d::new(rec[1], rec[2])),
            TAG_DENSE => {
                let (din, dout) = (rec[1], rec[2]);
                if rec[5] != din * dout || rec[6] != dout {
                    return Err(Error::Format("dense record sizes do not match its shape".into()));
                }
                Layer::Dense(Dense {
                    in_dim: din,
                    out_dim: dout,
                    weight: r.floats(rec[5])?,
                    bias: r.floats(rec[6])?,
                })
            }
            TAG_RELU => Layer::Relu,
            t => return Err(Error::Format(format!("unknown layer tag {t}"))),
        };
        layers.push(layer);
    }
    if r.pos != bytes.len() {
        return Err(Error::Format(format!("{} trailing bytes after model", bytes.len() - r.pos)));
    }
    Network::from_layers(input_len, input_channels, layers).map_err(|e| Error::Format(e.to_string()))
}

pub fn save_model<S: Scalar>(net: &Network<S>, path: &Path) -> Result<()> {
    std::fs::write(path, to_bytes(net)).map_err(|e| Error::io(path, e))
}

pub fn load_model<S: Scalar>(path: &Path) -> Result<Network<S>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::NetworkSpec;

    fn net() -> Network<f32> {
        Network::new(NetworkSpec::reduced(3, 8), 21).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let n = net();
        let back: Network<f32> = from_bytes(&to_bytes(&n)).unwrap();
        assert_eq!(back, n);
        let x: Vec<f32> = (0..279).map(|i| (i % 9) as f32).collect();
        assert_eq!(back.predict(&x).unwrap(), n.predict(&x).unwrap());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        save_model(&net(), &path).unwrap();
        assert_eq!(load_model::<f32>(&path).unwrap(), net());
        assert!(matches!(load_model::<f32>(&dir.path().join("none")), Err(Error::Io { .. })));
    }

    #[test]
    fn truncated_and_corrupt() {
        let bytes = to_bytes(&net());
        for cut in [0, 3, 10, 30, bytes.len() - 1] {
            assert!(matches!(from_bytes::<f32>(&bytes[..cut]), Err(Error::Format(_))), "cut {cut}");
        }
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(from_bytes::<f32>(&bad).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(from_bytes::<f32>(&extra).is_err());
    }

    #[test]
    fn version_checked() {
        let mut bytes = to_bytes(&net());
        bytes[4] = 2;
        let err = from_bytes::<f32>(&bytes).unwrap_err();
        assert!(err.to_string().contains("unsupported version"));
    }
}
