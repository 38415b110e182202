//! Flat binary container for named real arrays.
//!
//! Layout: a UTF-8 text header terminated by a line `end`, then the raw
//! little-endian values of every array back to back.
//!
//! ```text
//! irs-jsce-params 1
//! dtype f64
//! count 2
//! enc.l0.w 4,3 0
//! enc.l0.b 3 96
//! end
//! <binary payload>
//! ```
//!
//! Each entry line is `name shape offset` where `shape` is comma separated
//! (`-` for a scalar) and `offset` is the byte offset into the payload.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::params::ParameterSet;
use super::tensor::{numel, Tensor};

const MAGIC: &str = "irs-jsce-params 1";

pub fn encode<T: Real>(params: &ParameterSet<T>) -> Vec<u8> {
    let mut header = format!("{MAGIC}\ndtype {}\ncount {}\n", T::DTYPE, params.len());
    let mut payload = Vec::with_capacity(params.scalar_count() * T::BYTES);
    for (name, t) in params.iter() {
        let shape = if t.shape().is_empty() {
            "-".to_string()
        } else {
            t.shape().iter().map(usize::to_string).collect::<Vec<_>>().join(",")
        };
        header.push_str(&format!("{name} {shape} {}\n", payload.len()));
        for &v in t.values() {
            v.write_le(&mut payload);
        }
    }
    header.push_str("end\n");
    let mut out = header.into_bytes();
    out.extend_from_slice(&payload);
    out
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Container(msg.into())
}

pub fn decode<T: Real>(bytes: &[u8]) -> Result<ParameterSet<T>> {
    let marker = b"\nend\n";
    let end = bytes
        .windows(marker.len())
        .position(|w| w == marker)
        .ok_or_else(|| bad("missing `end` line"))?;
    let header = std::str::from_utf8(&bytes[..end]).map_err(|_| bad("header is not UTF-8"))?;
    let payload = &bytes[end + marker.len()..];

    let mut lines = header.lines();
    if lines.next() != Some(MAGIC) {
        return Err(bad("bad magic line"));
    }
    let dtype = lines
        .next()
        .and_then(|l| l.strip_prefix("dtype "))
        .ok_or_else(|| bad("missing dtype"))?;
    if dtype != T::DTYPE {
        return Err(bad(format!("dtype {dtype} does not match {}", T::DTYPE)));
    }
    let count: usize = lines
        .next()
        .and_then(|l| l.strip_prefix("count "))
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| bad("missing count"))?;

    let mut params = ParameterSet::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(' ').collect();
        let [name, shape, offset] = fields[..] else {
            return Err(bad(format!("entry {i}: expected `name shape offset`")));
        };
        let shape: Vec<usize> = if shape == "-" {
            Vec::new()
        } else {
            shape
                .split(',')
                .map(|d| d.parse().map_err(|_| bad(format!("{name}: bad shape"))))
                .collect::<Result<_>>()?
        };
        let offset: usize = offset.parse().map_err(|_| bad(format!("{name}: bad offset")))?;
        let n = numel(&shape);
        let stop = offset + n * T::BYTES;
        if stop > payload.len() {
            return Err(bad(format!("{name}: payload truncated")));
        }
        let values = payload[offset..stop].chunks_exact(T::BYTES).map(T::read_le).collect();
        params.insert(name, Tensor::new(shape, values)?)?;
    }
    if params.len() != count {
        return Err(bad(format!("count {count} but {} entries", params.len())));
    }
    Ok(params)
}

pub fn save<T: Real>(params: &ParameterSet<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&encode(params))?;
    Ok(())
}

pub fn load<T: Real>(path: impl AsRef<Path>) -> Result<ParameterSet<T>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}
