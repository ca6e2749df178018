//! Binary coreset interchange: a fixed-layout header followed by
//! little-endian 64-bit float payloads for the basis and the projected
//! matrix, both column-major. Round trips are bit-exact.

use super::{Coreset, CoresetParams, DeltaMode};
use crate::error::{Error, Result};
use crate::matrix::{Dense, OrthonormalBasis};
use crate::sketch::PhaseTimings;
use std::time::Duration;

const MAGIC: &[u8; 8] = b"PCORESET";
const VERSION: u16 = 1;
const NO_OVERRIDE: u64 = u64::MAX;

pub fn serialize_coreset(c: &Coreset) -> Vec<u8> {
    let n = c.projected.nrows() as u64;
    let d = c.basis.ambient_dim() as u64;
    let m = c.achieved_rank as u64;
    let mut out = Vec::with_capacity(128 + 8 * ((n + d) * m) as usize);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(match c.delta_mode {
        DeltaMode::Estimated => 0,
        DeltaMode::Exact => 1,
    });
    out.push(c.params.affine as u8);
    for v in [
        n,
        d,
        m,
        c.params.k as u64,
        c.params.j as u64,
        c.params.rank_override.map_or(NO_OVERRIDE, |r| r as u64),
        c.sketch_rows as u64,
        c.seed,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in [
        c.params.epsilon,
        c.params.delta,
        c.params.sketch_constant,
        c.tail_energy,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in c.basis.columns().as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in c.projected.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        if self.pos + len > self.bytes.len() {
            return Err(Error::Format {
                offset: self.pos,
                reason: format!(
                    "truncated while reading {what}: need {len} bytes, {} remain",
                    self.bytes.len() - self.pos
                ),
            });
        }
        let s = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }
}

pub fn deserialize_coreset(bytes: &[u8]) -> Result<Coreset> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take(8, "magic")?;
    if magic != MAGIC {
        return Err(Error::Format {
            offset: 0,
            reason: format!("bad magic {magic:02x?}, expected {MAGIC:02x?}"),
        });
    }
    let version = u16::from_le_bytes(r.take(2, "version")?.try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format {
            offset: 8,
            reason: format!("unsupported version {version}, this build reads {VERSION}"),
        });
    }
    let delta_mode = match r.u8("delta mode")? {
        0 => DeltaMode::Estimated,
        1 => DeltaMode::Exact,
        other => {
            return Err(Error::Format {
                offset: r.pos - 1,
                reason: format!("unknown delta mode {other}"),
            })
        }
    };
    let affine = r.u8("affine flag")? != 0;
    let n = r.u64("n")? as usize;
    let d = r.u64("d")? as usize;
    let m = r.u64("m*")? as usize;
    let k = r.u64("k")? as usize;
    let j = r.u64("j")? as usize;
    let rank_override = match r.u64("rank override")? {
        NO_OVERRIDE => None,
        v => Some(v as usize),
    };
    let sketch_rows = r.u64("sketch rows")? as usize;
    let seed = r.u64("seed")?;
    let epsilon = r.f64("epsilon")?;
    let delta = r.f64("delta")?;
    let sketch_constant = r.f64("sketch constant")?;
    let tail_energy = r.f64("tail energy")?;
    if tail_energy < 0.0 || !tail_energy.is_finite() {
        return Err(Error::Format {
            offset: r.pos - 8,
            reason: format!("tail energy must be finite and nonnegative, got {tail_energy}"),
        });
    }

    let mut basis_data = vec![0.0f64; d * m];
    for v in basis_data.iter_mut() {
        *v = r.f64("basis payload")?;
    }
    let mut proj_data = vec![0.0f64; n * m];
    for v in proj_data.iter_mut() {
        *v = r.f64("projected payload")?;
    }
    if r.pos != bytes.len() {
        return Err(Error::Format {
            offset: r.pos,
            reason: format!("{} trailing bytes", bytes.len() - r.pos),
        });
    }

    let basis = OrthonormalBasis::new(Dense::from_column_slice(d, m, &basis_data))?;
    let projected = Dense::from_column_slice(n, m, &proj_data);
    Ok(Coreset {
        basis,
        projected,
        tail_energy,
        params: CoresetParams {
            k,
            j,
            epsilon,
            delta,
            affine,
            rank_override,
            sketch_constant,
        },
        achieved_rank: m,
        seed,
        construction_time: Duration::ZERO,
        delta_mode,
        timings: PhaseTimings::default(),
        sketch_rows,
    })
}
