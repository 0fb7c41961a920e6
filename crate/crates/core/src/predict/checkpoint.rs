//! Binary model checkpoints.
//!
//! Layout (all integers and floats little-endian, floats as IEEE-754 `f64`
//! regardless of the scalar type of the model that wrote them):
//!
//! ```text
//! magic    8 bytes   "DIAGQMDL"
//! version  u32       1
//! kind     u8        1 = majority, 2 = irt, 3 = mf
//! payload  kind-specific, see below
//! ```
//!
//! * majority: `n_q: u64`, question ids `[u64; n_q]`, correctness rates
//!   `[f64; n_q]`, option frequencies `[f64; 4 n_q]`, global rate `f64`,
//!   global option frequencies `[f64; 4]`.
//! * irt: variant `u8` (1 = 1PL, 2 = 2PL), `n_s: u64`, `n_q: u64`, user ids,
//!   question ids, abilities `[f64; n_s]`, log-discriminations `[f64; n_q]`,
//!   difficulties `[f64; n_q]`.
//! * mf: head `u8` (0 = binary, 1 = categorical), `k: u64`, `n_s: u64`,
//!   `n_q: u64`, user ids, question ids, global bias `f64`, student biases
//!   `[f64; n_s]`, question biases `[f64; n_q·h]`, student factors
//!   `[f64; n_s·k]`, question factors `[f64; n_q·h·k]` where `h` is 1 for
//!   the binary head and 4 for the categorical head.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::predict::irt::{IrtKind, IrtModel};
use crate::predict::majority::MajorityModel;
use crate::predict::mf::MfModel;
use crate::predict::model::{Mode, Prediction, ResponseModel};
use crate::scalar::Scalar;

pub const MAGIC: &[u8; 8] = b"DIAGQMDL";
pub const SCHEMA_VERSION: u32 = 1;

/// Upper bound on any length field, so a corrupt header cannot trigger a huge allocation.
const MAX_LEN: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq)]
pub enum Checkpoint<F> {
    Majority(MajorityModel<F>),
    Irt(IrtModel<F>),
    Mf(MfModel<F>),
}

fn io(e: std::io::Error) -> Error {
    Error::Checkpoint(e.to_string())
}

fn put_ids<W: Write>(w: &mut W, ids: &[u64]) -> Result<()> {
    ids.iter().try_for_each(|&i| w.write_u64::<LittleEndian>(i)).map_err(io)
}

fn put_floats<W: Write, F: Scalar>(w: &mut W, xs: &[F]) -> Result<()> {
    xs.iter().try_for_each(|x| w.write_f64::<LittleEndian>(x.f64())).map_err(io)
}

fn get_len<R: Read>(r: &mut R) -> Result<usize> {
    let n = r.read_u64::<LittleEndian>().map_err(io)?;
    if n > MAX_LEN {
        return Err(Error::Checkpoint(format!("implausible length {n}")));
    }
    Ok(n as usize)
}

fn get_ids<R: Read>(r: &mut R, n: usize) -> Result<Vec<u64>> {
    (0..n).map(|_| r.read_u64::<LittleEndian>().map_err(io)).collect()
}

fn get_floats<R: Read, F: Scalar>(r: &mut R, n: usize) -> Result<Vec<F>> {
    (0..n).map(|_| r.read_f64::<LittleEndian>().map(F::of).map_err(io)).collect()
}

impl<F: Scalar> Checkpoint<F> {
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC).map_err(io)?;
        w.write_u32::<LittleEndian>(SCHEMA_VERSION).map_err(io)?;
        match self {
            Checkpoint::Majority(m) => {
                w.write_u8(1).map_err(io)?;
                w.write_u64::<LittleEndian>(m.question_ids().len() as u64).map_err(io)?;
                put_ids(&mut w, m.question_ids())?;
                put_floats(&mut w, m.correct_rates())?;
                let flat: Vec<F> = m.choice_frequencies().iter().flatten().copied().collect();
                put_floats(&mut w, &flat)?;
                put_floats(&mut w, &[m.global_rate()])?;
                put_floats(&mut w, &m.global_frequencies())?;
            }
            Checkpoint::Irt(m) => {
                w.write_u8(2).map_err(io)?;
                w.write_u8(if m.kind() == IrtKind::OnePl { 1 } else { 2 }).map_err(io)?;
                w.write_u64::<LittleEndian>(m.n_students() as u64).map_err(io)?;
                w.write_u64::<LittleEndian>(m.n_questions() as u64).map_err(io)?;
                put_ids(&mut w, m.user_ids())?;
                put_ids(&mut w, m.question_ids())?;
                put_floats(&mut w, m.abilities())?;
                put_floats(&mut w, m.log_discriminations())?;
                put_floats(&mut w, m.difficulties())?;
            }
            Checkpoint::Mf(m) => {
                w.write_u8(3).map_err(io)?;
                w.write_u8(if m.mode == Mode::Categorical { 1 } else { 0 }).map_err(io)?;
                w.write_u64::<LittleEndian>(m.k as u64).map_err(io)?;
                w.write_u64::<LittleEndian>(m.user_ids.len() as u64).map_err(io)?;
                w.write_u64::<LittleEndian>(m.question_ids.len() as u64).map_err(io)?;
                put_ids(&mut w, &m.user_ids)?;
                put_ids(&mut w, &m.question_ids)?;
                put_floats(&mut w, &[m.global_bias])?;
                put_floats(&mut w, &m.student_bias)?;
                put_floats(&mut w, &m.question_bias)?;
                put_floats(&mut w, &m.student_factors)?;
                put_floats(&mut w, &m.question_factors)?;
            }
        }
        w.flush().map_err(io)
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != MAGIC {
            return Err(Error::Checkpoint("bad magic header".into()));
        }
        let version = r.read_u32::<LittleEndian>().map_err(io)?;
        if version != SCHEMA_VERSION {
            return Err(Error::Checkpoint(format!("unsupported schema version {version}")));
        }
        let kind = r.read_u8().map_err(io)?;
        let checkpoint = match kind {
            1 => {
                let n_q = get_len(&mut r)?;
                let ids = get_ids(&mut r, n_q)?;
                let rates = get_floats(&mut r, n_q)?;
                let flat: Vec<F> = get_floats(&mut r, 4 * n_q)?;
                let freqs = flat.chunks_exact(4).map(|c| [c[0], c[1], c[2], c[3]]).collect();
                let global_rate = get_floats::<_, F>(&mut r, 1)?[0];
                let g: Vec<F> = get_floats(&mut r, 4)?;
                Checkpoint::Majority(MajorityModel::from_parts(ids, rates, freqs, global_rate, [g[0], g[1], g[2], g[3]]))
            }
            2 => {
                let variant = match r.read_u8().map_err(io)? {
                    1 => IrtKind::OnePl,
                    2 => IrtKind::TwoPl,
                    v => return Err(Error::Checkpoint(format!("unknown IRT variant {v}"))),
                };
                let n_s = get_len(&mut r)?;
                let n_q = get_len(&mut r)?;
                let users = get_ids(&mut r, n_s)?;
                let questions = get_ids(&mut r, n_q)?;
                let theta = get_floats(&mut r, n_s)?;
                let log_a = get_floats(&mut r, n_q)?;
                let b = get_floats(&mut r, n_q)?;
                Checkpoint::Irt(IrtModel::from_parts(variant, users, questions, theta, log_a, b)?)
            }
            3 => {
                let mode = match r.read_u8().map_err(io)? {
                    0 => Mode::Binary,
                    1 => Mode::Categorical,
                    v => return Err(Error::Checkpoint(format!("unknown factor head {v}"))),
                };
                let per_q = if mode == Mode::Categorical { 4 } else { 1 };
                let k = get_len(&mut r)?;
                let n_s = get_len(&mut r)?;
                let n_q = get_len(&mut r)?;
                let users = get_ids(&mut r, n_s)?;
                let questions = get_ids(&mut r, n_q)?;
                let global = get_floats::<_, F>(&mut r, 1)?[0];
                let sb = get_floats(&mut r, n_s)?;
                let qb = get_floats(&mut r, n_q * per_q)?;
                let sf = get_floats(&mut r, n_s * k)?;
                let qf = get_floats(&mut r, n_q * per_q * k)?;
                Checkpoint::Mf(MfModel::from_parts(mode, k, users, questions, sf, qf, sb, qb, global)?)
            }
            other => return Err(Error::Checkpoint(format!("unknown model kind {other}"))),
        };
        let mut rest = [0u8; 1];
        if r.read(&mut rest).map_err(io)? != 0 {
            return Err(Error::Checkpoint("trailing bytes after payload".into()));
        }
        Ok(checkpoint)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_atomic(path, |w| self.write(w))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(file))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Checkpoint::Majority(_) => "majority",
            Checkpoint::Irt(_) => "irt",
            Checkpoint::Mf(_) => "mf",
        }
    }
}

impl<F: Scalar> ResponseModel<F> for Checkpoint<F> {
    fn supports(&self, mode: Mode) -> bool {
        match self {
            Checkpoint::Majority(m) => m.supports(mode),
            Checkpoint::Irt(m) => m.supports(mode),
            Checkpoint::Mf(m) => m.supports(mode),
        }
    }

    fn predict(&self, user_id: u64, question_id: u64, mode: Mode) -> Result<Prediction<F>> {
        match self {
            Checkpoint::Majority(m) => m.predict(user_id, question_id, mode),
            Checkpoint::Irt(m) => m.predict(user_id, question_id, mode),
            Checkpoint::Mf(m) => m.predict(user_id, question_id, mode),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_headers() {
        assert!(Checkpoint::<f64>::read(&b"NOTMAGIC\x01\0\0\0\x01"[..]).is_err());
        let mut bytes = MAGIC.to_vec();
        bytes.extend_from_slice(&2u32.to_le_bytes());
        assert!(matches!(Checkpoint::<f64>::read(&bytes[..]), Err(Error::Checkpoint(m)) if m.contains("version")));
        let mut bytes = MAGIC.to_vec();
        bytes.extend_from_slice(&1u32.to_le_bytes());
        bytes.push(9);
        assert!(Checkpoint::<f64>::read(&bytes[..]).is_err());
    }

    #[test]
    fn irt_round_trip() {
        let m = IrtModel::from_parts(IrtKind::TwoPl, vec![4, 9], vec![1], vec![0.5, -0.25], vec![0.1], vec![0.3]).unwrap();
        let mut buf = Vec::new();
        Checkpoint::Irt(m.clone()).write(&mut buf).unwrap();
        assert_eq!(&buf[..8], MAGIC);
        assert_eq!(Checkpoint::<f64>::read(&buf[..]).unwrap(), Checkpoint::Irt(m));
        buf.push(0);
        assert!(Checkpoint::<f64>::read(&buf[..]).is_err());
    }
}
