//! Policy parameter persistence.
//!
//! Flat little-endian binary format:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "TFP1"
//! 4       1     policy kind (0 tabular, 1 sequence)
//! 5       1     reserved (0)
//! 6       2     number of header dims, u16 LE
//! 8       4*k   header dims, u32 LE each
//!         8     parameter count, u64 LE
//!         8*n   parameters, f64 LE
//! ```
//!
//! Header dims are `[n]` for tabular and `[vocab, len, hidden]` for
//! sequence policies.

use super::{Policy, SequencePolicy, TabularPolicy};
use crate::error::{Error, Result};
use std::io::{Read, Write};

const MAGIC: &[u8; 4] = b"TFP1";

/// A policy loaded from a parameter file.
#[derive(Debug, Clone)]
pub enum AnyPolicy {
    Tabular(TabularPolicy),
    Sequence(SequencePolicy),
}

pub fn save_policy<P: Policy>(policy: &P, mut w: impl Write) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&[policy.kind() as u8, 0])?;
    let dims = policy.header_dims();
    w.write_all(&(dims.len() as u16).to_le_bytes())?;
    for d in &dims {
        w.write_all(&d.to_le_bytes())?;
    }
    w.write_all(&(policy.param_len() as u64).to_le_bytes())?;
    for p in policy.params() {
        w.write_all(&p.to_le_bytes())?;
    }
    Ok(())
}

pub fn load_policy(mut r: impl Read) -> Result<AnyPolicy> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Input("not a policy parameter file (bad magic)".into()));
    }
    let mut head = [0u8; 2];
    r.read_exact(&mut head)?;
    let kind = head[0];
    let mut len2 = [0u8; 2];
    r.read_exact(&mut len2)?;
    let n_dims = u16::from_le_bytes(len2) as usize;
    let mut dims = Vec::with_capacity(n_dims);
    for _ in 0..n_dims {
        let mut b = [0u8; 4];
        r.read_exact(&mut b)?;
        dims.push(u32::from_le_bytes(b) as usize);
    }
    let mut cnt = [0u8; 8];
    r.read_exact(&mut cnt)?;
    let n_params = u64::from_le_bytes(cnt) as usize;
    let mut params = Vec::with_capacity(n_params);
    for _ in 0..n_params {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        params.push(f64::from_le_bytes(b));
    }

    match (kind, dims.as_slice()) {
        (0, [n]) => {
            if params.len() != *n {
                return Err(Error::Input("tabular parameter count does not match header".into()));
            }
            Ok(AnyPolicy::Tabular(TabularPolicy::from_logits(params)))
        }
        (1, [vocab, len, hidden]) => {
            let expected = hidden * vocab * len + hidden + vocab * hidden + vocab;
            if params.len() != expected {
                return Err(Error::Input("sequence parameter count does not match header".into()));
            }
            Ok(AnyPolicy::Sequence(SequencePolicy::from_raw(*vocab, *len, *hidden, params)))
        }
        _ => Err(Error::Input(format!("unknown policy kind {kind} or malformed header"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn tabular_round_trip() {
        let p = TabularPolicy::from_logits(vec![0.1, -2.0, 0.7]);
        let mut buf = Vec::new();
        save_policy(&p, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"TFP1");
        assert_eq!(buf[4], 0);
        match load_policy(&buf[..]).unwrap() {
            AnyPolicy::Tabular(q) => assert_eq!(q.params(), p.params()),
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn sequence_round_trip() {
        let mut p = SequencePolicy::with_hidden(3, 4, 8);
        p.init_gaussian(0.2, &mut ChaCha12Rng::seed_from_u64(3));
        let mut buf = Vec::new();
        save_policy(&p, &mut buf).unwrap();
        match load_policy(&buf[..]).unwrap() {
            AnyPolicy::Sequence(q) => {
                assert_eq!(q.vocab(), 3);
                assert_eq!(q.seq_len(), 4);
                assert_eq!(q.hidden(), 8);
                assert_eq!(q.params(), p.params());
            }
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn bad_magic_rejected() {
        assert!(load_policy(&b"NOPE0000"[..]).is_err());
    }
}
