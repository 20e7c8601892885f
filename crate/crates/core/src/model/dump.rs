//! Binary observation dumps.
//!
//! Layout (little-endian): magic `OBFZ1` (5 bytes), version `u32`, `N` `u32`,
//! `Np` `u32`, record count `u64`, then all entries of all records as one
//! continuous LSB-first bit stream (bit set ⇔ +1), zero-padded to a byte.

use std::io::{Read, Write};

use super::observation::Observation;
use crate::error::{Error, Result};

pub const DUMP_MAGIC: &[u8; 5] = b"OBFZ1";
pub const DUMP_VERSION: u32 = 1;

pub fn write_observations<W: Write>(mut out: W, n: usize, np: usize, obs: &[Observation]) -> Result<()> {
    let len = n * np;
    if let Some(bad) = obs.iter().find(|o| o.len() != len) {
        return Err(Error::Dimension(format!(
            "observation of length {} in a dump of N·Np = {len}",
            bad.len()
        )));
    }
    out.write_all(DUMP_MAGIC)?;
    out.write_all(&DUMP_VERSION.to_le_bytes())?;
    out.write_all(&(n as u32).to_le_bytes())?;
    out.write_all(&(np as u32).to_le_bytes())?;
    out.write_all(&(obs.len() as u64).to_le_bytes())?;
    let total = len * obs.len();
    let mut bytes = vec![0u8; total.div_ceil(8)];
    for (i, z) in obs.iter().flat_map(|o| o.z().iter()).enumerate() {
        if *z > 0 {
            bytes[i / 8] |= 1 << (i % 8);
        }
    }
    out.write_all(&bytes)?;
    Ok(())
}

/// Returns (N, Np, observations).
pub fn read_observations<R: Read>(mut input: R) -> Result<(usize, usize, Vec<Observation>)> {
    let bad = |msg: &str| Error::Format {
        what: "observation dump",
        msg: msg.to_string(),
    };
    let mut magic = [0u8; 5];
    input.read_exact(&mut magic).map_err(|_| bad("truncated header"))?;
    if &magic != DUMP_MAGIC {
        return Err(bad("bad magic"));
    }
    let mut word = [0u8; 4];
    let mut read_u32 = |input: &mut R| -> Result<u32> {
        input.read_exact(&mut word).map_err(|_| bad("truncated header"))?;
        Ok(u32::from_le_bytes(word))
    };
    let version = read_u32(&mut input)?;
    if version != DUMP_VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let n = read_u32(&mut input)? as usize;
    let np = read_u32(&mut input)? as usize;
    let mut count = [0u8; 8];
    input.read_exact(&mut count).map_err(|_| bad("truncated header"))?;
    let count = u64::from_le_bytes(count) as usize;
    let len = n * np;
    let mut bytes = vec![0u8; (len * count).div_ceil(8)];
    input.read_exact(&mut bytes).map_err(|_| bad("truncated payload"))?;
    let obs = (0..count)
        .map(|r| {
            Observation::new(
                (0..len)
                    .map(|j| {
                        let i = r * len + j;
                        if bytes[i / 8] >> (i % 8) & 1 == 1 {
                            1
                        } else {
                            -1
                        }
                    })
                    .collect(),
            )
        })
        .collect();
    Ok((n, np, obs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let o = Observation::new(vec![1, -1, -1, 1, 1, 1]);
        let mut buf = Vec::new();
        write_observations(&mut buf, 3, 2, &[o]).unwrap();
        assert_eq!(&buf[..5], b"OBFZ1");
        assert_eq!(&buf[5..9], &1u32.to_le_bytes());
        assert_eq!(&buf[9..13], &3u32.to_le_bytes());
        assert_eq!(&buf[13..17], &2u32.to_le_bytes());
        assert_eq!(&buf[17..25], &1u64.to_le_bytes());
        // LSB first: +1 -1 -1 +1 +1 +1 -> 0b0011_1001
        assert_eq!(&buf[25..], &[0b0011_1001]);
    }

    #[test]
    fn rejects_bad_magic_and_length() {
        assert!(read_observations(&b"OBFZ2\x01\x00\x00\x00"[..]).is_err());
        let o = Observation::new(vec![1, -1]);
        assert!(write_observations(Vec::new(), 3, 1, &[o]).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip(n in 1usize..20, np in 1usize..4, seed in any::<u64>(), count in 0usize..5) {
            let mut s = seed;
            let obs: Vec<Observation> = (0..count).map(|_| {
                Observation::new((0..n * np).map(|_| {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    if s >> 63 == 1 { 1 } else { -1 }
                }).collect())
            }).collect();
            let mut buf = Vec::new();
            write_observations(&mut buf, n, np, &obs).unwrap();
            let (n2, np2, back) = read_observations(&buf[..]).unwrap();
            prop_assert_eq!((n2, np2), (n, np));
            prop_assert_eq!(back, obs);
        }
    }
}
