//! The `.nbits` bitstream container.
//!
//! Layout: `b"NBITS"`, version byte `0x01`, the digit count as a little-endian
//! `u64`, then `ceil(len / 8)` payload bytes packed most-significant-bit first
//! with zero pad bits. An optional JSON sidecar `<name>.nbits.json` records
//! where the digits came from.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{BitBuffer, SourceSpec};
use crate::{Error, Result};

pub const MAGIC: &[u8; 5] = b"NBITS";
pub const VERSION: u8 = 0x01;
pub const HEADER_LEN: usize = 14;

pub fn write_bits<W: Write>(buffer: &BitBuffer, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&[VERSION])?;
    out.write_all(&(buffer.len() as u64).to_le_bytes())?;
    out.write_all(buffer.as_bytes())?;
    out.flush()?;
    Ok(())
}

pub fn read_bits<R: Read>(mut input: R) -> Result<BitBuffer> {
    let mut header = [0u8; HEADER_LEN];
    let mut got = 0;
    while got < HEADER_LEN {
        let k = input.read(&mut header[got..])?;
        if k == 0 {
            break;
        }
        got += k;
    }
    if got < MAGIC.len() || &header[..5] != MAGIC {
        return Err(Error::BadMagic);
    }
    if got < HEADER_LEN {
        return Err(Error::TruncatedPayload {
            expected: HEADER_LEN as u64,
            found: got as u64,
        });
    }
    if header[5] != VERSION {
        return Err(Error::UnsupportedVersion(header[5]));
    }
    let len = u64::from_le_bytes(header[6..14].try_into().unwrap());
    let need = len.div_ceil(8);
    let mut payload = Vec::new();
    input.take(need).read_to_end(&mut payload)?;
    if (payload.len() as u64) < need {
        return Err(Error::TruncatedPayload {
            expected: need,
            found: payload.len() as u64,
        });
    }
    let len = usize::try_from(len)
        .map_err(|_| Error::InvalidSource(format!("digit count {len} does not fit in memory")))?;
    BitBuffer::from_packed(payload, len)
}

pub fn write_bits_file(buffer: &BitBuffer, path: impl AsRef<Path>) -> Result<()> {
    write_bits(buffer, BufWriter::new(File::create(path)?))
}

pub fn read_bits_file(path: impl AsRef<Path>) -> Result<BitBuffer> {
    read_bits(BufReader::new(File::open(path)?))
}

/// Metadata stored next to an `.nbits` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub kind: String,
    pub parameters: serde_json::Value,
    pub generator_version: String,
    pub created: String,
}

impl Sidecar {
    pub fn for_source(spec: &SourceSpec, created: impl Into<String>) -> Self {
        Self {
            kind: spec.kind_name().to_string(),
            parameters: spec.parameters(),
            generator_version: crate::GENERATOR_VERSION.to_string(),
            created: created.into(),
        }
    }
}

/// `foo.nbits` → `foo.nbits.json`.
pub fn sidecar_path(path: impl AsRef<Path>) -> PathBuf {
    let mut s = path.as_ref().as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_sidecar(sidecar: &Sidecar, bits_path: impl AsRef<Path>) -> Result<()> {
    let file = BufWriter::new(File::create(sidecar_path(bits_path))?);
    serde_json::to_writer_pretty(file, sidecar)?;
    Ok(())
}

pub fn read_sidecar(bits_path: impl AsRef<Path>) -> Result<Sidecar> {
    let file = BufReader::new(File::open(sidecar_path(bits_path))?);
    Ok(serde_json::from_reader(file)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn encode(b: &BitBuffer) -> Vec<u8> {
        let mut out = Vec::new();
        write_bits(b, &mut out).unwrap();
        out
    }

    #[test]
    fn header_layout() {
        let bytes = encode(&BitBuffer::from_bits(&[1, 0, 1, 1]));
        assert_eq!(&bytes[..6], b"NBITS\x01");
        assert_eq!(&bytes[6..14], &4u64.to_le_bytes());
        assert_eq!(&bytes[14..], &[0b1011_0000]);
    }

    #[test]
    fn empty_buffer_is_header_only() {
        let bytes = encode(&BitBuffer::new());
        assert_eq!(bytes.len(), HEADER_LEN);
        assert_eq!(read_bits(&bytes[..]).unwrap().len(), 0);
    }

    #[test]
    fn distinct_errors() {
        let mut bytes = encode(&BitBuffer::from_bits(&[1, 0, 1, 1, 1, 1, 1, 1, 1]));
        let mut wrong = bytes.clone();
        wrong[0] = b'X';
        assert!(matches!(read_bits(&wrong[..]), Err(Error::BadMagic)));

        let mut version = bytes.clone();
        version[5] = 2;
        assert!(matches!(
            read_bits(&version[..]),
            Err(Error::UnsupportedVersion(2))
        ));

        let short = &bytes[..bytes.len() - 1];
        assert!(matches!(
            read_bits(short),
            Err(Error::TruncatedPayload {
                expected: 2,
                found: 1
            })
        ));

        *bytes.last_mut().unwrap() |= 1;
        assert!(matches!(read_bits(&bytes[..]), Err(Error::NonzeroPadding)));

        assert!(matches!(read_bits(&b"NBI"[..]), Err(Error::BadMagic)));
    }

    #[test]
    fn sidecar_next_to_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.nbits");
        let spec = SourceSpec::Sqrt { m: 2 };
        write_sidecar(&Sidecar::for_source(&spec, "2026-01-01T00:00:00Z"), &path).unwrap();
        let back = read_sidecar(&path).unwrap();
        assert_eq!(back.kind, "sqrt");
        assert_eq!(back.parameters["m"], 2);
        assert!(dir.path().join("s.nbits.json").exists());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn round_trip(len in 0usize..100_000, seed in any::<u64>()) {
            let mut state = seed | 1;
            let buf: BitBuffer = (0..len)
                .map(|_| {
                    state ^= state << 13;
                    state ^= state >> 7;
                    state ^= state << 17;
                    state & 1 == 1
                })
                .collect();
            let back = read_bits(&encode(&buf)[..]).unwrap();
            prop_assert_eq!(back, buf);
        }
    }
}
