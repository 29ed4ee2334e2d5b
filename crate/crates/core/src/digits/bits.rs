use std::fmt;

use crate::{Error, Result};

/// A packed, growable sequence of binary digits.
///
/// Bits are stored most-significant-first within each byte, which is also the
/// `.nbits` payload layout. Pad bits past `len` in the final byte are always
/// zero.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitBuffer {
    bytes: Vec<u8>,
    len: usize,
}

impl BitBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            len: 0,
        }
    }

    /// Builds a buffer from 0/1 entries. Any nonzero entry counts as a one.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut buf = Self::with_capacity(bits.len());
        for &b in bits {
            buf.push(b != 0);
        }
        buf
    }

    /// Parses a string of `'0'` and `'1'` characters; other characters are
    /// rejected.
    pub fn from_str01(s: &str) -> Result<Self> {
        let mut buf = Self::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => buf.push(false),
                '1' => buf.push(true),
                other => {
                    return Err(Error::InvalidSource(format!(
                        "unexpected character {other:?} in bit string"
                    )))
                }
            }
        }
        Ok(buf)
    }

    /// Wraps packed bytes holding `len` bits. Fails on short input or on
    /// set pad bits.
    pub fn from_packed(mut bytes: Vec<u8>, len: usize) -> Result<Self> {
        let need = len.div_ceil(8);
        if bytes.len() < need {
            return Err(Error::TruncatedPayload {
                expected: need as u64,
                found: bytes.len() as u64,
            });
        }
        bytes.truncate(need);
        let pad = need * 8 - len;
        if pad > 0 && bytes[need - 1] & ((1u8 << pad) - 1) != 0 {
            return Err(Error::NonzeroPadding);
        }
        Ok(Self { bytes, len })
    }

    /// Takes `count` bits of a big-endian byte string starting `skip` bits
    /// into it.
    pub fn from_be_bytes(bytes: &[u8], skip: usize, count: usize) -> Self {
        assert!(skip + count <= bytes.len() * 8, "bit range out of bounds");
        let shift = skip % 8;
        let first = skip / 8;
        let out_len = count.div_ceil(8);
        let mut out = Vec::with_capacity(out_len);
        if shift == 0 {
            out.extend_from_slice(&bytes[first..first + out_len]);
        } else {
            for j in 0..out_len {
                let hi = bytes[first + j] << shift;
                let lo = bytes.get(first + j + 1).map_or(0, |b| b >> (8 - shift));
                out.push(hi | lo);
            }
        }
        let mut buf = Self {
            bytes: out,
            len: count,
        };
        buf.clear_padding();
        buf
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The packed payload, `ceil(len / 8)` bytes.
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        self.bytes[i / 8] >> (7 - i % 8) & 1 == 1
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        let off = self.len % 8;
        if off == 0 {
            self.bytes.push((bit as u8) << 7);
        } else if bit {
            *self.bytes.last_mut().unwrap() |= 1 << (7 - off);
        }
        self.len += 1;
    }

    /// Appends the low `width` bits of `value`, most significant first.
    pub fn push_word(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 64);
        let mut remaining = width;
        while remaining > 0 {
            let off = self.len % 8;
            if off == 0 {
                self.bytes.push(0);
            }
            let room = (8 - off) as u32;
            let take = room.min(remaining);
            let chunk = ((value >> (remaining - take)) & ((1u64 << take) - 1)) as u8;
            *self.bytes.last_mut().unwrap() |= chunk << (room - take);
            self.len += take as usize;
            remaining -= take;
        }
    }

    /// Appends bits `start..start + count` of `other`.
    pub fn extend_from_range(&mut self, other: &BitBuffer, start: usize, count: usize) {
        assert!(start + count <= other.len, "range out of bounds");
        if self.len.is_multiple_of(8) && start.is_multiple_of(8) {
            let tail = BitBuffer::from_be_bytes(&other.bytes, start, count);
            self.bytes.truncate(self.len / 8);
            self.bytes.extend_from_slice(&tail.bytes);
            self.len += count;
            return;
        }
        for i in start..start + count {
            self.push(other.get(i));
        }
    }

    pub fn extend_from(&mut self, other: &BitBuffer) {
        self.extend_from_range(other, 0, other.len);
    }

    /// The first `n` bits as a new buffer.
    pub fn prefix(&self, n: usize) -> BitBuffer {
        self.slice(0, n)
    }

    pub fn slice(&self, start: usize, count: usize) -> BitBuffer {
        assert!(start + count <= self.len, "range out of bounds");
        BitBuffer::from_be_bytes(&self.bytes, start, count)
    }

    pub fn truncate(&mut self, n: usize) {
        if n < self.len {
            self.len = n;
            self.bytes.truncate(n.div_ceil(8));
            self.clear_padding();
        }
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Entries as 0/1 bytes.
    pub fn to_bit_vec(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }

    pub fn to_string01(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }

    pub fn count_ones(&self) -> usize {
        popcount_bytes(&self.bytes)
    }

    /// Ones among bits `start..end`.
    pub fn count_ones_range(&self, start: usize, end: usize) -> usize {
        assert!(start <= end && end <= self.len, "range out of bounds");
        if start == end {
            return 0;
        }
        let (first, last) = (start / 8, (end - 1) / 8);
        let head_mask = 0xffu8 >> (start % 8);
        let tail_mask = 0xffu8 << (7 - (end - 1) % 8);
        if first == last {
            return (self.bytes[first] & head_mask & tail_mask).count_ones() as usize;
        }
        (self.bytes[first] & head_mask).count_ones() as usize
            + popcount_bytes(&self.bytes[first + 1..last])
            + (self.bytes[last] & tail_mask).count_ones() as usize
    }

    /// Bitwise complement over the buffer's length.
    pub fn complemented(&self) -> BitBuffer {
        let mut out = Self {
            bytes: self.bytes.iter().map(|b| !b).collect(),
            len: self.len,
        };
        out.clear_padding();
        out
    }

    fn clear_padding(&mut self) {
        let pad = self.bytes.len() * 8 - self.len;
        if pad > 0 {
            *self.bytes.last_mut().unwrap() &= 0xffu8 << pad;
        }
    }
}

fn popcount_bytes(bytes: &[u8]) -> usize {
    let mut chunks = bytes.chunks_exact(8);
    let mut total: usize = chunks
        .by_ref()
        .map(|c| u64::from_ne_bytes(c.try_into().unwrap()).count_ones() as usize)
        .sum();
    total += chunks
        .remainder()
        .iter()
        .map(|b| b.count_ones() as usize)
        .sum::<usize>();
    total
}

impl fmt::Debug for BitBuffer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const SHOW: usize = 64;
        if self.len <= SHOW {
            write!(f, "BitBuffer({})", self.to_string01())
        } else {
            write!(
                f,
                "BitBuffer({}… len={})",
                self.prefix(SHOW).to_string01(),
                self.len
            )
        }
    }
}

impl FromIterator<bool> for BitBuffer {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut buf = BitBuffer::new();
        for b in iter {
            buf.push(b);
        }
        buf
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_and_get() {
        let b = BitBuffer::from_bits(&[1, 0, 1, 1, 0, 0, 0, 0, 1]);
        assert_eq!(b.len(), 9);
        assert_eq!(b.as_bytes(), &[0b1011_0000, 0b1000_0000]);
        assert_eq!(b.to_string01(), "101100001");
        assert_eq!(b.count_ones(), 4);
    }

    #[test]
    fn push_word_matches_bitwise_push() {
        let mut a = BitBuffer::new();
        let mut b = BitBuffer::new();
        for v in 1u64..200 {
            let w = 64 - v.leading_zeros();
            a.push_word(v, w);
            for i in (0..w).rev() {
                b.push(v >> i & 1 == 1);
            }
        }
        assert_eq!(a, b);
    }

    #[test]
    fn range_popcount_matches_naive() {
        let b: BitBuffer = (0..300).map(|i| (i * 7 + i / 3) % 5 < 2).collect();
        for start in 0..40 {
            for end in (start..300).step_by(13) {
                let naive = (start..end).filter(|&i| b.get(i)).count();
                assert_eq!(b.count_ones_range(start, end), naive, "{start}..{end}");
            }
        }
    }

    #[test]
    fn slicing_clears_padding() {
        let b = BitBuffer::from_bits(&[1; 20]);
        let s = b.slice(3, 10);
        assert_eq!(s.as_bytes(), &[0xff, 0b1100_0000]);
        let mut t = b.clone();
        t.truncate(5);
        assert_eq!(t.as_bytes(), &[0b1111_1000]);
    }

    #[test]
    fn packed_rejects_padding_and_short_input() {
        assert!(matches!(
            BitBuffer::from_packed(vec![0b1000_0001], 4),
            Err(Error::NonzeroPadding)
        ));
        assert!(matches!(
            BitBuffer::from_packed(vec![0xff], 9),
            Err(Error::TruncatedPayload { .. })
        ));
    }

    #[test]
    fn complement_keeps_padding_zero() {
        let b = BitBuffer::from_bits(&[1, 0, 1]);
        let c = b.complemented();
        assert_eq!(c.to_string01(), "010");
        assert_eq!(c.as_bytes(), &[0b0100_0000]);
    }

    #[test]
    fn unaligned_extend() {
        let src = BitBuffer::from_str01("110100111010").unwrap();
        let mut dst = BitBuffer::from_str01("1").unwrap();
        dst.extend_from_range(&src, 2, 7);
        assert_eq!(dst.to_string01(), "10100111");
        let mut aligned = BitBuffer::new();
        aligned.extend_from_range(&src, 8, 4);
        assert_eq!(aligned.to_string01(), "1010");
    }
}
