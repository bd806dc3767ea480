//! Configurations of `n` binary variables.
//!
//! A configuration `x = (x_0, ..., x_{n-1})` is packed into a `u64` index with
//! `x_0` as the most significant bit, so that the index is the position of
//! `|x_0 x_1 ... x_{n-1}>` in the usual computational-basis ordering.

use crate::error::{Error, Result};

/// Largest number of variables a packed configuration can hold.
pub const MAX_BITS: usize = 63;

#[inline]
pub fn bit(index: u64, n: usize, j: usize) -> bool {
    (index >> (n - 1 - j)) & 1 == 1
}

pub fn to_index(bits: &[bool]) -> u64 {
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
}

pub fn to_bits(index: u64, n: usize) -> Vec<bool> {
    (0..n).map(|j| bit(index, n, j)).collect()
}

/// Parses a string of `0`/`1` characters, `x_0` first.
pub fn parse(s: &str) -> Result<Vec<bool>> {
    s.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::Parse(format!("unexpected character {other:?} in bitstring"))),
        })
        .collect()
}

pub fn parse_index(s: &str, n: usize) -> Result<u64> {
    let bits = parse(s)?;
    if bits.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: bits.len(),
        });
    }
    Ok(to_index(&bits))
}

pub fn format(index: u64, n: usize) -> String {
    (0..n).map(|j| if bit(index, n, j) { '1' } else { '0' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn msb_first_round_trip() {
        let x = parse("01110").unwrap();
        assert_eq!(to_index(&x), 0b01110);
        assert_eq!(format(0b01110, 5), "01110");
        assert!(bit(0b01110, 5, 1));
        assert!(!bit(0b01110, 5, 0));
        assert_eq!(to_bits(0b01110, 5), x);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse("01a").is_err());
        assert!(matches!(
            parse_index("011", 4),
            Err(Error::LengthMismatch { expected: 4, got: 3 })
        ));
    }
}
