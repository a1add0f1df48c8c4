//! Bit-string helpers shared by every module.
//!
//! A bit-string over `n` variables is stored as a `u64` index with variable 0
//! in the least significant bit. Text renders variable 0 first, so the string
//! `"01"` has `z_0 = 0` and `z_1 = 1` and index 2.

use crate::error::{Error, Result};

/// Value of variable `i` in `z`.
#[inline]
pub fn bit(z: u64, i: usize) -> u64 {
    (z >> i) & 1
}

/// Parses a bit-string written in variable order.
pub fn parse(s: &str) -> Result<u64> {
    if s.len() > 64 {
        return Err(Error::InvalidParameter {
            field: "bit-string",
            reason: format!("{} characters exceeds 64", s.len()),
        });
    }
    s.chars().enumerate().try_fold(0u64, |acc, (i, c)| match c {
        '0' => Ok(acc),
        '1' => Ok(acc | (1 << i)),
        other => {
            Err(Error::InvalidParameter { field: "bit-string", reason: format!("unexpected character {other:?}") })
        }
    })
}

/// Renders `z` as `n` characters in variable order.
pub fn format(z: u64, n: usize) -> String {
    (0..n).map(|i| if bit(z, i) == 1 { '1' } else { '0' }).collect()
}

/// Total variation distance between two probability vectors.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions over different supports");
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Empirical distribution of `samples` over `0..dim`.
pub fn empirical(samples: &[u64], dim: usize) -> Vec<f64> {
    let mut counts = vec![0u64; dim];
    for &s in samples {
        counts[s as usize] += 1;
    }
    let total = samples.len().max(1) as f64;
    counts.into_iter().map(|c| c as f64 / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_use_variable_order() {
        assert_eq!(parse("01").unwrap(), 2);
        assert_eq!(parse("100").unwrap(), 1);
        assert_eq!(format(2, 2), "01");
        assert_eq!(format(6, 4), "0110");
        assert!(parse("0x1").is_err());
    }

    #[test]
    fn tv_of_disjoint_points_is_one() {
        assert_eq!(tv_distance(&[1.0, 0.0], &[0.0, 1.0]), 1.0);
        assert_eq!(tv_distance(&[0.5, 0.5], &[0.5, 0.5]), 0.0);
    }
}
