//! Low-discrepancy initial designs.

use rand::Rng;

use crate::error::{Error, Result};
use crate::kernels::Point;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % b) as f64 * scale;
        index /= b;
        scale *= inv;
    }
    out
}

/// Halton point `index` (starting at 1) in the unit cube.
pub fn halton(index: u64, dim: usize) -> Result<Point> {
    if dim == 0 || dim > PRIMES.len() {
        return Err(Error::invalid(
            "dim",
            format!("halton supports 1..={}", PRIMES.len()),
        ));
    }
    Ok(PRIMES[..dim]
        .iter()
        .map(|&p| radical_inverse(index, p))
        .collect())
}

/// `n` Halton points with a random Cranley-Patterson shift, mapped onto `bounds`.
pub fn shifted_halton<R: Rng + ?Sized>(
    n: usize,
    bounds: &[(f64, f64)],
    rng: &mut R,
) -> Result<Vec<Point>> {
    let shift: Vec<f64> = bounds.iter().map(|_| rng.random::<f64>()).collect();
    (1..=n as u64)
        .map(|i| {
            let u = halton(i, bounds.len())?;
            Ok(u.iter()
                .zip(&shift)
                .zip(bounds)
                .map(|((u, s), (lo, hi))| lo + (hi - lo) * (u + s).fract())
                .collect())
        })
        .collect()
}
