//! Monte Carlo samples of independent Gaussian currents.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::invalid;
use crate::Result;

/// Samples per RNG stream. Chunk `c` draws from stream `c` of the seed, so
/// the output does not depend on how chunks are scheduled.
pub const CHUNK: usize = 1 << 16;

/// `len` current samples `(Re I_x, Im I_x, Re I_y, Im I_y)` from chunk
/// `chunk`, real parts with deviation `sigma_r`, imaginary with `sigma_i`.
pub fn current_chunk(sigma_r: f64, sigma_i: f64, seed: u64, chunk: u64, len: usize) -> Vec<[f64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    (0..len)
        .map(|_| {
            let mut z = [0.0; 4];
            for v in &mut z {
                *v = rng.sample(StandardNormal);
            }
            [sigma_r * z[0], sigma_i * z[1], sigma_r * z[2], sigma_i * z[3]]
        })
        .collect()
}

fn check(sigma_r: f64, sigma_i: f64) -> Result<()> {
    if !(sigma_r >= 0.0 && sigma_i >= 0.0 && sigma_r + sigma_i > 0.0) {
        return Err(invalid("sigma", "deviations must be non-negative and not both zero"));
    }
    Ok(())
}

/// `n` independent Gaussian current samples.
pub fn gaussian_currents(sigma_r: f64, sigma_i: f64, n: usize, seed: u64) -> Result<Vec<[f64; 4]>> {
    check(sigma_r, sigma_i)?;
    let mut out = Vec::with_capacity(n);
    let mut chunk = 0u64;
    while out.len() < n {
        let len = CHUNK.min(n - out.len());
        out.extend(current_chunk(sigma_r, sigma_i, seed, chunk, len));
        chunk += 1;
    }
    Ok(out)
}

/// Heat `½(I_x'² + I_x''² + I_y'² + I_y''²)` of one current sample, unit `R`.
pub fn heat_of(c: &[f64; 4]) -> f64 {
    0.5 * c.iter().map(|v| v * v).sum::<f64>()
}

/// `n` heat-power samples of independent Gaussian currents.
pub fn mc_heat_oracle(sigma_r: f64, sigma_i: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    Ok(gaussian_currents(sigma_r, sigma_i, n, seed)?
        .iter()
        .map(heat_of)
        .collect())
}
