use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::StateVector;

/// One projective measurement of every atom.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shot {
    /// Bit `b` set iff atom `b` was found in |r⟩.
    pub mask: u64,
    pub seed: u64,
    pub index: u64,
}

/// RNG for shot `index`: ChaCha8 keyed by `seed`, stream `index`.
pub fn shot_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws `n_shots` i.i.d. Born-rule samples from |ψ|².
///
/// Shot `k` uses its own stream, so the output is independent of thread count.
pub fn sample_shots(psi: &StateVector, n_shots: usize, seed: u64) -> Result<Vec<Shot>> {
    psi.check_normalized()?;
    if n_shots == 0 {
        return Err(Error::invalid("n_shots", "must be at least 1"));
    }
    let mut cdf = psi.probabilities();
    let mut acc = 0.0;
    for p in cdf.iter_mut() {
        acc += *p;
        *p = acc;
    }
    let total = acc;
    let basis = psi.basis();
    let last_nonzero = psi
        .amplitudes()
        .iter()
        .rposition(|z| z.norm_sqr() > 0.0)
        .unwrap_or(0);
    Ok((0..n_shots as u64)
        .into_par_iter()
        .map(|index| {
            let u: f64 = shot_rng(seed, index).gen::<f64>() * total;
            let i = cdf.partition_point(|&c| c <= u).min(last_nonzero);
            Shot {
                mask: basis.mask(i),
                seed,
                index,
            }
        })
        .collect())
}
