//! Deterministic vector kernels.
//!
//! Every reduction splits its input into fixed-size chunks, reduces each chunk
//! sequentially, and folds the partial results in chunk order. The result is
//! therefore bit-identical for any rayon pool size.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

/// Chunk length for parallel reductions and maps.
pub const CHUNK: usize = 1 << 12;

pub fn sum_by<T, F>(xs: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync,
{
    if xs.len() <= CHUNK {
        return xs.iter().map(&f).sum();
    }
    let partial: Vec<f64> = xs
        .par_chunks(CHUNK)
        .map(|c| c.iter().map(&f).sum::<f64>())
        .collect();
    partial.into_iter().sum()
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    sum_by(v, |z| z.norm_sqr())
}

/// Unrolled ⟨a|b⟩ over one chunk; four independent accumulator pairs.
#[inline]
fn dotc_serial(a: &[C64], b: &[C64]) -> C64 {
    let mut re = [0.0f64; 4];
    let mut im = [0.0f64; 4];
    let mut ac = a.chunks_exact(4);
    let mut bc = b.chunks_exact(4);
    for (x, y) in (&mut ac).zip(&mut bc) {
        for l in 0..4 {
            re[l] += x[l].re * y[l].re + x[l].im * y[l].im;
            im[l] += x[l].re * y[l].im - x[l].im * y[l].re;
        }
    }
    for (x, y) in ac.remainder().iter().zip(bc.remainder()) {
        re[0] += x.re * y.re + x.im * y.im;
        im[0] += x.re * y.im - x.im * y.re;
    }
    C64::new(
        (re[0] + re[1]) + (re[2] + re[3]),
        (im[0] + im[1]) + (im[2] + im[3]),
    )
}

/// ⟨a|b⟩ (conjugate-linear in `a`).
pub fn dotc(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    if a.len() <= CHUNK {
        return dotc_serial(a, b);
    }
    let partial: Vec<C64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| dotc_serial(x, y))
        .collect();
    partial
        .into_iter()
        .fold(C64::new(0.0, 0.0), |acc, z| acc + z)
}

/// ⟨v_i|w⟩ for every vector in `vs`, sharing one sweep over `w`.
pub fn dotc_many(vs: &[Vec<C64>], w: &[C64]) -> Vec<C64> {
    let k = vs.len();
    let n_chunks = w.len().div_ceil(CHUNK).max(1);
    let partial: Vec<Vec<C64>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(w.len());
            vs.iter()
                .map(|v| dotc_serial(&v[lo..hi], &w[lo..hi]))
                .collect()
        })
        .collect();
    let mut out = vec![C64::new(0.0, 0.0); k];
    for p in partial {
        for (o, z) in out.iter_mut().zip(p) {
            *o += z;
        }
    }
    out
}

/// w ← w + Σ_i coeffs[i]·vs[i]
pub fn add_combination(coeffs: &[C64], vs: &[Vec<C64>], w: &mut [C64]) {
    w.par_chunks_mut(CHUNK).enumerate().for_each(|(c, wc)| {
        let lo = c * CHUNK;
        let hi = lo + wc.len();
        for (a, v) in coeffs.iter().zip(vs) {
            let (ar, ai) = (a.re, a.im);
            for (wi, vi) in wc.iter_mut().zip(&v[lo..hi]) {
                wi.re += ar * vi.re - ai * vi.im;
                wi.im += ar * vi.im + ai * vi.re;
            }
        }
    });
}

/// y ← y + alpha·x
pub fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    y.par_chunks_mut(CHUNK)
        .zip(x.par_chunks(CHUNK))
        .for_each(|(yc, xc)| {
            for (yi, xi) in yc.iter_mut().zip(xc) {
                *yi += alpha * xi;
            }
        });
}

pub fn scale(alpha: C64, y: &mut [C64]) {
    y.par_chunks_mut(CHUNK).for_each(|c| {
        for yi in c {
            *yi *= alpha;
        }
    });
}

/// Fidelity |⟨a|b⟩|² for normalized vectors.
pub fn fidelity(a: &[C64], b: &[C64]) -> f64 {
    dotc(a, b).norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reductions_independent_of_pool_size() {
        let v: Vec<C64> = (0..50_000)
            .map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| (norm_sqr(&v), dotc(&v, &v)))
        };
        let (a, b) = run(1);
        let (c, d) = run(5);
        assert_eq!(a.to_bits(), c.to_bits());
        assert_eq!(b, d);
    }

    #[test]
    fn dotc_conjugates_left() {
        let a = [C64::new(0.0, 1.0)];
        let b = [C64::new(0.0, 1.0)];
        assert_eq!(dotc(&a, &b), C64::new(1.0, 0.0));
    }
}
