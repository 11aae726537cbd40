//! Short-iterate Lanczos propagator for e^{−iHt}ψ.
//!
//! Each step builds an orthonormal Krylov basis V of span{ψ, Hψ, …, H^{m−1}ψ}
//! (see [`Reorthogonalize`]), diagonalises the tridiagonal projection
//! T = V†HV, and picks the largest step dt whose a-posteriori error estimate
//! β_m·|[e^{−iT·dt}]_{m,1}| stays below the tolerance. Because the new state
//! lies in span(V) and V†HV = T, ⟨H⟩ is conserved to rounding.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::Hamiltonian;
use crate::numeric;

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrylovConfig {
    /// Maximum Krylov subspace dimension per step.
    pub max_dim: usize,
    /// Per-step error bound on the propagated vector.
    pub tolerance: f64,
    /// Smallest acceptable step before giving up (μs).
    pub min_step: f64,
    #[serde(default)]
    pub reorthogonalize: Reorthogonalize,
}

/// Orthogonalisation of each new Lanczos vector.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reorthogonalize {
    /// Against every previous basis vector.
    Full,
    /// Against the previous two only; two to three times faster at large
    /// dimension and indistinguishable at the default subspace size.
    #[default]
    Local,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        Self {
            max_dim: 30,
            tolerance: 1e-8,
            min_step: 1e-12,
            reorthogonalize: Reorthogonalize::Local,
        }
    }
}

impl KrylovConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_dim < 2 {
            return Err(Error::invalid("max_krylov_dim", "must be at least 2"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("tolerance", "must be > 0"));
        }
        if !(self.min_step > 0.0) {
            return Err(Error::invalid("min_step", "must be > 0"));
        }
        Ok(())
    }
}

/// Counters accumulated over an evolution.
#[derive(Copy, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvolutionStats {
    pub steps: usize,
    pub matvecs: usize,
    /// Largest per-step error estimate that was accepted.
    pub max_step_error: f64,
}

pub struct KrylovPropagator<'h> {
    h: &'h Hamiltonian,
    cfg: KrylovConfig,
    basis: Vec<Vec<C64>>,
    work: Vec<C64>,
    last_dt: f64,
    pub stats: EvolutionStats,
}

/// Lanczos data for one step: T's eigenpairs, the residual norm β_m and the
/// number of basis vectors actually used.
struct Projection {
    eig: SymmetricEigen<f64, nalgebra::Dyn>,
    residual: f64,
    dim: usize,
    exact: bool,
}

impl Projection {
    /// Coefficients of e^{−iT·dt}·e₁ in the Krylov basis.
    fn coefficients(&self, dt: f64) -> Vec<C64> {
        let u = &self.eig.eigenvectors;
        let phases: Vec<C64> = self
            .eig
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(l, &lam)| C64::from_polar(u[(0, l)], -lam * dt))
            .collect();
        (0..self.dim)
            .map(|k| phases.iter().enumerate().map(|(l, p)| p * u[(k, l)]).sum())
            .collect()
    }

    fn error(&self, dt: f64) -> f64 {
        if self.exact {
            return 0.0;
        }
        let u = &self.eig.eigenvectors;
        let last = self.dim - 1;
        let c: C64 = self
            .eig
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(l, &lam)| C64::from_polar(u[(0, l)] * u[(last, l)], -lam * dt))
            .sum();
        self.residual * c.norm()
    }
}

impl<'h> KrylovPropagator<'h> {
    pub fn new(h: &'h Hamiltonian, cfg: KrylovConfig) -> Result<Self> {
        cfg.validate()?;
        let dim = h.dim();
        let max_dim = cfg.max_dim.min(dim.max(1));
        Ok(Self {
            h,
            cfg: KrylovConfig { max_dim, ..cfg },
            basis: Vec::with_capacity(max_dim),
            work: vec![C64::new(0.0, 0.0); dim],
            last_dt: f64::INFINITY,
            stats: EvolutionStats::default(),
        })
    }

    /// Evolves `psi` in place by `t` (which may be negative).
    pub fn evolve(&mut self, psi: &mut [C64], t: f64) -> Result<()> {
        if psi.len() != self.h.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.h.dim(),
                got: psi.len(),
            });
        }
        let dir = t.signum();
        let mut remaining = t.abs();
        while remaining > 0.0 {
            let taken = self.step(psi, dir, remaining)?;
            // Snap to the target when the leftover is rounding noise.
            remaining = if remaining - taken <= 1e-14 * t.abs() {
                0.0
            } else {
                remaining - taken
            };
        }
        Ok(())
    }

    /// Takes one step of size ≤ `max_dt` in direction `dir`; returns its size.
    fn step(&mut self, psi: &mut [C64], dir: f64, max_dt: f64) -> Result<f64> {
        let norm = numeric::norm_sqr(psi).sqrt();
        if norm == 0.0 {
            return Ok(max_dt);
        }
        let proj = self.lanczos(psi, norm);

        let tol = self.cfg.tolerance;
        let mut dt = max_dt.min(self.last_dt * 2.0);
        let mut err = proj.error(dt);
        if err > tol {
            // Shrink until accepted, then bisect upward for a larger step.
            let mut hi = dt;
            while err > tol {
                hi = dt;
                dt *= 0.5;
                if dt < self.cfg.min_step {
                    return Err(Error::Accuracy {
                        residual: err,
                        tolerance: tol,
                    });
                }
                err = proj.error(dt);
            }
            let mut lo = dt;
            for _ in 0..6 {
                let mid = 0.5 * (lo + hi);
                let e = proj.error(mid);
                if e <= tol {
                    lo = mid;
                    err = e;
                } else {
                    hi = mid;
                }
            }
            dt = lo;
        }

        let coeffs: Vec<C64> = proj
            .coefficients(dir * dt)
            .into_iter()
            .map(|c| c * norm)
            .collect();
        psi.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        numeric::add_combination(&coeffs, &self.basis[..coeffs.len()], psi);
        self.last_dt = if proj.exact { f64::INFINITY } else { dt };
        self.stats.steps += 1;
        self.stats.max_step_error = self.stats.max_step_error.max(err);
        Ok(dt)
    }

    fn lanczos(&mut self, psi: &[C64], norm: f64) -> Projection {
        let m_max = self.cfg.max_dim;
        self.basis.clear();
        let mut v0 = psi.to_vec();
        numeric::scale(C64::new(1.0 / norm, 0.0), &mut v0);
        self.basis.push(v0);

        let mut alpha = Vec::with_capacity(m_max);
        let mut beta: Vec<f64> = Vec::with_capacity(m_max);
        let mut residual = 0.0;
        let mut exact = false;
        loop {
            let j = self.basis.len() - 1;
            self.h.apply_into(&self.basis[j], &mut self.work);
            self.stats.matvecs += 1;
            let a = numeric::dotc(&self.basis[j], &self.work).re;
            alpha.push(a);
            // Three-term recurrence, then one classical Gram–Schmidt pass
            // against the whole basis (or only the last two vectors).
            numeric::axpy(C64::new(-a, 0.0), &self.basis[j], &mut self.work);
            if j > 0 {
                numeric::axpy(
                    C64::new(-beta[j - 1], 0.0),
                    &self.basis[j - 1],
                    &mut self.work,
                );
            }
            let from = match self.cfg.reorthogonalize {
                Reorthogonalize::Full => 0,
                Reorthogonalize::Local => j.saturating_sub(1),
            };
            let overlaps: Vec<C64> = numeric::dotc_many(&self.basis[from..], &self.work)
                .into_iter()
                .map(|c| -c)
                .collect();
            numeric::add_combination(&overlaps, &self.basis[from..], &mut self.work);
            let b = numeric::norm_sqr(&self.work).sqrt();
            let scale = a.abs() + beta.last().copied().unwrap_or(0.0);
            if b <= 1e-13 * scale.max(1e-300) {
                exact = true;
                break;
            }
            if self.basis.len() == m_max {
                residual = b;
                break;
            }
            beta.push(b);
            let mut next = self.work.clone();
            numeric::scale(C64::new(1.0 / b, 0.0), &mut next);
            self.basis.push(next);
        }

        let dim = alpha.len();
        let mut t = DMatrix::<f64>::zeros(dim, dim);
        for i in 0..dim {
            t[(i, i)] = alpha[i];
            if i + 1 < dim {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        Projection {
            eig: t.symmetric_eigen(),
            residual,
            dim,
            exact,
        }
    }
}
