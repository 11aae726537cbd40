use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack on negative invariant mass² from rounding (GeV²).
pub const MASS_SQR_SLACK: f64 = 1e-9;

/// (E, px, py, pz) in GeV.
#[derive(Copy, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct FourMomentum {
    pub e: f64,
    pub px: f64,
    pub py: f64,
    pub pz: f64,
}

impl From<[f64; 4]> for FourMomentum {
    fn from([e, px, py, pz]: [f64; 4]) -> Self {
        Self { e, px, py, pz }
    }
}

impl From<FourMomentum> for [f64; 4] {
    fn from(p: FourMomentum) -> Self {
        [p.e, p.px, p.py, p.pz]
    }
}

impl Add for FourMomentum {
    type Output = FourMomentum;
    fn add(self, o: FourMomentum) -> FourMomentum {
        FourMomentum::new(self.e + o.e, self.px + o.px, self.py + o.py, self.pz + o.pz)
    }
}

impl FourMomentum {
    pub const fn new(e: f64, px: f64, py: f64, pz: f64) -> Self {
        Self { e, px, py, pz }
    }

    pub fn p(&self) -> [f64; 3] {
        [self.px, self.py, self.pz]
    }

    pub fn p_sqr(&self) -> f64 {
        self.px * self.px + self.py * self.py + self.pz * self.pz
    }

    pub fn mass_sqr(&self) -> f64 {
        self.e * self.e - self.p_sqr()
    }

    /// E ≥ 0, finite components and m² ≥ −slack.
    pub fn validate(&self) -> Result<()> {
        if ![self.e, self.px, self.py, self.pz]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::Kinematics("non-finite momentum component".into()));
        }
        if self.e < 0.0 {
            return Err(Error::Kinematics(format!("negative energy {}", self.e)));
        }
        if self.mass_sqr() < -MASS_SQR_SLACK {
            return Err(Error::Kinematics(format!(
                "E = {} is below |p| = {}",
                self.e,
                self.p_sqr().sqrt()
            )));
        }
        Ok(())
    }

    /// Boost by velocity `beta` (|β| < 1): the result is this vector as seen
    /// by an observer moving with `beta`.
    pub fn boost(&self, beta: [f64; 3]) -> FourMomentum {
        let b2 = beta[0] * beta[0] + beta[1] * beta[1] + beta[2] * beta[2];
        if b2 == 0.0 {
            return *self;
        }
        let gamma = 1.0 / (1.0 - b2).sqrt();
        let bp = beta[0] * self.px + beta[1] * self.py + beta[2] * self.pz;
        // (γ − 1)/β² written without the cancellation.
        let k = gamma * gamma / (gamma + 1.0) * bp - gamma * self.e;
        FourMomentum::new(
            gamma * (self.e - bp),
            self.px + k * beta[0],
            self.py + k * beta[1],
            self.pz + k * beta[2],
        )
    }
}

/// sqrt((E1+E2)² − |p1+p2|²).
pub fn invariant_mass(p1: &FourMomentum, p2: &FourMomentum) -> Result<f64> {
    p1.validate()?;
    p2.validate()?;
    let m2 = (*p1 + *p2).mass_sqr();
    if m2 < -MASS_SQR_SLACK {
        return Err(Error::Kinematics(format!("pair mass² = {m2} is negative")));
    }
    Ok(m2.max(0.0).sqrt())
}

/// Boosts both momenta into the frame where their total three-momentum
/// vanishes.
pub fn boost_to_rest_frame(
    p1: &FourMomentum,
    p2: &FourMomentum,
) -> Result<(FourMomentum, FourMomentum)> {
    let m = invariant_mass(p1, p2)?;
    let total = *p1 + *p2;
    if !(m > 0.0) || !(total.e > 0.0) {
        return Err(Error::Kinematics("pair momentum is lightlike".into()));
    }
    let beta = total.p().map(|c| c / total.e);
    Ok((p1.boost(beta), p2.boost(beta)))
}
