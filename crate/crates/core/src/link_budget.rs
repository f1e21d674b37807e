//! Large-scale effects and end-to-end composition: free-space path gain,
//! lognormal shadowing, and the assembly of the total channel from the
//! three sub-channel matrices, the reflection phases, and the transmit
//! steering weights.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::cmat::CMatrix;
use crate::error::{Error, Result};
use crate::irs_control::{PhaseMatrix, SteeringVector};
use crate::SPEED_OF_LIGHT;

/// Large-scale gains entering the total-channel composition: one lognormal
/// shadow-fading sample per sub-channel plus the two path gains, all
/// linear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LargeScaleParams {
    pub sf_bi: f64,
    pub sf_iu: f64,
    pub sf_bu: f64,
    /// Direct-path gain, linear.
    pub pl_bu: f64,
    /// Cascaded reflected-path gain, linear.
    pub pl_biu: f64,
    /// Shadowing standard deviation the samples were drawn with, dB.
    pub sigma_db: f64,
}

impl LargeScaleParams {
    /// Unit gains everywhere (no shadowing, no path loss).
    pub fn unit() -> Self {
        LargeScaleParams { sf_bi: 1.0, sf_iu: 1.0, sf_bu: 1.0, pl_bu: 1.0, pl_biu: 1.0, sigma_db: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sf_bi > 0.0 && self.sf_iu > 0.0 && self.sf_bu > 0.0) {
            return Err(Error::arg("shadow-fading samples must be > 0"));
        }
        if !(self.pl_bu >= 0.0 && self.pl_biu >= 0.0) {
            return Err(Error::arg("path gains must be >= 0"));
        }
        Ok(())
    }
}

/// The composed channel seen at the user: one complex gain per UE antenna.
#[derive(Debug, Clone, PartialEq)]
pub struct TotalChannel {
    pub gains: Vec<Complex64>,
}

impl TotalChannel {
    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }
}

/// Free-space path gain `(λ / 4πd)²`.
pub fn free_space_pl(distance: f64, carrier_hz: f64) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::arg(format!("distance must be > 0, got {distance}")));
    }
    if !(carrier_hz > 0.0) {
        return Err(Error::arg(format!("carrier frequency must be > 0, got {carrier_hz}")));
    }
    let lambda = SPEED_OF_LIGHT / carrier_hz;
    let ratio = lambda / (4.0 * std::f64::consts::PI * distance);
    Ok(ratio * ratio)
}

/// One lognormal shadow-fading sample: `10^(g/10)` with
/// `g ~ Normal(0, σ²)` in dB.  The median is exactly 1.
pub fn sample_shadowing(sigma_db: f64, rng: &mut impl Rng) -> Result<f64> {
    if !(sigma_db >= 0.0) {
        return Err(Error::arg(format!("shadowing std must be >= 0, got {sigma_db}")));
    }
    let g: f64 = sigma_db * rng.sample::<f64, _>(StandardNormal);
    Ok(10f64.powf(g / 10.0))
}

/// Compose the total channel:
/// `(√(SF_BI·SF_IU·PL_BIU) · h_IU·Φ·h_BI + √(SF_BU·PL_BU) · h_BU) · f`.
///
/// Dimensions: `h_IU` is M_U×M_xy, `Φ` M_xy×M_xy, `h_BI` M_xy×M_B, `h_BU`
/// M_U×M_B, and `f` has M_B entries; the result has one gain per UE
/// antenna.
pub fn compose_total(
    h_bi: &CMatrix,
    h_iu: &CMatrix,
    h_bu: &CMatrix,
    phases: &PhaseMatrix,
    steering: &SteeringVector,
    large_scale: &LargeScaleParams,
) -> Result<TotalChannel> {
    large_scale.validate()?;
    let m_xy = phases.len();
    if h_bi.rows() != m_xy {
        return Err(Error::arg(format!(
            "first-hop matrix has {} rows but the surface has {} elements",
            h_bi.rows(),
            m_xy
        )));
    }
    if h_iu.cols() != m_xy {
        return Err(Error::arg(format!(
            "second-hop matrix has {} columns but the surface has {} elements",
            h_iu.cols(),
            m_xy
        )));
    }
    if h_iu.rows() != h_bu.rows() {
        return Err(Error::arg(format!(
            "user-side dimensions disagree: {} vs {}",
            h_iu.rows(),
            h_bu.rows()
        )));
    }
    if h_bi.cols() != h_bu.cols() || h_bi.cols() != steering.len() {
        return Err(Error::arg(format!(
            "transmit-side dimensions disagree: {} / {} / steering {}",
            h_bi.cols(),
            h_bu.cols(),
            steering.len()
        )));
    }

    let cascade_gain = (large_scale.sf_bi * large_scale.sf_iu * large_scale.pl_biu).sqrt();
    let direct_gain = (large_scale.sf_bu * large_scale.pl_bu).sqrt();

    let phi = CMatrix::diag(&phases.diagonal());
    let cascade = h_iu.mul(&phi)?.mul(h_bi)?;
    let combined = cascade
        .scale(Complex64::new(cascade_gain, 0.0))
        .add(&h_bu.scale(Complex64::new(direct_gain, 0.0)))?;
    let gains = combined.mul_vec(&steering.coefficients)?;
    Ok(TotalChannel { gains })
}
