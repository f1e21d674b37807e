//! Declarative scenario configuration.
//!
//! A [`Scenario`] is the single source of truth for a simulation run: the
//! carrier, the three terminals (base station, reflecting surface, user)
//! with their arrays and motion, the cluster-process parameters with
//! optional per-link overrides, channel composition switches, run
//! parameters (seed, ensemble, probe grids) and the path-loss sweep.
//! Scenarios load from TOML (a file, a string, or a named built-in
//! preset), validate with field-level messages before any computation
//! starts, and serialize back to a canonical resolved form whose SHA-256
//! digest identifies the configuration in output headers.
//!
//! The same struct also assembles the per-link simulation inputs: it
//! knows which endpoints each link connects, aims cluster placement fans
//! along the link axis, and maps the channel-level Rician settings onto
//! the individual links.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clusters::{initial_cluster_count, EvolutionMode, EvolutionParams};
use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, Trajectory, Vec3};
use crate::link::{ClusterGenParams, ClusterPlacement, Endpoint, Link, LinkGeometry};
use crate::seeds::LinkId;

/// Names of the built-in presets, in the order [`Scenario::preset`]
/// reports them.
pub const PRESET_NAMES: [&str; 4] = ["fig5", "fig6", "fig7", "fig8"];

const PRESET_SOURCES: [(&str, &str); 4] = [
    ("fig5", include_str!("../presets/fig5.toml")),
    ("fig6", include_str!("../presets/fig6.toml")),
    ("fig7", include_str!("../presets/fig7.toml")),
    ("fig8", include_str!("../presets/fig8.toml")),
];

/// Array layout selector for an endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArrayKind {
    Linear,
    Planar,
}

/// Antenna / element array description.
///
/// `kind = "linear"` uses `count`, `spacing`, `azimuth`, `elevation`;
/// `kind = "planar"` uses the `count_x/count_y`, `spacing_x/spacing_y`
/// and the two axis-angle pairs.  Spacings left unset resolve to half the
/// carrier wavelength; angles left unset resolve to the documented
/// defaults (linear axis along +x; planar axes +y and +z, i.e. a vertical
/// surface facing the x direction).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    pub kind: ArrayKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub azimuth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elevation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count_x: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count_y: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing_y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_azimuth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_elevation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_azimuth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_elevation: Option<f64>,
}

impl ArrayConfig {
    fn validate(&self, field: &str) -> Result<()> {
        let used = |name: &str, set: bool, wanted: bool| -> Result<()> {
            if set && !wanted {
                return Err(Error::scenario(format!(
                    "{field}.{name} does not apply to kind = {:?} arrays",
                    self.kind
                )));
            }
            Ok(())
        };
        let linear = self.kind == ArrayKind::Linear;
        used("count", self.count.is_some(), linear)?;
        used("spacing", self.spacing.is_some(), linear)?;
        used("azimuth", self.azimuth.is_some(), linear)?;
        used("elevation", self.elevation.is_some(), linear)?;
        used("count_x", self.count_x.is_some(), !linear)?;
        used("count_y", self.count_y.is_some(), !linear)?;
        used("spacing_x", self.spacing_x.is_some(), !linear)?;
        used("spacing_y", self.spacing_y.is_some(), !linear)?;
        used("x_azimuth", self.x_azimuth.is_some(), !linear)?;
        used("x_elevation", self.x_elevation.is_some(), !linear)?;
        used("y_azimuth", self.y_azimuth.is_some(), !linear)?;
        used("y_elevation", self.y_elevation.is_some(), !linear)?;

        let need_count = |name: &str, value: Option<usize>| -> Result<()> {
            match value {
                None => Err(Error::scenario(format!(
                    "{field}.{name} is required for kind = {:?} arrays",
                    self.kind
                ))),
                Some(0) => {
                    Err(Error::scenario(format!("{field}.{name} must be >= 1")))
                }
                Some(_) => Ok(()),
            }
        };
        let check_spacing = |name: &str, value: Option<f64>| -> Result<()> {
            if let Some(s) = value {
                if !(s > 0.0 && s.is_finite()) {
                    return Err(Error::scenario(format!(
                        "{field}.{name} must be a positive length in meters, got {s}"
                    )));
                }
            }
            Ok(())
        };
        let check_angle = |name: &str, value: Option<f64>| -> Result<()> {
            if let Some(a) = value {
                if !a.is_finite() {
                    return Err(Error::scenario(format!(
                        "{field}.{name} must be a finite angle in radians"
                    )));
                }
            }
            Ok(())
        };
        if linear {
            need_count("count", self.count)?;
            check_spacing("spacing", self.spacing)?;
            check_angle("azimuth", self.azimuth)?;
            check_angle("elevation", self.elevation)?;
        } else {
            need_count("count_x", self.count_x)?;
            need_count("count_y", self.count_y)?;
            check_spacing("spacing_x", self.spacing_x)?;
            check_spacing("spacing_y", self.spacing_y)?;
            check_angle("x_azimuth", self.x_azimuth)?;
            check_angle("x_elevation", self.x_elevation)?;
            check_angle("y_azimuth", self.y_azimuth)?;
            check_angle("y_elevation", self.y_elevation)?;
        }
        Ok(())
    }

    /// Fill every applicable unset field with its default: half-wavelength
    /// spacing and the documented default axis angles.
    fn resolved(&self, half_wavelength: f64) -> ArrayConfig {
        let mut out = self.clone();
        match self.kind {
            ArrayKind::Linear => {
                out.spacing = Some(self.spacing.unwrap_or(half_wavelength));
                out.azimuth = Some(self.azimuth.unwrap_or(0.0));
                out.elevation = Some(self.elevation.unwrap_or(0.0));
            }
            ArrayKind::Planar => {
                out.spacing_x = Some(self.spacing_x.unwrap_or(half_wavelength));
                out.spacing_y = Some(self.spacing_y.unwrap_or(half_wavelength));
                out.x_azimuth =
                    Some(self.x_azimuth.unwrap_or(std::f64::consts::FRAC_PI_2));
                out.x_elevation = Some(self.x_elevation.unwrap_or(0.0));
                out.y_azimuth = Some(self.y_azimuth.unwrap_or(0.0));
                out.y_elevation =
                    Some(self.y_elevation.unwrap_or(std::f64::consts::FRAC_PI_2));
            }
        }
        out
    }

    /// Total element count.
    pub fn len(&self) -> usize {
        match self.kind {
            ArrayKind::Linear => self.count.unwrap_or(0),
            ArrayKind::Planar => {
                self.count_x.unwrap_or(0) * self.count_y.unwrap_or(0)
            }
        }
    }

    /// Whether the array has no elements (only possible before validation).
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn to_geometry(&self, reference: Vec3, half_wavelength: f64) -> ArrayGeometry {
        let r = self.resolved(half_wavelength);
        match r.kind {
            ArrayKind::Linear => ArrayGeometry::Linear {
                count: r.count.unwrap_or(1),
                spacing: r.spacing.unwrap_or(half_wavelength),
                azimuth: r.azimuth.unwrap_or(0.0),
                elevation: r.elevation.unwrap_or(0.0),
                reference,
            },
            ArrayKind::Planar => ArrayGeometry::Planar {
                count_x: r.count_x.unwrap_or(1),
                count_y: r.count_y.unwrap_or(1),
                spacing_x: r.spacing_x.unwrap_or(half_wavelength),
                spacing_y: r.spacing_y.unwrap_or(half_wavelength),
                x_azimuth: r.x_azimuth.unwrap_or(0.0),
                x_elevation: r.x_elevation.unwrap_or(0.0),
                y_azimuth: r.y_azimuth.unwrap_or(0.0),
                y_elevation: r.y_elevation.unwrap_or(0.0),
                reference,
            },
        }
    }
}

/// One terminal: position, motion, and its element array.
///
/// `evolve = true` runs birth-death cluster evolution across this
/// terminal's element grid on every link it participates in (meant for
/// electrically large arrays); with `false` every element sees every
/// cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    /// Global position of the array reference element, meters.
    pub position: [f64; 3],
    /// Speed, m/s.
    #[serde(default)]
    pub speed: f64,
    /// Heading azimuth of the motion, radians.
    #[serde(default)]
    pub heading: f64,
    /// Whether cluster visibility evolves across the element grid.
    #[serde(default)]
    pub evolve: bool,
    pub array: ArrayConfig,
}

impl EndpointConfig {
    fn validate(&self, field: &str) -> Result<()> {
        if self.position.iter().any(|c| !c.is_finite()) {
            return Err(Error::scenario(format!(
                "{field}.position must be finite coordinates in meters"
            )));
        }
        if !(self.speed >= 0.0 && self.speed.is_finite()) {
            return Err(Error::scenario(format!(
                "{field}.speed must be >= 0 m/s, got {}",
                self.speed
            )));
        }
        if !self.heading.is_finite() {
            return Err(Error::scenario(format!(
                "{field}.heading must be a finite angle in radians"
            )));
        }
        self.array.validate(&format!("{field}.array"))
    }

    fn position_vec(&self) -> Vec3 {
        Vec3::new(self.position[0], self.position[1], self.position[2])
    }

    fn to_endpoint(&self, half_wavelength: f64) -> Endpoint {
        Endpoint {
            array: self.array.to_geometry(self.position_vec(), half_wavelength),
            trajectory: Trajectory::constant(self.speed, self.heading),
            evolve: self.evolve,
        }
    }
}

/// Optional per-link overrides of the cluster-process defaults.  Any
/// field left unset inherits the value from `[clusters]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub birth_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub death_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rays_per_cluster: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link_delay_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pdp_decay: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub azimuth_spread: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_speed: Option<f64>,
}

/// Cluster-process parameters shared by the three links, with per-link
/// override tables `bi`, `iu`, `bu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterConfig {
    /// Cluster generation rate of the birth-death process.
    pub birth_rate: f64,
    /// Cluster recombination rate of the birth-death process.
    pub death_rate: f64,
    /// Scenario correlation factor of the evolution, meters.
    pub correlation_factor: f64,
    /// Which reading of the survival exponent drives the evolution.
    pub evolution: EvolutionMode,
    /// Scatterers (rays) per cluster.
    pub rays_per_cluster: usize,
    /// Per-axis scatterer spread inside a cluster, meters.
    pub sigma: [f64; 3],
    /// Rate of the exponential virtual-link delay, 1/s.
    pub link_delay_rate: f64,
    /// Decay constant of the exponential power-delay profile, seconds.
    pub pdp_decay: f64,
    /// Cluster center distance fan around each terminal, meters.
    pub distance_min: f64,
    pub distance_max: f64,
    /// Half-width of the azimuth fan around the link axis, radians.
    pub azimuth_spread: f64,
    /// Speed of cluster centers, m/s.
    pub cluster_speed: f64,
    /// Overrides for the base-station-to-surface link.
    pub bi: ClusterOverride,
    /// Overrides for the surface-to-user link.
    pub iu: ClusterOverride,
    /// Overrides for the direct base-station-to-user link.
    pub bu: ClusterOverride,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            birth_rate: 80.0,
            death_rate: 4.0,
            correlation_factor: 50.0,
            evolution: EvolutionMode::Corrected,
            rays_per_cluster: 20,
            sigma: [2.0, 2.0, 2.0],
            link_delay_rate: 2.0e7,
            pdp_decay: 1.0e-7,
            distance_min: 10.0,
            distance_max: 50.0,
            azimuth_spread: std::f64::consts::PI,
            cluster_speed: 1.0,
            bi: ClusterOverride::default(),
            iu: ClusterOverride::default(),
            bu: ClusterOverride::default(),
        }
    }
}

/// Fully resolved cluster-process values for one link, after applying the
/// link's override table.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSettings {
    pub birth_rate: f64,
    pub death_rate: f64,
    pub correlation_factor: f64,
    pub evolution: EvolutionMode,
    pub rays_per_cluster: usize,
    pub sigma: [f64; 3],
    pub link_delay_rate: f64,
    pub pdp_decay: f64,
    pub distance_min: f64,
    pub distance_max: f64,
    pub azimuth_spread: f64,
    pub cluster_speed: f64,
}

impl ClusterConfig {
    fn override_for(&self, link: LinkId) -> &ClusterOverride {
        match link {
            LinkId::BsIrs => &self.bi,
            LinkId::IrsUe => &self.iu,
            LinkId::BsUe => &self.bu,
        }
    }

    /// The defaults merged with the link's override table.
    pub fn settings_for(&self, link: LinkId) -> ClusterSettings {
        let o = self.override_for(link);
        ClusterSettings {
            birth_rate: o.birth_rate.unwrap_or(self.birth_rate),
            death_rate: o.death_rate.unwrap_or(self.death_rate),
            correlation_factor: o
                .correlation_factor
                .unwrap_or(self.correlation_factor),
            evolution: self.evolution,
            rays_per_cluster: o.rays_per_cluster.unwrap_or(self.rays_per_cluster),
            sigma: o.sigma.unwrap_or(self.sigma),
            link_delay_rate: o.link_delay_rate.unwrap_or(self.link_delay_rate),
            pdp_decay: o.pdp_decay.unwrap_or(self.pdp_decay),
            distance_min: o.distance_min.unwrap_or(self.distance_min),
            distance_max: o.distance_max.unwrap_or(self.distance_max),
            azimuth_spread: o.azimuth_spread.unwrap_or(self.azimuth_spread),
            cluster_speed: o.cluster_speed.unwrap_or(self.cluster_speed),
        }
    }
}

impl ClusterSettings {
    fn validate(&self, field: &str) -> Result<()> {
        let pos = |name: &str, v: f64| -> Result<()> {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::scenario(format!(
                    "{field}.{name} must be > 0, got {v}"
                )));
            }
            Ok(())
        };
        pos("birth_rate", self.birth_rate)?;
        pos("death_rate", self.death_rate)?;
        pos("correlation_factor", self.correlation_factor)?;
        if self.rays_per_cluster < 1 {
            return Err(Error::scenario(format!(
                "{field}.rays_per_cluster must be >= 1"
            )));
        }
        for (axis, s) in ["x", "y", "z"].iter().zip(self.sigma) {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::scenario(format!(
                    "{field}.sigma ({axis} component) must be > 0 m, got {s}"
                )));
            }
        }
        pos("link_delay_rate", self.link_delay_rate)?;
        pos("pdp_decay", self.pdp_decay)?;
        pos("distance_min", self.distance_min)?;
        if !(self.distance_max >= self.distance_min && self.distance_max.is_finite())
        {
            return Err(Error::scenario(format!(
                "{field}.distance_max must be >= distance_min ({} m), got {}",
                self.distance_min, self.distance_max
            )));
        }
        if !(self.azimuth_spread >= 0.0 && self.azimuth_spread.is_finite()) {
            return Err(Error::scenario(format!(
                "{field}.azimuth_spread must be >= 0 rad, got {}",
                self.azimuth_spread
            )));
        }
        if !(self.cluster_speed >= 0.0 && self.cluster_speed.is_finite()) {
            return Err(Error::scenario(format!(
                "{field}.cluster_speed must be >= 0 m/s, got {}",
                self.cluster_speed
            )));
        }
        Ok(())
    }
}

/// Channel composition switches and large-scale parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    /// Rician factor of the surface-assisted (cascaded) channel.  It also
    /// sets the Rician factor of the two individual legs for full channel
    /// realizations; a deterministic leg component exists when it is > 0.
    pub rician_k: f64,
    /// Rician factor of the direct base-station-to-user link.
    pub rician_k_direct: f64,
    /// Log-normal shadowing standard deviation, dB (0 disables).
    pub shadowing_sigma_db: f64,
    /// Include the surface-assisted path in composed results.
    pub include_cascade: bool,
    /// Include the direct path in composed results.
    pub include_direct: bool,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            rician_k: 0.0,
            rician_k_direct: 0.0,
            shadowing_sigma_db: 0.0,
            include_cascade: true,
            include_direct: true,
        }
    }
}

impl ChannelConfig {
    fn validate(&self) -> Result<()> {
        if !(self.rician_k >= 0.0 && self.rician_k.is_finite()) {
            return Err(Error::scenario(format!(
                "channel.rician_k must be >= 0, got {}",
                self.rician_k
            )));
        }
        if !(self.rician_k_direct >= 0.0 && self.rician_k_direct.is_finite()) {
            return Err(Error::scenario(format!(
                "channel.rician_k_direct must be >= 0, got {}",
                self.rician_k_direct
            )));
        }
        if !(self.shadowing_sigma_db >= 0.0 && self.shadowing_sigma_db.is_finite())
        {
            return Err(Error::scenario(format!(
                "channel.shadowing_sigma_db must be >= 0 dB, got {}",
                self.shadowing_sigma_db
            )));
        }
        if !self.include_cascade && !self.include_direct {
            return Err(Error::scenario(
                "channel.include_cascade and channel.include_direct cannot both be false",
            ));
        }
        Ok(())
    }
}

/// Run parameters: randomness, ensemble size, and the probe grids of the
/// statistics experiments.  Element and cluster indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; every random stream derives from it.
    pub seed: u64,
    /// Ensemble size of the correlation estimators.
    pub ensemble: usize,
    /// Worker threads (0 = automatic).  Results never depend on it.
    pub workers: usize,
    /// Anchor times of the time-autocorrelation curves, seconds.
    pub acf_anchors_s: Vec<f64>,
    /// Number of time lags per autocorrelation curve (first lag is 0).
    pub acf_lag_count: usize,
    /// Spacing of the time-lag grid, seconds.
    pub acf_lag_step_s: f64,
    /// Element separations of the spatial correlation sweep, including
    /// the zero-separation start.
    pub ccf_steps: usize,
    /// Extra carriers for the spatial-correlation experiment; empty means
    /// the scenario carrier only.
    pub ccf_carriers_hz: Vec<f64>,
    /// Independent realizations of the delay-spread distribution.
    pub ds_realizations: usize,
    /// Measurement frequency probed by the correlation experiments, Hz
    /// (0 = coherent narrowband reference).
    pub measurement_hz: f64,
    /// Base-station probe element (1-based).
    pub bs_element: usize,
    /// Surface probe element (1-based).
    pub irs_element: usize,
    /// User probe element (1-based).
    pub ue_element: usize,
    /// Cluster the single-cluster statistics restrict to (1-based).
    pub cluster_index: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            ensemble: 1000,
            workers: 0,
            acf_anchors_s: vec![0.0],
            acf_lag_count: 51,
            acf_lag_step_s: 1.0e-4,
            ccf_steps: 2,
            ccf_carriers_hz: Vec::new(),
            ds_realizations: 1000,
            measurement_hz: 0.0,
            bs_element: 1,
            irs_element: 1,
            ue_element: 1,
            cluster_index: 1,
        }
    }
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        if self.ensemble == 0 {
            return Err(Error::scenario("run.ensemble must be >= 1"));
        }
        if self.acf_anchors_s.is_empty() {
            return Err(Error::scenario(
                "run.acf_anchors_s needs at least one anchor time",
            ));
        }
        for t in &self.acf_anchors_s {
            if !(t.is_finite() && *t >= 0.0) {
                return Err(Error::scenario(format!(
                    "run.acf_anchors_s entries must be >= 0 s, got {t}"
                )));
            }
        }
        if self.acf_lag_count < 1 {
            return Err(Error::scenario("run.acf_lag_count must be >= 1"));
        }
        if !(self.acf_lag_step_s > 0.0 && self.acf_lag_step_s.is_finite()) {
            return Err(Error::scenario(format!(
                "run.acf_lag_step_s must be > 0 s, got {}",
                self.acf_lag_step_s
            )));
        }
        if self.ccf_steps < 1 {
            return Err(Error::scenario("run.ccf_steps must be >= 1"));
        }
        for c in &self.ccf_carriers_hz {
            if !(c.is_finite() && *c > 0.0) {
                return Err(Error::scenario(format!(
                    "run.ccf_carriers_hz entries must be > 0 Hz, got {c}"
                )));
            }
        }
        if self.ds_realizations < 100 {
            return Err(Error::scenario(format!(
                "run.ds_realizations must be >= 100 for a usable distribution, got {}",
                self.ds_realizations
            )));
        }
        if !(self.measurement_hz >= 0.0 && self.measurement_hz.is_finite()) {
            return Err(Error::scenario(format!(
                "run.measurement_hz must be >= 0 Hz, got {}",
                self.measurement_hz
            )));
        }
        let index = |name: &str, v: usize| -> Result<()> {
            if v < 1 {
                return Err(Error::scenario(format!(
                    "run.{name} is 1-based and must be >= 1"
                )));
            }
            Ok(())
        };
        index("bs_element", self.bs_element)?;
        index("irs_element", self.irs_element)?;
        index("ue_element", self.ue_element)?;
        index("cluster_index", self.cluster_index)?;
        Ok(())
    }

    /// The time-lag grid implied by the count and step, starting at 0.
    pub fn acf_lags(&self) -> Vec<f64> {
        (0..self.acf_lag_count)
            .map(|i| i as f64 * self.acf_lag_step_s)
            .collect()
    }
}

/// Path-loss sweep of the surface-assisted line-of-sight budget.
///
/// Sweep surfaces are square, equal-distance idealizations: every element
/// sits at the base-station and user distances taken from the scenario
/// geometry, so the coherent element-count trend is isolated from edge
/// effects.  Element counts must be even (or exactly 1) per side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathlossConfig {
    /// Transmit power, watts.
    pub transmit_power_w: f64,
    /// Per-side element counts of the size sweep.
    pub sizes: Vec<usize>,
    /// Multipliers applied to both link distances in the distance sweep.
    pub distance_scales: Vec<f64>,
    /// Per-side element count used by the distance sweep.
    pub distance_sweep_size: usize,
    /// Element spacing of sweep surfaces, meters (default half-wavelength).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
}

impl Default for PathlossConfig {
    fn default() -> Self {
        PathlossConfig {
            transmit_power_w: 1.0,
            sizes: vec![1, 2, 4, 8, 16, 32],
            distance_scales: vec![0.5, 1.0, 2.0, 4.0],
            distance_sweep_size: 16,
            spacing: None,
        }
    }
}

impl PathlossConfig {
    fn validate(&self) -> Result<()> {
        if !(self.transmit_power_w > 0.0 && self.transmit_power_w.is_finite()) {
            return Err(Error::scenario(format!(
                "pathloss.transmit_power_w must be > 0 W, got {}",
                self.transmit_power_w
            )));
        }
        if self.sizes.is_empty() {
            return Err(Error::scenario("pathloss.sizes needs at least one entry"));
        }
        let even_or_one = |name: &str, m: usize| -> Result<()> {
            if m == 0 || (m != 1 && !m.is_multiple_of(2)) {
                return Err(Error::scenario(format!(
                    "pathloss.{name} entries must be even or exactly 1, got {m}"
                )));
            }
            Ok(())
        };
        for m in &self.sizes {
            even_or_one("sizes", *m)?;
        }
        even_or_one("distance_sweep_size", self.distance_sweep_size)?;
        if self.distance_scales.is_empty() {
            return Err(Error::scenario(
                "pathloss.distance_scales needs at least one entry",
            ));
        }
        for s in &self.distance_scales {
            if !(s.is_finite() && *s > 0.0) {
                return Err(Error::scenario(format!(
                    "pathloss.distance_scales entries must be > 0, got {s}"
                )));
            }
        }
        if let Some(s) = self.spacing {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::scenario(format!(
                    "pathloss.spacing must be a positive length in meters, got {s}"
                )));
            }
        }
        Ok(())
    }
}

/// A complete simulation scenario.
///
/// See the module docs for the block structure.  The struct serializes
/// back to TOML; [`Scenario::canonical_toml`] is the resolved form used
/// for configuration hashing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Free-form scenario name, echoed in output headers.
    #[serde(default = "default_label")]
    pub label: String,
    /// Carrier frequency, Hz.
    pub carrier_hz: f64,
    /// Base station.
    pub bs: EndpointConfig,
    /// Reflecting surface.
    pub irs: EndpointConfig,
    /// User terminal.
    pub ue: EndpointConfig,
    #[serde(default)]
    pub clusters: ClusterConfig,
    #[serde(default)]
    pub channel: ChannelConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub pathloss: PathlossConfig,
}

fn default_label() -> String {
    "scenario".to_string()
}

impl Scenario {
    /// Parse a scenario from TOML text.
    pub fn from_toml_str(text: &str) -> Result<Scenario> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Load and parse a scenario file.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Scenario> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Scenario::from_toml_str(&text)
    }

    /// A named built-in scenario.  Presets ship complete: every parameter
    /// they rely on is spelled out in the embedded TOML.
    pub fn preset(name: &str) -> Result<Scenario> {
        for (preset, text) in PRESET_SOURCES {
            if preset == name {
                return Scenario::from_toml_str(text);
            }
        }
        Err(Error::scenario(format!(
            "unknown preset {name:?}; known presets: {}",
            PRESET_NAMES.join(", ")
        )))
    }

    /// The raw TOML text of a named preset (for tooling that wants to
    /// show or copy it).
    pub fn preset_source(name: &str) -> Result<&'static str> {
        for (preset, text) in PRESET_SOURCES {
            if preset == name {
                return Ok(text);
            }
        }
        Err(Error::scenario(format!(
            "unknown preset {name:?}; known presets: {}",
            PRESET_NAMES.join(", ")
        )))
    }

    /// Carrier wavelength, meters.
    pub fn wavelength(&self) -> f64 {
        crate::SPEED_OF_LIGHT / self.carrier_hz
    }

    /// Check every field against its documented domain.  Runs before any
    /// computation; error messages name the offending field.
    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_hz > 0.0 && self.carrier_hz.is_finite()) {
            return Err(Error::scenario(format!(
                "carrier_hz must be > 0 Hz, got {}",
                self.carrier_hz
            )));
        }
        self.bs.validate("bs")?;
        self.irs.validate("irs")?;
        self.ue.validate("ue")?;

        let pairs = [
            ("bs", "irs", &self.bs, &self.irs),
            ("irs", "ue", &self.irs, &self.ue),
            ("bs", "ue", &self.bs, &self.ue),
        ];
        for (na, nz, a, z) in pairs {
            if a.position_vec().distance(z.position_vec()) <= 0.0 {
                return Err(Error::scenario(format!(
                    "{na}.position and {nz}.position must differ"
                )));
            }
        }

        for (link, field) in [
            (LinkId::BsIrs, "clusters.bi"),
            (LinkId::IrsUe, "clusters.iu"),
            (LinkId::BsUe, "clusters.bu"),
        ] {
            self.clusters.settings_for(link).validate(field)?;
        }
        self.channel.validate()?;
        self.run.validate()?;
        self.pathloss.validate()?;

        // Cross-block constraints: probe indices must land inside the
        // arrays and the initial cluster set.
        let bounds = [
            ("run.bs_element", self.run.bs_element, self.bs.array.len(), "bs"),
            ("run.irs_element", self.run.irs_element, self.irs.array.len(), "irs"),
            ("run.ue_element", self.run.ue_element, self.ue.array.len(), "ue"),
        ];
        for (name, index, len, array) in bounds {
            if index > len {
                return Err(Error::scenario(format!(
                    "{name} = {index} exceeds the {array} array size {len}"
                )));
            }
        }
        let sweep_end = (self.run.bs_element - 1) + self.run.ccf_steps;
        if sweep_end > self.bs.array.len() {
            return Err(Error::scenario(format!(
                "run.ccf_steps = {} from base element {} runs past the bs array size {} \
                 (last sweep element would be {})",
                self.run.ccf_steps,
                self.run.bs_element,
                self.bs.array.len(),
                sweep_end
            )));
        }
        for (link, field) in [
            (LinkId::BsIrs, "clusters.bi"),
            (LinkId::IrsUe, "clusters.iu"),
            (LinkId::BsUe, "clusters.bu"),
        ] {
            let s = self.clusters.settings_for(link);
            let initial = initial_cluster_count(&EvolutionParams {
                birth_rate: s.birth_rate,
                death_rate: s.death_rate,
                correlation_factor: s.correlation_factor,
                mode: s.evolution,
            })?;
            if self.run.cluster_index > initial {
                return Err(Error::scenario(format!(
                    "run.cluster_index = {} exceeds the {field} initial cluster \
                     count {initial}",
                    self.run.cluster_index
                )));
            }
        }
        Ok(())
    }

    /// A copy with every derived default made explicit (array spacings
    /// and angles, spatial-correlation carrier list), so the serialized
    /// form documents exactly what the run used.
    pub fn resolved(&self) -> Scenario {
        let hw = self.wavelength() / 2.0;
        let mut out = self.clone();
        out.bs.array = self.bs.array.resolved(hw);
        out.irs.array = self.irs.array.resolved(hw);
        out.ue.array = self.ue.array.resolved(hw);
        if out.run.ccf_carriers_hz.is_empty() {
            out.run.ccf_carriers_hz = vec![self.carrier_hz];
        }
        if out.pathloss.spacing.is_none() {
            out.pathloss.spacing = Some(hw);
        }
        out
    }

    /// Canonical resolved TOML: fixed key order, every effective value
    /// explicit.  Two configurations that resolve to the same physics
    /// serialize identically.
    pub fn canonical_toml(&self) -> Result<String> {
        toml::to_string_pretty(&self.resolved())
            .map_err(|e| Error::Parse(format!("config serialization failed: {e}")))
    }

    /// First 16 hex digits of the SHA-256 of the canonical TOML — the
    /// configuration identity stamped into every output header.
    pub fn config_hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.canonical_toml()?.as_bytes());
        let mut hex = String::with_capacity(16);
        for byte in &digest[..8] {
            let _ = write!(hex, "{byte:02x}");
        }
        Ok(hex)
    }

    /// A copy with every scatterer spread scaled by `factor` (defaults
    /// and per-link overrides alike).
    pub fn with_sigma_scaled(&self, factor: f64) -> Scenario {
        let mut out = self.clone();
        out.clusters.sigma = self.clusters.sigma.map(|s| s * factor);
        for o in [&mut out.clusters.bi, &mut out.clusters.iu, &mut out.clusters.bu]
        {
            if let Some(sigma) = &mut o.sigma {
                *sigma = sigma.map(|s| s * factor);
            }
        }
        out
    }

    /// A copy on a different carrier.  Unset array spacings stay relative
    /// (they resolve to the new half-wavelength); explicit spacings pin
    /// the physical aperture.
    pub fn with_carrier(&self, carrier_hz: f64) -> Scenario {
        let mut out = self.clone();
        out.carrier_hz = carrier_hz;
        out
    }

    fn endpoints_of(&self, link: LinkId) -> (&EndpointConfig, &EndpointConfig) {
        match link {
            LinkId::BsIrs => (&self.bs, &self.irs),
            LinkId::IrsUe => (&self.irs, &self.ue),
            LinkId::BsUe => (&self.bs, &self.ue),
        }
    }

    fn link_rician(&self, link: LinkId) -> f64 {
        match link {
            LinkId::BsIrs | LinkId::IrsUe => self.channel.rician_k,
            LinkId::BsUe => self.channel.rician_k_direct,
        }
    }

    /// The physical description of one link.
    pub fn link_geometry(&self, link: LinkId) -> Result<LinkGeometry> {
        self.validate()?;
        let hw = self.wavelength() / 2.0;
        let (a, z) = self.endpoints_of(link);
        let rician_k = self.link_rician(link);
        Ok(LinkGeometry {
            end_a: a.to_endpoint(hw),
            end_z: z.to_endpoint(hw),
            carrier_hz: self.carrier_hz,
            rician_k,
            los: rician_k > 0.0,
        })
    }

    /// The cluster-generation parameters of one link.  Placement fans aim
    /// along the link axis: first-bounce centers spread around the
    /// direction toward the far terminal, last-bounce centers around the
    /// direction back.
    pub fn cluster_params(&self, link: LinkId) -> Result<ClusterGenParams> {
        self.validate()?;
        let s = self.clusters.settings_for(link);
        let (a, z) = self.endpoints_of(link);
        let (pa, pz) = (a.position_vec(), z.position_vec());
        let center_a = f64::atan2(pz.y - pa.y, pz.x - pa.x);
        let center_z = f64::atan2(pa.y - pz.y, pa.x - pz.x);
        Ok(ClusterGenParams {
            evolution: EvolutionParams {
                birth_rate: s.birth_rate,
                death_rate: s.death_rate,
                correlation_factor: s.correlation_factor,
                mode: s.evolution,
            },
            rays_per_cluster: s.rays_per_cluster,
            sigma: s.sigma,
            link_delay_rate: s.link_delay_rate,
            pdp_decay: s.pdp_decay,
            placement: ClusterPlacement {
                distance_min: s.distance_min,
                distance_max: s.distance_max,
                azimuth_center_a: center_a,
                azimuth_spread_a: s.azimuth_spread,
                azimuth_center_z: center_z,
                azimuth_spread_z: s.azimuth_spread,
                cluster_speed: s.cluster_speed,
            },
        })
    }

    /// Build one link snapshot.  `seed` is the master seed, `instance`
    /// the realization index, and `mode` an optional override of the
    /// configured evolution reading.
    pub fn build_link(
        &self,
        link: LinkId,
        seed: u64,
        instance: u32,
        mode: Option<EvolutionMode>,
    ) -> Result<Link> {
        let geo = self.link_geometry(link)?;
        let mut gen = self.cluster_params(link)?;
        if let Some(m) = mode {
            gen.evolution.mode = m;
        }
        Link::build(geo, gen, link, seed, instance)
    }
}
