//! Small-scale fading coefficients: per-pair tap lists (NLoS cluster sums
//! plus an optional LoS term), Rician weighting, and time series of full
//! channel matrices.
//!
//! A tap is `√P · e^{+j2πf_c·τ}` at delay `τ`; the `+j` sign convention of
//! the underlying model is kept everywhere (including the statistics
//! layer) so simulated and analytical quantities stay comparable.  The
//! narrowband coefficient of an element pair is the plain coherent sum of
//! its tap amplitudes; evaluating the channel at a measurement frequency
//! `f` additionally rotates each tap by `e^{-j2πf·τ}`.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::cmat::CMatrix;
use crate::error::{Error, Result};
use crate::link::Link;

/// One channel impulse-response tap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirTap {
    /// Complex amplitude, linear scale.
    pub amplitude: Complex64,
    /// Absolute delay, seconds.
    pub delay: f64,
    /// Cluster id for scattered taps; `None` for the LoS tap.
    pub cluster: Option<usize>,
    /// Ray index within the cluster; `None` for the LoS tap.
    pub ray: Option<usize>,
}

/// Scattered (NLoS) taps for one element pair at one time instant.
///
/// `link_delays` supplies the random virtual-link delay per `[cluster][ray]`
/// (either the snapshot's own draws or a per-member redraw); `restrict`
/// optionally limits the sum to a single cluster id.  Pairs that see no
/// cluster get an empty list.
pub fn nlos_coefficient(
    link: &Link,
    elem_a: usize,
    elem_z: usize,
    t: f64,
    link_delays: &[Vec<f64>],
    restrict: Option<usize>,
) -> Result<Vec<CirTap>> {
    if link_delays.len() != link.n_clusters() {
        return Err(Error::arg(format!(
            "expected link delays for {} clusters, got {}",
            link.n_clusters(),
            link_delays.len()
        )));
    }
    let samples = link.ray_geometry(elem_a, elem_z, t, restrict)?;
    let mut taps = Vec::new();
    for s in &samples {
        let delays = &link_delays[s.cluster];
        if delays.len() != s.powers.len() {
            return Err(Error::arg(format!(
                "cluster {} has {} rays but {} link delays",
                s.cluster,
                s.powers.len(),
                delays.len()
            )));
        }
        for (m, ((&power, &det), &link_delay)) in
            s.powers.iter().zip(&s.det_delay).zip(delays).enumerate()
        {
            let delay = det + link_delay;
            let amplitude =
                Complex64::from_polar(power.sqrt(), TAU * link.geo.carrier_hz * delay);
            taps.push(CirTap { amplitude, delay, cluster: Some(s.cluster), ray: Some(m) });
        }
    }
    Ok(taps)
}

/// Line-of-sight tap for one element pair at one time instant: a pure
/// phasor at the element-to-element flight time.
pub fn los_coefficient(link: &Link, elem_a: usize, elem_z: usize, t: f64) -> Result<CirTap> {
    let delay = link.los_distance(elem_a, elem_z, t)? / crate::SPEED_OF_LIGHT;
    Ok(CirTap {
        amplitude: Complex64::from_polar(1.0, TAU * link.geo.carrier_hz * delay),
        delay,
        cluster: None,
        ray: None,
    })
}

/// Weight a LoS tap and a scattered tap list by the Rician factor:
/// amplitudes scale by `√(K/(K+1))` and `√(1/(K+1))`, delays are
/// untouched.  `los: None` models a blocked direct path (the scattered
/// part still gets its weight).
pub fn rician_combine(
    los: Option<CirTap>,
    nlos: Vec<CirTap>,
    rician_k: f64,
) -> Result<Vec<CirTap>> {
    if !(rician_k >= 0.0) {
        return Err(Error::arg(format!("Rician factor must be >= 0, got {rician_k}")));
    }
    let w_los = (rician_k / (rician_k + 1.0)).sqrt();
    let w_nlos = (1.0 / (rician_k + 1.0)).sqrt();
    let mut out = Vec::with_capacity(nlos.len() + 1);
    if let Some(mut tap) = los {
        tap.amplitude *= w_los;
        out.push(tap);
    }
    for mut tap in nlos {
        tap.amplitude *= w_nlos;
        out.push(tap);
    }
    Ok(out)
}

/// Coherent narrowband value of a tap list at measurement frequency
/// `measurement_hz` (0 gives the plain coherent sum).
pub fn evaluate_at_frequency(taps: &[CirTap], measurement_hz: f64) -> Complex64 {
    taps.iter()
        .map(|tap| tap.amplitude * Complex64::from_polar(1.0, -TAU * measurement_hz * tap.delay))
        .sum()
}

/// A time series of per-pair tap lists for one link, with matrix views.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealizationSeries {
    /// Sample instants, seconds.
    pub times: Vec<f64>,
    /// Matrix rows = Z-side element count.
    pub rows: usize,
    /// Matrix columns = A-side element count.
    pub cols: usize,
    pub rician_k: f64,
    pub carrier_hz: f64,
    /// `taps[time][row * cols + col]`.
    taps: Vec<Vec<Vec<CirTap>>>,
}

impl ChannelRealizationSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn taps_at(&self, time_index: usize, row: usize, col: usize) -> &[CirTap] {
        &self.taps[time_index][row * self.cols + col]
    }

    /// Narrowband channel matrix at one time instant.
    pub fn matrix(&self, time_index: usize) -> CMatrix {
        self.matrix_at_frequency(time_index, 0.0)
    }

    /// Channel matrix evaluated at a measurement frequency.
    pub fn matrix_at_frequency(&self, time_index: usize, measurement_hz: f64) -> CMatrix {
        let mut m = CMatrix::zeros(self.rows, self.cols);
        for row in 0..self.rows {
            for col in 0..self.cols {
                m.set(
                    row,
                    col,
                    evaluate_at_frequency(self.taps_at(time_index, row, col), measurement_hz),
                );
            }
        }
        m
    }
}

/// Realize the full channel of a link over a time grid: for every instant
/// and element pair, scattered taps plus the optional LoS tap, Rician
/// weighted.  `link_delays` fixes the random virtual-link delays for the
/// whole series (they do not vary with time).
pub fn realize_subchannel(
    link: &Link,
    times: &[f64],
    link_delays: &[Vec<f64>],
) -> Result<ChannelRealizationSeries> {
    let (rows, cols) = link.dims();
    let mut all = Vec::with_capacity(times.len());
    for &t in times {
        let mut per_pair = Vec::with_capacity(rows * cols);
        for row in 0..rows {
            for col in 0..cols {
                let nlos = nlos_coefficient(link, col, row, t, link_delays, None)?;
                let los = if link.geo.los {
                    Some(los_coefficient(link, col, row, t)?)
                } else {
                    None
                };
                per_pair.push(rician_combine(los, nlos, link.geo.rician_k)?);
            }
        }
        all.push(per_pair);
    }
    Ok(ChannelRealizationSeries {
        times: times.to_vec(),
        rows,
        cols,
        rician_k: link.geo.rician_k,
        carrier_hz: link.geo.carrier_hz,
        taps: all,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ArrayGeometry, Trajectory, Vec3};
    use crate::link::{ClusterGenParams, Endpoint, Link, LinkGeometry};
    use crate::seeds::LinkId;
    use approx::assert_relative_eq;

    fn static_point_geometry(separation: f64) -> LinkGeometry {
        LinkGeometry {
            end_a: Endpoint {
                array: ArrayGeometry::Linear {
                    count: 1,
                    spacing: 0.1,
                    azimuth: 0.0,
                    elevation: 0.0,
                    reference: Vec3::ZERO,
                },
                trajectory: Trajectory::stationary(),
                evolve: false,
            },
            end_z: Endpoint {
                array: ArrayGeometry::Linear {
                    count: 1,
                    spacing: 0.1,
                    azimuth: 0.0,
                    elevation: 0.0,
                    reference: Vec3::new(separation, 0.0, 0.0),
                },
                trajectory: Trajectory::stationary(),
                evolve: false,
            },
            carrier_hz: 2.6e9,
            rician_k: 1.0,
            los: true,
        }
    }

    fn static_gen(rays: usize) -> ClusterGenParams {
        let mut gen = crate::link::testutil::test_gen_params();
        gen.rays_per_cluster = rays;
        gen.placement.cluster_speed = 0.0;
        gen
    }

    fn build(geo: LinkGeometry, gen: ClusterGenParams, seed: u64, instance: u32) -> Link {
        Link::build(geo, gen, LinkId::BsUe, seed, instance).unwrap()
    }

    #[test]
    fn static_scene_taps_are_time_invariant() {
        let link = build(static_point_geometry(150.0), static_gen(4), 3, 0);
        let delays = link.snapshot_link_delays();
        let t0 = nlos_coefficient(&link, 0, 0, 0.0, &delays, None).unwrap();
        let t1 = nlos_coefficient(&link, 0, 0, 1.7, &delays, None).unwrap();
        assert_eq!(t0, t1);
        let l0 = los_coefficient(&link, 0, 0, 0.0).unwrap();
        let l1 = los_coefficient(&link, 0, 0, 1.7).unwrap();
        assert_eq!(l0, l1);
    }

    #[test]
    fn tap_power_equals_its_ray_power_exactly() {
        let link = build(static_point_geometry(150.0), static_gen(4), 3, 0);
        let delays = link.snapshot_link_delays();
        let taps = nlos_coefficient(&link, 0, 0, 0.3, &delays, None).unwrap();
        let samples = link.ray_geometry(0, 0, 0.3, None).unwrap();
        let mut count = 0;
        for s in &samples {
            for (m, p) in s.powers.iter().enumerate() {
                let tap = taps
                    .iter()
                    .find(|t| t.cluster == Some(s.cluster) && t.ray == Some(m))
                    .expect("tap exists for every visible ray");
                assert_relative_eq!(tap.amplitude.norm_sqr(), *p, max_relative = 1e-12);
                count += 1;
            }
        }
        assert_eq!(count, taps.len());
        let total: f64 = taps.iter().map(|t| t.amplitude.norm_sqr()).sum();
        assert_relative_eq!(total, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn single_ray_single_cluster_has_unit_amplitude() {
        let mut gen = static_gen(1);
        // One cluster total.
        gen.evolution.birth_rate = 4.0;
        let link = build(static_point_geometry(150.0), gen, 5, 0);
        assert_eq!(link.n_clusters(), 1);
        let delays = link.snapshot_link_delays();
        let taps = nlos_coefficient(&link, 0, 0, 0.0, &delays, None).unwrap();
        assert_eq!(taps.len(), 1);
        assert_relative_eq!(taps[0].amplitude.norm(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn los_delay_is_flight_time_and_unit_modulus() {
        let link = build(static_point_geometry(299.792458), static_gen(2), 1, 0);
        let tap = los_coefficient(&link, 0, 0, 0.0).unwrap();
        assert_relative_eq!(tap.delay, 1.0e-6, max_relative = 1e-12);
        assert_relative_eq!(tap.amplitude.norm(), 1.0, epsilon = 1e-12);
        assert_eq!(tap.cluster, None);
    }

    #[test]
    fn los_delay_never_exceeds_scattered_delays() {
        let link = build(static_point_geometry(150.0), static_gen(6), 9, 0);
        let delays = link.snapshot_link_delays();
        let los = los_coefficient(&link, 0, 0, 0.0).unwrap();
        for tap in nlos_coefficient(&link, 0, 0, 0.0, &delays, None).unwrap() {
            assert!(tap.delay >= los.delay, "bounce path shorter than the straight line");
        }
    }

    #[test]
    fn rician_weights_follow_the_factor() {
        let los = CirTap {
            amplitude: Complex64::new(1.0, 0.0),
            delay: 1e-6,
            cluster: None,
            ray: None,
        };
        let nlos = vec![CirTap {
            amplitude: Complex64::new(0.6, 0.8),
            delay: 2e-6,
            cluster: Some(0),
            ray: Some(0),
        }];

        let zero_k = rician_combine(Some(los), nlos.clone(), 0.0).unwrap();
        assert_relative_eq!(zero_k[0].amplitude.norm(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(zero_k[1].amplitude.norm(), 1.0, epsilon = 1e-12);

        let unit_k = rician_combine(Some(los), nlos.clone(), 1.0).unwrap();
        let p: f64 = unit_k.iter().map(|t| t.amplitude.norm_sqr()).sum();
        assert_relative_eq!(p, 0.5 * 1.0 + 0.5 * 1.0, max_relative = 1e-12);
        assert_relative_eq!(unit_k[0].delay, 1e-6, epsilon = 0.0);
        assert_relative_eq!(unit_k[1].delay, 2e-6, epsilon = 0.0);

        let huge_k = rician_combine(Some(los), nlos, 1e12).unwrap();
        assert_relative_eq!(huge_k[0].amplitude.norm(), 1.0, max_relative = 1e-9);
        assert!(huge_k[1].amplitude.norm() < 1e-5);

        assert!(rician_combine(None, Vec::new(), -0.1).is_err());
    }

    #[test]
    fn series_dimensions_follow_the_arrays() {
        let link = Link::build(
            crate::link::testutil::test_geometry(false, false),
            static_gen(3),
            LinkId::BsIrs,
            2,
            0,
        )
        .unwrap();
        let delays = link.snapshot_link_delays();
        let series = realize_subchannel(&link, &[0.0, 0.001], &delays).unwrap();
        // Z side is the 2x2 surface (rows), A side the 4-element line (cols).
        assert_eq!(series.rows, 4);
        assert_eq!(series.cols, 4);
        assert_eq!(series.len(), 2);
        let m = series.matrix(0);
        assert_eq!((m.rows(), m.cols()), (4, 4));
    }

    #[test]
    fn matrix_entries_are_coherent_tap_sums() {
        let link = build(static_point_geometry(150.0), static_gen(3), 8, 0);
        let delays = link.snapshot_link_delays();
        let series = realize_subchannel(&link, &[0.5], &delays).unwrap();
        let manual: Complex64 =
            series.taps_at(0, 0, 0).iter().map(|t| t.amplitude).sum();
        assert_eq!(series.matrix(0).get(0, 0), manual);
    }

    #[test]
    fn measurement_frequency_rotates_taps() {
        let taps = vec![
            CirTap {
                amplitude: Complex64::new(0.5, 0.0),
                delay: 1e-6,
                cluster: Some(0),
                ray: Some(0),
            },
            CirTap {
                amplitude: Complex64::new(0.0, 0.5),
                delay: 3e-6,
                cluster: Some(0),
                ray: Some(1),
            },
        ];
        let f = 1.0e5;
        let manual: Complex64 = taps
            .iter()
            .map(|t| t.amplitude * Complex64::from_polar(1.0, -TAU * f * t.delay))
            .sum();
        assert_eq!(evaluate_at_frequency(&taps, f), manual);
        let plain: Complex64 = taps.iter().map(|t| t.amplitude).sum();
        assert_eq!(evaluate_at_frequency(&taps, 0.0), plain);
    }

    #[test]
    fn ensemble_mean_power_is_unity() {
        // Independent snapshots; E|h|² = K/(K+1)·1 + 1/(K+1)·ΣP = 1.
        let n = 10_000;
        let mut acc = 0.0;
        for i in 0..n {
            let link = build(static_point_geometry(120.0), static_gen(3), 777, i);
            let delays = link.snapshot_link_delays();
            let nlos = nlos_coefficient(&link, 0, 0, 0.0, &delays, None).unwrap();
            let los = los_coefficient(&link, 0, 0, 0.0).unwrap();
            let taps = rician_combine(Some(los), nlos, link.geo.rician_k).unwrap();
            acc += evaluate_at_frequency(&taps, 0.0).norm_sqr();
        }
        let mean = acc / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "ensemble mean power {mean} not within 2% of 1");
    }

    #[test]
    fn mismatched_delay_table_is_rejected() {
        let link = build(static_point_geometry(150.0), static_gen(2), 3, 0);
        let delays: Vec<Vec<f64>> = Vec::new();
        assert!(nlos_coefficient(&link, 0, 0, 0.0, &delays, None).is_err());
    }
}
