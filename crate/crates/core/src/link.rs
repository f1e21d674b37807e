//! A realized link: two endpoint arrays, a snapshot of twin clusters with
//! their scatterers, and per-array cluster visibility.
//!
//! This module owns the geometry evaluation everything else builds on:
//! time-varying element-to-scatterer distances (moving endpoints and
//! moving clusters), line-of-sight element-pair distances, per-ray powers
//! from an exponential power-delay profile, and the bookkeeping that maps
//! cluster ids between the two endpoint arrays (clusters born while
//! evolving along one array are taken as fully visible from the other).
//!
//! Cluster *placement* is not prescribed by the underlying model, which
//! treats centers as given.  We place first-bounce centers in a
//! configurable distance/azimuth fan around the first endpoint and
//! last-bounce centers in a fan around the second; spreads, rotations and
//! velocities are drawn per cluster.  All draws come from purpose-tagged
//! streams of the master seed, so a link snapshot is a pure function of
//! `(scenario, seed, instance)`.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::clusters::{
    evolve_array, initial_cluster_count, sample_scatterers, virtual_link_delay, EvolutionParams,
    Ray, TwinCluster, VisibilityTensor,
};
use crate::error::{Error, Result};
use crate::geometry::{unit_from_angles, ArrayGeometry, RotationAngles, Trajectory, Vec3};
use crate::seeds::{stream_id, stream_rng, LinkId, Purpose};
use crate::SPEED_OF_LIGHT;

/// One end of a link: an antenna array, its motion, and whether cluster
/// visibility evolves across its elements.
#[derive(Debug, Clone, PartialEq)]
pub struct Endpoint {
    pub array: ArrayGeometry,
    pub trajectory: Trajectory,
    /// When false the endpoint sees every cluster from every element
    /// (sensible for small arrays); when true, birth-death evolution runs
    /// across the element grid.
    pub evolve: bool,
}

/// Physical description of a link, independent of any random draw.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGeometry {
    /// First endpoint ("A side"): BS for the BS-IRS and BS-UE links, the
    /// surface for the IRS-UE link.  Channel matrices use A-side elements
    /// as columns.
    pub end_a: Endpoint,
    /// Second endpoint ("Z side"); its elements index matrix rows.
    pub end_z: Endpoint,
    pub carrier_hz: f64,
    /// Rician factor: LoS/NLoS power ratio.
    pub rician_k: f64,
    /// Whether a line-of-sight path exists.
    pub los: bool,
}

/// Where cluster centers may be placed, and how they move.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterPlacement {
    /// Center distance from the endpoint reference, drawn uniformly from
    /// `[distance_min, distance_max]`, meters.
    pub distance_min: f64,
    pub distance_max: f64,
    /// Azimuth fan for first-bounce centers: uniform in
    /// `center ± spread`, radians.
    pub azimuth_center_a: f64,
    pub azimuth_spread_a: f64,
    /// Azimuth fan for last-bounce centers.
    pub azimuth_center_z: f64,
    pub azimuth_spread_z: f64,
    /// Speed magnitude of every cluster center, m/s; headings are drawn
    /// per cluster and per bounce side.
    pub cluster_speed: f64,
}

/// Stochastic-generation parameters of a link snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterGenParams {
    pub evolution: EvolutionParams,
    pub rays_per_cluster: usize,
    /// Per-axis scatterer spreads in each cluster's local frame, meters.
    pub sigma: [f64; 3],
    /// Rate of the exponential virtual-link delay, 1/s.
    pub link_delay_rate: f64,
    /// Decay constant of the exponential power-delay profile, seconds.
    pub pdp_decay: f64,
    pub placement: ClusterPlacement,
}

impl ClusterGenParams {
    pub fn validate(&self) -> Result<()> {
        self.evolution.validate()?;
        if self.rays_per_cluster < 1 {
            return Err(Error::scenario("rays per cluster must be >= 1"));
        }
        if self.sigma.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::scenario("scatterer spreads must be > 0"));
        }
        if !(self.link_delay_rate > 0.0) {
            return Err(Error::scenario("virtual-link delay rate must be > 0"));
        }
        if !(self.pdp_decay > 0.0) {
            return Err(Error::scenario("power-delay profile decay must be > 0"));
        }
        let p = &self.placement;
        if !(p.distance_min > 0.0 && p.distance_max >= p.distance_min) {
            return Err(Error::scenario(
                "cluster distance range must satisfy 0 < min <= max",
            ));
        }
        if !(p.azimuth_spread_a >= 0.0 && p.azimuth_spread_z >= 0.0) {
            return Err(Error::scenario("cluster azimuth spreads must be >= 0"));
        }
        if !(p.cluster_speed >= 0.0) {
            return Err(Error::scenario("cluster speed must be >= 0"));
        }
        Ok(())
    }
}

/// Per-ray powers and path distances of one cluster, for one element pair
/// at one time instant.
#[derive(Debug, Clone, PartialEq)]
pub struct RayGeometrySample {
    pub cluster: usize,
    /// Normalized ray powers (unit total over all rays returned for the
    /// pair at this instant).
    pub powers: Vec<f64>,
    /// Element-to-first-bounce plus last-bounce-to-element distance per
    /// ray, meters.
    pub path_distance: Vec<f64>,
    /// Deterministic delay per ray: path flight time plus the
    /// inter-scatterer flight time, seconds.  Excludes the random
    /// virtual-link delay.
    pub det_delay: Vec<f64>,
}

/// A fully realized link snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub geo: LinkGeometry,
    pub gen: ClusterGenParams,
    pub clusters: Vec<TwinCluster>,
    vis_a: VisibilityTensor,
    vis_z: VisibilityTensor,
    /// Clusters shared by both arrays (the initial population).
    n_common: usize,
    /// Clusters born while evolving along the A-side array.
    n_born_a: usize,
    /// Clusters born while evolving along the Z-side array.
    n_born_z: usize,
    /// Seed context, kept so per-member virtual-delay redraws can derive
    /// their own streams.
    link_id: LinkId,
    master_seed: u64,
    instance: u32,
}

impl Link {
    /// Generate a link snapshot from its geometry and generation
    /// parameters.  `instance` distinguishes independent snapshots of the
    /// same scenario (e.g. delay-spread realizations).
    pub fn build(
        geo: LinkGeometry,
        gen: ClusterGenParams,
        link_id: LinkId,
        master_seed: u64,
        instance: u32,
    ) -> Result<Link> {
        gen.validate()?;
        geo.end_a.array.validate()?;
        geo.end_z.array.validate()?;
        geo.end_a.trajectory.validate()?;
        geo.end_z.trajectory.validate()?;
        if !(geo.carrier_hz > 0.0) {
            return Err(Error::scenario("carrier frequency must be > 0"));
        }
        if !(geo.rician_k >= 0.0) {
            return Err(Error::scenario("Rician factor must be >= 0"));
        }

        let nc0 = initial_cluster_count(&gen.evolution)?;
        let (ax, ay) = geo.end_a.array.dims();
        let (zx, zy) = geo.end_z.array.dims();

        let vis_a = if geo.end_a.evolve {
            let mut rng = stream_rng(master_seed, stream_id(Purpose::EvolveA, link_id, instance));
            evolve_array(&gen.evolution, &geo.end_a.array, &mut rng)?
        } else {
            VisibilityTensor::all_visible(ax, ay, nc0)
        };
        let vis_z = if geo.end_z.evolve {
            let mut rng = stream_rng(master_seed, stream_id(Purpose::EvolveZ, link_id, instance));
            evolve_array(&gen.evolution, &geo.end_z.array, &mut rng)?
        } else {
            VisibilityTensor::all_visible(zx, zy, nc0)
        };
        let n_born_a = vis_a.n_clusters() - nc0;
        let n_born_z = vis_z.n_clusters() - nc0;
        let n_total = nc0 + n_born_a + n_born_z;

        let ref_a = geo.end_a.array.reference();
        let ref_z = geo.end_z.array.reference();
        let mut place_rng =
            stream_rng(master_seed, stream_id(Purpose::Placement, link_id, instance));
        let mut scat_rng =
            stream_rng(master_seed, stream_id(Purpose::Scatterers, link_id, instance));
        let mut delay_rng =
            stream_rng(master_seed, stream_id(Purpose::LinkDelays, link_id, instance));

        let mut clusters = Vec::with_capacity(n_total);
        for id in 0..n_total {
            clusters.push(generate_cluster(
                id,
                ref_a,
                ref_z,
                &gen,
                &mut place_rng,
                &mut scat_rng,
                &mut delay_rng,
            )?);
        }

        Ok(Link {
            geo,
            gen,
            clusters,
            vis_a,
            vis_z,
            n_common: nc0,
            n_born_a,
            n_born_z,
            link_id,
            master_seed,
            instance,
        })
    }

    pub fn n_clusters(&self) -> usize {
        self.clusters.len()
    }

    /// Which of the three scenario links this snapshot belongs to.  The
    /// identity keys the random streams, so two snapshots with the same
    /// link id, master seed and instance draw identical randomness.
    pub fn link_id(&self) -> LinkId {
        self.link_id
    }

    /// Matrix dimensions: (rows, cols) = (Z-side elements, A-side elements).
    pub fn dims(&self) -> (usize, usize) {
        (self.geo.end_z.array.len(), self.geo.end_a.array.len())
    }

    /// Is a cluster visible from a flat element index of the A-side array?
    ///
    /// Clusters born on the opposite array are fully visible from this one.
    pub fn visible_a(&self, cluster: usize, element: usize) -> bool {
        if cluster < self.n_common + self.n_born_a {
            self.vis_a.visible_flat(element, cluster)
        } else {
            true
        }
    }

    /// Z-side counterpart of [`Link::visible_a`].
    pub fn visible_z(&self, cluster: usize, element: usize) -> bool {
        if cluster < self.n_common {
            self.vis_z.visible_flat(element, cluster)
        } else if cluster < self.n_common + self.n_born_a {
            true
        } else {
            self.vis_z.visible_flat(element, cluster - self.n_born_a)
        }
    }

    /// A path through a cluster exists for an element pair only when both
    /// ends see it.
    pub fn pair_visible(&self, cluster: usize, elem_a: usize, elem_z: usize) -> bool {
        self.visible_a(cluster, elem_a) && self.visible_z(cluster, elem_z)
    }

    /// Distance from A-side element `elem_a` to the first-bounce scatterer
    /// of `(cluster, ray)` at time `t`, following both the endpoint's and
    /// the cluster's motion.
    pub fn first_bounce_distance(
        &self,
        cluster: usize,
        ray: usize,
        elem_a: usize,
        t: f64,
    ) -> Result<f64> {
        let cl = self.cluster(cluster)?;
        let r = cl.rays.get(ray).ok_or_else(|| {
            Error::IndexOutOfRange(format!("ray {ray} of cluster {cluster}"))
        })?;
        side_distance(&self.geo.end_a, &cl.traj_a, r.first_bounce, elem_a, t)
    }

    /// Distance from the last-bounce scatterer of `(cluster, ray)` to
    /// Z-side element `elem_z` at time `t`.
    pub fn last_bounce_distance(
        &self,
        cluster: usize,
        ray: usize,
        elem_z: usize,
        t: f64,
    ) -> Result<f64> {
        let cl = self.cluster(cluster)?;
        let r = cl.rays.get(ray).ok_or_else(|| {
            Error::IndexOutOfRange(format!("ray {ray} of cluster {cluster}"))
        })?;
        side_distance(&self.geo.end_z, &cl.traj_z, r.last_bounce, elem_z, t)
    }

    /// Line-of-sight distance between an element pair at time `t`, both
    /// endpoint displacements included.
    pub fn los_distance(&self, elem_a: usize, elem_z: usize, t: f64) -> Result<f64> {
        let pos_a = self.geo.end_a.array.element_position(elem_a)?
            + self.geo.end_a.trajectory.displacement(t)?;
        let pos_z = self.geo.end_z.array.element_position(elem_z)?
            + self.geo.end_z.trajectory.displacement(t)?;
        Ok(pos_a.distance(pos_z))
    }

    /// Departure angles (azimuth, elevation) of a ray as seen from the
    /// A-side reference element at the initial time; derived from the
    /// scatterer geometry, recorded for inspection only.
    pub fn departure_angles(&self, cluster: usize, ray: usize) -> Result<(f64, f64)> {
        let cl = self.cluster(cluster)?;
        let r = cl.rays.get(ray).ok_or_else(|| {
            Error::IndexOutOfRange(format!("ray {ray} of cluster {cluster}"))
        })?;
        let d = r.first_bounce - self.geo.end_a.array.reference();
        let horiz = (d.x * d.x + d.y * d.y).sqrt();
        Ok((d.y.atan2(d.x), d.z.atan2(horiz)))
    }

    /// Per-ray powers, path distances, and deterministic delays for one
    /// element pair at one time instant, covering every cluster visible to
    /// the pair (optionally restricted to a single cluster id).
    ///
    /// Powers follow an exponential profile over the *deterministic* delay
    /// and are normalized to unit total over everything returned; the
    /// random virtual-link delay deliberately does not influence power, so
    /// the profile is a stable function of the snapshot.
    pub fn ray_geometry(
        &self,
        elem_a: usize,
        elem_z: usize,
        t: f64,
        restrict: Option<usize>,
    ) -> Result<Vec<RayGeometrySample>> {
        let mut samples = Vec::new();
        for cl in &self.clusters {
            if let Some(only) = restrict {
                if cl.id != only {
                    continue;
                }
            }
            if !self.pair_visible(cl.id, elem_a, elem_z) {
                continue;
            }
            let m = cl.rays.len();
            let mut path_distance = Vec::with_capacity(m);
            let mut det_delay = Vec::with_capacity(m);
            for ray in 0..m {
                let d_a = self.first_bounce_distance(cl.id, ray, elem_a, t)?;
                let d_z = self.last_bounce_distance(cl.id, ray, elem_z, t)?;
                let d = d_a + d_z;
                path_distance.push(d);
                det_delay.push((d + cl.rays[ray].bounce_distance) / SPEED_OF_LIGHT);
            }
            samples.push(RayGeometrySample {
                cluster: cl.id,
                powers: Vec::new(),
                path_distance,
                det_delay,
            });
        }

        // Exponential power-delay profile, referenced to the earliest
        // delay so the exponentials stay well-scaled, then normalized.
        let min_delay = samples
            .iter()
            .flat_map(|s| s.det_delay.iter().copied())
            .fold(f64::INFINITY, f64::min);
        let mut total = 0.0;
        for s in samples.iter_mut() {
            s.powers = s
                .det_delay
                .iter()
                .map(|tau| (-(tau - min_delay) / self.gen.pdp_decay).exp())
                .collect();
            total += s.powers.iter().sum::<f64>();
        }
        if total > 0.0 {
            for s in samples.iter_mut() {
                for p in s.powers.iter_mut() {
                    *p /= total;
                }
            }
        }
        Ok(samples)
    }

    /// Virtual-link delays of the snapshot itself, `[cluster][ray]`.
    pub fn snapshot_link_delays(&self) -> Vec<Vec<f64>> {
        self.clusters.iter().map(|c| c.rays.iter().map(|r| r.link_delay).collect()).collect()
    }

    /// Redraw every ray's random virtual-link delay for one ensemble
    /// member, leaving the scatterer snapshot fixed.  Member 0, 1, ... get
    /// independent streams; the draw order (cluster id ascending, ray
    /// index ascending) is part of the reproducibility contract.
    pub fn member_link_delays(&self, member: u32) -> Vec<Vec<f64>> {
        let mut rng = stream_rng(
            self.master_seed,
            stream_id(Purpose::MemberDelays, self.link_id, member),
        );
        let exp = Exp::new(self.gen.link_delay_rate).expect("validated rate");
        self.clusters
            .iter()
            .map(|c| c.rays.iter().map(|_| exp.sample(&mut rng)).collect())
            .collect()
    }

    fn cluster(&self, id: usize) -> Result<&TwinCluster> {
        self.clusters
            .get(id)
            .ok_or_else(|| Error::IndexOutOfRange(format!("cluster id {id}")))
    }
}

/// Element-to-scatterer distance with both the endpoint and the cluster
/// side moving: the initial reference-to-scatterer vector minus the
/// element offset and the relative displacement accumulated by time `t`.
fn side_distance(
    end: &Endpoint,
    cluster_traj: &Trajectory,
    scatterer: Vec3,
    element: usize,
    t: f64,
) -> Result<f64> {
    let d0 = scatterer - end.array.reference();
    let offset = end.array.element_offset(element)?;
    let relative = end.trajectory.displacement(t)? - cluster_traj.displacement(t)?;
    Ok((d0 - (offset + relative)).norm())
}

fn generate_cluster(
    id: usize,
    ref_a: Vec3,
    ref_z: Vec3,
    gen: &ClusterGenParams,
    place_rng: &mut impl Rng,
    scat_rng: &mut impl Rng,
    delay_rng: &mut impl Rng,
) -> Result<TwinCluster> {
    let p = &gen.placement;
    let tau = std::f64::consts::TAU;

    let dist_a = place_rng.random_range(p.distance_min..=p.distance_max);
    let az_a = p.azimuth_center_a
        + if p.azimuth_spread_a > 0.0 {
            place_rng.random_range(-p.azimuth_spread_a..=p.azimuth_spread_a)
        } else {
            0.0
        };
    let dist_z = place_rng.random_range(p.distance_min..=p.distance_max);
    let az_z = p.azimuth_center_z
        + if p.azimuth_spread_z > 0.0 {
            place_rng.random_range(-p.azimuth_spread_z..=p.azimuth_spread_z)
        } else {
            0.0
        };
    let center_a = ref_a + unit_from_angles(az_a, 0.0).scale(dist_a);
    let center_z = ref_z + unit_from_angles(az_z, 0.0).scale(dist_z);

    let rotation_a = RotationAngles::new(
        place_rng.random_range(0.0..tau),
        place_rng.random_range(0.0..tau),
        place_rng.random_range(0.0..tau),
    );
    let rotation_z = RotationAngles::new(
        place_rng.random_range(0.0..tau),
        place_rng.random_range(0.0..tau),
        place_rng.random_range(0.0..tau),
    );
    // Headings are always drawn, even for static clusters, so the stream
    // layout does not depend on the configured speed.
    let heading_a = place_rng.random_range(0.0..tau);
    let heading_z = place_rng.random_range(0.0..tau);
    let traj_a = Trajectory::constant(p.cluster_speed, heading_a);
    let traj_z = Trajectory::constant(p.cluster_speed, heading_z);

    let m = gen.rays_per_cluster;
    let first = sample_scatterers(center_a, gen.sigma, &rotation_a, id, m, scat_rng)?;
    let last = sample_scatterers(center_z, gen.sigma, &rotation_z, id, m, scat_rng)?;

    let mut rays = Vec::with_capacity(m);
    for (fa, la) in first.iter().zip(&last) {
        let bounce_distance = fa.position.distance(la.position);
        let total = virtual_link_delay(gen.link_delay_rate, bounce_distance, delay_rng)?;
        rays.push(Ray {
            first_bounce: fa.position,
            last_bounce: la.position,
            bounce_distance,
            link_delay: total - bounce_distance / SPEED_OF_LIGHT,
        });
    }

    Ok(TwinCluster {
        id,
        center_a,
        center_z,
        rotation_a,
        rotation_z,
        sigma: gen.sigma,
        traj_a,
        traj_z,
        rays,
    })
}
