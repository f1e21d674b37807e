//! Twin scatterer clusters: placement of scatterers around a cluster
//! center, virtual-link delays, and birth-death evolution of cluster
//! visibility across the elements of a large array.
//!
//! Each propagation path bounces off a *first-bounce* cluster (near one
//! link end) and a *last-bounce* cluster (near the other); the two are
//! generated as a pair and connected by an abstract virtual link.  Large
//! arrays do not see all clusters from every element: walking along the
//! array, each step kills a cluster with some probability and spawns a
//! Poisson number of newcomers, which produces the spatial
//! non-stationarity characteristic of massive arrays.

use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{lcs_to_gcs, rotation_matrix, ArrayGeometry, RotationAngles, Trajectory, Vec3};
use crate::SPEED_OF_LIGHT;

/// One sampled scattering point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scatterer {
    /// Global position at the initial time, meters.
    pub position: Vec3,
    /// Id of the cluster the scatterer belongs to.
    pub cluster: usize,
    /// Ray index within the cluster.
    pub ray: usize,
}

/// One ray through a twin-cluster pair: a scatterer on each bounce side
/// plus the virtual link joining them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    /// First-bounce scatterer position (GCS, initial time).
    pub first_bounce: Vec3,
    /// Last-bounce scatterer position (GCS, initial time).
    pub last_bounce: Vec3,
    /// Distance between the two scatterers at the initial time, meters.
    pub bounce_distance: f64,
    /// Random virtual-link propagation delay (exponential draw), seconds.
    /// The full virtual delay of the ray is `link_delay + bounce_distance/c`.
    pub link_delay: f64,
}

impl Ray {
    /// Total virtual delay: random link part plus the inter-scatterer
    /// flight time.
    pub fn virtual_delay(&self) -> f64 {
        self.link_delay + self.bounce_distance / SPEED_OF_LIGHT
    }
}

/// A first-bounce / last-bounce cluster pair with its sampled rays.
///
/// Per-ray powers are not stored here: they depend on the observing
/// element pair and on time (the power-delay profile follows the
/// time-varying ray delays) and are evaluated by the link layer.
#[derive(Debug, Clone, PartialEq)]
pub struct TwinCluster {
    pub id: usize,
    /// First-bounce center position (GCS, initial time).
    pub center_a: Vec3,
    /// Last-bounce center position (GCS, initial time).
    pub center_z: Vec3,
    /// Orientation of the first-bounce cluster's local frame.
    pub rotation_a: RotationAngles,
    /// Orientation of the last-bounce cluster's local frame.
    pub rotation_z: RotationAngles,
    /// Per-axis scatterer spreads in the local frame, meters.
    pub sigma: [f64; 3],
    /// Motion of the first-bounce center.
    pub traj_a: Trajectory,
    /// Motion of the last-bounce center.
    pub traj_z: Trajectory,
    pub rays: Vec<Ray>,
}

impl TwinCluster {
    pub fn ray_count(&self) -> usize {
        self.rays.len()
    }

    /// First-bounce scatterers as standalone records.
    pub fn first_bounce_scatterers(&self) -> Vec<Scatterer> {
        self.rays
            .iter()
            .enumerate()
            .map(|(m, r)| Scatterer { position: r.first_bounce, cluster: self.id, ray: m })
            .collect()
    }
}

/// Which clusters each element of an array can see.
///
/// Indexed by the element's grid coordinates `(x, y)` (a linear array has
/// y extent 1) and the cluster id.  The cluster axis covers the initial
/// clusters followed by every cluster born during evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityTensor {
    count_x: usize,
    count_y: usize,
    n_clusters: usize,
    /// Layout: `((x * count_y) + y) * n_clusters + cluster`.
    data: Vec<bool>,
}

impl VisibilityTensor {
    /// Tensor with every cluster visible from every element.
    pub fn all_visible(count_x: usize, count_y: usize, n_clusters: usize) -> Self {
        VisibilityTensor {
            count_x,
            count_y,
            n_clusters,
            data: vec![true; count_x * count_y * n_clusters],
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.count_x, self.count_y)
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn visible(&self, x: usize, y: usize, cluster: usize) -> bool {
        assert!(x < self.count_x && y < self.count_y, "element index out of range");
        assert!(cluster < self.n_clusters, "cluster id out of range");
        self.data[(x * self.count_y + y) * self.n_clusters + cluster]
    }

    /// Visibility by flat element index (`x * count_y + y`).
    pub fn visible_flat(&self, element: usize, cluster: usize) -> bool {
        assert!(element < self.count_x * self.count_y, "element index out of range");
        assert!(cluster < self.n_clusters, "cluster id out of range");
        self.data[element * self.n_clusters + cluster]
    }

    /// Number of clusters visible from one element.
    pub fn visible_count(&self, x: usize, y: usize) -> usize {
        (0..self.n_clusters).filter(|c| self.visible(x, y, *c)).count()
    }
}

/// How the survival exponent of the birth-death process is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvolutionMode {
    /// Default: `exp(-λ_D δ cosβ_E / D_C)` is the probability a cluster
    /// *survives* one inter-element step, so coincident elements share
    /// all clusters and the process is stationary at mean λ_B/λ_D.
    Corrected,
    /// Verbatim source reading: `exp(-λ_B δ cosβ_E / D_C)` is used as the
    /// *death* probability.  Kept for auditability; note it makes
    /// coincident elements share nothing.
    PaperLiteral,
}

impl EvolutionMode {
    /// The configuration spelling of the mode.
    pub fn as_str(self) -> &'static str {
        match self {
            EvolutionMode::Corrected => "corrected",
            EvolutionMode::PaperLiteral => "paper-literal",
        }
    }
}

/// Birth-death evolution parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionParams {
    /// Cluster generation rate λ_B.
    pub birth_rate: f64,
    /// Cluster death rate λ_D.
    pub death_rate: f64,
    /// Scenario-dependent correlation factor D_C, meters.
    pub correlation_factor: f64,
    pub mode: EvolutionMode,
}

impl EvolutionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.birth_rate > 0.0) {
            return Err(Error::scenario("cluster birth rate must be > 0"));
        }
        if !(self.death_rate > 0.0) {
            return Err(Error::scenario("cluster death rate must be > 0"));
        }
        if !(self.correlation_factor > 0.0) {
            return Err(Error::scenario("cluster correlation factor must be > 0"));
        }
        Ok(())
    }
}

/// Mean cluster count `round(λ_B / λ_D)` (ties to even), at least 1.
pub fn initial_cluster_count(params: &EvolutionParams) -> Result<usize> {
    if !(params.death_rate > 0.0) {
        return Err(Error::arg("cluster death rate must be > 0"));
    }
    let ratio = params.birth_rate / params.death_rate;
    Ok((ratio.round_ties_even() as usize).max(1))
}

/// Probability that a cluster survives one inter-element step of length
/// `delta` along an axis with elevation `beta_e`.
pub fn survival_probability(params: &EvolutionParams, delta: f64, beta_e: f64) -> f64 {
    1.0 - death_probability(params, delta, beta_e)
}

/// Probability that a cluster dies over one inter-element step; the
/// complement of [`survival_probability`].  See [`EvolutionMode`] for the
/// two readings of the exponent.
pub fn death_probability(params: &EvolutionParams, delta: f64, beta_e: f64) -> f64 {
    debug_assert!(delta >= 0.0, "step length must be >= 0");
    match params.mode {
        EvolutionMode::Corrected => {
            let exponent = -params.death_rate * delta * beta_e.cos() / params.correlation_factor;
            1.0 - exponent.exp()
        }
        EvolutionMode::PaperLiteral => {
            let exponent = -params.birth_rate * delta * beta_e.cos() / params.correlation_factor;
            exponent.exp()
        }
    }
}

/// Mean of the Poisson birth count per step: `(λ_B/λ_D) * (1 - e)` where
/// `e` is the step's exponential factor in the active mode.
fn mean_births(params: &EvolutionParams, delta: f64, beta_e: f64) -> f64 {
    let survivor_fraction = match params.mode {
        EvolutionMode::Corrected => survival_probability(params, delta, beta_e),
        EvolutionMode::PaperLiteral => death_probability(params, delta, beta_e),
    };
    params.birth_rate / params.death_rate * (1.0 - survivor_fraction)
}

/// One evolution step: kill each visible cluster independently with the
/// step's death probability, then append Poisson-many newborn ids.
///
/// Draw order (part of the reproducibility contract): one uniform per
/// *visible* cluster in ascending id order, then one Poisson draw.
fn evolve_step(
    state: &mut [bool],
    next_id: &mut usize,
    p_death: f64,
    births_mean: f64,
    rng: &mut impl Rng,
) -> Vec<usize> {
    for slot in state.iter_mut() {
        if *slot {
            let u: f64 = rng.random();
            if u < p_death {
                *slot = false;
            }
        }
    }
    let n_births = if births_mean > 0.0 {
        Poisson::new(births_mean).expect("positive finite mean").sample(rng) as usize
    } else {
        0
    };
    let mut born = Vec::with_capacity(n_births);
    for _ in 0..n_births {
        born.push(*next_id);
        *next_id += 1;
    }
    born
}

/// Evolve cluster visibility across every element of an array.
///
/// The first grid row is evolved element by element along the array's x
/// extent; each column then evolves along y starting from that row, so the
/// x-pass result is exactly the y-pass initial state.  Newborn clusters
/// get fresh ids appended to the tensor's cluster axis and start life
/// visible at the element where they were born.
///
/// The element iteration order, and the draw order within a step, are
/// fixed; given equal seeds the result is bit-identical.
pub fn evolve_array(
    params: &EvolutionParams,
    array: &ArrayGeometry,
    rng: &mut impl Rng,
) -> Result<VisibilityTensor> {
    params.validate()?;
    array.validate()?;
    let nc0 = initial_cluster_count(params)?;
    let (count_x, count_y) = array.dims();

    let (step_x, step_y) = match array {
        ArrayGeometry::Linear { spacing, elevation, .. } => ((*spacing, *elevation), (0.0, 0.0)),
        ArrayGeometry::Planar { spacing_x, spacing_y, x_elevation, y_elevation, .. } => {
            ((*spacing_x, *x_elevation), (*spacing_y, *y_elevation))
        }
    };
    let p_death_x = death_probability(params, step_x.0, step_x.1);
    let births_x = mean_births(params, step_x.0, step_x.1);
    let p_death_y = death_probability(params, step_y.0, step_y.1);
    let births_y = mean_births(params, step_y.0, step_y.1);

    // Per-element visible sets, indexed [x][y] -> Vec<bool> over ids seen
    // so far.  Ragged on purpose: ids born later simply don't appear in
    // earlier elements' vectors.
    let mut grid: Vec<Vec<Vec<bool>>> = vec![vec![Vec::new(); count_y]; count_x];
    let mut next_id = nc0;

    grid[0][0] = vec![true; nc0];
    for x in 1..count_x {
        let mut state = grid[x - 1][0].clone();
        let born = evolve_step(&mut state, &mut next_id, p_death_x, births_x, rng);
        state.resize(state.len() + born.len(), true);
        grid[x][0] = state;
    }
    for column in grid.iter_mut() {
        for y in 1..count_y {
            let mut state = column[y - 1].clone();
            let born = evolve_step(&mut state, &mut next_id, p_death_y, births_y, rng);
            state.resize(state.len() + born.len(), true);
            column[y] = state;
        }
    }

    let n_clusters = next_id;
    let mut data = vec![false; count_x * count_y * n_clusters];
    for (x, column) in grid.iter().enumerate() {
        for (y, state) in column.iter().enumerate() {
            let base = (x * count_y + y) * n_clusters;
            for (id, vis) in state.iter().enumerate() {
                data[base + id] = *vis;
            }
        }
    }
    Ok(VisibilityTensor { count_x, count_y, n_clusters, data })
}

/// Draw scatterer positions for one cluster side.
///
/// Positions are sampled with independent per-axis normal spreads in the
/// cluster's local frame, rotated into the global frame, and translated by
/// the cluster center.
pub fn sample_scatterers(
    center: Vec3,
    sigma: [f64; 3],
    rotation: &RotationAngles,
    cluster_id: usize,
    count: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Scatterer>> {
    if sigma.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::arg(format!("scatterer spreads must be > 0, got {sigma:?}")));
    }
    let r = rotation_matrix(rotation);
    let mut out = Vec::with_capacity(count);
    for ray in 0..count {
        let local = Vec3::new(
            sigma[0] * rng.sample::<f64, _>(StandardNormal),
            sigma[1] * rng.sample::<f64, _>(StandardNormal),
            sigma[2] * rng.sample::<f64, _>(StandardNormal),
        );
        out.push(Scatterer { position: center + lcs_to_gcs(local, &r), cluster: cluster_id, ray });
    }
    Ok(out)
}

/// Draw one virtual-link delay: an exponential variate with the given rate
/// plus the deterministic flight time over the inter-scatterer distance.
pub fn virtual_link_delay(rate: f64, bounce_distance: f64, rng: &mut impl Rng) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::arg(format!("virtual-link delay rate must be > 0, got {rate}")));
    }
    if !(bounce_distance >= 0.0) {
        return Err(Error::arg(format!(
            "inter-scatterer distance must be >= 0, got {bounce_distance}"
        )));
    }
    let tau_link = Exp::new(rate).expect("positive rate").sample(rng);
    Ok(tau_link + bounce_distance / SPEED_OF_LIGHT)
}
