//! Simulated and analytical channel statistics: time autocorrelation,
//! spatial cross-correlation, and RMS delay spread with its empirical
//! CDF.
//!
//! "Simulated" curves are ensemble averages over members that share one
//! scatterer snapshot and redraw only the random virtual-link delays
//! ([`Link::member_link_delays`]).  "Analytical" curves evaluate the
//! closed-form ray sums on the same snapshot.  The two estimate the same
//! quantity: the same-ray terms of the ensemble average match the
//! analytical sum exactly, because each ray's virtual delay is common to
//! both probe points and cancels, while cross-ray terms carry a random
//! carrier-scale phase and average out as `1/sqrt(ensemble)`.
//!
//! Every ensemble reduction is a parallel map over members followed by an
//! index-ordered sequential sum, so results are bit-identical regardless
//! of the worker count.

use std::cmp::Ordering;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::link::Link;
use crate::SPEED_OF_LIGHT;

/// Probe context attached to a correlation curve: where the curve was
/// measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveMeta {
    /// Reference time the probe is anchored at, seconds.
    pub t: f64,
    /// Measurement frequency the tap sum `h(t, f)` is evaluated at, Hz
    /// (0 probes the plain coherent sum).
    pub f: f64,
    /// Cluster restriction the scattered part was computed under, if any.
    pub cluster: Option<usize>,
}

/// One correlation curve over a lag axis (seconds for time
/// autocorrelation, meters for spatial cross-correlation).
///
/// `raw` holds the estimator output as-is; `normalized` divides by the
/// zero-lag value, which both estimators produce as a real, positive
/// mean power (stored in `zero_lag`).
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationCurve {
    pub lags: Vec<f64>,
    pub raw: Vec<Complex64>,
    pub normalized: Vec<Complex64>,
    pub zero_lag: f64,
    pub meta: CurveMeta,
}

impl CorrelationCurve {
    /// Wrap an estimator output.  The first lag must be exactly zero and
    /// the value there real (up to roundoff) and positive; it becomes the
    /// normalization.
    pub fn from_raw(lags: Vec<f64>, raw: Vec<Complex64>, meta: CurveMeta) -> Result<Self> {
        if lags.is_empty() || raw.len() != lags.len() {
            return Err(Error::arg(format!(
                "lag grid ({}) and values ({}) must be non-empty and equal-length",
                lags.len(),
                raw.len()
            )));
        }
        check_lags(&lags)?;
        let z = raw[0];
        if !(z.re > 0.0) || z.im.abs() > 1e-9 * z.re {
            return Err(Error::arg(format!("zero-lag value must be real and positive, got {z}")));
        }
        let zero_lag = z.re;
        let normalized = raw.iter().map(|v| v / zero_lag).collect();
        Ok(Self { lags, raw, normalized, zero_lag, meta })
    }

    pub fn len(&self) -> usize {
        self.lags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lags.is_empty()
    }

    /// Magnitudes of the normalized curve.
    pub fn magnitudes(&self) -> Vec<f64> {
        self.normalized.iter().map(|v| v.norm()).collect()
    }

    /// Pointwise product of two curves on the same lag grid and probe:
    /// the correlation of a channel that is the product of two
    /// statistically independent factors (a two-hop cascade).
    pub fn pointwise_product(&self, other: &Self) -> Result<Self> {
        self.check_same_probe(other)?;
        let raw = self.raw.iter().zip(&other.raw).map(|(a, b)| a * b).collect();
        Self::from_raw(self.lags.clone(), raw, self.merged_meta(other))
    }

    fn check_same_probe(&self, other: &Self) -> Result<()> {
        if self.lags != other.lags {
            return Err(Error::arg("curves are on different lag grids"));
        }
        if self.meta.t != other.meta.t || self.meta.f != other.meta.f {
            return Err(Error::arg("curves probe different (t, f) points"));
        }
        Ok(())
    }

    fn merged_meta(&self, other: &Self) -> CurveMeta {
        let cluster = match (self.meta.cluster, other.meta.cluster) {
            (a, b) if a == b => a,
            (Some(a), None) => Some(a),
            (None, Some(b)) => Some(b),
            _ => None,
        };
        CurveMeta { cluster, ..self.meta }
    }
}

/// Rician power weights `(K/(K+1), 1/(K+1))`; an infinite factor selects
/// the pure line-of-sight limit.
fn rician_power_weights(rician_k: f64) -> (f64, f64) {
    if rician_k.is_infinite() {
        (1.0, 0.0)
    } else {
        (rician_k / (rician_k + 1.0), 1.0 / (rician_k + 1.0))
    }
}

/// Amplitude weights applied to the line-of-sight and scattered parts of
/// a member channel.  Mirrors the realization path: the scattered part is
/// always scaled by `sqrt(1/(K+1))`, the line-of-sight weight applies
/// only when the link has one.
fn rician_amplitude_weights(rician_k: f64, has_los: bool) -> (f64, f64) {
    let (pl, pn) = rician_power_weights(rician_k);
    (if has_los { pl.sqrt() } else { 0.0 }, pn.sqrt())
}

/// Combine a line-of-sight and a scattered correlation curve with the
/// Rician power weights `K/(K+1)` and `1/(K+1)`.  `K = +inf` selects the
/// pure line-of-sight curve.
pub fn time_acf_rician(
    los: &CorrelationCurve,
    nlos: &CorrelationCurve,
    rician_k: f64,
) -> Result<CorrelationCurve> {
    if !(rician_k >= 0.0) {
        return Err(Error::arg(format!("Rician factor must be >= 0, got {rician_k}")));
    }
    los.check_same_probe(nlos)?;
    let (w_los, w_nlos) = rician_power_weights(rician_k);
    let raw = los.raw.iter().zip(&nlos.raw).map(|(l, n)| w_los * l + w_nlos * n).collect();
    CorrelationCurve::from_raw(los.lags.clone(), raw, los.merged_meta(nlos))
}

/// One scattered ray's term in an estimator: identity, power and the
/// geometric quantities both estimator kinds need.
#[derive(Debug, Clone, Copy)]
struct RayTerm {
    cluster: usize,
    ray: usize,
    power: f64,
    amplitude: f64,
    det_delay: f64,
    path_distance: f64,
}

/// All visible rays of one element pair at one instant, sorted by
/// (cluster id, ray index).
struct RayTable {
    terms: Vec<RayTerm>,
}

fn ray_table(
    link: &Link,
    elem_a: usize,
    elem_z: usize,
    t: f64,
    cluster: Option<usize>,
) -> Result<RayTable> {
    let samples = link.ray_geometry(elem_a, elem_z, t, cluster)?;
    let mut terms = Vec::new();
    for s in &samples {
        for m in 0..s.powers.len() {
            terms.push(RayTerm {
                cluster: s.cluster,
                ray: m,
                power: s.powers[m],
                amplitude: s.powers[m].sqrt(),
                det_delay: s.det_delay[m],
                path_distance: s.path_distance[m],
            });
        }
    }
    Ok(RayTable { terms })
}

/// A ray table with the member-independent part of each term baked in:
/// `sqrt(P) * cis(k * deterministic delay)` with `k = 2pi (f_c - f)`.
struct PreparedTable {
    base: Vec<(usize, usize, Complex64)>,
}

impl PreparedTable {
    fn new(table: &RayTable, k: f64) -> Self {
        let base = table
            .terms
            .iter()
            .map(|term| {
                (
                    term.cluster,
                    term.ray,
                    term.amplitude * Complex64::from_polar(1.0, k * term.det_delay),
                )
            })
            .collect();
        PreparedTable { base }
    }

    /// Member value: sum of base terms rotated by that member's random
    /// virtual-delay phasors.
    fn eval(&self, phasors: &[Vec<Complex64>]) -> Complex64 {
        self.base.iter().map(|&(c, m, b)| b * phasors[c][m]).sum()
    }
}

/// Clusters referenced by any of the tables, as a lookup mask.
fn needed_clusters(n_clusters: usize, tables: &[RayTable]) -> Vec<bool> {
    let mut needed = vec![false; n_clusters];
    for table in tables {
        for term in &table.terms {
            needed[term.cluster] = true;
        }
    }
    needed
}

/// Per-member random rotation of every needed ray, `cis(k * link delay)`,
/// laid out `[cluster][ray]` to mirror [`Link::member_link_delays`].
fn member_ray_phasors(link: &Link, member: u32, k: f64, needed: &[bool]) -> Vec<Vec<Complex64>> {
    link.member_link_delays(member)
        .iter()
        .enumerate()
        .map(|(c, delays)| {
            if needed[c] {
                delays.iter().map(|&d| Complex64::from_polar(1.0, k * d)).collect()
            } else {
                Vec::new()
            }
        })
        .collect()
}

/// Correlate two ray tables: sum over rays present in both of
/// `sqrt(P) sqrt(P') cis(kd (d - d'))` with `kd = 2pi (f_c - f) / c`.
/// Tables are merge-joined on (cluster, ray), so rays invisible to one
/// side contribute nothing.
fn correlate_tables(a: &RayTable, b: &RayTable, kd: f64) -> Complex64 {
    let mut sum = Complex64::ZERO;
    let (mut i, mut j) = (0, 0);
    while i < a.terms.len() && j < b.terms.len() {
        let ta = a.terms[i];
        let tb = b.terms[j];
        match (ta.cluster, ta.ray).cmp(&(tb.cluster, tb.ray)) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                sum += ta.amplitude
                    * tb.amplitude
                    * Complex64::from_polar(1.0, kd * (ta.path_distance - tb.path_distance));
                i += 1;
                j += 1;
            }
        }
    }
    sum
}

fn check_lags(lags: &[f64]) -> Result<()> {
    if lags.is_empty() {
        return Err(Error::arg("lag grid is empty"));
    }
    if lags[0] != 0.0 {
        return Err(Error::arg(format!(
            "lag grid must start at 0 (the normalization point), got {}",
            lags[0]
        )));
    }
    if !lags.iter().all(|l| l.is_finite()) {
        return Err(Error::arg("lag grid contains a non-finite value"));
    }
    Ok(())
}

fn check_ensemble(ensemble: usize) -> Result<()> {
    // A single member is degenerate but well defined (the estimator
    // variance is undefined); callers may warn.  Only an empty ensemble
    // has no value at all.
    if ensemble == 0 {
        return Err(Error::arg("ensemble cannot be empty"));
    }
    Ok(())
}

/// Parallel map over ensemble members followed by an index-ordered
/// sequential mean, so the result does not depend on worker count or
/// scheduling.
fn ensemble_mean_products(
    ensemble: usize,
    len: usize,
    member: impl Fn(u32) -> Vec<Complex64> + Sync + Send,
) -> Vec<Complex64> {
    let rows: Vec<Vec<Complex64>> = (0..ensemble as u32).into_par_iter().map(member).collect();
    let mut acc = vec![Complex64::ZERO; len];
    for row in &rows {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    let n = ensemble as f64;
    for a in acc.iter_mut() {
        *a /= n;
    }
    acc
}

/// Ensemble-averaged time autocorrelation of one link's sub-channel
/// between elements `elem_a` and `elem_z`:
/// `E{ h(t, f) h*(t + lag, f) }` over members that redraw the virtual
/// delays.  The member channel carries the link's line-of-sight component
/// with its Rician weights whenever the link is configured with one;
/// `cluster` optionally restricts the scattered part to one cluster id.
/// The lag grid must start at 0, the normalization point.
#[allow(clippy::too_many_arguments)]
pub fn time_acf_sim(
    link: &Link,
    elem_a: usize,
    elem_z: usize,
    cluster: Option<usize>,
    t: f64,
    f: f64,
    lags: &[f64],
    ensemble: usize,
) -> Result<CorrelationCurve> {
    check_lags(lags)?;
    check_ensemble(ensemble)?;
    let k = TAU * (link.geo.carrier_hz - f);
    let tables: Vec<RayTable> = lags
        .iter()
        .map(|&lag| ray_table(link, elem_a, elem_z, t + lag, cluster))
        .collect::<Result<_>>()?;
    let prepared: Vec<PreparedTable> =
        tables.iter().map(|table| PreparedTable::new(table, k)).collect();
    let needed = needed_clusters(link.n_clusters(), &tables);
    let (w_los, w_nlos) = rician_amplitude_weights(link.geo.rician_k, link.geo.los);
    let los: Vec<Complex64> = if link.geo.los {
        lags.iter()
            .map(|&lag| {
                let tau = link.los_distance(elem_a, elem_z, t + lag)? / SPEED_OF_LIGHT;
                Ok(Complex64::from_polar(w_los, k * tau))
            })
            .collect::<Result<_>>()?
    } else {
        vec![Complex64::ZERO; lags.len()]
    };
    if tables[0].terms.is_empty() && los[0].norm() == 0.0 {
        return Err(Error::arg("the probed element pair has zero channel power at the reference"));
    }

    let raw = ensemble_mean_products(ensemble, lags.len(), |member| {
        let phasors = member_ray_phasors(link, member, k, &needed);
        let values: Vec<Complex64> = prepared
            .iter()
            .zip(&los)
            .map(|(table, &l)| l + w_nlos * table.eval(&phasors))
            .collect();
        values.iter().map(|v| values[0] * v.conj()).collect()
    });
    CorrelationCurve::from_raw(lags.to_vec(), raw, CurveMeta { t, f, cluster })
}

/// Closed-form time autocorrelation of one link's scattered sub-channel
/// on the frozen snapshot: sum over visible rays of
/// `sqrt(P_m(t) P_m(t+lag)) cis(kd (d_m(t) - d_m(t+lag)))` with
/// `kd = 2pi (f_c - f) / c`, `d_m` the ray's two-leg path distance and
/// `P_m` its normalized power at each instant.
pub fn time_acf_ana(
    link: &Link,
    elem_a: usize,
    elem_z: usize,
    cluster: Option<usize>,
    t: f64,
    f: f64,
    lags: &[f64],
) -> Result<CorrelationCurve> {
    check_lags(lags)?;
    let kd = TAU * (link.geo.carrier_hz - f) / SPEED_OF_LIGHT;
    let base = ray_table(link, elem_a, elem_z, t, cluster)?;
    if base.terms.is_empty() {
        return Err(Error::arg("no visible scattered ray for the probed element pair"));
    }
    let raw: Vec<Complex64> = lags
        .iter()
        .map(|&lag| {
            let shifted = ray_table(link, elem_a, elem_z, t + lag, cluster)?;
            Ok(correlate_tables(&base, &shifted, kd))
        })
        .collect::<Result<_>>()?;
    CorrelationCurve::from_raw(lags.to_vec(), raw, CurveMeta { t, f, cluster })
}

/// Closed-form time autocorrelation of one link's line-of-sight component
/// alone: a unit-modulus phasor at the direct-path distance difference.
pub fn time_acf_los(
    link: &Link,
    elem_a: usize,
    elem_z: usize,
    t: f64,
    f: f64,
    lags: &[f64],
) -> Result<CorrelationCurve> {
    check_lags(lags)?;
    let kd = TAU * (link.geo.carrier_hz - f) / SPEED_OF_LIGHT;
    let d0 = link.los_distance(elem_a, elem_z, t)?;
    let raw: Vec<Complex64> = lags
        .iter()
        .map(|&lag| {
            let d = link.los_distance(elem_a, elem_z, t + lag)?;
            Ok(Complex64::from_polar(1.0, kd * (d0 - d)))
        })
        .collect::<Result<_>>()?;
    CorrelationCurve::from_raw(lags.to_vec(), raw, CurveMeta { t, f, cluster: None })
}

/// One (BS element, reflecting element, UE element) triple through a
/// two-hop reflected channel: `first_hop` runs BS to surface, with the
/// surface on its Z side, and `second_hop` runs surface to UE, with the
/// surface on its A side.
///
/// The Rician factor applies at the cascade level: the "line of sight" of
/// the composed channel is the unscattered reflection BS -> surface ->
/// UE, and `surface_phase` is the (time-constant) phase shift the
/// reflecting element applies.  The hops' own Rician settings do not
/// enter here.
#[derive(Debug, Clone, Copy)]
pub struct CascadeProbe<'a> {
    pub first_hop: &'a Link,
    pub second_hop: &'a Link,
    pub bs_element: usize,
    pub surface_element: usize,
    pub ue_element: usize,
    /// Cluster id the scattered part of BOTH hops is restricted to, if
    /// any.
    pub cluster: Option<usize>,
    pub rician_k: f64,
    pub surface_phase: f64,
}

impl CascadeProbe<'_> {
    fn validate(&self) -> Result<()> {
        let f1 = self.first_hop.geo.carrier_hz;
        let f2 = self.second_hop.geo.carrier_hz;
        if f1 != f2 {
            return Err(Error::arg(format!(
                "cascade hops are on different carriers: {f1} Hz vs {f2} Hz"
            )));
        }
        if self.first_hop.link_id() == self.second_hop.link_id() {
            return Err(Error::arg(
                "cascade hops share a stream identity; their random delays would be \
                 fully correlated",
            ));
        }
        if !(self.rician_k >= 0.0) {
            return Err(Error::arg(format!("Rician factor must be >= 0, got {}", self.rician_k)));
        }
        Ok(())
    }

    fn hop_distance_sum(&self, t: f64) -> Result<f64> {
        Ok(self.first_hop.los_distance(self.bs_element, self.surface_element, t)?
            + self.second_hop.los_distance(self.surface_element, self.ue_element, t)?)
    }
}

/// Ensemble-averaged time autocorrelation of the two-hop reflected
/// channel at one element triple.  Per member, the hop coefficients come
/// from the hops' independent virtual-delay streams; they are multiplied
/// together with the surface phase, Rician-weighted against the
/// unscattered reflection, and the lag products are averaged as in
/// [`time_acf_sim`].
pub fn cascade_acf_sim(
    probe: &CascadeProbe,
    t: f64,
    f: f64,
    lags: &[f64],
    ensemble: usize,
) -> Result<CorrelationCurve> {
    probe.validate()?;
    check_lags(lags)?;
    check_ensemble(ensemble)?;
    let hop1 = probe.first_hop;
    let hop2 = probe.second_hop;
    let k = TAU * (hop1.geo.carrier_hz - f);
    let tables1: Vec<RayTable> = lags
        .iter()
        .map(|&lag| ray_table(hop1, probe.bs_element, probe.surface_element, t + lag, probe.cluster))
        .collect::<Result<_>>()?;
    let tables2: Vec<RayTable> = lags
        .iter()
        .map(|&lag| ray_table(hop2, probe.surface_element, probe.ue_element, t + lag, probe.cluster))
        .collect::<Result<_>>()?;
    let prepared1: Vec<PreparedTable> =
        tables1.iter().map(|table| PreparedTable::new(table, k)).collect();
    let prepared2: Vec<PreparedTable> =
        tables2.iter().map(|table| PreparedTable::new(table, k)).collect();
    let needed1 = needed_clusters(hop1.n_clusters(), &tables1);
    let needed2 = needed_clusters(hop2.n_clusters(), &tables2);
    let (w_los, w_nlos) = rician_amplitude_weights(probe.rician_k, true);
    let surface = Complex64::from_polar(1.0, probe.surface_phase);
    let los: Vec<Complex64> = lags
        .iter()
        .map(|&lag| {
            let d = probe.hop_distance_sum(t + lag)?;
            Ok(Complex64::from_polar(w_los, k * d / SPEED_OF_LIGHT))
        })
        .collect::<Result<_>>()?;
    if (tables1[0].terms.is_empty() || tables2[0].terms.is_empty()) && los[0].norm() == 0.0 {
        return Err(Error::arg("the probed element triple has zero channel power at the reference"));
    }

    let raw = ensemble_mean_products(ensemble, lags.len(), |member| {
        let phasors1 = member_ray_phasors(hop1, member, k, &needed1);
        let phasors2 = member_ray_phasors(hop2, member, k, &needed2);
        let values: Vec<Complex64> = (0..lags.len())
            .map(|l| {
                surface * (los[l] + w_nlos * prepared1[l].eval(&phasors1) * prepared2[l].eval(&phasors2))
            })
            .collect();
        values.iter().map(|v| values[0] * v.conj()).collect()
    });
    CorrelationCurve::from_raw(lags.to_vec(), raw, CurveMeta { t, f, cluster: probe.cluster })
}

/// Closed-form time autocorrelation of the two-hop reflected channel:
/// the product of the hops' scattered-curve sums, Rician-combined with
/// the product of their line-of-sight curves.  A time-constant surface
/// phase contributes a unit factor and drops out.
pub fn cascade_acf_ana(
    probe: &CascadeProbe,
    t: f64,
    f: f64,
    lags: &[f64],
) -> Result<CorrelationCurve> {
    probe.validate()?;
    let nlos1 = time_acf_ana(
        probe.first_hop,
        probe.bs_element,
        probe.surface_element,
        probe.cluster,
        t,
        f,
        lags,
    )?;
    let nlos2 = time_acf_ana(
        probe.second_hop,
        probe.surface_element,
        probe.ue_element,
        probe.cluster,
        t,
        f,
        lags,
    )?;
    let nlos = nlos1.pointwise_product(&nlos2)?;
    let los1 = time_acf_los(probe.first_hop, probe.bs_element, probe.surface_element, t, f, lags)?;
    let los2 = time_acf_los(probe.second_hop, probe.surface_element, probe.ue_element, t, f, lags)?;
    let los = los1.pointwise_product(&los2)?;
    time_acf_rician(&los, &nlos, probe.rician_k)
}

/// Which end of a link a spatial sweep walks along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepSide {
    A,
    Z,
}

fn sweep_pair(side: SweepSide, fixed: usize, swept: usize) -> (usize, usize) {
    match side {
        SweepSide::A => (swept, fixed),
        SweepSide::Z => (fixed, swept),
    }
}

/// Element separations (meters) between `base` and the `steps`
/// consecutive elements starting there, on the chosen side's array.
fn sweep_offsets(link: &Link, side: SweepSide, base: usize, steps: usize) -> Result<Vec<f64>> {
    let array = match side {
        SweepSide::A => &link.geo.end_a.array,
        SweepSide::Z => &link.geo.end_z.array,
    };
    if steps == 0 {
        return Err(Error::arg("a spatial sweep needs at least the zero separation"));
    }
    if base + steps > array.len() {
        return Err(Error::IndexOutOfRange(format!(
            "sweep of {steps} elements from element {base} exceeds the {}-element array",
            array.len()
        )));
    }
    let p0 = array.element_position(base)?;
    (base..base + steps).map(|i| Ok(array.element_position(i)?.distance(p0))).collect()
}

/// Ensemble-averaged spatial cross-correlation of the scattered
/// sub-channel at one instant: `E{ h_base(t, f) h*_swept(t, f) }` with
/// the swept element walking `steps` consecutive elements from
/// `base_element` along `side`'s array, the other end fixed at
/// `fixed_element`.  The lag axis is the element separation in meters.
/// This measures the scattered field's correlation; line-of-sight
/// components are outside its scope.
#[allow(clippy::too_many_arguments)]
pub fn spatial_ccf_sim(
    link: &Link,
    side: SweepSide,
    fixed_element: usize,
    base_element: usize,
    steps: usize,
    cluster: Option<usize>,
    t: f64,
    f: f64,
    ensemble: usize,
) -> Result<CorrelationCurve> {
    check_ensemble(ensemble)?;
    let offsets = sweep_offsets(link, side, base_element, steps)?;
    let k = TAU * (link.geo.carrier_hz - f);
    let tables: Vec<RayTable> = (0..steps)
        .map(|s| {
            let (a, z) = sweep_pair(side, fixed_element, base_element + s);
            ray_table(link, a, z, t, cluster)
        })
        .collect::<Result<_>>()?;
    if tables[0].terms.is_empty() {
        return Err(Error::arg("no visible scattered ray at the sweep's base element pair"));
    }
    let prepared: Vec<PreparedTable> =
        tables.iter().map(|table| PreparedTable::new(table, k)).collect();
    let needed = needed_clusters(link.n_clusters(), &tables);

    let raw = ensemble_mean_products(ensemble, steps, |member| {
        let phasors = member_ray_phasors(link, member, k, &needed);
        let values: Vec<Complex64> = prepared.iter().map(|table| table.eval(&phasors)).collect();
        values.iter().map(|v| values[0] * v.conj()).collect()
    });
    CorrelationCurve::from_raw(offsets, raw, CurveMeta { t, f, cluster })
}

/// Closed-form spatial cross-correlation on the frozen snapshot: for each
/// swept element, the merge-joined ray sum
/// `sqrt(P_base,m P_swept,m) cis(kd (d_base,m - d_swept,m))` over rays
/// visible to both element pairs.
#[allow(clippy::too_many_arguments)]
pub fn spatial_ccf_ana(
    link: &Link,
    side: SweepSide,
    fixed_element: usize,
    base_element: usize,
    steps: usize,
    cluster: Option<usize>,
    t: f64,
    f: f64,
) -> Result<CorrelationCurve> {
    let offsets = sweep_offsets(link, side, base_element, steps)?;
    let kd = TAU * (link.geo.carrier_hz - f) / SPEED_OF_LIGHT;
    let (a0, z0) = sweep_pair(side, fixed_element, base_element);
    let base = ray_table(link, a0, z0, t, cluster)?;
    if base.terms.is_empty() {
        return Err(Error::arg("no visible scattered ray at the sweep's base element pair"));
    }
    let raw: Vec<Complex64> = (0..steps)
        .map(|s| {
            let (a, z) = sweep_pair(side, fixed_element, base_element + s);
            let shifted = ray_table(link, a, z, t, cluster)?;
            Ok(correlate_tables(&base, &shifted, kd))
        })
        .collect::<Result<_>>()?;
    CorrelationCurve::from_raw(offsets, raw, CurveMeta { t, f, cluster })
}

/// Power-weighted RMS spread of a delay profile, seconds.  `taps` holds
/// `(power, delay)` pairs; powers are normalized internally, so the
/// result is invariant under uniform power rescaling, and the centered
/// second moment makes it invariant under a common delay offset.
pub fn rms_delay_spread(taps: &[(f64, f64)]) -> Result<f64> {
    if taps.is_empty() {
        return Err(Error::arg("delay profile has no taps"));
    }
    let mut total = 0.0;
    for &(p, tau) in taps {
        if !p.is_finite() || p < 0.0 || !tau.is_finite() {
            return Err(Error::arg(format!("invalid tap (power {p}, delay {tau})")));
        }
        total += p;
    }
    if total <= 0.0 {
        return Err(Error::arg("delay profile has zero total power"));
    }
    // Normalize the weights before forming the moments: a lone tap then
    // has weight exactly 1 and spread exactly 0, and equal taps get an
    // exactly representable 1/n weight.
    let weights: Vec<f64> = taps.iter().map(|&(p, _)| p / total).collect();
    let mean = weights.iter().zip(taps).map(|(w, &(_, tau))| w * tau).sum::<f64>();
    let var = weights
        .iter()
        .zip(taps)
        .map(|(w, &(_, tau))| w * (tau - mean) * (tau - mean))
        .sum::<f64>();
    Ok(var.max(0.0).sqrt())
}

/// RMS spread of one link's scattered two-leg flight times at `t` for an
/// element pair: powers from the delay profile, delays the path distance
/// over c.  The intra-cluster bounce leg and the random virtual-link
/// delay are not part of this measure.
pub fn link_delay_spread(
    link: &Link,
    elem_a: usize,
    elem_z: usize,
    t: f64,
    cluster: Option<usize>,
) -> Result<f64> {
    let table = ray_table(link, elem_a, elem_z, t, cluster)?;
    if table.terms.is_empty() {
        return Err(Error::arg("no visible scattered ray for the probed element pair"));
    }
    let taps: Vec<(f64, f64)> =
        table.terms.iter().map(|term| (term.power, term.path_distance / SPEED_OF_LIGHT)).collect();
    rms_delay_spread(&taps)
}

/// Dispersion measure of a two-hop cascade: the per-hop RMS delay
/// spreads added together.
pub fn cascaded_delay_spread(first_hop: f64, second_hop: f64) -> f64 {
    first_hop + second_hop
}

/// One RMS delay-spread draw, labeled by the scenario it came from and
/// the snapshot instance that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct DelaySpreadSample {
    /// RMS delay spread, seconds (finite, non-negative).
    pub ds: f64,
    /// Scenario label the sample belongs to.
    pub scenario: String,
    /// Snapshot instance (realization index) the sample came from.
    pub instance: u32,
}

/// Empirical distribution of a sample set: sorted values with the step
/// CDF `F(x) = #{samples <= x} / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    values: Vec<f64>,
}

impl EmpiricalCdf {
    /// The samples, sorted ascending.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Fraction of samples less than or equal to `x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v <= x) as f64 / self.values.len() as f64
    }

    /// Sample median (midpoint of the two central order statistics for
    /// even counts).
    pub fn median(&self) -> f64 {
        let n = self.values.len();
        if n % 2 == 1 {
            self.values[n / 2]
        } else {
            0.5 * (self.values[n / 2 - 1] + self.values[n / 2])
        }
    }

    /// The CDF's steps as `(value, F(value-rank))` pairs, monotone
    /// non-decreasing and ending at 1.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.values.len() as f64;
        self.values.iter().enumerate().map(move |(i, &v)| (v, (i + 1) as f64 / n))
    }
}

/// Build the empirical CDF of a delay-spread sample set.  Requires at
/// least 100 samples, each finite and non-negative.
pub fn ds_cdf(samples: &[DelaySpreadSample]) -> Result<EmpiricalCdf> {
    if samples.len() < 100 {
        return Err(Error::arg(format!(
            "need at least 100 delay-spread samples for a CDF, got {}",
            samples.len()
        )));
    }
    let mut values = Vec::with_capacity(samples.len());
    for s in samples {
        if !s.ds.is_finite() || s.ds < 0.0 {
            return Err(Error::arg(format!(
                "delay spread must be finite and >= 0, got {} (instance {})",
                s.ds, s.instance
            )));
        }
        values.push(s.ds);
    }
    values.sort_by(f64::total_cmp);
    Ok(EmpiricalCdf { values })
}
