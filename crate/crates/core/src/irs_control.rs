//! Reflection-phase control of the surface, the transmit steering vector,
//! and the cascaded two-hop path gain.
//!
//! Treating the surface as a grid of passive elements, each element delays
//! the incident wave by a programmable phase.  For a single Tx/Rx point
//! pair the received power is
//!
//! ```text
//! P_r = P_t * (dx*dy*λ² / 64π³) * | Σ_xy  e^{-j(2π(r_r + r_t) - λφ)/λ} / (r_r * r_t) |²
//! ```
//!
//! and is maximized by the per-element phase `φ = mod(2π(r_t + r_r)/λ, 2π)`,
//! which cancels the propagation phase of both hops.  Feeding that optimum
//! back into the power expression with unit transmit power yields the
//! cascaded path gain of the reflected link.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::{unit_from_angles, ArrayGeometry, Vec3};

/// Wrap an angle into `[0, 2π)`.
pub fn wrap_phase(phi: f64) -> f64 {
    phi.rem_euclid(TAU)
}

/// Diagonal matrix of unit-modulus reflection coefficients, one per surface
/// element, stored in grid order (`slot = x * count_y + y`, zero-based).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMatrix {
    count_x: usize,
    count_y: usize,
    /// Phases in radians, wrapped to `[0, 2π)`.
    phases: Vec<f64>,
}

impl PhaseMatrix {
    pub fn from_phases(count_x: usize, count_y: usize, phases: Vec<f64>) -> Result<Self> {
        if phases.len() != count_x * count_y {
            return Err(Error::arg(format!(
                "expected {} phases for a {}x{} surface, got {}",
                count_x * count_y,
                count_x,
                count_y,
                phases.len()
            )));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::arg("phase values must be finite"));
        }
        Ok(PhaseMatrix { count_x, count_y, phases: phases.into_iter().map(wrap_phase).collect() })
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.count_x, self.count_y)
    }

    /// Phase of the element at zero-based grid coordinates.
    pub fn phase(&self, x: usize, y: usize) -> f64 {
        self.phases[x * self.count_y + y]
    }

    /// Phase by diagonal slot (zero-based `x * count_y + y`).
    pub fn phase_at(&self, slot: usize) -> f64 {
        self.phases[slot]
    }

    /// `e^{jφ}` for one diagonal slot.
    pub fn coefficient(&self, slot: usize) -> Complex64 {
        Complex64::from_polar(1.0, self.phases[slot])
    }

    /// The full diagonal as a vector of unit-modulus coefficients.
    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.phases.len()).map(|r| self.coefficient(r)).collect()
    }
}

/// Transmit-side steering weights pointing the array's peak radiation in a
/// given direction; every entry has unit modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub coefficients: Vec<Complex64>,
    /// Steered azimuth, radians.
    pub azimuth: f64,
    /// Steered elevation, radians.
    pub elevation: f64,
    /// Doppler shift applied as a common rotating phase, Hz.
    pub doppler_hz: f64,
}

impl SteeringVector {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }
}

/// Point-to-point view of the surface used by the power and phase
/// computations: per-element distances to the transmit and receive points,
/// the element spacings, and the carrier wavelength.
///
/// Element counts must be even (the summation over the grid assumes
/// symmetric halves); a count of exactly 1 is also accepted as a
/// single-element diagnostic case.
#[derive(Debug, Clone, PartialEq)]
pub struct IrsGeometryView {
    count_x: usize,
    count_y: usize,
    /// Distance from the Tx point to each element, meters, slot-ordered.
    tx_dist: Vec<f64>,
    /// Distance from each element to the Rx point, meters, slot-ordered.
    rx_dist: Vec<f64>,
    /// Element spacing along the surface's x extent, meters.
    pub spacing_x: f64,
    /// Element spacing along the surface's y extent, meters.
    pub spacing_y: f64,
    /// Carrier wavelength, meters.
    pub wavelength: f64,
}

fn check_count(label: &str, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::scenario(format!("surface {label} element count must be >= 1")));
    }
    if n != 1 && !n.is_multiple_of(2) {
        return Err(Error::scenario(format!(
            "surface {label} element count must be even (or exactly 1), got {n}"
        )));
    }
    Ok(())
}

impl IrsGeometryView {
    pub fn new(
        count_x: usize,
        count_y: usize,
        tx_dist: Vec<f64>,
        rx_dist: Vec<f64>,
        spacing_x: f64,
        spacing_y: f64,
        wavelength: f64,
    ) -> Result<Self> {
        check_count("x", count_x)?;
        check_count("y", count_y)?;
        let n = count_x * count_y;
        if tx_dist.len() != n || rx_dist.len() != n {
            return Err(Error::arg(format!(
                "expected {n} per-element distances, got {} (tx) / {} (rx)",
                tx_dist.len(),
                rx_dist.len()
            )));
        }
        if tx_dist.iter().chain(&rx_dist).any(|d| !(*d > 0.0)) {
            return Err(Error::arg("element distances must be > 0"));
        }
        if !(spacing_x > 0.0 && spacing_y > 0.0) {
            return Err(Error::arg("element spacings must be > 0"));
        }
        if !(wavelength > 0.0) {
            return Err(Error::arg("wavelength must be > 0"));
        }
        Ok(IrsGeometryView { count_x, count_y, tx_dist, rx_dist, spacing_x, spacing_y, wavelength })
    }

    /// Build the view from a planar array plus the Tx and Rx point
    /// positions, measuring the per-element distances geometrically.
    pub fn from_geometry(
        surface: &ArrayGeometry,
        tx: Vec3,
        rx: Vec3,
        wavelength: f64,
    ) -> Result<Self> {
        let ArrayGeometry::Planar { count_x, count_y, spacing_x, spacing_y, .. } = surface else {
            return Err(Error::arg("surface view requires a planar array"));
        };
        let n = surface.len();
        let mut tx_dist = Vec::with_capacity(n);
        let mut rx_dist = Vec::with_capacity(n);
        for slot in 0..n {
            let p = surface.element_position(slot)?;
            tx_dist.push(p.distance(tx));
            rx_dist.push(p.distance(rx));
        }
        IrsGeometryView::new(
            *count_x, *count_y, tx_dist, rx_dist, *spacing_x, *spacing_y, wavelength,
        )
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.count_x, self.count_y)
    }

    pub fn len(&self) -> usize {
        self.tx_dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tx_dist.is_empty()
    }

    /// Tx-side distance of a diagonal slot.
    pub fn tx_dist_at(&self, slot: usize) -> f64 {
        self.tx_dist[slot]
    }

    /// Rx-side distance of a diagonal slot.
    pub fn rx_dist_at(&self, slot: usize) -> f64 {
        self.rx_dist[slot]
    }
}

/// Reflection phase that maximizes the received power for one element:
/// `mod(2π(r_t + r_r)/λ, 2π)`.
pub fn optimal_phase(r_t: f64, r_r: f64, wavelength: f64) -> Result<f64> {
    if !(r_t > 0.0 && r_r > 0.0) {
        return Err(Error::arg(format!("element distances must be > 0, got ({r_t}, {r_r})")));
    }
    if !(wavelength > 0.0) {
        return Err(Error::arg(format!("wavelength must be > 0, got {wavelength}")));
    }
    Ok(wrap_phase(TAU * (r_t + r_r) / wavelength))
}

/// Optimal phase for every element of the view, in diagonal order.
pub fn build_phase_matrix(view: &IrsGeometryView) -> Result<PhaseMatrix> {
    let phases = (0..view.len())
        .map(|slot| optimal_phase(view.tx_dist_at(slot), view.rx_dist_at(slot), view.wavelength))
        .collect::<Result<Vec<_>>>()?;
    let (cx, cy) = view.dims();
    PhaseMatrix::from_phases(cx, cy, phases)
}

/// Received power for a transmit power and a reflection phase setting.
///
/// Each element contributes a phasor `e^{-j(2π(r_r + r_t) - λφ)/λ} / (r_r r_t)`;
/// the power is the squared magnitude of the coherent sum scaled by
/// `P_t * dx * dy * λ² / 64π³`.
pub fn received_power(p_t: f64, view: &IrsGeometryView, phases: &PhaseMatrix) -> Result<f64> {
    if !(p_t >= 0.0) {
        return Err(Error::arg(format!("transmit power must be >= 0, got {p_t}")));
    }
    if phases.len() != view.len() || phases.dims() != view.dims() {
        return Err(Error::arg(format!(
            "phase matrix dims {:?} do not match surface dims {:?}",
            phases.dims(),
            view.dims()
        )));
    }
    let lambda = view.wavelength;
    let mut sum = Complex64::ZERO;
    for slot in 0..view.len() {
        let r_t = view.tx_dist_at(slot);
        let r_r = view.rx_dist_at(slot);
        let arg = -(TAU * (r_r + r_t) - lambda * phases.phase_at(slot)) / lambda;
        sum += Complex64::from_polar(1.0 / (r_r * r_t), arg);
    }
    let scale = view.spacing_x * view.spacing_y * lambda * lambda / (64.0 * std::f64::consts::PI.powi(3));
    Ok(p_t * scale * sum.norm_sqr())
}

/// End-to-end path gain of the reflected Tx->surface->Rx link: the received
/// power for unit transmit power under the optimal phase setting.
pub fn cascaded_path_loss(view: &IrsGeometryView) -> Result<f64> {
    let phases = build_phase_matrix(view)?;
    received_power(1.0, view, &phases)
}

/// Default steering anchor point: half a wavelength along each coordinate.
pub fn default_steering_anchor(wavelength: f64) -> Vec3 {
    Vec3::new(wavelength / 2.0, wavelength / 2.0, wavelength / 2.0)
}

/// Steering weights for an array pointed at direction `(azimuth, elevation)`.
///
/// Element `m` gets `exp(j 2π/λ ⟨e(Ω), r_m⟩ + j 2π ν t)` where `r_m` is the
/// element's position relative to `anchor` and `e(Ω)` is the unit vector of
/// the steered direction.  The anchor only contributes a common phase; use
/// [`default_steering_anchor`] for the conventional half-wavelength offset.
#[allow(clippy::too_many_arguments)]
pub fn steering_vector(
    array: &ArrayGeometry,
    wavelength: f64,
    azimuth: f64,
    elevation: f64,
    doppler_hz: f64,
    t: f64,
    anchor: Vec3,
) -> Result<SteeringVector> {
    if !(wavelength > 0.0) {
        return Err(Error::arg(format!("wavelength must be > 0, got {wavelength}")));
    }
    array.validate()?;
    let e_dir = unit_from_angles(azimuth, elevation);
    let common = TAU * doppler_hz * t;
    let mut coefficients = Vec::with_capacity(array.len());
    for m in 0..array.len() {
        let r_m = array.element_position(m)? - anchor;
        let arg = TAU / wavelength * e_dir.dot(r_m) + common;
        coefficients.push(Complex64::from_polar(1.0, arg));
    }
    Ok(SteeringVector { coefficients, azimuth, elevation, doppler_hz })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const PI: f64 = std::f64::consts::PI;

    fn uniform_view(n_x: usize, n_y: usize, r_t: f64, r_r: f64, lambda: f64) -> IrsGeometryView {
        let n = n_x * n_y;
        IrsGeometryView::new(
            n_x,
            n_y,
            vec![r_t; n],
            vec![r_r; n],
            lambda / 2.0,
            lambda / 2.0,
            lambda,
        )
        .unwrap()
    }

    #[test]
    fn optimal_phase_whole_wavelength_wraps_to_zero() {
        let lambda = 0.3;
        let phi = optimal_phase(0.5 * lambda, 0.5 * lambda, lambda).unwrap();
        assert_relative_eq!(phi, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn optimal_phase_one_and_a_half_wavelengths_gives_pi() {
        let lambda = 0.3;
        let phi = optimal_phase(0.75 * lambda, 0.75 * lambda, lambda).unwrap();
        assert_relative_eq!(phi, PI, epsilon = 1e-12);
    }

    #[test]
    fn optimal_phase_zeroes_the_summand_phase() {
        // Substituting the optimum back into the per-element phasor must
        // leave zero net phase.  The achievable residual scales with the
        // electrical path length (rounding of arguments ~ path/λ in size),
        // so the short-path loop gets the tight bound.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let lambda = 0.1;
        for _ in 0..200 {
            let r_t: f64 = rng.random_range(0.5..5.0);
            let r_r: f64 = rng.random_range(0.5..5.0);
            let phi = optimal_phase(r_t, r_r, lambda).unwrap();
            let arg = -(TAU * (r_r + r_t) - lambda * phi) / lambda;
            let residual = Complex64::from_polar(1.0, arg);
            assert!(residual.im.abs() < 1e-12, "phase residual {}", residual.im);
            assert!(residual.re > 0.0);
        }
        for _ in 0..200 {
            let r_t: f64 = rng.random_range(1.0..500.0);
            let r_r: f64 = rng.random_range(1.0..500.0);
            let phi = optimal_phase(r_t, r_r, lambda).unwrap();
            let arg = -(TAU * (r_r + r_t) - lambda * phi) / lambda;
            let residual = Complex64::from_polar(1.0, arg);
            assert!(residual.im.abs() < 1e-9, "phase residual {}", residual.im);
            assert!(residual.re > 0.0);
        }
    }

    #[test]
    fn non_positive_inputs_are_rejected() {
        assert!(optimal_phase(0.0, 1.0, 0.1).is_err());
        assert!(optimal_phase(1.0, -1.0, 0.1).is_err());
        assert!(optimal_phase(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn phase_matrix_slot_order_is_y_fastest() {
        // 2x2 grid: one-based element (2,1) lands on one-based diagonal
        // slot 3, i.e. zero-based slot 2.
        let view = IrsGeometryView::new(
            2,
            2,
            vec![1.0, 1.0, 2.0, 1.0],
            vec![1.0, 1.0, 2.0, 1.0],
            0.05,
            0.05,
            0.1,
        )
        .unwrap();
        let pm = build_phase_matrix(&view).unwrap();
        assert_relative_eq!(pm.phase_at(2), pm.phase(1, 0), epsilon = 0.0);
        let expected = optimal_phase(2.0, 2.0, 0.1).unwrap();
        assert_relative_eq!(pm.phase_at(2), expected, epsilon = 1e-12);
    }

    #[test]
    fn equidistant_elements_share_one_phase() {
        let view = uniform_view(2, 2, 40.0, 60.0, 0.1);
        let pm = build_phase_matrix(&view).unwrap();
        for slot in 1..pm.len() {
            assert_relative_eq!(pm.phase_at(slot), pm.phase_at(0), epsilon = 0.0);
        }
    }

    #[test]
    fn all_coefficients_have_unit_modulus() {
        let view = uniform_view(4, 4, 40.0, 60.0, 0.1);
        let pm = build_phase_matrix(&view).unwrap();
        for slot in 0..pm.len() {
            assert_relative_eq!(pm.coefficient(slot).norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_element_power_matches_closed_form() {
        let lambda = 0.12;
        let d = 35.0;
        let view = uniform_view(1, 1, d, d, lambda);
        let pm = build_phase_matrix(&view).unwrap();
        let p_r = received_power(3.0, &view, &pm).unwrap();
        let expected = 3.0 * (lambda / 2.0) * (lambda / 2.0) * lambda * lambda
            / (64.0 * PI.powi(3) * d.powi(4));
        assert_relative_eq!(p_r, expected, max_relative = 1e-12);
    }

    #[test]
    fn zero_transmit_power_receives_nothing() {
        let view = uniform_view(2, 2, 10.0, 20.0, 0.1);
        let pm = build_phase_matrix(&view).unwrap();
        assert_eq!(received_power(0.0, &view, &pm).unwrap(), 0.0);
    }

    #[test]
    fn optimal_beats_exhaustive_quantized_settings_on_2x2() {
        // Distances vary per element so the optimum is non-trivial.
        let lambda = 0.1;
        let tx = vec![10.0, 10.3, 11.1, 10.7];
        let rx = vec![20.2, 19.8, 20.9, 20.4];
        let view =
            IrsGeometryView::new(2, 2, tx, rx, lambda / 2.0, lambda / 2.0, lambda).unwrap();
        let best = cascaded_path_loss(&view).unwrap();
        let levels = [0.0, PI / 2.0, PI, 1.5 * PI];
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let pm = PhaseMatrix::from_phases(
                            2,
                            2,
                            vec![levels[a], levels[b], levels[c], levels[d]],
                        )
                        .unwrap();
                        let p = received_power(1.0, &view, &pm).unwrap();
                        assert!(
                            p <= best * (1.0 + 1e-12),
                            "quantized setting beat the optimum: {p} > {best}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn coherent_equal_distance_sum_scales_as_element_count_squared() {
        let lambda = 0.1;
        let single = cascaded_path_loss(&uniform_view(1, 1, 30.0, 50.0, lambda)).unwrap();
        let quad = cascaded_path_loss(&uniform_view(2, 2, 30.0, 50.0, lambda)).unwrap();
        assert_relative_eq!(quad, 16.0 * single, max_relative = 1e-12);
    }

    #[test]
    fn doubling_both_hop_distances_divides_gain_by_sixteen() {
        let lambda = 0.1;
        let near = cascaded_path_loss(&uniform_view(1, 1, 10.0, 20.0, lambda)).unwrap();
        let far = cascaded_path_loss(&uniform_view(1, 1, 20.0, 40.0, lambda)).unwrap();
        assert_relative_eq!(near, 16.0 * far, max_relative = 1e-12);
    }

    #[test]
    fn received_power_is_invariant_under_element_relabeling() {
        let lambda = 0.1;
        let tx = vec![10.0, 10.3, 11.1, 10.7];
        let rx = vec![20.2, 19.8, 20.9, 20.4];
        let phases = vec![0.3, 1.2, 2.5, 4.0];
        let view = IrsGeometryView::new(2, 2, tx.clone(), rx.clone(), 0.05, 0.05, lambda).unwrap();
        let pm = PhaseMatrix::from_phases(2, 2, phases.clone()).unwrap();
        let p = received_power(1.0, &view, &pm).unwrap();

        // Reverse the element order everywhere; the sum cannot care.
        let view_rev = IrsGeometryView::new(
            2,
            2,
            tx.into_iter().rev().collect(),
            rx.into_iter().rev().collect(),
            0.05,
            0.05,
            lambda,
        )
        .unwrap();
        let pm_rev = PhaseMatrix::from_phases(2, 2, phases.into_iter().rev().collect()).unwrap();
        let p_rev = received_power(1.0, &view_rev, &pm_rev).unwrap();
        assert_relative_eq!(p, p_rev, max_relative = 1e-12);
    }

    #[test]
    fn odd_element_counts_are_rejected_but_one_is_allowed() {
        assert!(uniform_view_result(3, 2).is_err());
        assert!(uniform_view_result(2, 5).is_err());
        assert!(uniform_view_result(1, 1).is_ok());
        assert!(uniform_view_result(1, 4).is_ok());
    }

    fn uniform_view_result(n_x: usize, n_y: usize) -> crate::Result<IrsGeometryView> {
        let n = n_x * n_y;
        IrsGeometryView::new(n_x, n_y, vec![10.0; n], vec![20.0; n], 0.05, 0.05, 0.1)
    }

    #[test]
    fn view_from_geometry_measures_point_distances() {
        let surface = ArrayGeometry::Planar {
            count_x: 2,
            count_y: 2,
            spacing_x: 0.05,
            spacing_y: 0.05,
            x_azimuth: PI / 2.0,
            x_elevation: 0.0,
            y_azimuth: 0.0,
            y_elevation: PI / 2.0,
            reference: Vec3::new(100.0, 0.0, 0.0),
        };
        let tx = Vec3::ZERO;
        let view = IrsGeometryView::from_geometry(&surface, tx, Vec3::new(100.0, -50.0, 0.0), 0.1)
            .unwrap();
        assert_relative_eq!(view.tx_dist_at(0), 100.0, max_relative = 1e-12);
        // Element (1,0) sits 0.05 m along +y from the reference.
        let expected = (100.0f64.powi(2) + 0.05f64.powi(2)).sqrt();
        assert_relative_eq!(view.tx_dist_at(2), expected, max_relative = 1e-12);
    }

    #[test]
    fn steering_coefficients_have_unit_modulus_and_zero_anchor_phase() {
        let array = ArrayGeometry::Linear {
            count: 8,
            spacing: 0.05,
            azimuth: 0.0,
            elevation: 0.0,
            reference: Vec3::ZERO,
        };
        let sv = steering_vector(&array, 0.1, 0.7, 0.2, 0.0, 0.0, Vec3::ZERO).unwrap();
        for c in &sv.coefficients {
            assert_relative_eq!(c.norm(), 1.0, epsilon = 1e-12);
        }
        // Element 0 coincides with the anchor: zero phase.
        assert_relative_eq!(sv.coefficients[0].re, 1.0, epsilon = 1e-12);
        assert_relative_eq!(sv.coefficients[0].im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn broadside_steering_gives_equal_coefficients() {
        // Array along x, steered along y: inner products all vanish.
        let array = ArrayGeometry::Linear {
            count: 6,
            spacing: 0.05,
            azimuth: 0.0,
            elevation: 0.0,
            reference: Vec3::ZERO,
        };
        let sv =
            steering_vector(&array, 0.1, PI / 2.0, 0.0, 0.0, 0.0, Vec3::ZERO).unwrap();
        for c in &sv.coefficients {
            assert_relative_eq!((c - sv.coefficients[0]).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn doppler_term_rotates_all_coefficients_together() {
        let array = ArrayGeometry::Linear {
            count: 4,
            spacing: 0.05,
            azimuth: 0.0,
            elevation: 0.0,
            reference: Vec3::ZERO,
        };
        let still = steering_vector(&array, 0.1, 0.7, 0.1, 0.0, 0.5, Vec3::ZERO).unwrap();
        let shifted = steering_vector(&array, 0.1, 0.7, 0.1, 100.0, 0.5, Vec3::ZERO).unwrap();
        let rot = Complex64::from_polar(1.0, TAU * 100.0 * 0.5);
        for (a, b) in still.coefficients.iter().zip(&shifted.coefficients) {
            assert_relative_eq!((a * rot - b).norm(), 0.0, epsilon = 1e-9);
        }
    }
}
