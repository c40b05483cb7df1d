//! Covariant phase-space observables `G^T`.
//!
//! The Born-rule density of `G^T` in a state `ρ` is the Husimi-type function
//! `h(q,p) = Tr[ρ W(q,p) T W(q,p)*] / 2π`. Its margins are the sharp
//! statistics of `ρ` convolved with `μ_T` and `ν_T`, the position and
//! momentum distributions of `ΠTΠ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::audit::{InputsDigest, Scenario, URReport};
use crate::cvstate::{MixedState, PureState};
use crate::error::{Error, Result};
use crate::measure::{GridSpec1D, Measure1D, Measure2D, MASS_TOLERANCE};

/// The state `T` defining `G^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApparatusState {
    state: MixedState,
}

impl ApparatusState {
    pub fn new(state: MixedState) -> Self {
        Self { state }
    }

    pub fn state(&self) -> &MixedState {
        &self.state
    }

    /// `ΠTΠ`.
    pub fn conjugated(&self) -> ApparatusState {
        Self {
            state: self.state.parity(),
        }
    }
}

impl From<MixedState> for ApparatusState {
    fn from(state: MixedState) -> Self {
        Self::new(state)
    }
}

impl From<PureState> for ApparatusState {
    fn from(state: PureState) -> Self {
        Self::new(state.into())
    }
}

/// Rectangular quadrature window, evaluated at cell centres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceWindow {
    q_range: (f64, f64),
    p_range: (f64, f64),
    n_q: usize,
    n_p: usize,
    mass_tolerance: f64,
}

impl PhaseSpaceWindow {
    /// Cell counts must be powers of two.
    pub fn new(q_range: (f64, f64), p_range: (f64, f64), n_q: usize, n_p: usize) -> Result<Self> {
        let w = Self {
            q_range,
            p_range,
            n_q,
            n_p,
            mass_tolerance: MASS_TOLERANCE,
        };
        for (lo, hi) in [q_range, p_range] {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::InvalidGrid(format!(
                    "window range [{lo}, {hi}] is empty"
                )));
            }
        }
        w.q_grid()?;
        w.p_grid()?;
        Ok(w)
    }

    /// Square window `[-half, half]²`.
    pub fn square(half: f64, n: usize) -> Result<Self> {
        Self::new((-half, half), (-half, half), n, n)
    }

    /// Overrides the allowed captured-mass deficit (default `1e-6`).
    pub fn with_mass_tolerance(mut self, tolerance: f64) -> Self {
        self.mass_tolerance = tolerance;
        self
    }

    pub fn q_range(&self) -> (f64, f64) {
        self.q_range
    }

    pub fn p_range(&self) -> (f64, f64) {
        self.p_range
    }

    pub fn n_q(&self) -> usize {
        self.n_q
    }

    pub fn n_p(&self) -> usize {
        self.n_p
    }

    pub fn mass_tolerance(&self) -> f64 {
        self.mass_tolerance
    }

    /// Cell-centre grid along q.
    pub fn q_grid(&self) -> Result<GridSpec1D> {
        centres(self.q_range, self.n_q)
    }

    pub fn p_grid(&self) -> Result<GridSpec1D> {
        centres(self.p_range, self.n_p)
    }
}

impl Default for PhaseSpaceWindow {
    /// `[-8, 8]²` with 128×128 cells.
    fn default() -> Self {
        Self::square(8.0, 128).expect("default window is valid")
    }
}

fn centres((lo, hi): (f64, f64), n: usize) -> Result<GridSpec1D> {
    let d = (hi - lo) / n as f64;
    GridSpec1D::new(lo + d / 2.0, d, n)
}

/// `μ_T`: position statistics of `ΠTΠ`.
pub fn mu_t(t: &ApparatusState) -> Measure1D {
    t.state.parity().position_distribution()
}

/// `ν_T`: momentum statistics of `ΠTΠ`.
pub fn nu_t(t: &ApparatusState) -> Measure1D {
    t.state.parity().momentum_distribution()
}

/// Density of `G^T` in `ρ` on the window, normalized after the capture
/// check.
pub fn husimi(rho: &MixedState, t: &ApparatusState, w: &PhaseSpaceWindow) -> Result<Measure2D> {
    let grid = *rho.grid();
    if *t.state.grid() != grid {
        return Err(Error::GridMismatch(
            "system and apparatus states use different grids".into(),
        ));
    }
    let qg = w.q_grid()?;
    let pg = w.p_grid()?;
    let (nq, np) = (qg.n(), pg.n());
    let xs: Vec<f64> = grid.points().collect();
    let phases: Vec<Complex64> = pg
        .points()
        .flat_map(|p| xs.iter().map(move |x| Complex64::from_polar(1.0, p * x)))
        .collect();
    let n = grid.n();
    let dx = grid.dx();

    let mut values = vec![0.0; nq * np];
    for (wi, psi) in rho.components() {
        for (wj, phi) in t.state.components() {
            let weight = wi * wj / (2.0 * PI);
            let rows: Vec<Vec<f64>> = (0..nq)
                .into_par_iter()
                .map(|iq| {
                    let shifted = phi.translated_amplitudes(qg.point(iq));
                    let g: Vec<Complex64> = psi
                        .amplitudes()
                        .iter()
                        .zip(&shifted)
                        .map(|(a, b)| a.conj() * b)
                        .collect();
                    (0..np)
                        .map(|ip| {
                            let row = &phases[ip * n..(ip + 1) * n];
                            let s: Complex64 = row.iter().zip(&g).map(|(e, v)| e * v).sum();
                            weight * (s * dx).norm_sqr()
                        })
                        .collect()
                })
                .collect();
            for (iq, row) in rows.into_iter().enumerate() {
                for (ip, v) in row.into_iter().enumerate() {
                    values[iq * np + ip] += v;
                }
            }
        }
    }
    let captured = values.iter().sum::<f64>() * qg.dx() * pg.dx();
    if !((1.0 - captured).abs() <= w.mass_tolerance) {
        return Err(Error::WindowTooSmall {
            captured,
            tolerance: w.mass_tolerance,
        });
    }
    Measure2D::from_density(values, qg, pg, true)
}

/// Pointwise value `h(q, p)`.
pub fn husimi_at(rho: &MixedState, t: &ApparatusState, q: f64, p: f64) -> Result<f64> {
    if t.state.grid() != rho.grid() {
        return Err(Error::GridMismatch(
            "system and apparatus states use different grids".into(),
        ));
    }
    let mut total = 0.0;
    for (wi, psi) in rho.components() {
        for (wj, phi) in t.state.components() {
            let moved = phi.weyl_unchecked(q, p);
            total += wi * wj * psi.overlap_unchecked(moved.amplitudes()).norm_sqr();
        }
    }
    Ok(total / (2.0 * PI))
}

/// The two `G^T` margins predicted by the convolution identity.
pub fn margin_prediction(rho: &MixedState, t: &ApparatusState) -> Result<(Measure1D, Measure1D)> {
    Ok((
        rho.position_distribution().convolve(&mu_t(t))?,
        rho.momentum_distribution().convolve(&nu_t(t))?,
    ))
}

/// L1 distances between the Husimi margins and
/// `(λ^Q_ρ ⋆ μ_T, λ^P_ρ ⋆ ν_T)`.
pub fn margin_check(
    rho: &MixedState,
    t: &ApparatusState,
    w: &PhaseSpaceWindow,
) -> Result<(f64, f64)> {
    let (hq, hp) = husimi(rho, t, w)?.margins();
    let (q, p) = margin_prediction(rho, t)?;
    Ok((hq.l1_distance(&q), hp.l1_distance(&p)))
}

/// Trade-off of the smearing measures, `Δ(μ_T)·Δ(ν_T) ≥ 1/2`.
pub fn measurement_ur(t: &ApparatusState) -> URReport {
    let digest = InputsDigest::new(Scenario::Noise)
        .apparatus(Some(t))
        .finish();
    URReport::new(Scenario::Noise, mu_t(t).stddev(), nu_t(t).stddev(), digest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec1D {
        GridSpec1D::default()
    }

    fn app(s: PureState) -> ApparatusState {
        s.into()
    }

    fn vacuum() -> PureState {
        PureState::vacuum(grid()).unwrap()
    }

    #[test]
    fn smearing_measures_of_displaced_states() {
        let t = app(PureState::gaussian(1.0, 0.0, 0.0, grid()).unwrap());
        let mu = mu_t(&t);
        assert!((mu.mean() + 1.0).abs() < 1e-10 && (mu.variance() - 0.5).abs() < 1e-9);
        let t = app(PureState::gaussian(0.0, 2.0, 0.0, grid()).unwrap());
        assert!((nu_t(&t).mean() + 2.0).abs() < 1e-10);
        let t = app(PureState::gaussian(0.0, 0.0, 0.4, grid()).unwrap());
        assert!((nu_t(&t).variance() - (0.8f64).exp() / 2.0).abs() < 1e-8);
        let t = app(PureState::hermite(1, grid()).unwrap());
        assert!((mu_t(&t).variance() - 1.5).abs() < 1e-8);
    }

    #[test]
    fn vacuum_husimi_peak() {
        let v: MixedState = vacuum().into();
        let t = app(vacuum());
        let h0 = husimi_at(&v, &t, 0.0, 0.0).unwrap();
        assert!((h0 - 1.0 / (2.0 * PI)).abs() < 1e-10);
        let h = husimi_at(&v, &t, 1.0, -2.0).unwrap();
        assert!((h - (-2.5f64).exp() / (2.0 * PI)).abs() < 1e-10);
    }

    #[test]
    fn ring_vanishes_at_origin() {
        let v: MixedState = vacuum().into();
        let t = app(PureState::hermite(1, grid()).unwrap());
        assert!(husimi_at(&v, &t, 0.0, 0.0).unwrap() < 1e-9);
    }

    #[test]
    fn husimi_grid_matches_pointwise_values() {
        let rho: MixedState = PureState::gaussian(0.5, -0.3, 0.2, grid()).unwrap().into();
        let t = app(PureState::hermite(1, grid()).unwrap());
        let w = PhaseSpaceWindow::square(8.0, 64).unwrap();
        let h = husimi(&rho, &t, &w).unwrap();
        let d = h.dense().unwrap();
        for (iq, ip) in [(30, 31), (10, 40), (33, 20)] {
            let q = d.x_grid().point(iq);
            let p = d.y_grid().point(ip);
            let direct = husimi_at(&rho, &t, q, p).unwrap();
            assert!((d.value(iq, ip) - direct).abs() < 1e-8);
        }
    }

    #[test]
    fn vacuum_margins() {
        let v: MixedState = vacuum().into();
        let (dq, dp) = margin_check(&v, &app(vacuum()), &PhaseSpaceWindow::default()).unwrap();
        assert!(dq < 1e-6 && dp < 1e-6, "{dq:e} {dp:e}");
    }

    #[test]
    fn window_too_small() {
        let v: MixedState = PureState::gaussian(3.0, 0.0, 0.0, grid()).unwrap().into();
        let w = PhaseSpaceWindow::square(2.0, 32).unwrap();
        assert!(matches!(
            husimi(&v, &app(vacuum()), &w),
            Err(Error::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn window_validation() {
        assert!(PhaseSpaceWindow::new((1.0, 1.0), (-1.0, 1.0), 8, 8).is_err());
        assert!(PhaseSpaceWindow::new((-1.0, 1.0), (-1.0, 1.0), 100, 8).is_err());
        let g = PhaseSpaceWindow::default().q_grid().unwrap();
        assert_eq!(g.point(0), -8.0 + 1.0 / 16.0);
    }

    #[test]
    fn measurement_trade_off() {
        let r = measurement_ur(&app(vacuum()));
        assert!((r.product - 0.5).abs() < 1e-6 && r.pass);
        let r = measurement_ur(&app(PureState::gaussian(0.0, 0.0, 0.7, grid()).unwrap()));
        assert!((r.product - 0.5).abs() < 1e-6);
        let r = measurement_ur(&app(PureState::hermite(1, grid()).unwrap()));
        assert!((r.product - 1.5).abs() < 1e-5);
        assert_eq!(r.bound, 0.5);
    }
}
