//! Discretized single-mode states and the unitary toolbox: Gaussian and
//! number-state constructors, Weyl displacements, parity, the Fourier
//! transform and Born-rule position/momentum statistics.
//!
//! Fourier convention: `ψ̂(p) = (2π)^{-1/2} ∫ e^{-ipx} ψ(x) dx`, sampled on
//! [`GridSpec1D::reciprocal`].

pub mod spec;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::fft_in_place;
use crate::measure::{GridSpec1D, Measure1D};

pub use spec::{MixtureComponent, StateSpec};

/// Normalization tolerance for state vectors and ensemble weights.
pub const NORM_TOLERANCE: f64 = 1e-9;
/// Amplitude bound on the outer 5% of the position and momentum windows.
pub const BOUNDARY_AMPLITUDE: f64 = 1e-8;
/// Highest supported oscillator eigenfunction.
pub const MAX_HERMITE: usize = 12;

/// A normalized wavefunction sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    grid: GridSpec1D,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Wraps amplitudes. With `normalize` the vector is rescaled to unit
    /// norm; otherwise its norm must already be 1 within `1e-9`. The state
    /// must decay at the edges of both the position and momentum windows.
    pub fn from_amplitudes(
        grid: GridSpec1D,
        amplitudes: Vec<Complex64>,
        normalize: bool,
    ) -> Result<Self> {
        if amplitudes.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "{} amplitudes for a grid of {} points",
                amplitudes.len(),
                grid.n()
            )));
        }
        let mut state = Self { grid, amplitudes };
        let norm = state.norm_sqr();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState(format!("state has norm² {norm}")));
        }
        if normalize {
            let s = 1.0 / norm.sqrt();
            state.amplitudes.iter_mut().for_each(|a| *a *= s);
        } else if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "state has norm² {norm}, expected 1"
            )));
        }
        state.check_boundary()?;
        Ok(state)
    }

    /// Squeezed coherent state
    /// `ψ(x) ∝ exp(-(x - x0)²·e^{2r}/2 + i·p0·x)`: position variance
    /// `e^{-2r}/2`, momentum variance `e^{2r}/2`.
    pub fn gaussian(x0: f64, p0: f64, r: f64, grid: GridSpec1D) -> Result<Self> {
        let s = (2.0 * r).exp();
        let norm = (s / PI).powf(0.25);
        let amps = grid
            .points()
            .map(|x| {
                let envelope = norm * (-(x - x0).powi(2) * s / 2.0).exp();
                Complex64::from_polar(envelope, p0 * x)
            })
            .collect();
        Self::from_amplitudes(grid, amps, true)
    }

    pub fn vacuum(grid: GridSpec1D) -> Result<Self> {
        Self::gaussian(0.0, 0.0, 0.0, grid)
    }

    /// The `k`-th harmonic-oscillator eigenfunction (physicists' Hermite
    /// sign convention), `k <= 12`.
    pub fn hermite(k: usize, grid: GridSpec1D) -> Result<Self> {
        if k > MAX_HERMITE {
            return Err(Error::InvalidState(format!(
                "hermite index {k} exceeds the supported maximum {MAX_HERMITE}"
            )));
        }
        let amps = grid
            .points()
            .map(|x| Complex64::new(hermite_function(k, x), 0.0))
            .collect();
        Self::from_amplitudes(grid, amps, true)
    }

    /// Normalized coherent superposition `Σ cᵢ ψᵢ`.
    pub fn superpose(terms: &[(Complex64, &PureState)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidState("empty superposition".into()))?;
        let grid = first.1.grid;
        let mut amps = vec![Complex64::new(0.0, 0.0); grid.n()];
        for (c, s) in terms {
            if s.grid != grid {
                return Err(Error::GridMismatch(
                    "superposed states use different grids".into(),
                ));
            }
            amps.iter_mut()
                .zip(&s.amplitudes)
                .for_each(|(a, b)| *a += c * b);
        }
        Self::from_amplitudes(grid, amps, true)
    }

    pub fn grid(&self) -> &GridSpec1D {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.grid.dx() * self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>()
    }

    fn check_boundary(&self) -> Result<()> {
        let edge = |values: &[Complex64]| {
            let n = values.len();
            let band = ((n as f64) * 0.05).ceil().max(1.0) as usize;
            values[..band]
                .iter()
                .chain(&values[n - band..])
                .map(|a| a.norm())
                .fold(0.0, f64::max)
        };
        let in_position = edge(&self.amplitudes);
        if in_position >= BOUNDARY_AMPLITUDE {
            return Err(Error::GridTooSmall(format!(
                "|ψ| reaches {in_position:e} in the outer 5% of the position window [{}, {}]",
                self.grid.x_min(),
                self.grid.x_last()
            )));
        }
        let in_momentum = edge(&self.to_momentum());
        if in_momentum >= BOUNDARY_AMPLITUDE {
            let p = self.grid.reciprocal();
            return Err(Error::GridTooSmall(format!(
                "|ψ̂| reaches {in_momentum:e} in the outer 5% of the momentum window [{}, {}]; refine dx",
                p.x_min(),
                p.x_last()
            )));
        }
        Ok(())
    }

    /// `ψ(x - q)` by multiplication with the translation phase in Fourier
    /// space; `q` need not be a multiple of `dx`.
    pub(crate) fn translated_amplitudes(&self, q: f64) -> Vec<Complex64> {
        spectral_translate(&self.amplitudes, &self.grid, q)
    }

    /// Weyl displacement
    /// `(W(q,p)ψ)(x) = e^{iqp/2} e^{ip(x-q)} ψ(x - q)`.
    pub fn weyl(&self, q: f64, p: f64) -> Result<Self> {
        let state = self.weyl_unchecked(q, p);
        state.check_boundary()?;
        Ok(state)
    }

    pub(crate) fn weyl_unchecked(&self, q: f64, p: f64) -> Self {
        if q == 0.0 && p == 0.0 {
            return self.clone();
        }
        let mut amps = if q == 0.0 {
            self.amplitudes.clone()
        } else {
            self.translated_amplitudes(q)
        };
        if p != 0.0 {
            for (a, x) in amps.iter_mut().zip(self.grid.points()) {
                *a *= Complex64::from_polar(1.0, p * x - q * p / 2.0);
            }
        }
        Self {
            grid: self.grid,
            amplitudes: amps,
        }
    }

    /// `(Πψ)(x) = ψ(-x)`.
    pub fn parity(&self) -> Self {
        let reversed: Vec<Complex64> = self.amplitudes.iter().rev().copied().collect();
        // reversed samples sit on the mirrored grid; move them onto this one
        let offset = -self.grid.x_last() - self.grid.x_min();
        let steps = offset / self.grid.dx();
        let n = self.grid.n();
        let amplitudes = if (steps - steps.round()).abs() < 1e-9 {
            let m = (steps.round() as i64).rem_euclid(n as i64) as usize;
            (0..n).map(|k| reversed[(k + n - m) % n]).collect()
        } else {
            spectral_translate(&reversed, &self.grid, offset)
        };
        Self {
            grid: self.grid,
            amplitudes,
        }
    }

    /// `ψ̂` sampled on the reciprocal grid.
    pub fn to_momentum(&self) -> Vec<Complex64> {
        let n = self.grid.n();
        let mut buf: Vec<Complex64> = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, a)| if k % 2 == 0 { *a } else { -a })
            .collect();
        fft_in_place(&mut buf, false);
        let pgrid = self.grid.reciprocal();
        let scale = self.grid.dx() / (2.0 * PI).sqrt();
        let x_min = self.grid.x_min();
        for (j, v) in buf.iter_mut().enumerate() {
            *v *= Complex64::from_polar(scale, -pgrid.point(j) * x_min);
        }
        debug_assert_eq!(buf.len(), n);
        buf
    }

    /// Inverse of [`PureState::to_momentum`]; performs the same boundary
    /// checks as [`PureState::from_amplitudes`].
    pub fn from_momentum(grid: GridSpec1D, momentum: &[Complex64]) -> Result<Self> {
        if momentum.len() != grid.n() {
            return Err(Error::GridMismatch(
                "momentum samples do not match the grid".into(),
            ));
        }
        let pgrid = grid.reciprocal();
        let x_min = grid.x_min();
        let mut buf: Vec<Complex64> = momentum
            .iter()
            .enumerate()
            .map(|(j, v)| v * Complex64::from_polar(1.0, pgrid.point(j) * x_min))
            .collect();
        fft_in_place(&mut buf, true);
        let scale = pgrid.dx() / (2.0 * PI).sqrt();
        let amps = buf
            .into_iter()
            .enumerate()
            .map(|(k, v)| if k % 2 == 0 { v * scale } else { -v * scale })
            .collect();
        Self::from_amplitudes(grid, amps, false)
    }

    /// `⟨self|other⟩ = dx·Σ conj(ψ)·χ`.
    pub fn overlap(&self, other: &PureState) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(
                "overlap of states on different grids".into(),
            ));
        }
        Ok(self.overlap_unchecked(&other.amplitudes))
    }

    pub(crate) fn overlap_unchecked(&self, other: &[Complex64]) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(other)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.dx()
    }

    pub fn position_distribution(&self) -> Measure1D {
        let samples = self.amplitudes.iter().map(|a| a.norm_sqr()).collect();
        Measure1D::from_density(samples, self.grid, true).expect("normalized state")
    }

    pub fn momentum_distribution(&self) -> Measure1D {
        let samples = self.to_momentum().iter().map(|a| a.norm_sqr()).collect();
        Measure1D::from_density(samples, self.grid.reciprocal(), true).expect("normalized state")
    }
}

/// Translation `f(x) ↦ f(x - q)` of periodic samples via the DFT.
pub(crate) fn spectral_translate(
    values: &[Complex64],
    grid: &GridSpec1D,
    q: f64,
) -> Vec<Complex64> {
    let n = values.len();
    let mut buf = values.to_vec();
    fft_in_place(&mut buf, false);
    let dk = 2.0 * PI / (n as f64 * grid.dx());
    for (j, v) in buf.iter_mut().enumerate() {
        let freq = if j < n / 2 {
            j as f64
        } else {
            j as f64 - n as f64
        };
        *v *= Complex64::from_polar(1.0 / n as f64, -freq * dk * q);
    }
    fft_in_place(&mut buf, true);
    buf
}

/// Normalized Hermite function by the stable three-term recurrence.
fn hermite_function(k: usize, x: f64) -> f64 {
    let h0 = PI.powf(-0.25) * (-x * x / 2.0).exp();
    if k == 0 {
        return h0;
    }
    let mut prev = h0;
    let mut cur = 2.0_f64.sqrt() * x * h0;
    for j in 1..k {
        let jf = j as f64;
        let next = (2.0 / (jf + 1.0)).sqrt() * x * cur - (jf / (jf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Finite convex mixture of pure states sharing one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedState {
    components: Vec<(f64, PureState)>,
}

impl MixedState {
    pub fn new(components: Vec<(f64, PureState)>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidState("mixture has no components".into()))?;
        let grid = *first.1.grid();
        if components.iter().any(|(w, _)| !(*w > 0.0 && *w <= 1.0)) {
            return Err(Error::InvalidState(
                "mixture weights must lie in (0, 1]".into(),
            ));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "mixture weights sum to {total}"
            )));
        }
        if components.iter().any(|(_, s)| *s.grid() != grid) {
            return Err(Error::GridMismatch(
                "mixture components use different grids".into(),
            ));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[(f64, PureState)] {
        &self.components
    }

    pub fn grid(&self) -> &GridSpec1D {
        self.components[0].1.grid()
    }

    pub fn weyl(&self, q: f64, p: f64) -> Result<Self> {
        let components = self
            .components
            .iter()
            .map(|(w, s)| Ok((*w, s.weyl(q, p)?)))
            .collect::<Result<_>>()?;
        Ok(Self { components })
    }

    pub fn parity(&self) -> Self {
        Self {
            components: self
                .components
                .iter()
                .map(|(w, s)| (*w, s.parity()))
                .collect(),
        }
    }

    pub fn position_distribution(&self) -> Measure1D {
        self.weighted_density(
            |s| s.amplitudes.iter().map(|a| a.norm_sqr()).collect(),
            *self.grid(),
        )
    }

    pub fn momentum_distribution(&self) -> Measure1D {
        self.weighted_density(
            |s| s.to_momentum().iter().map(|a| a.norm_sqr()).collect(),
            self.grid().reciprocal(),
        )
    }

    fn weighted_density(
        &self,
        density: impl Fn(&PureState) -> Vec<f64>,
        grid: GridSpec1D,
    ) -> Measure1D {
        let mut acc = vec![0.0; grid.n()];
        for (w, s) in &self.components {
            acc.iter_mut()
                .zip(density(s))
                .for_each(|(a, d)| *a += w * d);
        }
        Measure1D::from_density(acc, grid, true).expect("normalized mixture")
    }
}

impl From<PureState> for MixedState {
    fn from(state: PureState) -> Self {
        Self {
            components: vec![(1.0, state)],
        }
    }
}
