//! Probability measures on the line and the plane.
//!
//! A measure is a non-negative grid density plus a list of exact Dirac
//! atoms. Atoms are never rasterized: convolving with an atom shifts the
//! other factor's grid origin, so point frames act exactly.
//!
//! Convolution uses the standard orientation, `a.convolve(b)` is the law of
//! `X + Y` for independent `X ~ a`, `Y ~ b`. Use [`Measure1D::reflect`] where
//! the law of a difference is wanted.

mod fft;
pub mod io;
mod plane;
mod resample;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) use fft::fft_in_place;
pub use fft::{MAX_FFT_LEN, MAX_FFT_LEN_2D};
pub use plane::{product, Atom2D, Dense2D, Line2D, LineAxis, Measure2D};

/// Samples at or above `-NEGATIVE_CLIP` are treated as roundoff and set to 0.
pub const NEGATIVE_CLIP: f64 = 1e-12;
/// Allowed deviation of the integrated mass from 1 for user-supplied samples.
pub const MASS_TOLERANCE: f64 = 1e-6;
/// Tail samples below this fraction of the peak are dropped before and after
/// a convolution.
pub const TRIM_RELATIVE: f64 = 1e-15;
/// Atoms closer than this are merged.
pub const ATOM_MERGE_TOL: f64 = 1e-12;

/// A uniform grid `x_min + k·dx`, `k = 0..n`, with `n` a power of two.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec1D {
    x_min: f64,
    dx: f64,
    n: usize,
}

impl GridSpec1D {
    pub fn new(x_min: f64, dx: f64, n: usize) -> Result<Self> {
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::InvalidGrid(format!("dx must be positive, got {dx}")));
        }
        if !x_min.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "x_min must be finite, got {x_min}"
            )));
        }
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n must be a power of two, got {n}"
            )));
        }
        Ok(Self { x_min, dx, n })
    }

    /// The half-open window `[-half_width, half_width)` with `n` points.
    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        Self::new(-half_width, 2.0 * half_width / n as f64, n)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn point(&self, k: usize) -> f64 {
        self.x_min + k as f64 * self.dx
    }

    /// Last grid point, `x_min + (n - 1)·dx`.
    pub fn x_last(&self) -> f64 {
        self.point(self.n - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |k| self.point(k))
    }

    /// Conjugate (momentum) grid of the discrete Fourier transform:
    /// `dp = 2π/(n·dx)`, centred so that `p = 0` is node `n/2`.
    pub fn reciprocal(&self) -> Self {
        let dp = 2.0 * std::f64::consts::PI / (self.n as f64 * self.dx);
        Self {
            x_min: -(self.n as f64 / 2.0) * dp,
            dx: dp,
            n: self.n,
        }
    }

    pub(crate) fn shifted(&self, by: f64) -> Self {
        Self {
            x_min: self.x_min + by,
            ..*self
        }
    }

    /// Grid of the mirrored points, traversed in increasing order.
    pub(crate) fn reflected(&self) -> Self {
        Self {
            x_min: -self.x_last(),
            ..*self
        }
    }

    pub(crate) fn same_spacing(&self, other: &Self) -> bool {
        (self.dx - other.dx).abs() <= 1e-12 * self.dx.max(other.dx)
    }

    // lengths produced internally are padded up to the next power of two
    pub(crate) fn padded(x_min: f64, dx: f64, len: usize) -> Self {
        Self {
            x_min,
            dx,
            n: len.max(1).next_power_of_two(),
        }
    }
}

impl Default for GridSpec1D {
    /// `[-20, 20)` with 1024 points.
    fn default() -> Self {
        Self::symmetric(20.0, 1024).expect("default grid is valid")
    }
}

/// A point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: f64,
    #[serde(rename = "w")]
    pub weight: f64,
}

/// Non-negative samples on a grid; `values.len() == grid.n()`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct GridDensity {
    pub(crate) grid: GridSpec1D,
    pub(crate) values: Vec<f64>,
}

impl GridDensity {
    pub(crate) fn new(grid: GridSpec1D, mut values: Vec<f64>) -> Self {
        values.resize(grid.n(), 0.0);
        Self { grid, values }
    }

    /// Builds a density from an arbitrary-length sample run, padding to a
    /// power of two.
    pub(crate) fn from_run(x_min: f64, dx: f64, values: Vec<f64>) -> Self {
        Self::new(GridSpec1D::padded(x_min, dx, values.len()), values)
    }

    pub(crate) fn mass(&self) -> f64 {
        self.grid.dx() * self.values.iter().sum::<f64>()
    }

    pub(crate) fn first_moment(&self) -> f64 {
        self.grid.dx()
            * self
                .values
                .iter()
                .enumerate()
                .map(|(k, v)| self.grid.point(k) * v)
                .sum::<f64>()
    }

    pub(crate) fn central_moment2(&self, mean: f64) -> f64 {
        self.grid.dx()
            * self
                .values
                .iter()
                .enumerate()
                .map(|(k, v)| (self.grid.point(k) - mean).powi(2) * v)
                .sum::<f64>()
    }

    pub(crate) fn scaled(mut self, factor: f64) -> Self {
        self.values.iter_mut().for_each(|v| *v *= factor);
        self
    }

    pub(crate) fn shifted(&self, by: f64) -> Self {
        Self {
            grid: self.grid.shifted(by),
            values: self.values.clone(),
        }
    }

    pub(crate) fn reflected(&self) -> Self {
        let values = self.values.iter().rev().copied().collect();
        Self {
            grid: self.grid.reflected(),
            values,
        }
    }

    /// Drops tails below `TRIM_RELATIVE` of the peak; `None` if the density
    /// is identically zero.
    pub(crate) fn trimmed(&self) -> Option<Self> {
        let (lo, hi) = trim_range(&self.values)?;
        let values = self.values[lo..=hi].to_vec();
        Some(Self::from_run(self.grid.point(lo), self.grid.dx(), values))
    }

    /// The unpadded length: index of the last non-zero sample, plus one.
    pub(crate) fn used_len(&self) -> usize {
        self.values
            .iter()
            .rposition(|&v| v != 0.0)
            .map_or(0, |k| k + 1)
    }

    pub(crate) fn value_at(&self, x: f64) -> f64 {
        let u = (x - self.grid.x_min()) / self.grid.dx();
        resample::value_at_index(&self.values, u).max(0.0)
    }

    /// Re-expresses the density on a grid with spacing `dx`, anchored at this
    /// density's own origin, preserving its mass.
    pub(crate) fn respaced(&self, dx: f64) -> Self {
        if (self.grid.dx() - dx).abs() <= 1e-12 * dx {
            return self.clone();
        }
        let span = self.grid.dx() * (self.used_len().max(1) - 1) as f64;
        let len = (span / dx).ceil() as usize + 1;
        let target = GridSpec1D::padded(self.grid.x_min(), dx, len);
        let values = resample::sample_onto(&self.values, &self.grid, &target);
        let out = Self::new(target, values);
        let (m_in, m_out) = (self.mass(), out.mass());
        if m_out > 0.0 {
            out.scaled(m_in / m_out)
        } else {
            out
        }
    }
}

pub(crate) fn trim_range(values: &[f64]) -> Option<(usize, usize)> {
    let peak = values.iter().copied().fold(0.0_f64, f64::max);
    if peak <= 0.0 {
        return None;
    }
    let cut = peak * TRIM_RELATIVE;
    let lo = values.iter().position(|&v| v > cut)?;
    let hi = values.iter().rposition(|&v| v > cut)?;
    Some((lo, hi))
}

/// Lattice covering every input window, with the finest spacing present,
/// anchored at the origin of the first input having that spacing.
pub(crate) fn covering_grid(grids: &[GridSpec1D]) -> GridSpec1D {
    let anchor = grids
        .iter()
        .copied()
        .fold(None::<GridSpec1D>, |best, g| match best {
            Some(b) if b.dx() < g.dx() || b.same_spacing(&g) => Some(b),
            _ => Some(g),
        })
        .expect("at least one grid");
    let dx = anchor.dx();
    let lo = grids
        .iter()
        .map(|g| g.x_min())
        .fold(f64::INFINITY, f64::min);
    let hi = grids
        .iter()
        .map(|g| g.x_last())
        .fold(f64::NEG_INFINITY, f64::max);
    let k_lo = ((lo - anchor.x_min()) / dx - 1e-9).floor();
    let k_hi = ((hi - anchor.x_min()) / dx + 1e-9).ceil();
    let x_min = anchor.x_min() + k_lo * dx;
    GridSpec1D::padded(x_min, dx, (k_hi - k_lo) as usize + 1)
}

/// Sums densities living on different grids, each resampled onto the
/// covering lattice with its own mass preserved.
pub(crate) fn sum_densities(mut parts: Vec<GridDensity>) -> Option<GridDensity> {
    parts.retain(|d| d.values.iter().any(|&v| v > 0.0));
    match parts.len() {
        0 => None,
        1 => parts.pop(),
        _ => {
            let target = covering_grid(&parts.iter().map(|d| d.grid).collect::<Vec<_>>());
            let mut acc = vec![0.0; target.n()];
            for part in &parts {
                let mut sampled = resample::sample_onto(&part.values, &part.grid, &target);
                let m = target.dx() * sampled.iter().sum::<f64>();
                if m > 0.0 {
                    let s = part.mass() / m;
                    sampled.iter_mut().for_each(|v| *v *= s);
                }
                acc.iter_mut().zip(&sampled).for_each(|(a, b)| *a += b);
            }
            Some(GridDensity::new(target, acc))
        }
    }
}

pub(crate) fn merge_atoms(mut atoms: Vec<Atom>) -> Vec<Atom> {
    atoms.retain(|a| a.weight > 0.0);
    atoms.sort_by(|a, b| a.x.total_cmp(&b.x));
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match out.last_mut() {
            Some(last) if (last.x - a.x).abs() <= ATOM_MERGE_TOL => last.weight += a.weight,
            _ => out.push(a),
        }
    }
    out
}

/// A probability measure on the line: grid density plus Dirac atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure1D {
    continuous: Option<GridDensity>,
    atoms: Vec<Atom>,
}

impl Measure1D {
    /// Wraps samples of a probability density on `grid`.
    ///
    /// Values in `[-1e-12, 0)` are clipped to zero. Without `renormalize`, the
    /// integrated mass must be within `1e-6` of one; it is then scaled to one
    /// exactly.
    pub fn from_density(samples: Vec<f64>, grid: GridSpec1D, renormalize: bool) -> Result<Self> {
        if samples.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} points",
                samples.len(),
                grid.n()
            )));
        }
        let mut values = samples;
        for (index, v) in values.iter_mut().enumerate() {
            if !v.is_finite() || *v < -NEGATIVE_CLIP {
                return Err(Error::NegativeDensity { index, value: *v });
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let density = GridDensity::new(grid, values);
        let mass = density.mass();
        if !renormalize && (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::MassMismatch {
                mass,
                tolerance: MASS_TOLERANCE,
            });
        }
        if !(mass > 0.0) {
            return Err(Error::MassMismatch {
                mass,
                tolerance: MASS_TOLERANCE,
            });
        }
        Ok(Self {
            continuous: Some(density.scaled(1.0 / mass)),
            atoms: Vec::new(),
        })
    }

    /// The point mass at `x0`.
    pub fn dirac(x0: f64) -> Self {
        Self {
            continuous: None,
            atoms: vec![Atom { x: x0, weight: 1.0 }],
        }
    }

    /// A measure with both parts; weights and density are rescaled jointly
    /// so the total mass is one.
    pub fn from_parts(samples: Option<(Vec<f64>, GridSpec1D)>, atoms: Vec<Atom>) -> Result<Self> {
        let continuous = match samples {
            Some((values, grid)) => {
                if values.len() != grid.n() {
                    return Err(Error::GridMismatch(format!(
                        "{} samples for a grid of {} points",
                        values.len(),
                        grid.n()
                    )));
                }
                if let Some((index, &value)) = values
                    .iter()
                    .enumerate()
                    .find(|(_, v)| !v.is_finite() || **v < -NEGATIVE_CLIP)
                {
                    return Err(Error::NegativeDensity { index, value });
                }
                Some(GridDensity::new(
                    grid,
                    values.into_iter().map(|v| v.max(0.0)).collect(),
                ))
            }
            None => None,
        };
        if atoms.iter().any(|a| !(a.weight > 0.0) || !a.x.is_finite()) {
            return Err(Error::ContractViolation(
                "atom weights must be positive".into(),
            ));
        }
        let m = Self::assemble(continuous, atoms);
        let mass = m.mass();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::MassMismatch {
                mass,
                tolerance: MASS_TOLERANCE,
            });
        }
        Ok(m.normalized())
    }

    /// Convex combination `Σ wᵢ·mᵢ`; weights must be positive and sum to one.
    pub fn mixture(parts: &[(f64, &Measure1D)]) -> Result<Self> {
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if parts.is_empty() || parts.iter().any(|(w, _)| !(*w > 0.0)) || (total - 1.0).abs() > 1e-9
        {
            return Err(Error::InvalidState(format!(
                "mixture weights must be positive and sum to 1, got {total}"
            )));
        }
        let mut densities = Vec::new();
        let mut atoms = Vec::new();
        for (w, m) in parts {
            if let Some(d) = &m.continuous {
                densities.push(d.clone().scaled(*w));
            }
            atoms.extend(m.atoms.iter().map(|a| Atom {
                x: a.x,
                weight: a.weight * w,
            }));
        }
        Ok(Self::assemble(sum_densities(densities), atoms).normalized())
    }

    pub(crate) fn assemble(continuous: Option<GridDensity>, atoms: Vec<Atom>) -> Self {
        let continuous = continuous.filter(|d| d.values.iter().any(|&v| v > 0.0));
        Self {
            continuous,
            atoms: merge_atoms(atoms),
        }
    }

    pub(crate) fn normalized(mut self) -> Self {
        let mass = self.mass();
        if mass > 0.0 && mass != 1.0 {
            let s = 1.0 / mass;
            if let Some(d) = self.continuous.take() {
                self.continuous = Some(d.scaled(s));
            }
            self.atoms.iter_mut().for_each(|a| a.weight *= s);
        }
        self
    }

    pub(crate) fn continuous(&self) -> Option<&GridDensity> {
        self.continuous.as_ref()
    }

    /// Grid of the continuous part, if there is one.
    pub fn grid(&self) -> Option<&GridSpec1D> {
        self.continuous.as_ref().map(|d| &d.grid)
    }

    /// Density samples (probability per unit length); empty for purely
    /// atomic measures.
    pub fn density(&self) -> &[f64] {
        self.continuous.as_ref().map_or(&[], |d| &d.values)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_atomic(&self) -> bool {
        self.continuous.is_none()
    }

    /// Density at an arbitrary point (interpolated between nodes).
    pub fn density_at(&self, x: f64) -> f64 {
        self.continuous.as_ref().map_or(0.0, |d| d.value_at(x))
    }

    pub fn mass(&self) -> f64 {
        self.continuous.as_ref().map_or(0.0, GridDensity::mass)
            + self.atoms.iter().map(|a| a.weight).sum::<f64>()
    }

    pub fn mean(&self) -> f64 {
        let m1 = self
            .continuous
            .as_ref()
            .map_or(0.0, GridDensity::first_moment)
            + self.atoms.iter().map(|a| a.x * a.weight).sum::<f64>();
        m1 / self.mass()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        let m2 = self
            .continuous
            .as_ref()
            .map_or(0.0, |d| d.central_moment2(mean))
            + self
                .atoms
                .iter()
                .map(|a| (a.x - mean).powi(2) * a.weight)
                .sum::<f64>();
        m2 / self.mass()
    }

    pub fn stddev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Law of `X + Y` for independent `X ~ self`, `Y ~ other`.
    ///
    /// Densities on different spacings are resampled onto the finer one.
    /// Tails below `TRIM_RELATIVE` of the peak are dropped and the FFT is
    /// zero-padded past the summed support, so nothing wraps around.
    pub fn convolve(&self, other: &Measure1D) -> Result<Measure1D> {
        let mut parts = Vec::new();
        if let (Some(a), Some(b)) = (&self.continuous, &other.continuous) {
            parts.push(convolve_densities(a, b)?);
        }
        if let Some(a) = &self.continuous {
            parts.extend(other.atoms.iter().map(|t| a.shifted(t.x).scaled(t.weight)));
        }
        if let Some(b) = &other.continuous {
            parts.extend(self.atoms.iter().map(|t| b.shifted(t.x).scaled(t.weight)));
        }
        let mut atoms = Vec::with_capacity(self.atoms.len() * other.atoms.len());
        for a in &self.atoms {
            for b in &other.atoms {
                atoms.push(Atom {
                    x: a.x + b.x,
                    weight: a.weight * b.weight,
                });
            }
        }
        Ok(Self::assemble(sum_densities(parts), atoms).normalized())
    }

    /// Mirror image, `out(X) = self(-X)`.
    pub fn reflect(&self) -> Measure1D {
        Self::assemble(
            self.continuous.as_ref().map(GridDensity::reflected),
            self.atoms
                .iter()
                .map(|a| Atom {
                    x: -a.x,
                    weight: a.weight,
                })
                .collect(),
        )
    }

    /// Translation by `by`; exact (moves the grid origin).
    pub fn shift(&self, by: f64) -> Measure1D {
        Self {
            continuous: self.continuous.as_ref().map(|d| d.shifted(by)),
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    x: a.x + by,
                    weight: a.weight,
                })
                .collect(),
        }
    }

    /// `∫|f - g|` over the continuous parts plus `Σ|wₐ - w_b|` over atoms.
    ///
    /// Densities are compared on the lattice of the finer grid (the one with
    /// the smaller origin when spacings agree), covering both windows.
    pub fn l1_distance(&self, other: &Measure1D) -> f64 {
        continuous_l1(self.continuous.as_ref(), other.continuous.as_ref())
            + atomic_l1(&self.atoms, &other.atoms)
    }
}

/// Free-function form of [`Measure1D::convolve`].
pub fn convolve(a: &Measure1D, b: &Measure1D) -> Result<Measure1D> {
    a.convolve(b)
}

/// Free-function form of [`Measure1D::l1_distance`].
pub fn l1_distance(a: &Measure1D, b: &Measure1D) -> f64 {
    a.l1_distance(b)
}

pub(crate) fn convolve_densities(a: &GridDensity, b: &GridDensity) -> Result<GridDensity> {
    let dx = a.grid.dx().min(b.grid.dx());
    let (a, b) = match (a.respaced(dx).trimmed(), b.respaced(dx).trimmed()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Ok(GridDensity::from_run(a.grid.x_min(), dx, vec![0.0])),
    };
    let raw = fft::convolve_real(&a.values[..a.used_len()], &b.values[..b.used_len()])?;
    let values: Vec<f64> = raw.into_iter().map(|v| v.max(0.0) * dx).collect();
    let out = GridDensity::from_run(a.grid.x_min() + b.grid.x_min(), dx, values);
    Ok(out.trimmed().unwrap_or(out))
}

pub(crate) fn continuous_l1(a: Option<&GridDensity>, b: Option<&GridDensity>) -> f64 {
    match (a, b) {
        (None, None) => 0.0,
        (Some(d), None) | (None, Some(d)) => d.mass().abs(),
        (Some(a), Some(b)) => {
            let same = a.grid.same_spacing(&b.grid);
            let ordered = if (!same && b.grid.dx() < a.grid.dx())
                || (same && b.grid.x_min() < a.grid.x_min())
            {
                [b.grid, a.grid]
            } else {
                [a.grid, b.grid]
            };
            let target = covering_grid(&ordered);
            let fa = resample::sample_onto(&a.values, &a.grid, &target);
            let fb = resample::sample_onto(&b.values, &b.grid, &target);
            target.dx() * fa.iter().zip(&fb).map(|(x, y)| (x - y).abs()).sum::<f64>()
        }
    }
}

pub(crate) fn atomic_l1(a: &[Atom], b: &[Atom]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut total = 0.0;
    for x in a {
        match b
            .iter()
            .enumerate()
            .find(|(j, y)| !used[*j] && (x.x - y.x).abs() <= ATOM_MERGE_TOL)
        {
            Some((j, y)) => {
                used[j] = true;
                total += (x.weight - y.weight).abs();
            }
            None => total += x.weight,
        }
    }
    total
        + b.iter()
            .zip(&used)
            .filter(|(_, u)| !**u)
            .map(|(y, _)| y.weight)
            .sum::<f64>()
}
