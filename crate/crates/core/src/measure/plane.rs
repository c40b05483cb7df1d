//! Probability measures on the plane.
//!
//! A [`Measure2D`] holds up to three kinds of component: a dense grid
//! density, line components (a 1D density along one axis times a point mass
//! along the other, as produced by the product of a density with an atom),
//! and point atoms.

use super::{
    convolve_densities, covering_grid, fft, merge_atoms, resample, sum_densities, trim_range, Atom,
    GridDensity, GridSpec1D, Measure1D, ATOM_MERGE_TOL, MASS_TOLERANCE, NEGATIVE_CLIP,
    TRIM_RELATIVE,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom2D {
    pub x: f64,
    pub y: f64,
    pub weight: f64,
}

/// Grid density on the plane; `values[ix * ny + iy]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense2D {
    x_grid: GridSpec1D,
    y_grid: GridSpec1D,
    values: Vec<f64>,
}

impl Dense2D {
    fn new(x_grid: GridSpec1D, y_grid: GridSpec1D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), x_grid.n() * y_grid.n());
        Self {
            x_grid,
            y_grid,
            values,
        }
    }

    // values given on an arbitrary (nx, ny) box, padded to powers of two
    fn from_box(
        x_min: f64,
        dx: f64,
        y_min: f64,
        dy: f64,
        raw: &[f64],
        shape: (usize, usize),
    ) -> Self {
        let (nx, ny) = shape;
        let x_grid = GridSpec1D::padded(x_min, dx, nx);
        let y_grid = GridSpec1D::padded(y_min, dy, ny);
        let mut values = vec![0.0; x_grid.n() * y_grid.n()];
        for i in 0..nx {
            values[i * y_grid.n()..i * y_grid.n() + ny].copy_from_slice(&raw[i * ny..(i + 1) * ny]);
        }
        Self::new(x_grid, y_grid, values)
    }

    pub fn x_grid(&self) -> &GridSpec1D {
        &self.x_grid
    }

    pub fn y_grid(&self) -> &GridSpec1D {
        &self.y_grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[ix * self.y_grid.n() + iy]
    }

    pub fn mass(&self) -> f64 {
        self.x_grid.dx() * self.y_grid.dx() * self.values.iter().sum::<f64>()
    }

    fn scaled(mut self, factor: f64) -> Self {
        self.values.iter_mut().for_each(|v| *v *= factor);
        self
    }

    fn shifted(&self, bx: f64, by: f64) -> Self {
        Self {
            x_grid: self.x_grid.shifted(bx),
            y_grid: self.y_grid.shifted(by),
            values: self.values.clone(),
        }
    }

    fn reflected(&self) -> Self {
        Self {
            x_grid: self.x_grid.reflected(),
            y_grid: self.y_grid.reflected(),
            values: self.values.iter().rev().copied().collect(),
        }
    }

    fn x_margin(&self) -> GridDensity {
        let ny = self.y_grid.n();
        let dy = self.y_grid.dx();
        let values = self
            .values
            .chunks(ny)
            .map(|row| dy * row.iter().sum::<f64>())
            .collect();
        GridDensity::new(self.x_grid, values)
    }

    fn y_margin(&self) -> GridDensity {
        let ny = self.y_grid.n();
        let dx = self.x_grid.dx();
        let mut values = vec![0.0; ny];
        for row in self.values.chunks(ny) {
            values.iter_mut().zip(row).for_each(|(a, b)| *a += b);
        }
        values.iter_mut().for_each(|v| *v *= dx);
        GridDensity::new(self.y_grid, values)
    }

    fn trimmed(&self) -> Option<Self> {
        let (nx, ny) = (self.x_grid.n(), self.y_grid.n());
        let peak = self.values.iter().copied().fold(0.0_f64, f64::max);
        if peak <= 0.0 {
            return None;
        }
        let mut row_max = vec![0.0_f64; nx];
        let mut col_max = vec![0.0_f64; ny];
        for (rm, row) in row_max.iter_mut().zip(self.values.chunks(ny)) {
            for (cm, &v) in col_max.iter_mut().zip(row) {
                *rm = rm.max(v);
                *cm = cm.max(v);
            }
        }
        // rows and columns are compared against the global peak
        let scale = |m: &mut Vec<f64>| {
            m.iter_mut()
                .for_each(|v| *v = if *v > peak * TRIM_RELATIVE { *v } else { 0.0 })
        };
        scale(&mut row_max);
        scale(&mut col_max);
        let (x_lo, x_hi) = trim_range(&row_max)?;
        let (y_lo, y_hi) = trim_range(&col_max)?;
        let shape = (x_hi - x_lo + 1, y_hi - y_lo + 1);
        let mut raw = Vec::with_capacity(shape.0 * shape.1);
        for i in x_lo..=x_hi {
            raw.extend_from_slice(&self.values[i * ny + y_lo..=i * ny + y_hi]);
        }
        Some(Self::from_box(
            self.x_grid.point(x_lo),
            self.x_grid.dx(),
            self.y_grid.point(y_lo),
            self.y_grid.dx(),
            &raw,
            shape,
        ))
    }

    // tight box of rows/columns up to the last non-zero entry
    fn used_box(&self) -> (Vec<f64>, (usize, usize)) {
        let ny = self.y_grid.n();
        let mut ux = 0;
        let mut uy = 0;
        for (i, row) in self.values.chunks(ny).enumerate() {
            if let Some(j) = row.iter().rposition(|&v| v != 0.0) {
                ux = i + 1;
                uy = uy.max(j + 1);
            }
        }
        let mut raw = Vec::with_capacity(ux * uy);
        for i in 0..ux {
            raw.extend_from_slice(&self.values[i * ny..i * ny + uy]);
        }
        (raw, (ux.max(1), uy.max(1)))
    }

    fn sampled_onto(&self, tx: &GridSpec1D, ty: &GridSpec1D) -> Vec<f64> {
        let (nx, ny) = (self.x_grid.n(), self.y_grid.n());
        // along y first: nx rows of length ty.n()
        let mut stage = Vec::with_capacity(nx * ty.n());
        for row in self.values.chunks(ny) {
            stage.extend(resample::sample_onto(row, &self.y_grid, ty));
        }
        let mut out = vec![0.0; tx.n() * ty.n()];
        let mut column = vec![0.0; nx];
        for j in 0..ty.n() {
            for i in 0..nx {
                column[i] = stage[i * ty.n() + j];
            }
            for (i, v) in resample::sample_onto(&column, &self.x_grid, tx)
                .into_iter()
                .enumerate()
            {
                out[i * ty.n() + j] = v;
            }
        }
        out
    }

    /// Same measure on spacings `(dx, dy)`, anchored at this density's
    /// origin, mass preserved.
    fn respaced(&self, dx: f64, dy: f64) -> Self {
        let same_x = (self.x_grid.dx() - dx).abs() <= 1e-12 * dx;
        let same_y = (self.y_grid.dx() - dy).abs() <= 1e-12 * dy;
        if same_x && same_y {
            return self.clone();
        }
        let target = |g: &GridSpec1D, d: f64, same: bool| {
            if same {
                *g
            } else {
                let len = (g.dx() * (g.n() - 1) as f64 / d).ceil() as usize + 1;
                GridSpec1D::padded(g.x_min(), d, len)
            }
        };
        let tx = target(&self.x_grid, dx, same_x);
        let ty = target(&self.y_grid, dy, same_y);
        let out = Self::new(tx, ty, self.sampled_onto(&tx, &ty));
        let (m_in, m_out) = (self.mass(), out.mass());
        if m_out > 0.0 {
            out.scaled(m_in / m_out)
        } else {
            out
        }
    }
}

/// Which coordinate a line component's profile varies along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineAxis {
    /// Profile in x, located at `y = at`.
    X,
    /// Profile in y, located at `x = at`.
    Y,
}

/// A 1D density along one axis concentrated at a single coordinate of the
/// other; its mass is the component weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Line2D {
    axis: LineAxis,
    at: f64,
    profile: GridDensity,
}

impl Line2D {
    pub fn axis(&self) -> LineAxis {
        self.axis
    }

    pub fn at(&self) -> f64 {
        self.at
    }

    pub fn weight(&self) -> f64 {
        self.profile.mass()
    }

    pub fn grid(&self) -> &GridSpec1D {
        &self.profile.grid
    }

    pub fn profile(&self) -> &[f64] {
        &self.profile.values
    }

    // as a one-row dense density with the given spacing across the line
    fn as_dense(&self, across: f64) -> Dense2D {
        let single = GridSpec1D::padded(self.at, across, 1);
        let values: Vec<f64> = self.profile.values.iter().map(|v| v / across).collect();
        match self.axis {
            LineAxis::X => Dense2D::new(self.profile.grid, single, values),
            LineAxis::Y => Dense2D::new(single, self.profile.grid, values),
        }
    }
}

/// Probability measure on the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure2D {
    dense: Option<Dense2D>,
    lines: Vec<Line2D>,
    atoms: Vec<Atom2D>,
}

enum Piece<'a> {
    Dense(&'a Dense2D),
    Line(&'a Line2D),
    Atom(&'a Atom2D),
}

#[derive(Default)]
struct Accum {
    dense: Vec<Dense2D>,
    lines: Vec<Line2D>,
    atoms: Vec<Atom2D>,
}

impl Measure2D {
    /// Wraps grid samples `values[ix * ny + iy]`; same clipping and mass
    /// contract as [`Measure1D::from_density`].
    pub fn from_density(
        values: Vec<f64>,
        x_grid: GridSpec1D,
        y_grid: GridSpec1D,
        renormalize: bool,
    ) -> Result<Self> {
        if values.len() != x_grid.n() * y_grid.n() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a {}x{} grid",
                values.len(),
                x_grid.n(),
                y_grid.n()
            )));
        }
        let mut values = values;
        for (index, v) in values.iter_mut().enumerate() {
            if !v.is_finite() || *v < -NEGATIVE_CLIP {
                return Err(Error::NegativeDensity { index, value: *v });
            }
            *v = v.max(0.0);
        }
        let dense = Dense2D::new(x_grid, y_grid, values);
        let mass = dense.mass();
        if !(mass > 0.0) || (!renormalize && (mass - 1.0).abs() > MASS_TOLERANCE) {
            return Err(Error::MassMismatch {
                mass,
                tolerance: MASS_TOLERANCE,
            });
        }
        Ok(Self {
            dense: Some(dense.scaled(1.0 / mass)),
            lines: Vec::new(),
            atoms: Vec::new(),
        })
    }

    pub fn dirac(x: f64, y: f64) -> Self {
        Self {
            dense: None,
            lines: Vec::new(),
            atoms: vec![Atom2D { x, y, weight: 1.0 }],
        }
    }

    pub fn dense(&self) -> Option<&Dense2D> {
        self.dense.as_ref()
    }

    pub fn lines(&self) -> &[Line2D] {
        &self.lines
    }

    pub fn atoms(&self) -> &[Atom2D] {
        &self.atoms
    }

    pub fn mass(&self) -> f64 {
        self.dense.as_ref().map_or(0.0, Dense2D::mass)
            + self.lines.iter().map(Line2D::weight).sum::<f64>()
            + self.atoms.iter().map(|a| a.weight).sum::<f64>()
    }

    fn pieces(&self) -> Vec<Piece<'_>> {
        let mut out: Vec<Piece<'_>> = Vec::new();
        out.extend(self.dense.iter().map(Piece::Dense));
        out.extend(self.lines.iter().map(Piece::Line));
        out.extend(self.atoms.iter().map(Piece::Atom));
        out
    }

    fn assemble(acc: Accum) -> Self {
        let dense = sum_dense(acc.dense);
        let mut lines: Vec<Line2D> = Vec::new();
        for line in acc.lines {
            match lines
                .iter_mut()
                .find(|l| l.axis == line.axis && (l.at - line.at).abs() <= ATOM_MERGE_TOL)
            {
                Some(l) => {
                    let merged = sum_densities(vec![l.profile.clone(), line.profile])
                        .expect("line profiles carry mass");
                    l.profile = merged;
                }
                None => lines.push(line),
            }
        }
        let mut atoms: Vec<Atom2D> = Vec::new();
        for a in acc.atoms.into_iter().filter(|a| a.weight > 0.0) {
            match atoms.iter_mut().find(|b| {
                (b.x - a.x).abs() <= ATOM_MERGE_TOL && (b.y - a.y).abs() <= ATOM_MERGE_TOL
            }) {
                Some(b) => b.weight += a.weight,
                None => atoms.push(a),
            }
        }
        let mut out = Self {
            dense,
            lines,
            atoms,
        };
        let mass = out.mass();
        if mass > 0.0 && mass != 1.0 {
            let s = 1.0 / mass;
            out.dense = out.dense.take().map(|d| d.scaled(s));
            for l in &mut out.lines {
                l.profile = l.profile.clone().scaled(s);
            }
            out.atoms.iter_mut().for_each(|a| a.weight *= s);
        }
        out
    }

    /// Law of `(X₁ + X₂, Y₁ + Y₂)` for independent `(X₁, Y₁) ~ self`,
    /// `(X₂, Y₂) ~ other`.
    pub fn convolve2d(&self, other: &Measure2D) -> Result<Measure2D> {
        let mut acc = Accum::default();
        for a in self.pieces() {
            for b in other.pieces() {
                convolve_pieces(&a, &b, &mut acc)?;
            }
        }
        Ok(Self::assemble(acc))
    }

    /// Point reflection through the origin.
    pub fn reflect2d(&self) -> Measure2D {
        Self {
            dense: self.dense.as_ref().map(Dense2D::reflected),
            lines: self
                .lines
                .iter()
                .map(|l| Line2D {
                    axis: l.axis,
                    at: -l.at,
                    profile: l.profile.reflected(),
                })
                .collect(),
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom2D {
                    x: -a.x,
                    y: -a.y,
                    weight: a.weight,
                })
                .collect(),
        }
    }

    /// Exact translation by `(bx, by)`.
    pub fn translate(&self, bx: f64, by: f64) -> Measure2D {
        Self {
            dense: self.dense.as_ref().map(|d| d.shifted(bx, by)),
            lines: self
                .lines
                .iter()
                .map(|l| match l.axis {
                    LineAxis::X => Line2D {
                        axis: l.axis,
                        at: l.at + by,
                        profile: l.profile.shifted(bx),
                    },
                    LineAxis::Y => Line2D {
                        axis: l.axis,
                        at: l.at + bx,
                        profile: l.profile.shifted(by),
                    },
                })
                .collect(),
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom2D {
                    x: a.x + bx,
                    y: a.y + by,
                    weight: a.weight,
                })
                .collect(),
        }
    }

    /// The x- and y-marginal measures.
    pub fn margins(&self) -> (Measure1D, Measure1D) {
        let mut xd = Vec::new();
        let mut yd = Vec::new();
        let mut xa = Vec::new();
        let mut ya = Vec::new();
        if let Some(d) = &self.dense {
            xd.push(d.x_margin());
            yd.push(d.y_margin());
        }
        for l in &self.lines {
            let w = l.weight();
            match l.axis {
                LineAxis::X => {
                    xd.push(l.profile.clone());
                    ya.push(Atom { x: l.at, weight: w });
                }
                LineAxis::Y => {
                    yd.push(l.profile.clone());
                    xa.push(Atom { x: l.at, weight: w });
                }
            }
        }
        for a in &self.atoms {
            xa.push(Atom {
                x: a.x,
                weight: a.weight,
            });
            ya.push(Atom {
                x: a.y,
                weight: a.weight,
            });
        }
        (
            Measure1D::assemble(sum_densities(xd), merge_atoms(xa)).normalized(),
            Measure1D::assemble(sum_densities(yd), merge_atoms(ya)).normalized(),
        )
    }

    /// Largest pointwise difference between the dense parts, compared on
    /// the finer lattice covering both windows.
    pub fn sup_distance(&self, other: &Measure2D) -> f64 {
        match (&self.dense, &other.dense) {
            (None, None) => 0.0,
            (Some(d), None) | (None, Some(d)) => d.values.iter().copied().fold(0.0, f64::max),
            (Some(a), Some(b)) => {
                let tx = covering_grid(&ordered_pair(&a.x_grid, &b.x_grid));
                let ty = covering_grid(&ordered_pair(&a.y_grid, &b.y_grid));
                let fa = a.sampled_onto(&tx, &ty);
                let fb = b.sampled_onto(&tx, &ty);
                fa.iter()
                    .zip(&fb)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max)
            }
        }
    }
}

fn ordered_pair(a: &GridSpec1D, b: &GridSpec1D) -> [GridSpec1D; 2] {
    let b_first = if a.same_spacing(b) {
        b.x_min() < a.x_min()
    } else {
        b.dx() < a.dx()
    };
    if b_first {
        [*b, *a]
    } else {
        [*a, *b]
    }
}

/// Product measure `a × b`.
pub fn product(a: &Measure1D, b: &Measure1D) -> Measure2D {
    let mut acc = Accum::default();
    if let (Some(da), Some(db)) = (a.continuous(), b.continuous()) {
        let (nx, ny) = (da.grid.n(), db.grid.n());
        let mut values = Vec::with_capacity(nx * ny);
        for &u in &da.values {
            values.extend(db.values.iter().map(|&v| u * v));
        }
        acc.dense.push(Dense2D::new(da.grid, db.grid, values));
    }
    if let Some(da) = a.continuous() {
        for t in b.atoms() {
            acc.lines.push(Line2D {
                axis: LineAxis::X,
                at: t.x,
                profile: da.clone().scaled(t.weight),
            });
        }
    }
    if let Some(db) = b.continuous() {
        for t in a.atoms() {
            acc.lines.push(Line2D {
                axis: LineAxis::Y,
                at: t.x,
                profile: db.clone().scaled(t.weight),
            });
        }
    }
    for s in a.atoms() {
        for t in b.atoms() {
            acc.atoms.push(Atom2D {
                x: s.x,
                y: t.x,
                weight: s.weight * t.weight,
            });
        }
    }
    Measure2D::assemble(acc)
}

fn convolve_dense(a: &Dense2D, b: &Dense2D) -> Result<Option<Dense2D>> {
    let dx = a.x_grid.dx().min(b.x_grid.dx());
    let dy = a.y_grid.dx().min(b.y_grid.dx());
    let (a, b) = match (a.respaced(dx, dy).trimmed(), b.respaced(dx, dy).trimmed()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Ok(None),
    };
    let (ra, sa) = a.used_box();
    let (rb, sb) = b.used_box();
    let (raw, shape) = fft::convolve_real_2d(&ra, sa, &rb, sb)?;
    let cell = dx * dy;
    let raw: Vec<f64> = raw.into_iter().map(|v| v.max(0.0) * cell).collect();
    let out = Dense2D::from_box(
        a.x_grid.x_min() + b.x_grid.x_min(),
        dx,
        a.y_grid.x_min() + b.y_grid.x_min(),
        dy,
        &raw,
        shape,
    );
    Ok(Some(out.trimmed().unwrap_or(out)))
}

fn convolve_pieces(a: &Piece<'_>, b: &Piece<'_>, acc: &mut Accum) -> Result<()> {
    use Piece::*;
    match (a, b) {
        (Dense(p), Dense(q)) => acc.dense.extend(convolve_dense(p, q)?),
        (Dense(d), Line(l)) | (Line(l), Dense(d)) => {
            let across = match l.axis {
                LineAxis::X => d.y_grid.dx(),
                LineAxis::Y => d.x_grid.dx(),
            };
            acc.dense.extend(convolve_dense(d, &l.as_dense(across))?);
        }
        (Dense(d), Atom(t)) | (Atom(t), Dense(d)) => {
            acc.dense.push(d.shifted(t.x, t.y).scaled(t.weight));
        }
        (Line(p), Line(q)) if p.axis == q.axis => acc.lines.push(Line2D {
            axis: p.axis,
            at: p.at + q.at,
            profile: convolve_densities(&p.profile, &q.profile)?,
        }),
        (Line(p), Line(q)) => {
            let (lx, ly) = if p.axis == LineAxis::X {
                (p, q)
            } else {
                (q, p)
            };
            // f(x - x0)·g(y - y0)
            let x_grid = lx.profile.grid.shifted(ly.at);
            let y_grid = ly.profile.grid.shifted(lx.at);
            let mut values = Vec::with_capacity(x_grid.n() * y_grid.n());
            for &u in &lx.profile.values {
                values.extend(ly.profile.values.iter().map(|&v| u * v));
            }
            acc.dense.push(Dense2D::new(x_grid, y_grid, values));
        }
        (Line(l), Atom(t)) | (Atom(t), Line(l)) => {
            let (along, across) = match l.axis {
                LineAxis::X => (t.x, t.y),
                LineAxis::Y => (t.y, t.x),
            };
            acc.lines.push(Line2D {
                axis: l.axis,
                at: l.at + across,
                profile: l.profile.shifted(along).scaled(t.weight),
            });
        }
        (Atom(s), Atom(t)) => acc.atoms.push(Atom2D {
            x: s.x + t.x,
            y: s.y + t.y,
            weight: s.weight * t.weight,
        }),
    }
    Ok(())
}

fn sum_dense(mut parts: Vec<Dense2D>) -> Option<Dense2D> {
    parts.retain(|d| d.values.iter().any(|&v| v > 0.0));
    match parts.len() {
        0 => None,
        1 => parts.pop(),
        _ => {
            let tx = covering_grid(&parts.iter().map(|d| d.x_grid).collect::<Vec<_>>());
            let ty = covering_grid(&parts.iter().map(|d| d.y_grid).collect::<Vec<_>>());
            let mut acc = vec![0.0; tx.n() * ty.n()];
            let cell = tx.dx() * ty.dx();
            for part in &parts {
                let mut sampled = part.sampled_onto(&tx, &ty);
                let m = cell * sampled.iter().sum::<f64>();
                if m > 0.0 {
                    let s = part.mass() / m;
                    sampled.iter_mut().for_each(|v| *v *= s);
                }
                acc.iter_mut().zip(&sampled).for_each(|(a, b)| *a += b);
            }
            Some(Dense2D::new(tx, ty, acc))
        }
    }
}
