//! Statistics of relativized and frame-conditioned observables.
//!
//! A phase-space frame is an apparatus state `T′` together with a frame
//! preparation `ω`; either may be the classical point at the origin, whose
//! statistics are exact Dirac atoms. Conditioning on the frame convolves the
//! system statistics with the *reflected* frame noise
//! (`q_noise = μ_{T′} ⋆ λ^Q_ω`), since the conditioned quantity is the system
//! position relative to the frame reading. Smearings that come from a
//! covariant phase-space observable of the system use the unreflected
//! orientation. Reflection preserves variances, so every uncertainty bound
//! is orientation independent.

use rayon::prelude::*;

use crate::cvstate::MixedState;
use crate::error::{Error, Result};
use crate::measure::{product, Measure1D, Measure2D};
use crate::phasespace::{self, ApparatusState, PhaseSpaceWindow};

/// A quantum state or the classical point at the phase-space origin.
#[derive(Debug, Clone, PartialEq)]
pub enum FrameState {
    Quantum(MixedState),
    ClassicalPoint,
}

impl FrameState {
    pub fn is_classical(&self) -> bool {
        matches!(self, FrameState::ClassicalPoint)
    }

    pub fn quantum(&self) -> Option<&MixedState> {
        match self {
            FrameState::Quantum(s) => Some(s),
            FrameState::ClassicalPoint => None,
        }
    }

    /// Sharp position statistics; `dirac(0)` for the classical point.
    pub fn position_distribution(&self) -> Measure1D {
        self.quantum()
            .map_or_else(|| Measure1D::dirac(0.0), MixedState::position_distribution)
    }

    pub fn momentum_distribution(&self) -> Measure1D {
        self.quantum()
            .map_or_else(|| Measure1D::dirac(0.0), MixedState::momentum_distribution)
    }

    /// `μ` for this state used as an apparatus; `dirac(0)` when classical.
    pub fn smearing_position(&self) -> Measure1D {
        self.quantum().map_or_else(
            || Measure1D::dirac(0.0),
            |s| s.parity().position_distribution(),
        )
    }

    pub fn smearing_momentum(&self) -> Measure1D {
        self.quantum().map_or_else(
            || Measure1D::dirac(0.0),
            |s| s.parity().momentum_distribution(),
        )
    }
}

impl From<MixedState> for FrameState {
    fn from(s: MixedState) -> Self {
        FrameState::Quantum(s)
    }
}

impl From<crate::cvstate::PureState> for FrameState {
    fn from(s: crate::cvstate::PureState) -> Self {
        FrameState::Quantum(s.into())
    }
}

/// A phase-space reference frame: apparatus `T′` and preparation `ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSpec {
    pub t_prime: FrameState,
    pub omega: FrameState,
}

impl FrameSpec {
    pub fn new(t_prime: impl Into<FrameState>, omega: impl Into<FrameState>) -> Self {
        Self {
            t_prime: t_prime.into(),
            omega: omega.into(),
        }
    }

    /// Both roles held by the classical point.
    pub fn classical() -> Self {
        Self {
            t_prime: FrameState::ClassicalPoint,
            omega: FrameState::ClassicalPoint,
        }
    }

    pub fn is_fully_classical(&self) -> bool {
        self.t_prime.is_classical() && self.omega.is_classical()
    }
}

/// Frame noise of the conditioning map.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningKernel {
    pub q_noise: Measure1D,
    pub p_noise: Measure1D,
}

/// `q_noise = μ_{T′} ⋆ λ^Q_ω`, `p_noise = ν_{T′} ⋆ λ^P_ω`.
pub fn frame_noise(f: &FrameSpec) -> Result<ConditioningKernel> {
    Ok(ConditioningKernel {
        q_noise: f
            .t_prime
            .smearing_position()
            .convolve(&f.omega.position_distribution())?,
        p_noise: f
            .t_prime
            .smearing_momentum()
            .convolve(&f.omega.momentum_distribution())?,
    })
}

/// `λ^Q_ρ ⋆ reflect(q_noise)`.
pub fn conditioned_position(rho: &MixedState, f: &FrameSpec) -> Result<Measure1D> {
    let k = frame_noise(f)?;
    rho.position_distribution().convolve(&k.q_noise.reflect())
}

/// `λ^P_ρ ⋆ reflect(p_noise)`.
pub fn conditioned_momentum(rho: &MixedState, f: &FrameSpec) -> Result<Measure1D> {
    let k = frame_noise(f)?;
    rho.momentum_distribution().convolve(&k.p_noise.reflect())
}

/// Conditioned `G^T` position margin, `(λ^Q_ρ ⋆ μ_T) ⋆ reflect(q_noise)`.
pub fn conditioned_smeared_position(
    rho: &MixedState,
    t: &ApparatusState,
    f: &FrameSpec,
) -> Result<Measure1D> {
    let k = frame_noise(f)?;
    rho.position_distribution()
        .convolve(&phasespace::mu_t(t))?
        .convolve(&k.q_noise.reflect())
}

pub fn conditioned_smeared_momentum(
    rho: &MixedState,
    t: &ApparatusState,
    f: &FrameSpec,
) -> Result<Measure1D> {
    let k = frame_noise(f)?;
    rho.momentum_distribution()
        .convolve(&phasespace::nu_t(t))?
        .convolve(&k.p_noise.reflect())
}

/// Law of `Q_S - Q_R` in the product state `ρ ⊗ σ`.
pub fn relative_position_distribution(rho: &MixedState, sigma: &MixedState) -> Result<Measure1D> {
    rho.position_distribution()
        .convolve(&sigma.position_distribution().reflect())
}

/// Law of `P_S - P_R` in `ρ ⊗ σ`.
pub fn relative_momentum_distribution(rho: &MixedState, sigma: &MixedState) -> Result<Measure1D> {
    rho.momentum_distribution()
        .convolve(&sigma.momentum_distribution().reflect())
}

fn quantum_factor(sigma: &FrameState) -> Result<&MixedState> {
    sigma.quantum().ok_or_else(|| {
        Error::ContractViolation("relativized margins require a quantum frame factor σ".into())
    })
}

/// Relativized `G^T` margin for system `T` and frame `T′` in `ρ ⊗ σ`:
/// `(μ_T ⋆ reflect(μ_{T′})) ⋆ (λ^Q_ρ ⋆ reflect(λ^Q_σ))`.
pub fn relativized_margin_position(
    rho: &MixedState,
    sigma: &FrameState,
    t: &ApparatusState,
    t_prime: &ApparatusState,
) -> Result<Measure1D> {
    let sigma = quantum_factor(sigma)?;
    let smear = phasespace::mu_t(t).convolve(&phasespace::mu_t(t_prime).reflect())?;
    smear.convolve(&relative_position_distribution(rho, sigma)?)
}

pub fn relativized_margin_momentum(
    rho: &MixedState,
    sigma: &FrameState,
    t: &ApparatusState,
    t_prime: &ApparatusState,
) -> Result<Measure1D> {
    let sigma = quantum_factor(sigma)?;
    let smear = phasespace::nu_t(t).convolve(&phasespace::nu_t(t_prime).reflect())?;
    smear.convolve(&relative_momentum_distribution(rho, sigma)?)
}

/// Joint distribution whose margins are the frame-conditioned sharp
/// position and momentum statistics.
///
/// For quantum `T′` this is the `G^{ΠT′Π}` density of `ρ` convolved with the
/// reflected product `λ^Q_ω × λ^P_ω`; for classical `T′` the Husimi factor
/// is replaced by `λ^Q_ρ × λ^P_ρ`.
pub fn joint_observable_distribution(
    rho: &MixedState,
    f: &FrameSpec,
    w: &PhaseSpaceWindow,
) -> Result<Measure2D> {
    let base = match &f.t_prime {
        FrameState::Quantum(tp) => phasespace::husimi(rho, &ApparatusState::new(tp.parity()), w)?,
        FrameState::ClassicalPoint => {
            product(&rho.position_distribution(), &rho.momentum_distribution())
        }
    };
    let frame = product(
        &f.omega.position_distribution(),
        &f.omega.momentum_distribution(),
    );
    base.convolve2d(&frame.reflect2d())
}

fn oracle_frame(f: &FrameSpec) -> Result<(&MixedState, ApparatusState)> {
    match (&f.omega, &f.t_prime) {
        (FrameState::Quantum(o), FrameState::Quantum(t)) => Ok((o, ApparatusState::new(t.clone()))),
        _ => Err(Error::ContractViolation(
            "the quadrature oracle needs quantum ω and T′".into(),
        )),
    }
}

/// Direct quadrature of the conditioning map: the sharp position statistics
/// of `W(q,p)* ρ W(q,p)`, averaged over the frame's `G^{T′}` reading `(q,p)`
/// in the preparation `ω` on the window cells.
pub fn oracle_conditioned_position(
    rho: &MixedState,
    f: &FrameSpec,
    w: &PhaseSpaceWindow,
) -> Result<Measure1D> {
    oracle(
        rho,
        f,
        w,
        |s| s.amplitudes().iter().map(|a| a.norm_sqr()).collect(),
        *rho.grid(),
    )
}

pub fn oracle_conditioned_momentum(
    rho: &MixedState,
    f: &FrameSpec,
    w: &PhaseSpaceWindow,
) -> Result<Measure1D> {
    oracle(
        rho,
        f,
        w,
        |s| s.to_momentum().iter().map(|a| a.norm_sqr()).collect(),
        rho.grid().reciprocal(),
    )
}

fn oracle(
    rho: &MixedState,
    f: &FrameSpec,
    w: &PhaseSpaceWindow,
    density: impl Fn(&crate::cvstate::PureState) -> Vec<f64> + Sync,
    out_grid: crate::measure::GridSpec1D,
) -> Result<Measure1D> {
    let (omega, t_prime) = oracle_frame(f)?;
    let reading = phasespace::husimi(omega, &t_prime, w)?;
    let d = reading.dense().expect("husimi density is dense");
    let (qg, pg) = (*d.x_grid(), *d.y_grid());
    let cell = qg.dx() * pg.dx();
    let n = out_grid.n();
    let rows: Vec<Vec<f64>> = (0..qg.n())
        .into_par_iter()
        .map(|iq| {
            let q = qg.point(iq);
            let mut acc = vec![0.0; n];
            for ip in 0..pg.n() {
                let weight = d.value(iq, ip) * cell;
                if weight == 0.0 {
                    continue;
                }
                let p = pg.point(ip);
                for (wi, psi) in rho.components() {
                    let moved = psi.weyl_unchecked(-q, -p);
                    for (a, v) in acc.iter_mut().zip(density(&moved)) {
                        *a += weight * wi * v;
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; n];
    for row in rows {
        total.iter_mut().zip(row).for_each(|(t, v)| *t += v);
    }
    Measure1D::from_density(total, out_grid, true)
}

/// `λ^Q_ρ ⋆ reflect(λ^Q_ω)`: position relativized to the frame's sharp
/// position alone.
pub fn split_conditioned_position(rho: &MixedState, omega: &FrameState) -> Result<Measure1D> {
    rho.position_distribution()
        .convolve(&omega.position_distribution().reflect())
}

pub fn split_conditioned_momentum(rho: &MixedState, omega: &FrameState) -> Result<Measure1D> {
    rho.momentum_distribution()
        .convolve(&omega.momentum_distribution().reflect())
}
