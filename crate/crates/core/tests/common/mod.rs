#![allow(dead_code)]

use num_complex::Complex64;
use qrf_core::{FrameSpec, FrameState, GridSpec1D, MixedState, PureState};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Wide grid for the full randomized family (squeezing up to |r| = 1.5).
pub fn wide_grid() -> GridSpec1D {
    GridSpec1D::symmetric(40.0, 2048).unwrap()
}

pub fn vacuum(grid: GridSpec1D) -> MixedState {
    PureState::vacuum(grid).unwrap().into()
}

/// Parameter ranges for random draws.
#[derive(Clone, Copy)]
pub struct Family {
    pub displacement: f64,
    pub squeezing: f64,
    pub max_k: usize,
}

/// States whose Husimi densities fit comfortably in `[-8, 8]²`.
pub const COMPACT: Family = Family {
    displacement: 1.0,
    squeezing: 0.25,
    max_k: 2,
};
/// Random Gaussian mixtures, hermite superpositions up to k = 5 and
/// squeezing in [-1.5, 1.5].
pub const BROAD: Family = Family {
    displacement: 3.0,
    squeezing: 1.5,
    max_k: 5,
};

pub fn random_pure(rng: &mut ChaCha8Rng, grid: GridSpec1D, fam: Family) -> PureState {
    let d = fam.displacement;
    match rng.gen_range(0..3) {
        0 | 1 => PureState::gaussian(
            rng.gen_range(-d..=d),
            rng.gen_range(-d..=d),
            rng.gen_range(-fam.squeezing..=fam.squeezing),
            grid,
        )
        .unwrap(),
        _ => {
            let basis: Vec<PureState> = (0..=fam.max_k)
                .map(|k| PureState::hermite(k, grid).unwrap())
                .collect();
            let coeffs: Vec<Complex64> = basis
                .iter()
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let terms: Vec<(Complex64, &PureState)> = coeffs.iter().copied().zip(&basis).collect();
            PureState::superpose(&terms).unwrap()
        }
    }
}

pub fn random_state(rng: &mut ChaCha8Rng, grid: GridSpec1D, fam: Family) -> MixedState {
    let k = rng.gen_range(1..=3);
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut comps: Vec<(f64, PureState)> = raw
        .iter()
        .map(|w| (w / total, random_pure(rng, grid, fam)))
        .collect();
    // weights must sum to 1 within 1e-9 after the division roundoff
    let drift = 1.0 - comps.iter().map(|c| c.0).sum::<f64>();
    comps[0].0 += drift;
    MixedState::new(comps).unwrap()
}

pub fn random_frame_state(
    rng: &mut ChaCha8Rng,
    grid: GridSpec1D,
    fam: Family,
    p_classical: f64,
) -> FrameState {
    if rng.gen_bool(p_classical) {
        FrameState::ClassicalPoint
    } else {
        FrameState::Quantum(random_state(rng, grid, fam))
    }
}

pub fn random_frame(
    rng: &mut ChaCha8Rng,
    grid: GridSpec1D,
    fam: Family,
    p_classical: f64,
) -> FrameSpec {
    FrameSpec {
        t_prime: random_frame_state(rng, grid, fam, p_classical),
        omega: random_frame_state(rng, grid, fam, p_classical),
    }
}
