mod common;

use qrf_core::phasespace::PhaseSpaceWindow;
use qrf_core::relativize::*;
use qrf_core::{ApparatusState, GridSpec1D, MixedState, PureState};

fn grid() -> GridSpec1D {
    GridSpec1D::default()
}

fn g(x0: f64, p0: f64, r: f64) -> MixedState {
    PureState::gaussian(x0, p0, r, grid()).unwrap().into()
}

fn h(k: usize) -> MixedState {
    PureState::hermite(k, grid()).unwrap().into()
}

#[test]
fn peaked_apparatus_approaches_relative_position() {
    let fine = GridSpec1D::symmetric(10.0, 4096).unwrap();
    let peaked: ApparatusState = PureState::gaussian(0.0, 0.0, 3.0, fine).unwrap().into();
    let v: MixedState = PureState::vacuum(fine).unwrap().into();
    let m =
        relativized_margin_position(&v, &FrameState::from(v.clone()), &peaked, &peaked).unwrap();
    let rel = relative_position_distribution(&v, &v).unwrap();
    assert!(m.l1_distance(&rel) < 0.02, "{}", m.l1_distance(&rel));
    assert!((m.variance() - 1.0 - (-6.0f64).exp()).abs() < 1e-8);
}

#[test]
fn oracle_examples() {
    let w = PhaseSpaceWindow::square(8.0, 64).unwrap();
    let cases = [
        (g(1.0, 1.0, 0.3), FrameSpec::new(h(1), g(0.0, 0.0, 0.0))),
        (h(2), FrameSpec::new(g(0.0, 0.0, 0.0), g(0.5, 0.0, 0.0))),
    ];
    for (rho, f) in cases {
        let dq = oracle_conditioned_position(&rho, &f, &w)
            .unwrap()
            .l1_distance(&conditioned_position(&rho, &f).unwrap());
        let dp = oracle_conditioned_momentum(&rho, &f, &w)
            .unwrap()
            .l1_distance(&conditioned_momentum(&rho, &f).unwrap());
        assert!(dq < 1e-2 && dp < 1e-2, "{dq:e} {dp:e}");
    }
}

#[test]
fn oracle_decides_orientation_for_asymmetric_frames() {
    // a displaced frame apparatus: only the reflected orientation matches
    let w = PhaseSpaceWindow::square(8.0, 64).unwrap();
    let rho = g(0.0, 0.0, 0.0);
    let f = FrameSpec::new(g(1.5, 0.0, 0.0), g(0.0, 0.0, 0.0));
    let oracle = oracle_conditioned_position(&rho, &f, &w).unwrap();
    let reflected = conditioned_position(&rho, &f).unwrap();
    let unreflected = rho
        .position_distribution()
        .convolve(&frame_noise(&f).unwrap().q_noise)
        .unwrap();
    assert!(oracle.l1_distance(&reflected) < 1e-2);
    assert!(oracle.l1_distance(&unreflected) > 0.5);
}

#[test]
fn joint_observable_with_excited_system() {
    let f = FrameSpec::new(g(0.0, 0.0, 0.0), g(0.0, 0.0, 0.0));
    let rho = h(1);
    let (q, p) = joint_observable_distribution(&rho, &f, &PhaseSpaceWindow::default())
        .unwrap()
        .margins();
    assert!(q.l1_distance(&conditioned_position(&rho, &f).unwrap()) < 1e-4);
    assert!(p.l1_distance(&conditioned_momentum(&rho, &f).unwrap()) < 1e-4);
}

#[test]
fn joint_observable_with_asymmetric_apparatus() {
    let f = FrameSpec::new(g(0.8, -0.6, 0.2), h(1));
    let rho = g(-0.4, 0.3, 0.0);
    let (q, p) = joint_observable_distribution(&rho, &f, &PhaseSpaceWindow::default())
        .unwrap()
        .margins();
    assert!(q.l1_distance(&conditioned_position(&rho, &f).unwrap()) < 1e-4);
    assert!(p.l1_distance(&conditioned_momentum(&rho, &f).unwrap()) < 1e-4);
}

#[test]
fn frame_noise_lower_bounds() {
    let mut rng = common::rng(21);
    let grid = common::wide_grid();
    for _ in 0..60 {
        let tp = common::random_frame_state(&mut rng, grid, common::BROAD, 0.3);
        let om = common::random_frame_state(&mut rng, grid, common::BROAD, 0.3);
        let quantum = [&tp, &om].iter().filter(|s| !s.is_classical()).count();
        let k = frame_noise(&FrameSpec {
            t_prime: tp,
            omega: om,
        })
        .unwrap();
        let product = k.q_noise.stddev() * k.p_noise.stddev();
        assert!(
            product >= 0.5 * quantum as f64 - 1e-6,
            "{product} with {quantum} quantum factors"
        );
    }
}

#[test]
fn conditioned_variance_bookkeeping() {
    let mut rng = common::rng(22);
    let grid = common::wide_grid();
    for _ in 0..30 {
        let rho = common::random_state(&mut rng, grid, common::BROAD);
        let f = common::random_frame(&mut rng, grid, common::BROAD, 0.2);
        let t: ApparatusState = common::random_state(&mut rng, grid, common::BROAD).into();
        let k = frame_noise(&f).unwrap();
        let c = conditioned_position(&rho, &f).unwrap();
        let vq = rho.position_distribution().variance() + k.q_noise.variance();
        assert!((c.variance() - vq).abs() < 1e-8);
        assert!((c.mean() - rho.position_distribution().mean() + k.q_noise.mean()).abs() < 1e-8);
        let s = conditioned_smeared_momentum(&rho, &t, &f).unwrap();
        let vp = rho.momentum_distribution().variance()
            + qrf_core::phasespace::nu_t(&t).variance()
            + k.p_noise.variance();
        assert!((s.variance() - vp).abs() < 1e-8);
        if let FrameState::Quantum(sigma) = &f.omega {
            let m = relativized_margin_momentum(&rho, &f.omega, &t, &t).unwrap();
            let expect = 2.0 * qrf_core::phasespace::nu_t(&t).variance()
                + rho.momentum_distribution().variance()
                + sigma.momentum_distribution().variance();
            assert!((m.variance() - expect).abs() < 1e-8);
        }
    }
}

#[test]
fn classical_frame_reduction() {
    let mut rng = common::rng(23);
    let grid = common::wide_grid();
    for _ in 0..10 {
        let rho = common::random_state(&mut rng, grid, common::BROAD);
        let f = FrameSpec::classical();
        assert!(
            conditioned_position(&rho, &f)
                .unwrap()
                .l1_distance(&rho.position_distribution())
                < 1e-12
        );
        assert!(
            split_conditioned_momentum(&rho, &f.omega)
                .unwrap()
                .l1_distance(&rho.momentum_distribution())
                < 1e-12
        );
    }
}
