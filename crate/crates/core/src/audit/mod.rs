//! Uncertainty-relation audit: deviation products of each scenario against
//! their lower bounds.
//!
//! Each bound is a sum of independent `1/2` contributions, one per quantum
//! source of spread (system `ρ`, apparatus `T`, frame apparatus `T′`, frame
//! preparation `ω`) that enters the scenario's observables. A classical-point
//! frame component contributes nothing, so its bound drops by `1/2`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cvstate::{MixedState, PureState};
use crate::error::{Error, Result};
use crate::measure::{io::format_float, Measure1D};
use crate::phasespace::{self, ApparatusState};
use crate::relativize::{self, FrameSpec, FrameState};

/// Reports with `slack >= -SLACK_TOLERANCE` pass.
pub const SLACK_TOLERANCE: f64 = 1e-6;
/// Tolerance on the hypotheses and conclusion of [`prop4_check`].
pub const PROP4_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Scenario {
    Sharp,
    Smeared,
    Noise,
    RelSharp,
    RelSmeared,
    SplitSharp,
    SplitSmeared,
    ClassicalSharp,
    ClassicalSmeared,
}

impl Scenario {
    pub const ALL: [Scenario; 9] = [
        Scenario::Sharp,
        Scenario::Smeared,
        Scenario::Noise,
        Scenario::RelSharp,
        Scenario::RelSmeared,
        Scenario::SplitSharp,
        Scenario::SplitSmeared,
        Scenario::ClassicalSharp,
        Scenario::ClassicalSmeared,
    ];

    /// Bound with every frame component quantum.
    pub fn nominal_bound(self) -> f64 {
        match self {
            Scenario::Sharp | Scenario::Noise | Scenario::ClassicalSharp => 0.5,
            Scenario::Smeared | Scenario::SplitSharp | Scenario::ClassicalSmeared => 1.0,
            Scenario::RelSharp | Scenario::SplitSmeared => 1.5,
            Scenario::RelSmeared => 2.0,
        }
    }

    /// Bound for the given frame: `1/2` per quantum source of spread.
    pub fn bound(self, frame: &FrameSpec) -> f64 {
        let quantum = |s: &FrameState| if s.is_classical() { 0.0 } else { 0.5 };
        match self {
            Scenario::RelSharp => 0.5 + quantum(&frame.t_prime) + quantum(&frame.omega),
            Scenario::RelSmeared => 1.0 + quantum(&frame.t_prime) + quantum(&frame.omega),
            Scenario::SplitSharp => 0.5 + quantum(&frame.omega),
            Scenario::SplitSmeared => 1.0 + quantum(&frame.omega),
            other => other.nominal_bound(),
        }
    }

    pub fn needs_apparatus(self) -> bool {
        matches!(
            self,
            Scenario::Smeared
                | Scenario::Noise
                | Scenario::RelSmeared
                | Scenario::SplitSmeared
                | Scenario::ClassicalSmeared
        )
    }

    pub fn id(self) -> &'static str {
        match self {
            Scenario::Sharp => "SHARP",
            Scenario::Smeared => "SMEARED",
            Scenario::Noise => "NOISE",
            Scenario::RelSharp => "REL_SHARP",
            Scenario::RelSmeared => "REL_SMEARED",
            Scenario::SplitSharp => "SPLIT_SHARP",
            Scenario::SplitSmeared => "SPLIT_SMEARED",
            Scenario::ClassicalSharp => "CLASSICAL_SHARP",
            Scenario::ClassicalSmeared => "CLASSICAL_SMEARED",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidState(format!("unknown scenario {s:?}")))
    }
}

/// One audited uncertainty relation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct URReport {
    pub scenario: Scenario,
    pub delta_q: f64,
    pub delta_p: f64,
    pub product: f64,
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
    pub inputs_digest: String,
}

impl URReport {
    /// Report against the scenario's nominal bound.
    pub fn new(scenario: Scenario, delta_q: f64, delta_p: f64, inputs_digest: String) -> Self {
        Self::with_bound(
            scenario,
            delta_q,
            delta_p,
            scenario.nominal_bound(),
            inputs_digest,
        )
    }

    pub fn with_bound(
        scenario: Scenario,
        delta_q: f64,
        delta_p: f64,
        bound: f64,
        inputs_digest: String,
    ) -> Self {
        let product = delta_q * delta_p;
        let slack = product - bound;
        Self {
            scenario,
            delta_q,
            delta_p,
            product,
            bound,
            slack,
            pass: slack >= -SLACK_TOLERANCE,
            inputs_digest,
        }
    }

    pub const CSV_HEADER: &'static str = "scenario,delta_q,delta_p,product,bound,slack,pass";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.scenario,
            format_float(self.delta_q),
            format_float(self.delta_p),
            format_float(self.product),
            format_float(self.bound),
            format_float(self.slack),
            self.pass
        )
    }
}

/// SHA-256 over a scenario id and the sampled input states.
pub struct InputsDigest(Sha256);

impl InputsDigest {
    pub fn new(scenario: Scenario) -> Self {
        let mut h = Sha256::new();
        h.update(scenario.id().as_bytes());
        Self(h)
    }

    fn tag(mut self, label: &str) -> Self {
        self.0.update([0u8]);
        self.0.update(label.as_bytes());
        self
    }

    pub fn state(mut self, label: &str, state: &MixedState) -> Self {
        self = self.tag(label);
        let g = state.grid();
        for v in [g.x_min(), g.dx(), g.n() as f64] {
            self.0.update(v.to_le_bytes());
        }
        for (w, s) in state.components() {
            self.0.update(w.to_le_bytes());
            for a in s.amplitudes() {
                self.0.update(a.re.to_le_bytes());
                self.0.update(a.im.to_le_bytes());
            }
        }
        self
    }

    pub fn frame_state(self, label: &str, state: &FrameState) -> Self {
        match state {
            FrameState::Quantum(s) => self.state(label, s),
            FrameState::ClassicalPoint => self.tag(label).tag("classical_point"),
        }
    }

    pub fn frame(self, frame: &FrameSpec) -> Self {
        self.frame_state("T_prime", &frame.t_prime)
            .frame_state("omega", &frame.omega)
    }

    pub fn apparatus(self, t: Option<&ApparatusState>) -> Self {
        match t {
            Some(t) => self.state("T", t.state()),
            None => self.tag("T").tag("none"),
        }
    }

    pub fn finish(self) -> String {
        self.0
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

fn require(s: Scenario, t: Option<&ApparatusState>) -> Result<&ApparatusState> {
    t.ok_or_else(|| Error::MissingApparatusState(s.id().into()))
}

/// The (position, momentum) statistics a scenario audits.
pub fn scenario_distributions(
    s: Scenario,
    rho: &MixedState,
    f: &FrameSpec,
    t: Option<&ApparatusState>,
) -> Result<(Measure1D, Measure1D)> {
    let classical = FrameSpec::classical();
    Ok(match s {
        Scenario::Sharp => (rho.position_distribution(), rho.momentum_distribution()),
        Scenario::Smeared => phasespace::margin_prediction(rho, require(s, t)?)?,
        Scenario::Noise => {
            let t = require(s, t)?;
            (phasespace::mu_t(t), phasespace::nu_t(t))
        }
        Scenario::RelSharp => (
            relativize::conditioned_position(rho, f)?,
            relativize::conditioned_momentum(rho, f)?,
        ),
        Scenario::RelSmeared => {
            let t = require(s, t)?;
            (
                relativize::conditioned_smeared_position(rho, t, f)?,
                relativize::conditioned_smeared_momentum(rho, t, f)?,
            )
        }
        Scenario::SplitSharp => (
            relativize::split_conditioned_position(rho, &f.omega)?,
            relativize::split_conditioned_momentum(rho, &f.omega)?,
        ),
        Scenario::SplitSmeared => {
            let (q, p) = phasespace::margin_prediction(rho, require(s, t)?)?;
            (
                q.convolve(&f.omega.position_distribution().reflect())?,
                p.convolve(&f.omega.momentum_distribution().reflect())?,
            )
        }
        Scenario::ClassicalSharp => (
            relativize::conditioned_position(rho, &classical)?,
            relativize::conditioned_momentum(rho, &classical)?,
        ),
        Scenario::ClassicalSmeared => {
            let t = require(s, t)?;
            (
                relativize::conditioned_smeared_position(rho, t, &classical)?,
                relativize::conditioned_smeared_momentum(rho, t, &classical)?,
            )
        }
    })
}

/// Audits one scenario. `t` is required exactly for the smeared scenarios
/// and `NOISE`.
pub fn run_scenario(
    s: Scenario,
    rho: &MixedState,
    f: &FrameSpec,
    t: Option<&ApparatusState>,
) -> Result<URReport> {
    let (q, p) = scenario_distributions(s, rho, f, t)?;
    let digest = InputsDigest::new(s)
        .state("rho", rho)
        .frame(f)
        .apparatus(if s.needs_apparatus() { t } else { None })
        .finish();
    Ok(URReport::with_bound(
        s,
        q.stddev(),
        p.stddev(),
        s.bound(f),
        digest,
    ))
}

/// Every scenario applicable to the inputs: those needing `T` are skipped
/// when it is absent.
pub fn run_all(
    rho: &MixedState,
    f: &FrameSpec,
    t: Option<&ApparatusState>,
) -> Result<Vec<URReport>> {
    Scenario::ALL
        .into_iter()
        .filter(|s| t.is_some() || !s.needs_apparatus())
        .map(|s| run_scenario(s, rho, f, t))
        .collect()
}

/// Composition of trade-offs: from `Δa·Δb ≥ x` and `Δc·Δd ≥ y` follows
/// `Δ(a⋆c)·Δ(b⋆d) ≥ x + y`. Returns whether the conclusion holds.
pub fn prop4_check(
    a: &Measure1D,
    b: &Measure1D,
    c: &Measure1D,
    d: &Measure1D,
    x: f64,
    y: f64,
) -> Result<bool> {
    let (ab, cd) = (a.stddev() * b.stddev(), c.stddev() * d.stddev());
    if ab < x - PROP4_TOLERANCE || cd < y - PROP4_TOLERANCE {
        return Err(Error::PreconditionViolated(format!(
            "input products ({ab}, {cd}) fall below ({x}, {y})"
        )));
    }
    let lhs = a.convolve(c)?.stddev() * b.convolve(d)?.stddev();
    Ok(lhs >= x + y - PROP4_TOLERANCE)
}

/// One point of the classical-limit sweep; `r = ∞` is the classical point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub r: f64,
    pub report: URReport,
}

impl SweepRecord {
    pub const CSV_HEADER: &'static str = "r,scenario,product,bound";

    /// The classical endpoint is written as `inf`.
    pub fn csv_row(&self) -> String {
        let r = if self.r.is_infinite() {
            "inf".to_string()
        } else {
            format_float(self.r)
        };
        format!(
            "{r},{},{},{}",
            self.report.scenario,
            format_float(self.report.product),
            format_float(self.report.bound)
        )
    }
}

/// REL_SHARP and REL_SMEARED with the frame preparation squeezed in position,
/// `ω = gaussian(0,0,r)`, and vacuum `T′ = T`. An infinite `r` stands for the
/// fully classical frame; it is appended when missing.
pub fn classical_limit_sweep(rho: &MixedState, r_values: &[f64]) -> Result<Vec<SweepRecord>> {
    if r_values.is_empty() {
        return Err(Error::InvalidState(
            "classical-limit sweep needs at least one r".into(),
        ));
    }
    if r_values
        .iter()
        .any(|r| r.is_nan() || *r == f64::NEG_INFINITY)
    {
        return Err(Error::InvalidState(
            "sweep values must be real or +inf".into(),
        ));
    }
    let grid = *rho.grid();
    let vacuum = ApparatusState::from(PureState::vacuum(grid)?);
    let mut rs = r_values.to_vec();
    if !rs.iter().any(|r| r.is_infinite()) {
        rs.push(f64::INFINITY);
    }
    let mut out = Vec::with_capacity(2 * rs.len());
    for r in rs {
        let frame = if r.is_infinite() {
            FrameSpec::classical()
        } else {
            FrameSpec::new(
                vacuum.state().clone(),
                PureState::gaussian(0.0, 0.0, r, grid)?,
            )
        };
        for s in [Scenario::RelSharp, Scenario::RelSmeared] {
            out.push(SweepRecord {
                r,
                report: run_scenario(s, rho, &frame, Some(&vacuum))?,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::GridSpec1D;

    fn grid() -> GridSpec1D {
        GridSpec1D::default()
    }

    fn vac() -> MixedState {
        PureState::vacuum(grid()).unwrap().into()
    }

    fn vac_t() -> ApparatusState {
        vac().into()
    }

    #[test]
    fn bound_table() {
        let nominal: Vec<f64> = Scenario::ALL.iter().map(|s| s.nominal_bound()).collect();
        assert_eq!(nominal, [0.5, 1.0, 0.5, 1.5, 2.0, 1.0, 1.5, 0.5, 1.0]);
        let c = FrameSpec::classical();
        assert_eq!(Scenario::RelSharp.bound(&c), 0.5);
        assert_eq!(Scenario::RelSmeared.bound(&c), 1.0);
        let half = FrameSpec::new(vac(), FrameState::ClassicalPoint);
        assert_eq!(Scenario::RelSharp.bound(&half), 1.0);
        assert_eq!(Scenario::SplitSharp.bound(&half), 0.5);
    }

    #[test]
    fn scenario_ids_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.id().parse::<Scenario>().unwrap(), s);
            assert_eq!(
                serde_json::to_string(&s).unwrap(),
                format!("\"{}\"", s.id())
            );
        }
        assert!("FOO".parse::<Scenario>().is_err());
    }

    #[test]
    fn vacuum_saturation() {
        let f = FrameSpec::new(vac(), vac());
        let reports = run_all(&vac(), &f, Some(&vac_t())).unwrap();
        assert_eq!(reports.len(), 9);
        for r in &reports {
            assert!(
                (r.product - r.bound).abs() < 1e-3,
                "{}: {}",
                r.scenario,
                r.product
            );
            assert!(r.pass);
        }
    }

    #[test]
    fn missing_apparatus() {
        let f = FrameSpec::classical();
        let err = run_scenario(Scenario::Smeared, &vac(), &f, None).unwrap_err();
        assert!(matches!(err, Error::MissingApparatusState(_)));
        assert!(err.to_string().contains("MissingApparatusState"));
        assert_eq!(run_all(&vac(), &f, None).unwrap().len(), 4);
    }

    #[test]
    fn squeezed_frame_inflates_conditioned_product() {
        let omega = PureState::gaussian(0.0, 0.0, 1.0, grid()).unwrap();
        let r = run_scenario(
            Scenario::RelSharp,
            &vac(),
            &FrameSpec::new(vac(), omega),
            None,
        )
        .unwrap();
        let expect = ((1.0 + (-2.0f64).exp() / 2.0) * (1.0 + 2.0f64.exp() / 2.0)).sqrt();
        assert!((r.product - expect).abs() < 1e-6);
        assert!(r.product > 1.5);
    }

    #[test]
    fn rel_sharp_and_split_smeared_coincide() {
        let tp = PureState::gaussian(0.3, 0.0, 0.4, grid()).unwrap();
        let omega = PureState::hermite(1, grid()).unwrap();
        let f = FrameSpec::new(tp.clone(), omega);
        let rho: MixedState = PureState::gaussian(1.0, -1.0, -0.2, grid()).unwrap().into();
        let a = run_scenario(Scenario::RelSharp, &rho, &f, None).unwrap();
        let b = run_scenario(Scenario::SplitSmeared, &rho, &f, Some(&tp.into())).unwrap();
        assert!((a.product - b.product).abs() < 1e-6);
    }

    #[test]
    fn report_row_and_digest() {
        let r = URReport::new(Scenario::Sharp, 0.5, 1.0, "abc".into());
        assert_eq!(r.slack, 0.0);
        assert!(r.pass);
        assert!(r.csv_row().starts_with("SHARP,5.0000000000000000e-1,"));
        assert!(r.csv_row().ends_with(",true"));
        let d1 = InputsDigest::new(Scenario::Sharp)
            .state("rho", &vac())
            .finish();
        let d2 = InputsDigest::new(Scenario::Sharp)
            .state("rho", &vac())
            .finish();
        let d3 = InputsDigest::new(Scenario::Smeared)
            .state("rho", &vac())
            .finish();
        assert_eq!(d1, d2);
        assert_ne!(d1, d3);
        assert_eq!(d1.len(), 64);
    }

    #[test]
    fn prop4_examples() {
        let n = vac().position_distribution();
        assert!(prop4_check(&n, &n, &n, &n, 0.5, 0.5).unwrap());
        let z = Measure1D::dirac(0.0);
        assert!(prop4_check(&n, &n, &z, &z, 0.5, 0.0).unwrap());
        assert!(matches!(
            prop4_check(&n, &n, &z, &z, 0.5, 0.1),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn sweep_endpoints() {
        let rows = classical_limit_sweep(&vac(), &[0.0, 1.0]).unwrap();
        assert_eq!(rows.len(), 6);
        assert!((rows[0].report.product - 1.5).abs() < 1e-6);
        let q2 = 1.0 + (-2.0f64).exp() / 2.0;
        let p2 = 1.0 + 2.0f64.exp() / 2.0;
        assert!((rows[2].report.product - (q2 * p2).sqrt()).abs() < 1e-3);
        let end: Vec<_> = rows.iter().filter(|r| r.r.is_infinite()).collect();
        assert!((end[0].report.product - 0.5).abs() < 1e-6);
        assert!((end[1].report.product - 1.0).abs() < 1e-6);
        assert!(end[0].csv_row().starts_with("inf,REL_SHARP,"));
        assert!(classical_limit_sweep(&vac(), &[]).is_err());
    }
}
