//! The parametrized PDE family, its boundary/forcing sets and the PINN loss terms.
//!
//! The residual is `u_t − L·u_xx + N·u·u_x − F(t)`: Burgers-like for `N = 1`,
//! the heat equation for `N = 0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::diffkit::{Component, Jet2, JetArith, JetEval, ValueEval};
use crate::error::{Error, Result};
use crate::netlib::ModelHandle;
use crate::sampler::{CollocationSet, Point};

/// Values of `L` in the reference experiment matrix.
pub const STANDARD_L_VALUES: [f64; 5] = [0.01, 0.03, 0.1, 0.3, 1.0];
/// Values of `N` in the reference experiment matrix.
pub const STANDARD_N_VALUES: [f64; 2] = [0.0, 1.0];

/// Initial profile `u_t(x)` and forcing `F(t)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryFamily {
    /// `sin(3πx)·x` with forcing `sin(4πt)`.
    XSin,
    /// `50x(0.3−x)(0.6−x)(1−x)` with forcing `15t(0.4−t)(1−t)`.
    Poly,
    /// `sin(cπx)·x` with forcing `sin(cπt)`.
    XSinC { c: f64 },
}

impl BoundaryFamily {
    pub fn initial_condition(&self, x: f64) -> f64 {
        match *self {
            BoundaryFamily::XSin => (3.0 * PI * x).sin() * x,
            BoundaryFamily::Poly => 50.0 * x * (0.3 - x) * (0.6 - x) * (1.0 - x),
            BoundaryFamily::XSinC { c } => (c * PI * x).sin() * x,
        }
    }

    pub fn forcing(&self, t: f64) -> f64 {
        match *self {
            BoundaryFamily::XSin => (4.0 * PI * t).sin(),
            BoundaryFamily::Poly => 15.0 * t * (0.4 - t) * (1.0 - t),
            BoundaryFamily::XSinC { c } => (c * PI * t).sin(),
        }
    }

    /// `"xsin"`, `"poly"` or `"xsinc"`.
    pub fn name(&self) -> &'static str {
        match self {
            BoundaryFamily::XSin => "xsin",
            BoundaryFamily::Poly => "poly",
            BoundaryFamily::XSinC { .. } => "xsinc",
        }
    }

    /// Name including the complexity parameter where there is one.
    pub fn label(&self) -> String {
        match self {
            BoundaryFamily::XSinC { c } => format!("xsinc{c}"),
            other => other.name().to_string(),
        }
    }

    pub fn from_parts(name: &str, c: Option<f64>) -> Result<Self> {
        match (name, c) {
            ("xsin", None) => Ok(BoundaryFamily::XSin),
            ("poly", None) => Ok(BoundaryFamily::Poly),
            ("xsinc", Some(c)) if c.is_finite() => Ok(BoundaryFamily::XSinC { c }),
            ("xsinc", _) => Err(Error::Config("family \"xsinc\" needs a finite `c`".into())),
            ("xsin" | "poly", Some(_)) => Err(Error::Config(format!("family {name:?} takes no `c`"))),
            _ => Err(Error::Config(format!(
                "unknown family {name:?}; expected \"xsin\", \"poly\" or \"xsinc\""
            ))),
        }
    }
}

/// Free-standing form of [`BoundaryFamily::initial_condition`].
pub fn initial_condition(family: &BoundaryFamily, x: f64) -> f64 {
    family.initial_condition(x)
}

/// Free-standing form of [`BoundaryFamily::forcing`].
pub fn forcing(family: &BoundaryFamily, t: f64) -> f64 {
    family.forcing(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub t_max: f64,
    pub x_lo: f64,
    pub x_hi: f64,
}

impl Default for Domain {
    fn default() -> Self {
        Domain {
            t_max: 1.0,
            x_lo: 0.0,
            x_hi: 1.0,
        }
    }
}

impl Domain {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::Config(format!("T must be positive, got {}", self.t_max)));
        }
        if !(self.x_lo < self.x_hi && self.x_lo.is_finite() && self.x_hi.is_finite()) {
            return Err(Error::Config(format!(
                "spatial extent [{}, {}] is empty",
                self.x_lo, self.x_hi
            )));
        }
        Ok(())
    }

    pub fn contains(&self, t: f64, x: f64) -> bool {
        (0.0..=self.t_max).contains(&t) && (self.x_lo..=self.x_hi).contains(&x)
    }
}

/// One PDE of the family: `(L, N, boundary family, domain)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemConfig", into = "ProblemConfig")]
pub struct PdeProblem {
    pub l: f64,
    pub n: f64,
    pub family: BoundaryFamily,
    pub domain: Domain,
}

/// On-disk form: `{L, N, family, c?}` plus an optional domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "N")]
    pub n: f64,
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
}

impl TryFrom<ProblemConfig> for PdeProblem {
    type Error = Error;

    fn try_from(cfg: ProblemConfig) -> Result<Self> {
        let p = PdeProblem {
            l: cfg.l,
            n: cfg.n,
            family: BoundaryFamily::from_parts(&cfg.family, cfg.c)?,
            domain: cfg.domain.unwrap_or_default(),
        };
        p.validate()?;
        Ok(p)
    }
}

impl From<PdeProblem> for ProblemConfig {
    fn from(p: PdeProblem) -> Self {
        let c = match p.family {
            BoundaryFamily::XSinC { c } => Some(c),
            _ => None,
        };
        ProblemConfig {
            l: p.l,
            n: p.n,
            family: p.family.name().to_string(),
            c,
            domain: (p.domain != Domain::default()).then_some(p.domain),
        }
    }
}

impl PdeProblem {
    pub fn new(l: f64, n: f64, family: BoundaryFamily) -> Result<Self> {
        let p = PdeProblem {
            l,
            n,
            family,
            domain: Domain::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l > 0.0 && self.l.is_finite()) {
            return Err(Error::Config(format!("L must be positive, got {}", self.l)));
        }
        if !self.n.is_finite() {
            return Err(Error::Config(format!("N must be finite, got {}", self.n)));
        }
        self.domain.validate()
    }

    /// False for problems outside the reference `(L, N)` grid; such problems
    /// are accepted but reported as such.
    pub fn is_standard_problem(&self) -> bool {
        STANDARD_N_VALUES.contains(&self.n) && STANDARD_L_VALUES.contains(&self.l)
    }

    pub fn initial_condition(&self, x: f64) -> f64 {
        self.family.initial_condition(x)
    }

    pub fn forcing(&self, t: f64) -> f64 {
        self.family.forcing(t)
    }

    /// Spatial boundary value at `x`; constant in time.
    pub fn boundary_value(&self, x: f64) -> f64 {
        self.family.initial_condition(x)
    }

    /// Residual at time `t` for the network output jet `u`.
    pub fn residual(&self, u: Jet2, t: f64) -> f64 {
        u.dt - self.l * u.dxx + self.n * u.v * u.dx - self.forcing(t)
    }

    /// Residual recorded in any jet backend.
    pub fn residual_in<A: JetArith>(&self, ar: &mut A, u: A::V, t: f64) -> A::V {
        let ut = ar.component(u, Component::Dt);
        let uxx = ar.component(u, Component::Dxx);
        let diff = ar.scale(uxx, -self.l);
        let mut r = ar.add(ut, diff);
        if self.n != 0.0 {
            let uv = ar.component(u, Component::Value);
            let ux = ar.component(u, Component::Dx);
            let adv = ar.mul(uv, ux);
            let adv = ar.scale(adv, self.n);
            r = ar.add(r, adv);
        }
        let f = ar.constant(Jet2::constant(-self.forcing(t)));
        ar.add(r, f)
    }

    pub fn label(&self) -> String {
        format!("L{}_N{}_{}", self.l, self.n, self.family.label())
    }
}

/// Free-standing form of [`PdeProblem::residual`].
pub fn residual(u: Jet2, problem: &PdeProblem, t: f64) -> f64 {
    problem.residual(u, t)
}

/// Which loss term a collocation point feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointKind {
    Interior,
    Initial,
    Boundary,
}

/// Squared pointwise error of the network at `p`, recorded in `ar`.
///
/// Interior points contribute the squared residual; initial and boundary
/// points the squared mismatch to the prescribed data.
pub fn point_loss<A: JetArith>(
    ar: &mut A,
    model: &crate::netlib::ModelSpec,
    params: &[A::V],
    problem: &PdeProblem,
    kind: PointKind,
    p: Point,
) -> A::V {
    let t = ar.constant(Jet2::seed_t(p.t));
    let x = ar.constant(Jet2::seed_x(p.x));
    let u = model.forward(ar, params, t, x);
    let err = match kind {
        PointKind::Interior => problem.residual_in(ar, u, p.t),
        PointKind::Initial | PointKind::Boundary => {
            let target = match kind {
                PointKind::Initial => problem.initial_condition(p.x),
                _ => problem.boundary_value(p.x),
            };
            let uv = ar.component(u, Component::Value);
            let target = ar.constant(Jet2::constant(-target));
            ar.add(uv, target)
        }
    };
    ar.square(err)
}

/// Mean-squared loss terms; `bounds = t + x`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub pde: f64,
    pub t: f64,
    pub x: f64,
    pub bounds: f64,
}

impl LossBreakdown {
    pub fn new(pde: f64, t: f64, x: f64) -> Self {
        LossBreakdown {
            pde,
            t,
            x,
            bounds: t + x,
        }
    }

    /// Unweighted sum `L_bounds + L_pde`.
    pub fn total(&self) -> f64 {
        self.bounds + self.pde
    }

    pub fn is_finite(&self) -> bool {
        self.pde.is_finite() && self.bounds.is_finite()
    }
}

/// Interior residuals need jets; data terms only need values.
fn mean_sq_residual(model: &ModelHandle, problem: &PdeProblem, pts: &[Point]) -> f64 {
    let params = model.jet_params();
    let mut ar = JetEval;
    let sum: f64 = pts
        .iter()
        .map(|p| {
            let u = model
                .spec
                .forward(&mut ar, &params, Jet2::seed_t(p.t), Jet2::seed_x(p.x));
            problem.residual(u, p.t).powi(2)
        })
        .sum();
    sum / pts.len() as f64
}

fn mean_sq_data(model: &ModelHandle, pts: &[Point], target: impl Fn(&Point) -> f64) -> f64 {
    let mut ar = ValueEval;
    let sum: f64 = pts
        .iter()
        .map(|p| {
            let u = model.spec.forward(&mut ar, model.params.values(), p.t, p.x);
            (u - target(p)).powi(2)
        })
        .sum();
    sum / pts.len() as f64
}

/// Mean-squared residual and data losses over the three point sets.
pub fn loss_terms(model: &ModelHandle, problem: &PdeProblem, sets: &CollocationSet) -> Result<LossBreakdown> {
    for (name, s) in [
        ("interior", &sets.interior),
        ("initial", &sets.initial),
        ("boundary", &sets.boundary),
    ] {
        if s.is_empty() {
            return Err(Error::Structural(format!("{name} point set is empty")));
        }
    }
    let pde = mean_sq_residual(model, problem, &sets.interior);
    let t = mean_sq_data(model, &sets.initial, |p| problem.initial_condition(p.x));
    let x = mean_sq_data(model, &sets.boundary, |p| problem.boundary_value(p.x));
    Ok(LossBreakdown::new(pde, t, x))
}

/// `w_bounds·L_bounds + w_pde·L_pde`.
pub fn weighted_loss(b: &LossBreakdown, w_bounds: f64, w_pde: f64) -> Result<f64> {
    if !(w_bounds > 0.0 && w_pde > 0.0) {
        return Err(Error::Config(format!(
            "loss weights must be positive, got ({w_bounds}, {w_pde})"
        )));
    }
    Ok(w_bounds * b.bounds + w_pde * b.pde)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffkit::Tape;

    fn xsin() -> PdeProblem {
        PdeProblem::new(0.1, 1.0, BoundaryFamily::XSin).unwrap()
    }

    #[test]
    fn initial_condition_examples() {
        assert_eq!(BoundaryFamily::XSin.initial_condition(0.0), 0.0);
        assert_eq!(BoundaryFamily::Poly.initial_condition(0.3), 0.0);
        assert!((BoundaryFamily::XSin.initial_condition(0.5) + 0.5).abs() < 1e-15);
        let c = BoundaryFamily::XSinC { c: 3.0 };
        assert_eq!(c.initial_condition(0.37), BoundaryFamily::XSin.initial_condition(0.37));
    }

    #[test]
    fn forcing_examples() {
        assert!(BoundaryFamily::XSin.forcing(0.25).abs() < 1e-15);
        assert_eq!(BoundaryFamily::Poly.forcing(0.4), 0.0);
        assert!((BoundaryFamily::Poly.forcing(0.2) - 0.48).abs() < 1e-15);
        assert!((BoundaryFamily::XSinC { c: 2.0 }.forcing(0.25) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn residual_examples() {
        // no forcing: XSinC with c = 0 has F ≡ 0
        let quiet = |n: f64| PdeProblem::new(0.3, n, BoundaryFamily::XSinC { c: 0.0 }).unwrap();
        assert_eq!(quiet(1.0).residual(Jet2::constant(2.5), 0.4), 0.0);
        assert_eq!(quiet(1.0).residual(Jet2::seed_x(0.7), 0.4), 0.7);
        // heat mode e^{-Lπ²t} sin(πx)
        let p = quiet(0.0);
        let (t, x) = (0.37, 0.61);
        let decay = (-p.l * PI * PI * t).exp();
        let u = Jet2::new(
            decay * (PI * x).sin(),
            -p.l * PI * PI * decay * (PI * x).sin(),
            PI * decay * (PI * x).cos(),
            -PI * PI * decay * (PI * x).sin(),
        );
        assert!(p.residual(u, t).abs() < 1e-12);
        // linear in x with N = 0
        assert_eq!(p.residual(Jet2::new(0.2 + 3.0 * x, 0.0, 3.0, 0.0), t), 0.0);
    }

    #[test]
    fn residual_in_tape_matches_direct() {
        let p = xsin();
        let u = Jet2::new(0.3, -0.2, 1.1, 4.0);
        let mut tape = Tape::new();
        let v = tape.leaf(u);
        let r = p.residual_in(&mut tape, v, 0.15);
        assert!((tape.get(r).v - p.residual(u, 0.15)).abs() < 1e-15);
        let r2 = p.residual_in(&mut JetEval, u, 0.15);
        assert_eq!(r2.v, tape.get(r).v);
    }

    #[test]
    fn weighted_loss_examples() {
        let b = LossBreakdown::new(0.4, 0.06, 0.04);
        assert!((weighted_loss(&b, 2.0, 0.5).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(weighted_loss(&b, 1.0, 1.0).unwrap(), b.bounds + b.pde);
        assert_eq!(weighted_loss(&LossBreakdown::default(), 1.0, 1.0).unwrap(), 0.0);
        assert!(matches!(weighted_loss(&b, 0.0, 1.0), Err(Error::Config(_))));
        assert!(matches!(weighted_loss(&b, 1.0, -1.0), Err(Error::Config(_))));
    }

    #[test]
    fn family_parsing() {
        assert_eq!(BoundaryFamily::from_parts("xsin", None).unwrap(), BoundaryFamily::XSin);
        assert!(BoundaryFamily::from_parts("xsinc", None).is_err());
        assert!(BoundaryFamily::from_parts("poly", Some(2.0)).is_err());
        assert!(BoundaryFamily::from_parts("cos", None).is_err());
        let p: PdeProblem = toml::from_str("L = 0.1\nN = 1.0\nfamily = \"xsinc\"\nc = 5.0\n").unwrap();
        assert_eq!(p.family, BoundaryFamily::XSinC { c: 5.0 });
        assert!(toml::from_str::<PdeProblem>("L = -1.0\nN = 1.0\nfamily = \"xsin\"\n").is_err());
        assert!(xsin().is_standard_problem());
        assert!(!PdeProblem::new(0.2, 1.0, BoundaryFamily::XSin)
            .unwrap()
            .is_standard_problem());
    }

    #[test]
    fn boundary_values_are_time_independent() {
        for fam in [
            BoundaryFamily::XSin,
            BoundaryFamily::Poly,
            BoundaryFamily::XSinC { c: 2.5 },
        ] {
            let p = PdeProblem::new(0.1, 0.0, fam).unwrap();
            assert_eq!(p.boundary_value(0.0), p.initial_condition(0.0));
            assert_eq!(p.boundary_value(1.0), p.initial_condition(1.0));
        }
    }
}
