//! Claim registry and sweep runner.
//!
//! Every asserted angle relation is registered as a [`Claim`] that evaluates
//! two expressions over a measured method report. The sweep runner executes
//! the construction over a dense grid of seed angles, evaluates every claim
//! at every grid point, and reports residuals. Claims that fail are reported,
//! never dropped: part of the point is finding out which relations survive
//! for general seed angles.

use thiserror::Error;

use crate::methods::{
    self, MethodError, MethodId, MethodOptions, MethodReport,
};
use crate::scalar::{Backend, Scalar};

/// How a claim's residual is formed and judged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClaimKind {
    /// |lhs − rhs| in degrees against an absolute tolerance.
    AngleDeg { tol_deg: f64 },
    /// |lhs − rhs| / max(|lhs|, |rhs|) against a relative tolerance.
    LengthRel { tol: f64 },
}

impl ClaimKind {
    pub fn tolerance(&self) -> f64 {
        match self {
            ClaimKind::AngleDeg { tol_deg } => *tol_deg,
            ClaimKind::LengthRel { tol } => *tol,
        }
    }
}

/// One asserted relation, evaluated on a method report.
pub struct Claim<S: Scalar> {
    pub id: &'static str,
    pub method: MethodId,
    /// The relation itself, human-readable.
    pub statement: &'static str,
    pub kind: ClaimKind,
    eval: fn(&MethodReport<S>) -> (S, S),
}

impl<S: Scalar> Claim<S> {
    /// Evaluates the claim, returning the signed residual in the claim's
    /// units (degrees, or a relative ratio for length claims).
    pub fn residual(&self, report: &MethodReport<S>) -> f64 {
        let (lhs, rhs) = (self.eval)(report);
        match self.kind {
            ClaimKind::AngleDeg { .. } => lhs.sub(&rhs).to_f64(),
            ClaimKind::LengthRel { .. } => {
                let diff = lhs.sub(&rhs).abs();
                let scale = if lhs.abs() > rhs.abs() {
                    lhs.abs()
                } else {
                    rhs.abs()
                };
                if scale.is_zero() {
                    0.0
                } else {
                    diff.div(&scale).to_f64()
                }
            }
        }
    }
}

/// One claim evaluated at one seed angle.
#[derive(Clone, Debug, PartialEq)]
pub struct ClaimResult {
    pub method: MethodId,
    pub claim_id: String,
    pub theta_deg: f64,
    pub residual_deg: f64,
    pub pass: bool,
}

pub const DEFAULT_ANGLE_TOL_DEG: f64 = 1e-9;
pub const DEFAULT_LENGTH_REL_TOL: f64 = 1e-12;

const ANGLE: ClaimKind = ClaimKind::AngleDeg {
    tol_deg: DEFAULT_ANGLE_TOL_DEG,
};
const LENGTH: ClaimKind = ClaimKind::LengthRel {
    tol: DEFAULT_LENGTH_REL_TOL,
};

macro_rules! claim {
    ($id:literal, $method:expr, $stmt:literal, $kind:expr, $pat:pat => ($lhs:expr, $rhs:expr)) => {
        Claim {
            id: $id,
            method: $method,
            statement: $stmt,
            kind: $kind,
            eval: |report| match report {
                $pat => ($lhs, $rhs),
                _ => unreachable!("claim evaluated on the wrong report type"),
            },
        }
    };
}

fn scale<S: Scalar>(x: &S, k: f64) -> S {
    x.mul(&x.lift(k))
}

fn affine<S: Scalar>(x: &S, k: f64, c: f64) -> S {
    x.lift(c).add(&scale(x, k))
}

/// x·num/den with the division done at backend precision, so coefficients
/// like 2/3 do not round through f64.
fn frac<S: Scalar>(x: &S, num: f64, den: f64) -> S {
    x.mul(&x.lift(num)).div(&x.lift(den))
}

/// The registered claims for a method's standard window.
pub fn claims<S: Scalar>(method: MethodId) -> Vec<Claim<S>> {
    use MethodId::*;
    use MethodReport::*;
    match method {
        Equilateral => vec![
            claim!("m1_beta_affine", Equilateral, "beta = 90 - 1.5*theta", ANGLE,
                One(r) => (r.beta.clone(), affine(&r.theta, -1.5, 90.0))),
            claim!("m1_hbe_complement", Equilateral, "hbe = 60 - theta", ANGLE,
                One(r) => (r.hbe.clone(), affine(&r.theta, -1.0, 60.0))),
            claim!("m1_hbe_two_thirds", Equilateral, "hbe = (2/3)*beta", ANGLE,
                One(r) => (r.hbe.clone(), frac(&r.beta, 2.0, 3.0))),
            claim!("m1_trisection", Equilateral, "beta - hbe = beta/3", ANGLE,
                One(r) => (r.beta.sub(&r.hbe), frac(&r.beta, 1.0, 3.0))),
            claim!("m1_dba_theta", Equilateral, "dba = theta", ANGLE,
                One(r) => (r.dba.clone(), r.theta.clone())),
            claim!("m1_aeg_right", Equilateral, "aeg = 90", ANGLE,
                One(r) => (r.aeg.clone(), r.aeg.lift(90.0))),
            claim!("m1_hba_sixty", Equilateral, "hba = 60", ANGLE,
                One(r) => (r.hba.clone(), r.hba.lift(60.0))),
            claim!("m1_fga", Equilateral, "fga = 90 - theta/2", ANGLE,
                One(r) => (r.fga.clone(), affine(&r.theta, -0.5, 90.0))),
            claim!("m1_afg", Equilateral, "afg = 90 - theta/2", ANGLE,
                One(r) => (r.afg.clone(), affine(&r.theta, -0.5, 90.0))),
        ],
        CentralAngle => vec![
            claim!("m2_beta_affine", CentralAngle, "beta = 3*(180 - 2*theta)", ANGLE,
                Two(r) => (r.beta.clone(), affine(&r.theta, -6.0, 540.0))),
            claim!("m2_alpha_half_beta", CentralAngle, "alpha = beta/2", ANGLE,
                Two(r) => (r.alpha.clone(), scale(&r.beta, 0.5))),
            claim!("m2_eta_complement", CentralAngle, "eta = 90 - theta", ANGLE,
                Two(r) => (r.eta.clone(), affine(&r.theta, -1.0, 90.0))),
            claim!("m2_theta_from_alpha", CentralAngle, "theta = 90 - alpha/3", ANGLE,
                Two(r) => (r.theta.clone(), r.alpha.lift(90.0).sub(&frac(&r.alpha, 1.0, 3.0)))),
            claim!("m2_phi_form", CentralAngle, "phi = 90 - (4/3)*alpha", ANGLE,
                Two(r) => (r.phi.clone(), r.alpha.lift(90.0).sub(&frac(&r.alpha, 4.0, 3.0)))),
            claim!("m2_aed_theta", CentralAngle, "aed = theta", ANGLE,
                Two(r) => (r.aed.clone(), r.theta.clone())),
            claim!("m2_thirds_eda_fde", CentralAngle, "eda = fde", ANGLE,
                Two(r) => (r.eda.clone(), r.fde.clone())),
            claim!("m2_thirds_fde_gdf", CentralAngle, "fde = gdf", ANGLE,
                Two(r) => (r.fde.clone(), r.gdf.clone())),
            claim!("m2_third_of_beta", CentralAngle, "eda = beta/3", ANGLE,
                Two(r) => (r.eda.clone(), frac(&r.beta, 1.0, 3.0))),
            claim!("m2_k_thirds_eka_fke", CentralAngle, "eka = fke", ANGLE,
                Two(r) => (r.eka.clone(), r.fke.clone())),
            claim!("m2_k_thirds_fke_gkf", CentralAngle, "fke = gkf", ANGLE,
                Two(r) => (r.fke.clone(), r.gkf.clone())),
            claim!("m2_k_third_of_alpha", CentralAngle, "eka = alpha/3", ANGLE,
                Two(r) => (r.eka.clone(), frac(&r.alpha, 1.0, 3.0))),
            claim!("m2_eaf_inscribed", CentralAngle, "eaf = fke", ANGLE,
                Two(r) => (r.eaf.clone(), r.fke.clone())),
            claim!("m2_gaf_inscribed", CentralAngle, "gaf = gkf", ANGLE,
                Two(r) => (r.gaf.clone(), r.gkf.clone())),
            claim!("m2_bag", CentralAngle, "bag = 90 - alpha", ANGLE,
                Two(r) => (r.bag.clone(), affine(&r.alpha, -1.0, 90.0))),
            claim!("m2_chord_ae_ef", CentralAngle, "|AE| = |EF|", LENGTH,
                Two(r) => (r.chord_ae.clone(), r.chord_ef.clone())),
            claim!("m2_chord_ef_fg", CentralAngle, "|EF| = |FG|", LENGTH,
                Two(r) => (r.chord_ef.clone(), r.chord_fg.clone())),
            claim!("m2_radii_da_de", CentralAngle, "|DA| = |DE|", LENGTH,
                Two(r) => (r.radius_da.clone(), r.radius_de.clone())),
        ],
        SimilarTriangles => vec![
            claim!("m3_beta_triple", SimilarTriangles, "beta = 3*mcd", ANGLE,
                Three(r) => (r.beta.clone(), scale(&r.mcd, 3.0))),
            claim!("m3_odl_double", SimilarTriangles, "odl = 2*mcd", ANGLE,
                Three(r) => (r.odl.clone(), scale(&r.mcd, 2.0))),
            claim!("m3_bot_eq_mcd", SimilarTriangles, "bot = mcd", ANGLE,
                Three(r) => (r.bot.clone(), r.mcd.clone())),
            claim!("m3_lao_double", SimilarTriangles, "lao = 2*mcd", ANGLE,
                Three(r) => (r.lao.clone(), r.mcd.mul(&r.mcd.lift(2.0)))),
            claim!("m3_mcd_arctan", SimilarTriangles, "mcd = arctan(tan(theta)/3)", ANGLE,
                Three(r) => (r.mcd.clone(), arctan_third(&r.theta))),
            claim!("m3_cd_eq_od", SimilarTriangles, "|CD| = |OD|", LENGTH,
                Three(r) => (r.len_cd.clone(), r.len_od.clone())),
            claim!("m3_oa_eq_od", SimilarTriangles, "|OA| = |OD|", LENGTH,
                Three(r) => (r.len_oa.clone(), r.len_od.clone())),
        ],
    }
}

/// Claims for Method I's exterior window (60°, 90°): the derived angle flips
/// sign, so the affine forms change while the two-thirds ratio survives.
pub fn claims_method1_exterior<S: Scalar>() -> Vec<Claim<S>> {
    use MethodId::Equilateral;
    use MethodReport::One;
    vec![
        claim!("m1x_beta_affine", Equilateral, "beta = 1.5*theta - 90", ANGLE,
            One(r) => (r.beta.clone(), affine(&r.theta, 1.5, -90.0))),
        claim!("m1x_hbe_excess", Equilateral, "hbe = theta - 60", ANGLE,
            One(r) => (r.hbe.clone(), affine(&r.theta, 1.0, -60.0))),
        claim!("m1x_hbe_two_thirds", Equilateral, "hbe = (2/3)*beta", ANGLE,
            One(r) => (r.hbe.clone(), frac(&r.beta, 2.0, 3.0))),
    ]
}

/// Independent oracle form for Method III: arctan(tan(θ)/3), in degrees,
/// computed at backend precision.
fn arctan_third<S: Scalar>(theta_deg: &S) -> S {
    let rad = crate::scalar::AngleDeg(theta_deg.clone()).to_radians();
    let third = rad.tan().div(&rad.lift(3.0));
    crate::scalar::AngleDeg::<S>::from_radians(&third.atan2(&third.lift(1.0))).0
}

/// A θ grid in degrees: start, stop inclusive, positive step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub start_deg: f64,
    pub stop_deg: f64,
    pub step_deg: f64,
}

impl GridSpec {
    pub fn new(start_deg: f64, stop_deg: f64, step_deg: f64) -> Self {
        GridSpec {
            start_deg,
            stop_deg,
            step_deg,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop_deg - self.start_deg) / self.step_deg).round() as i64;
        let mut pts = Vec::new();
        for k in 0..=n.max(0) {
            let t = self.start_deg + (k as f64) * self.step_deg;
            if t <= self.stop_deg + self.step_deg * 1e-9 {
                pts.push(t);
            }
        }
        pts
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum VerifyError {
    #[error("grid [{start}°, {stop}°] step {step}° is invalid for {method} (valid open interval ({lo}°, {hi}°))")]
    GridOutOfRange {
        method: MethodId,
        start: f64,
        stop: f64,
        step: f64,
        lo: f64,
        hi: f64,
    },
    #[error(transparent)]
    Method(#[from] MethodError),
}

/// Per-claim tallies over a sweep.
#[derive(Clone, Debug)]
pub struct ClaimSummary {
    pub claim_id: String,
    pub statement: &'static str,
    pub tolerance: f64,
    pub evaluated: usize,
    pub passed: usize,
    pub failed: usize,
    pub max_abs_residual: f64,
}

/// Everything a sweep produced, in deterministic order (θ-major, then claim
/// registry order).
#[derive(Clone, Debug)]
pub struct SweepReport {
    pub method: MethodId,
    pub backend_name: String,
    pub grid: GridSpec,
    pub exterior: bool,
    pub results: Vec<ClaimResult>,
    pub summaries: Vec<ClaimSummary>,
    /// Grid points whose construction degenerated, with the failure text.
    pub excluded: Vec<(f64, String)>,
    pub fixed_points: Vec<f64>,
    pub all_pass: bool,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SweepOptions {
    /// Method I exterior window.
    pub exterior: bool,
    /// Overrides the angle-claim tolerance (degrees).
    pub angle_tol_deg: Option<f64>,
    /// Skip the fixed-point search (it reruns the construction ~100 times).
    pub skip_fixed_points: bool,
}

/// Evaluates every registered claim at every grid point.
pub fn sweep<S: Scalar>(
    method: MethodId,
    grid: GridSpec,
    opts: SweepOptions,
    ctx: &Backend<S>,
) -> Result<SweepReport, VerifyError> {
    let (lo, hi) = if method == MethodId::Equilateral && opts.exterior {
        methods::METHOD1_EXTERIOR_RANGE
    } else {
        methods::theta_range(method)
    };
    let bad_grid = !(grid.step_deg > 0.0)
        || grid.start_deg > grid.stop_deg
        || grid.start_deg <= lo
        || grid.stop_deg >= hi;
    if bad_grid {
        return Err(VerifyError::GridOutOfRange {
            method,
            start: grid.start_deg,
            stop: grid.stop_deg,
            step: grid.step_deg,
            lo,
            hi,
        });
    }

    let mut claim_set: Vec<Claim<S>> = if method == MethodId::Equilateral && opts.exterior {
        claims_method1_exterior()
    } else {
        claims(method)
    };
    if let Some(tol) = opts.angle_tol_deg {
        for c in &mut claim_set {
            if let ClaimKind::AngleDeg { .. } = c.kind {
                c.kind = ClaimKind::AngleDeg { tol_deg: tol };
            }
        }
    }

    let run_opts = MethodOptions {
        exterior: opts.exterior,
    };
    let mut results = Vec::new();
    let mut excluded = Vec::new();
    for theta in grid.points() {
        match methods::run_method_opts(method, theta, &run_opts, ctx) {
            Ok(report) => {
                for c in &claim_set {
                    let residual = c.residual(&report);
                    results.push(ClaimResult {
                        method,
                        claim_id: c.id.to_string(),
                        theta_deg: theta,
                        residual_deg: residual,
                        pass: residual.abs() <= c.kind.tolerance(),
                    });
                }
            }
            Err(e) => excluded.push((theta, e.to_string())),
        }
    }

    let summaries: Vec<ClaimSummary> = claim_set
        .iter()
        .map(|c| {
            let mine = results.iter().filter(|r| r.claim_id == c.id);
            let mut evaluated = 0;
            let mut passed = 0;
            let mut max_abs = 0.0f64;
            for r in mine {
                evaluated += 1;
                if r.pass {
                    passed += 1;
                }
                max_abs = max_abs.max(r.residual_deg.abs());
            }
            ClaimSummary {
                claim_id: c.id.to_string(),
                statement: c.statement,
                tolerance: c.kind.tolerance(),
                evaluated,
                passed,
                failed: evaluated - passed,
                max_abs_residual: max_abs,
            }
        })
        .collect();

    let fixed_points = if opts.skip_fixed_points {
        Vec::new()
    } else {
        methods::fixed_points(method, ctx)
    };
    let all_pass = results.iter().all(|r| r.pass) && excluded.is_empty();

    Ok(SweepReport {
        method,
        backend_name: ctx.name().to_string(),
        grid,
        exterior: opts.exterior,
        results,
        summaries,
        excluded,
        fixed_points,
        all_pass,
    })
}

/// The headline trisection check for one seed angle: the derived angle's
/// thirds, measured, against a third of the derived angle.
pub fn check_trisection<S: Scalar>(
    method: MethodId,
    theta: f64,
    ctx: &Backend<S>,
) -> Result<ClaimResult, VerifyError> {
    let report = methods::run_method(method, theta, ctx)?;
    let residual = match &report {
        MethodReport::One(r) => {
            // beta - hbe is the remaining third
            let third = frac(&r.beta, 1.0, 3.0);
            r.beta.sub(&r.hbe).sub(&third).to_f64()
        }
        MethodReport::Two(r) => {
            let b3 = frac(&r.beta, 1.0, 3.0);
            let a3 = frac(&r.alpha, 1.0, 3.0);
            let mut worst = 0.0f64;
            for v in [&r.eda, &r.fde, &r.gdf] {
                worst = worst.max(v.sub(&b3).to_f64().abs());
            }
            for v in [&r.eka, &r.fke, &r.gkf] {
                worst = worst.max(v.sub(&a3).to_f64().abs());
            }
            worst
        }
        MethodReport::Three(r) => {
            let third = frac(&r.beta, 1.0, 3.0);
            r.bot.sub(&third).to_f64()
        }
    };
    Ok(ClaimResult {
        method,
        claim_id: "trisection".to_string(),
        theta_deg: theta,
        residual_deg: residual,
        pass: residual.abs() <= DEFAULT_ANGLE_TOL_DEG,
    })
}

/// Fixed points of the derived-angle map, by sign-change bisection.
pub fn find_fixed_points<S: Scalar>(method: MethodId, ctx: &Backend<S>) -> Vec<f64> {
    methods::fixed_points(method, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_method1_narrow_grid_passes() {
        let ctx = Backend::machine();
        let report = sweep(
            MethodId::Equilateral,
            GridSpec::new(10.0, 50.0, 5.0),
            SweepOptions::default(),
            &ctx,
        )
        .unwrap();
        assert!(report.all_pass, "summaries: {:#?}", report.summaries);
        assert_eq!(report.excluded.len(), 0);
        assert!((report.fixed_points[0] - 36.0).abs() < 1e-10);
        // pass + fail + excluded = grid size, per claim
        let grid_len = report.grid.points().len();
        for s in &report.summaries {
            assert_eq!(s.passed + s.failed + report.excluded.len(), grid_len);
        }
    }

    #[test]
    fn sweep_rejects_out_of_range_grid() {
        let ctx = Backend::machine();
        assert!(matches!(
            sweep(
                MethodId::Equilateral,
                GridSpec::new(10.0, 70.0, 1.0),
                SweepOptions::default(),
                &ctx
            ),
            Err(VerifyError::GridOutOfRange { .. })
        ));
        assert!(matches!(
            sweep(
                MethodId::SimilarTriangles,
                GridSpec::new(100.0, 120.0, 1.0),
                SweepOptions::default(),
                &ctx
            ),
            Err(VerifyError::GridOutOfRange { .. })
        ));
    }

    #[test]
    fn check_trisection_examples() {
        let ctx = Backend::machine();
        let r = check_trisection(MethodId::Equilateral, 20.0, &ctx).unwrap();
        assert!(r.pass, "residual {}", r.residual_deg);
        let r = check_trisection(MethodId::CentralAngle, 67.5, &ctx).unwrap();
        assert!(r.pass, "residual {}", r.residual_deg);
        let r = check_trisection(MethodId::SimilarTriangles, 45.0, &ctx).unwrap();
        assert!(r.pass, "residual {}", r.residual_deg);
    }

    #[test]
    fn method3_claim_survival_windows() {
        // The sweep is exactly the tool that finds where the asserted
        // relations stop holding: odl = 2*mcd dies past arctan(3) ≈ 71.565°,
        // beta = 3*mcd past arctan(3√3) ≈ 79.107°, while bot = mcd and the
        // arctan oracle survive the whole interval.
        let ctx = Backend::machine();
        let report = sweep(
            MethodId::SimilarTriangles,
            GridSpec::new(62.0, 88.0, 1.0),
            SweepOptions {
                skip_fixed_points: true,
                ..Default::default()
            },
            &ctx,
        )
        .unwrap();
        let failed_thetas = |id: &str| -> Vec<f64> {
            report
                .results
                .iter()
                .filter(|r| r.claim_id == id && !r.pass)
                .map(|r| r.theta_deg)
                .collect()
        };
        let odl_failures = failed_thetas("m3_odl_double");
        assert!(!odl_failures.is_empty());
        assert!(odl_failures.iter().all(|&t| t > 71.565));
        assert!(odl_failures.contains(&72.0));
        let beta_failures = failed_thetas("m3_beta_triple");
        assert!(beta_failures.iter().all(|&t| t > 79.106));
        assert!(beta_failures.contains(&80.0));
        assert!(failed_thetas("m3_bot_eq_mcd").is_empty());
        assert!(failed_thetas("m3_mcd_arctan").is_empty());
        assert!(failed_thetas("m3_cd_eq_od").is_empty());
        assert!(!report.all_pass);
    }

    #[test]
    fn grid_point_counts() {
        let g = GridSpec::new(1.0, 59.0, 0.5);
        let pts = g.points();
        assert_eq!(pts.len(), 117);
        assert_eq!(pts[0], 1.0);
        assert_eq!(*pts.last().unwrap(), 59.0);
    }

    #[test]
    fn find_fixed_points_matches_notes() {
        let ctx = Backend::machine();
        assert!((find_fixed_points(MethodId::Equilateral, &ctx)[0] - 36.0).abs() < 1e-10);
        assert!((find_fixed_points(MethodId::CentralAngle, &ctx)[0] - 67.5).abs() < 1e-10);
        assert!(find_fixed_points(MethodId::SimilarTriangles, &ctx).is_empty());
    }
}
