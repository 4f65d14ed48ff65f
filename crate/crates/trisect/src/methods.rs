//! The three built-in constructions, their measured reports, and the
//! reverse-seeding operations.
//!
//! Each construction exists twice: as a program built in code here, and as a
//! shipped `.gcs` script (`scripts/method*.gcs`). The test suite executes
//! both and compares every exported point, so the script files and the
//! builders check each other.
//!
//! Reports are always measured from the executed environment; the closed
//! forms the verifier checks against are never used to produce a report
//! field.

use std::fmt;

use thiserror::Error;

use crate::engine::{self, Bindings, EngineError, Environment, Trace};
use crate::geom::{Point, Side};
use crate::scalar::{Backend, Scalar};
use crate::script::{
    AngleExpr, ConstructionProgram, DeclKind, LengthExpr, Param, ParamKind, PickHint, Step,
    StepOp,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MethodId {
    /// Method I: equilateral triangle over an isosceles seed.
    Equilateral,
    /// Method II: equal chords and the central angle.
    CentralAngle,
    /// Method III: similar triangles over a doubled base.
    SimilarTriangles,
}

impl MethodId {
    pub const ALL: [MethodId; 3] = [
        MethodId::Equilateral,
        MethodId::CentralAngle,
        MethodId::SimilarTriangles,
    ];
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodId::Equilateral => write!(f, "method1"),
            MethodId::CentralAngle => write!(f, "method2"),
            MethodId::SimilarTriangles => write!(f, "method3"),
        }
    }
}

impl std::str::FromStr for MethodId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "method1" | "method1_equilateral" => Ok(MethodId::Equilateral),
            "method2" | "method2_central" => Ok(MethodId::CentralAngle),
            "method3" | "method3_similar" => Ok(MethodId::SimilarTriangles),
            other => Err(format!(
                "unknown method `{other}` (expected method1, method2, or method3)"
            )),
        }
    }
}

/// Open interval of seed angles for which the construction is valid.
pub fn theta_range(id: MethodId) -> (f64, f64) {
    match id {
        MethodId::Equilateral => (0.0, 60.0),
        MethodId::CentralAngle => (60.0, 90.0),
        MethodId::SimilarTriangles => (0.0, 90.0),
    }
}

/// Method I re-runs on (60°, 90°) under the exterior flag: the derived angle
/// flips sign and the trisected part lands outside the equilateral triangle.
pub const METHOD1_EXTERIOR_RANGE: (f64, f64) = (60.0, 90.0);

/// Open interval of derived-angle targets accepted by [`inverse_seed`].
pub fn seed_target_range(id: MethodId) -> (f64, f64) {
    match id {
        MethodId::Equilateral => (0.0, 90.0),
        MethodId::CentralAngle => (0.0, 180.0),
        MethodId::SimilarTriangles => (0.0, 180.0),
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum MethodError {
    #[error("theta {theta}° is outside the valid interval ({lo}°, {hi}°) of {method}")]
    ThetaOutOfRange {
        method: MethodId,
        theta: f64,
        lo: f64,
        hi: f64,
    },
    #[error("target {target}° is outside the seedable interval ({lo}°, {hi}°) of {method}")]
    TargetOutOfRange {
        method: MethodId,
        target: f64,
        lo: f64,
        hi: f64,
    },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Options for [`run_method_opts`]; `exterior` unlocks Method I's
/// (60°, 90°) window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MethodOptions {
    pub exterior: bool,
}

/// Measured report for Method I. Angles are in degrees.
#[derive(Clone, Debug)]
pub struct Method1Report<S> {
    pub theta: S,
    /// ∠GEB, the derived angle.
    pub beta: S,
    /// ∠HBE, the trisected part.
    pub hbe: S,
    /// ∠DBA; equals theta by the isosceles seed.
    pub dba: S,
    /// ∠AEG; 90° by construction.
    pub aeg: S,
    /// ∠HBA; 60° from the equilateral triangle.
    pub hba: S,
    /// ∠FGA and ∠AFG; both 90° − θ/2.
    pub fga: S,
    pub afg: S,
    /// Whether E lies outside triangle HAB (the exterior configuration).
    pub e_outside_triangle: bool,
    /// Whether the run was made under the exterior flag.
    pub exterior: bool,
}

/// Measured report for Method II. Angles in degrees, chords in units.
#[derive(Clone, Debug)]
pub struct Method2Report<S> {
    pub theta: S,
    /// ∠GDA, the derived central angle.
    pub beta: S,
    /// ∠GKA, the derived inscribed angle.
    pub alpha: S,
    /// ∠EBA.
    pub eta: S,
    /// θ − α, signed; crosses zero at the fixed point.
    pub phi: S,
    /// ∠AED; equals θ since DA = DE.
    pub aed: S,
    /// Central thirds ∠EDA, ∠FDE, ∠GDF.
    pub eda: S,
    pub fde: S,
    pub gdf: S,
    /// Inscribed thirds ∠EKA, ∠FKE, ∠GKF.
    pub eka: S,
    pub fke: S,
    pub gkf: S,
    /// ∠EAF and ∠GAF, inscribed over the same chords.
    pub eaf: S,
    pub gaf: S,
    /// ∠BAG = 90° − α.
    pub bag: S,
    pub chord_ae: S,
    pub chord_ef: S,
    pub chord_fg: S,
    pub radius_da: S,
    pub radius_de: S,
}

/// Measured report for Method III. Angles in degrees, lengths in units.
#[derive(Clone, Debug)]
pub struct Method3Report<S> {
    pub theta: S,
    /// ∠BOA, the derived angle.
    pub beta: S,
    /// ∠MCD.
    pub mcd: S,
    /// ∠BOT.
    pub bot: S,
    /// ∠ODL.
    pub odl: S,
    /// ∠LAO.
    pub lao: S,
    /// θ − β, signed; reported but carries no registered claim.
    pub theta_minus_beta: S,
    pub len_cd: S,
    pub len_od: S,
    pub len_oa: S,
}

#[derive(Clone, Debug)]
pub enum MethodReport<S> {
    One(Method1Report<S>),
    Two(Method2Report<S>),
    Three(Method3Report<S>),
}

impl<S: Scalar> MethodReport<S> {
    pub fn theta(&self) -> &S {
        match self {
            MethodReport::One(r) => &r.theta,
            MethodReport::Two(r) => &r.theta,
            MethodReport::Three(r) => &r.theta,
        }
    }

    /// The derived angle used for fixed-point and seeding purposes:
    /// β for Methods I and III, α for Method II.
    pub fn derived(&self) -> &S {
        match self {
            MethodReport::One(r) => &r.beta,
            MethodReport::Two(r) => &r.alpha,
            MethodReport::Three(r) => &r.beta,
        }
    }

    /// The derived angle the reverse construction targets: β in all methods
    /// (for Method II that is the central angle, 2α).
    pub fn seed_beta(&self) -> &S {
        match self {
            MethodReport::One(r) => &r.beta,
            MethodReport::Two(r) => &r.beta,
            MethodReport::Three(r) => &r.beta,
        }
    }
}

struct Pb {
    program: ConstructionProgram,
}

impl Pb {
    fn new() -> Self {
        Pb {
            program: ConstructionProgram::default(),
        }
    }

    fn param_angle(&mut self, name: &str) {
        self.program.params.push(Param {
            name: name.into(),
            kind: ParamKind::Angle,
        });
    }

    fn step(&mut self, decl: DeclKind, name: &str, op: StepOp) {
        self.program.steps.push(Step {
            decl,
            name: name.into(),
            op,
        });
    }

    fn coord(&mut self, name: &str, x: f64, y: f64) {
        self.step(DeclKind::Point, name, StepOp::Coord { x, y });
    }

    fn line_through(&mut self, name: &str, p: &str, q: &str) {
        self.step(
            DeclKind::Line,
            name,
            StepOp::LineThrough {
                p: p.into(),
                q: q.into(),
            },
        );
    }

    fn midpoint(&mut self, name: &str, p: &str, q: &str) {
        self.step(
            DeclKind::Point,
            name,
            StepOp::Midpoint {
                p: p.into(),
                q: q.into(),
            },
        );
    }

    fn perpendicular_bisector(&mut self, name: &str, p: &str, q: &str) {
        self.step(
            DeclKind::Line,
            name,
            StepOp::PerpendicularBisector {
                p: p.into(),
                q: q.into(),
            },
        );
    }

    fn perpendicular_at(&mut self, name: &str, line: &str, p: &str) {
        self.step(
            DeclKind::Line,
            name,
            StepOp::PerpendicularAt {
                line: line.into(),
                p: p.into(),
            },
        );
    }

    fn angle_bisector(&mut self, name: &str, vertex: &str, arm1: &str, arm2: &str) {
        self.step(
            DeclKind::Line,
            name,
            StepOp::AngleBisector {
                vertex: vertex.into(),
                arm1: arm1.into(),
                arm2: arm2.into(),
            },
        );
    }

    fn given_angle(&mut self, name: &str, origin: &str, base: &str, param: &str, side: Side) {
        self.step(
            DeclKind::Line,
            name,
            StepOp::GivenAngle {
                origin: origin.into(),
                base: base.into(),
                angle: AngleExpr::Param(param.into()),
                side,
            },
        );
    }

    fn circle_dist(&mut self, name: &str, center: &str, p: &str, q: &str) {
        self.step(
            DeclKind::Circle,
            name,
            StepOp::CircleAt {
                center: center.into(),
                radius: LengthExpr::Dist(p.into(), q.into()),
            },
        );
    }

    fn intersect(&mut self, name: &str, a: &str, b: &str, pick: Option<PickHint>) {
        self.step(
            DeclKind::Point,
            name,
            StepOp::Intersect {
                a: a.into(),
                b: b.into(),
                pick,
            },
        );
    }

    fn export(&mut self, names: &[&str]) {
        self.program.exports = names.iter().map(|s| s.to_string()).collect();
    }

    fn finish(self) -> ConstructionProgram {
        self.program
    }
}

fn distinct(id: &str) -> Option<PickHint> {
    Some(PickHint::DistinctFrom(id.into()))
}

/// The built-in program for a method, constructed in code. The shipped
/// `.gcs` scripts transliterate the same procedures; the test suite holds
/// the two routes equal.
pub fn builtin(id: MethodId) -> ConstructionProgram {
    match id {
        MethodId::Equilateral => {
            let mut b = Pb::new();
            b.param_angle("theta");
            b.coord("A", 0.0, 0.0);
            b.coord("B", 1.0, 0.0);
            b.line_through("base", "A", "B");
            b.midpoint("C", "A", "B");
            b.perpendicular_bisector("midline", "A", "B");
            b.given_angle("seed", "A", "B", "theta", Side::Ccw);
            b.intersect("D", "seed", "midline", None);
            b.line_through("cross", "B", "D");
            b.angle_bisector("half", "A", "D", "C");
            b.intersect("E", "half", "cross", None);
            b.line_through("stem", "A", "E");
            b.perpendicular_at("rung", "stem", "E");
            b.intersect("G", "rung", "base", None);
            b.intersect("F", "rung", "seed", None);
            b.circle_dist("ca", "A", "A", "B");
            b.circle_dist("cb", "B", "A", "B");
            b.intersect("H", "ca", "cb", Some(PickHint::Upper));
            b.export(&["A", "B", "C", "D", "E", "F", "G", "H"]);
            b.finish()
        }
        MethodId::CentralAngle => {
            let mut b = Pb::new();
            b.param_angle("theta");
            b.coord("A", 0.0, 0.0);
            b.coord("B", 1.0, 0.0);
            b.line_through("base", "A", "B");
            b.given_angle("seed", "A", "B", "theta", Side::Ccw);
            b.circle_dist("unit", "A", "A", "B");
            b.intersect("C", "seed", "unit", Some(PickHint::Upper));
            b.midpoint("D", "A", "B");
            b.circle_dist("c1", "D", "D", "A");
            b.intersect("E", "seed", "c1", distinct("A"));
            b.circle_dist("c2", "E", "E", "A");
            b.intersect("F", "c1", "c2", distinct("A"));
            b.circle_dist("c3", "F", "F", "E");
            b.intersect("G", "c1", "c3", distinct("E"));
            b.line_through("ae", "A", "E");
            b.line_through("ef", "E", "F");
            b.line_through("fg", "F", "G");
            b.line_through("ag", "A", "G");
            b.line_through("af", "A", "F");
            b.line_through("de", "D", "E");
            b.line_through("df", "D", "F");
            b.line_through("dg", "D", "G");
            b.line_through("eb", "E", "B");
            b.angle_bisector("half", "D", "G", "A");
            b.intersect("H", "half", "c1", Some(PickHint::Upper));
            b.intersect("K", "half", "c1", Some(PickHint::Lower));
            b.line_through("hk", "H", "K");
            b.line_through("ak", "A", "K");
            b.line_through("ek", "E", "K");
            b.line_through("fk", "F", "K");
            b.line_through("gk", "G", "K");
            b.export(&["A", "B", "C", "D", "E", "F", "G", "H", "K"]);
            b.finish()
        }
        MethodId::SimilarTriangles => {
            let mut b = Pb::new();
            b.param_angle("theta");
            b.coord("O", 0.0, 0.0);
            b.coord("B", 1.0, 0.0);
            b.line_through("base", "O", "B");
            b.circle_dist("co", "O", "O", "B");
            b.intersect("B2", "base", "co", distinct("B"));
            b.circle_dist("cb2", "B2", "O", "B");
            b.intersect("C", "base", "cb2", distinct("O"));
            b.perpendicular_at("wall", "base", "B");
            b.given_angle("seed", "O", "B", "theta", Side::Ccw);
            b.intersect("E", "seed", "wall", None);
            b.line_through("ce", "C", "E");
            b.perpendicular_bisector("midco", "C", "O");
            b.intersect("D", "ce", "midco", None);
            b.midpoint("M", "C", "O");
            b.line_through("md", "M", "D");
            b.circle_dist("arc", "O", "O", "D");
            b.intersect("A", "ce", "arc", distinct("D"));
            b.intersect("T", "wall", "arc", Some(PickHint::Upper));
            b.line_through("oa", "O", "A");
            b.intersect("K", "oa", "wall", None);
            b.line_through("od", "O", "D");
            b.line_through("ck", "C", "K");
            b.circle_dist("ct", "T", "T", "B");
            b.intersect("F", "wall", "ct", distinct("B"));
            b.line_through("mf", "M", "F");
            b.perpendicular_at("drop", "ce", "O");
            b.intersect("L", "ce", "drop", None);
            b.line_through("ol", "O", "L");
            b.perpendicular_at("lift", "base", "A");
            b.intersect("N", "base", "lift", None);
            b.line_through("an", "A", "N");
            b.export(&[
                "O", "B", "C", "E", "M", "D", "A", "T", "K", "F", "L", "N",
            ]);
            b.finish()
        }
    }
}

/// The (arm, vertex, arm) angle marks a figure should carry: only the angles
/// named in the method's report.
pub fn report_angle_marks(id: MethodId) -> Vec<[&'static str; 3]> {
    match id {
        MethodId::Equilateral => vec![["G", "E", "B"], ["H", "B", "E"]],
        MethodId::CentralAngle => vec![["G", "D", "A"], ["G", "K", "A"]],
        MethodId::SimilarTriangles => vec![["B", "O", "A"], ["M", "C", "D"], ["B", "O", "T"]],
    }
}

/// The shipped `.gcs` transliteration of a method.
pub fn builtin_script_text(id: MethodId) -> &'static str {
    match id {
        MethodId::Equilateral => include_str!("../scripts/method1.gcs"),
        MethodId::CentralAngle => include_str!("../scripts/method2.gcs"),
        MethodId::SimilarTriangles => include_str!("../scripts/method3.gcs"),
    }
}

fn check_theta(id: MethodId, theta: f64, opts: &MethodOptions) -> Result<(), MethodError> {
    let (lo, hi) = if id == MethodId::Equilateral && opts.exterior {
        METHOD1_EXTERIOR_RANGE
    } else {
        theta_range(id)
    };
    if !(theta > lo && theta < hi) {
        return Err(MethodError::ThetaOutOfRange {
            method: id,
            theta,
            lo,
            hi,
        });
    }
    Ok(())
}

/// Executes the built-in program for `id` at the given seed angle and
/// returns both the measured report and the raw execution.
pub fn run_method_full<S: Scalar>(
    id: MethodId,
    theta: f64,
    opts: &MethodOptions,
    ctx: &Backend<S>,
) -> Result<(MethodReport<S>, Environment<S>, Trace<S>), MethodError> {
    check_theta(id, theta, opts)?;
    let program = builtin(id);
    let bindings = Bindings::new().with("theta", theta);
    let (env, trace) = engine::execute(&program, &bindings, ctx)?;
    let report = measure_report(id, theta, opts, &env, ctx)?;
    Ok((report, env, trace))
}

pub fn run_method_opts<S: Scalar>(
    id: MethodId,
    theta: f64,
    opts: &MethodOptions,
    ctx: &Backend<S>,
) -> Result<MethodReport<S>, MethodError> {
    run_method_full(id, theta, opts, ctx).map(|(r, _, _)| r)
}

pub fn run_method<S: Scalar>(
    id: MethodId,
    theta: f64,
    ctx: &Backend<S>,
) -> Result<MethodReport<S>, MethodError> {
    run_method_opts(id, theta, &MethodOptions::default(), ctx)
}

fn measure_report<S: Scalar>(
    id: MethodId,
    theta: f64,
    opts: &MethodOptions,
    env: &Environment<S>,
    ctx: &Backend<S>,
) -> Result<MethodReport<S>, MethodError> {
    let ang = |v: &str, p: &str, q: &str| -> Result<S, MethodError> {
        Ok(engine::measure_angle(env, v, p, q, ctx)?.0)
    };
    let len = |p: &str, q: &str| -> Result<S, MethodError> {
        Ok(engine::measure_dist(env, p, q)?)
    };
    let theta_s = ctx.scalar(theta);

    match id {
        MethodId::Equilateral => {
            let e = env.point("E")?.clone();
            let h = env.point("H")?.clone();
            let a = env.point("A")?.clone();
            let b = env.point("B")?.clone();
            Ok(MethodReport::One(Method1Report {
                theta: theta_s,
                beta: ang("E", "G", "B")?,
                hbe: ang("B", "H", "E")?,
                dba: ang("B", "D", "A")?,
                aeg: ang("E", "A", "G")?,
                hba: ang("B", "H", "A")?,
                fga: ang("G", "F", "A")?,
                afg: ang("F", "A", "G")?,
                e_outside_triangle: !point_in_triangle(&e, &h, &a, &b),
                exterior: opts.exterior,
            }))
        }
        MethodId::CentralAngle => {
            let alpha = ang("K", "G", "A")?;
            let phi = theta_s.sub(&alpha);
            Ok(MethodReport::Two(Method2Report {
                theta: theta_s,
                beta: ang("D", "G", "A")?,
                alpha,
                eta: ang("B", "E", "A")?,
                phi,
                aed: ang("E", "A", "D")?,
                eda: ang("D", "E", "A")?,
                fde: ang("D", "F", "E")?,
                gdf: ang("D", "G", "F")?,
                eka: ang("K", "E", "A")?,
                fke: ang("K", "F", "E")?,
                gkf: ang("K", "G", "F")?,
                eaf: ang("A", "E", "F")?,
                gaf: ang("A", "G", "F")?,
                bag: ang("A", "B", "G")?,
                chord_ae: len("A", "E")?,
                chord_ef: len("E", "F")?,
                chord_fg: len("F", "G")?,
                radius_da: len("D", "A")?,
                radius_de: len("D", "E")?,
            }))
        }
        MethodId::SimilarTriangles => {
            let beta = ang("O", "B", "A")?;
            let theta_minus_beta = theta_s.sub(&beta);
            Ok(MethodReport::Three(Method3Report {
                theta: theta_s,
                beta,
                mcd: ang("C", "M", "D")?,
                bot: ang("O", "B", "T")?,
                odl: ang("D", "O", "L")?,
                lao: ang("A", "L", "O")?,
                theta_minus_beta,
                len_cd: len("C", "D")?,
                len_od: len("O", "D")?,
                len_oa: len("O", "A")?,
            }))
        }
    }
}

/// Strict point-in-triangle test by orientation signs; boundary counts as
/// inside, which the valid seed ranges never produce.
fn point_in_triangle<S: Scalar>(
    p: &Point<S>,
    a: &Point<S>,
    b: &Point<S>,
    c: &Point<S>,
) -> bool {
    let sign = |p: &Point<S>, q: &Point<S>, r: &Point<S>| -> S {
        let qx = q.x.sub(&p.x);
        let qy = q.y.sub(&p.y);
        let rx = r.x.sub(&p.x);
        let ry = r.y.sub(&p.y);
        qx.mul(&ry).sub(&qy.mul(&rx))
    };
    let d1 = sign(p, a, b);
    let d2 = sign(p, b, c);
    let d3 = sign(p, c, a);
    let zero = d1.lift(0.0);
    let has_neg = d1 < zero || d2 < zero || d3 < zero;
    let has_pos = d1 > zero || d2 > zero || d3 > zero;
    !(has_neg && has_pos)
}

/// The seed angle whose derived angle equals `target_beta`, from the closed
/// inverse of each method's derived-angle map. The round trip
/// `run_method(id, inverse_seed(id, β))` reproduces β within tolerance.
pub fn inverse_seed(id: MethodId, target_beta: f64) -> Result<f64, MethodError> {
    let (lo, hi) = seed_target_range(id);
    if !(target_beta > lo && target_beta < hi) {
        return Err(MethodError::TargetOutOfRange {
            method: id,
            target: target_beta,
            lo,
            hi,
        });
    }
    Ok(match id {
        MethodId::Equilateral => (90.0 - target_beta) * 2.0 / 3.0,
        MethodId::CentralAngle => 90.0 - target_beta / 6.0,
        MethodId::SimilarTriangles => {
            (3.0 * (target_beta / 3.0).to_radians().tan()).atan().to_degrees()
        }
    })
}

fn derived_minus_theta<S: Scalar>(id: MethodId, theta: f64, ctx: &Backend<S>) -> Option<f64> {
    run_method(id, theta, ctx)
        .ok()
        .map(|r| r.derived().to_f64() - theta)
}

/// All fixed points of the derived-angle map on the method's valid interval,
/// located by scanning half-degree cells for sign changes and bisecting each
/// bracket to 1e-12°. The list may be empty.
pub fn fixed_points<S: Scalar>(id: MethodId, ctx: &Backend<S>) -> Vec<f64> {
    let (lo, hi) = theta_range(id);
    let step = 0.5;
    let mut roots = Vec::new();
    let mut a = lo + step;
    let mut ga = derived_minus_theta(id, a, ctx);
    while a + step <= hi - step + 1e-9 {
        let b = a + step;
        let gb = derived_minus_theta(id, b, ctx);
        if let (Some(x), Some(y)) = (ga, gb) {
            if x == 0.0 {
                roots.push(a);
            } else if x * y < 0.0 {
                if let Some(r) = bisect(id, a, b, x, ctx) {
                    roots.push(r);
                }
            }
        }
        a = b;
        ga = gb;
    }
    roots
}

/// The first fixed point, if any.
pub fn fixed_point<S: Scalar>(id: MethodId, ctx: &Backend<S>) -> Option<f64> {
    fixed_points(id, ctx).into_iter().next()
}

fn bisect<S: Scalar>(
    id: MethodId,
    mut a: f64,
    mut b: f64,
    mut ga: f64,
    ctx: &Backend<S>,
) -> Option<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if b - a < 1e-12 {
            return Some(mid);
        }
        let gm = derived_minus_theta(id, mid, ctx)?;
        if gm == 0.0 {
            return Some(mid);
        }
        if ga * gm < 0.0 {
            b = mid;
        } else {
            a = mid;
            ga = gm;
        }
    }
    Some(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::script::{format, parse, ScriptSource};

    fn m(ctx: &Backend<f64>, id: MethodId, theta: f64) -> MethodReport<f64> {
        run_method(id, theta, ctx).unwrap()
    }

    #[test]
    fn builtins_parse_check_and_export_figure_points() {
        for id in MethodId::ALL {
            let built = builtin(id);
            // The builder output must itself be a valid program: format it
            // and feed it through the parser.
            let text = format(&built);
            let reparsed = parse(&ScriptSource::new("builtin.gcs", &text)).unwrap();
            assert_eq!(built, reparsed, "builder output round-trips for {id}");
        }
        assert_eq!(
            builtin(MethodId::Equilateral).exports,
            ["A", "B", "C", "D", "E", "F", "G", "H"]
        );
        assert_eq!(
            builtin(MethodId::CentralAngle).exports,
            ["A", "B", "C", "D", "E", "F", "G", "H", "K"]
        );
        assert_eq!(
            builtin(MethodId::SimilarTriangles).exports,
            ["O", "B", "C", "E", "M", "D", "A", "T", "K", "F", "L", "N"]
        );
    }

    #[test]
    fn shipped_scripts_parse() {
        for id in MethodId::ALL {
            let src = ScriptSource::new(format!("{id}.gcs"), builtin_script_text(id));
            let p = parse(&src).unwrap();
            assert_eq!(p.exports, builtin(id).exports, "{id} exports");
        }
    }

    #[test]
    fn method1_at_30_degrees() {
        let ctx = Backend::machine();
        match m(&ctx, MethodId::Equilateral, 30.0) {
            MethodReport::One(r) => {
                assert!((r.beta - 45.0).abs() < 1e-9, "beta {}", r.beta);
                assert!((r.hbe - 30.0).abs() < 1e-9, "hbe {}", r.hbe);
                assert!((r.aeg - 90.0).abs() < 1e-9);
                assert!((r.hba - 60.0).abs() < 1e-9);
                assert!((r.dba - 30.0).abs() < 1e-9);
                assert!((r.fga - 75.0).abs() < 1e-9);
                assert!((r.afg - 75.0).abs() < 1e-9);
                assert!(!r.e_outside_triangle);
            }
            other => panic!("wrong report {other:?}"),
        }
    }

    #[test]
    fn method1_fixed_point_theta_36() {
        let ctx = Backend::machine();
        match m(&ctx, MethodId::Equilateral, 36.0) {
            MethodReport::One(r) => assert!((r.beta - 36.0).abs() < 1e-9),
            _ => unreachable!(),
        }
    }

    #[test]
    fn method1_exterior_window() {
        let ctx = Backend::machine();
        let opts = MethodOptions { exterior: true };
        match run_method_opts(MethodId::Equilateral, 75.0, &opts, &ctx).unwrap() {
            MethodReport::One(r) => {
                assert!((r.hbe - 15.0).abs() < 1e-9, "hbe {}", r.hbe);
                assert!((r.beta - 22.5).abs() < 1e-9, "beta {}", r.beta);
                assert!(r.e_outside_triangle, "E should fall outside HAB");
            }
            _ => unreachable!(),
        }
        // without the flag the same theta is out of range
        assert!(matches!(
            run_method(MethodId::Equilateral, 75.0, &ctx),
            Err(MethodError::ThetaOutOfRange { .. })
        ));
    }

    #[test]
    fn method2_at_75_degrees() {
        let ctx = Backend::machine();
        match m(&ctx, MethodId::CentralAngle, 75.0) {
            MethodReport::Two(r) => {
                assert!((r.beta - 90.0).abs() < 1e-9, "beta {}", r.beta);
                assert!((r.alpha - 45.0).abs() < 1e-9, "alpha {}", r.alpha);
                assert!((r.eta - 15.0).abs() < 1e-9, "eta {}", r.eta);
                assert!((r.phi - 30.0).abs() < 1e-9, "phi {}", r.phi);
                assert!((r.aed - 75.0).abs() < 1e-9);
                for v in [r.eda, r.fde, r.gdf] {
                    assert!((v - 30.0).abs() < 1e-9);
                }
                for v in [r.eka, r.fke, r.gkf] {
                    assert!((v - 15.0).abs() < 1e-9);
                }
                assert!((r.bag - 45.0).abs() < 1e-9);
                assert!((r.chord_ae - r.chord_ef).abs() < 1e-12);
                assert!((r.chord_ef - r.chord_fg).abs() < 1e-12);
            }
            other => panic!("wrong report {other:?}"),
        }
    }

    #[test]
    fn method2_degenerates_at_30() {
        let ctx = Backend::machine();
        // range check refuses first
        assert!(matches!(
            run_method(MethodId::CentralAngle, 30.0, &ctx),
            Err(MethodError::ThetaOutOfRange { .. })
        ));
        // the raw program fails geometrically: chord AG collapses
        let program = builtin(MethodId::CentralAngle);
        let bindings = Bindings::new().with("theta", 30.0);
        let err = engine::execute(&program, &bindings, &ctx).unwrap_err();
        match err {
            EngineError::Step { ref name, .. } => assert_eq!(name, "ag"),
            other => panic!("expected step failure, got {other:?}"),
        }
    }

    #[test]
    fn method3_at_45_degrees() {
        let ctx = Backend::machine();
        match m(&ctx, MethodId::SimilarTriangles, 45.0) {
            MethodReport::Three(r) => {
                // frozen from the coordinate oracle: arctan(tan45/3) and 3x it
                assert!((r.mcd - 18.43494882292201).abs() < 1e-9, "mcd {}", r.mcd);
                assert!((r.beta - 55.30484646876603).abs() < 1e-9, "beta {}", r.beta);
                assert!((r.len_cd - r.len_od).abs() < 1e-12);
                assert!((r.len_oa - r.len_od).abs() < 1e-12);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn method3_k_degenerates_at_exactly_60() {
        // At θ=60° the line OA is vertical and never meets the perpendicular
        // at B, so the K step has no intersection; a hair to either side the
        // figure closes again and the measured angles match the closed forms.
        let ctx = Backend::machine();
        match run_method(MethodId::SimilarTriangles, 60.0, &ctx) {
            Err(MethodError::Engine(EngineError::Step { ref name, .. })) => {
                assert_eq!(name, "K")
            }
            other => panic!("expected the K step to fail, got {other:?}"),
        }
        for theta in [59.5, 60.5] {
            match m(&ctx, MethodId::SimilarTriangles, theta) {
                MethodReport::Three(r) => {
                    let phi = (theta.to_radians().tan() / 3.0).atan().to_degrees();
                    assert!((r.mcd - phi).abs() < 1e-9, "mcd {}", r.mcd);
                    assert!((r.beta - 3.0 * phi).abs() < 1e-9, "beta {}", r.beta);
                    assert!((r.bot - phi).abs() < 1e-9);
                    assert!((r.odl - 2.0 * phi).abs() < 1e-9);
                }
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn inverse_seed_closed_forms() {
        assert!((inverse_seed(MethodId::Equilateral, 45.0).unwrap() - 30.0).abs() < 1e-12);
        assert!((inverse_seed(MethodId::Equilateral, 36.0).unwrap() - 36.0).abs() < 1e-12);
        assert!((inverse_seed(MethodId::CentralAngle, 135.0).unwrap() - 67.5).abs() < 1e-12);
        assert!((inverse_seed(MethodId::SimilarTriangles, 90.0).unwrap() - 60.0).abs() < 1e-12);
        assert!(matches!(
            inverse_seed(MethodId::CentralAngle, 400.0),
            Err(MethodError::TargetOutOfRange { .. })
        ));
    }

    #[test]
    fn inverse_seed_round_trips() {
        let ctx = Backend::machine();
        for (id, beta) in [
            (MethodId::Equilateral, 45.0),
            (MethodId::Equilateral, 36.0),
            (MethodId::CentralAngle, 135.0),
            (MethodId::CentralAngle, 20.0),
            (MethodId::SimilarTriangles, 100.0),
            (MethodId::SimilarTriangles, 55.30484646876603),
        ] {
            let theta = inverse_seed(id, beta).unwrap();
            let report = run_method(id, theta, &ctx).unwrap();
            let back = report.seed_beta().to_f64();
            assert!(
                (back - beta).abs() < 1e-9,
                "{id}: beta {beta} -> theta {theta} -> {back}"
            );
        }
    }

    #[test]
    fn fixed_points_per_method() {
        let ctx = Backend::machine();
        let fp1 = fixed_points(MethodId::Equilateral, &ctx);
        assert_eq!(fp1.len(), 1);
        assert!((fp1[0] - 36.0).abs() < 1e-10, "{}", fp1[0]);

        let fp2 = fixed_points(MethodId::CentralAngle, &ctx);
        assert_eq!(fp2.len(), 1);
        assert!((fp2[0] - 67.5).abs() < 1e-10, "{}", fp2[0]);

        // The derived map of Method III stays above the identity on the whole
        // interval, so there is no fixed point.
        let fp3 = fixed_points(MethodId::SimilarTriangles, &ctx);
        assert!(fp3.is_empty(), "{fp3:?}");
    }

    #[test]
    fn method_id_round_trips_names() {
        for id in MethodId::ALL {
            let s = id.to_string();
            assert_eq!(s.parse::<MethodId>().unwrap(), id);
        }
        assert!("method9".parse::<MethodId>().is_err());
    }
}
