//! Executes a [`ConstructionProgram`] against parameter bindings and a
//! numeric backend, producing a named environment of geometric objects plus
//! an ordered trace for rendering.
//!
//! Execution is deterministic for a fixed (program, bindings, backend):
//! pick hints resolve per execution (which candidate is "the other point"
//! depends on the parameter values), and the engine fails rather than
//! guessing when a hint is ambiguous.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::geom::{
    self, Circle, GeomError, Intersection, Line, Point, Ray,
};
use crate::scalar::{AngleDeg, Backend, Scalar};
use crate::script::{AngleExpr, ConstructionProgram, LengthExpr, PickHint, StepOp};

/// A named geometric object in the environment.
#[derive(Clone, Debug, PartialEq)]
pub enum Object<S> {
    Point(Point<S>),
    Line(Line<S>),
    Circle(Circle<S>),
    Ray(Ray<S>),
}

impl<S: Scalar> Object<S> {
    pub fn kind(&self) -> &'static str {
        match self {
            Object::Point(_) => "point",
            Object::Line(_) => "line",
            Object::Circle(_) => "circle",
            Object::Ray(_) => "ray",
        }
    }

    /// The supporting line of a linear object.
    fn as_line(&self) -> Option<Line<S>> {
        match self {
            Object::Line(l) => Some(l.clone()),
            Object::Ray(r) => Some(r.line()),
            _ => None,
        }
    }
}

/// Insertion-ordered map from names to objects.
#[derive(Clone, Debug)]
pub struct Environment<S> {
    entries: Vec<(String, Object<S>)>,
    index: BTreeMap<String, usize>,
}

impl<S> Default for Environment<S> {
    fn default() -> Self {
        Environment {
            entries: Vec::new(),
            index: BTreeMap::new(),
        }
    }
}

impl<S: Scalar> Environment<S> {
    fn insert(&mut self, name: String, obj: Object<S>) {
        self.index.insert(name.clone(), self.entries.len());
        self.entries.push((name, obj));
    }

    pub fn get(&self, name: &str) -> Option<&Object<S>> {
        self.index.get(name).map(|&i| &self.entries[i].1)
    }

    pub fn point(&self, name: &str) -> Result<&Point<S>, EngineError> {
        match self.get(name) {
            None => Err(EngineError::UnknownName(name.to_string())),
            Some(Object::Point(p)) => Ok(p),
            Some(obj) => Err(EngineError::NotAPoint {
                name: name.to_string(),
                actual: obj.kind(),
            }),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Object<S>)> {
        self.entries.iter().map(|(n, o)| (n.as_str(), o))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One executed step: the produced object plus the names it consumed.
#[derive(Clone, Debug)]
pub struct TraceEntry<S> {
    pub step_index: usize,
    pub name: String,
    pub inputs: Vec<String>,
    pub object: Object<S>,
}

/// Ordered execution record; same length as the program's step list.
#[derive(Clone, Debug)]
pub struct Trace<S> {
    pub entries: Vec<TraceEntry<S>>,
    pub exports: Vec<String>,
}

/// Parameter bindings, in degrees for angles and units for lengths.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Bindings {
    values: BTreeMap<String, f64>,
}

impl Bindings {
    pub fn new() -> Self {
        Bindings::default()
    }

    pub fn with(mut self, name: impl Into<String>, value: f64) -> Self {
        self.values.insert(name.into(), value);
        self
    }

    pub fn set(&mut self, name: impl Into<String>, value: f64) {
        self.values.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(|s| s.as_str())
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("parameter `{0}` is not bound")]
    MissingBinding(String),
    #[error("binding `{0}` does not match any program parameter")]
    UnexpectedBinding(String),
    #[error("step {step} (`{name}`): {kind}")]
    Step {
        step: usize,
        name: String,
        kind: StepFailure,
    },
    #[error("`{0}` is not defined in the environment")]
    UnknownName(String),
    #[error("`{name}` is a {actual}, not a point")]
    NotAPoint { name: String, actual: &'static str },
    #[error("measuring {what}: {kind}")]
    Measurement { what: String, kind: StepFailure },
}

/// Why a step failed.
#[derive(Clone, Debug, Error, PartialEq)]
pub enum StepFailure {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("ambiguous pick: {0}")]
    AmbiguousPick(String),
    #[error("degenerate construction: {0}")]
    DegenerateConstruction(String),
}

pub fn execute<S: Scalar>(
    program: &ConstructionProgram,
    bindings: &Bindings,
    ctx: &Backend<S>,
) -> Result<(Environment<S>, Trace<S>), EngineError> {
    for param in &program.params {
        if bindings.get(&param.name).is_none() {
            return Err(EngineError::MissingBinding(param.name.clone()));
        }
    }
    for name in bindings.names() {
        if !program.params.iter().any(|p| p.name == name) {
            return Err(EngineError::UnexpectedBinding(name.to_string()));
        }
    }

    let mut env = Environment::default();
    let mut trace = Trace {
        entries: Vec::with_capacity(program.steps.len()),
        exports: program.exports.clone(),
    };

    for (step_index, step) in program.steps.iter().enumerate() {
        let fail = |kind: StepFailure| EngineError::Step {
            step: step_index,
            name: step.name.clone(),
            kind,
        };
        let (object, inputs) = run_step(&step.op, &env, bindings, ctx).map_err(fail)?;
        trace.entries.push(TraceEntry {
            step_index,
            name: step.name.clone(),
            inputs,
            object: object.clone(),
        });
        env.insert(step.name.clone(), object);
    }

    Ok((env, trace))
}

fn run_step<S: Scalar>(
    op: &StepOp,
    env: &Environment<S>,
    bindings: &Bindings,
    ctx: &Backend<S>,
) -> Result<(Object<S>, Vec<String>), StepFailure> {
    // Parse-time checks guarantee the names exist with the right kinds.
    let point = |name: &String| match env.get(name) {
        Some(Object::Point(p)) => p.clone(),
        _ => unreachable!("parser guarantees `{name}` is a point"),
    };
    let linear = |name: &String| match env.get(name) {
        Some(obj) => obj.as_line().expect("parser guarantees a linear object"),
        None => unreachable!("parser guarantees `{name}` exists"),
    };

    match op {
        StepOp::Coord { x, y } => Ok((
            Object::Point(Point::new(ctx.scalar(*x), ctx.scalar(*y))),
            Vec::new(),
        )),
        StepOp::LineThrough { p, q } => {
            let line = geom::line_through(&point(p), &point(q), ctx)?;
            Ok((Object::Line(line), vec![p.clone(), q.clone()]))
        }
        StepOp::Midpoint { p, q } => {
            let m = geom::midpoint(&point(p), &point(q));
            Ok((Object::Point(m), vec![p.clone(), q.clone()]))
        }
        StepOp::PerpendicularBisector { p, q } => {
            let line = geom::perpendicular_bisector(&point(p), &point(q), ctx)?;
            Ok((Object::Line(line), vec![p.clone(), q.clone()]))
        }
        StepOp::PerpendicularAt { line, p } => {
            let l = geom::perpendicular_at(&linear(line), &point(p));
            Ok((Object::Line(l), vec![line.clone(), p.clone()]))
        }
        StepOp::AngleBisector { vertex, arm1, arm2 } => {
            let ray = geom::angle_bisector(&point(vertex), &point(arm1), &point(arm2), ctx)?;
            Ok((
                Object::Ray(ray),
                vec![vertex.clone(), arm1.clone(), arm2.clone()],
            ))
        }
        StepOp::GivenAngle {
            origin,
            base,
            angle,
            side,
        } => {
            let deg = match angle {
                AngleExpr::Literal(v) => ctx.angle(*v),
                AngleExpr::Param(name) => {
                    ctx.angle(bindings.get(name).expect("bindings validated"))
                }
            };
            let ray = geom::ray_from_angle(&point(origin), &point(base), &deg, *side, ctx)?;
            Ok((Object::Ray(ray), vec![origin.clone(), base.clone()]))
        }
        StepOp::CircleAt { center, radius } => {
            let r = match radius {
                LengthExpr::Literal(v) => ctx.scalar(*v),
                LengthExpr::Param(name) => {
                    ctx.scalar(bindings.get(name).expect("bindings validated"))
                }
                LengthExpr::Dist(p, q) => point(p).dist(&point(q)),
            };
            let c = Circle::new(point(center), r, ctx)?;
            let mut inputs = vec![center.clone()];
            if let LengthExpr::Dist(p, q) = radius {
                inputs.push(p.clone());
                inputs.push(q.clone());
            }
            Ok((Object::Circle(c), inputs))
        }
        StepOp::Intersect { a, b, pick } => {
            let oa = env.get(a).expect("parser guarantees operand");
            let ob = env.get(b).expect("parser guarantees operand");
            let result = match (oa, ob) {
                (Object::Circle(c1), Object::Circle(c2)) => {
                    geom::intersect_circle_circle(c1, c2, ctx)?
                }
                (Object::Circle(c), other) => {
                    let l = other.as_line().expect("parser guarantees linear");
                    geom::intersect_line_circle(&l, c, ctx)
                }
                (other, Object::Circle(c)) => {
                    let l = other.as_line().expect("parser guarantees linear");
                    geom::intersect_line_circle(&l, c, ctx)
                }
                (la, lb) => {
                    let l1 = la.as_line().expect("parser guarantees linear");
                    let l2 = lb.as_line().expect("parser guarantees linear");
                    let p = geom::intersect_line_line(&l1, &l2, ctx)?;
                    return Ok((Object::Point(p), vec![a.clone(), b.clone()]));
                }
            };
            let hint = pick.as_ref().expect("parser requires pick when two-valued");
            let chosen = match result {
                Intersection::Empty => {
                    return Err(StepFailure::DegenerateConstruction(format!(
                        "intersect({a}, {b}) is empty where two points are required"
                    )))
                }
                Intersection::Tangent(_) => {
                    return Err(StepFailure::DegenerateConstruction(format!(
                        "intersect({a}, {b}) is tangent where two points are required"
                    )))
                }
                Intersection::Two(p1, p2) => resolve_pick(hint, p1, p2, env, ctx)?,
            };
            Ok((Object::Point(chosen), vec![a.clone(), b.clone()]))
        }
    }
}

fn resolve_pick<S: Scalar>(
    hint: &PickHint,
    p1: Point<S>,
    p2: Point<S>,
    env: &Environment<S>,
    ctx: &Backend<S>,
) -> Result<Point<S>, StepFailure> {
    let eps = ctx.eps();
    match hint {
        PickHint::ClosestTo(id) | PickHint::FarthestFrom(id) => {
            let reference = match env.get(id) {
                Some(Object::Point(p)) => p.clone(),
                _ => unreachable!("parser guarantees pick reference is a point"),
            };
            let d1 = p1.dist(&reference);
            let d2 = p2.dist(&reference);
            if d1.sub(&d2).abs() <= *eps {
                return Err(StepFailure::AmbiguousPick(format!(
                    "both candidates are equidistant from `{id}` within eps"
                )));
            }
            let take_first = match hint {
                PickHint::ClosestTo(_) => d1 < d2,
                _ => d1 > d2,
            };
            Ok(if take_first { p1 } else { p2 })
        }
        PickHint::DistinctFrom(id) => {
            let reference = match env.get(id) {
                Some(Object::Point(p)) => p.clone(),
                _ => unreachable!("parser guarantees pick reference is a point"),
            };
            let near1 = p1.dist(&reference) <= *eps;
            let near2 = p2.dist(&reference) <= *eps;
            match (near1, near2) {
                (true, false) => Ok(p2),
                (false, true) => Ok(p1),
                (false, false) => Err(StepFailure::AmbiguousPick(format!(
                    "neither candidate coincides with `{id}`; `distinct_from` cannot choose"
                ))),
                (true, true) => Err(StepFailure::AmbiguousPick(format!(
                    "both candidates coincide with `{id}`"
                ))),
            }
        }
        PickHint::Upper | PickHint::Lower => {
            let dy = p1.y.sub(&p2.y);
            let want_upper = matches!(hint, PickHint::Upper);
            if dy.abs() > *eps {
                let first_is_upper = dy > dy.lift(0.0);
                return Ok(if first_is_upper == want_upper { p1 } else { p2 });
            }
            let dx = p1.x.sub(&p2.x);
            if dx.abs() > *eps {
                let first_is_right = dx > dx.lift(0.0);
                return Ok(if first_is_right == want_upper { p1 } else { p2 });
            }
            Err(StepFailure::AmbiguousPick(
                "candidates coincide within eps; upper/lower cannot choose".into(),
            ))
        }
    }
}

/// Measures the undirected angle at `vertex` between `p` and `q`, all bound
/// point names in the environment.
pub fn measure_angle<S: Scalar>(
    env: &Environment<S>,
    vertex: &str,
    p: &str,
    q: &str,
    ctx: &Backend<S>,
) -> Result<AngleDeg<S>, EngineError> {
    let v = env.point(vertex)?;
    let a = env.point(p)?;
    let b = env.point(q)?;
    geom::angle_at(v, a, b, ctx).map_err(|e| EngineError::Measurement {
        what: format!("angle {p}-{vertex}-{q}"),
        kind: StepFailure::Geom(e),
    })
}

/// Distance between two bound points.
pub fn measure_dist<S: Scalar>(
    env: &Environment<S>,
    p: &str,
    q: &str,
) -> Result<S, EngineError> {
    Ok(env.point(p)?.dist(env.point(q)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::script::{parse, ScriptSource};

    fn program(text: &str) -> ConstructionProgram {
        parse(&ScriptSource::new("inline.gcs", text)).unwrap()
    }

    #[test]
    fn empty_program_gives_empty_environment() {
        let ctx = Backend::machine();
        let p = program("");
        let (env, trace) = execute(&p, &Bindings::new(), &ctx).unwrap();
        assert!(env.is_empty());
        assert!(trace.entries.is_empty());
    }

    #[test]
    fn bindings_are_validated() {
        let ctx = Backend::machine();
        let p = program("param theta: angle\npoint A = (0,0)\n");
        assert_eq!(
            execute(&p, &Bindings::new(), &ctx).unwrap_err(),
            EngineError::MissingBinding("theta".into())
        );
        let b = Bindings::new().with("theta", 30.0).with("extra", 1.0);
        assert_eq!(
            execute(&p, &b, &ctx).unwrap_err(),
            EngineError::UnexpectedBinding("extra".into())
        );
    }

    #[test]
    fn distinct_from_selects_the_other_point() {
        let ctx = Backend::machine();
        let p = program(
            "point A = (0,0)\npoint B = (1,0)\nline base = line_through(A, B)\n\
             circle c = circle(A, dist(A, B))\n\
             point A2 = intersect(base, c) pick distinct_from(B)\n",
        );
        let (env, _) = execute(&p, &Bindings::new(), &ctx).unwrap();
        let a2 = env.point("A2").unwrap();
        assert!((a2.x + 1.0).abs() < 1e-12 && a2.y.abs() < 1e-12);
    }

    #[test]
    fn upper_lower_picks() {
        let ctx = Backend::machine();
        let p = program(
            "point A = (0,0)\npoint B = (1,0)\n\
             circle ca = circle(A, dist(A, B))\ncircle cb = circle(B, dist(A, B))\n\
             point H = intersect(ca, cb) pick upper\n\
             point L = intersect(ca, cb) pick lower\n",
        );
        let (env, _) = execute(&p, &Bindings::new(), &ctx).unwrap();
        let h = env.point("H").unwrap();
        let l = env.point("L").unwrap();
        let s3 = 3f64.sqrt() / 2.0;
        assert!((h.x - 0.5).abs() < 1e-12 && (h.y - s3).abs() < 1e-12);
        assert!((l.y + s3).abs() < 1e-12);
    }

    #[test]
    fn ambiguous_pick_fails_loudly() {
        let ctx = Backend::machine();
        // Midpoint of AB is equidistant from the two circle-circle
        // intersection points, so closest_to cannot choose.
        let p = program(
            "point A = (0,0)\npoint B = (1,0)\npoint M = midpoint(A, B)\n\
             circle ca = circle(A, dist(A, B))\ncircle cb = circle(B, dist(A, B))\n\
             point X = intersect(ca, cb) pick closest_to(M)\n",
        );
        match execute(&p, &Bindings::new(), &ctx) {
            Err(EngineError::Step {
                kind: StepFailure::AmbiguousPick(_),
                step,
                ..
            }) => assert_eq!(step, 5),
            other => panic!("expected AmbiguousPick, got {other:?}"),
        }
    }

    #[test]
    fn tangent_where_two_needed_degenerates() {
        let ctx = Backend::machine();
        let p = program(
            "point A = (0,0)\npoint B = (2,0)\npoint U = (1,0)\n\
             circle ca = circle(A, dist(A, U))\ncircle cb = circle(B, dist(B, U))\n\
             point X = intersect(ca, cb) pick upper\n",
        );
        match execute(&p, &Bindings::new(), &ctx) {
            Err(EngineError::Step {
                kind: StepFailure::DegenerateConstruction(_),
                ..
            }) => {}
            other => panic!("expected DegenerateConstruction, got {other:?}"),
        }
    }

    #[test]
    fn replay_is_bit_identical() {
        let ctx = Backend::machine();
        let p = program(
            "param theta: angle\npoint A = (0,0)\npoint B = (1,0)\n\
             line seed = given_angle(A, B, theta, ccw)\n\
             circle c = circle(A, dist(A, B))\n\
             point C = intersect(seed, c) pick upper\nexport A, B, C\n",
        );
        let b = Bindings::new().with("theta", 33.25);
        let (env1, _) = execute(&p, &b, &ctx).unwrap();
        let (env2, _) = execute(&p, &b, &ctx).unwrap();
        let c1 = env1.point("C").unwrap();
        let c2 = env2.point("C").unwrap();
        assert!(c1.x == c2.x && c1.y == c2.y);
    }

    #[test]
    fn measure_angle_degenerate_vertex() {
        let ctx = Backend::machine();
        let p = program("point A = (0,0)\npoint B = (1,0)\n");
        let (env, _) = execute(&p, &Bindings::new(), &ctx).unwrap();
        match measure_angle(&env, "A", "A", "B", &ctx) {
            Err(EngineError::Measurement { .. }) => {}
            other => panic!("expected measurement failure, got {other:?}"),
        }
        assert_eq!(
            measure_angle(&env, "Z", "A", "B", &ctx),
            Err(EngineError::UnknownName("Z".into()))
        );
    }
}
