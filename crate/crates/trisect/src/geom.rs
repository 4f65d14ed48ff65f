//! Geometric primitives and the ruler-and-compass operation set.
//!
//! All types are immutable values over a [`Scalar`] backend and every
//! operation is pure. Degeneracy decisions (coincident points, tangency,
//! parallelism) compare against the backend's eps, which is absolute on
//! coordinates scaled to the unit-length datum.

use thiserror::Error;

use crate::scalar::{AngleDeg, Backend, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeomError {
    #[error("points coincide within tolerance")]
    CoincidentPoints,
    #[error("lines are parallel")]
    ParallelLines,
    #[error("lines are coincident")]
    CoincidentLines,
    #[error("circles are concentric")]
    ConcentricCircles,
    #[error("angle is degenerate: arm coincides with vertex")]
    DegenerateAngle,
    #[error("bisector of a straight angle is ambiguous")]
    AmbiguousBisector,
    #[error("circle radius is below tolerance")]
    RadiusTooSmall,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Point<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Point<S> {
    pub fn new(x: S, y: S) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, other: &Point<S>) -> S {
        let dx = self.x.sub(&other.x);
        let dy = self.y.sub(&other.y);
        dx.mul(&dx).add(&dy.mul(&dy)).sqrt()
    }

    /// Lexicographic order by (x, y); ties are exact. Used to fix the order
    /// of two-valued intersection results.
    fn lex_le(&self, other: &Point<S>) -> bool {
        if self.x < other.x {
            return true;
        }
        if self.x > other.x {
            return false;
        }
        self.y <= other.y
    }
}

/// Line a·x + b·y + c = 0, normalized so a² + b² = 1 and (a, b) is
/// lexicographically positive. Normalization is deterministic, so equal
/// inputs produce bit-equal lines.
#[derive(Clone, Debug, PartialEq)]
pub struct Line<S> {
    pub a: S,
    pub b: S,
    pub c: S,
}

impl<S: Scalar> Line<S> {
    fn normalized(a: S, b: S, c: S) -> Self {
        let n = a.mul(&a).add(&b.mul(&b)).sqrt();
        let mut a = a.div(&n);
        let mut b = b.div(&n);
        let mut c = c.div(&n);
        let zero = a.lift(0.0);
        let flip = a < zero || (a == zero && b < zero);
        if flip {
            a = a.neg();
            b = b.neg();
            c = c.neg();
        }
        Line { a, b, c }
    }

    /// Signed distance from `p` to the line.
    pub fn signed_dist(&self, p: &Point<S>) -> S {
        self.a.mul(&p.x).add(&self.b.mul(&p.y)).add(&self.c)
    }

    /// Foot of the perpendicular from `p`.
    pub fn project(&self, p: &Point<S>) -> Point<S> {
        let d = self.signed_dist(p);
        Point::new(p.x.sub(&d.mul(&self.a)), p.y.sub(&d.mul(&self.b)))
    }

    /// Unit direction vector of the line.
    pub fn direction(&self) -> (S, S) {
        (self.b.neg(), self.a.clone())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circle<S> {
    pub center: Point<S>,
    pub r: S,
}

impl<S: Scalar> Circle<S> {
    /// Radius must exceed eps; compass arcs of vanishing radius mean the
    /// construction has degenerated.
    pub fn new(center: Point<S>, r: S, ctx: &Backend<S>) -> Result<Self, GeomError> {
        if r <= *ctx.eps() {
            return Err(GeomError::RadiusTooSmall);
        }
        Ok(Circle { center, r })
    }
}

/// Ray from an origin along a unit direction. Intersections treat the ray as
/// its supporting line ("extend the segment"); the direction is kept for
/// rendering and orientation queries.
#[derive(Clone, Debug, PartialEq)]
pub struct Ray<S> {
    pub origin: Point<S>,
    pub dx: S,
    pub dy: S,
}

impl<S: Scalar> Ray<S> {
    /// The supporting line through the origin.
    pub fn line(&self) -> Line<S> {
        let a = self.dy.neg();
        let b = self.dx.clone();
        let c = a.mul(&self.origin.x).add(&b.mul(&self.origin.y)).neg();
        Line::normalized(a, b, c)
    }

    /// A point one unit along the ray, for angle measurements.
    pub fn tip(&self) -> Point<S> {
        Point::new(self.origin.x.add(&self.dx), self.origin.y.add(&self.dy))
    }
}

/// Result of a two-valued intersection. Two-point results are ordered
/// lexicographically by (x, y); the tangency band |d − r| ≤ eps returns the
/// single midpoint-projection point.
#[derive(Clone, Debug, PartialEq)]
pub enum Intersection<S> {
    Empty,
    Tangent(Point<S>),
    Two(Point<S>, Point<S>),
}

fn ordered<S: Scalar>(p: Point<S>, q: Point<S>) -> Intersection<S> {
    if p.lex_le(&q) {
        Intersection::Two(p, q)
    } else {
        Intersection::Two(q, p)
    }
}

/// Which side of the base ray a placed angle opens toward.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Ccw,
    Cw,
}

pub fn line_through<S: Scalar>(
    p: &Point<S>,
    q: &Point<S>,
    ctx: &Backend<S>,
) -> Result<Line<S>, GeomError> {
    if p.dist(q) <= *ctx.eps() {
        return Err(GeomError::CoincidentPoints);
    }
    let a = p.y.sub(&q.y);
    let b = q.x.sub(&p.x);
    let c = a.mul(&p.x).add(&b.mul(&p.y)).neg();
    Ok(Line::normalized(a, b, c))
}

pub fn midpoint<S: Scalar>(p: &Point<S>, q: &Point<S>) -> Point<S> {
    let half = p.x.lift(0.5);
    Point::new(
        p.x.add(&q.x).mul(&half),
        p.y.add(&q.y).mul(&half),
    )
}

pub fn perpendicular_bisector<S: Scalar>(
    p: &Point<S>,
    q: &Point<S>,
    ctx: &Backend<S>,
) -> Result<Line<S>, GeomError> {
    if p.dist(q) <= *ctx.eps() {
        return Err(GeomError::CoincidentPoints);
    }
    let m = midpoint(p, q);
    let a = q.x.sub(&p.x);
    let b = q.y.sub(&p.y);
    let c = a.mul(&m.x).add(&b.mul(&m.y)).neg();
    Ok(Line::normalized(a, b, c))
}

/// Perpendicular to `l` through `p` (p need not lie on l).
pub fn perpendicular_at<S: Scalar>(l: &Line<S>, p: &Point<S>) -> Line<S> {
    let a = l.b.neg();
    let b = l.a.clone();
    let c = a.mul(&p.x).add(&b.mul(&p.y)).neg();
    Line::normalized(a, b, c)
}

/// Interior bisector of the angle at `vertex` between the arms toward `arm1`
/// and `arm2`. A zero angle bisects to itself; a straight angle has no
/// interior bisector.
pub fn angle_bisector<S: Scalar>(
    vertex: &Point<S>,
    arm1: &Point<S>,
    arm2: &Point<S>,
    ctx: &Backend<S>,
) -> Result<Ray<S>, GeomError> {
    let eps = ctx.eps();
    let d1 = vertex.dist(arm1);
    let d2 = vertex.dist(arm2);
    if d1 <= *eps || d2 <= *eps {
        return Err(GeomError::DegenerateAngle);
    }
    let ux = arm1.x.sub(&vertex.x).div(&d1);
    let uy = arm1.y.sub(&vertex.y).div(&d1);
    let wx = arm2.x.sub(&vertex.x).div(&d2);
    let wy = arm2.y.sub(&vertex.y).div(&d2);
    let sx = ux.add(&wx);
    let sy = uy.add(&wy);
    let n = sx.mul(&sx).add(&sy.mul(&sy)).sqrt();
    if n <= *eps {
        return Err(GeomError::AmbiguousBisector);
    }
    Ok(Ray {
        origin: vertex.clone(),
        dx: sx.div(&n),
        dy: sy.div(&n),
    })
}

pub fn intersect_line_line<S: Scalar>(
    l1: &Line<S>,
    l2: &Line<S>,
    ctx: &Backend<S>,
) -> Result<Point<S>, GeomError> {
    let cross = l1.a.mul(&l2.b).sub(&l2.a.mul(&l1.b));
    if cross.abs() <= *ctx.eps() {
        // Parallel within tolerance; coincident if the offsets agree once the
        // normals are aligned.
        let dot = l1.a.mul(&l2.a).add(&l1.b.mul(&l2.b));
        let c2 = if dot < dot.lift(0.0) {
            l2.c.neg()
        } else {
            l2.c.clone()
        };
        return if l1.c.sub(&c2).abs() <= *ctx.eps() {
            Err(GeomError::CoincidentLines)
        } else {
            Err(GeomError::ParallelLines)
        };
    }
    let x = l1.b.mul(&l2.c).sub(&l2.b.mul(&l1.c)).div(&cross);
    let y = l2.a.mul(&l1.c).sub(&l1.a.mul(&l2.c)).div(&cross);
    Ok(Point::new(x, y))
}

pub fn intersect_line_circle<S: Scalar>(
    l: &Line<S>,
    c: &Circle<S>,
    ctx: &Backend<S>,
) -> Intersection<S> {
    let eps = ctx.eps();
    let d = l.signed_dist(&c.center);
    let ad = d.abs();
    let gap = ad.sub(&c.r);
    if gap > *eps {
        return Intersection::Empty;
    }
    let foot = l.project(&c.center);
    if gap.abs() <= *eps {
        return Intersection::Tangent(foot);
    }
    let h = c.r.mul(&c.r).sub(&d.mul(&d)).sqrt();
    let (tx, ty) = l.direction();
    let p1 = Point::new(foot.x.add(&h.mul(&tx)), foot.y.add(&h.mul(&ty)));
    let p2 = Point::new(foot.x.sub(&h.mul(&tx)), foot.y.sub(&h.mul(&ty)));
    ordered(p1, p2)
}

pub fn intersect_circle_circle<S: Scalar>(
    c1: &Circle<S>,
    c2: &Circle<S>,
    ctx: &Backend<S>,
) -> Result<Intersection<S>, GeomError> {
    // Canonical operand order makes the operation exactly symmetric.
    if !c1.center.lex_le(&c2.center) {
        return intersect_circle_circle(c2, c1, ctx);
    }
    let eps = ctx.eps();
    let d = c1.center.dist(&c2.center);
    if d <= *eps {
        return Err(GeomError::ConcentricCircles);
    }
    let ext_gap = d.sub(&c1.r.add(&c2.r));
    let int_gap = c1.r.sub(&c2.r).abs().sub(&d);
    if ext_gap > *eps || int_gap > *eps {
        return Ok(Intersection::Empty);
    }
    let ux = c2.center.x.sub(&c1.center.x).div(&d);
    let uy = c2.center.y.sub(&c1.center.y).div(&d);
    let two = d.lift(2.0);
    // Distance from c1's center to the chord, along the center line.
    let x = d
        .mul(&d)
        .add(&c1.r.mul(&c1.r))
        .sub(&c2.r.mul(&c2.r))
        .div(&two.mul(&d));
    let axis = Point::new(
        c1.center.x.add(&x.mul(&ux)),
        c1.center.y.add(&x.mul(&uy)),
    );
    if ext_gap.abs() <= *eps || int_gap.abs() <= *eps {
        return Ok(Intersection::Tangent(axis));
    }
    let y = c1.r.mul(&c1.r).sub(&x.mul(&x)).sqrt();
    let p1 = Point::new(axis.x.sub(&y.mul(&uy)), axis.y.add(&y.mul(&ux)));
    let p2 = Point::new(axis.x.add(&y.mul(&uy)), axis.y.sub(&y.mul(&ux)));
    Ok(ordered(p1, p2))
}

/// Undirected angle at `vertex` between the arms toward `p` and `q`,
/// in [0°, 180°]; symmetric in `p` and `q`.
pub fn angle_at<S: Scalar>(
    vertex: &Point<S>,
    p: &Point<S>,
    q: &Point<S>,
    ctx: &Backend<S>,
) -> Result<AngleDeg<S>, GeomError> {
    let eps = ctx.eps();
    if vertex.dist(p) <= *eps || vertex.dist(q) <= *eps {
        return Err(GeomError::DegenerateAngle);
    }
    let ux = p.x.sub(&vertex.x);
    let uy = p.y.sub(&vertex.y);
    let wx = q.x.sub(&vertex.x);
    let wy = q.y.sub(&vertex.y);
    let dot = ux.mul(&wx).add(&uy.mul(&wy));
    let cross = ux.mul(&wy).sub(&uy.mul(&wx)).abs();
    Ok(AngleDeg::from_radians(&cross.atan2(&dot)))
}

/// Ray from `origin` making the given angle with the direction toward
/// `base`, opening counterclockwise or clockwise.
pub fn ray_from_angle<S: Scalar>(
    origin: &Point<S>,
    base: &Point<S>,
    deg: &AngleDeg<S>,
    side: Side,
    ctx: &Backend<S>,
) -> Result<Ray<S>, GeomError> {
    let d = origin.dist(base);
    if d <= *ctx.eps() {
        return Err(GeomError::DegenerateAngle);
    }
    let ux = base.x.sub(&origin.x).div(&d);
    let uy = base.y.sub(&origin.y).div(&d);
    let rad = deg.to_radians();
    let rad = match side {
        Side::Ccw => rad,
        Side::Cw => rad.neg(),
    };
    let ca = rad.cos();
    let sa = rad.sin();
    Ok(Ray {
        origin: origin.clone(),
        dx: ux.mul(&ca).sub(&uy.mul(&sa)),
        dy: ux.mul(&sa).add(&uy.mul(&ca)),
    })
}
