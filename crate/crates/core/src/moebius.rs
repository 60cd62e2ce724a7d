//! Unit-determinant real Möbius transformations acting on the upper half-plane.

use std::f64::consts::TAU;
use std::ops::Mul;

use crate::error::{Error, Result};

/// Determinant tolerance accepted without complaint by [`Isometry::new`].
pub const DET_TOL: f64 = 1e-12;
/// Width of the parabolic band `||tr| - 2| <= PARABOLIC_TOL` used by [`classify`].
pub const PARABOLIC_TOL: f64 = 1e-10;
/// Traces within this distance of `2` are reported as near-parabolic.
pub const NEAR_PARABOLIC_TOL: f64 = 1e-6;
/// Maximum number of products between determinant renormalisations.
pub const RENORMALIZE_EVERY: usize = 64;

/// Element of PSL(2, R), stored with `ad - bc = 1` and non-negative trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Isometry {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// Point `x + iy` of the upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
}

/// Point of the boundary circle `R ∪ {∞}` in homogeneous coordinates `x / y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjPoint {
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Hyperbolic,
    Parabolic,
    Elliptic,
    Identity,
}

impl Isometry {
    /// Builds `[[a, b], [c, d]]` scaled to unit determinant.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > 0.0) || ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(Error::domain(format!(
                "matrix [[{a}, {b}], [{c}, {d}]] has non-positive or non-finite determinant"
            )));
        }
        Ok(Self { a, b, c, d }.renormalized())
    }

    pub const fn identity() -> Self {
        Self { a: 1.0, b: 0.0, c: 0.0, d: 1.0 }
    }

    /// `diag(e^{l/2}, e^{-l/2})`: translation by `l` along the imaginary axis, `z ↦ e^l z`.
    pub fn axial(l: f64) -> Self {
        let h = 0.5 * l;
        Self { a: h.exp(), b: 0.0, c: 0.0, d: (-h).exp() }
    }

    /// `z ↦ z + t`.
    pub fn translation(t: f64) -> Self {
        Self { a: 1.0, b: t, c: 0.0, d: 1.0 }
    }

    pub fn inverse(&self) -> Self {
        Self { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// Rescales to determinant one and picks the sign representative with `tr >= 0`.
    pub fn renormalized(self) -> Self {
        let s = self.det().sqrt().recip();
        let flip = if self.trace() < 0.0
            || (self.trace() == 0.0 && (self.a, self.b, self.c) < (0.0, 0.0, 0.0))
        {
            -s
        } else {
            s
        };
        Self { a: self.a * flip, b: self.b * flip, c: self.c * flip, d: self.d * flip }
    }

    /// `gz = (az + b) / (cz + d)`.
    pub fn apply(&self, z: HPoint) -> HPoint {
        let cx_d = self.c * z.x + self.d;
        let cy = self.c * z.y;
        let denom = cx_d * cx_d + cy * cy;
        let x = ((self.a * z.x + self.b) * cx_d + self.a * self.c * z.y * z.y) / denom;
        // det = 1 by construction; ad - bc itself cancels badly for long words
        let y = z.y / denom;
        debug_assert!(y > 0.0, "image left the upper half-plane");
        HPoint { x, y }
    }

    pub fn apply_boundary(&self, p: ProjPoint) -> ProjPoint {
        ProjPoint { x: self.a * p.x + self.b * p.y, y: self.c * p.x + self.d * p.y }.normalized()
    }

    /// Repelling and attracting fixed points of a hyperbolic element.
    pub fn fixed_points(&self) -> Result<(ProjPoint, ProjPoint)> {
        let t = self.trace().abs();
        if t <= 2.0 + DET_TOL {
            return Err(Error::NotHyperbolic { trace: t });
        }
        let sign = if self.trace() < 0.0 { -1.0 } else { 1.0 };
        let big = sign * 0.5 * (t + (t * t - 4.0).sqrt());
        let small = 1.0 / big;
        Ok((self.eigenvector(small), self.eigenvector(big)))
    }

    fn eigenvector(&self, lambda: f64) -> ProjPoint {
        let u = ProjPoint { x: self.b, y: lambda - self.a };
        let v = ProjPoint { x: lambda - self.d, y: self.c };
        if u.x.hypot(u.y) >= v.x.hypot(v.y) {
            u.normalized()
        } else {
            v.normalized()
        }
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }
}

impl Mul for Isometry {
    type Output = Isometry;

    fn mul(self, o: Isometry) -> Isometry {
        Isometry {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }
}

/// Running product `g_1 g_2 ... g_n` with periodic determinant renormalisation.
#[derive(Clone, Copy, Debug)]
pub struct ProductChain {
    value: Isometry,
    since_renorm: usize,
}

impl Default for ProductChain {
    fn default() -> Self {
        Self { value: Isometry::identity(), since_renorm: 0 }
    }
}

impl ProductChain {
    pub fn new() -> Self {
        Self::default()
    }

    /// Right-multiplies by `g`.
    pub fn push(&mut self, g: &Isometry) {
        self.value = self.value * *g;
        self.since_renorm += 1;
        if self.since_renorm >= RENORMALIZE_EVERY {
            self.value = self.value.renormalized();
            self.since_renorm = 0;
        }
    }

    pub fn value(&self) -> Isometry {
        self.value
    }
}

impl HPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::domain(format!("({x}, {y}) is not in the upper half-plane")));
        }
        Ok(Self { x, y })
    }
}

impl ProjPoint {
    pub const INFINITY: ProjPoint = ProjPoint { x: 1.0, y: 0.0 };

    pub fn real(x: f64) -> Self {
        Self { x, y: 1.0 }
    }

    fn normalized(self) -> Self {
        let n = self.x.hypot(self.y);
        Self { x: self.x / n, y: self.y / n }
    }

    /// Position on the boundary circle as an angle in `[0, 2π)`, increasing with `x / y`.
    pub fn angle(&self) -> f64 {
        (2.0 * self.x.atan2(self.y)).rem_euclid(TAU)
    }

    /// Affine value `x / y` (infinite for the point at infinity).
    pub fn value(&self) -> f64 {
        self.x / self.y
    }
}

fn bracket(u: ProjPoint, v: ProjPoint) -> f64 {
    u.x * v.y - u.y * v.x
}

/// Complete geodesic with endpoints on the boundary circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Geodesic {
    pub from: ProjPoint,
    pub to: ProjPoint,
}

impl Geodesic {
    pub fn image(&self, g: &Isometry) -> Geodesic {
        Geodesic { from: g.apply_boundary(self.from), to: g.apply_boundary(self.to) }
    }

    /// `cosh` of the hyperbolic distance to a disjoint geodesic (`<= 1` if they meet).
    pub fn cosh_distance(&self, other: &Geodesic) -> f64 {
        let (p1, p2, q1, q2) = (self.from, self.to, other.from, other.to);
        let denom = bracket(p1, p2) * bracket(q1, q2);
        let p = bracket(p1, q1) * bracket(p2, q2) / denom;
        let q = bracket(p1, q2) * bracket(p2, q1) / denom;
        p.abs() + q.abs()
    }

    /// Hyperbolic distance to a disjoint geodesic, zero if they meet.
    pub fn distance(&self, other: &Geodesic) -> f64 {
        self.cosh_distance(other).max(1.0).acosh()
    }
}

/// Closed arc of the boundary circle traversed in the positive direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryArc {
    pub start: ProjPoint,
    pub end: ProjPoint,
}

impl BoundaryArc {
    fn span(&self) -> f64 {
        (self.end.angle() - self.start.angle()).rem_euclid(TAU)
    }

    pub fn contains(&self, p: ProjPoint) -> bool {
        (p.angle() - self.start.angle()).rem_euclid(TAU) <= self.span()
    }

    /// True when the closed arcs share no point.
    pub fn is_disjoint(&self, other: &BoundaryArc) -> bool {
        !self.contains(other.start) && !other.contains(self.start)
    }

    pub fn image(&self, g: &Isometry) -> BoundaryArc {
        BoundaryArc { start: g.apply_boundary(self.start), end: g.apply_boundary(self.end) }
    }

    /// Geodesic joining the two endpoints.
    pub fn chord(&self) -> Geodesic {
        Geodesic { from: self.start, to: self.end }
    }
}

/// Classification by `|tr|` against `2` with tolerance [`PARABOLIC_TOL`].
pub fn classify(g: &Isometry) -> Kind {
    let t = g.trace().abs();
    if (t - 2.0).abs() <= PARABOLIC_TOL {
        if g.b.abs() <= PARABOLIC_TOL && g.c.abs() <= PARABOLIC_TOL && (g.a - g.d).abs() <= PARABOLIC_TOL {
            Kind::Identity
        } else {
            Kind::Parabolic
        }
    } else if t < 2.0 {
        Kind::Elliptic
    } else {
        Kind::Hyperbolic
    }
}

/// Hyperbolic length of the closed geodesic with trace `tr`: `2 arccosh(|tr| / 2)`.
pub fn length_from_trace(tr: f64) -> f64 {
    2.0 * (0.5 * tr.abs()).acosh()
}

/// Translation length `2 arccosh(|tr g| / 2)` of a hyperbolic element.
pub fn translation_length(g: &Isometry) -> Result<f64> {
    let t = g.trace().abs();
    if t <= 2.0 + DET_TOL {
        return Err(Error::NotHyperbolic { trace: t });
    }
    Ok(length_from_trace(t))
}

/// `sin θ(z) = y / |z|` where `θ` is the polar angle measured from the real axis;
/// equals `1 / cosh` of the distance from `z` to the imaginary axis.
pub fn angle_sine(z: HPoint) -> f64 {
    z.y / z.x.hypot(z.y)
}

/// Hyperbolic distance between two points of the half-plane.
pub fn distance(z: HPoint, w: HPoint) -> f64 {
    let dx = z.x - w.x;
    let dy = z.y - w.y;
    (1.0 + (dx * dx + dy * dy) / (2.0 * z.y * w.y)).acosh()
}

/// Conjugator `h` with `h(0) = from`, `h(∞) = to`, mapping the imaginary axis onto
/// the geodesic `from → to`.
pub fn axis_frame(from: ProjPoint, to: ProjPoint) -> Result<Isometry> {
    // columns are the images of ∞ and 0
    let (mut a, b, mut c, d) = (to.x, from.x, to.y, from.y);
    let det = a * d - b * c;
    if det.abs() < 1e-300 {
        return Err(Error::domain("degenerate geodesic endpoints"));
    }
    if det < 0.0 {
        a = -a;
        c = -c;
    }
    Isometry::new(a, b, c, d)
}
