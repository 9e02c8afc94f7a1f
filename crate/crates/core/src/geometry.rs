//! Plane geometry primitives: points, signed areas, triangle quadrature.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

/// A point (or vector) in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product, treating both points as vectors.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn midpoint(self, other: Point) -> Point {
        Point::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// Twice the signed area of the triangle `(a, b, c)`.
///
/// Positive when the vertices are ordered counterclockwise. This is also
/// the 3x3 determinant of the vertex coordinates bordered by a column of
/// ones.
pub fn signed_area_2x(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

/// Signed area of a simple polygon by the shoelace formula.
pub fn shoelace(points: &[Point]) -> f64 {
    let n = points.len();
    let mut acc = 0.0;
    for i in 0..n {
        let p = points[i];
        let q = points[(i + 1) % n];
        acc += p.cross(q);
    }
    0.5 * acc
}

/// Fixed triangle quadrature rules used for right-hand sides and error
/// integrals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum QuadratureRule {
    /// One-point centroid rule, exact for linear integrands.
    Centroid,
    /// Three-point edge-midpoint rule, exact for quadratic integrands.
    #[default]
    MidEdge,
}

impl QuadratureRule {
    pub fn from_order(order: u32) -> Option<Self> {
        match order {
            1 => Some(QuadratureRule::Centroid),
            2 => Some(QuadratureRule::MidEdge),
            _ => None,
        }
    }

    pub fn order(self) -> u32 {
        match self {
            QuadratureRule::Centroid => 1,
            QuadratureRule::MidEdge => 2,
        }
    }

    /// Integrate `f` over the triangle `(a, b, c)` whose (possibly signed)
    /// area is `area`.
    pub fn integrate(
        self,
        a: Point,
        b: Point,
        c: Point,
        area: f64,
        f: impl Fn(Point) -> f64,
    ) -> f64 {
        match self {
            QuadratureRule::Centroid => {
                let centroid = Point::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0);
                area * f(centroid)
            }
            QuadratureRule::MidEdge => {
                let s = f(a.midpoint(b)) + f(b.midpoint(c)) + f(c.midpoint(a));
                area / 3.0 * s
            }
        }
    }
}
