//! Convex proximity geometry.
//!
//! Distances from a query point to the convex hull of a small point set,
//! and membership in the hull offset by a sphere (Minkowski sum). The
//! experiments only ever use single-point sets (a TCP-centered sphere),
//! but the general hull form is provided for multi-generator fields.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Velocity in meters/second (also used for displacements).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vector3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn distance(&self, other: Point3) -> f64 {
        (*self - other).norm()
    }
}

impl Vector3 {
    pub const ZERO: Vector3 = Vector3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vector3 { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(&self, other: Vector3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(*self).sqrt()
    }

    /// Unit vector in the same direction, or `None` when shorter than `eps`.
    pub fn normalized(&self, eps: f64) -> Option<Vector3> {
        let n = self.norm();
        if n < eps {
            None
        } else {
            Some(*self * (1.0 / n))
        }
    }
}

impl Sub for Point3 {
    type Output = Vector3;
    fn sub(self, rhs: Point3) -> Vector3 {
        Vector3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Add<Vector3> for Point3 {
    type Output = Point3;
    fn add(self, rhs: Vector3) -> Point3 {
        Point3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Add for Vector3 {
    type Output = Vector3;
    fn add(self, rhs: Vector3) -> Vector3 {
        Vector3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vector3 {
    type Output = Vector3;
    fn sub(self, rhs: Vector3) -> Vector3 {
        Vector3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Vector3 {
    type Output = Vector3;
    fn mul(self, s: f64) -> Vector3 {
        Vector3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vector3 {
    type Output = Vector3;
    fn neg(self) -> Vector3 {
        self * -1.0
    }
}

/// Non-empty set of hull generator points. Duplicates are permitted; the
/// hull dedups them implicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    points: Vec<Point3>,
}

impl PointSet {
    pub fn new(points: Vec<Point3>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("point set must be non-empty"));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::invalid(format!(
                "point set contains non-finite point ({}, {}, {})",
                p.x, p.y, p.z
            )));
        }
        Ok(PointSet { points })
    }

    pub fn single(p: Point3) -> Result<Self> {
        PointSet::new(vec![p])
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }
}

/// Hull-plus-sphere volume: conv(P) offset by a ball of `radius`.
/// Membership is closed (the boundary counts as inside).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HapticField {
    pub generators: PointSet,
    pub radius: f64,
}

impl HapticField {
    pub fn new(generators: PointSet, radius: f64) -> Result<Self> {
        if !radius.is_finite() || radius < 0.0 {
            return Err(Error::invalid("field radius must be finite and >= 0"));
        }
        Ok(HapticField { generators, radius })
    }
}

/// Iteration cap for the hull projection. Point sets are tiny, so the
/// away-step scheme converges long before this in practice.
const MAX_ITERATIONS: usize = 10_000;
/// Duality-gap tolerance on 0.5 * distance^2; corresponds to sub-nanometer
/// distance resolution at the scales used here.
const GAP_TOLERANCE: f64 = 1e-18;

/// Minimum distance from `q` to the convex hull of `set`.
///
/// Runs away-step Frank-Wolfe on the convex-combination weights with exact
/// line search; no facet enumeration is needed. Returns 0 when `q` lies in
/// the hull, and reduces to the plain Euclidean distance for a single point.
pub fn convex_hull_distance(q: Point3, set: &PointSet) -> Result<f64> {
    if !q.is_finite() {
        return Err(Error::invalid("query point must be finite"));
    }
    let pts = set.points();
    if pts.len() == 1 {
        return Ok(q.distance(pts[0]));
    }

    // Start at the vertex nearest to q.
    let start = pts
        .iter()
        .enumerate()
        .min_by(|a, b| q.distance(*a.1).total_cmp(&q.distance(*b.1)))
        .map(|(i, _)| i)
        .unwrap();
    let mut weights = vec![0.0; pts.len()];
    weights[start] = 1.0;
    let mut x = pts[start];

    for _ in 0..MAX_ITERATIONS {
        let g = x - q; // gradient of 0.5*||x - q||^2

        // Frank-Wolfe vertex: most-decreasing direction.
        let mut s = 0;
        let mut s_score = f64::INFINITY;
        // Away vertex: worst active generator.
        let mut a = usize::MAX;
        let mut a_score = f64::NEG_INFINITY;
        for (i, p) in pts.iter().enumerate() {
            let score = g.dot(*p - q);
            if score < s_score {
                s_score = score;
                s = i;
            }
            if weights[i] > 0.0 && score > a_score {
                a_score = score;
                a = i;
            }
        }

        let gap = g.dot(x - pts[s]);
        if gap <= GAP_TOLERANCE {
            break;
        }

        // Choose between the FW step and the away step.
        let away_gain = g.dot(pts[a] - x);
        let (dir, gamma_max, toward, vertex) = if gap >= away_gain {
            (pts[s] - x, 1.0, true, s)
        } else {
            let w = weights[a];
            (x - pts[a], w / (1.0_f64 - w).max(f64::MIN_POSITIVE), false, a)
        };

        let dd = dir.dot(dir);
        if dd <= 0.0 {
            break;
        }
        let gamma = (-(g.dot(dir)) / dd).clamp(0.0, gamma_max);
        if gamma <= 0.0 {
            break;
        }

        if toward {
            for w in weights.iter_mut() {
                *w *= 1.0 - gamma;
            }
            weights[vertex] += gamma;
        } else {
            for w in weights.iter_mut() {
                *w *= 1.0 + gamma;
            }
            weights[vertex] -= gamma;
            if weights[vertex] < 1e-15 {
                weights[vertex] = 0.0;
            }
        }
        x = x + dir * gamma;
    }

    Ok(q.distance(x))
}

/// Closed membership test for the offset hull per the Minkowski-sum
/// definition: `q` is inside iff its hull distance is at most the radius.
pub fn hpf_contains(q: Point3, field: &HapticField) -> Result<bool> {
    Ok(convex_hull_distance(q, &field.generators)? <= field.radius)
}

/// Euclidean TCP-to-hand distance; the spherical specialization used by
/// the experiments.
pub fn tcp_hand_distance(tcp: Point3, hand: Point3) -> f64 {
    tcp.distance(hand)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64, z: f64) -> Point3 {
        Point3::new(x, y, z)
    }

    #[test]
    fn single_point_hull_is_euclidean() {
        let set = PointSet::single(p(0.0, 0.0, 0.0)).unwrap();
        let d = convex_hull_distance(p(0.3, 0.0, 0.0), &set).unwrap();
        assert!((d - 0.3).abs() < 1e-12);
    }

    #[test]
    fn interior_point_of_unit_cube_has_zero_distance() {
        let corners: Vec<Point3> = (0..8)
            .map(|i| p((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
            .collect();
        let set = PointSet::new(corners).unwrap();
        let d = convex_hull_distance(p(0.5, 0.5, 0.5), &set).unwrap();
        assert!(d < 1e-8, "expected 0, got {d}");
    }

    #[test]
    fn tetrahedron_query_matches_frozen_oracle_value() {
        // Nearest hull point to (2,0,0) is the vertex (1,0,0); the grid
        // oracle in tests/geometry_oracle.rs reproduces 1.0 to within its
        // resolution.
        let set = PointSet::new(vec![
            p(0.0, 0.0, 0.0),
            p(0.0, 1.0, 0.0),
            p(0.0, 0.0, 1.0),
            p(1.0, 0.0, 0.0),
        ])
        .unwrap();
        let d = convex_hull_distance(p(2.0, 0.0, 0.0), &set).unwrap();
        assert!((d - 1.0).abs() < 1e-9, "got {d}");
    }

    #[test]
    fn membership_is_closed_at_boundary() {
        let set = PointSet::single(p(0.0, 0.0, 0.0)).unwrap();
        let inside = HapticField::new(set.clone(), 0.4).unwrap();
        let outside = HapticField::new(set.clone(), 0.2).unwrap();
        let exact = HapticField::new(set, 0.3).unwrap();
        let q = p(0.3, 0.0, 0.0);
        assert!(hpf_contains(q, &inside).unwrap());
        assert!(!hpf_contains(q, &outside).unwrap());
        assert!(hpf_contains(q, &exact).unwrap());
    }

    #[test]
    fn empty_point_set_rejected() {
        assert!(PointSet::new(vec![]).is_err());
    }

    #[test]
    fn non_finite_input_rejected() {
        assert!(PointSet::new(vec![p(f64::NAN, 0.0, 0.0)]).is_err());
        let set = PointSet::single(p(0.0, 0.0, 0.0)).unwrap();
        assert!(convex_hull_distance(p(f64::INFINITY, 0.0, 0.0), &set).is_err());
    }

    #[test]
    fn coincident_duplicate_points_reduce_to_sphere_case() {
        let set = PointSet::new(vec![p(1.0, 1.0, 1.0); 5]).unwrap();
        let d = convex_hull_distance(p(1.0, 1.0, 2.0), &set).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tcp_hand_distance_examples() {
        assert!((tcp_hand_distance(p(0.0, 0.0, 0.0), p(0.0, 0.4, 0.0)) - 0.4).abs() < 1e-15);
        assert_eq!(tcp_hand_distance(p(1.0, 2.0, 3.0), p(1.0, 2.0, 3.0)), 0.0);
        assert!((tcp_hand_distance(p(1.0, 2.0, 2.0), p(0.0, 0.0, 0.0)) - 3.0).abs() < 1e-15);
    }
}
