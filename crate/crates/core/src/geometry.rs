//! Points, boxes, and dilations in low dimension.
//!
//! Boxes are half-open: a point belongs to `]lower, upper]` axis by axis, so
//! translates of a box by its side lengths tile space without overlap.
//! Distances to a box are Euclidean distances to its closure; the half-open
//! convention only matters for membership, never for metric quantities.

use crate::error::{Error, Result};
use rand::Rng;

/// A point of R^d with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinitePoint);
        }
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coord(&self, axis: usize) -> f64 {
        self.coords[axis]
    }

    pub fn distance(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Componentwise translation by `shift`.
    pub fn translate(&self, shift: &[f64]) -> Result<Point> {
        if shift.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: shift.len() });
        }
        Point::new(self.coords.iter().zip(shift).map(|(c, s)| c + s).collect())
    }
}

/// Volume of the unit ball in dimension `d`, for `d <= 3`.
pub fn unit_ball_volume(d: usize) -> Result<f64> {
    match d {
        0 => Ok(1.0),
        1 => Ok(2.0),
        2 => Ok(std::f64::consts::PI),
        3 => Ok(4.0 * std::f64::consts::PI / 3.0),
        _ => Err(Error::UnsupportedDimension(d)),
    }
}

/// Surface measure of the unit sphere S^(d-1) in R^d, for `d <= 3`.
pub fn unit_sphere_surface(d: usize) -> Result<f64> {
    match d {
        1 => Ok(2.0),
        2 => Ok(2.0 * std::f64::consts::PI),
        3 => Ok(4.0 * std::f64::consts::PI),
        _ => Err(Error::UnsupportedDimension(d)),
    }
}

/// Axis-aligned box `]lower_1, upper_1] x ... x ]lower_d, upper_d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRegion {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty()
            || lower.len() != upper.len()
            || lower.iter().any(|c| !c.is_finite())
            || upper.iter().any(|c| !c.is_finite())
            || lower.iter().zip(&upper).any(|(l, u)| l >= u)
        {
            return Err(Error::InvalidBox);
        }
        Ok(Self { lower, upper })
    }

    /// The centered cube `]-n, n]^d`.
    pub fn centered_cube(n: f64, dim: usize) -> Result<Self> {
        if !(n.is_finite() && n > 0.0) || dim == 0 {
            return Err(Error::InvalidBox);
        }
        Self::new(vec![-n; dim], vec![n; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn side_lengths(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).collect()
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.dim() == self.dim()
            && p.coords()
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(c, (l, u))| l < c && c <= u)
    }

    /// True when `other` lies inside this box (as closed sets).
    pub fn contains_box(&self, other: &BoxRegion) -> bool {
        other.dim() == self.dim()
            && self.lower.iter().zip(&other.lower).all(|(a, b)| a <= b)
            && self.upper.iter().zip(&other.upper).all(|(a, b)| b <= a)
    }

    pub fn leb_volume(&self) -> f64 {
        self.side_lengths().iter().product()
    }

    pub fn diameter(&self) -> f64 {
        self.side_lengths().iter().map(|s| s * s).sum::<f64>().sqrt()
    }

    pub fn translate(&self, shift: &[f64]) -> Result<BoxRegion> {
        if shift.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: shift.len() });
        }
        BoxRegion::new(
            self.lower.iter().zip(shift).map(|(c, s)| c + s).collect(),
            self.upper.iter().zip(shift).map(|(c, s)| c + s).collect(),
        )
    }

    /// Euclidean distance from `p` to the closure of the box.
    /// Cube of the given half-width centered at this box's midpoint; errors
    /// when it does not fit inside.
    pub fn centered_subbox(&self, half_width: f64) -> Result<BoxRegion> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidBox);
        }
        let sub = BoxRegion::new(
            self.lower.iter().zip(&self.upper).map(|(l, u)| (l + u) / 2.0 - half_width).collect(),
            self.lower.iter().zip(&self.upper).map(|(l, u)| (l + u) / 2.0 + half_width).collect(),
        )?;
        if !self.contains_box(&sub) {
            return Err(Error::InvalidBox);
        }
        Ok(sub)
    }

    pub fn dist_to(&self, p: &Point) -> f64 {
        debug_assert_eq!(p.dim(), self.dim());
        p.coords()
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(c, (l, u))| (l - c).max(c - u).max(0.0))
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }

    /// Distance from `p` to the farthest point of the closure (attained at a
    /// corner).
    pub fn max_corner_dist(&self, p: &Point) -> f64 {
        debug_assert_eq!(p.dim(), self.dim());
        p.coords()
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(c, (l, u))| (c - l).abs().max((c - u).abs()))
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }

    /// Smallest slack between this box and an enclosing `window`, measured
    /// per face; negative when the box pokes out of the window.
    pub fn margin_inside(&self, window: &BoxRegion) -> Result<f64> {
        if window.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: window.dim() });
        }
        let mut margin = f64::INFINITY;
        for i in 0..self.dim() {
            margin = margin.min(self.lower[i] - window.lower[i]);
            margin = margin.min(window.upper[i] - self.upper[i]);
        }
        Ok(margin)
    }

    /// Coefficients `v_0..v_d` of the exact polynomial
    /// `Leb(box + B(0, r)) = sum_k v_k r^k` (Steiner formula, d <= 3).
    pub fn dilated_volume_poly(&self) -> Result<Vec<f64>> {
        let s = self.side_lengths();
        match self.dim() {
            1 => Ok(vec![s[0], 2.0]),
            2 => Ok(vec![s[0] * s[1], 2.0 * (s[0] + s[1]), std::f64::consts::PI]),
            3 => Ok(vec![
                s[0] * s[1] * s[2],
                2.0 * (s[0] * s[1] + s[1] * s[2] + s[0] * s[2]),
                std::f64::consts::PI * (s[0] + s[1] + s[2]),
                4.0 * std::f64::consts::PI / 3.0,
            ]),
            d => Err(Error::UnsupportedDimension(d)),
        }
    }

    /// Exact volume of the dilation `box + B(0, r)`, d <= 3.
    pub fn dilated_volume(&self, r: f64) -> Result<f64> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::InvalidRadius);
        }
        let poly = self.dilated_volume_poly()?;
        Ok(eval_poly(&poly, r))
    }

    /// Volume of the shell `{x : a < dist(x, box) <= b}` for `0 <= a <= b`.
    pub fn shell_volume(&self, a: f64, b: f64) -> Result<f64> {
        if !(a.is_finite() && b.is_finite() && 0.0 <= a && a <= b) {
            return Err(Error::InvalidRadius);
        }
        Ok(self.dilated_volume(b)? - self.dilated_volume(a)?)
    }

    /// Uniform point in the box. Samples each axis as `u - t (u - l)` with
    /// `t` uniform on `[0, 1)`, so the result respects half-open membership.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let coords = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| u - rng.random::<f64>() * (u - l))
            .collect();
        Point { coords }
    }
}

pub(crate) fn eval_poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// A box dilated by a ball: `{x : dist(x, base) <= radius}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DilatedRegion {
    base: BoxRegion,
    radius: f64,
}

impl DilatedRegion {
    pub fn new(base: BoxRegion, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(Error::InvalidRadius);
        }
        Ok(Self { base, radius })
    }

    pub fn base(&self) -> &BoxRegion {
        &self.base
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.dim() == self.dim() && self.base.dist_to(p) <= self.radius
    }

    pub fn volume(&self) -> Result<f64> {
        self.base.dilated_volume(self.radius)
    }
}

/// Index of the unit-thickness shell around `base + B(0, offset)` that
/// contains a point at distance `dist` from `base`, i.e. the `l >= 0` with
/// `offset + l < dist <= offset + l + 1`, or `None` when `dist <= offset`.
pub fn shell_index(dist: f64, offset: f64) -> Option<u64> {
    let t = dist - offset;
    if t <= 0.0 {
        None
    } else {
        Some((t.ceil() - 1.0).max(0.0) as u64)
    }
}
