//! Finite point configurations and windowed variants.
//!
//! A [`Configuration`] is a finite set of pairwise-distinct points sharing a
//! dimension. Point order is preserved as constructed; equality is
//! order-sensitive. A [`WindowedConfiguration`] pairs a configuration with a
//! half-open box containing all of its points.
//!
//! The text format is line oriented: a header `dim=<d> count=<N>` followed by
//! one point per line with space-separated coordinates. Floats are written
//! with Rust's shortest round-trip formatting, so read(write(c)) == c.

use crate::error::{Error, Result};
use crate::geometry::{BoxRegion, Point};
use rand::Rng;
use std::cmp::Ordering;
use std::io::{BufRead, Write};

#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    points: Vec<Point>,
    dim: usize,
}

impl Configuration {
    /// Empty configuration in dimension `dim`.
    pub fn empty(dim: usize) -> Self {
        Self { points: Vec::new(), dim }
    }

    /// Validates shared dimension and pairwise distinctness.
    pub fn from_points(dim: usize, points: Vec<Point>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        for p in &points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
            }
        }
        let c = Self { points, dim };
        match c.find_duplicate() {
            None => Ok(c),
            Some(_) => Err(Error::DuplicatePoint),
        }
    }

    /// Caller guarantees distinctness (restriction of a valid configuration,
    /// disjoint tiles, and similar).
    pub(crate) fn from_points_unchecked(dim: usize, points: Vec<Point>) -> Self {
        debug_assert!(points.iter().all(|p| p.dim() == dim));
        Self { points, dim }
    }

    fn find_duplicate(&self) -> Option<usize> {
        let mut idx: Vec<usize> = (0..self.points.len()).collect();
        idx.sort_by(|&a, &b| cmp_coords(self.points[a].coords(), self.points[b].coords()));
        idx.windows(2)
            .find(|w| self.points[w[0]] == self.points[w[1]])
            .map(|w| w[1])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }

    /// Sub-configuration of the points satisfying `keep`.
    pub fn restrict<F: Fn(&Point) -> bool>(&self, keep: F) -> Configuration {
        let pts = self.points.iter().filter(|p| keep(p)).cloned().collect();
        Self::from_points_unchecked(self.dim, pts)
    }

    pub fn restrict_to(&self, region: &BoxRegion) -> Configuration {
        self.restrict(|p| region.contains(p))
    }

    pub fn restrict_outside(&self, region: &BoxRegion) -> Configuration {
        self.restrict(|p| !region.contains(p))
    }

    pub fn count_in(&self, region: &BoxRegion) -> usize {
        self.points.iter().filter(|p| region.contains(p)).count()
    }

    /// Translate every point by `shift`. Distinctness is revalidated because
    /// rounding can merge points that are closer than one ulp apart.
    pub fn translate(&self, shift: &[f64]) -> Result<Configuration> {
        let pts = self
            .points
            .iter()
            .map(|p| p.translate(shift))
            .collect::<Result<Vec<_>>>()?;
        Self::from_points(self.dim, pts)
    }

    /// Union of two configurations with disjoint supports.
    pub fn disjoint_union(&self, other: &Configuration) -> Result<Configuration> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let mut pts = self.points.clone();
        pts.extend(other.points.iter().cloned());
        let c = Self { points: pts, dim: self.dim };
        match c.find_duplicate() {
            None => Ok(c),
            Some(i) => Err(Error::Overlap(format!("shared point {:?}", c.points[i].coords()))),
        }
    }

    /// Adds one point, failing if it is already present.
    pub fn with_point(&self, p: Point) -> Result<Configuration> {
        if p.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: p.dim() });
        }
        if self.points.contains(&p) {
            return Err(Error::DuplicatePoint);
        }
        let mut pts = self.points.clone();
        pts.push(p);
        Ok(Self { points: pts, dim: self.dim })
    }

    pub fn write_text<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "dim={} count={}", self.dim, self.points.len())?;
        for p in &self.points {
            let line: Vec<String> = p.coords().iter().map(|c| format!("{c}")).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: &mut R) -> Result<Self> {
        let mut header = String::new();
        if input.read_line(&mut header)? == 0 {
            return Err(Error::MalformedFile("missing header".into()));
        }
        let (dim, count) = parse_header(header.trim())?;
        let mut points = Vec::with_capacity(count);
        let mut line = String::new();
        for i in 0..count {
            line.clear();
            if input.read_line(&mut line)? == 0 {
                return Err(Error::MalformedFile(format!(
                    "expected {count} points, found {i}"
                )));
            }
            let coords = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::MalformedFile(format!("bad coordinate {t:?}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            if coords.len() != dim {
                return Err(Error::MalformedFile(format!(
                    "point {} has {} coordinates, expected {dim}",
                    i + 1,
                    coords.len()
                )));
            }
            points.push(Point::new(coords).map_err(|_| {
                Error::MalformedFile(format!("point {} is not finite", i + 1))
            })?);
        }
        Self::from_points(dim, points)
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("write to vec cannot fail");
        String::from_utf8(buf).expect("text format is ascii")
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::read_text(&mut text.as_bytes())
    }
}

fn parse_header(header: &str) -> Result<(usize, usize)> {
    let mut dim = None;
    let mut count = None;
    for token in header.split_whitespace() {
        match token.split_once('=') {
            Some(("dim", v)) => dim = v.parse::<usize>().ok(),
            Some(("count", v)) => count = v.parse::<usize>().ok(),
            _ => return Err(Error::MalformedFile(format!("bad header token {token:?}"))),
        }
    }
    match (dim, count) {
        (Some(d), Some(c)) if d > 0 => Ok((d, c)),
        _ => Err(Error::MalformedFile(format!("bad header {header:?}"))),
    }
}

fn cmp_coords(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y).expect("coordinates are finite") {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// A configuration together with a box containing all of its points.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedConfiguration {
    configuration: Configuration,
    window: BoxRegion,
}

impl WindowedConfiguration {
    pub fn new(configuration: Configuration, window: BoxRegion) -> Result<Self> {
        if configuration.dim() != window.dim() {
            return Err(Error::DimensionMismatch {
                expected: window.dim(),
                got: configuration.dim(),
            });
        }
        if configuration.iter().any(|p| !window.contains(p)) {
            return Err(Error::PointOutsideWindow);
        }
        Ok(Self { configuration, window })
    }

    pub fn configuration(&self) -> &Configuration {
        &self.configuration
    }

    pub fn window(&self) -> &BoxRegion {
        &self.window
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    /// Tiles the window periodically, `reach` tiles away in every direction
    /// along each axis. Tile `m` is the translate by `m .* side_lengths`,
    /// `m in {-reach..reach}^d`; half-open windows make the tiles disjoint.
    /// The result lives on the window scaled by `2 * reach + 1`.
    pub fn periodize(&self, reach: u32) -> WindowedConfiguration {
        let d = self.dim();
        let sides = self.window.side_lengths();
        let r = reach as i64;
        let k = f64::from(reach);
        let big_window = BoxRegion::new(
            self.window.lower().iter().zip(&sides).map(|(l, s)| l - k * s).collect(),
            self.window.upper().iter().zip(&sides).map(|(u, s)| u + k * s).collect(),
        )
        .expect("scaled window is valid");
        let mut points = Vec::with_capacity(self.configuration.len() * (2 * r as usize + 1).pow(d as u32));
        let mut tile = vec![-r; d];
        loop {
            let shift: Vec<f64> = tile.iter().zip(&sides).map(|(m, s)| *m as f64 * s).collect();
            for p in self.configuration.iter() {
                let q = p.translate(&shift).expect("dimensions match");
                points.push(q);
            }
            // Odometer increment over {-r..r}^d.
            let mut axis = 0;
            loop {
                if axis == d {
                    let c = Configuration::from_points_unchecked(d, points);
                    return WindowedConfiguration { configuration: c, window: big_window };
                }
                tile[axis] += 1;
                if tile[axis] <= r {
                    break;
                }
                tile[axis] = -r;
                axis += 1;
            }
        }
    }
}

/// Translate a windowed configuration by a uniform shift from `cell`.
/// Returns the shifted configuration and the shift used.
pub fn random_shift<R: Rng + ?Sized>(
    w: &WindowedConfiguration,
    cell: &BoxRegion,
    rng: &mut R,
) -> Result<(WindowedConfiguration, Vec<f64>)> {
    if cell.dim() != w.dim() {
        return Err(Error::DimensionMismatch { expected: w.dim(), got: cell.dim() });
    }
    let shift = cell.sample_point(rng).coords().to_vec();
    let configuration = w.configuration().translate(&shift)?;
    let window = w.window().translate(&shift)?;
    Ok((WindowedConfiguration { configuration, window }, shift))
}
