//! Cloud interaction energy: each point integrates the potential over the
//! union of balls around all points, `H(w) = sum_x int_{L^R(w)} phi(|x-y|) dy`
//! with `L^R(w) = union of B(x, R)`.
//!
//! d=1 is exact: the union of intervals is merged and integrated through the
//! closed-form antiderivative of phi. d=2 reduces each point's integral to a
//! single radial integral by measuring the angle the circle of radius r
//! around the point subtends inside the union of balls (exact arc-union
//! arithmetic), then integrates radially by adaptive Simpson. A 2D grid
//! cannot reach tight tolerances here: its error is first order in the cell
//! size near the union's boundary, while the polar reduction confines all
//! numerical error to a piecewise-smooth 1D integrand.

use crate::configuration::Configuration;
use crate::energy::potential::Potential;
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Total cloud energy. Supported in d = 1 and d = 2; the quadrature error is
/// at most `quad_tol * (1 + |w|)` (zero in d = 1, where integration is exact).
pub fn cloud_energy(
    phi: &Potential,
    radius: f64,
    w: &Configuration,
    quad_tol: f64,
) -> Result<f64> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidModel(format!("cloud radius must be positive, got {radius}")));
    }
    if !(quad_tol.is_finite() && quad_tol > 0.0) {
        return Err(Error::InvalidModel(format!("quad_tol must be positive, got {quad_tol}")));
    }
    if phi.hardcore_radius() > 0.0 {
        return Err(Error::InvalidModel(
            "cloud interaction needs an integrable potential; hard cores are not".into(),
        ));
    }
    if w.is_empty() {
        return Ok(0.0);
    }
    match w.dim() {
        1 => Ok(cloud_energy_d1(phi, radius, w)),
        2 => Ok(cloud_energy_d2(phi, radius, w, quad_tol)),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

fn cloud_energy_d1(phi: &Potential, radius: f64, w: &Configuration) -> f64 {
    let mut xs: Vec<f64> = w.iter().map(|p| p.coord(0)).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("coordinates are finite"));
    let mut intervals: Vec<(f64, f64)> = Vec::with_capacity(xs.len());
    for &x in &xs {
        let (a, b) = (x - radius, x + radius);
        match intervals.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => intervals.push((a, b)),
        }
    }
    // Signed integral of phi(|x - y|) over [a, b] via F(t) = int_0^t phi.
    let f = |t: f64| phi.integral_0_to(t);
    let mut total = 0.0;
    for &x in &xs {
        for &(a, b) in &intervals {
            total += if x <= a {
                f(b - x) - f(a - x)
            } else if x >= b {
                f(x - a) - f(x - b)
            } else {
                f(x - a) + f(b - x)
            };
        }
    }
    total
}

fn cloud_energy_d2(phi: &Potential, radius: f64, w: &Configuration, quad_tol: f64) -> f64 {
    let centers: Vec<(f64, f64)> = w.iter().map(|p| (p.coord(0), p.coord(1))).collect();
    let n = centers.len();
    let budget = quad_tol * (1.0 + n as f64) / n as f64;
    centers
        .iter()
        .map(|&(x0, x1)| point_integral_d2(phi, radius, &centers, (x0, x1), budget))
        .sum()
}

/// `int_{L^R} phi(|x - y|) dy` for one point, via
/// `int_0^inf phi(r) * r * angle(r) dr` with `angle(r)` the arc measure of
/// the circle of radius `r` around `x` inside the union of balls.
fn point_integral_d2(
    phi: &Potential,
    radius: f64,
    centers: &[(f64, f64)],
    x: (f64, f64),
    budget: f64,
) -> f64 {
    let dists: Vec<f64> = centers
        .iter()
        .map(|&(c0, c1)| ((c0 - x.0).powi(2) + (c1 - x.1).powi(2)).sqrt())
        .collect();
    let r_min = dists.iter().fold(f64::INFINITY, |a, &d| a.min(d - radius)).max(0.0);
    let r_max = dists.iter().fold(0.0f64, |a, &d| a.max(d + radius));

    let integrand = |r: f64| -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        phi.tail_eval(r) * r * arc_measure(r, radius, centers, &dists, x)
    };

    // Integrand kinks: arcs open or close where r crosses |rho - R| or
    // rho + R, and phi itself may kink. Splitting there keeps each Simpson
    // segment smooth.
    let mut cuts = vec![r_min, r_max];
    for &rho in &dists {
        for c in [(rho - radius).abs(), rho + radius] {
            if c > r_min && c < r_max {
                cuts.push(c);
            }
        }
    }
    for c in phi_kinks(phi) {
        if c > r_min && c < r_max {
            cuts.push(c);
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let segments = cuts.len() - 1;
    let seg_budget = budget / segments.max(1) as f64;
    let mut total = 0.0;
    for pair in cuts.windows(2) {
        total += adaptive_simpson(&integrand, pair[0], pair[1], seg_budget);
    }
    total
}

fn phi_kinks(phi: &Potential) -> Vec<f64> {
    use crate::energy::potential::PotentialForm::*;
    match *phi.form() {
        TruncatedPower { .. } => vec![1.0],
        Exponential { .. } => vec![],
        Indicator { range, .. } => vec![range],
    }
}

/// Arc measure (in radians, within [0, 2*pi]) of the circle of radius `r`
/// around `x` that lies inside the union of balls `B(c_i, ball_r)`.
fn arc_measure(r: f64, ball_r: f64, centers: &[(f64, f64)], dists: &[f64], x: (f64, f64)) -> f64 {
    debug_assert!(r > 0.0);
    let mut arcs: Vec<(f64, f64)> = Vec::new();
    for (&(c0, c1), &rho) in centers.iter().zip(dists) {
        if rho == 0.0 {
            if r <= ball_r {
                return 2.0 * PI;
            }
            continue;
        }
        let t = (rho * rho + r * r - ball_r * ball_r) / (2.0 * r * rho);
        if t <= -1.0 {
            return 2.0 * PI;
        }
        if t >= 1.0 {
            continue;
        }
        let alpha = t.acos();
        let theta = (c1 - x.1).atan2(c0 - x.0);
        let (lo, hi) = (theta - alpha, theta + alpha);
        // Normalize to [0, 2*pi), splitting wrapped arcs.
        let wrap = |v: f64| v.rem_euclid(2.0 * PI);
        if hi - lo >= 2.0 * PI {
            return 2.0 * PI;
        }
        let (lo, hi) = (wrap(lo), wrap(lo) + (hi - lo));
        if hi <= 2.0 * PI {
            arcs.push((lo, hi));
        } else {
            arcs.push((lo, 2.0 * PI));
            arcs.push((0.0, hi - 2.0 * PI));
        }
    }
    arcs.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mut measure = 0.0;
    let mut current: Option<(f64, f64)> = None;
    for (lo, hi) in arcs {
        match current {
            Some((clo, chi)) if lo <= chi => current = Some((clo, chi.max(hi))),
            Some((clo, chi)) => {
                measure += chi - clo;
                current = Some((lo, hi));
            }
            None => current = Some((lo, hi)),
        }
    }
    if let Some((clo, chi)) = current {
        measure += chi - clo;
    }
    measure.min(2.0 * PI)
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if b - a <= 0.0 {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let s = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, s, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    s: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let sl = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let sr = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let err = sl + sr - s;
    if depth == 0 || err.abs() <= 15.0 * tol {
        sl + sr + err / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, sl, 0.5 * tol, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, sr, 0.5 * tol, depth - 1)
    }
}
