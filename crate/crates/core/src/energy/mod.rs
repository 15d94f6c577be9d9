//! Energy models on finite configurations.
//!
//! Every model carries, besides its energy H, the metadata needed to certify
//! shell truncations of local energies:
//!
//! * `stability_a`: a constant A <= 0 with H(w) >= A |w| for all finite w;
//! * `shell_offset0`: the radius of the innermost region Delta_0 over Delta,
//!   so shell l covers distances `(offset + l, offset + l + 1]` from Delta;
//! * realized shell bounds G^l (`shell_increment_bound`), their envelopes
//!   alpha_l with closed-form tails T(l) = sum_{j>=l} alpha_j (`alpha_tail`),
//!   and an affine psi with E[G^l] <= alpha_l psi(intensity) under any point
//!   process of bounded intensity.
//!
//! Envelope shell volumes are exact via the Steiner formula in d=1; in d=2,3
//! the dilated-shell volume of the cloud model is bounded above by the
//! containing annulus (exact again in d=1). Tails reduce to Hurwitz zeta
//! values (power tails) or polynomial-geometric sums (exponential tails), so
//! no truncated summation enters any certificate.

mod cloud;
mod potential;

pub use cloud::cloud_energy;
pub use potential::{Potential, PotentialForm};

use crate::configuration::Configuration;
use crate::error::{Error, Result};
use crate::geometry::{eval_poly, shell_index, unit_sphere_surface, BoxRegion};
use crate::numeric::{binom, geometric_tail, hurwitz_zeta};

#[derive(Debug, Clone)]
pub enum ModelKind {
    /// H(w) = theta * |w|.
    Activity { theta: f64 },
    /// H(w) = sum over pairs of phi(|x - y|); possibly infinite range.
    Pairwise { potential: Potential },
    /// Pairwise with compactly supported potential; interactions vanish
    /// beyond `range`.
    FiniteRange { potential: Potential, range: f64 },
    /// Each point integrates phi over the union of balls of radius `radius`
    /// around all points.
    Cloud { potential: Potential, radius: f64, quad_tol: f64 },
    /// Sum of component energies.
    Sum { parts: Vec<EnergyModel> },
}

#[derive(Debug, Clone)]
pub struct EnergyModel {
    kind: ModelKind,
    dim: usize,
    stability_a: f64,
    shell_offset0: f64,
}

impl EnergyModel {
    pub fn activity(dim: usize, theta: f64) -> Result<Self> {
        check_dim(dim, 3)?;
        if !theta.is_finite() {
            return Err(Error::InvalidModel(format!("activity theta must be finite, got {theta}")));
        }
        Ok(Self { kind: ModelKind::Activity { theta }, dim, stability_a: theta.min(0.0), shell_offset0: 0.0 })
    }

    /// Pairwise model with a nonnegative potential (stability constant 0).
    /// Signed potentials need [`EnergyModel::pairwise_with_stability`].
    pub fn pairwise(dim: usize, potential: Potential) -> Result<Self> {
        if !potential.is_nonnegative() {
            return Err(Error::InvalidModel(
                "signed pairwise potential needs an explicit stability constant".into(),
            ));
        }
        Self::pairwise_with_stability(dim, potential, 0.0)
    }

    /// Pairwise model with a caller-supplied stability constant A <= 0.
    /// A is declared, not proven; property tests exercise it empirically.
    pub fn pairwise_with_stability(dim: usize, potential: Potential, a: f64) -> Result<Self> {
        check_dim(dim, 3)?;
        check_stability(a)?;
        if !potential.tail_integrable(dim) {
            return Err(Error::InvalidModel(format!(
                "pairwise tail not summable against shell volumes in dimension {dim}: {}",
                potential.describe()
            )));
        }
        let offset = potential.hardcore_radius();
        Ok(Self { kind: ModelKind::Pairwise { potential }, dim, stability_a: a, shell_offset0: offset })
    }

    /// Pairwise model whose potential vanishes beyond a finite range; its
    /// shell bounds are identically zero past `Delta_0`.
    pub fn finite_range(dim: usize, potential: Potential) -> Result<Self> {
        if !potential.is_nonnegative() {
            return Err(Error::InvalidModel(
                "signed finite-range potential needs an explicit stability constant".into(),
            ));
        }
        Self::finite_range_with_stability(dim, potential, 0.0)
    }

    pub fn finite_range_with_stability(dim: usize, potential: Potential, a: f64) -> Result<Self> {
        check_dim(dim, 3)?;
        check_stability(a)?;
        let range = potential.compact_support().ok_or_else(|| {
            Error::InvalidModel(format!(
                "finite-range model needs a compactly supported potential, got {}",
                potential.describe()
            ))
        })?;
        Ok(Self { kind: ModelKind::FiniteRange { potential, range }, dim, stability_a: a, shell_offset0: range })
    }

    /// Cloud model; absolute quadrature error of each energy evaluation is
    /// bounded by `quad_tol * (1 + |w|)`. Supported in d = 1, 2. Stability:
    /// |H(w)| <= |w| * sigma_{d-1} * int r^{d-1} |phi|, so A is minus that
    /// bound for signed potentials and 0 for nonnegative ones.
    pub fn cloud(dim: usize, potential: Potential, radius: f64, quad_tol: f64) -> Result<Self> {
        check_dim(dim, 2)?;
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidModel(format!("cloud radius must be positive, got {radius}")));
        }
        if !(quad_tol.is_finite() && quad_tol > 0.0) {
            return Err(Error::InvalidModel(format!("quad_tol must be positive, got {quad_tol}")));
        }
        if potential.hardcore_radius() > 0.0 {
            return Err(Error::InvalidModel("cloud potential must not have a hard core".into()));
        }
        if !potential.tail_integrable(dim) {
            return Err(Error::InvalidModel(format!(
                "cloud potential not integrable in dimension {dim}: {}",
                potential.describe()
            )));
        }
        let a = if potential.is_nonnegative() {
            0.0
        } else {
            -unit_sphere_surface(dim)? * potential.abs_tail_integral(0.0, dim - 1)?
        };
        Ok(Self {
            kind: ModelKind::Cloud { potential, radius, quad_tol },
            dim,
            stability_a: a,
            shell_offset0: 2.0 * radius,
        })
    }

    /// Sum of models on the same dimension: energies, stability constants,
    /// and envelope data all add, with shells measured from the largest
    /// component offset.
    pub fn sum(parts: Vec<EnergyModel>) -> Result<Self> {
        let dim = match parts.first() {
            Some(m) => m.dim,
            None => return Err(Error::InvalidModel("sum of zero models".into())),
        };
        for p in &parts {
            if p.dim != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.dim });
            }
        }
        let stability_a = parts.iter().map(|p| p.stability_a).sum();
        let shell_offset0 = parts.iter().map(|p| p.shell_offset0).fold(0.0, f64::max);
        Ok(Self { kind: ModelKind::Sum { parts }, dim, stability_a, shell_offset0 })
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The declared stability constant A <= 0 with H >= A |w|.
    pub fn stability_a(&self) -> f64 {
        self.stability_a
    }

    /// Radius of Delta_0 over Delta; shell l spans distances
    /// `(offset + l, offset + l + 1]` from Delta.
    pub fn shell_offset0(&self) -> f64 {
        self.shell_offset0
    }

    /// H(w); +inf is a value (hard-core overlap), never an error.
    pub fn total_energy(&self, w: &Configuration) -> f64 {
        match &self.kind {
            ModelKind::Activity { theta } => theta * w.len() as f64,
            ModelKind::Pairwise { potential } | ModelKind::FiniteRange { potential, .. } => {
                pairwise_energy(potential, w)
            }
            ModelKind::Cloud { potential, radius, quad_tol } => {
                cloud_energy(potential, *radius, w, *quad_tol)
                    .expect("cloud parameters validated at construction")
            }
            ModelKind::Sum { parts } => {
                let mut total = 0.0;
                for p in parts {
                    let h = p.total_energy(w);
                    if h == f64::INFINITY {
                        return f64::INFINITY;
                    }
                    total += h;
                }
                total
            }
        }
    }

    /// H(w + x) - H(w), computed incrementally where the model allows it.
    pub fn insertion_cost(&self, w: &Configuration, x: &crate::geometry::Point) -> f64 {
        match &self.kind {
            ModelKind::Activity { theta } => *theta,
            ModelKind::Pairwise { potential } | ModelKind::FiniteRange { potential, .. } => {
                let mut cost = 0.0;
                for y in w.iter() {
                    let v = potential.eval(x.distance(y));
                    if v == f64::INFINITY {
                        return f64::INFINITY;
                    }
                    cost += v;
                }
                cost
            }
            ModelKind::Cloud { .. } => {
                let with = w.with_point(x.clone()).expect("proposal point is fresh");
                self.total_energy(&with) - self.total_energy(w)
            }
            ModelKind::Sum { parts } => {
                let mut cost = 0.0;
                for p in parts {
                    let c = p.insertion_cost(w, x);
                    if c == f64::INFINITY {
                        return f64::INFINITY;
                    }
                    cost += c;
                }
                cost
            }
        }
    }

    /// Realized shell bound G^l for the points of `w_outside` in shell `l`
    /// around `delta`: the increment of truncated local energies between
    /// levels l and l+1 is bounded by `|w_Delta| * G^l`.
    pub fn shell_increment_bound(
        &self,
        w_outside: &Configuration,
        delta: &BoxRegion,
        l: u64,
    ) -> Result<f64> {
        self.g_realized(self.shell_offset0, w_outside, delta, l)
    }

    fn g_realized(&self, c: f64, w_outside: &Configuration, delta: &BoxRegion, l: u64) -> Result<f64> {
        match &self.kind {
            ModelKind::Activity { .. } | ModelKind::FiniteRange { .. } => Ok(0.0),
            ModelKind::Pairwise { potential } => {
                let count = count_in_shell(w_outside, delta, c, l);
                if count == 0 {
                    return Ok(0.0);
                }
                Ok(count as f64 * potential.tail_eval(c + l as f64).abs())
            }
            ModelKind::Cloud { potential, radius, .. } => {
                let count = count_in_shell(w_outside, delta, c, l) as f64;
                let delta_r = delta.dilated_volume(*radius)?;
                let annulus =
                    delta.shell_volume(c + l as f64 - radius, c + l as f64 + 1.0 + radius)?;
                Ok((count * delta_r + annulus) * potential.tail_eval(c + l as f64 - radius).abs())
            }
            ModelKind::Sum { parts } => {
                let mut g = 0.0;
                for p in parts {
                    g += p.g_realized(c, w_outside, delta, l)?;
                }
                Ok(g)
            }
        }
    }

    /// The envelope term alpha_l for `delta`: a deterministic bound whose
    /// product with psi(intensity) dominates E[G^l].
    pub fn alpha(&self, delta: &BoxRegion, l: u64) -> Result<f64> {
        self.alpha_at(self.shell_offset0, delta, l)
    }

    fn alpha_at(&self, c: f64, delta: &BoxRegion, l: u64) -> Result<f64> {
        match &self.kind {
            ModelKind::Activity { .. } | ModelKind::FiniteRange { .. } => Ok(0.0),
            ModelKind::Pairwise { potential } => {
                let vol = delta.shell_volume(c + l as f64, c + l as f64 + 1.0)?;
                Ok(vol * potential.tail_eval(c + l as f64).abs())
            }
            ModelKind::Cloud { potential, radius, .. } => {
                let annulus =
                    delta.shell_volume(c + l as f64 - radius, c + l as f64 + 1.0 + radius)?;
                Ok(annulus * potential.tail_eval(c + l as f64 - radius).abs())
            }
            ModelKind::Sum { parts } => {
                let mut a = 0.0;
                for p in parts {
                    a += p.alpha_at(c, delta, l)?;
                }
                Ok(a)
            }
        }
    }

    /// Closed-form tail T(l) = sum_{j >= l} alpha_j; finite by construction
    /// (divergent tails are rejected when the model is built).
    pub fn alpha_tail(&self, delta: &BoxRegion, l: u64) -> Result<f64> {
        self.alpha_tail_from(self.shell_offset0, delta, l)
    }

    fn alpha_tail_from(&self, c: f64, delta: &BoxRegion, l: u64) -> Result<f64> {
        match &self.kind {
            ModelKind::Activity { .. } | ModelKind::FiniteRange { .. } => Ok(0.0),
            ModelKind::Pairwise { potential } => {
                let v = delta.dilated_volume_poly()?;
                let poly = dilation_difference_poly(&v, 1.0);
                weighted_phi_tail_sum(potential, &poly, c, l)
            }
            ModelKind::Cloud { potential, radius, .. } => {
                let v = delta.dilated_volume_poly()?;
                let poly = dilation_difference_poly(&v, 1.0 + 2.0 * radius);
                weighted_phi_tail_sum(potential, &poly, c - radius, l)
            }
            ModelKind::Sum { parts } => {
                let mut t = 0.0;
                for p in parts {
                    t += p.alpha_tail_from(c, delta, l)?;
                }
                Ok(t)
            }
        }
    }

    /// Affine psi = (a, b) meaning psi(x) = a + b x, with
    /// E[G^l] <= alpha_l * psi(intensity) for bounded-intensity processes.
    pub fn psi(&self, delta: &BoxRegion) -> Result<(f64, f64)> {
        match &self.kind {
            ModelKind::Activity { .. } | ModelKind::FiniteRange { .. } => Ok((0.0, 0.0)),
            ModelKind::Pairwise { .. } => Ok((0.0, 1.0)),
            ModelKind::Cloud { radius, .. } => Ok((1.0, delta.dilated_volume(*radius)?)),
            ModelKind::Sum { parts } => {
                let mut a = 0.0;
                let mut b = 0.0;
                for p in parts {
                    let (pa, pb) = p.psi(delta)?;
                    a += pa;
                    b += pb;
                }
                Ok((a, b))
            }
        }
    }

    pub fn psi_value(&self, delta: &BoxRegion, intensity_cap: f64) -> Result<f64> {
        let (a, b) = self.psi(delta)?;
        Ok(a + b * intensity_cap)
    }

    /// Identifier of the closed form behind [`EnergyModel::alpha_tail`].
    pub fn alpha_tail_id(&self) -> String {
        match &self.kind {
            ModelKind::Activity { .. } | ModelKind::FiniteRange { .. } => "zero".into(),
            ModelKind::Pairwise { potential } | ModelKind::Cloud { potential, .. } => {
                potential.tail_family().into()
            }
            ModelKind::Sum { parts } => {
                parts.iter().map(|p| p.alpha_tail_id()).collect::<Vec<_>>().join("+")
            }
        }
    }

    /// Key-value description for run manifests. Sum parts are prefixed
    /// `<prefix><index>.`.
    pub fn describe_into(&self, prefix: &str, out: &mut Vec<(String, String)>) {
        let push = |out: &mut Vec<(String, String)>, k: &str, v: String| {
            out.push((format!("{prefix}{k}"), v));
        };
        match &self.kind {
            ModelKind::Activity { theta } => {
                push(out, "kind", "activity".into());
                push(out, "theta", format!("{theta}"));
            }
            ModelKind::Pairwise { potential } => {
                push(out, "kind", "pairwise".into());
                push(out, "potential", potential.describe());
            }
            ModelKind::FiniteRange { potential, range } => {
                push(out, "kind", "finite_range".into());
                push(out, "potential", potential.describe());
                push(out, "range", format!("{range}"));
            }
            ModelKind::Cloud { potential, radius, quad_tol } => {
                push(out, "kind", "cloud".into());
                push(out, "potential", potential.describe());
                push(out, "radius", format!("{radius}"));
                push(out, "quad_tol", format!("{quad_tol}"));
            }
            ModelKind::Sum { parts } => {
                push(out, "kind", "sum".into());
                for (i, p) in parts.iter().enumerate() {
                    p.describe_into(&format!("{prefix}{i}."), out);
                }
            }
        }
        push(out, "stability_a", format!("{}", self.stability_a));
        push(out, "shell_offset0", format!("{}", self.shell_offset0));
        push(out, "alpha_tail", self.alpha_tail_id());
    }
}

/// H = H_a + H_b on the shared dimension.
pub fn sum_models(a: EnergyModel, b: EnergyModel) -> Result<EnergyModel> {
    EnergyModel::sum(vec![a, b])
}

/// Sum of phi over unordered pairs; +inf on hard-core overlap.
pub fn pairwise_energy(phi: &Potential, w: &Configuration) -> f64 {
    let pts = w.points();
    let mut total = 0.0;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let v = phi.eval(pts[i].distance(&pts[j]));
            if v == f64::INFINITY {
                return f64::INFINITY;
            }
            total += v;
        }
    }
    total
}

fn check_dim(dim: usize, max: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    if dim > max {
        return Err(Error::UnsupportedDimension(dim));
    }
    Ok(())
}

fn check_stability(a: f64) -> Result<()> {
    if !(a.is_finite() && a <= 0.0) {
        return Err(Error::InvalidModel(format!("stability constant must satisfy A <= 0, got {a}")));
    }
    Ok(())
}

fn count_in_shell(w: &Configuration, delta: &BoxRegion, c: f64, l: u64) -> usize {
    w.iter().filter(|p| shell_index(delta.dist_to(p), c) == Some(l)).count()
}

/// Coefficients of `P(u) = V(u + a) - V(u)` given the coefficients of the
/// dilated-volume polynomial V. All outputs are nonnegative for a > 0.
fn dilation_difference_poly(v: &[f64], a: f64) -> Vec<f64> {
    let d = v.len() - 1;
    let mut w = vec![0.0; d.max(1)];
    for (m, &vm) in v.iter().enumerate().skip(1) {
        for (i, wi) in w.iter_mut().enumerate().take(m) {
            *wi += vm * binom(m, i) * a.powi((m - i) as i32);
        }
    }
    w
}

/// `sum_{j >= from} P(j + s) |phi_tail(j + s)|` in closed form, where P has
/// nonnegative coefficients `poly` and s >= 0. Power tails become Hurwitz
/// zeta values, exponential tails polynomial-geometric sums, compact
/// supports finite sums.
fn weighted_phi_tail_sum(phi: &Potential, poly: &[f64], s: f64, from: u64) -> Result<f64> {
    match *phi.form() {
        PotentialForm::TruncatedPower { beta, p } => {
            if beta == 0.0 {
                return Ok(0.0);
            }
            let deg = poly.len() - 1;
            if p <= deg as f64 + 1.0 {
                return Err(Error::InvalidModel(format!(
                    "alpha tail diverges: power exponent {p} <= degree + 1 = {}",
                    deg + 1
                )));
            }
            // Below u = 1 the potential is the constant beta.
            let j1 = ((1.0 - s).ceil().max(0.0) as u64).max(from);
            let mut sum = 0.0;
            for j in from..j1 {
                let u = j as f64 + s;
                sum += eval_poly(poly, u) * phi.tail_eval(u).abs();
            }
            for (i, &w) in poly.iter().enumerate() {
                if w != 0.0 {
                    sum += w * beta.abs() * hurwitz_zeta(p - i as f64, j1 as f64 + s)?;
                }
            }
            Ok(sum)
        }
        PotentialForm::Exponential { beta, kappa } => {
            if beta == 0.0 {
                return Ok(0.0);
            }
            let q = (-kappa).exp();
            let mut sum = 0.0;
            for (i, &w) in poly.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let mut shifted = 0.0;
                for k in 0..=i {
                    shifted += binom(i, k) * s.powi((i - k) as i32) * geometric_tail(k, from, q)?;
                }
                sum += w * shifted;
            }
            Ok(sum * beta.abs() * (-kappa * s).exp())
        }
        PotentialForm::Indicator { beta, range } => {
            if beta == 0.0 {
                return Ok(0.0);
            }
            let mut sum = 0.0;
            let mut j = from;
            while j as f64 + s <= range {
                sum += eval_poly(poly, j as f64 + s) * beta.abs();
                j += 1;
            }
            Ok(sum)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use rand_distr::{Distribution, Poisson};

    fn pt(coords: &[f64]) -> Point {
        Point::new(coords.to_vec()).unwrap()
    }

    fn config(dim: usize, pts: &[&[f64]]) -> Configuration {
        Configuration::from_points(dim, pts.iter().map(|c| pt(c)).collect()).unwrap()
    }

    fn poisson_config<R: Rng>(window: &BoxRegion, intensity: f64, rng: &mut R) -> Configuration {
        let lambda = intensity * window.leb_volume();
        let n = if lambda > 0.0 {
            Poisson::new(lambda).unwrap().sample(rng) as usize
        } else {
            0
        };
        let pts = (0..n).map(|_| window.sample_point(rng)).collect();
        Configuration::from_points(window.dim(), pts).unwrap()
    }

    /// Battery of valid models in d=1 used by the property tests below.
    fn model_battery_d1() -> Vec<EnergyModel> {
        let power = Potential::truncated_power(1.0, 2.5).unwrap();
        let expo = Potential::exponential(1.0, 1.0).unwrap();
        let hc_tail = Potential::exponential(1.0, 1.0).unwrap().with_hardcore(0.3).unwrap();
        let indicator = Potential::indicator(0.8, 0.6).unwrap();
        // Signed tail with hard core 0.5: along a line with minimum gap g,
        // each point sees at most 2 sum_{k>=1} |beta| e^{-kappa g k}.
        let (beta, kappa, gap) = (-1.0f64, 1.0f64, 0.5f64);
        let q = (-kappa * gap).exp();
        let signed_a = beta.abs() * q / (1.0 - q);
        let signed =
            Potential::exponential(beta, kappa).unwrap().with_hardcore(gap).unwrap();
        vec![
            EnergyModel::activity(1, 0.7).unwrap(),
            EnergyModel::activity(1, -0.4).unwrap(),
            EnergyModel::pairwise(1, power.clone()).unwrap(),
            EnergyModel::pairwise(1, expo.clone()).unwrap(),
            EnergyModel::pairwise(1, hc_tail).unwrap(),
            EnergyModel::pairwise_with_stability(1, signed, -signed_a).unwrap(),
            EnergyModel::finite_range(1, indicator).unwrap(),
            EnergyModel::cloud(1, expo.clone(), 0.5, 1e-9).unwrap(),
            EnergyModel::cloud(1, Potential::exponential(-0.5, 1.0).unwrap(), 0.5, 1e-9).unwrap(),
            EnergyModel::sum(vec![
                EnergyModel::activity(1, 0.7).unwrap(),
                EnergyModel::pairwise(1, power).unwrap(),
            ])
            .unwrap(),
        ]
    }

    #[test]
    fn activity_energy_is_linear() {
        let m = EnergyModel::activity(1, 0.7).unwrap();
        assert_eq!(m.total_energy(&Configuration::empty(1)), 0.0);
        let w = config(1, &[&[0.0], &[0.5], &[1.2]]);
        assert!((m.total_energy(&w) - 2.1).abs() < 1e-15);
    }

    #[test]
    fn pairwise_hand_values() {
        let expo = Potential::exponential(1.0, 1.0).unwrap();
        let w = config(1, &[&[0.0], &[0.5]]);
        let h = pairwise_energy(&expo, &w);
        assert!((h - (-0.5f64).exp()).abs() < 1e-15);

        let power = Potential::truncated_power(1.0, 2.0).unwrap();
        let w = config(1, &[&[0.0], &[1.0], &[2.0]]);
        assert!((pairwise_energy(&power, &w) - 2.25).abs() < 1e-15);

        assert_eq!(pairwise_energy(&power, &config(1, &[&[3.0]])), 0.0);
        assert_eq!(pairwise_energy(&power, &Configuration::empty(1)), 0.0);
    }

    #[test]
    fn hardcore_overlap_is_infinite_and_hereditary() {
        let phi = Potential::hardcore(0.5).unwrap();
        let m = EnergyModel::finite_range(1, phi).unwrap();
        let w = config(1, &[&[0.0], &[0.3]]);
        assert_eq!(m.total_energy(&w), f64::INFINITY);
        // Removing either point restores finiteness.
        for i in 0..2 {
            let rest = Configuration::from_points(
                1,
                w.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| p.clone()).collect(),
            )
            .unwrap();
            assert!(m.total_energy(&rest).is_finite());
        }
    }

    #[test]
    fn insertion_cost_matches_energy_difference() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let window = BoxRegion::centered_cube(2.0, 1).unwrap();
        for m in model_battery_d1() {
            for _ in 0..20 {
                let w = poisson_config(&window, 1.0, &mut rng);
                let x = window.sample_point(&mut rng);
                if w.points().contains(&x) {
                    continue;
                }
                let h0 = m.total_energy(&w);
                let h1 = m.total_energy(&w.with_point(x.clone()).unwrap());
                let cost = m.insertion_cost(&w, &x);
                if h0.is_finite() && h1.is_finite() {
                    assert!(
                        (h1 - h0 - cost).abs() < 1e-7 * (1.0 + cost.abs()),
                        "incremental cost mismatch: {h1} - {h0} vs {cost}"
                    );
                } else if h0.is_finite() {
                    assert_eq!(cost, f64::INFINITY);
                }
            }
        }
    }

    #[test]
    fn stability_holds_on_poisson_configurations() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let window = BoxRegion::centered_cube(2.0, 1).unwrap();
        for m in model_battery_d1() {
            assert!(m.stability_a() <= 0.0);
            for _ in 0..200 {
                let w = poisson_config(&window, 1.0, &mut rng);
                let h = m.total_energy(&w);
                assert!(
                    h >= m.stability_a() * w.len() as f64 - 1e-9,
                    "stability violated: H={h}, A|w|={}",
                    m.stability_a() * w.len() as f64
                );
            }
        }
    }

    #[test]
    fn hereditarity_removal_sweep() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let window = BoxRegion::centered_cube(2.0, 1).unwrap();
        for m in model_battery_d1() {
            for _ in 0..20 {
                let w = poisson_config(&window, 1.0, &mut rng);
                if !m.total_energy(&w).is_finite() {
                    continue;
                }
                for i in 0..w.len() {
                    let rest = Configuration::from_points(
                        1,
                        w.iter()
                            .enumerate()
                            .filter(|(j, _)| *j != i)
                            .map(|(_, p)| p.clone())
                            .collect(),
                    )
                    .unwrap();
                    assert!(m.total_energy(&rest).is_finite());
                }
            }
        }
    }

    #[test]
    fn stationarity_under_translation() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let window = BoxRegion::centered_cube(2.0, 1).unwrap();
        for m in model_battery_d1() {
            for _ in 0..100 {
                let w = poisson_config(&window, 0.8, &mut rng);
                let u = [4.0 * rng.random::<f64>() - 2.0];
                let t = w.translate(&u).unwrap();
                let (h0, h1) = (m.total_energy(&w), m.total_energy(&t));
                if h0.is_finite() {
                    assert!(
                        (h0 - h1).abs() <= 1e-9 * (1.0 + h0.abs()),
                        "translation changed energy: {h0} vs {h1}"
                    );
                } else {
                    assert_eq!(h1, f64::INFINITY);
                }
            }
        }
    }

    #[test]
    fn cloud_energy_dominated_by_integral_bound() {
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        for dim in [1usize, 2] {
            let window = BoxRegion::centered_cube(1.5, dim).unwrap();
            let phi = Potential::exponential(-0.8, 1.2).unwrap();
            let quad_tol = 1e-7;
            let bound_per_point = unit_sphere_surface(dim).unwrap()
                * phi.abs_tail_integral(0.0, dim - 1).unwrap();
            for _ in 0..20 {
                let w = poisson_config(&window, 0.7, &mut rng);
                let h = cloud_energy(&phi, 0.4, &w, quad_tol).unwrap();
                let slack = quad_tol * (1.0 + w.len() as f64) + 1e-12;
                assert!(
                    h.abs() <= w.len() as f64 * bound_per_point + slack,
                    "dim {dim}: |H|={} exceeds {}",
                    h.abs(),
                    w.len() as f64 * bound_per_point
                );
            }
        }
    }

    #[test]
    fn cloud_approaches_smoothed_pairwise_as_radius_shrinks() {
        // For separated points, H_cloud / (R^d v_d) tends to
        // |w| phi(0) + 2 * pairwise_energy(phi, w).
        let phi = Potential::exponential(1.0, 1.0).unwrap();
        let w = config(1, &[&[0.0], &[0.9], &[2.1], &[3.6]]);
        let limit = w.len() as f64 * phi.eval(0.0) + 2.0 * pairwise_energy(&phi, &w);
        let mut errs = Vec::new();
        for r in [0.1, 0.05, 0.025] {
            let h = cloud_energy(&phi, r, &w, 1e-12).unwrap();
            let scaled = h / (2.0 * r); // v_1 = 2
            errs.push((scaled - limit).abs());
        }
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "errors not decreasing: {errs:?}");
        assert!(errs[2] < 0.05 * limit.abs());
    }

    #[test]
    fn sum_model_adds_energies_and_metadata() {
        let a = EnergyModel::activity(1, 0.5).unwrap();
        let b = EnergyModel::pairwise(1, Potential::exponential(1.0, 2.0).unwrap()).unwrap();
        let s = sum_models(a.clone(), b.clone()).unwrap();
        let w = config(1, &[&[0.0], &[0.4], &[1.1]]);
        assert!(
            (s.total_energy(&w) - a.total_energy(&w) - b.total_energy(&w)).abs() < 1e-12
        );
        assert_eq!(s.stability_a(), a.stability_a() + b.stability_a());
        assert_eq!(s.shell_offset0(), 0.0);

        let zero = EnergyModel::activity(1, 0.0).unwrap();
        let same = sum_models(b.clone(), zero).unwrap();
        assert_eq!(same.total_energy(&w), b.total_energy(&w));
    }

    #[test]
    fn sum_offset_is_component_maximum() {
        let cloud = EnergyModel::cloud(1, Potential::exponential(1.0, 1.0).unwrap(), 0.5, 1e-9)
            .unwrap();
        let hc = EnergyModel::pairwise(
            1,
            Potential::exponential(1.0, 1.0).unwrap().with_hardcore(0.2).unwrap(),
        )
        .unwrap();
        let s = EnergyModel::sum(vec![cloud, hc]).unwrap();
        assert_eq!(s.shell_offset0(), 1.0);
    }

    #[test]
    fn shell_bound_hand_value() {
        // One point at distance 4.5 from Delta = ]0,1]; shell 4 spans (4, 5].
        let m = EnergyModel::pairwise(1, Potential::truncated_power(1.0, 2.0).unwrap()).unwrap();
        let delta = BoxRegion::new(vec![0.0], vec![1.0]).unwrap();
        let outside = config(1, &[&[5.5]]);
        let g = m.shell_increment_bound(&outside, &delta, 4).unwrap();
        assert!((g - 1.0 / 16.0).abs() < 1e-15, "got {g}");
        assert_eq!(m.shell_increment_bound(&outside, &delta, 3).unwrap(), 0.0);
    }

    #[test]
    fn finite_range_shell_bounds_vanish() {
        let m =
            EnergyModel::finite_range(1, Potential::indicator(1.0, 0.7).unwrap()).unwrap();
        let delta = BoxRegion::centered_cube(0.5, 1).unwrap();
        let outside = config(1, &[&[1.5], &[3.0], &[-2.2]]);
        for l in 0..6 {
            assert_eq!(m.shell_increment_bound(&outside, &delta, l).unwrap(), 0.0);
            assert_eq!(m.alpha(&delta, l).unwrap(), 0.0);
        }
        assert_eq!(m.alpha_tail(&delta, 0).unwrap(), 0.0);
    }

    #[test]
    fn alpha_tail_telescopes_against_direct_terms() {
        // T(l) - T(L) must equal the plain sum of alpha_j for j in [l, L);
        // the two sides go through unrelated arithmetic (zeta / geometric
        // closed forms vs direct shell volumes).
        let delta = BoxRegion::new(vec![-0.25, 0.0], vec![0.75, 0.5]).unwrap();
        let delta1 = BoxRegion::new(vec![-0.25], vec![0.75]).unwrap();
        let models: Vec<EnergyModel> = vec![
            EnergyModel::pairwise(2, Potential::truncated_power(1.3, 3.5).unwrap()).unwrap(),
            EnergyModel::pairwise(2, Potential::exponential(0.7, 0.9).unwrap()).unwrap(),
            EnergyModel::pairwise(2, Potential::indicator(1.0, 6.3).unwrap()).unwrap(),
            EnergyModel::cloud(2, Potential::exponential(1.0, 1.1).unwrap(), 0.4, 1e-6).unwrap(),
            EnergyModel::cloud(1, Potential::truncated_power(2.0, 2.5).unwrap(), 0.5, 1e-9)
                .unwrap(),
            EnergyModel::pairwise(
                1,
                Potential::truncated_power(1.0, 2.5).unwrap().with_hardcore(0.4).unwrap(),
            )
            .unwrap(),
        ];
        for m in models {
            let d = if m.dim() == 2 { delta.clone() } else { delta1.clone() };
            for l in [0u64, 1, 5] {
                let big = l + 40;
                let direct: f64 =
                    (l..big).map(|j| m.alpha(&d, j).unwrap()).sum();
                let diff = m.alpha_tail(&d, l).unwrap() - m.alpha_tail(&d, big).unwrap();
                assert!(
                    (diff - direct).abs() <= 1e-10 * (1.0 + direct.abs()),
                    "telescoping mismatch at l={l}: {diff} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn alpha_tail_decreases_to_zero() {
        let delta = BoxRegion::centered_cube(0.5, 1).unwrap();
        let m = EnergyModel::pairwise(1, Potential::truncated_power(1.0, 2.5).unwrap()).unwrap();
        let mut prev = f64::INFINITY;
        for l in 0..30 {
            let t = m.alpha_tail(&delta, l).unwrap();
            assert!(t >= 0.0 && t <= prev);
            prev = t;
        }
        assert!(prev < m.alpha_tail(&delta, 0).unwrap() * 0.2);
    }

    #[test]
    fn alpha_dominates_realized_shell_bound_scaled_by_counts() {
        // For pairwise models G^l = count * sup and alpha_l = volume * sup;
        // with psi = (0,1) the expectation bound is alpha_l * xi. Pathwise,
        // G^l / sup is the shell count, so E[G^l] = E[count] * sup =
        // xi * vol * sup under a Poisson process of intensity xi. Checked by
        // Monte Carlo with 5-sigma slack.
        let mut rng = ChaCha12Rng::seed_from_u64(53);
        let delta = BoxRegion::centered_cube(0.5, 1).unwrap();
        let m = EnergyModel::pairwise(1, Potential::exponential(1.0, 1.0).unwrap()).unwrap();
        let window = BoxRegion::centered_cube(6.0, 1).unwrap();
        let xi = 1.3;
        let l = 1u64;
        let n = 4000;
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for _ in 0..n {
            let w = poisson_config(&window, xi, &mut rng);
            let outside = w.restrict_outside(&delta);
            let g = m.shell_increment_bound(&outside, &delta, l).unwrap();
            acc += g;
            acc2 += g * g;
        }
        let mean = acc / n as f64;
        let var = (acc2 / n as f64 - mean * mean).max(0.0);
        let se = (var / n as f64).sqrt();
        let bound = m.alpha(&delta, l).unwrap() * m.psi_value(&delta, xi).unwrap();
        assert!(
            mean <= bound + 5.0 * se,
            "E[G] estimate {mean} (se {se}) exceeds alpha*psi(xi) = {bound}"
        );
    }

    #[test]
    fn divergent_tails_rejected_at_construction() {
        let slow = Potential::truncated_power(1.0, 1.5).unwrap();
        assert!(EnergyModel::pairwise(2, slow.clone()).is_err());
        assert!(EnergyModel::pairwise(1, slow).is_ok());
        assert!(EnergyModel::cloud(2, Potential::truncated_power(1.0, 2.0).unwrap(), 0.3, 1e-6)
            .is_err());
    }

    #[test]
    fn constructor_validation() {
        assert!(EnergyModel::activity(0, 1.0).is_err());
        assert!(EnergyModel::activity(1, f64::NAN).is_err());
        assert!(EnergyModel::pairwise(4, Potential::exponential(1.0, 1.0).unwrap()).is_err());
        assert!(EnergyModel::pairwise(1, Potential::exponential(-1.0, 1.0).unwrap()).is_err());
        assert!(EnergyModel::pairwise_with_stability(
            1,
            Potential::exponential(-1.0, 1.0).unwrap(),
            0.5
        )
        .is_err());
        assert!(EnergyModel::finite_range(1, Potential::exponential(1.0, 1.0).unwrap()).is_err());
        assert!(EnergyModel::cloud(3, Potential::exponential(1.0, 1.0).unwrap(), 0.5, 1e-6)
            .is_err());
        assert!(EnergyModel::cloud(
            1,
            Potential::exponential(1.0, 1.0).unwrap().with_hardcore(0.1).unwrap(),
            0.5,
            1e-6
        )
        .is_err());
        assert!(EnergyModel::sum(vec![]).is_err());
        assert!(EnergyModel::sum(vec![
            EnergyModel::activity(1, 0.1).unwrap(),
            EnergyModel::activity(2, 0.1).unwrap(),
        ])
        .is_err());
    }

    #[test]
    fn signed_cloud_gets_negative_stability_constant() {
        let m = EnergyModel::cloud(1, Potential::exponential(-2.0, 1.0).unwrap(), 0.5, 1e-9)
            .unwrap();
        // sigma_0 * int |phi| = 2 * 2 = 4.
        assert!((m.stability_a() + 4.0).abs() < 1e-12);
        let nonneg = EnergyModel::cloud(1, Potential::exponential(2.0, 1.0).unwrap(), 0.5, 1e-9)
            .unwrap();
        assert_eq!(nonneg.stability_a(), 0.0);
    }

    #[test]
    fn describe_lists_sum_parts() {
        let s = EnergyModel::sum(vec![
            EnergyModel::activity(1, 0.7).unwrap(),
            EnergyModel::pairwise(1, Potential::truncated_power(1.0, 2.5).unwrap()).unwrap(),
        ])
        .unwrap();
        let mut kv = Vec::new();
        s.describe_into("model.", &mut kv);
        let keys: Vec<&str> = kv.iter().map(|(k, _)| k.as_str()).collect();
        assert!(keys.contains(&"model.kind"));
        assert!(keys.contains(&"model.0.kind"));
        assert!(keys.contains(&"model.1.potential"));
        assert!(keys.contains(&"model.stability_a"));
    }
}
