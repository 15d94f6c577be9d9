//! Statistical verification on sampled data: intensity estimates against
//! the stability cap, partition-function bounds, the DLR residual test, and
//! sample stationarization.
//!
//! Every Monte-Carlo routine takes an explicit seed and derives per-item
//! streams, so reports are reproducible for any worker count.

use crate::configuration::{random_shift, Configuration, WindowedConfiguration};
use crate::energy::EnergyModel;
use crate::error::{Error, Result};
use crate::geometry::{shell_index, BoxRegion};
use crate::sampler::{derive_stream_seed, poisson_sample, SampleSet};
use crate::stats;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use std::path::PathBuf;

#[derive(Debug, Clone)]
pub struct IntensitySettings {
    pub enabled: bool,
    /// Half-width of a centered estimation subwindow; whole window if unset.
    pub subwindow_n: Option<f64>,
}

impl Default for IntensitySettings {
    fn default() -> Self {
        Self { enabled: true, subwindow_n: None }
    }
}

#[derive(Debug, Clone)]
pub struct DlrSettings {
    pub enabled: bool,
    pub inner_draws: u64,
    pub boxes: usize,
    pub half_width: f64,
    pub count_cap: u64,
    pub pair_cap: u64,
    pub nn_radius: f64,
}

impl Default for DlrSettings {
    fn default() -> Self {
        Self {
            enabled: false,
            inner_draws: 200,
            boxes: 4,
            half_width: 0.5,
            count_cap: 20,
            pair_cap: 50,
            nn_radius: 0.2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PartitionSettings {
    pub enabled: bool,
    pub exteriors: u64,
    pub draws: u64,
    pub half_width: f64,
    pub xi_cap: f64,
}

impl Default for PartitionSettings {
    fn default() -> Self {
        Self { enabled: false, exteriors: 20, draws: 2000, half_width: 0.5, xi_cap: 1.0 }
    }
}

#[derive(Debug, Clone, Default)]
pub struct DiagnosticsSettings {
    pub intensity: IntensitySettings,
    pub dlr: DlrSettings,
    pub partition: PartitionSettings,
    /// Sample directory consumed by the `dlr` command when no fresh run is
    /// wanted.
    pub samples_dir: Option<PathBuf>,
}

/// Estimated point intensity against the cap implied by stability.
#[derive(Debug, Clone)]
pub struct IntensityReport {
    pub estimate: f64,
    pub std_error: f64,
    /// `exp(-A) * e + H(empty)`.
    pub bound: f64,
    pub satisfied: bool,
}

/// Mean count per unit volume over the sample, with a batch-means standard
/// error; `satisfied` checks the estimate against the stability cap.
pub fn estimate_intensity(s: &SampleSet, subwindow: &BoxRegion) -> Result<IntensityReport> {
    let window = &s.spec().window;
    if subwindow.dim() != window.dim() {
        return Err(Error::DimensionMismatch { expected: window.dim(), got: subwindow.dim() });
    }
    if !window.contains_box(subwindow) {
        return Err(Error::InvalidDiagnostic(
            "intensity subwindow must lie inside the sample window".into(),
        ));
    }
    if s.len() < 2 {
        return Err(Error::EmptySampleSet);
    }
    let leb = subwindow.leb_volume();
    let series: Vec<f64> =
        s.configs().iter().map(|c| c.count_in(subwindow) as f64 / leb).collect();
    let estimate = stats::mean(&series);
    let std_error = stats::batch_means_se(&series);
    let m = &s.spec().model;
    let empty = m.total_energy(&Configuration::empty(m.dim()));
    let bound = (-m.stability_a()).exp() * std::f64::consts::E + empty;
    Ok(IntensityReport { estimate, std_error, bound, satisfied: estimate <= bound + 3.0 * std_error })
}

/// Bracket and Monte-Carlo estimate of the conditional partition function
/// Z(delta | exterior).
#[derive(Debug, Clone)]
pub struct PartitionReport {
    pub lower: f64,
    pub upper: f64,
    pub estimate: f64,
    pub std_error: f64,
}

/// Certified bound on the full tail sum of shell increments seen from
/// `delta`: realized shells up to the exterior's extent, envelope with the
/// capped intensity beyond.
fn certified_c0(
    m: &EnergyModel,
    delta: &BoxRegion,
    w_outside: &Configuration,
    xi_cap: f64,
) -> Result<f64> {
    let offset = m.shell_offset0();
    let extent = w_outside
        .iter()
        .filter_map(|p| shell_index(delta.dist_to(p), offset))
        .max()
        .map_or(0, |l| l + 1);
    let mut c0 = 0.0;
    for l in 0..extent {
        c0 += m.shell_increment_bound(w_outside, delta, l)?;
    }
    Ok(c0 + m.psi_value(delta, xi_cap)? * m.alpha_tail(delta, extent)?)
}

/// Brackets Z(delta | w_outside) between the vacancy probability
/// `exp(-Leb(delta))` and the stability/envelope bound, and estimates it as
/// the mean of `exp(-H_delta)` over unit-Poisson fillings of `delta`.
pub fn partition_bounds(
    m: &EnergyModel,
    delta: &BoxRegion,
    w_outside: &Configuration,
    xi_cap: f64,
    draws: u64,
    seed: u64,
) -> Result<PartitionReport> {
    if m.dim() != delta.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), got: delta.dim() });
    }
    if w_outside.dim() != delta.dim() {
        return Err(Error::DimensionMismatch { expected: delta.dim(), got: w_outside.dim() });
    }
    if w_outside.iter().any(|p| delta.contains(p)) {
        return Err(Error::InvalidDiagnostic(
            "exterior configuration has points inside the region".into(),
        ));
    }
    if !(xi_cap.is_finite() && xi_cap >= 0.0) {
        return Err(Error::InvalidDiagnostic(format!("xi_cap must be >= 0, got {xi_cap}")));
    }
    if draws < 2 {
        return Err(Error::InvalidDiagnostic("partition estimate needs at least 2 draws".into()));
    }
    let h_env = m.total_energy(w_outside);
    if !h_env.is_finite() {
        return Err(Error::InfiniteEnvironment);
    }
    let ring = w_outside.restrict(|p| delta.dist_to(p) <= m.shell_offset0());
    let h_ring = m.total_energy(&ring);
    if !h_ring.is_finite() {
        return Err(Error::InfiniteEnvironment);
    }
    let a = m.stability_a();
    let leb = delta.leb_volume();
    let lower = (-leb).exp();
    let c0 = certified_c0(m, delta, w_outside, xi_cap)?;
    let upper = (-a * ring.len() as f64 + h_ring + leb * ((c0 - a).exp() - 1.0)).exp();

    let mut rng = ChaCha12Rng::seed_from_u64(derive_stream_seed(seed, 0));
    let mut weights = Vec::with_capacity(draws as usize);
    for _ in 0..draws {
        let filling = poisson_sample(delta, 1.0, &mut rng)?;
        let joined = filling.disjoint_union(w_outside).expect("exterior avoids the region");
        let h_delta = m.total_energy(&joined) - h_env;
        weights.push((-h_delta).exp());
    }
    let estimate = stats::mean(&weights);
    let std_error = stats::std_error_iid(&weights);
    Ok(PartitionReport { lower, upper, estimate, std_error })
}

/// Bounded local observables evaluated on the points inside a region.
#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    One,
    /// Point count, capped for boundedness.
    Count { cap: u64 },
    /// Indicator of an empty region.
    Vacancy,
    /// Number of point pairs in the region, capped.
    PairCount { cap: u64 },
    /// Indicator of some pair at distance <= radius.
    NearestNeighbor { radius: f64 },
}

impl TestFunction {
    pub fn name(&self) -> String {
        match self {
            TestFunction::One => "one".into(),
            TestFunction::Count { cap } => format!("count_cap{cap}"),
            TestFunction::Vacancy => "vacancy".into(),
            TestFunction::PairCount { cap } => format!("pairs_cap{cap}"),
            TestFunction::NearestNeighbor { radius } => format!("nn_r{radius}"),
        }
    }

    /// Evaluate on the restriction of a configuration to the region.
    pub fn eval(&self, w_delta: &Configuration) -> f64 {
        let n = w_delta.len() as u64;
        match self {
            TestFunction::One => 1.0,
            TestFunction::Count { cap } => n.min(*cap) as f64,
            TestFunction::Vacancy => {
                if n == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::PairCount { cap } => (n * n.saturating_sub(1) / 2).min(*cap) as f64,
            TestFunction::NearestNeighbor { radius } => {
                let pts = w_delta.points();
                for i in 0..pts.len() {
                    for j in (i + 1)..pts.len() {
                        if pts[i].distance(&pts[j]) <= *radius {
                            return 1.0;
                        }
                    }
                }
                0.0
            }
        }
    }
}

/// The named battery: constant, capped count, vacancy, capped pair count,
/// nearest-neighbor indicator.
pub fn standard_test_functions(settings: &DlrSettings) -> Vec<TestFunction> {
    vec![
        TestFunction::One,
        TestFunction::Count { cap: settings.count_cap },
        TestFunction::Vacancy,
        TestFunction::PairCount { cap: settings.pair_cap },
        TestFunction::NearestNeighbor { radius: settings.nn_radius },
    ]
}

/// Cubes of the given half-width with centers evenly spaced along the
/// window diagonal, inset so each keeps at least `margin` to the boundary.
pub fn battery_boxes(
    window: &BoxRegion,
    count: usize,
    half_width: f64,
    margin: f64,
) -> Result<Vec<BoxRegion>> {
    if count == 0 {
        return Err(Error::InvalidDiagnostic("box count must be at least 1".into()));
    }
    if !(half_width > 0.0) || !(margin >= 0.0) {
        return Err(Error::InvalidDiagnostic(
            "box half-width must be positive and margin nonnegative".into(),
        ));
    }
    let d = window.dim();
    let inset = half_width + margin;
    let spans: Vec<f64> = window.side_lengths().iter().map(|s| s - 2.0 * inset).collect();
    if spans.iter().any(|s| *s < 0.0) {
        return Err(Error::InvalidDiagnostic(format!(
            "window too small for boxes of half-width {half_width} with margin {margin}"
        )));
    }
    let mut boxes = Vec::with_capacity(count);
    for k in 0..count {
        let t = if count == 1 { 0.5 } else { k as f64 / (count - 1) as f64 };
        let center: Vec<f64> =
            (0..d).map(|i| window.lower()[i] + inset + t * spans[i]).collect();
        boxes.push(BoxRegion::new(
            center.iter().map(|c| c - half_width).collect(),
            center.iter().map(|c| c + half_width).collect(),
        )?);
    }
    Ok(boxes)
}

/// One row of the DLR residual test.
#[derive(Debug, Clone)]
pub struct DlrReport {
    pub test_function: String,
    pub lhs: f64,
    /// Standard error of `lhs`, floored by the model-implied
    /// sqrt(Var(f)/n): when a rare event never occurs among the outer
    /// samples the empirical error is 0, which is an underestimate, not
    /// evidence of precision.
    pub lhs_se: f64,
    pub rhs: f64,
    pub rhs_se: f64,
    pub residual: f64,
    pub z_score: f64,
}

pub const DLR_CSV_HEADER: &str = "delta,f,lhs,lhs_se,rhs,rhs_se,residual,z_score";

impl DlrReport {
    pub fn csv_row(&self, delta_label: &str) -> String {
        format!(
            "{delta_label},{},{},{},{},{},{},{}",
            self.test_function, self.lhs, self.lhs_se, self.rhs, self.rhs_se, self.residual,
            self.z_score
        )
    }
}

struct OuterResult {
    f_direct: Vec<f64>,
    f_resampled: Vec<f64>,
    /// Conditional second moments E[f^2 | exterior]; they feed a variance
    /// floor, so the raw self-normalized ratio is accurate enough.
    f_second: Vec<f64>,
}

/// Inner self-normalized estimate of E[f(w'_delta) | w outside delta] for
/// every test function, with a per-outer jackknife bias correction.
fn resample_one(
    m: &EnergyModel,
    w: &Configuration,
    delta: &BoxRegion,
    fs: &[TestFunction],
    inner_draws: u64,
    rng: &mut ChaCha12Rng,
) -> Result<OuterResult> {
    let outside = w.restrict_outside(delta);
    let h_env = m.total_energy(&outside);
    if !h_env.is_finite() {
        return Err(Error::InfiniteEnvironment);
    }
    let inside = w.restrict_to(delta);
    let f_direct: Vec<f64> = fs.iter().map(|f| f.eval(&inside)).collect();

    let n = inner_draws as usize;
    let mut weights = Vec::with_capacity(n);
    let mut values: Vec<Vec<f64>> = vec![Vec::with_capacity(n); fs.len()];
    for _ in 0..n {
        let filling = poisson_sample(delta, 1.0, rng)?;
        let joined = filling.disjoint_union(&outside).expect("exterior avoids the region");
        let h_delta = m.total_energy(&joined) - h_env;
        weights.push((-h_delta).exp());
        for (t, f) in fs.iter().enumerate() {
            values[t].push(f.eval(&filling));
        }
    }
    let den: f64 = weights.iter().sum();
    if !(den > 0.0) || !den.is_finite() {
        return Err(Error::DegenerateNormalization);
    }

    let mut f_resampled = Vec::with_capacity(fs.len());
    let mut f_second = Vec::with_capacity(fs.len());
    for vals in &values {
        let num: f64 = vals.iter().zip(&weights).map(|(v, w)| v * w).sum();
        let ratio = num / den;
        f_second.push(vals.iter().zip(&weights).map(|(v, w)| v * v * w).sum::<f64>() / den);
        // Leave-one-out mean; skipped when some weight carries the whole
        // normalization, where the correction is unstable.
        let mut loo_sum = 0.0;
        let mut stable = n >= 2;
        for (v, w) in vals.iter().zip(&weights) {
            let d = den - w;
            if !(d > 0.0) {
                stable = false;
                break;
            }
            loo_sum += (num - v * w) / d;
        }
        let corrected = if stable {
            n as f64 * ratio - (n - 1) as f64 * (loo_sum / n as f64)
        } else {
            ratio
        };
        f_resampled.push(corrected);
    }
    Ok(OuterResult { f_direct, f_resampled, f_second })
}

/// DLR residual reports for a battery of test functions sharing one region:
/// compares the sample mean of f with the mean of its conditional
/// resampling inside `delta`, which agree exactly under the sampled law.
pub fn dlr_battery(
    m: &EnergyModel,
    s: &SampleSet,
    delta: &BoxRegion,
    fs: &[TestFunction],
    inner_draws: u64,
    seed: u64,
) -> Result<Vec<DlrReport>> {
    let window = &s.spec().window;
    if m.dim() != window.dim() || delta.dim() != window.dim() {
        return Err(Error::DimensionMismatch { expected: window.dim(), got: delta.dim() });
    }
    let margin = delta.margin_inside(window)?;
    if margin < m.shell_offset0() {
        return Err(Error::MarginViolation { required: m.shell_offset0(), available: margin });
    }
    if s.len() < 2 {
        return Err(Error::EmptySampleSet);
    }
    if inner_draws < 2 {
        return Err(Error::InvalidDiagnostic("inner_draws must be at least 2".into()));
    }
    if fs.is_empty() {
        return Err(Error::InvalidDiagnostic("empty test-function battery".into()));
    }

    let outers: Result<Vec<OuterResult>> = s
        .configs()
        .par_iter()
        .enumerate()
        .map(|(j, w)| {
            let mut rng = ChaCha12Rng::seed_from_u64(derive_stream_seed(seed, j as u64));
            resample_one(m, w, delta, fs, inner_draws, &mut rng)
        })
        .collect();
    let outers = outers?;

    let mut reports = Vec::with_capacity(fs.len());
    for (t, f) in fs.iter().enumerate() {
        let direct: Vec<f64> = outers.iter().map(|o| o.f_direct[t]).collect();
        let resampled: Vec<f64> = outers.iter().map(|o| o.f_resampled[t]).collect();
        let lhs = stats::mean(&direct);
        let rhs = stats::mean(&resampled);
        let rhs_se = stats::batch_means_se(&resampled);
        // Null-implied Var(f) = E[E[f^2|ext]] - E[f]^2. It floors the outer
        // error: a rare event with zero observed occurrences has empirical
        // error 0 but true error near sqrt(P(event)/n).
        let second = stats::mean(&outers.iter().map(|o| o.f_second[t]).collect::<Vec<_>>());
        let floor_se = ((second - rhs * rhs).max(0.0) / direct.len() as f64).sqrt();
        let lhs_se = stats::batch_means_se(&direct).max(floor_se);
        let residual = lhs - rhs;
        let pooled = lhs_se.hypot(rhs_se);
        let z_score = if residual == 0.0 { 0.0 } else { residual / pooled };
        reports.push(DlrReport {
            test_function: f.name(),
            lhs,
            lhs_se,
            rhs,
            rhs_se,
            residual,
            z_score,
        });
    }
    Ok(reports)
}

pub fn dlr_residual(
    m: &EnergyModel,
    s: &SampleSet,
    delta: &BoxRegion,
    f: &TestFunction,
    inner_draws: u64,
    seed: u64,
) -> Result<DlrReport> {
    let mut reports = dlr_battery(m, s, delta, std::slice::from_ref(f), inner_draws, seed)?;
    Ok(reports.remove(0))
}

/// Periodizes each sample `k` tiles out, shifts it by an independent
/// uniform vector from the original window, and restricts to the central
/// region covered under every shift. `k = 0` returns the samples untouched.
pub fn stationarize_samples<R: Rng + ?Sized>(
    s: &SampleSet,
    k: u32,
    rng: &mut R,
) -> Result<SampleSet> {
    if k == 0 {
        return Ok(s.clone());
    }
    let window = s.spec().window.clone();
    let sides = window.side_lengths();
    let reach: Vec<f64> = sides.iter().map(|side| side * f64::from(k)).collect();
    let out = BoxRegion::new(
        window
            .lower()
            .iter()
            .zip(window.upper())
            .zip(&reach)
            .map(|((l, u), r)| l + u - r)
            .collect(),
        window
            .lower()
            .iter()
            .zip(window.upper())
            .zip(&reach)
            .map(|((l, u), r)| l + u + r)
            .collect(),
    )?;
    let mut configs = Vec::with_capacity(s.len());
    for c in s.configs() {
        let windowed = WindowedConfiguration::new(c.clone(), window.clone())?;
        let tiled = windowed.periodize(k);
        let (shifted, _) = random_shift(&tiled, &window, rng)?;
        configs.push(shifted.configuration().restrict_to(&out));
    }
    Ok(s.with_configs(configs, out))
}

/// [`stationarize_samples`] with a fresh ChaCha stream derived from `seed`.
pub fn stationarize_seeded(s: &SampleSet, k: u32, seed: u64) -> Result<SampleSet> {
    let mut rng = ChaCha12Rng::seed_from_u64(derive_stream_seed(seed, 0));
    stationarize_samples(s, k, &mut rng)
}
