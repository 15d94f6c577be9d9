//! Samplers for the finite-volume Gibbs measure: a Poisson proposal
//! generator, an exact rejection sampler driven by the stability constant,
//! and a birth-death-move Metropolis-Hastings chain.
//!
//! The Gibbs density is taken against the unit-intensity Poisson process on
//! the window; activity scaling lives inside the energy. Rejection proposes
//! from intensity `zeta = exp(-A)` and accepts with probability
//! `exp(-(H - A |w|))`, which stability keeps in (0, 1].
//!
//! Determinism: every sample or chain index derives its own RNG stream from
//! the spec seed through a 64-bit mixing permutation, and parallel results
//! are collected in index order, so outputs are identical for any worker
//! count.

use crate::config;
use crate::configuration::{Configuration, WindowedConfiguration};
use crate::energy::EnergyModel;
use crate::error::{Error, Result};
use crate::geometry::{BoxRegion, Point};
use crate::stats;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use std::fs;
use std::path::Path;

/// Stream seed for a chain or sample index: splitmix64 finalizer applied to
/// `seed XOR index`. Documented so external tools can reproduce streams.
pub fn derive_stream_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMethod {
    Rejection,
    Mcmc,
}

impl SampleMethod {
    pub fn name(&self) -> &'static str {
        match self {
            SampleMethod::Rejection => "rejection",
            SampleMethod::Mcmc => "mcmc",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "rejection" => Ok(SampleMethod::Rejection),
            "mcmc" => Ok(SampleMethod::Mcmc),
            other => Err(Error::InvalidSpec(format!("unknown sampler method `{other}`"))),
        }
    }
}

/// Proposal probabilities for the MCMC chain. Birth and death must both be
/// positive or the chain cannot change its point count and misses the
/// target law.
#[derive(Debug, Clone, Copy)]
pub struct ProposalMix {
    pub birth: f64,
    pub death: f64,
    pub relocate: f64,
}

impl Default for ProposalMix {
    fn default() -> Self {
        Self { birth: 0.4, death: 0.4, relocate: 0.2 }
    }
}

impl ProposalMix {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.birth, self.death, self.relocate];
        if parts.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidSpec("proposal probabilities must be nonnegative".into()));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSpec(format!(
                "proposal probabilities must sum to 1, got {sum}"
            )));
        }
        if self.birth <= 0.0 || self.death <= 0.0 {
            return Err(Error::InvalidSpec(
                "birth and death proposal probabilities must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SamplerSpec {
    pub model: EnergyModel,
    pub window: BoxRegion,
    pub method: SampleMethod,
    pub seed: u64,
    /// Retained configurations.
    pub n_samples: u64,
    pub burn_in: u64,
    pub thinning: u64,
    /// Total MCMC proposals; 0 derives `burn_in + n_samples * thinning`.
    pub sweeps: u64,
    pub proposal_mix: ProposalMix,
    /// Rejection attempts allowed per retained sample.
    pub max_attempts: u64,
}

impl SamplerSpec {
    /// Spec with heuristic chain defaults: burn-in of ten expected point
    /// counts, thinning of one expected point count.
    pub fn new(
        model: EnergyModel,
        window: BoxRegion,
        method: SampleMethod,
        seed: u64,
    ) -> Result<Self> {
        if model.dim() != window.dim() {
            return Err(Error::DimensionMismatch { expected: model.dim(), got: window.dim() });
        }
        let leb = window.leb_volume();
        Ok(Self {
            model,
            window,
            method,
            seed,
            n_samples: 1000,
            burn_in: (10.0 * leb).ceil() as u64,
            thinning: (leb.ceil() as u64).max(1),
            sweeps: 0,
            proposal_mix: ProposalMix::default(),
            max_attempts: 1_000_000,
        })
    }

    pub fn resolved_sweeps(&self) -> u64 {
        if self.sweeps == 0 {
            self.burn_in + self.n_samples * self.thinning
        } else {
            self.sweeps
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.model.dim() != self.window.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.model.dim(),
                got: self.window.dim(),
            });
        }
        if self.n_samples == 0 {
            return Err(Error::InvalidSpec("n_samples must be at least 1".into()));
        }
        if self.thinning == 0 {
            return Err(Error::InvalidSpec("thinning must be at least 1".into()));
        }
        if self.max_attempts == 0 {
            return Err(Error::InvalidSpec("max_attempts must be at least 1".into()));
        }
        self.proposal_mix.validate()?;
        let sweeps = self.resolved_sweeps();
        if sweeps <= self.burn_in {
            return Err(Error::InvalidSpec(format!(
                "sweeps ({sweeps}) must exceed burn_in ({})",
                self.burn_in
            )));
        }
        let retained = (sweeps - self.burn_in) / self.thinning;
        if retained != self.n_samples {
            return Err(Error::InvalidSpec(format!(
                "sweeps ({sweeps}) retain {retained} samples but n_samples is {}",
                self.n_samples
            )));
        }
        Ok(())
    }

    pub fn describe_into(&self, out: &mut Vec<(String, String)>) {
        let p = |out: &mut Vec<(String, String)>, k: &str, v: String| {
            out.push((k.to_string(), v));
        };
        p(out, "sampler.method", self.method.name().to_string());
        p(out, "sampler.seed", format!("{}", self.seed));
        p(out, "sampler.n_samples", format!("{}", self.n_samples));
        p(out, "sampler.burn_in", format!("{}", self.burn_in));
        p(out, "sampler.thinning", format!("{}", self.thinning));
        p(out, "sampler.sweeps", format!("{}", self.resolved_sweeps()));
        p(out, "sampler.max_attempts", format!("{}", self.max_attempts));
        p(out, "sampler.proposal_mix.birth", format!("{}", self.proposal_mix.birth));
        p(out, "sampler.proposal_mix.death", format!("{}", self.proposal_mix.death));
        p(out, "sampler.proposal_mix.move", format!("{}", self.proposal_mix.relocate));
        self.model.describe_into("model.", out);
        p(out, "model.zeta", format!("{}", (-self.model.stability_a()).exp()));
        p(out, "window.dim", format!("{}", self.window.dim()));
        p(out, "window.lower", join_floats(self.window.lower()));
        p(out, "window.upper", join_floats(self.window.upper()));
    }
}

pub(crate) fn join_floats(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Default)]
pub struct ChainStats {
    pub birth_proposed: u64,
    pub birth_accepted: u64,
    pub death_proposed: u64,
    pub death_accepted: u64,
    pub move_proposed: u64,
    pub move_accepted: u64,
    /// Total proposals drawn by the rejection sampler.
    pub rejection_attempts: u64,
    /// Effective sample size of the point-count series.
    pub ess: f64,
}

impl ChainStats {
    fn describe_into(&self, out: &mut Vec<(String, String)>) {
        out.push(("stats.birth_proposed".into(), format!("{}", self.birth_proposed)));
        out.push(("stats.birth_accepted".into(), format!("{}", self.birth_accepted)));
        out.push(("stats.death_proposed".into(), format!("{}", self.death_proposed)));
        out.push(("stats.death_accepted".into(), format!("{}", self.death_accepted)));
        out.push(("stats.move_proposed".into(), format!("{}", self.move_proposed)));
        out.push(("stats.move_accepted".into(), format!("{}", self.move_accepted)));
        out.push(("stats.rejection_attempts".into(), format!("{}", self.rejection_attempts)));
        out.push(("stats.ess".into(), format!("{}", self.ess)));
    }
}

#[derive(Debug, Clone)]
pub struct SampleSet {
    configs: Vec<Configuration>,
    spec: SamplerSpec,
    stats: ChainStats,
}

impl SampleSet {
    pub fn configs(&self) -> &[Configuration] {
        &self.configs
    }

    pub fn spec(&self) -> &SamplerSpec {
        &self.spec
    }

    pub fn stats(&self) -> &ChainStats {
        &self.stats
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn counts(&self) -> Vec<u64> {
        self.configs.iter().map(|c| c.len() as u64).collect()
    }

    pub fn windowed(&self, i: usize) -> Result<WindowedConfiguration> {
        WindowedConfiguration::new(self.configs[i].clone(), self.spec.window.clone())
    }

    /// Replaces the sample list and window; used by stationarization.
    pub(crate) fn with_configs(&self, configs: Vec<Configuration>, window: BoxRegion) -> Self {
        let mut spec = self.spec.clone();
        spec.window = window;
        Self { configs, spec, stats: self.stats.clone() }
    }

    /// Assembles a set from externally loaded configurations; chain
    /// statistics are unknown, so the ESS falls back to the sample count.
    pub fn from_parts(spec: SamplerSpec, configs: Vec<Configuration>) -> Result<Self> {
        for c in &configs {
            if c.dim() != spec.window.dim() {
                return Err(Error::DimensionMismatch {
                    expected: spec.window.dim(),
                    got: c.dim(),
                });
            }
            if c.iter().any(|p| !spec.window.contains(p)) {
                return Err(Error::PointOutsideWindow);
            }
        }
        let stats = ChainStats { ess: configs.len() as f64, ..ChainStats::default() };
        Ok(Self { configs, spec, stats })
    }

    pub fn manifest(&self) -> Vec<(String, String)> {
        let mut kv = Vec::new();
        kv.push(("count".to_string(), format!("{}", self.configs.len())));
        kv.push(("library_version".to_string(), crate::VERSION.to_string()));
        self.spec.describe_into(&mut kv);
        self.stats.describe_into(&mut kv);
        kv
    }

    /// Writes `manifest.txt` plus one `config_NNNNN.txt` per sample.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("manifest.txt"), config::format_kv(&self.manifest()))?;
        for (i, c) in self.configs.iter().enumerate() {
            fs::write(dir.join(format!("config_{i:05}.txt")), c.to_text())?;
        }
        Ok(())
    }
}

/// Samples read back from a directory written by [`SampleSet::write_dir`].
#[derive(Debug, Clone)]
pub struct LoadedSamples {
    pub configs: Vec<Configuration>,
    pub window: BoxRegion,
    pub manifest: Vec<(String, String)>,
}

pub fn read_samples_dir(dir: &Path) -> Result<LoadedSamples> {
    let manifest_text = fs::read_to_string(dir.join("manifest.txt"))?;
    let raw = config::RawConfig::parse(&manifest_text)?;
    let count = raw.require_u64("count")?;
    let dim = raw.require_usize("window.dim")?;
    let lower = raw.require_f64_list("window.lower")?;
    let upper = raw.require_f64_list("window.upper")?;
    if lower.len() != dim || upper.len() != dim {
        return Err(Error::MalformedFile("window bounds do not match window.dim".into()));
    }
    let window = BoxRegion::new(lower, upper)?;
    let mut configs = Vec::with_capacity(count as usize);
    for i in 0..count {
        let text = fs::read_to_string(dir.join(format!("config_{i:05}.txt")))?;
        let c = Configuration::from_text(&text)?;
        if c.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: c.dim() });
        }
        configs.push(c);
    }
    let manifest = raw.entries().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    Ok(LoadedSamples { configs, window, manifest })
}

/// Draw from the Poisson process of intensity `zeta` on the window.
pub fn poisson_sample<R: Rng + ?Sized>(
    window: &BoxRegion,
    zeta: f64,
    rng: &mut R,
) -> Result<Configuration> {
    if !(zeta.is_finite() && zeta >= 0.0) {
        return Err(Error::InvalidSpec(format!("Poisson intensity must be >= 0, got {zeta}")));
    }
    let lambda = zeta * window.leb_volume();
    let n = if lambda > 0.0 {
        Poisson::new(lambda)
            .map_err(|e| Error::InvalidSpec(format!("Poisson parameter: {e}")))?
            .sample(rng) as usize
    } else {
        0
    };
    let pts = (0..n).map(|_| window.sample_point(rng)).collect();
    Configuration::from_points(window.dim(), pts)
}

/// Exact draw from the Gibbs measure by rejection: propose from the Poisson
/// process of intensity `exp(-A)` and accept with probability
/// `exp(-(H - A |w|))`.
pub fn gibbs_rejection_sample<R: Rng + ?Sized>(
    m: &EnergyModel,
    window: &BoxRegion,
    rng: &mut R,
    max_attempts: u64,
) -> Result<Configuration> {
    rejection_with_attempts(m, window, rng, max_attempts).map(|(c, _)| c)
}

fn rejection_with_attempts<R: Rng + ?Sized>(
    m: &EnergyModel,
    window: &BoxRegion,
    rng: &mut R,
    max_attempts: u64,
) -> Result<(Configuration, u64)> {
    if m.dim() != window.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), got: window.dim() });
    }
    if max_attempts == 0 {
        return Err(Error::InvalidSpec("max_attempts must be at least 1".into()));
    }
    let a = m.stability_a();
    let zeta = (-a).exp();
    for attempt in 1..=max_attempts {
        let w = poisson_sample(window, zeta, rng)?;
        let h = m.total_energy(&w);
        let log_accept = -(h - a * w.len() as f64);
        debug_assert!(log_accept <= 1e-9 || h == f64::INFINITY, "stability violated: {log_accept}");
        if rng.random::<f64>() < log_accept.exp() {
            return Ok((w, attempt));
        }
    }
    Err(Error::RejectionExhausted(max_attempts))
}

/// Acceptance ratio of a birth proposal adding a point to `n` others.
fn birth_ratio(mix: &ProposalMix, leb: f64, n: usize, insert_cost: f64) -> f64 {
    (mix.death / mix.birth) * leb / (n + 1) as f64 * (-insert_cost).exp()
}

/// Acceptance ratio of a death proposal removing one of `n` points;
/// `reinsert_cost` is the energy the removed point contributed.
fn death_ratio(mix: &ProposalMix, leb: f64, n: usize, reinsert_cost: f64) -> f64 {
    (mix.birth / mix.death) * n as f64 / leb * reinsert_cost.exp()
}

fn remove_point(w: &Configuration, i: usize) -> (Configuration, Point) {
    let mut pts = w.points().to_vec();
    let y = pts.remove(i);
    (Configuration::from_points_unchecked(w.dim(), pts), y)
}

/// Birth-death-move Metropolis-Hastings chain targeting the Gibbs measure.
/// Starts from the empty configuration; retains one configuration every
/// `thinning` proposals after `burn_in`.
pub fn gibbs_mcmc_chain(spec: &SamplerSpec) -> Result<SampleSet> {
    spec.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(derive_stream_seed(spec.seed, 0));
    let leb = spec.window.leb_volume();
    let mix = spec.proposal_mix;
    let sweeps = spec.resolved_sweeps();
    let mut current = Configuration::empty(spec.model.dim());
    let mut stats = ChainStats::default();
    let mut retained = Vec::with_capacity(spec.n_samples as usize);

    for s in 1..=sweeps {
        let which: f64 = rng.random();
        if which < mix.birth {
            stats.birth_proposed += 1;
            let x = spec.window.sample_point(&mut rng);
            let u: f64 = rng.random();
            if !current.points().contains(&x) {
                let h = spec.model.insertion_cost(&current, &x);
                if u < birth_ratio(&mix, leb, current.len(), h) {
                    current = current.with_point(x).expect("proposal point is fresh");
                    stats.birth_accepted += 1;
                }
            }
        } else if which < mix.birth + mix.death {
            stats.death_proposed += 1;
            if !current.is_empty() {
                let i = rng.random_range(0..current.len());
                let u: f64 = rng.random();
                let (rest, y) = remove_point(&current, i);
                let h = spec.model.insertion_cost(&rest, &y);
                if u < death_ratio(&mix, leb, current.len(), h) {
                    current = rest;
                    stats.death_accepted += 1;
                }
            }
        } else {
            stats.move_proposed += 1;
            if !current.is_empty() {
                let i = rng.random_range(0..current.len());
                let x = spec.window.sample_point(&mut rng);
                let u: f64 = rng.random();
                let (rest, y) = remove_point(&current, i);
                if !rest.points().contains(&x) {
                    let dh = spec.model.insertion_cost(&rest, &x)
                        - spec.model.insertion_cost(&rest, &y);
                    if u < (-dh).exp() {
                        current = rest.with_point(x).expect("proposal point is fresh");
                        stats.move_accepted += 1;
                    }
                }
            }
        }
        if s > spec.burn_in && (s - spec.burn_in) % spec.thinning == 0 {
            retained.push(current.clone());
        }
    }

    let counts: Vec<f64> = retained.iter().map(|c| c.len() as f64).collect();
    stats.ess = stats::effective_sample_size(&counts);
    Ok(SampleSet { configs: retained, spec: spec.clone(), stats })
}

fn rejection_set(spec: &SamplerSpec) -> Result<SampleSet> {
    spec.validate()?;
    let results: Result<Vec<(Configuration, u64)>> = (0..spec.n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha12Rng::seed_from_u64(derive_stream_seed(spec.seed, i));
            rejection_with_attempts(&spec.model, &spec.window, &mut rng, spec.max_attempts)
        })
        .collect();
    let results = results?;
    let mut stats = ChainStats {
        rejection_attempts: results.iter().map(|(_, a)| a).sum(),
        ..ChainStats::default()
    };
    stats.ess = results.len() as f64;
    let configs = results.into_iter().map(|(c, _)| c).collect();
    Ok(SampleSet { configs, spec: spec.clone(), stats })
}

/// Runs the method selected by the spec.
pub fn sample(spec: &SamplerSpec) -> Result<SampleSet> {
    match spec.method {
        SampleMethod::Rejection => rejection_set(spec),
        SampleMethod::Mcmc => gibbs_mcmc_chain(spec),
    }
}
