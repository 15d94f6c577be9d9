//! Flat `key = value` experiment configs.
//!
//! The same format serves sample-directory manifests, so the parser and the
//! writer live together here. Lines hold one `key = value` pair; `#` starts
//! a comment; keys are dotted lowercase identifiers. Duplicate and unknown
//! keys are errors, which catches most typos.

use crate::diagnostics::{
    DiagnosticsSettings, DlrSettings, IntensitySettings, PartitionSettings,
};
use crate::energy::{EnergyModel, Potential};
use crate::error::{Error, Result};
use crate::geometry::BoxRegion;
use crate::sampler::{ProposalMix, SampleMethod, SamplerSpec};
use std::cell::Cell;
use std::path::PathBuf;

const MAX_SUM_PARTS: usize = 16;

#[derive(Debug)]
struct Entry {
    key: String,
    value: String,
    line: usize,
    used: Cell<bool>,
}

/// Parsed key/value pairs with line numbers and used-key tracking.
#[derive(Debug)]
pub struct RawConfig {
    entries: Vec<Entry>,
}

fn parse_line(line: &str, number: usize) -> Result<Option<(String, String)>> {
    let body = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let body = body.trim();
    if body.is_empty() {
        return Ok(None);
    }
    let eq = body.find('=').ok_or_else(|| Error::ConfigParse {
        line: number,
        message: "expected `key = value`".into(),
    })?;
    let key = body[..eq].trim();
    let value = body[eq + 1..].trim();
    if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.') {
        return Err(Error::ConfigParse {
            line: number,
            message: format!("invalid key `{key}`"),
        });
    }
    if value.is_empty() {
        return Err(Error::ConfigParse { line: number, message: format!("empty value for `{key}`") });
    }
    Ok(Some((key.to_string(), value.to_string())))
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let (raw, issues) = Self::parse_lenient(text);
        match issues.into_iter().next() {
            Some(first) => Err(Error::ConfigInvalid(first)),
            None => Ok(raw),
        }
    }

    /// Collects every malformed line instead of stopping at the first.
    pub fn parse_lenient(text: &str) -> (Self, Vec<String>) {
        let mut entries: Vec<Entry> = Vec::new();
        let mut issues = Vec::new();
        for (i, line) in text.lines().enumerate() {
            match parse_line(line, i + 1) {
                Ok(None) => {}
                Ok(Some((key, value))) => {
                    if let Some(prev) = entries.iter().find(|e| e.key == key) {
                        issues.push(format!(
                            "line {}: duplicate key `{key}` (first set on line {})",
                            i + 1,
                            prev.line
                        ));
                    } else {
                        entries.push(Entry { key, value, line: i + 1, used: Cell::new(false) });
                    }
                }
                Err(e) => issues.push(e.to_string()),
            }
        }
        (Self { entries }, issues)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|e| (e.key.as_str(), e.value.as_str()))
    }

    fn find(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key).inspect(|e| e.used.set(true))
    }

    pub fn has(&self, key: &str) -> bool {
        self.find(key).is_some()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.find(key).map(|e| e.value.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::ConfigInvalid(format!("missing key `{key}`")))
    }

    fn parsed<T: std::str::FromStr>(&self, e: &Entry, what: &str) -> Result<T> {
        e.value.parse().map_err(|_| Error::ConfigParse {
            line: e.line,
            message: format!("`{}` is not {what}: `{}`", e.key, e.value),
        })
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.find(key) {
            None => Ok(None),
            Some(e) => {
                let v: f64 = self.parsed(e, "a number")?;
                if !v.is_finite() {
                    return Err(Error::ConfigParse {
                        line: e.line,
                        message: format!("`{key}` must be finite"),
                    });
                }
                Ok(Some(v))
            }
        }
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        self.require(key)?;
        Ok(self.get_f64(key)?.expect("key present"))
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        match self.find(key) {
            None => Ok(None),
            Some(e) => Ok(Some(self.parsed(e, "a nonnegative integer")?)),
        }
    }

    pub fn require_u64(&self, key: &str) -> Result<u64> {
        self.require(key)?;
        Ok(self.get_u64(key)?.expect("key present"))
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        match self.find(key) {
            None => Ok(None),
            Some(e) => Ok(Some(self.parsed(e, "a nonnegative integer")?)),
        }
    }

    pub fn require_usize(&self, key: &str) -> Result<usize> {
        self.require(key)?;
        Ok(self.get_usize(key)?.expect("key present"))
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>> {
        match self.find(key) {
            None => Ok(None),
            Some(e) => match e.value.as_str() {
                "true" => Ok(Some(true)),
                "false" => Ok(Some(false)),
                other => Err(Error::ConfigParse {
                    line: e.line,
                    message: format!("`{key}` must be true or false, got `{other}`"),
                }),
            },
        }
    }

    pub fn get_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.find(key) {
            None => Ok(None),
            Some(e) => {
                let mut out = Vec::new();
                for tok in e.value.split_whitespace() {
                    let v: f64 = tok.parse().map_err(|_| Error::ConfigParse {
                        line: e.line,
                        message: format!("`{key}` holds a bad number `{tok}`"),
                    })?;
                    if !v.is_finite() {
                        return Err(Error::ConfigParse {
                            line: e.line,
                            message: format!("`{key}` must hold finite numbers"),
                        });
                    }
                    out.push(v);
                }
                Ok(Some(out))
            }
        }
    }

    pub fn require_f64_list(&self, key: &str) -> Result<Vec<f64>> {
        self.require(key)?;
        Ok(self.get_f64_list(key)?.expect("key present"))
    }

    /// Keys never read by any lookup, with their line numbers.
    pub fn unused_keys(&self) -> Vec<(usize, &str)> {
        self.entries
            .iter()
            .filter(|e| !e.used.get())
            .map(|e| (e.line, e.key.as_str()))
            .collect()
    }
}

/// Renders pairs as sorted `key = value` lines; inverse of [`RawConfig::parse`].
pub fn format_kv(pairs: &[(String, String)]) -> String {
    let mut sorted: Vec<&(String, String)> = pairs.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out = String::new();
    for (k, v) in sorted {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(v);
        out.push('\n');
    }
    out
}

fn potential_from_raw(raw: &RawConfig, prefix: &str) -> Result<Potential> {
    let key = |s: &str| format!("{prefix}{s}");
    let form = raw.require(&key("potential"))?.to_string();
    let potential = match form.as_str() {
        "power" => {
            Potential::truncated_power(raw.require_f64(&key("beta"))?, raw.require_f64(&key("p"))?)?
        }
        "exponential" => Potential::exponential(
            raw.require_f64(&key("beta"))?,
            raw.require_f64(&key("kappa"))?,
        )?,
        "indicator" => {
            Potential::indicator(raw.require_f64(&key("beta"))?, raw.require_f64(&key("range"))?)?
        }
        "hardcore" => Potential::hardcore(raw.require_f64(&key("range"))?)?,
        other => {
            return Err(Error::ConfigInvalid(format!(
                "`{prefix}potential` must be power, exponential, indicator, or hardcore; got `{other}`"
            )))
        }
    };
    match raw.get_f64(&key("hardcore"))? {
        Some(r) if form == "hardcore" => Err(Error::ConfigInvalid(format!(
            "`{prefix}hardcore = {r}` conflicts with `{prefix}potential = hardcore`; use `{prefix}range`"
        ))),
        Some(r) => potential.with_hardcore(r),
        None => Ok(potential),
    }
}

/// Builds the model under `prefix` (e.g. `model.`); sums recurse one level
/// into `model.<i>.`.
pub fn model_from_raw(raw: &RawConfig, prefix: &str, dim: usize) -> Result<EnergyModel> {
    let key = |s: &str| format!("{prefix}{s}");
    match raw.require(&key("kind"))? {
        "activity" => EnergyModel::activity(dim, raw.require_f64(&key("theta"))?),
        "pairwise" => {
            let potential = potential_from_raw(raw, prefix)?;
            match raw.get_f64(&key("stability_a"))? {
                Some(a) => EnergyModel::pairwise_with_stability(dim, potential, a),
                None => EnergyModel::pairwise(dim, potential),
            }
        }
        "finite_range" => {
            let potential = potential_from_raw(raw, prefix)?;
            match raw.get_f64(&key("stability_a"))? {
                Some(a) => EnergyModel::finite_range_with_stability(dim, potential, a),
                None => EnergyModel::finite_range(dim, potential),
            }
        }
        "cloud" => {
            let potential = potential_from_raw(raw, prefix)?;
            let radius = raw.require_f64(&key("radius"))?;
            let quad_tol = raw.get_f64(&key("quad_tol"))?.unwrap_or(1e-6);
            EnergyModel::cloud(dim, potential, radius, quad_tol)
        }
        "sum" => {
            if prefix != "model." {
                return Err(Error::ConfigInvalid("sums of sums are not supported".into()));
            }
            let parts_n = raw.require_usize(&key("parts"))?;
            if parts_n == 0 || parts_n > MAX_SUM_PARTS {
                return Err(Error::ConfigInvalid(format!(
                    "`model.parts` must be between 1 and {MAX_SUM_PARTS}, got {parts_n}"
                )));
            }
            let mut parts = Vec::with_capacity(parts_n);
            for i in 0..parts_n {
                parts.push(model_from_raw(raw, &format!("{prefix}{i}."), dim)?);
            }
            EnergyModel::sum(parts)
        }
        other => Err(Error::ConfigInvalid(format!(
            "`{prefix}kind` must be activity, pairwise, finite_range, cloud, or sum; got `{other}`"
        ))),
    }
}

pub fn window_from_raw(raw: &RawConfig, dim: usize) -> Result<BoxRegion> {
    let n = raw.get_f64("window.n")?;
    let lower = raw.get_f64_list("window.lower")?;
    let upper = raw.get_f64_list("window.upper")?;
    match (n, lower, upper) {
        (Some(n), None, None) => {
            if n <= 0.0 {
                return Err(Error::ConfigInvalid(format!("`window.n` must be positive, got {n}")));
            }
            BoxRegion::centered_cube(n, dim)
        }
        (None, Some(lo), Some(up)) => {
            if lo.len() != dim || up.len() != dim {
                return Err(Error::ConfigInvalid(format!(
                    "window bounds need {dim} coordinates, got {} and {}",
                    lo.len(),
                    up.len()
                )));
            }
            BoxRegion::new(lo, up)
        }
        (Some(_), _, _) => Err(Error::ConfigInvalid(
            "give `window.n` or `window.lower`/`window.upper`, not both".into(),
        )),
        _ => Err(Error::ConfigInvalid(
            "window needs `window.n` or both `window.lower` and `window.upper`".into(),
        )),
    }
}

fn sampler_from_raw(
    raw: &RawConfig,
    model: EnergyModel,
    window: BoxRegion,
    seed: u64,
) -> Result<SamplerSpec> {
    let method = SampleMethod::parse(raw.require("sampler.method")?)?;
    let mut spec = SamplerSpec::new(model, window, method, seed)?;
    if let Some(b) = raw.get_u64("sampler.burn_in")? {
        spec.burn_in = b;
    }
    if let Some(t) = raw.get_u64("sampler.thinning")? {
        spec.thinning = t;
    }
    if let Some(m) = raw.get_u64("sampler.max_attempts")? {
        spec.max_attempts = m;
    }
    let mut mix = ProposalMix::default();
    if let Some(p) = raw.get_f64("sampler.proposal_mix.birth")? {
        mix.birth = p;
    }
    if let Some(p) = raw.get_f64("sampler.proposal_mix.death")? {
        mix.death = p;
    }
    if let Some(p) = raw.get_f64("sampler.proposal_mix.move")? {
        mix.relocate = p;
    }
    spec.proposal_mix = mix;
    let n_samples = raw.get_u64("sampler.n_samples")?;
    let sweeps = raw.get_u64("sampler.sweeps")?;
    match (n_samples, sweeps) {
        (Some(n), s) => {
            spec.n_samples = n;
            spec.sweeps = s.unwrap_or(0);
        }
        (None, Some(s)) => {
            spec.sweeps = s;
            if spec.thinning == 0 {
                return Err(Error::InvalidSpec("thinning must be at least 1".into()));
            }
            spec.n_samples = s.saturating_sub(spec.burn_in) / spec.thinning;
        }
        (None, None) => {
            return Err(Error::ConfigInvalid(
                "sampler needs `sampler.n_samples` or `sampler.sweeps`".into(),
            ))
        }
    }
    spec.validate()?;
    Ok(spec)
}

fn diagnostics_from_raw(raw: &RawConfig, window: &BoxRegion) -> Result<DiagnosticsSettings> {
    let intensity = IntensitySettings {
        enabled: raw.get_bool("diagnostics.intensity")?.unwrap_or(true),
        subwindow_n: raw.get_f64("diagnostics.intensity.subwindow_n")?,
    };
    if let Some(n) = intensity.subwindow_n {
        if window.centered_subbox(n).is_err() {
            return Err(Error::ConfigInvalid(format!(
                "intensity subwindow of half-width {n} does not fit inside the window"
            )));
        }
    }
    let dlr = DlrSettings {
        enabled: raw.get_bool("diagnostics.dlr")?.unwrap_or(false),
        inner_draws: raw.get_u64("diagnostics.dlr.inner_draws")?.unwrap_or(200),
        boxes: raw.get_usize("diagnostics.dlr.boxes")?.unwrap_or(4),
        half_width: raw.get_f64("diagnostics.dlr.half_width")?.unwrap_or(0.5),
        count_cap: raw.get_u64("diagnostics.dlr.count_cap")?.unwrap_or(20),
        pair_cap: raw.get_u64("diagnostics.dlr.pair_cap")?.unwrap_or(50),
        nn_radius: raw.get_f64("diagnostics.dlr.nn_radius")?.unwrap_or(0.2),
    };
    if dlr.enabled {
        if dlr.inner_draws < 2 {
            return Err(Error::ConfigInvalid("`diagnostics.dlr.inner_draws` must be at least 2".into()));
        }
        if dlr.boxes == 0 {
            return Err(Error::ConfigInvalid("`diagnostics.dlr.boxes` must be at least 1".into()));
        }
        if dlr.half_width <= 0.0 {
            return Err(Error::ConfigInvalid(format!(
                "`diagnostics.dlr.half_width` must be positive, got {}",
                dlr.half_width
            )));
        }
        if dlr.nn_radius <= 0.0 {
            return Err(Error::ConfigInvalid(format!(
                "`diagnostics.dlr.nn_radius` must be positive, got {}",
                dlr.nn_radius
            )));
        }
    }
    let partition = PartitionSettings {
        enabled: raw.get_bool("diagnostics.partition")?.unwrap_or(false),
        exteriors: raw.get_u64("diagnostics.partition.exteriors")?.unwrap_or(20),
        draws: raw.get_u64("diagnostics.partition.draws")?.unwrap_or(2000),
        half_width: raw.get_f64("diagnostics.partition.half_width")?.unwrap_or(0.5),
        xi_cap: raw.get_f64("diagnostics.partition.xi_cap")?.unwrap_or(1.0),
    };
    if partition.enabled {
        if partition.exteriors == 0 {
            return Err(Error::ConfigInvalid("`diagnostics.partition.exteriors` must be at least 1".into()));
        }
        if partition.draws < 2 {
            return Err(Error::ConfigInvalid("`diagnostics.partition.draws` must be at least 2".into()));
        }
        if partition.half_width <= 0.0 {
            return Err(Error::ConfigInvalid(format!(
                "`diagnostics.partition.half_width` must be positive, got {}",
                partition.half_width
            )));
        }
        if !(partition.xi_cap >= 0.0) {
            return Err(Error::ConfigInvalid(format!(
                "`diagnostics.partition.xi_cap` must be nonnegative, got {}",
                partition.xi_cap
            )));
        }
    }
    let samples_dir = raw.get("diagnostics.samples_dir").map(PathBuf::from);
    Ok(DiagnosticsSettings { intensity, dlr, partition, samples_dir })
}

/// A full experiment: model, window, sampler, and requested diagnostics.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub dimension: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads; 0 lets the thread pool pick.
    pub threads: usize,
    pub window: BoxRegion,
    pub model: EnergyModel,
    pub sampler: SamplerSpec,
    pub diagnostics: DiagnosticsSettings,
}

impl ExperimentConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        let raw = RawConfig::parse(text)?;
        let config = Self::build(&raw)?;
        let unused = raw.unused_keys();
        if !unused.is_empty() {
            let list: Vec<String> =
                unused.iter().map(|(l, k)| format!("`{k}` (line {l})")).collect();
            return Err(Error::ConfigInvalid(format!("unknown keys: {}", list.join(", "))));
        }
        Ok(config)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    fn build(raw: &RawConfig) -> Result<Self> {
        let dimension = raw.require_usize("dimension")?;
        if !(1..=3).contains(&dimension) {
            return Err(Error::ConfigInvalid(format!(
                "`dimension` must be 1, 2, or 3; got {dimension}"
            )));
        }
        let seed = raw.get_u64("seed")?.unwrap_or(0);
        let output_dir = PathBuf::from(raw.get("output_dir").unwrap_or("out"));
        let threads = raw.get_usize("threads")?.unwrap_or(1);
        let window = window_from_raw(raw, dimension)?;
        let model = model_from_raw(raw, "model.", dimension)?;
        let sampler = sampler_from_raw(raw, model.clone(), window.clone(), seed)?;
        let diagnostics = diagnostics_from_raw(raw, &window)?;
        Ok(Self { dimension, seed, output_dir, threads, window, model, sampler, diagnostics })
    }
}

/// Lists every violation found in the config text; empty means valid.
pub fn validate_text(text: &str) -> Vec<String> {
    let (raw, mut issues) = RawConfig::parse_lenient(text);

    let dimension = match raw.require_usize("dimension") {
        Ok(d) if (1..=3).contains(&d) => Some(d),
        Ok(d) => {
            issues.push(format!("`dimension` must be 1, 2, or 3; got {d}"));
            None
        }
        Err(e) => {
            issues.push(e.to_string());
            None
        }
    };
    let seed = match raw.get_u64("seed") {
        Ok(s) => s.unwrap_or(0),
        Err(e) => {
            issues.push(e.to_string());
            0
        }
    };
    raw.get("output_dir");
    if let Err(e) = raw.get_usize("threads") {
        issues.push(e.to_string());
    }

    let window = dimension.and_then(|d| match window_from_raw(&raw, d) {
        Ok(w) => Some(w),
        Err(e) => {
            issues.push(e.to_string());
            None
        }
    });
    let model = dimension.and_then(|d| match model_from_raw(&raw, "model.", d) {
        Ok(m) => Some(m),
        Err(e) => {
            issues.push(e.to_string());
            None
        }
    });
    if let (Some(m), Some(w)) = (model, window.clone()) {
        if let Err(e) = sampler_from_raw(&raw, m, w, seed) {
            issues.push(e.to_string());
        }
    }
    if let Some(w) = window {
        if let Err(e) = diagnostics_from_raw(&raw, &w) {
            issues.push(e.to_string());
        }
    }

    // Unknown-key analysis is only trustworthy when every section consumed
    // its keys, i.e. when nothing else went wrong.
    if issues.is_empty() {
        for (line, key) in raw.unused_keys() {
            issues.push(format!("unknown key `{key}` (line {line})"));
        }
    }
    issues
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
# zero interaction on a unit window
dimension = 1
seed = 7
window.n = 0.5
model.kind = activity
model.theta = 0
sampler.method = rejection
sampler.n_samples = 100
";

    #[test]
    fn minimal_config_builds() {
        let c = ExperimentConfig::from_text(MINIMAL).unwrap();
        assert_eq!(c.dimension, 1);
        assert_eq!(c.seed, 7);
        assert_eq!(c.sampler.n_samples, 100);
        assert_eq!(c.window.leb_volume(), 1.0);
        assert!(c.diagnostics.intensity.enabled);
        assert!(!c.diagnostics.dlr.enabled);
        assert!(validate_text(MINIMAL).is_empty());
    }

    #[test]
    fn comments_blanks_and_inline_comments_are_ignored() {
        let text = "a.b = 1 # trailing\n\n# whole line\n  c = 2\n";
        let raw = RawConfig::parse(text).unwrap();
        assert_eq!(raw.get("a.b"), Some("1"));
        assert_eq!(raw.get("c"), Some("2"));
    }

    #[test]
    fn duplicate_keys_are_rejected_with_both_lines() {
        let err = RawConfig::parse("a = 1\na = 2\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("duplicate key `a`"), "{msg}");
        assert!(msg.contains("line 1"), "{msg}");
    }

    #[test]
    fn missing_equals_is_a_parse_error() {
        assert!(RawConfig::parse("just words\n").is_err());
    }

    #[test]
    fn format_kv_sorts_and_round_trips() {
        let pairs = vec![
            ("b.two".to_string(), "2".to_string()),
            ("a.one".to_string(), "1 -3.5".to_string()),
        ];
        let text = format_kv(&pairs);
        assert_eq!(text, "a.one = 1 -3.5\nb.two = 2\n");
        let raw = RawConfig::parse(&text).unwrap();
        assert_eq!(raw.get_f64_list("a.one").unwrap().unwrap(), vec![1.0, -3.5]);
    }

    #[test]
    fn unknown_keys_are_reported() {
        let text = format!("{MINIMAL}model.thta = 2\n");
        let err = ExperimentConfig::from_text(&text).unwrap_err();
        assert!(err.to_string().contains("model.thta"), "{err}");
        let issues = validate_text(&text);
        assert_eq!(issues.len(), 1);
        assert!(issues[0].contains("model.thta"));
    }

    #[test]
    fn explicit_window_bounds_build() {
        let text = "\
dimension = 2
window.lower = -1 -2
window.upper = 1 0
model.kind = activity
model.theta = 0.5
sampler.method = mcmc
sampler.n_samples = 10
";
        let c = ExperimentConfig::from_text(text).unwrap();
        assert_eq!(c.window.lower(), &[-1.0, -2.0]);
        assert_eq!(c.window.leb_volume(), 4.0);
    }

    #[test]
    fn pairwise_and_sum_models_build() {
        let text = "\
dimension = 1
window.n = 1
model.kind = sum
model.parts = 2
model.0.kind = activity
model.0.theta = 0.3
model.1.kind = pairwise
model.1.potential = power
model.1.beta = 1.0
model.1.p = 3.0
model.1.hardcore = 0.1
sampler.method = rejection
sampler.n_samples = 5
";
        let c = ExperimentConfig::from_text(text).unwrap();
        assert_eq!(c.model.shell_offset0(), 0.1);
        assert_eq!(c.model.stability_a(), 0.0);
    }

    #[test]
    fn nonintegrable_power_tail_is_flagged() {
        let text = "\
dimension = 2
window.n = 1
model.kind = pairwise
model.potential = power
model.beta = 1.0
model.p = 1.5
sampler.method = rejection
sampler.n_samples = 5
";
        let err = ExperimentConfig::from_text(text).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let issues = validate_text(text);
        assert_eq!(issues.len(), 1);
        assert!(issues[0].contains("not summable"), "{}", issues[0]);
    }

    #[test]
    fn bad_proposal_mix_is_flagged() {
        let text = "\
dimension = 1
window.n = 1
model.kind = activity
model.theta = 0
sampler.method = mcmc
sampler.n_samples = 10
sampler.proposal_mix.birth = 0.4
sampler.proposal_mix.death = 0.4
sampler.proposal_mix.move = 0.1
";
        let err = ExperimentConfig::from_text(text).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let issues = validate_text(text);
        assert_eq!(issues.len(), 1);
        assert!(issues[0].contains("sum to 1"), "{}", issues[0]);
    }

    #[test]
    fn negative_cloud_radius_is_flagged() {
        let text = "\
dimension = 1
window.n = 1
model.kind = cloud
model.potential = exponential
model.beta = 0.5
model.kappa = 1.0
model.radius = -0.3
sampler.method = rejection
sampler.n_samples = 5
";
        let issues = validate_text(text);
        assert_eq!(issues.len(), 1);
        assert!(issues[0].contains("radius"), "{}", issues[0]);
    }

    #[test]
    fn sweeps_only_derives_n_samples() {
        let text = "\
dimension = 1
window.n = 0.5
model.kind = activity
model.theta = 0
sampler.method = mcmc
sampler.burn_in = 10
sampler.thinning = 2
sampler.sweeps = 30
";
        let c = ExperimentConfig::from_text(text).unwrap();
        assert_eq!(c.sampler.n_samples, 10);
        assert_eq!(c.sampler.resolved_sweeps(), 30);
    }

    #[test]
    fn inconsistent_sweeps_and_n_samples_conflict() {
        let text = "\
dimension = 1
window.n = 0.5
model.kind = activity
model.theta = 0
sampler.method = mcmc
sampler.burn_in = 10
sampler.thinning = 2
sampler.sweeps = 30
sampler.n_samples = 7
";
        let err = ExperimentConfig::from_text(text).unwrap_err();
        assert!(err.to_string().contains("retain"), "{err}");
    }

    #[test]
    fn diagnostics_keys_build_and_validate() {
        let text = format!(
            "{MINIMAL}\
diagnostics.dlr = true
diagnostics.dlr.inner_draws = 50
diagnostics.dlr.boxes = 2
diagnostics.dlr.half_width = 0.1
diagnostics.partition = true
diagnostics.partition.draws = 100
"
        );
        let c = ExperimentConfig::from_text(&text).unwrap();
        assert!(c.diagnostics.dlr.enabled);
        assert_eq!(c.diagnostics.dlr.inner_draws, 50);
        assert_eq!(c.diagnostics.dlr.count_cap, 20);
        assert!(c.diagnostics.partition.enabled);
        assert_eq!(c.diagnostics.partition.draws, 100);
        let bad = format!("{MINIMAL}diagnostics.dlr = true\ndiagnostics.dlr.half_width = 0\n");
        let issues = validate_text(&bad);
        assert_eq!(issues.len(), 1);
        assert!(issues[0].contains("half_width"), "{}", issues[0]);
    }

    #[test]
    fn oversized_intensity_subwindow_is_flagged() {
        let text = format!("{MINIMAL}diagnostics.intensity.subwindow_n = 2\n");
        let issues = validate_text(&text);
        assert_eq!(issues.len(), 1);
        assert!(issues[0].contains("subwindow"), "{}", issues[0]);
    }

    #[test]
    fn lenient_parse_collects_every_bad_line() {
        let text = "dimension = 1\nbroken line\nalso broken\n";
        let (_, issues) = RawConfig::parse_lenient(text);
        assert_eq!(issues.len(), 2);
    }
}
