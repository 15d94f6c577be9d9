//! Python bindings over the core crate: energy models, exact and MCMC
//! sampling, certified local energies, and the statistical diagnostics.
//!
//! Wrappers hold owned core values and clone on the way in and out; the
//! bound API stays small and functional, matching the Rust surface.

use gibbs_core::diagnostics::{
    self, DlrReport, IntensityReport, PartitionReport, TestFunction,
};
use gibbs_core::local_energy as le;
use gibbs_core::sampler::{self, SampleMethod, SamplerSpec};
use gibbs_core::{BoxRegion, Configuration, EnergyModel, Point, Potential, WindowedConfiguration};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

/// Stochastic failures surface as RuntimeError, everything else (bad
/// parameters, dimension clashes, malformed input) as ValueError.
fn err(e: gibbs_core::Error) -> PyErr {
    use gibbs_core::Error::*;
    match e {
        RejectionExhausted(_) | DegenerateNormalization | InfiniteEnvironment => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn point(coords: Vec<f64>) -> PyResult<Point> {
    Point::new(coords).map_err(err)
}

/// Python-literal booleans for reprs.
fn py_bool(b: bool) -> &'static str {
    if b {
        "True"
    } else {
        "False"
    }
}

#[pyclass(name = "Potential")]
struct PyPotential {
    inner: Potential,
}

#[pymethods]
impl PyPotential {
    #[staticmethod]
    fn truncated_power(beta: f64, p: f64) -> PyResult<Self> {
        Ok(Self { inner: Potential::truncated_power(beta, p).map_err(err)? })
    }

    #[staticmethod]
    fn exponential(beta: f64, kappa: f64) -> PyResult<Self> {
        Ok(Self { inner: Potential::exponential(beta, kappa).map_err(err)? })
    }

    #[staticmethod]
    fn indicator(beta: f64, range: f64) -> PyResult<Self> {
        Ok(Self { inner: Potential::indicator(beta, range).map_err(err)? })
    }

    #[staticmethod]
    fn hardcore(radius: f64) -> PyResult<Self> {
        Ok(Self { inner: Potential::hardcore(radius).map_err(err)? })
    }

    /// Same potential with a hard core of the given radius added.
    fn with_hardcore(&self, radius: f64) -> PyResult<Self> {
        Ok(Self { inner: self.inner.clone().with_hardcore(radius).map_err(err)? })
    }

    fn eval(&self, r: f64) -> f64 {
        self.inner.eval(r)
    }

    #[getter]
    fn hardcore_radius(&self) -> f64 {
        self.inner.hardcore_radius()
    }

    fn __repr__(&self) -> String {
        format!("Potential({})", self.inner.describe())
    }
}

#[pyclass(name = "Box")]
struct PyBox {
    inner: BoxRegion,
}

#[pymethods]
impl PyBox {
    #[new]
    fn new(lower: Vec<f64>, upper: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: BoxRegion::new(lower, upper).map_err(err)? })
    }

    /// The cube ]-n, n]^dim.
    #[staticmethod]
    fn centered_cube(n: f64, dim: usize) -> PyResult<Self> {
        Ok(Self { inner: BoxRegion::centered_cube(n, dim).map_err(err)? })
    }

    /// Cube of the given half-width around this box's midpoint.
    fn centered_subbox(&self, half_width: f64) -> PyResult<Self> {
        Ok(Self { inner: self.inner.centered_subbox(half_width).map_err(err)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn lower(&self) -> Vec<f64> {
        self.inner.lower().to_vec()
    }

    #[getter]
    fn upper(&self) -> Vec<f64> {
        self.inner.upper().to_vec()
    }

    fn leb_volume(&self) -> f64 {
        self.inner.leb_volume()
    }

    fn contains(&self, coords: Vec<f64>) -> PyResult<bool> {
        Ok(self.inner.contains(&point(coords)?))
    }

    fn dist_to(&self, coords: Vec<f64>) -> PyResult<f64> {
        Ok(self.inner.dist_to(&point(coords)?))
    }

    fn __repr__(&self) -> String {
        format!("Box({:?}, {:?})", self.inner.lower(), self.inner.upper())
    }
}

#[pyclass(name = "Configuration")]
struct PyConfiguration {
    inner: Configuration,
}

#[pymethods]
impl PyConfiguration {
    #[new]
    fn new(dim: usize, points: Vec<Vec<f64>>) -> PyResult<Self> {
        let pts = points.into_iter().map(point).collect::<PyResult<Vec<_>>>()?;
        Ok(Self { inner: Configuration::from_points(dim, pts).map_err(err)? })
    }

    #[staticmethod]
    fn empty(dim: usize) -> Self {
        Self { inner: Configuration::empty(dim) }
    }

    fn points(&self) -> Vec<Vec<f64>> {
        self.inner.points().iter().map(|p| p.coords().to_vec()).collect()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn count_in(&self, region: &PyBox) -> usize {
        self.inner.count_in(&region.inner)
    }

    fn restrict_to(&self, region: &PyBox) -> Self {
        Self { inner: self.inner.restrict_to(&region.inner) }
    }

    fn restrict_outside(&self, region: &PyBox) -> Self {
        Self { inner: self.inner.restrict_outside(&region.inner) }
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self { inner: Configuration::from_text(text).map_err(err)? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Configuration(dim={}, n={})", self.inner.dim(), self.inner.len())
    }
}

#[pyclass(name = "EnergyModel", from_py_object)]
#[derive(Clone)]
struct PyEnergyModel {
    inner: EnergyModel,
}

#[pymethods]
impl PyEnergyModel {
    /// Pure activity: H = theta |w|.
    #[staticmethod]
    fn activity(dim: usize, theta: f64) -> PyResult<Self> {
        Ok(Self { inner: EnergyModel::activity(dim, theta).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (dim, potential, stability_a = None))]
    fn pairwise(dim: usize, potential: &PyPotential, stability_a: Option<f64>) -> PyResult<Self> {
        let p = potential.inner.clone();
        let inner = match stability_a {
            Some(a) => EnergyModel::pairwise_with_stability(dim, p, a),
            None => EnergyModel::pairwise(dim, p),
        };
        Ok(Self { inner: inner.map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (dim, potential, stability_a = None))]
    fn finite_range(
        dim: usize,
        potential: &PyPotential,
        stability_a: Option<f64>,
    ) -> PyResult<Self> {
        let p = potential.inner.clone();
        let inner = match stability_a {
            Some(a) => EnergyModel::finite_range_with_stability(dim, p, a),
            None => EnergyModel::finite_range(dim, p),
        };
        Ok(Self { inner: inner.map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (dim, potential, radius, quad_tol = 1e-6))]
    fn cloud(dim: usize, potential: &PyPotential, radius: f64, quad_tol: f64) -> PyResult<Self> {
        Ok(Self {
            inner: EnergyModel::cloud(dim, potential.inner.clone(), radius, quad_tol)
                .map_err(err)?,
        })
    }

    #[staticmethod]
    fn sum(parts: Vec<PyEnergyModel>) -> PyResult<Self> {
        let inner = EnergyModel::sum(parts.into_iter().map(|p| p.inner).collect());
        Ok(Self { inner: inner.map_err(err)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Stability constant: H(w) >= stability_a * len(w) for every w.
    #[getter]
    fn stability_a(&self) -> f64 {
        self.inner.stability_a()
    }

    #[getter]
    fn shell_offset0(&self) -> f64 {
        self.inner.shell_offset0()
    }

    fn total_energy(&self, w: &PyConfiguration) -> f64 {
        self.inner.total_energy(&w.inner)
    }

    /// H(w + x) - H(w); +inf encodes a forbidden insertion.
    fn insertion_cost(&self, w: &PyConfiguration, x: Vec<f64>) -> PyResult<f64> {
        Ok(self.inner.insertion_cost(&w.inner, &point(x)?))
    }

    /// Realized shell bound G^l of the exterior points around `delta`.
    fn shell_increment_bound(
        &self,
        w_outside: &PyConfiguration,
        delta: &PyBox,
        l: u64,
    ) -> PyResult<f64> {
        self.inner.shell_increment_bound(&w_outside.inner, &delta.inner, l).map_err(err)
    }

    fn alpha(&self, delta: &PyBox, l: u64) -> PyResult<f64> {
        self.inner.alpha(&delta.inner, l).map_err(err)
    }

    /// Closed-form tail sum of the alpha envelope from level `l` on.
    fn alpha_tail(&self, delta: &PyBox, l: u64) -> PyResult<f64> {
        self.inner.alpha_tail(&delta.inner, l).map_err(err)
    }

    fn psi_value(&self, delta: &PyBox, intensity_cap: f64) -> PyResult<f64> {
        self.inner.psi_value(&delta.inner, intensity_cap).map_err(err)
    }

    fn __repr__(&self) -> String {
        let mut kv = Vec::new();
        self.inner.describe_into("", &mut kv);
        let body: Vec<String> = kv.into_iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("EnergyModel({})", body.join(", "))
    }
}

#[pyclass(name = "CertifiedLocalEnergy")]
struct PyCertifiedLocalEnergy {
    inner: le::CertifiedLocalEnergy,
}

#[pymethods]
impl PyCertifiedLocalEnergy {
    #[getter]
    fn value(&self) -> f64 {
        self.inner.value
    }

    #[getter]
    fn level(&self) -> u64 {
        self.inner.level
    }

    #[getter]
    fn pathwise_bound(&self) -> f64 {
        self.inner.pathwise_bound
    }

    #[getter]
    fn expectation_bound(&self) -> f64 {
        self.inner.expectation_bound
    }

    #[getter]
    fn tolerance_met(&self) -> bool {
        self.inner.tolerance_met
    }

    fn __repr__(&self) -> String {
        format!(
            "CertifiedLocalEnergy(value={}, level={}, pathwise_bound={}, expectation_bound={}, tolerance_met={})",
            self.inner.value,
            self.inner.level,
            self.inner.pathwise_bound,
            self.inner.expectation_bound,
            py_bool(self.inner.tolerance_met),
        )
    }
}

#[pyclass(name = "SampleSet")]
struct PySampleSet {
    inner: sampler::SampleSet,
}

#[pymethods]
impl PySampleSet {
    fn configs(&self) -> Vec<PyConfiguration> {
        self.inner.configs().iter().map(|c| PyConfiguration { inner: c.clone() }).collect()
    }

    fn counts(&self) -> Vec<u64> {
        self.inner.counts()
    }

    fn window(&self) -> PyBox {
        PyBox { inner: self.inner.spec().window.clone() }
    }

    #[getter]
    fn ess(&self) -> f64 {
        self.inner.stats().ess
    }

    fn write_dir(&self, dir: &str) -> PyResult<()> {
        self.inner.write_dir(std::path::Path::new(dir)).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "SampleSet(n={}, method={}, seed={})",
            self.inner.len(),
            self.inner.spec().method.name(),
            self.inner.spec().seed,
        )
    }
}

/// Draws from the finite-volume Gibbs measure on `window`.
///
/// `method` is "rejection" (exact, may exhaust on strong interactions) or
/// "mcmc" (birth-death-move chain). Chain defaults follow the window volume
/// and can be overridden.
#[pyfunction]
#[pyo3(signature = (
    model,
    window,
    method = "rejection",
    seed = 0,
    n_samples = 1000,
    burn_in = None,
    thinning = None,
    max_attempts = None,
))]
#[allow(clippy::too_many_arguments)]
fn sample(
    model: &PyEnergyModel,
    window: &PyBox,
    method: &str,
    seed: u64,
    n_samples: u64,
    burn_in: Option<u64>,
    thinning: Option<u64>,
    max_attempts: Option<u64>,
) -> PyResult<PySampleSet> {
    let method = SampleMethod::parse(method).map_err(err)?;
    let mut spec =
        SamplerSpec::new(model.inner.clone(), window.inner.clone(), method, seed).map_err(err)?;
    spec.n_samples = n_samples;
    if let Some(b) = burn_in {
        spec.burn_in = b;
    }
    if let Some(t) = thinning {
        spec.thinning = t;
    }
    if let Some(m) = max_attempts {
        spec.max_attempts = m;
    }
    Ok(PySampleSet { inner: sampler::sample(&spec).map_err(err)? })
}

/// Exact local energy H(w) - H(w \ delta) of `config` on `window`.
#[pyfunction]
fn local_energy(
    model: &PyEnergyModel,
    config: &PyConfiguration,
    window: &PyBox,
    delta: &PyBox,
) -> PyResult<f64> {
    let w = WindowedConfiguration::new(config.inner.clone(), window.inner.clone()).map_err(err)?;
    le::local_energy_window(&model.inner, &w, &delta.inner).map_err(err)
}

/// Local energy truncated at shell level `l`.
#[pyfunction]
fn truncated_local_energy(
    model: &PyEnergyModel,
    config: &PyConfiguration,
    delta: &PyBox,
    l: u64,
) -> PyResult<f64> {
    le::truncated_local_energy(&model.inner, &config.inner, &delta.inner, l)
        .map_err(err)
}

/// Smallest truncation level whose shells cover the whole window.
#[pyfunction]
fn covering_level(model: &PyEnergyModel, window: &PyBox, delta: &PyBox) -> u64 {
    le::covering_level(&model.inner, &window.inner, &delta.inner)
}

/// Truncated local energy with a certified error bound at tolerance `eps`,
/// assuming intensity at most `xi_cap` beyond the window.
#[pyfunction]
#[pyo3(signature = (model, config, window, delta, eps, xi_cap = 1.0))]
fn certified_local_energy(
    model: &PyEnergyModel,
    config: &PyConfiguration,
    window: &PyBox,
    delta: &PyBox,
    eps: f64,
    xi_cap: f64,
) -> PyResult<PyCertifiedLocalEnergy> {
    let w = WindowedConfiguration::new(config.inner.clone(), window.inner.clone()).map_err(err)?;
    let inner = le::certified_local_energy(&model.inner, &w, &delta.inner, eps, xi_cap)
        .map_err(err)?;
    Ok(PyCertifiedLocalEnergy { inner })
}

#[pyclass(name = "IntensityReport")]
struct PyIntensityReport {
    inner: IntensityReport,
}

#[pymethods]
impl PyIntensityReport {
    #[getter]
    fn estimate(&self) -> f64 {
        self.inner.estimate
    }

    #[getter]
    fn std_error(&self) -> f64 {
        self.inner.std_error
    }

    #[getter]
    fn bound(&self) -> f64 {
        self.inner.bound
    }

    #[getter]
    fn satisfied(&self) -> bool {
        self.inner.satisfied
    }

    fn __repr__(&self) -> String {
        format!(
            "IntensityReport(estimate={}, std_error={}, bound={}, satisfied={})",
            self.inner.estimate,
            self.inner.std_error,
            self.inner.bound,
            py_bool(self.inner.satisfied),
        )
    }
}

/// Empirical intensity of a sample set on a subwindow, checked against the
/// stability bound e^{-A} e + H(empty).
#[pyfunction]
fn estimate_intensity(samples: &PySampleSet, subwindow: &PyBox) -> PyResult<PyIntensityReport> {
    let inner = diagnostics::estimate_intensity(&samples.inner, &subwindow.inner).map_err(err)?;
    Ok(PyIntensityReport { inner })
}

#[pyclass(name = "PartitionReport")]
struct PyPartitionReport {
    inner: PartitionReport,
}

#[pymethods]
impl PyPartitionReport {
    #[getter]
    fn lower(&self) -> f64 {
        self.inner.lower
    }

    #[getter]
    fn upper(&self) -> f64 {
        self.inner.upper
    }

    #[getter]
    fn estimate(&self) -> f64 {
        self.inner.estimate
    }

    #[getter]
    fn std_error(&self) -> f64 {
        self.inner.std_error
    }

    fn __repr__(&self) -> String {
        format!(
            "PartitionReport(lower={}, estimate={}, std_error={}, upper={})",
            self.inner.lower, self.inner.estimate, self.inner.std_error, self.inner.upper,
        )
    }
}

/// Deterministic sandwich and Monte-Carlo estimate of the conditional
/// partition function of `delta` given the exterior points.
#[pyfunction]
#[pyo3(signature = (model, delta, w_outside, xi_cap = 1.0, draws = 2000, seed = 0))]
fn partition_bounds(
    model: &PyEnergyModel,
    delta: &PyBox,
    w_outside: &PyConfiguration,
    xi_cap: f64,
    draws: u64,
    seed: u64,
) -> PyResult<PyPartitionReport> {
    let inner =
        diagnostics::partition_bounds(&model.inner, &delta.inner, &w_outside.inner, xi_cap, draws, seed)
            .map_err(err)?;
    Ok(PyPartitionReport { inner })
}

#[pyclass(name = "DlrReport")]
struct PyDlrReport {
    inner: DlrReport,
}

#[pymethods]
impl PyDlrReport {
    #[getter]
    fn test_function(&self) -> String {
        self.inner.test_function.clone()
    }

    #[getter]
    fn lhs(&self) -> f64 {
        self.inner.lhs
    }

    #[getter]
    fn lhs_se(&self) -> f64 {
        self.inner.lhs_se
    }

    #[getter]
    fn rhs(&self) -> f64 {
        self.inner.rhs
    }

    #[getter]
    fn rhs_se(&self) -> f64 {
        self.inner.rhs_se
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual
    }

    #[getter]
    fn z_score(&self) -> f64 {
        self.inner.z_score
    }

    fn __repr__(&self) -> String {
        format!(
            "DlrReport(f={}, lhs={}, rhs={}, residual={}, z={})",
            self.inner.test_function,
            self.inner.lhs,
            self.inner.rhs,
            self.inner.residual,
            self.inner.z_score,
        )
    }
}

/// "one", "vacancy", or parametric "count=20", "pairs=50", "nn=0.2";
/// parameters default to the standard battery values when omitted.
fn parse_test_function(spec: &str) -> PyResult<TestFunction> {
    let (name, value) = match spec.split_once('=') {
        Some((n, v)) => (n.trim(), Some(v.trim())),
        None => (spec.trim(), None),
    };
    let parse_f64 = |v: Option<&str>, default: f64| -> PyResult<f64> {
        match v {
            Some(v) => v
                .parse::<f64>()
                .map_err(|_| PyValueError::new_err(format!("bad test function parameter {v:?}"))),
            None => Ok(default),
        }
    };
    match name {
        "one" => Ok(TestFunction::One),
        "vacancy" => Ok(TestFunction::Vacancy),
        "count" => Ok(TestFunction::Count { cap: parse_f64(value, 20.0)? as u64 }),
        "pairs" => Ok(TestFunction::PairCount { cap: parse_f64(value, 50.0)? as u64 }),
        "nn" => Ok(TestFunction::NearestNeighbor { radius: parse_f64(value, 0.2)? }),
        _ => Err(PyValueError::new_err(format!(
            "unknown test function {name:?}; expected one, vacancy, count, pairs, or nn"
        ))),
    }
}

/// Two-sided check of the spatial Markov property on `delta`: compares the
/// direct sample average of `f` restricted to `delta` with the resampled
/// conditional average under the model.
#[pyfunction]
#[pyo3(signature = (model, samples, delta, f = "count", inner_draws = 200, seed = 0))]
fn dlr_residual(
    model: &PyEnergyModel,
    samples: &PySampleSet,
    delta: &PyBox,
    f: &str,
    inner_draws: u64,
    seed: u64,
) -> PyResult<PyDlrReport> {
    let f = parse_test_function(f)?;
    let inner =
        diagnostics::dlr_residual(&model.inner, &samples.inner, &delta.inner, &f, inner_draws, seed)
            .map_err(err)?;
    Ok(PyDlrReport { inner })
}

/// Periodize-shift-restrict transformation that makes finite-window samples
/// exactly stationary on the output region.
#[pyfunction]
#[pyo3(signature = (samples, k, seed = 0))]
fn stationarize(samples: &PySampleSet, k: u32, seed: u64) -> PyResult<PySampleSet> {
    let inner = diagnostics::stationarize_seeded(&samples.inner, k, seed).map_err(err)?;
    Ok(PySampleSet { inner })
}

#[pymodule]
fn gibbs_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPotential>()?;
    m.add_class::<PyBox>()?;
    m.add_class::<PyConfiguration>()?;
    m.add_class::<PyEnergyModel>()?;
    m.add_class::<PyCertifiedLocalEnergy>()?;
    m.add_class::<PySampleSet>()?;
    m.add_class::<PyIntensityReport>()?;
    m.add_class::<PyPartitionReport>()?;
    m.add_class::<PyDlrReport>()?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(local_energy, m)?)?;
    m.add_function(wrap_pyfunction!(truncated_local_energy, m)?)?;
    m.add_function(wrap_pyfunction!(covering_level, m)?)?;
    m.add_function(wrap_pyfunction!(certified_local_energy, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_intensity, m)?)?;
    m.add_function(wrap_pyfunction!(partition_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(dlr_residual, m)?)?;
    m.add_function(wrap_pyfunction!(stationarize, m)?)?;
    m.add("__version__", gibbs_core::VERSION)?;
    Ok(())
}
