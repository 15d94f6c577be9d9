//! Experiment orchestration: runs the sampler and the requested
//! diagnostics, then writes a self-describing artifact directory.
//!
//! Artifacts are plain text with sorted keys and fixed row orders, and all
//! randomness flows through per-item seed streams, so a directory is
//! byte-identical across runs and worker counts for a fixed config.

use crate::config::{format_kv, ExperimentConfig};
use crate::diagnostics::{
    battery_boxes, dlr_battery, estimate_intensity, partition_bounds, standard_test_functions,
    IntensityReport, DLR_CSV_HEADER,
};
use crate::error::{Error, Result};
use crate::geometry::BoxRegion;
use crate::sampler::{derive_stream_seed, join_floats, read_samples_dir, sample, SampleSet};
use crate::stats;
use std::fs;
use std::path::{Path, PathBuf};

// Seed-space tags keeping diagnostic streams away from sampler streams.
const DLR_SEED_TAG: u64 = 0x646c_725f_7365_6564;
const PARTITION_SEED_TAG: u64 = 0x7061_7274_5f73_6565;

#[derive(Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    /// The flat key/value pairs written to the summary file.
    pub summary: Vec<(String, String)>,
}

fn push(out: &mut Vec<(String, String)>, k: &str, v: String) {
    out.push((k.to_string(), v));
}

/// Resolved config echo recording model parameters, derived constants, and
/// requested diagnostics.
fn config_manifest(cfg: &ExperimentConfig) -> Vec<(String, String)> {
    let mut kv = Vec::new();
    push(&mut kv, "library_version", crate::VERSION.to_string());
    push(&mut kv, "dimension", format!("{}", cfg.dimension));
    // Worker count is deliberately not echoed: artifacts are byte-identical
    // across thread counts and the manifest must not break that.
    push(&mut kv, "seed", format!("{}", cfg.seed));
    cfg.sampler.describe_into(&mut kv);
    let d = &cfg.diagnostics;
    push(&mut kv, "diagnostics.intensity", format!("{}", d.intensity.enabled));
    if let Some(n) = d.intensity.subwindow_n {
        push(&mut kv, "diagnostics.intensity.subwindow_n", format!("{n}"));
    }
    push(&mut kv, "diagnostics.dlr", format!("{}", d.dlr.enabled));
    if d.dlr.enabled {
        push(&mut kv, "diagnostics.dlr.inner_draws", format!("{}", d.dlr.inner_draws));
        push(&mut kv, "diagnostics.dlr.boxes", format!("{}", d.dlr.boxes));
        push(&mut kv, "diagnostics.dlr.half_width", format!("{}", d.dlr.half_width));
        push(&mut kv, "diagnostics.dlr.count_cap", format!("{}", d.dlr.count_cap));
        push(&mut kv, "diagnostics.dlr.pair_cap", format!("{}", d.dlr.pair_cap));
        push(&mut kv, "diagnostics.dlr.nn_radius", format!("{}", d.dlr.nn_radius));
    }
    push(&mut kv, "diagnostics.partition", format!("{}", d.partition.enabled));
    if d.partition.enabled {
        push(&mut kv, "diagnostics.partition.exteriors", format!("{}", d.partition.exteriors));
        push(&mut kv, "diagnostics.partition.draws", format!("{}", d.partition.draws));
        push(&mut kv, "diagnostics.partition.half_width", format!("{}", d.partition.half_width));
        push(&mut kv, "diagnostics.partition.xi_cap", format!("{}", d.partition.xi_cap));
    }
    kv
}

fn centered_subbox(window: &BoxRegion, half_width: f64, what: &str) -> Result<BoxRegion> {
    window.centered_subbox(half_width).map_err(|_| {
        Error::InvalidDiagnostic(format!(
            "{what} of half-width {half_width} does not fit inside the window"
        ))
    })
}

fn intensity_csv(r: &IntensityReport) -> String {
    format!(
        "estimate,std_error,bound,satisfied\n{},{},{},{}\n",
        r.estimate, r.std_error, r.bound, r.satisfied
    )
}

/// Coordinates of the last retained configuration.
fn plot_points_csv(set: &SampleSet) -> String {
    let d = set.spec().window.dim();
    let header: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
    let mut out = header.join(",");
    out.push('\n');
    if let Some(last) = set.configs().last() {
        for p in last.iter() {
            let row: Vec<String> = p.coords().iter().map(|c| format!("{c}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
    }
    out
}

fn plot_count_hist_csv(set: &SampleSet) -> String {
    let counts = set.counts();
    let max = counts.iter().copied().max().unwrap_or(0) as usize;
    let mut freq = vec![0u64; max + 1];
    for c in &counts {
        freq[*c as usize] += 1;
    }
    let mut out = String::from("count,frequency\n");
    for (c, f) in freq.iter().enumerate() {
        out.push_str(&format!("{c},{f}\n"));
    }
    out
}

fn sample_summary(set: &SampleSet, summary: &mut Vec<(String, String)>) {
    let counts: Vec<f64> = set.counts().iter().map(|&c| c as f64).collect();
    push(summary, "samples.count", format!("{}", set.len()));
    push(summary, "samples.mean_count", format!("{}", stats::mean(&counts)));
    push(summary, "samples.ess", format!("{}", set.stats().ess));
}

fn intensity_report(
    cfg: &ExperimentConfig,
    set: &SampleSet,
    summary: &mut Vec<(String, String)>,
    out_dir: &Path,
) -> Result<()> {
    let sub = match cfg.diagnostics.intensity.subwindow_n {
        Some(n) => centered_subbox(&cfg.window, n, "intensity subwindow")?,
        None => cfg.window.clone(),
    };
    let r = estimate_intensity(set, &sub)?;
    fs::write(out_dir.join("intensity.csv"), intensity_csv(&r))?;
    push(summary, "intensity.estimate", format!("{}", r.estimate));
    push(summary, "intensity.std_error", format!("{}", r.std_error));
    push(summary, "intensity.bound", format!("{}", r.bound));
    push(summary, "intensity.satisfied", format!("{}", r.satisfied));
    Ok(())
}

fn dlr_reports(
    cfg: &ExperimentConfig,
    set: &SampleSet,
    summary: &mut Vec<(String, String)>,
    out_dir: &Path,
) -> Result<()> {
    let settings = &cfg.diagnostics.dlr;
    let window = &set.spec().window;
    let boxes =
        battery_boxes(window, settings.boxes, settings.half_width, cfg.model.shell_offset0())?;
    let battery = standard_test_functions(settings);
    let mut rows = vec![DLR_CSV_HEADER.to_string()];
    let mut tests = 0u64;
    let mut failures = 0u64;
    let mut max_abs_z = 0.0f64;
    for (i, delta) in boxes.iter().enumerate() {
        let seed = derive_stream_seed(cfg.seed ^ DLR_SEED_TAG, i as u64);
        let reports = dlr_battery(&cfg.model, set, delta, &battery, settings.inner_draws, seed)?;
        push(summary, &format!("dlr.box{i}.lower"), join_floats(delta.lower()));
        push(summary, &format!("dlr.box{i}.upper"), join_floats(delta.upper()));
        for r in &reports {
            rows.push(r.csv_row(&format!("box{i}")));
            tests += 1;
            if r.z_score.abs() > 3.0 {
                failures += 1;
            }
            max_abs_z = max_abs_z.max(r.z_score.abs());
        }
    }
    fs::write(out_dir.join("dlr.csv"), rows.join("\n") + "\n")?;
    push(summary, "dlr.tests", format!("{tests}"));
    push(summary, "dlr.failures", format!("{failures}"));
    push(summary, "dlr.max_abs_z", format!("{max_abs_z}"));
    Ok(())
}

fn partition_reports(
    cfg: &ExperimentConfig,
    set: &SampleSet,
    summary: &mut Vec<(String, String)>,
    out_dir: &Path,
) -> Result<()> {
    let settings = &cfg.diagnostics.partition;
    let delta = centered_subbox(&cfg.window, settings.half_width, "partition region")?;
    let reps = (settings.exteriors as usize).min(set.len());
    let mut rows =
        vec!["exterior,n_points,lower,estimate,std_error,upper,within_bounds".to_string()];
    let mut failures = 0u64;
    for rep in 0..reps {
        // Sampled configurations provide exteriors the model itself can
        // produce, so hard cores never make the environment infinite.
        let exterior = set.configs()[rep].restrict_outside(&delta);
        let seed = derive_stream_seed(cfg.seed ^ PARTITION_SEED_TAG, rep as u64);
        let r = partition_bounds(
            &cfg.model,
            &delta,
            &exterior,
            settings.xi_cap,
            settings.draws,
            seed,
        )?;
        let within = r.lower <= r.estimate + 3.0 * r.std_error
            && r.estimate - 3.0 * r.std_error <= r.upper;
        if !within {
            failures += 1;
        }
        rows.push(format!(
            "{rep},{},{},{},{},{},{within}",
            exterior.len(),
            r.lower,
            r.estimate,
            r.std_error,
            r.upper
        ));
    }
    fs::write(out_dir.join("partition.csv"), rows.join("\n") + "\n")?;
    push(summary, "partition.delta.lower", join_floats(delta.lower()));
    push(summary, "partition.delta.upper", join_floats(delta.upper()));
    push(summary, "partition.exteriors", format!("{reps}"));
    push(summary, "partition.failures", format!("{failures}"));
    Ok(())
}

/// Full run: samples, requested reports, plot data, manifest, and summary.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    fs::create_dir_all(&cfg.output_dir)?;
    fs::write(cfg.output_dir.join("manifest.txt"), format_kv(&config_manifest(cfg)))?;
    let set = sample(&cfg.sampler)?;
    set.write_dir(&cfg.output_dir.join("samples"))?;
    fs::write(cfg.output_dir.join("plot_points.csv"), plot_points_csv(&set))?;
    fs::write(cfg.output_dir.join("plot_count_hist.csv"), plot_count_hist_csv(&set))?;
    let mut summary = Vec::new();
    sample_summary(&set, &mut summary);
    if cfg.diagnostics.intensity.enabled {
        intensity_report(cfg, &set, &mut summary, &cfg.output_dir)?;
    }
    if cfg.diagnostics.dlr.enabled {
        dlr_reports(cfg, &set, &mut summary, &cfg.output_dir)?;
    }
    if cfg.diagnostics.partition.enabled {
        partition_reports(cfg, &set, &mut summary, &cfg.output_dir)?;
    }
    fs::write(cfg.output_dir.join("summary.txt"), format_kv(&summary))?;
    Ok(RunOutcome { out_dir: cfg.output_dir.clone(), summary })
}

/// Sampler only: manifest, samples, and sample statistics.
pub fn sample_only(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    fs::create_dir_all(&cfg.output_dir)?;
    fs::write(cfg.output_dir.join("manifest.txt"), format_kv(&config_manifest(cfg)))?;
    let set = sample(&cfg.sampler)?;
    set.write_dir(&cfg.output_dir.join("samples"))?;
    let mut summary = Vec::new();
    sample_summary(&set, &mut summary);
    fs::write(cfg.output_dir.join("summary.txt"), format_kv(&summary))?;
    Ok(RunOutcome { out_dir: cfg.output_dir.clone(), summary })
}

/// DLR reports over an existing sample directory (the config's
/// `diagnostics.samples_dir`, defaulting to `<output_dir>/samples`).
pub fn run_dlr(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let dir = cfg
        .diagnostics
        .samples_dir
        .clone()
        .unwrap_or_else(|| cfg.output_dir.join("samples"));
    let loaded = read_samples_dir(&dir)?;
    if loaded.window.lower() != cfg.window.lower() || loaded.window.upper() != cfg.window.upper()
    {
        return Err(Error::InvalidDiagnostic(format!(
            "sample window ]{}, {}] does not match the config window",
            join_floats(loaded.window.lower()),
            join_floats(loaded.window.upper())
        )));
    }
    let mut spec = cfg.sampler.clone();
    spec.window = loaded.window.clone();
    let set = SampleSet::from_parts(spec, loaded.configs)?;
    fs::create_dir_all(&cfg.output_dir)?;
    let mut summary = Vec::new();
    sample_summary(&set, &mut summary);
    dlr_reports(cfg, &set, &mut summary, &cfg.output_dir)?;
    fs::write(cfg.output_dir.join("dlr_summary.txt"), format_kv(&summary))?;
    Ok(RunOutcome { out_dir: cfg.output_dir.clone(), summary })
}
