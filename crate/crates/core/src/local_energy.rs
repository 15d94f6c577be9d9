//! Local energies, shell truncations, and certified truncation errors.
//!
//! For a configuration w on a window and a box Delta inside it, the local
//! energy is `H(w) - H(w minus Delta)`. Truncations replace w by its
//! restriction to `Delta_l = Delta + B(0, offset + l)`; the telescoping
//! increments between consecutive levels are bounded by the model's realized
//! shell bounds, which is what makes certified truncation possible.

use crate::configuration::{Configuration, WindowedConfiguration};
use crate::energy::EnergyModel;
use crate::error::{Error, Result};
use crate::geometry::{BoxRegion, Point};

/// A truncated local energy with sound error bounds.
///
/// `pathwise_bound` dominates the gap to the exact windowed local energy
/// (realized shell bounds from `level` to window coverage; zero when
/// `Delta_level` already covers the window). `expectation_bound` is the
/// analytic certificate `|w_Delta| psi(xi_cap) T(level)` that additionally
/// covers unseen points beyond the window under the intensity cap.
#[derive(Debug, Clone)]
pub struct CertifiedLocalEnergy {
    pub value: f64,
    pub level: u64,
    pub pathwise_bound: f64,
    pub expectation_bound: f64,
    /// Whether realized-within-window plus analytic-tail error was brought
    /// at or below the requested tolerance; `false` flags a best-effort
    /// result at full window coverage.
    pub tolerance_met: bool,
}

/// Exact local energy `H(w) - H(w minus Delta)` of a windowed configuration.
/// +inf is a legitimate value (points of Delta in hard-core conflict); an
/// infinite environment energy is an error, the local energy is undefined.
pub fn local_energy_window(
    m: &EnergyModel,
    w: &WindowedConfiguration,
    delta: &BoxRegion,
) -> Result<f64> {
    check_delta(w, delta)?;
    let env = w.configuration().restrict_outside(delta);
    let h_env = m.total_energy(&env);
    if !h_env.is_finite() {
        return Err(Error::InfiniteEnvironment);
    }
    Ok(m.total_energy(w.configuration()) - h_env)
}

/// Truncation at shell `l`: the local energy computed after restricting the
/// configuration to `Delta_l = Delta + B(0, shell_offset0 + l)`.
pub fn truncated_local_energy(
    m: &EnergyModel,
    w: &Configuration,
    delta: &BoxRegion,
    l: u64,
) -> Result<f64> {
    if w.dim() != delta.dim() {
        return Err(Error::DimensionMismatch { expected: delta.dim(), got: w.dim() });
    }
    let radius = m.shell_offset0() + l as f64;
    let in_shells = w.restrict(|p| delta.dist_to(p) <= radius);
    let env = in_shells.restrict_outside(delta);
    let h_env = m.total_energy(&env);
    if !h_env.is_finite() {
        return Err(Error::InfiniteEnvironment);
    }
    Ok(m.total_energy(&in_shells) - h_env)
}

/// Smallest level whose shells cover every point of `window`:
/// `Delta_l` contains the window iff `offset + l` reaches the largest
/// distance from the window (attained at one of its corners) to `delta`.
pub fn covering_level(m: &EnergyModel, window: &BoxRegion, delta: &BoxRegion) -> u64 {
    let mut dist = 0.0f64;
    let d = window.dim();
    for mask in 0..(1usize << d) {
        let coords: Vec<f64> = (0..d)
            .map(|i| if mask >> i & 1 == 1 { window.upper()[i] } else { window.lower()[i] })
            .collect();
        let corner = Point::new(coords).expect("window coordinates are finite");
        dist = dist.max(delta.dist_to(&corner));
    }
    let l = (dist - m.shell_offset0()).ceil();
    if l <= 0.0 {
        0
    } else {
        l as u64
    }
}

/// Truncated local energy at the smallest level `l` whose certified error
/// `|w_Delta| * (sum of realized shell bounds from l to window coverage +
/// psi(xi_cap) * T(coverage))` is at most `eps`. When no level within the
/// window reaches the tolerance the result is the full-coverage truncation
/// (exact for the windowed configuration) flagged `tolerance_met: false`.
pub fn certified_local_energy(
    m: &EnergyModel,
    w: &WindowedConfiguration,
    delta: &BoxRegion,
    eps: f64,
    xi_cap: f64,
) -> Result<CertifiedLocalEnergy> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidDiagnostic(format!("tolerance must be positive, got {eps}")));
    }
    if !(xi_cap.is_finite() && xi_cap >= 0.0) {
        return Err(Error::InvalidDiagnostic(format!(
            "intensity cap must be nonnegative, got {xi_cap}"
        )));
    }
    check_delta(w, delta)?;

    let n_delta = w.configuration().count_in(delta) as f64;
    let outside = w.configuration().restrict_outside(delta);
    let coverage = covering_level(m, w.window(), delta);
    let psi = m.psi_value(delta, xi_cap)?;
    let tail_at_coverage = m.alpha_tail(delta, coverage)?;

    let mut realized = Vec::with_capacity(coverage as usize);
    for j in 0..coverage {
        realized.push(m.shell_increment_bound(&outside, delta, j)?);
    }
    // suffix[l] = sum of realized bounds for shells l..coverage.
    let mut suffix = vec![0.0; coverage as usize + 1];
    for j in (0..coverage as usize).rev() {
        suffix[j] = suffix[j + 1] + realized[j];
    }

    let mut level = coverage;
    let mut tolerance_met = false;
    for l in 0..=coverage {
        if n_delta * (suffix[l as usize] + psi * tail_at_coverage) <= eps {
            level = l;
            tolerance_met = true;
            break;
        }
    }

    let value = truncated_local_energy(m, w.configuration(), delta, level)?;
    Ok(CertifiedLocalEnergy {
        value,
        level,
        pathwise_bound: n_delta * suffix[level as usize],
        expectation_bound: n_delta * psi * m.alpha_tail(delta, level)?,
        tolerance_met,
    })
}

fn check_delta(w: &WindowedConfiguration, delta: &BoxRegion) -> Result<()> {
    if delta.dim() != w.dim() {
        return Err(Error::DimensionMismatch { expected: w.dim(), got: delta.dim() });
    }
    if !w.window().contains_box(delta) {
        return Err(Error::InvalidDiagnostic(
            "target box must be contained in the configuration window".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::Potential;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use rand_distr::{Distribution, Poisson};

    fn pt(coords: &[f64]) -> Point {
        Point::new(coords.to_vec()).unwrap()
    }

    fn windowed(window: &BoxRegion, pts: &[&[f64]]) -> WindowedConfiguration {
        let c = Configuration::from_points(window.dim(), pts.iter().map(|c| pt(c)).collect())
            .unwrap();
        WindowedConfiguration::new(c, window.clone()).unwrap()
    }

    fn poisson_windowed<R: Rng>(
        window: &BoxRegion,
        intensity: f64,
        rng: &mut R,
    ) -> WindowedConfiguration {
        let lambda = intensity * window.leb_volume();
        let n = Poisson::new(lambda).unwrap().sample(rng) as usize;
        let pts = (0..n).map(|_| window.sample_point(rng)).collect();
        WindowedConfiguration::new(
            Configuration::from_points(window.dim(), pts).unwrap(),
            window.clone(),
        )
        .unwrap()
    }

    fn test_models() -> Vec<EnergyModel> {
        vec![
            EnergyModel::pairwise(1, Potential::truncated_power(1.0, 2.5).unwrap()).unwrap(),
            EnergyModel::pairwise(
                1,
                Potential::exponential(1.0, 1.0).unwrap().with_hardcore(0.05).unwrap(),
            )
            .unwrap(),
            EnergyModel::cloud(1, Potential::exponential(1.0, 1.0).unwrap(), 0.4, 1e-9).unwrap(),
        ]
    }

    #[test]
    fn empty_delta_has_zero_local_energy() {
        let window = BoxRegion::centered_cube(2.0, 1).unwrap();
        let delta = BoxRegion::centered_cube(0.5, 1).unwrap();
        let w = windowed(&window, &[&[0.8], &[-1.5], &[1.9]]);
        for m in test_models() {
            assert_eq!(local_energy_window(&m, &w, &delta).unwrap(), 0.0);
            assert_eq!(truncated_local_energy(&m, w.configuration(), &delta, 0).unwrap(), 0.0);
        }
    }

    #[test]
    fn activity_local_energy_counts_delta_points() {
        let m = EnergyModel::activity(1, 0.7).unwrap();
        let window = BoxRegion::centered_cube(2.0, 1).unwrap();
        let delta = BoxRegion::centered_cube(1.0, 1).unwrap();
        let w = windowed(&window, &[&[0.2], &[-0.9], &[1.5]]);
        let h = local_energy_window(&m, &w, &delta).unwrap();
        assert!((h - 1.4).abs() < 1e-15);
    }

    #[test]
    fn pairwise_cross_pair_hand_value() {
        let m = EnergyModel::pairwise(1, Potential::exponential(1.0, 1.0).unwrap()).unwrap();
        let window = BoxRegion::centered_cube(2.0, 1).unwrap();
        let delta = BoxRegion::centered_cube(1.0, 1).unwrap();
        let w = windowed(&window, &[&[0.0], &[1.5]]);
        let h = local_energy_window(&m, &w, &delta).unwrap();
        assert!((h - (-1.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn truncation_keeps_near_shells_and_drops_far_ones() {
        let m = EnergyModel::pairwise(1, Potential::truncated_power(1.0, 2.0).unwrap()).unwrap();
        let delta = BoxRegion::new(vec![0.0], vec![1.0]).unwrap();
        let w = Configuration::from_points(1, vec![pt(&[0.5]), pt(&[1.25]), pt(&[11.5])]).unwrap();
        // Delta_0 is the closure of Delta: both neighbours excluded.
        assert_eq!(truncated_local_energy(&m, &w, &delta, 0).unwrap(), 0.0);
        // Delta_1 reaches distance 1: picks up the point at 1.25 only, whose
        // pair distance 0.75 sits on the plateau of the truncated power.
        let h1 = truncated_local_energy(&m, &w, &delta, 1).unwrap();
        assert!((h1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn truncation_is_exact_once_window_is_covered() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let window = BoxRegion::centered_cube(3.0, 1).unwrap();
        let delta = BoxRegion::new(vec![-0.5], vec![0.75]).unwrap();
        for m in test_models() {
            let coverage = covering_level(&m, &window, &delta);
            for _ in 0..20 {
                let w = poisson_windowed(&window, 0.8, &mut rng);
                // Hard-core clashes between environment points leave the
                // local energy undefined; skip those draws.
                let exact = match local_energy_window(&m, &w, &delta) {
                    Ok(v) => v,
                    Err(Error::InfiniteEnvironment) => continue,
                    Err(e) => panic!("{e}"),
                };
                for extra in 0..2 {
                    let t =
                        truncated_local_energy(&m, w.configuration(), &delta, coverage + extra)
                            .unwrap();
                    assert_eq!(t, exact);
                }
            }
        }
    }

    #[test]
    fn finite_range_truncation_exact_at_every_level() {
        let m = EnergyModel::finite_range(1, Potential::indicator(0.9, 0.7).unwrap()).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let window = BoxRegion::centered_cube(3.0, 1).unwrap();
        let delta = BoxRegion::centered_cube(0.8, 1).unwrap();
        for _ in 0..30 {
            let w = poisson_windowed(&window, 1.0, &mut rng);
            let exact = local_energy_window(&m, &w, &delta).unwrap();
            for l in 0..3 {
                let t = truncated_local_energy(&m, w.configuration(), &delta, l).unwrap();
                assert!(
                    (t - exact).abs() <= 1e-12 * (1.0 + exact.abs()),
                    "level {l}: {t} vs exact {exact}"
                );
            }
        }
    }

    #[test]
    fn increments_are_bounded_by_realized_shell_bounds() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let window = BoxRegion::centered_cube(4.0, 1).unwrap();
        let delta = BoxRegion::centered_cube(0.5, 1).unwrap();
        for m in test_models() {
            let margin = delta.margin_inside(&window).unwrap();
            for _ in 0..100 {
                let w = poisson_windowed(&window, 0.9, &mut rng);
                // Only feasible draws: a hard-core clash makes either the
                // environment undefined or every truncation level infinite.
                match local_energy_window(&m, &w, &delta) {
                    Ok(v) if v.is_finite() => {}
                    _ => continue,
                }
                let n_delta = w.configuration().count_in(&delta) as f64;
                let outside = w.configuration().restrict_outside(&delta);
                let mut l = 0u64;
                while m.shell_offset0() + (l + 1) as f64 <= margin {
                    let h_l =
                        truncated_local_energy(&m, w.configuration(), &delta, l).unwrap();
                    let h_next =
                        truncated_local_energy(&m, w.configuration(), &delta, l + 1).unwrap();
                    let g = m.shell_increment_bound(&outside, &delta, l).unwrap();
                    let slack = 1e-7 * (1.0 + h_l.abs());
                    assert!(
                        (h_next - h_l).abs() <= n_delta * g + slack,
                        "increment {} exceeds bound {} at level {l}",
                        (h_next - h_l).abs(),
                        n_delta * g
                    );
                    l += 1;
                }
            }
        }
    }

    #[test]
    fn certified_value_stays_within_pathwise_bound() {
        let mut rng = ChaCha12Rng::seed_from_u64(19);
        let window = BoxRegion::centered_cube(4.0, 1).unwrap();
        let delta = BoxRegion::centered_cube(0.5, 1).unwrap();
        for m in test_models() {
            for _ in 0..100 {
                let w = poisson_windowed(&window, 0.9, &mut rng);
                let exact = match local_energy_window(&m, &w, &delta) {
                    Ok(v) if v.is_finite() => v,
                    _ => continue,
                };
                let cert = certified_local_energy(&m, &w, &delta, 0.05, 1.0).unwrap();
                assert!(cert.pathwise_bound >= 0.0 && cert.expectation_bound >= 0.0);
                let slack = 1e-7 * (1.0 + exact.abs());
                assert!(
                    (exact - cert.value).abs() <= cert.pathwise_bound + slack,
                    "gap {} exceeds certified bound {}",
                    (exact - cert.value).abs(),
                    cert.pathwise_bound
                );
            }
        }
    }

    #[test]
    fn certified_truncation_increments_are_cauchy() {
        let mut rng = ChaCha12Rng::seed_from_u64(29);
        let window = BoxRegion::centered_cube(5.0, 1).unwrap();
        let delta = BoxRegion::centered_cube(0.5, 1).unwrap();
        let m = EnergyModel::pairwise(1, Potential::truncated_power(1.0, 2.5).unwrap()).unwrap();
        for _ in 0..20 {
            let w = poisson_windowed(&window, 1.0, &mut rng);
            let n_delta = w.configuration().count_in(&delta) as f64;
            let outside = w.configuration().restrict_outside(&delta);
            let coverage = covering_level(&m, &window, &delta);
            let mut prev = truncated_local_energy(&m, w.configuration(), &delta, 0).unwrap();
            for l in 0..coverage {
                let next =
                    truncated_local_energy(&m, w.configuration(), &delta, l + 1).unwrap();
                let g = m.shell_increment_bound(&outside, &delta, l).unwrap();
                assert!((next - prev).abs() <= n_delta * g + 1e-9);
                prev = next;
            }
            let exact = local_energy_window(&m, &w, &delta).unwrap();
            assert_eq!(prev, exact);
        }
    }

    #[test]
    fn huge_tolerance_certifies_level_zero() {
        let window = BoxRegion::centered_cube(3.0, 1).unwrap();
        let delta = BoxRegion::centered_cube(0.5, 1).unwrap();
        let w = windowed(&window, &[&[0.1], &[1.4], &[-2.2]]);
        let m = EnergyModel::pairwise(1, Potential::exponential(1.0, 1.0).unwrap()).unwrap();
        let cert = certified_local_energy(&m, &w, &delta, 1e6, 1.0).unwrap();
        assert_eq!(cert.level, 0);
        assert!(cert.tolerance_met);
    }

    #[test]
    fn finite_range_certifies_exactly_at_level_zero() {
        let m = EnergyModel::finite_range(1, Potential::indicator(0.9, 0.7).unwrap()).unwrap();
        let window = BoxRegion::centered_cube(3.0, 1).unwrap();
        let delta = BoxRegion::centered_cube(0.8, 1).unwrap();
        let w = windowed(&window, &[&[0.1], &[0.5], &[1.2], &[-2.0]]);
        let cert = certified_local_energy(&m, &w, &delta, 1e-12, 5.0).unwrap();
        assert_eq!(cert.level, 0);
        assert!(cert.tolerance_met);
        assert_eq!(cert.pathwise_bound, 0.0);
        assert_eq!(cert.expectation_bound, 0.0);
        let exact = local_energy_window(&m, &w, &delta).unwrap();
        assert!((cert.value - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
    }

    #[test]
    fn unreachable_tolerance_is_flagged_not_fatal() {
        let m = EnergyModel::pairwise(1, Potential::truncated_power(1.0, 2.5).unwrap()).unwrap();
        let window = BoxRegion::centered_cube(2.0, 1).unwrap();
        let delta = BoxRegion::centered_cube(0.5, 1).unwrap();
        let w = windowed(&window, &[&[0.1], &[-0.3], &[1.5]]);
        // Tiny tolerance with a large intensity cap: the analytic tail alone
        // exceeds it at full coverage.
        let cert = certified_local_energy(&m, &w, &delta, 1e-12, 50.0).unwrap();
        assert!(!cert.tolerance_met);
        assert_eq!(cert.level, covering_level(&m, &window, &delta));
        assert_eq!(cert.pathwise_bound, 0.0);
        let exact = local_energy_window(&m, &w, &delta).unwrap();
        assert_eq!(cert.value, exact);
    }

    #[test]
    fn certified_level_shrinks_as_tolerance_grows() {
        let m = EnergyModel::pairwise(1, Potential::truncated_power(1.0, 2.5).unwrap()).unwrap();
        let window = BoxRegion::centered_cube(6.0, 1).unwrap();
        let delta = BoxRegion::centered_cube(0.5, 1).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(37);
        let w = poisson_windowed(&window, 1.2, &mut rng);
        let mut prev_level = u64::MAX;
        for eps in [1e-9, 1e-6, 1e-3, 1.0, 1e3] {
            let cert = certified_local_energy(&m, &w, &delta, eps, 1.0).unwrap();
            assert!(cert.level <= prev_level, "level grew as eps grew");
            prev_level = cert.level;
        }
    }

    #[test]
    fn hardcore_conflicts_inside_delta_are_values_not_errors() {
        let phi = Potential::exponential(1.0, 1.0).unwrap().with_hardcore(0.5).unwrap();
        let m = EnergyModel::pairwise(1, phi).unwrap();
        let window = BoxRegion::centered_cube(3.0, 1).unwrap();
        let delta = BoxRegion::centered_cube(1.0, 1).unwrap();
        // Conflict inside Delta: local energy is +inf.
        let w = windowed(&window, &[&[0.0], &[0.2], &[2.5]]);
        assert_eq!(local_energy_window(&m, &w, &delta).unwrap(), f64::INFINITY);
        let cert = certified_local_energy(&m, &w, &delta, 0.1, 1.0).unwrap();
        assert_eq!(cert.value, f64::INFINITY);
        // Conflict in the environment: undefined, reported as an error.
        let w = windowed(&window, &[&[0.0], &[2.2], &[2.5]]);
        assert!(matches!(
            local_energy_window(&m, &w, &delta),
            Err(Error::InfiniteEnvironment)
        ));
        assert!(matches!(
            truncated_local_energy(&m, w.configuration(), &delta, 3),
            Err(Error::InfiniteEnvironment)
        ));
    }

    #[test]
    fn delta_must_sit_inside_the_window() {
        let m = EnergyModel::activity(1, 0.5).unwrap();
        let window = BoxRegion::centered_cube(1.0, 1).unwrap();
        let delta = BoxRegion::new(vec![0.5], vec![1.5]).unwrap();
        let w = windowed(&window, &[&[0.3]]);
        assert!(local_energy_window(&m, &w, &delta).is_err());
        assert!(certified_local_energy(&m, &w, &delta, 0.1, 1.0).is_err());
    }

    #[test]
    fn covering_level_reaches_farthest_corner() {
        let m = EnergyModel::pairwise(1, Potential::exponential(1.0, 1.0).unwrap()).unwrap();
        let window = BoxRegion::centered_cube(3.0, 1).unwrap();
        let delta = BoxRegion::new(vec![1.0], vec![2.0]).unwrap();
        // Farthest corner is -3, at distance 4 from Delta.
        assert_eq!(covering_level(&m, &window, &delta), 4);
        let offset = EnergyModel::cloud(1, Potential::exponential(1.0, 1.0).unwrap(), 0.5, 1e-9)
            .unwrap();
        assert_eq!(covering_level(&offset, &window, &delta), 3);
    }
}
