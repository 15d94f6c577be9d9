"""Smoke test for the gibbs_py extension module.

Build the module first, then point PYTHONPATH at a directory containing it
as `gibbs_py.so`:

    cargo build --release -p gibbs-py --features extension-module
    ln -sf ../target/release/libgibbs_py.so python/gibbs_py.so
    PYTHONPATH=python python3 python/smoke_test.py
"""

import math

import gibbs_py as gp


def check(label, ok):
    status = "ok" if ok else "FAIL"
    print(f"{status:4} {label}")
    if not ok:
        raise SystemExit(f"smoke test failed at: {label}")


def main():
    print(f"gibbs_py {gp.__version__}")

    # Geometry and configurations.
    box = gp.Box.centered_cube(2.0, 1)
    check("box volume", box.leb_volume() == 4.0)
    check("box contains", box.contains([1.5]) and not box.contains([2.5]))
    w = gp.Configuration(1, [[0.0], [0.4], [1.5]])
    check("configuration length", len(w) == 3)
    check("restriction", len(w.restrict_to(gp.Box([-1.0], [1.0]))) == 2)

    # Potentials and energy models.
    phi = gp.Potential.exponential(1.0, 1.0)
    check("potential eval", abs(phi.eval(1.5) - math.exp(-1.5)) < 1e-12)
    m = gp.EnergyModel.pairwise(1, phi)
    check("stability constant", m.stability_a <= 0.0)
    h = m.total_energy(w)
    byhand = math.exp(-0.4) + math.exp(-1.5) + math.exp(-1.1)
    check("pairwise energy", abs(h - byhand) < 1e-12)
    check("insertion cost finite", math.isfinite(m.insertion_cost(w, [0.9])))

    hard = gp.EnergyModel.finite_range(1, gp.Potential.hardcore(0.5))
    check("hardcore clash", hard.total_energy(w) == math.inf)

    # Cloud energy hand value.
    indicator = gp.Potential.indicator(1.0, 1.0)
    cloud = gp.EnergyModel.cloud(1, indicator, 0.5)
    pair = gp.Configuration(1, [[0.0], [0.4]])
    check("cloud hand value", abs(cloud.total_energy(pair) - 2.8) < 1e-9)

    # Certified local energy.
    window = gp.Box.centered_cube(4.0, 1)
    delta = gp.Box.centered_cube(0.5, 1)
    model = gp.EnergyModel.pairwise(1, gp.Potential.truncated_power(1.0, 2.5))
    conf = gp.Configuration(1, [[0.1], [0.8], [-2.4], [3.0]])
    exact = gp.local_energy(model, conf, window, delta)
    # The certificate includes an analytic tail for never-observed points
    # beyond the window, so the attainable tolerance is bounded below.
    cert = gp.certified_local_energy(model, conf, window, delta, eps=1.0)
    check("certified value close", abs(exact - cert.value) <= cert.pathwise_bound + 1e-12)
    check("certified tolerance met", cert.tolerance_met)
    strict = gp.certified_local_energy(model, conf, window, delta, eps=1e-9)
    check("unreachable tolerance flagged", not strict.tolerance_met)
    check("covering level positive", gp.covering_level(model, window, delta) > 0)

    # Sampling, both methods, deterministic in the seed.
    samples = gp.sample(model, window, method="rejection", seed=7, n_samples=200)
    again = gp.sample(model, window, method="rejection", seed=7, n_samples=200)
    check("sample count", len(samples) == 200)
    check(
        "seed determinism",
        [c.points() for c in samples.configs()] == [c.points() for c in again.configs()],
    )
    chain = gp.sample(model, window, method="mcmc", seed=8, n_samples=200)
    check("chain sample count", len(chain) == 200)
    check("chain ess positive", chain.ess > 0)

    # Diagnostics.
    report = gp.estimate_intensity(samples, window)
    check("intensity bounded", report.satisfied)
    part = gp.partition_bounds(model, delta, gp.Configuration(1, [[1.2], [-0.9]]), draws=500)
    check("partition sandwich", part.lower <= part.upper)
    dlr = gp.dlr_residual(model, samples, delta, f="count=10", inner_draws=50, seed=3)
    check("dlr z finite", math.isfinite(dlr.z_score))
    one = gp.dlr_residual(model, samples, delta, f="one", inner_draws=50, seed=3)
    check("dlr exact for constant f", one.residual == 0.0 and one.z_score == 0.0)
    stationary = gp.stationarize(samples, 1, seed=5)
    check("stationarized count", len(stationary) == len(samples))
    check("stationarized window grows", stationary.window().leb_volume() > window.leb_volume())

    # Errors surface as Python exceptions.
    try:
        gp.Box([0.0], [0.0, 1.0])
        check("box dimension mismatch raises", False)
    except ValueError:
        check("box dimension mismatch raises", True)
    try:
        gp.sample(hard, gp.Box.centered_cube(40.0, 1), seed=1, n_samples=1, max_attempts=2)
        check("exhausted sampler raises", False)
    except RuntimeError:
        check("exhausted sampler raises", True)

    print("smoke test passed")


if __name__ == "__main__":
    main()
