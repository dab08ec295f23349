"""Experiment drivers shared by the command line and the acceptance tests.

Each run_* function assembles initial data, evolves, measures, and returns a
plain dict with a "checks" list ({name, value, threshold, op, passed}) plus
whatever time series the caller may want to dump.  All randomness goes
through a caller-supplied seed so repeated runs are bit-identical.
"""

from __future__ import annotations

import math
import time

import numpy as np
import scipy.optimize

from .diagnostics import WeightFamily, monotonicity_audit
from .grid import ConstantBackground, Field, Grid, l2_distance
from .modulation import (QuadraticFormSpec, coercivity_estimate,
                         energy_expansion_check, fit_modulation,
                         interaction_residual)
from .nonlinearity import Nonlinearity
from .profiles import (GardnerFamily, MultiKinkConfig, PowerFamily,
                       build_multikink_profile, eval_gardner_soliton,
                       gardner_identities_report)
from .solver import EvolutionSpec, evolve
from .transforms import (even_background_map, gardner_transform, kdv_map_odd,
                         miura, odd_compose)


def _check(name, value, threshold, op="<"):
    if op == "<":
        ok = value < threshold
    elif op == "<=":
        ok = value <= threshold
    elif op == ">":
        ok = value > threshold
    elif op == ">=":
        ok = value >= threshold
    else:
        raise ValueError(f"unknown comparison {op!r}")
    return {"name": name, "value": float(value), "threshold": float(threshold),
            "op": op, "passed": bool(ok)}


def _h1_normalize(grid: Grid, w: np.ndarray) -> np.ndarray:
    from .grid import spectral_derivative
    wx = spectral_derivative(w, grid, 1)
    norm = math.sqrt(grid.integrate(w**2 + wx**2))
    if norm == 0.0:
        raise ValueError("cannot normalize the zero perturbation")
    return w / norm


def perturbation_samples(grid: Grid, shape: str, alpha: float, *,
                         seed: int = 0, offset: float = 0.0,
                         width: float = 3.0, band=(0.1, 1.2),
                         direction=None) -> np.ndarray:
    """H1-normalized perturbation times alpha on the given grid.

    shapes: 'bump' (Gaussian at offset), 'noise' (seeded band-limited random
    field), 'scaling' (caller-supplied tangent direction, e.g. the derivative
    of a soliton in its scaling).
    """
    if alpha == 0.0:
        return np.zeros(grid.n)
    if shape == "bump":
        w = np.exp(-(((grid.x - offset) / width) ** 2))
    elif shape == "noise":
        rng = np.random.default_rng(seed)
        kr = 2.0 * math.pi * np.fft.rfftfreq(grid.n, d=grid.dx)
        spec = np.zeros(kr.shape, dtype=complex)
        mask = (kr >= band[0]) & (kr <= band[1])
        m = int(np.sum(mask))
        spec[mask] = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        w = np.fft.irfft(spec, grid.n)
    elif shape == "scaling":
        if direction is None:
            raise ValueError("scaling shape needs a tangent direction array")
        w = np.asarray(direction, dtype=float)
    else:
        raise ValueError(f"unknown perturbation shape {shape!r}")
    return alpha * _h1_normalize(grid, w)


# --- identities --------------------------------------------------------------


IDENTITY_PARAMS = ((1.0, 0.05), (1.0, 0.1), (0.5, 0.3))


def run_identities(params=IDENTITY_PARAMS, n: int = 2048, tol: float = 1e-8) -> dict:
    t0 = time.perf_counter()
    reports = []
    checks = []
    for beta, c in params:
        rep = gardner_identities_report(c, beta, n=n)
        rep["beta"] = beta
        rep["c"] = c
        reports.append(rep)
        checks.append(_check(f"identities beta={beta} c={c} max residual",
                             rep["max_residual"], tol))
    elapsed = time.perf_counter() - t0
    checks.append(_check("identities wall time (s)", elapsed, 5.0))
    return {"name": "identities", "elapsed": elapsed,
            "reports": reports, "checks": checks}


# --- commutation of the solution maps ---------------------------------------


def _l2_route_gap(route_a, route_b):
    return max(l2_distance(fa, fb) for fa, fb in zip(route_a, route_b))


def run_transform_checks(beta: float = 1.0, n: int = 2048, length: float = 200.0,
                         dt: float = 1e-3, horizon: float = 1.0,
                         alpha: float = 0.01, seed: int = 1,
                         tol: float = 1e-5) -> dict:
    """Evolve-then-map against map-then-evolve on each solution-map edge.

    Data on every edge is a soliton (or a kink perturbation containing one)
    plus a small H1-normalized bump.  The gap is the worst L2 distance over
    the output times in [0, horizon].
    """
    t_start = time.perf_counter()
    c = 1.0 / (9.0 * beta)
    grid = Grid(n, length, x0=-length / 2.0)
    out_times = [0.25 * horizon * j for j in range(5)]
    gardner = Nonlinearity.gardner(beta)
    kdv = Nonlinearity.kdv_quadratic()
    cubic = Nonlinearity.cubic()
    bump = perturbation_samples(grid, "bump", alpha, offset=5.0, seed=seed)
    checks = []
    gaps = {}

    def kdv_evolution(w0: Field):
        spec = EvolutionSpec(kdv, grid, dt, horizon)
        return evolve(w0, spec, output_times=out_times)

    # kink perturbation trajectory, shared by the miura and kdv-map edges
    ut0_vals = eval_gardner_soliton(0.05, beta, 12.0, grid.x) + bump
    ut0 = Field(grid, ut0_vals, ConstantBackground(0.0), 0.0)
    spec_kink = EvolutionSpec(gardner, grid, dt, horizon,
                              mode="kink_perturbation", beta=beta)
    ut_traj = evolve(ut0, spec_kink, output_times=out_times)

    u_traj = [odd_compose(ut, beta, kink_center=-c * ut.t) for ut in ut_traj]
    route_a = [miura(u, c) for u in u_traj]
    route_b = kdv_evolution(route_a[0])
    gaps["miura"] = _l2_route_gap(route_a, route_b)

    route_a = [kdv_map_odd(ut, beta) for ut in ut_traj]
    route_b = kdv_evolution(route_a[0])
    gaps["kink_to_kdv"] = _l2_route_gap(route_a, route_b)

    # decaying Gardner trajectory for the remaining two edges
    v0_vals = eval_gardner_soliton(0.1, beta, 0.0, grid.x) + bump
    v0 = Field(grid, v0_vals, ConstantBackground(0.0), 0.0)
    spec_g = EvolutionSpec(gardner, grid, dt, horizon)
    v_traj = evolve(v0, spec_g, output_times=out_times)

    route_a = [gardner_transform(v, beta) for v in v_traj]
    route_b = kdv_evolution(route_a[0])
    gaps["gardner_to_kdv"] = _l2_route_gap(route_a, route_b)

    route_a = [even_background_map(v, beta, "to_mkdv") for v in v_traj]
    spec_m = EvolutionSpec(cubic, grid, dt, horizon)
    route_b = evolve(route_a[0], spec_m, output_times=out_times)
    gaps["even_background"] = _l2_route_gap(route_a, route_b)

    for name, gap in gaps.items():
        checks.append(_check(f"commutation gap {name}", gap, tol))

    # pointwise identity between the two closed forms of the even 2-kink
    from .profiles import eval_even_two_kink, eval_even_two_kink_gardner_form
    worst = 0.0
    for bb, cc in ((1.0, 0.05), (0.5, 0.3)):
        for tt in (0.0, 0.7):
            a = eval_even_two_kink(bb, cc, 1.3, tt, grid.x)
            b = eval_even_two_kink_gardner_form(bb, cc, 1.3, tt, grid.x)
            worst = max(worst, float(np.max(np.abs(a - b))))
    checks.append(_check("two-kink closed forms pointwise", worst, 1e-12))

    return {"name": "transforms", "elapsed": time.perf_counter() - t_start,
            "gaps": gaps, "two_kink_pointwise": worst, "checks": checks}


# --- stability sweeps --------------------------------------------------------


STABILITY_ALPHAS = (0.02, 0.01, 0.005)


def _position_fluctuation(times, shift_series):
    """sup over time of the summed |x_j'(t)| from the fitted shift tracks."""
    arr = np.asarray(shift_series, dtype=float)
    rates = np.gradient(arr, np.asarray(times, dtype=float), axis=0)
    return float(np.max(np.sum(np.abs(rates), axis=1)))


def _scaling_direction(config: MultiKinkConfig, grid: Grid) -> np.ndarray:
    fam = GardnerFamily(config.beta)
    c1 = config.scalings[0]
    return fam.dc(c1, grid.x + config.shifts[0])


def _stability_summary(runs, alphas, gamma, separation, sup_key="sup_metric"):
    """Fitted front constants A0 and their spread across the alpha sweep.

    The exponential term in the denominator uses the measured tail-interaction
    rate gamma of the slowest component rather than the weight-family rate;
    the bound constant in the statement being tested is free, and the
    interaction floor in the data decays at gamma.
    """
    floor = math.exp(-gamma * separation)
    a0 = {}
    for alpha, run in zip(alphas, runs):
        a0[alpha] = run[sup_key] / (alpha + floor)
    vals = [a0[a] for a in alphas if a > 0]
    ratio = max(vals) / min(vals)
    return {"A0": a0, "ratio": ratio, "gamma": gamma, "exp_floor": floor}


def _even_config(separation: float) -> MultiKinkConfig:
    return MultiKinkConfig("even", beta=1.0, scalings=(0.05, 0.12),
                           shifts=(separation, 0.0), separation=separation)


def _odd_config(separation: float) -> MultiKinkConfig:
    return MultiKinkConfig("odd", beta=1.0, scalings=(0.05, 0.12),
                           shifts=(2.0 * separation, separation, 0.0),
                           separation=separation)


def run_even_stability(alphas=STABILITY_ALPHAS, shape: str = "bump",
                       separation: float = 30.0, n: int = 2048,
                       length: float = 256.0, dt: float = 5e-3,
                       horizon: float = 50.0, seed: int = 0,
                       ratio_tol: float = 2.0) -> dict:
    """Perturbed two-soliton data on the constant background, alpha sweep.

    The evolution runs in the frame where the background is removed and the
    equation is the Gardner one; each snapshot is mapped back and decomposed
    with frozen scalings.  The front constant A0 = sup_t(||z||_H1 +
    sum|x_j'|) / (alpha + e^{-gamma L}) must be stable across alpha.
    """
    t_start = time.perf_counter()
    config = _even_config(separation)
    beta = config.beta
    grid = Grid(n, length, x0=-length * 0.55)
    gardner = Nonlinearity.gardner(beta)
    out_times = [float(j) for j in range(int(horizon) + 1)]
    gamma = math.sqrt(config.scalings[0])

    base = np.zeros(grid.n)
    for cj, xj in zip(config.scalings, config.shifts):
        base = base + eval_gardner_soliton(cj, beta, xj, grid.x)

    runs = []
    for alpha in tuple(alphas) + (0.0,):
        t_run = time.perf_counter()
        pert = perturbation_samples(
            grid, shape, alpha, seed=seed, offset=-config.shifts[0],
            direction=_scaling_direction(config, grid) if shape == "scaling" else None)
        v0 = Field(grid, base + pert, ConstantBackground(0.0), 0.0)
        spec = EvolutionSpec(gardner, grid, dt, horizon)
        traj = evolve(v0, spec, output_times=out_times)

        z_norms, shift_series, times = [], [], []
        guess = None
        for v in traj:
            u = even_background_map(v, beta, "to_mkdv")
            state = fit_modulation(u, config, guess_shifts=guess,
                                   fit_scalings=False)
            guess = state.shifts
            times.append(v.t)
            z_norms.append(state.residual_h1)
            shift_series.append(state.shifts)
        fluct = _position_fluctuation(times, shift_series)
        runs.append({
            "alpha": alpha,
            "times": times,
            "z_h1": z_norms,
            "shifts": shift_series,
            "sup_z": max(z_norms),
            "sup_metric": max(z_norms) + fluct,
            "wall_time": time.perf_counter() - t_run,
        })

    summary = _stability_summary(runs[:len(alphas)], alphas, gamma, separation)
    checks = [
        _check("even stability A0 spread", summary["ratio"], ratio_tol, "<="),
        _check("even stability worst run wall time (s)",
               max(r["wall_time"] for r in runs), 300.0),
    ]
    return {"name": "stability-even", "shape": shape, "config": {
                "beta": beta, "scalings": config.scalings,
                "shifts": config.shifts, "separation": separation},
            "elapsed": time.perf_counter() - t_start,
            "runs": runs, "summary": summary, "checks": checks}


def run_odd_stability(alphas=STABILITY_ALPHAS, shape: str = "bump",
                      separation: float = 30.0, n: int = 2048,
                      length: float = 256.0, dt: float = 5e-3,
                      horizon: float = 50.0, seed: int = 0,
                      ratio_tol: float = 2.0, drop_factor: float = 10.0) -> dict:
    """Kink plus two solitons: alpha sweep plus the almost-monotonicity audit.

    The kink is removed analytically and the perturbation is evolved in the
    drifting frame with the kink coefficient frozen on its unperturbed path.
    Besides the A0 spread of the even sweep, every weighted left mass must
    not drop below -drop_factor e^{-sigma0 L}.
    """
    t_start = time.perf_counter()
    config = _odd_config(separation)
    beta = config.beta
    c = config.kink_scaling
    grid = Grid(n, length, x0=-0.6 * length)
    gardner = Nonlinearity.gardner(beta)
    out_times = [float(j) for j in range(int(horizon) + 1)]
    gamma = math.sqrt(config.scalings[0])
    weights = WeightFamily.from_config(config)

    base = np.zeros(grid.n)
    for cj, xj in zip(config.scalings, config.shifts):
        base = base + eval_gardner_soliton(cj, beta, xj, grid.x)

    runs = []
    for alpha in tuple(alphas) + (0.0,):
        t_run = time.perf_counter()
        pert = perturbation_samples(
            grid, shape, alpha, seed=seed, offset=-config.shifts[0],
            direction=_scaling_direction(config, grid) if shape == "scaling" else None)
        ut0 = Field(grid, base + pert, ConstantBackground(0.0), 0.0)
        spec = EvolutionSpec(gardner, grid, dt, horizon,
                             mode="kink_perturbation", beta=beta,
                             kink_shift=config.shifts[-1])
        traj = evolve(ut0, spec, output_times=out_times)

        z_norms, shift_series, times = [], [], []
        guess = None
        for ut in traj:
            u = odd_compose(ut, beta, kink_center=-c * ut.t - config.shifts[-1])
            state = fit_modulation(u, config, guess_shifts=guess,
                                   fit_scalings=False)
            guess = state.shifts
            times.append(ut.t)
            z_norms.append(state.residual_h1)
            shift_series.append(state.shifts)
        fluct = _position_fluctuation(times, shift_series)
        audit = monotonicity_audit(traj, weights)
        runs.append({
            "alpha": alpha,
            "times": times,
            "z_h1": z_norms,
            "shifts": shift_series,
            "sup_z": max(z_norms),
            "sup_metric": max(z_norms) + fluct,
            "min_drop": audit["min_drop"],
            "wall_time": time.perf_counter() - t_run,
        })

    summary = _stability_summary(runs[:len(alphas)], alphas, gamma, separation)
    sigma0 = weights.sigma0
    drop_bound = -drop_factor * math.exp(-sigma0 * separation)
    worst_drop = min(min(r["min_drop"].values()) for r in runs)
    checks = [
        _check("odd stability A0 spread", summary["ratio"], ratio_tol, "<="),
        _check("odd stability worst left-mass drop", worst_drop,
               drop_bound, ">="),
        _check("odd stability worst run wall time (s)",
               max(r["wall_time"] for r in runs), 300.0),
    ]
    return {"name": "stability-odd", "shape": shape, "config": {
                "beta": beta, "scalings": config.scalings,
                "shifts": config.shifts, "separation": separation},
            "sigma0": sigma0, "drop_bound": drop_bound,
            "worst_drop": worst_drop,
            "elapsed": time.perf_counter() - t_start,
            "runs": runs, "summary": summary, "checks": checks}


# --- collisions --------------------------------------------------------------


def _fit_two_solitons(v: Field, family, guesses, c_max: float = np.inf):
    """Least-squares two-soliton fit; returns (params, H1 defect)."""
    grid = v.grid
    sqdx = math.sqrt(grid.dx)

    def model(params):
        p1, p2, c1, c2 = params
        return family.value(c1, grid.x - p1) + family.value(c2, grid.x - p2)

    def resid(params):
        return sqdx * (v.values - model(params))

    bounds = ([-np.inf, -np.inf, 1e-3, 1e-3], [np.inf, np.inf, c_max, c_max])
    sol = scipy.optimize.least_squares(resid, guesses, bounds=bounds,
                                       xtol=1e-14, ftol=1e-14)
    fit = Field(grid, v.values - model(sol.x), ConstantBackground(0.0), v.t)
    return list(sol.x), fit.h1()


def run_collision(n: int = 2048, length: float = 256.0, seed: int = 0,
                  defect_factor: float = 10.0, control_factor: float = 2.0) -> dict:
    """Fast-behind-slow two-soliton collision: quartic flux against Gardner.

    Both runs start with the fast soliton thirty units behind the slow one
    and are measured once the post-collision separation exceeds the initial
    one.  The noise floor is the control run's own post-collision defect:
    the Gardner collision is clean up to discretization and the initial
    sum-of-solitons mismatch, so anything the quartic run leaves behind on
    top of that is a genuine defect.
    """
    t_start = time.perf_counter()
    grid = Grid(n, length, x0=-length / 2.0)
    results = {}

    # quartic flux, speeds 1.0 and 0.1, collision near t = 33
    fam4 = PowerFamily(4)
    eq4 = Nonlinearity.pure_power(4)
    c_fast, c_slow = 1.0, 0.1
    p_fast, p_slow = -30.0, 0.0
    horizon = 70.0
    v0 = Field(grid, fam4.value(c_fast, grid.x - p_fast)
               + fam4.value(c_slow, grid.x - p_slow),
               ConstantBackground(0.0), 0.0)
    spec = EvolutionSpec(eq4, grid, 1e-3, horizon)
    final = evolve(v0, spec)[-1]
    guess = [p_fast + c_fast * horizon, p_slow + c_slow * horizon,
             c_fast, c_slow]
    params, defect = _fit_two_solitons(final, fam4, guess)
    results["quartic"] = {
        "fitted": params, "defect": defect, "horizon": horizon,
        "post_separation": params[0] - params[1],
    }

    # integrable control with the same geometry, slower closing speed
    beta = 0.5
    famg = GardnerFamily(beta)
    eqg = Nonlinearity.gardner(beta)
    c_fast, c_slow = 0.35, 0.05
    horizon = 250.0
    v0 = Field(grid, famg.value(c_fast, grid.x - p_fast)
               + famg.value(c_slow, grid.x - p_slow),
               ConstantBackground(0.0), 0.0)
    spec = EvolutionSpec(eqg, grid, 2.5e-3, horizon)
    final = evolve(v0, spec)[-1]
    guess = [p_fast + c_fast * horizon, p_slow + c_slow * horizon,
             c_fast, c_slow]
    params, floor = _fit_two_solitons(final, famg, guess,
                                      c_max=2.0 / (9.0 * beta) - 1e-6)
    results["gardner"] = {
        "fitted": params, "defect": floor, "horizon": horizon,
        "post_separation": params[0] - params[1],
    }

    elapsed = time.perf_counter() - t_start
    checks = [
        _check("quartic post-collision defect over noise floor",
               results["quartic"]["defect"], defect_factor * floor, ">"),
        _check("integrable control defect over noise floor",
               results["gardner"]["defect"], control_factor * floor, "<="),
        _check("collision wall time (s)", elapsed, 600.0),
    ]
    return {"name": "collision", "elapsed": elapsed,
            "noise_floor": floor, "results": results, "checks": checks}


# --- coercivity and the energy expansion -------------------------------------


def run_coercivity(n: int = 1024, length: float = 200.0,
                   b_values=(5.0, 10.0, 20.0, 40.0, 80.0),
                   separation: float = 30.0) -> dict:
    """Constrained smallest eigenvalues of the three quadratic forms.

    The kink form must be positive on the constraint complement and its
    kernel must be resolved in the unconstrained solve; the localized
    single-soliton form must turn positive once the localization width
    clears its threshold and then plateau; the full multi-kink form must
    stay positive at the reference decomposition.
    """
    t_start = time.perf_counter()
    c = 1.0 / 9.0
    grid = Grid(n, length, x0=-length / 2.0)
    checks = []

    spec = QuadraticFormSpec("kink", grid, c)
    zhid = coercivity_estimate(spec)["lambda0"]
    zhid_free = coercivity_estimate(spec, constrained=False)["lambda0"]
    checks.append(_check("kink form constrained lambda0", zhid, 0.0, ">"))
    checks.append(_check("kink form unconstrained |lambda0|",
                         abs(zhid_free), 1e-6, "<="))

    local = {}
    for b in b_values:
        spec = QuadraticFormSpec("gardner_localized", grid, 0.1, beta=1.0, B=b)
        local[b] = coercivity_estimate(spec)["lambda0"]
    tail = sorted(b_values)[-2:]
    plateau_gap = abs(local[tail[1]] - local[tail[0]]) / abs(local[tail[1]])
    checks.append(_check("localized form lambda0 at largest B",
                         local[tail[1]], 0.0, ">"))
    checks.append(_check("localized form plateau relative gap",
                         plateau_gap, 0.05, "<="))

    config = _odd_config(separation)
    weights = WeightFamily.from_config(config)
    fgrid = Grid(n, 320.0, x0=-220.0)
    spec = QuadraticFormSpec("multikink", fgrid, c, config=config, weights=weights)
    ftl = coercivity_estimate(spec)["lambda0"]
    checks.append(_check("multi-kink form constrained lambda0", ftl, 0.0, ">"))

    return {"name": "coercivity", "elapsed": time.perf_counter() - t_start,
            "kink": zhid, "kink_form_unconstrained": zhid_free,
            "localized": local, "multikink": ftl, "checks": checks}


def run_expansion(separation: float = 60.0, alphas=(0.08, 0.04, 0.02, 0.01),
                  n: int = 4096, length: float = 512.0, seed: int = 3) -> dict:
    """Orthogonality exactness, cubic smallness of the energy-expansion
    defect, and the exponential decay of the decoupling identities.

    The cubic exponent is read off the signed defect relative to the
    unperturbed baseline, so the exponentially small tail term drops out.
    """
    t_start = time.perf_counter()
    config = _odd_config(separation)
    grid = Grid(n, length, x0=-0.65 * length)
    weights = WeightFamily.from_config(config)
    sigma0 = weights.sigma0
    checks = []

    base = build_multikink_profile(config, grid, 0.0)
    defects = {}
    worst_ortho = 0.0
    for alpha in (0.0,) + tuple(alphas):
        pert = perturbation_samples(grid, "bump", alpha, seed=seed,
                                    offset=-config.shifts[-1] - 8.0)
        u = Field(grid, base.values + pert, base.background, 0.0)
        state = fit_modulation(u, config)
        worst_ortho = max(worst_ortho, max(state.ortho_residuals))
        rep = energy_expansion_check(u, state, config)
        defects[alpha] = (rep["energy"] - rep["kink_energy"]
                          - rep["soliton_energy"] - rep["quadratic_form"])
    checks.append(_check("orthogonality residuals", worst_ortho, 1e-10))

    la = np.log(np.asarray(alphas))
    ld = np.log(np.asarray([abs(defects[a] - defects[0.0]) for a in alphas]))
    exponent = float(np.polyfit(la, ld, 1)[0])
    checks.append(_check("energy defect alpha exponent lower", exponent, 2.5, ">="))
    checks.append(_check("energy defect alpha exponent upper", exponent, 3.5, "<="))

    seps = (20.0, 30.0, 40.0, 50.0)
    point, ener = [], []
    for sep in seps:
        rep = interaction_residual(config.scalings, config.beta,
                                   (-2.0 * sep, -sep))
        point.append(rep["pointwise_h1"])
        ener.append(rep["energy_defect"])
    rate_point = -float(np.polyfit(seps, np.log(point), 1)[0])
    rate_ener = -float(np.polyfit(seps, np.log(ener), 1)[0])
    checks.append(_check("elliptic decoupling decay rate",
                         rate_point, 0.8 * sigma0, ">="))
    checks.append(_check("energy decoupling decay rate",
                         rate_ener, 0.8 * sigma0, ">="))

    return {"name": "expansion", "elapsed": time.perf_counter() - t_start,
            "ortho_worst": worst_ortho, "defects": defects,
            "alpha_exponent": exponent, "sigma0": sigma0,
            "decay_rates": {"pointwise": rate_point, "energy": rate_ener},
            "checks": checks}
