"""Config-driven experiment runner.

Configs are flat ``key = value`` text with dotted section prefixes.  Every
run is a pure function of (config, seed): rerunning writes byte-identical
output files.  Wall-clock goes to stderr only, never into the artifacts.

Exit codes: 0 all checks passed, 1 at least one check failed, 2 bad config.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import esm, finite_oracle as fo, measure as ms
from .dyadic import DyadicTime, dyadic
from .errors import StochFlowError
from .flow_core import ScalarExpFlow
from .keyed import chain, chain_offsets
from .models import nse as nse_mod
from .models.linear import FourierForcing, LinearOUModel
from .models.nse import NSEModel, default_nse_config
from .wiener import (
    NoiseRealization,
    OUConfig,
    RealizationStream,
    increments,
    ou_at,
    wiener_at,
)

EXPERIMENTS = (
    "noise",
    "pullback",
    "attractor",
    "esm-verify",
    "oracle",
    "nse",
    "counterexamples",
)


@dataclass
class Verdict:
    name: str
    passed: bool
    value: object = None
    threshold: object = None
    stderr: float | None = None
    note: str = ""

    def to_dict(self):
        out = {"name": self.name, "passed": bool(self.passed)}
        for key in ("value", "threshold", "stderr", "note"):
            val = getattr(self, key)
            if val not in (None, ""):
                out[key] = float(val) if isinstance(val, (int, float, np.floating)) and key != "note" else val
        return out


@dataclass
class RunReport:
    kind: str
    config: dict
    verdicts: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)  # name -> text content
    wall_clock: float = 0.0

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def summary_json(self) -> str:
        payload = {
            "kind": self.kind,
            "config": self.config,
            "passed": self.passed,
            "verdicts": [v.to_dict() for v in self.verdicts],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


# -- config handling -----------------------------------------------------------

def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ValueError(f"line {lineno}: empty key")
        out[key] = _coerce(val)
    return out


def _coerce(val: str):
    low = val.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(val)
    except ValueError:
        pass
    try:
        return float(val)
    except ValueError:
        pass
    return val


_COMMON_KEYS = {"kind", "seed", "out", "jobs"}
_ALLOWED = {
    "noise": {"ensemble", "level", "ou_rate", "intervals"},
    "pullback": {"model.rate", "model.sigma", "model.level", "model.forcing_amp",
                 "schedule.depth", "schedule.coeff", "schedule.tol", "particles",
                 "realization", "anchor"},
    "attractor": {"model.rate", "model.sigma", "model.level", "model.forcing_amp",
                  "schedule.depth", "schedule.tol", "box_radius", "box_points",
                  "realization", "anchor", "deterministic_rate"},
    "esm-verify": {"model.rate", "model.sigma", "model.level", "model.forcing_amp",
                   "ensemble", "particles", "depth", "anchor"},
    "oracle": {"depth"},
    "nse": {"viscosity", "resolution", "level", "forcing_amp", "noise_amp",
            "ou_rate", "steps", "lookbacks", "realization"},
    "counterexamples": set(),
}


def validate_config(cfg: dict) -> str | None:
    kind = cfg.get("kind")
    if kind not in EXPERIMENTS:
        return f"unknown experiment kind: {kind!r}"
    if "seed" not in cfg or not isinstance(cfg["seed"], int):
        return "config must carry an integer 'seed' (no implicit randomness)"
    allowed = _ALLOWED[kind] | _COMMON_KEYS
    for key in cfg:
        if key not in allowed:
            return f"unknown config key for kind {kind!r}: {key!r}"
    return None


# -- deterministic parallel map --------------------------------------------------

def _pmap(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def _w1_values(args):
    seed, lo, hi = args
    one = dyadic(1)
    return [wiener_at(NoiseRealization(seed, i), 0, one) for i in range(lo, hi)]


def _pullback_points(args):
    model, t, schedule, seed, lo, hi = args
    out = []
    for i in range(lo, hi):
        omega = NoiseRealization(seed, i)
        out.append(float(esm.pullback_point(model, omega, t, schedule)[0]))
    return out


def _chunks(n: int, jobs: int):
    size = max(1, n // max(jobs, 1))
    lo = 0
    while lo < n:
        hi = min(n, lo + size)
        yield lo, hi
        lo = hi


# -- experiments -----------------------------------------------------------------

def _fmt_rows(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(f"{v:.17g}" if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


def run_noise(cfg: dict) -> RunReport:
    seed = cfg["seed"]
    n = cfg.get("ensemble", 10_000)
    level = cfg.get("level", 6)
    jobs = cfg.get("jobs", 1)
    report = RunReport("noise", cfg)
    one, zero, two = dyadic(1), dyadic(0), dyadic(2)

    chunks = [(seed, lo, hi) for lo, hi in _chunks(n, jobs)]
    w1 = np.concatenate([np.asarray(c) for c in _pmap(_w1_values, chunks, jobs)])
    var = float(w1.var(ddof=1))
    report.verdicts.append(Verdict("wiener.w1_variance", 0.94 <= var <= 1.06, var, "[0.94, 1.06]"))
    report.tables["w1_samples.csv"] = _fmt_rows(("index", "w1"), list(enumerate(map(float, w1))))

    sums = np.array([
        [float(np.sum(increments(NoiseRealization(seed, i), 0, zero, one, level))),
         float(np.sum(increments(NoiseRealization(seed, i), 0, one, two, level)))]
        for i in range(min(n, 10_000))
    ])
    corr = float(np.corrcoef(sums[:, 0], sums[:, 1])[0, 1])
    report.verdicts.append(Verdict("wiener.disjoint_interval_corr", abs(corr) <= 0.05, corr, 0.05))

    n_int = cfg.get("intervals", 1000)
    base = chain(seed, 0xA11CE)
    rng_keys = chain_offsets(base, np.arange(3 * n_int)).reshape(n_int, 3)
    bit_exact = 0
    omega = NoiseRealization(seed, 0)
    for row in rng_keys:
        lv = int(row[0] % 10)
        start_num = int(row[1] % (1 << 10)) - (1 << 9)
        s = DyadicTime(start_num, lv)
        e = DyadicTime(start_num + 1, lv)
        coarse = increments(omega, 0, s, e, lv)
        children = increments(omega, 0, s, e, lv + 1)
        if coarse.shape == (1,) and float(np.sum(children)) == float(coarse[0]):
            bit_exact += 1
    report.verdicts.append(
        Verdict("wiener.refinement_bit_exact", bit_exact == n_int, bit_exact, n_int)
    )

    ou_cfg = OUConfig(rate=cfg.get("ou_rate", 1.0), level=level)
    z0 = np.array([ou_at(NoiseRealization(seed, i), 0, ou_cfg, zero) for i in range(min(n, 4000))])
    z1 = np.array([ou_at(NoiseRealization(seed, i), 0, ou_cfg, one) for i in range(min(n, 4000))])
    target = ou_cfg.stationary_variance
    ou_var = float(z0.var(ddof=1))
    report.verdicts.append(
        Verdict("wiener.ou_variance", abs(ou_var - target) <= 0.1 * target, ou_var, target)
    )
    ac = float(np.corrcoef(z0, z1)[0, 1])
    expected = float(np.exp(-ou_cfg.rate))
    report.verdicts.append(
        Verdict("wiener.ou_autocorr_lag1", abs(ac - expected) <= 0.05, ac, expected)
    )
    return report


def _linear_model(cfg: dict) -> LinearOUModel:
    return LinearOUModel(
        rate=cfg.get("model.rate", 0.5),
        sigma=cfg.get("model.sigma", 0.3),
        forcing=FourierForcing(cos_coeffs=(cfg.get("model.forcing_amp", 1.0),)),
        grid_level=cfg.get("model.level", 6),
    )


def run_pullback(cfg: dict) -> RunReport:
    seed = cfg["seed"]
    report = RunReport("pullback", cfg)
    model = _linear_model(cfg)
    t = dyadic(cfg.get("anchor", 0))
    depth = cfg.get("schedule.depth", 6)
    coeff = cfg.get("schedule.coeff", 2)
    tol = cfg.get("schedule.tol", 0.02)
    schedule = esm.PullbackSchedule.geometric(t, depth, dyadic(coeff), tol)
    omega = NoiseRealization(seed, cfg.get("realization", 0))
    family = ms.GaussianFamily(lambda _t: 0.0, 1.0, salt=seed)
    n_particles = cfg.get("particles", 1 << 10)
    mu, diag = esm.pullback_measure(model, omega, schedule, family, n_particles)
    report.verdicts.append(Verdict("esm.pullback_converged", diag.converged,
                                   len(diag.distances), note=diag.message))
    rows = list(zip([s.value for s in diag.starts_used[1:]], map(float, diag.distances)))
    report.tables["distances.csv"] = _fmt_rows(("start", "distance"), rows)
    report.tables["measure.tsv"] = ms.to_table(mu)

    spread_ok = True
    worst = 0.0
    for s in diag.starts_used:
        rho = family.sample(s, n_particles)
        pushed = esm.evolve_batch(model, omega, s, t, rho.particles)
        got = ms.EmpiricalMeasure(pushed, rho.weights).spread()
        want = float(np.exp(-model.rate * (t.value - s.value))) * rho.spread()
        rel = abs(got - want) / max(want, 1e-300)
        worst = max(worst, rel)
        spread_ok = spread_ok and rel <= 0.1
    report.verdicts.append(Verdict("esm.spread_contraction", spread_ok, worst, 0.1))
    return report


def run_attractor(cfg: dict) -> RunReport:
    seed = cfg["seed"]
    report = RunReport("attractor", cfg)
    det_rate = cfg.get("deterministic_rate", -1.0)
    model = ScalarExpFlow(det_rate, grid_level=cfg.get("model.level", 6))
    t = dyadic(cfg.get("anchor", 0))
    s_earlier = t - 1
    tol = cfg.get("schedule.tol", 0.02)
    schedule_t = esm.PullbackSchedule.geometric(t, cfg.get("schedule.depth", 6), 1, tol)
    schedule_s = esm.PullbackSchedule.geometric(s_earlier, cfg.get("schedule.depth", 6), 1, tol)
    radius = cfg.get("box_radius", 1.0)
    pts = cfg.get("box_points", 33)
    box = np.linspace(-radius, radius, pts)[:, None]
    omega = NoiseRealization(seed, cfg.get("realization", 0))
    cloud_t = esm.pullback_attractor(model, omega, t, [box], schedule_t)
    cloud_s = esm.pullback_attractor(model, omega, s_earlier, [box], schedule_s)
    report.verdicts.append(Verdict("esm.attractor_converged", cloud_t.converged,
                                   len(cloud_t.history)))
    collapse = float(np.max(np.abs(cloud_t.particles))) if det_rate < 0 else float("nan")
    if det_rate < 0:
        report.verdicts.append(Verdict("esm.attractor_collapse_to_zero",
                                       collapse <= tol, collapse, tol))
    if cloud_t.converged and cloud_s.converged:
        resid = esm.attractor_invariance_residual(model, omega, s_earlier, t, cloud_s, cloud_t)
        report.verdicts.append(Verdict("esm.attractor_invariance", resid <= 2 * tol,
                                       resid, 2 * tol))
    report.tables["semidistance.csv"] = _fmt_rows(
        ("step", "semidistance"), list(enumerate(map(float, cloud_t.history)))
    )
    report.tables["cloud.tsv"] = ms.to_table(ms.EmpiricalMeasure.equal_weight(cloud_t.particles))
    return report


def run_esm_verify(cfg: dict) -> RunReport:
    seed = cfg["seed"]
    report = RunReport("esm-verify", cfg)
    cfg = {**{"model.sigma": 1.0}, **cfg}
    model = _linear_model(cfg)
    ensemble = cfg.get("ensemble", 400)
    n_particles = cfg.get("particles", 2000)
    jobs = cfg.get("jobs", 1)
    t = dyadic(cfg.get("anchor", 0))
    depth = cfg.get("depth", 7)
    schedule = esm.PullbackSchedule.geometric(t, depth, 2)

    chunks = [(model, t, schedule, seed, lo, hi) for lo, hi in _chunks(ensemble, jobs)]
    points = np.concatenate([np.asarray(c) for c in _pmap(_pullback_points, chunks, jobs)])
    family = ms.RandomMeasure({i: ms.EmpiricalMeasure.dirac([points[i]])
                               for i in range(ensemble)}, ensemble)
    mean_measure = esm.esm_mean(family)

    m_t = model.periodic_mean(t.value)
    std = model.stationary_std
    draw_a = ms.gaussian_draw(m_t, std, ensemble, salt=chain(seed, 1))
    draw_b = ms.gaussian_draw(m_t, std, ensemble, salt=chain(seed, 2))
    draw_c = ms.gaussian_draw(m_t, std, ensemble, salt=chain(seed, 3))
    bound = 4.0 * ms.distance(draw_a, draw_b)
    d_mean = ms.distance(mean_measure, draw_c)
    report.verdicts.append(Verdict("esm.mean_matches_analytic", d_mean <= bound,
                                   d_mean, bound))

    # residual checks use their own particle count, hence their own baseline
    base_a = ms.gaussian_draw(m_t, std, n_particles, salt=chain(seed, 11))
    base_b = ms.gaussian_draw(m_t, std, n_particles, salt=chain(seed, 12))
    resid_bound = 4.0 * ms.distance(base_a, base_b)
    analytic = ms.GaussianFamily(model.periodic_mean, std, salt=chain(seed, 4))
    two_pi = DyadicTime(int(round(2 * np.pi * 2**model.grid_level)), model.grid_level)
    stream = RealizationStream(chain(seed, 5))
    resid = esm.esm_residual(model, analytic, [(t - two_pi, t)], n_particles, stream)
    report.verdicts.append(Verdict("esm.residual_analytic_family", resid <= resid_bound,
                                   resid, resid_bound))

    wrong = ms.GaussianFamily(model.periodic_mean, std * np.sqrt(2.0), salt=chain(seed, 6))
    stream2 = RealizationStream(chain(seed, 7))
    resid_wrong = esm.esm_residual(model, wrong, [(t - two_pi, t)], n_particles, stream2)
    report.verdicts.append(Verdict("esm.residual_rejects_wrong_family",
                                   resid_wrong > 10.0 * resid_bound, resid_wrong,
                                   10.0 * resid_bound))

    chunks2 = [(model, t + two_pi, esm.PullbackSchedule.geometric(t + two_pi, depth, 2),
                chain(seed, 8), lo, hi) for lo, hi in _chunks(ensemble, jobs)]
    pts2 = np.concatenate([np.asarray(c) for c in _pmap(_pullback_points, chunks2, jobs)])
    d_period = ms.distance(
        ms.EmpiricalMeasure.equal_weight(points[:, None]),
        ms.EmpiricalMeasure.equal_weight(pts2[:, None]),
    )
    report.verdicts.append(Verdict("esm.periodicity", d_period <= bound, d_period, bound))
    report.tables["pullback_points.csv"] = _fmt_rows(
        ("index", "at_anchor", "at_anchor_plus_period"),
        [(i, float(points[i]), float(pts2[i])) for i in range(ensemble)],
    )
    return report


def run_oracle(cfg: dict) -> RunReport:
    report = RunReport("oracle", cfg)
    depth = cfg.get("depth", 12)

    flow = fo.two_state_noisy()
    probs, partition, measures, f_table = fo.independence_scenario_from_flow(flow, 4, 2)
    cond = fo.conditional_expectation_check(probs, partition, measures, f_table)
    report.verdicts.append(Verdict("finite_oracle.conditional_expectation",
                                   cond.independence_ok and cond.max_residual == 0,
                                   str(cond.max_residual), "0"))

    mart = fo.ff_martingale_check(flow, 0, (fo.Fraction(0), fo.Fraction(1)), depth)
    report.verdicts.append(Verdict("finite_oracle.martingale_all_cylinders",
                                   mart.ok, str(mart.max_residual), "0",
                                   note=f"{mart.cylinders_checked} cylinders"))

    chap = fo.chapman_check(flow, -3, 1, 4)
    report.verdicts.append(Verdict("finite_oracle.chapman_exact", chap))

    pull = fo.ff_pullback(flow, 0, min(depth, 10))
    report.verdicts.append(Verdict("finite_oracle.pullback_mean_is_family",
                                   pull.mean_matches_family and pull.stabilized,
                                   str(pull.tv_gap), "0"))

    sol = fo.ff_esm_solve(fo.cyclic_doubly_stochastic(3))
    uniform = fo.ExactMeasure.uniform(3)
    report.verdicts.append(Verdict("finite_oracle.doubly_stochastic_uniform",
                                   sol.unique and sol.family[0] == uniform))

    sol2 = fo.ff_esm_solve(fo.period_two_alternating())
    ok2 = sol2.unique and fo.apply_kernel(
        sol2.family[1], fo.one_step_kernel(fo.period_two_alternating(), 1)
    ) == sol2.family[0]
    report.verdicts.append(Verdict("finite_oracle.period_two_family_exact", ok2))

    ident = fo.ff_esm_solve(fo.identity_finite_flow(2))
    report.verdicts.append(Verdict("finite_oracle.identity_multiplicity",
                                   (not ident.unique) and len(ident.extremes) == 2,
                                   note=ident.note))
    return report


def run_counterexamples(cfg: dict) -> RunReport:
    report = RunReport("counterexamples", cfg)
    for name, scenario in sorted(fo.counterexamples().items()):
        report.verdicts.append(Verdict(f"finite_oracle.{name}", scenario.ok,
                                       note=scenario.claim))
    return report


def run_nse(cfg: dict) -> RunReport:
    seed = cfg["seed"]
    report = RunReport("nse", cfg)
    res = cfg.get("resolution", 16)
    nse_cfg = default_nse_config(
        resolution=res,
        viscosity=cfg.get("viscosity", 0.2),
        level=cfg.get("level", 6),
        forcing_field=nse_mod.taylor_green(res, cfg.get("forcing_amp", 0.5)),
        noise_modes=nse_mod.default_noise_modes(res, cfg.get("noise_amp", 0.05)),
        ou_rate=cfg.get("ou_rate", 1.0),
    )
    model = NSEModel(nse_cfg)
    omega = NoiseRealization(seed, cfg.get("realization", 0), num_components=max(model.n_noise, 1))

    u = nse_mod.random_divfree(res, seed)
    v = nse_mod.random_divfree(res, seed + 1)
    scale = max(np.max(np.abs(u)), 1e-300)
    proj_twice = nse_mod.leray_project(nse_mod.leray_project(u))
    report.verdicts.append(Verdict(
        "models.leray_idempotent",
        float(np.max(np.abs(proj_twice - nse_mod.leray_project(u)))) <= 1e-13 * scale,
    ))
    ortho = abs(nse_mod.inner_h(nse_mod.bilinear_b(u, v), v))
    ortho_bound = 1e-10 * np.sqrt(nse_mod.norm_v_sq(u)) * nse_mod.norm_v_sq(v)
    report.verdicts.append(Verdict("models.advection_orthogonality",
                                   ortho <= ortho_bound, ortho, ortho_bound))
    tg = nse_mod.taylor_green(res)
    tg_resid = float(np.max(np.abs(nse_mod.bilinear_b(tg, tg))))
    report.verdicts.append(Verdict("models.taylor_green_advection_vanishes",
                                   tg_resid <= 1e-10, tg_resid, 1e-10))

    steps = cfg.get("steps", 128)
    t0 = dyadic(0)
    t1 = DyadicTime(steps, nse_cfg.level)
    u_t, trace = model.evolve_trace(omega, t0, t1, nse_mod.taylor_green(res, 1.0))
    report.verdicts.append(Verdict(
        "models.reality_preserved_bitwise", nse_mod.reality_residual(u_t) == 0.0
    ))
    div_rel = nse_mod.divergence_residual(u_t) / max(np.max(np.abs(u_t)), 1e-300)
    report.verdicts.append(Verdict("models.incompressibility", div_rel <= 1e-12,
                                   div_rel, 1e-12))
    report.verdicts.append(Verdict(
        "models.poincare_exact", bool(np.all(trace.v_h_sq <= trace.v_v_sq))
    ))
    diag = nse_mod.energy_diagnostics(nse_cfg, trace, model.beta_hat)
    rows = list(zip(map(float, diag.times), map(float, diag.v_h_sq),
                    map(float, diag.v_v_sq), map(float, diag.z_abs_sum),
                    map(float, diag.lhs), map(float, diag.g_surrogate),
                    map(float, diag.slack)))
    report.tables["energy.csv"] = _fmt_rows(
        ("time", "v_h_sq", "v_v_sq", "z_abs_sum", "lhs", "g_surrogate", "slack"), rows
    )

    lookbacks = cfg.get("lookbacks", "8,16,32")
    lbs = tuple(int(x) for x in str(lookbacks).split(","))
    absorb = nse_mod.absorbing_radius_experiment(model, omega, dyadic(0), lookbacks=lbs)
    deepest = lbs[-1]
    report.verdicts.append(Verdict("models.absorbing_radius_agreement",
                                   absorb["gaps"][deepest] <= 0.05,
                                   absorb["gaps"][deepest], 0.05,
                                   note=f"t_star={absorb['t_star']}"))
    report.tables["absorbing.csv"] = _fmt_rows(
        ("lookback", "radius_small", "radius_large", "gap"),
        [(lb, float(absorb["radii"][lb][0]), float(absorb["radii"][lb][1]),
          float(absorb["gaps"][lb])) for lb in lbs],
    )
    return report


_RUNNERS = {
    "noise": run_noise,
    "pullback": run_pullback,
    "attractor": run_attractor,
    "esm-verify": run_esm_verify,
    "oracle": run_oracle,
    "nse": run_nse,
    "counterexamples": run_counterexamples,
}


def run_experiment(cfg: dict) -> RunReport:
    problem = validate_config(cfg)
    if problem:
        raise StochFlowError(problem)
    started = time.monotonic()
    report = _RUNNERS[cfg["kind"]](cfg)
    report.wall_clock = time.monotonic() - started
    return report


def write_outputs(report: RunReport, out_dir: str):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        fh.write(report.summary_json())
    for name, content in sorted(report.tables.items()):
        with open(os.path.join(out_dir, name), "w") as fh:
            fh.write(content)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="stochflow",
                                     description="run a configured experiment")
    parser.add_argument("--config", help="path to a key = value config file")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument("--jobs", type=int, default=None, help="worker processes")
    parser.add_argument("--list-experiments", action="store_true")
    args = parser.parse_args(argv)

    if args.list_experiments:
        for kind in EXPERIMENTS:
            print(kind)
        return 0
    if not args.config:
        print("error: --config is required (or --list-experiments)", file=sys.stderr)
        return 2
    try:
        with open(args.config) as fh:
            cfg = parse_config_text(fh.read())
    except (OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.jobs is not None:
        cfg["jobs"] = args.jobs
    problem = validate_config(cfg)
    if problem:
        print(f"error: {problem}", file=sys.stderr)
        return 2
    try:
        report = run_experiment(cfg)
    except StochFlowError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    out_dir = args.out or cfg.get("out")
    if out_dir:
        write_outputs(report, out_dir)
    for v in report.verdicts:
        status = "PASS" if v.passed else "FAIL"
        extra = f" value={v.value}" if v.value is not None else ""
        print(f"{status} {v.name}{extra}")
    print(f"# wall-clock {report.wall_clock:.2f}s", file=sys.stderr)
    return 0 if report.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
