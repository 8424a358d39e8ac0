"""Batch command line: ``simulate``, ``invert``, ``check`` and ``sweep``.

Scenarios are JSON files (``schema_version: 1``) validated against the
schemas shipped in ``postincident/schemas``.  Exit codes: 0 success,
2 invalid configuration or input file, 3 numerical failure, 4 a uniqueness
condition needed by the inversion is violated (the report is still written).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import dataclass, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
from scipy import integrate

from . import conditions as cond
from ._jsonutil import dumps, plain
from .errors import (
    ConditionViolated,
    ConfigError,
    InsufficientModes,
    InverseSourceError,
    InvalidDomain,
    NotOnBoundary,
    PointOutsideDomain,
    UnsupportedCount,
    UnsupportedDomain,
)
from .forward import DEFAULT_N_MAX, ObservationRecord, add_noise, observe, solve_heat, solve_wave, time_grid, write_csv
from .inverse import (
    MOMENT_ZERO_TOL,
    OnsetScenario,
    ReconstructionReport,
    fit_dirichlet_series,
    heat_cutoff,
    recover_f_heat,
    recover_f_wave,
    recover_mu_heat,
    recover_mu_wave_1d,
    recover_t0,
)
from .sources import StepDecay, spatial_profile_from_dict, time_profile_from_dict
from .spectra import Disk, Interval, Rectangle, enumerate_spectrum, project

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CONDITION = 0, 2, 3, 4
CONFIG_ERRORS = (ConfigError, InvalidDomain, PointOutsideDomain, NotOnBoundary, UnsupportedDomain, UnsupportedCount)
SWEEP_COLUMNS = ["delta", "cutoff", "N", "seed", "t0", "error", "residual", "alpha"]


# ---------------------------------------------------------------------------
# schemas
# ---------------------------------------------------------------------------


def load_schema(name: str) -> dict:
    text = resources.files("postincident").joinpath("schemas", f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate(payload, name: str) -> None:
    """Raise ``jsonschema.ValidationError`` if ``payload`` does not match schema ``name``."""
    jsonschema.Draft202012Validator(load_schema(name)).validate(plain(payload))


# ---------------------------------------------------------------------------
# scenario
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    """A validated configuration with its library objects built."""

    config: dict
    equation: str
    domain: object
    spectrum: object
    modes: int
    mu: object
    f: object
    observation: dict
    noise: dict
    inversion: dict | None
    sweep: dict | None

    @property
    def T(self) -> float:
        return float(self.mu.support_end)

    @property
    def points(self):
        pts = self.observation.get("points")
        if pts is None:
            return None
        return [p if isinstance(p, list) else [p] for p in pts]

    def times(self) -> np.ndarray:
        obs = self.observation
        if obs["kind"] == "state":
            return np.array([float(obs["time"])])
        return time_grid(float(obs["T1"]), float(obs["T2"]), float(obs["dt"]))

    @property
    def post_incident(self) -> bool:
        return not self.observation.get("allow_pre_incident", False)

    def with_mu(self, mu) -> "Scenario":
        return replace(self, mu=mu)


def _domain_from_dict(d: dict):
    shape = d["shape"]
    bc = d.get("bc", "dirichlet")
    if shape == "interval":
        return Interval(float(d.get("length", 1.0)), bc)
    if shape == "rectangle":
        if "lengths" not in d:
            raise ConfigError("rectangle needs 'lengths'")
        aspect = d.get("aspect", "irrational")
        aspect = None if aspect == "irrational" else Fraction(aspect)
        return Rectangle(float(d["lengths"][0]), float(d["lengths"][1]), aspect, bc)
    return Disk(bc)


def _check_observation(obs: dict, T: float) -> None:
    kind = obs["kind"]
    pre = obs.get("allow_pre_incident", False)
    if kind == "state":
        if "time" not in obs:
            raise ConfigError("state observation needs 'time'")
        if not pre and not obs["time"] > T:
            raise ConfigError(
                f"standing assumption T < t violated: state time {obs['time']:g} is not after the source end T = {T:g}"
            )
        return
    for key in ("T1", "T2", "dt", "points"):
        if key not in obs:
            raise ConfigError(f"{kind} observation needs {key!r}")
    T1, T2 = float(obs["T1"]), float(obs["T2"])
    if not T1 < T2:
        raise ConfigError(f"observation window needs T1 < T2 (got T1 = {T1:g}, T2 = {T2:g})")
    if not pre and not T < T1:
        raise ConfigError(
            f"standing assumption T < T1 < T2 violated: T1 = {T1:g} is not after the source end T = {T:g} "
            "(set allow_pre_incident for data from the incident period)"
        )


def build_scenario(config: dict, seed: int | None = None) -> Scenario:
    """Validate ``config`` against the schema and construct its objects."""
    try:
        validate(config, "config")
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from None
    domain = _domain_from_dict(config["domain"])
    modes = int(config.get("modes", DEFAULT_N_MAX))
    spectrum = enumerate_spectrum(domain, modes)
    mu = time_profile_from_dict(config["mu"])
    f = spatial_profile_from_dict(config["f"], domain)
    obs = dict(config["observation"])
    _check_observation(obs, float(mu.support_end))
    noise = {"delta": 0.0, "model": "gaussian", "seed": 0, **config.get("noise", {})}
    if seed is not None:
        noise["seed"] = int(seed)
    return Scenario(
        config, config["equation"], domain, spectrum, modes, mu, f, obs, noise, config.get("inversion"), config.get("sweep")
    )


def load_config(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None


# ---------------------------------------------------------------------------
# library-level operations used by the commands
# ---------------------------------------------------------------------------


def solve(scn: Scenario):
    solver = solve_heat if scn.equation == "heat" else solve_wave
    return solver(scn.spectrum, scn.f, scn.mu, scn.modes)


def simulate(scn: Scenario, noisy: bool = True) -> tuple[ObservationRecord, object]:
    """Forward solution and the observation record the scenario describes."""
    sol = solve(scn)
    noise = scn.noise if noisy else None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rec = observe(sol, scn.observation["kind"], scn.times(), scn.points, noise, scn.post_incident)
    return rec, sol


def _require(scn: Scenario, equation: str, kind: str, method: str) -> None:
    if scn.equation != equation:
        raise ConfigError(f"{method} needs the {equation} equation")
    if scn.observation["kind"] != kind:
        raise ConfigError(f"{method} needs {kind} observations")


def _true_coefficients(scn: Scenario) -> np.ndarray:
    return project(scn.spectrum, scn.f, scn.modes).flat()


def _auto_eta(scn: Scenario, state: np.ndarray, delta: float) -> float:
    # expected norm of the additive noise: delta * max|u| per coefficient
    size = float(np.max(np.abs(state), initial=0.0)) * math.sqrt(state.size)
    eta = max(delta, 1e-15) * size if size > 0 else 1e-15
    return min(eta, 0.5)


def invert(scn: Scenario, record: ObservationRecord, delta: float | None = None, cutoff=None) -> ReconstructionReport:
    """Run the scenario's configured inversion on ``record``.

    ``delta`` is the noise level used by ``eta: "auto"``; ``cutoff`` overrides
    the configured spectral cutoff (an int, or ``"rule"``/``"half"``/``"double"``).
    """
    inv = scn.inversion
    if inv is None:
        raise ConfigError("config has no 'inversion' section")
    method = inv["method"]
    delta = scn.noise["delta"] if delta is None else delta
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if method == "recover_t0":
            _require(scn, "heat", "point", method)
            if not isinstance(scn.mu, StepDecay):
                raise ConfigError("recover_t0 needs a step_decay time profile")
            if "bracket" not in inv:
                raise ConfigError("recover_t0 needs 'bracket'")
            onset = OnsetScenario(
                scn.spectrum, scn.f, scn.mu.a, tuple(scn.points[0]), float(record.times[0]), scn.mu.shape, scn.modes
            )
            return recover_t0(onset, float(record.values[0, 0]), tuple(inv["bracket"]), inv.get("xtol", 1e-9), scn.mu.t0)

        if method == "recover_mu_heat":
            _require(scn, "heat", "point", method)
            N = int(inv.get("n_terms", 6))
            x0 = scn.points[0]
            T = float(inv.get("T", scn.T))
            fit = fit_dirichlet_series(record, scn.spectrum, N)
            pv = project(scn.spectrum, scn.f, N, point=x0).point_values
            invisible = [j + 1 for j in np.flatnonzero(np.abs(pv) <= MOMENT_ZERO_TOL * np.max(np.abs(pv)))]
            if invisible:
                raise ConditionViolated(f"modes {invisible} are invisible at x0", "1.12", invisible)
            report = recover_mu_heat(
                fit.moments(pv, T),
                int(inv.get("grid", 101)),
                inv.get("alpha"),
                inv.get("delta_target"),
                inv.get("penalty", "difference"),
                scn.mu,
            )
            report.diagnostics["dirichlet_fit"] = fit.to_dict()
            return report

        if method == "recover_mu_wave_1d":
            _require(scn, "wave", "point", method)
            if not isinstance(scn.domain, Interval):
                raise ConfigError("recover_mu_wave_1d works on an interval")
            return recover_mu_wave_1d(
                record,
                scn.domain,
                scn.f,
                float(scn.points[0][0]),
                float(inv.get("T", scn.T)),
                int(inv.get("n_modes", 64)),
                inv.get("T1"),
                bool(inv.get("override", False)),
                int(inv.get("n_grid", 1001)),
                scn.mu,
            )

        if method == "recover_f_heat":
            _require(scn, "heat", "state", method)
            state = record.values[0]
            eta = inv.get("eta", "auto")
            eta = _auto_eta(scn, state, delta) if eta == "auto" else float(eta)
            smooth = float(inv.get("smoothness", 1.0))
            theta = inv.get("theta")
            chosen = inv.get("cutoff") if cutoff is None else cutoff
            if isinstance(chosen, str):
                rule = heat_cutoff(eta, smooth, 0.5 * smooth if theta is None else float(theta), scn.spectrum.dim)
                chosen = {"rule": None, "half": max(rule // 2, 1), "double": 2 * rule}[chosen]
            return recover_f_heat(
                state, scn.mu, scn.spectrum, float(record.times[0]), eta, smooth, theta, inv.get("M"), chosen,
                _true_coefficients(scn),
            )

        if method == "recover_f_wave":
            _require(scn, "wave", "state", method)
            K = record.values.shape[1] // 2
            return recover_f_wave(
                record.values[0, :K], record.values[0, K:], scn.mu, scn.spectrum, float(record.times[0]),
                _true_coefficients(scn),
            )
    raise ConfigError(f"unknown inversion method {method!r}")


def _undecidable(condition: str, reason: str) -> cond.ConditionReport:
    return cond.ConditionReport(condition, cond.UNDECIDABLE, {"reason": reason})


def check_conditions(scn: Scenario) -> list:
    """Condition reports applicable to the scenario's equation and data kind."""
    kind = scn.observation["kind"]
    J = scn.modes
    x0 = scn.points[0] if kind == "point" else None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ex = cond.exceptional_set(scn.spectrum, scn.f, x0, J)
        reports = []
        if scn.equation == "heat":
            if kind == "point":
                reports.append(cond.muntz_classify(scn.spectrum, ex.point, "1.12"))
            else:
                reports.append(cond.muntz_classify(scn.spectrum, ex.projection, "1.22"))
            reports += cond.check_moment_conditions(scn.spectrum, scn.mu, J, which=("1.29",))
            return reports
        which, excluded = ("1.16/1.17", ex.point) if kind == "point" else ("1.23/1.25", ex.projection)
        try:
            reports.append(cond.density_limit(scn.spectrum, excluded, scn.T, which))
        except InsufficientModes as exc:
            reports.append(_undecidable(which, str(exc)))
        if kind == "point" and isinstance(scn.domain, Interval):
            obs = scn.observation
            reports.append(
                cond.check_theorem3_conditions(scn.domain, float(x0[0]), scn.f, scn.T, float(obs["T1"]), float(obs["T2"]), J)
            )
        reports += cond.check_moment_conditions(scn.spectrum, scn.mu, J, which=("1.31",))
    return reports


def _method_conditions(scn: Scenario, method: str) -> list:
    """Conditions attached to an inversion report."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if method == "recover_f_heat":
            return cond.check_moment_conditions(scn.spectrum, scn.mu, scn.modes, which=("1.29",))
        if method == "recover_f_wave":
            return cond.check_moment_conditions(scn.spectrum, scn.mu, scn.modes, which=("1.31",))
        if method in ("recover_mu_heat", "recover_mu_wave_1d"):
            return check_conditions(scn)
    return []


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def profile_csv(report: ReconstructionReport) -> str:
    rec = report.recovered
    if "mu" in rec:
        return write_csv(rec["grid"], rec["mu"], header=["s", "mu"])
    if "coefficients" in rec:
        c = np.asarray(rec["coefficients"], dtype=float)
        return write_csv(np.arange(1, c.size + 1), c, header=["j", "coefficient"])
    return "t0\n%.17g\n" % rec["t0"]


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if v is None:
        return "nan"
    return "%.17g" % v


def svg_chart(series: dict, xlabel: str, ylabel: str, title: str, width: int = 640, height: int = 420) -> str:
    """Plain SVG polyline chart; ``series`` maps a label to (x, y) arrays.
    Non-finite points are dropped."""
    pad_l, pad_r, pad_t, pad_b = 70, 130, 40, 55
    clean = {}
    for label, (xs, ys) in series.items():
        pts = [(float(x), float(y)) for x, y in zip(xs, ys) if math.isfinite(x) and math.isfinite(y)]
        clean[label] = pts
    allp = [p for pts in clean.values() for p in pts]
    if allp:
        x0, x1 = min(p[0] for p in allp), max(p[0] for p in allp)
        y0, y1 = min(p[1] for p in allp), max(p[1] for p in allp)
    else:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = width - pad_l - pad_r, height - pad_t - pad_b

    def sx(x):
        return pad_l + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return pad_t + (y1 - y) / (y1 - y0) * ph

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="15">{title}</text>',
        f'<line x1="{pad_l}" y1="{pad_t + ph}" x2="{pad_l + pw}" y2="{pad_t + ph}" stroke="black"/>',
        f'<line x1="{pad_l}" y1="{pad_t}" x2="{pad_l}" y2="{pad_t + ph}" stroke="black"/>',
    ]
    for i in range(5):
        xv = x0 + (x1 - x0) * i / 4
        yv = y0 + (y1 - y0) * i / 4
        out.append(f'<line x1="{sx(xv):.2f}" y1="{pad_t + ph}" x2="{sx(xv):.2f}" y2="{pad_t + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{sx(xv):.2f}" y="{pad_t + ph + 20}" text-anchor="middle" font-size="11">{xv:.3g}</text>')
        out.append(f'<line x1="{pad_l - 5}" y1="{sy(yv):.2f}" x2="{pad_l}" y2="{sy(yv):.2f}" stroke="black"/>')
        out.append(f'<text x="{pad_l - 8}" y="{sy(yv) + 4:.2f}" text-anchor="end" font-size="11">{yv:.3g}</text>')
    out.append(f'<text x="{pad_l + pw / 2:.1f}" y="{height - 12}" text-anchor="middle" font-size="13">{xlabel}</text>')
    out.append(
        f'<text x="16" y="{pad_t + ph / 2:.1f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 16 {pad_t + ph / 2:.1f})">{ylabel}</text>'
    )
    for i, (label, pts) in enumerate(clean.items()):
        color = colors[i % len(colors)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}"/>')
        for x, y in pts:
            out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="{color}"/>')
        ly = pad_t + 16 * i + 8
        out.append(f'<line x1="{pad_l + pw + 12}" y1="{ly}" x2="{pad_l + pw + 32}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{pad_l + pw + 36}" y="{ly + 4}" font-size="11">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def source_l2_norm(mu) -> float:
    """``||mu||`` in L2(0, T), by adaptive quadrature between breakpoints."""
    pts = mu.breakpoints()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        sq = sum(integrate.quad(lambda s: float(mu(s)) ** 2, a, b, limit=200)[0] for a, b in zip(pts[:-1], pts[1:]))
    return math.sqrt(max(sq, 0.0))


def cmd_simulate(config_path, out, seed: int | None = None) -> int:
    scn = build_scenario(load_config(config_path), seed)
    rec, sol = simulate(scn)
    out = Path(out)
    peak = float(np.max(np.abs(rec.values), initial=0.0))
    mu_norm = source_l2_norm(scn.mu)
    summary = {
        "columns": int(rec.values.shape[1]),
        "command": "simulate",
        "domain": scn.domain.to_dict(),
        "eigenvalues": scn.spectrum.eigenvalues[: min(10, scn.modes)],
        "equation": scn.equation,
        "f": scn.config["f"],
        "max_abs_value": peak,
        "modes": scn.modes,
        "mu": scn.mu.to_dict(),
        "noise": rec.noise,
        "observation": scn.observation,
        "samples": int(rec.times.size),
        "schema_version": SCHEMA_VERSION,
        # empirical size of the data relative to the source; no bound is asserted
        "value_to_source_ratio": peak / mu_norm if mu_norm > 0 else None,
    }
    validate(summary, "summary")
    _write(out / "record.csv", rec.to_csv())
    _write(out / "summary.json", dumps(summary))
    return EXIT_OK


def read_record(scn: Scenario, data_path) -> ObservationRecord:
    try:
        text = Path(data_path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read data {data_path}: {exc.strerror}") from None
    pts = tuple(tuple(float(c) for c in p) for p in scn.points) if scn.points else ()
    return ObservationRecord.from_csv(
        text, scn.observation["kind"], points=pts, source_end=scn.T, post_incident=scn.post_incident
    )


def cmd_invert(config_path, data_path, out, seed: int | None = None) -> int:
    scn = build_scenario(load_config(config_path), seed)
    if scn.inversion is None:
        raise ConfigError("config has no 'inversion' section")
    record = read_record(scn, data_path)
    method = scn.inversion["method"]
    out = Path(out)
    payload = {
        "command": "invert",
        "conditions": [],
        "failure": None,
        "method": method,
        "report": None,
        "schema_version": SCHEMA_VERSION,
        "status": "ok",
    }
    code = EXIT_OK
    try:
        report = invert(scn, record)
        payload["report"] = report.to_dict()
    except ConditionViolated as exc:
        payload["status"] = "condition_violated"
        payload["failure"] = {
            "condition": exc.condition,
            "indices": [int(i) for i in exc.indices],
            "message": str(exc),
            "type": type(exc).__name__,
        }
        report = None
        code = EXIT_CONDITION
    payload["conditions"] = [r.to_dict() for r in _method_conditions(scn, method)]
    validate(payload, "report")
    _write(out / "report.json", dumps(payload))
    if report is not None:
        _write(out / "profile.csv", profile_csv(report))
    if code == EXIT_CONDITION:
        print(f"condition {payload['failure']['condition']} violated: {payload['failure']['message']}", file=sys.stderr)
    return code


def cmd_check(config_path, out=None, seed: int | None = None) -> int:
    scn = build_scenario(load_config(config_path), seed)
    reports = [r.to_dict() for r in check_conditions(scn)]
    validate(reports, "conditions")
    text = dumps(reports)
    sys.stdout.write(text)
    if out is not None:
        _write(Path(out), text)
    return EXIT_OK


def _sweep_rows(scn: Scenario) -> list[dict]:
    sw = scn.sweep or {}
    deltas = sw.get("deltas", [scn.noise["delta"]])
    seeds = sw.get("seeds", [scn.noise["seed"]])
    cutoffs = sw.get("cutoffs", [None])
    method = scn.inversion["method"]
    if "t0s" in sw:
        if not isinstance(scn.mu, StepDecay):
            raise ConfigError("a t0 sweep needs a step_decay time profile")
        t0s = [float(t) for t in sw["t0s"]]
    else:
        t0s = [None]
    rows = []
    for t0 in t0s:
        case = scn if t0 is None else scn.with_mu(StepDecay(t0, scn.mu.a, scn.mu.shape))
        clean, _ = simulate(case, noisy=False)
        for delta in deltas:
            for cut in cutoffs:
                for seed in seeds:
                    values = add_noise(clean.values, case.noise["model"], float(delta), int(seed))
                    rec = replace(clean, values=values)
                    report = invert(case, rec, float(delta), cut)
                    if method == "recover_t0":
                        truth = case.mu.t0
                        error = abs(report.recovered["t0"] - truth)
                    else:
                        error = report.error["relative"] if report.error else float("nan")
                    rows.append(
                        {
                            "N": report.cutoff,
                            "alpha": report.regularization.get("alpha"),
                            "cutoff": "config" if cut is None else str(cut),
                            "delta": float(delta),
                            "error": float(error),
                            "residual": float(report.residual_norm),
                            "seed": int(seed),
                            "t0": t0,
                        }
                    )
    return rows


def _medians(rows: list[dict]) -> list[dict]:
    groups: dict = {}
    for r in rows:
        groups.setdefault((r["t0"], r["delta"], r["cutoff"]), []).append(r["error"])
    out = []
    for (t0, delta, cut), errs in groups.items():
        out.append(
            {
                "cutoff": cut,
                "delta": delta,
                "median_error": float(np.median(errs)),
                "runs": len(errs),
                "t0": "nan" if t0 is None else t0,
            }
        )
    return out


def cmd_sweep(config_path, out, seed: int | None = None) -> int:
    config = load_config(config_path)
    scn = build_scenario(config, seed)
    if scn.inversion is None:
        raise ConfigError("config has no 'inversion' section")
    sw = scn.sweep or {}
    for axis in ("deltas", "seeds", "cutoffs", "t0s"):
        if axis in sw and not sw[axis]:
            raise ConfigError(f"sweep axis {axis!r} is empty")
    if seed is not None and "seeds" in sw:
        scn = replace(scn, sweep={**sw, "seeds": [int(seed) + s for s in sw["seeds"]]})
    rows = _sweep_rows(scn)
    medians = _medians(rows)
    out = Path(out)

    lines = [",".join(SWEEP_COLUMNS)]
    for r in rows:
        lines.append(",".join(_fmt(r[c]) for c in SWEEP_COLUMNS))
    _write(out / "sweep.csv", "\n".join(lines) + "\n")

    deltas = sorted({m["delta"] for m in medians if m["delta"] > 0})
    if len(deltas) >= 2:
        series = {}
        for m in sorted(medians, key=lambda m: m["delta"]):
            if m["delta"] > 0 and m["median_error"] > 0:
                xs, ys = series.setdefault(f"cutoff {m['cutoff']}", ([], []))
                xs.append(math.log10(m["delta"]))
                ys.append(math.log10(m["median_error"]))
        svg = svg_chart(series, "log10 noise level delta", "log10 median error", "error versus noise")
    else:
        series = {}
        for m in medians:
            x = m["t0"] if m["t0"] != "nan" else m["delta"]
            xs, ys = series.setdefault(f"cutoff {m['cutoff']}", ([], []))
            xs.append(float(x))
            ys.append(math.log10(max(m["median_error"], 1e-300)))
        xlabel = "onset time t0" if "t0s" in sw else "noise level delta"
        svg = svg_chart(series, xlabel, "log10 median error", "sweep error")
    _write(out / "sweep.svg", svg)

    summary = {
        "columns": SWEEP_COLUMNS,
        "command": "sweep",
        "medians": medians,
        "method": scn.inversion["method"],
        "rows": len(rows),
        "schema_version": SCHEMA_VERSION,
    }
    validate(summary, "sweep")
    _write(out / "sweep.json", dumps(summary))
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="postincident", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, needs_data, needs_out in (
        ("simulate", False, True),
        ("invert", True, True),
        ("check", False, False),
        ("sweep", False, True),
    ):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="scenario JSON file")
        if needs_data:
            sp.add_argument("--data", required=True, help="observation CSV")
        sp.add_argument("--out", required=needs_out, help="output directory (check: optional JSON file)")
        sp.add_argument("--seed", type=int, default=None, help="noise seed override")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args.config, args.out, args.seed)
        if args.command == "invert":
            return cmd_invert(args.config, args.data, args.out, args.seed)
        if args.command == "check":
            return cmd_check(args.config, args.out, args.seed)
        return cmd_sweep(args.config, args.out, args.seed)
    except CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConditionViolated as exc:
        print(f"condition {exc.condition} violated: {exc}", file=sys.stderr)
        return EXIT_CONDITION
    except (InverseSourceError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
