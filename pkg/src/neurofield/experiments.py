"""Experiment configuration, runners and verification suites behind the CLI."""

from __future__ import annotations

import configparser
import csv
import hashlib
import io
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
from scipy.integrate import quad as integrate_quad
from scipy.optimize import brentq

from . import __version__
from .analytic import (
    K_quadrature_eval,
    K_series_eval,
    gaussian_negative_control,
    locate_zeros,
    remainder_S,
)
from .control import ControlProblem, linear_control, small_time_control, tau_max, two_phase_control, write_schedule
from .dynamics import integrate, stationary_state, sup_bound_g1
from .errors import NeuroFieldError
from .grid import Field, GridSpec, kernel_spectrum, multiplier_values, save_field
from .kernels import DoGParams, constants, dog_radial, kernel_field, omega_hat, omega_hat_multiplier
from .response import parse_response
from .stimuli import (
    GroupElement,
    Stimulus,
    act,
    binarize,
    field_to_image,
    generate,
    pattern_to_image,
    warp_to_retina,
    write_pbm,
    write_pgm,
    write_png,
)

log = logging.getLogger(__name__)

EXPERIMENTS = (
    "simulate",
    "stationary",
    "kernel-zeros",
    "heaviside-zeros",
    "mackay-rays",
    "mackay-target",
    "control",
    "equivariance",
)
SUITES = ("kernels", "analytic", "dynamics", "control", "symmetry", "figures")

_CANON = DoGParams.canonical()


@dataclass
class ExperimentConfig:
    """Flat experiment description; see :data:`SECTIONS` for the file layout."""

    experiment: str = "mackay-rays"
    L: float = 10.0
    n: int = 2000
    kappa: float = _CANON.kappa
    sigma1: float = _CANON.sigma1
    sigma2: float = _CANON.sigma2
    mu: float = 1.0
    response: str = "linear"
    stimulus: str = ""
    lam: float = 2.5
    epsilon: float = 0.025
    theta: float = 2.0
    offsets: tuple = (9.75, 9.75, 0.25)
    tol: float = 1e-13
    max_iter: int = 2000
    dt: float = 0.01
    t_final: float = 20.0
    out_px: int = 512
    r_max: float = math.exp(6.0)
    angular_scale: float = 0.0
    png: bool = False
    k_max: int = 20
    probe_x2: float = 0.1
    window_lo: float = 2.5
    window_hi: float = 6.0
    seam_margin: float = 1.0
    horizon: float = 0.1
    total_time: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        if not self.stimulus:
            self.stimulus = {
                "mackay-rays": "mackay_rays",
                "mackay-target": "mackay_target",
            }.get(self.experiment, "funnel")
        if not self.angular_scale:
            # target rays live at x2 = 0 and x2 = +-L, so the full circle must cover [-L, L]
            self.angular_scale = self.L / math.pi if self.experiment == "mackay-target" else 2 / math.pi

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.L, self.n, 2)

    @property
    def params(self) -> DoGParams:
        return DoGParams(self.kappa, self.sigma1, self.sigma2)

    @property
    def kind(self):
        return parse_response(self.response)

    @property
    def stim(self) -> Stimulus:
        return Stimulus(self.stimulus, self.lam, self.epsilon, self.theta, self.offsets)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["offsets"] = list(self.offsets)
        return d


SECTIONS = {
    "experiment": {"kind": "experiment"},
    "grid": {"L": "L", "n": "n"},
    "kernel": {"kappa": "kappa", "sigma1": "sigma1", "sigma2": "sigma2"},
    "model": {"mu": "mu", "response": "response"},
    "stimulus": {"kind": "stimulus", "lambda": "lam", "epsilon": "epsilon", "theta": "theta",
                 "offsets": "offsets"},
    "solver": {"tol": "tol", "max_iter": "max_iter", "dt": "dt", "t_final": "t_final"},
    "output": {"out_px": "out_px", "r_max": "r_max", "angular_scale": "angular_scale", "png": "png"},
    "analysis": {"k_max": "k_max", "probe_x2": "probe_x2", "window_lo": "window_lo",
                 "window_hi": "window_hi", "seam_margin": "seam_margin"},
    "control": {"horizon": "horizon", "total_time": "total_time", "seed": "seed"},
}


def _coerce(name, text):
    kinds = {f.name: f.type for f in fields(ExperimentConfig)}
    t = kinds[name]
    text = text.strip()
    if t in ("float", float):
        return float(eval_number(text))
    if t in ("int", int):
        return int(text)
    if t in ("bool", bool):
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if t in ("tuple", tuple):
        return tuple(float(eval_number(v)) for v in text.split(","))
    return text


def eval_number(text: str) -> float:
    """Parse a float, also accepting ``exp(6)``, ``pi`` and ``e`` style constants."""
    try:
        return float(text)
    except ValueError:
        pass
    allowed = {"pi": math.pi, "e": math.e, "exp": math.exp, "sqrt": math.sqrt, "log": math.log}
    if any(ch.isalpha() and ch not in "abcdefghijklmnopqrstuvwxyz" for ch in text) or "__" in text:
        raise ValueError(f"cannot parse number {text!r}")
    return float(eval(text, {"__builtins__": {}}, allowed))  # noqa: S307 - restricted namespace


def load_config(path=None, overrides=(), experiment: str | None = None) -> ExperimentConfig:
    """Read an INI file, then apply ``section.key=value`` overrides."""
    parser = configparser.ConfigParser()
    parser.optionxform = str
    if path is not None:
        with open(path) as fh:
            parser.read_file(fh)
    for item in overrides:
        key, sep, value = item.partition("=")
        section, dot, name = key.strip().partition(".")
        if not sep or not dot:
            raise ValueError(f"override must look like section.key=value, got {item!r}")
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, name, value)
    values = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ValueError(f"unknown config section [{section}]")
        for key, text in parser.items(section):
            if key not in SECTIONS[section]:
                raise ValueError(f"unknown key {key!r} in [{section}]")
            attr = SECTIONS[section][key]
            values[attr] = _coerce(attr, text)
    if experiment is not None and "experiment" not in values:
        values["experiment"] = experiment
    return ExperimentConfig(**values)


def config_to_ini(cfg: ExperimentConfig) -> str:
    """Render a config back to the INI layout."""
    parser = configparser.ConfigParser()
    parser.optionxform = str
    d = cfg.to_dict()
    for section, keys in SECTIONS.items():
        parser.add_section(section)
        for key, attr in keys.items():
            v = d[attr]
            parser.set(section, key, ", ".join(repr(x) for x in v) if isinstance(v, list) else str(v))
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


# -- artifacts ------------------------------------------------------------------

def sha256_of(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class ArtifactSet:
    """Collects output files and writes the run manifest."""

    def __init__(self, out_dir, cfg: ExperimentConfig | None = None):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.cfg = cfg
        self.files: dict[str, Path] = {}
        self.reports: dict = {}

    def add(self, path) -> Path:
        """Register a written file; the manifest keys artifacts by file name."""
        path = Path(path)
        self.files[path.name] = path
        return path

    def path(self, filename: str) -> Path:
        return self.dir / filename

    def image(self, stem: str, img, png: bool = False):
        self.add(write_pgm(self.path(f"{stem}.pgm"), img))
        if png:
            self.add(write_png(self.path(f"{stem}.png"), img))

    def field(self, stem: str, u: Field):
        self.add(save_field(self.path(f"{stem}.nfld"), u))

    def write_manifest(self, status: str = "ok", error: str | None = None, elapsed: float = 0.0) -> Path:
        manifest = {
            "package": "neurofield",
            "version": __version__,
            "status": status,
            "error": error,
            "config": self.cfg.to_dict() if self.cfg else None,
            "reports": self.reports,
            "elapsed_seconds": round(elapsed, 3),
            "artifacts": {
                name: {"sha256": sha256_of(p), "bytes": p.stat().st_size}
                for name, p in sorted(self.files.items())
            },
        }
        path = self.dir / "manifest.json"
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_json_default) + "\n")
        return path


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _fmt(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return v


# -- analysis helpers -------------------------------------------------------------

def sign_alternations(x: np.ndarray, y: np.ndarray):
    """Linear-interpolated zero crossings of samples ``y(x)``."""
    s = np.sign(y)
    idx = np.nonzero(s[1:] * s[:-1] < 0)[0]
    return np.array([x[i] - y[i] * (x[i + 1] - x[i]) / (y[i + 1] - y[i]) for i in idx])


@dataclass
class AfterimageProfile:
    x1: np.ndarray
    difference: np.ndarray
    zeros: np.ndarray
    x2: float

    @property
    def count(self) -> int:
        return int(self.zeros.size)

    @property
    def spacings(self) -> np.ndarray:
        return np.diff(self.zeros)


def afterimage_profile(with_rays: Field, funnel_only: Field, x2: float = 0.1,
                       window=(2.5, 6.0)) -> AfterimageProfile:
    """Difference of two stationary states along the row nearest ``x2``."""
    spec = with_rays.spec
    j = spec.index_of(x2)
    x = spec.axis()
    diff = (with_rays - funnel_only).values[:, j]
    m = (x >= window[0]) & (x <= window[1])
    return AfterimageProfile(x[m], diff[m], sign_alternations(x[m], diff[m]), float(x[j]))


def random_smooth_field(spec: GridSpec, rng, modes: int = 8, max_wavenumber: int = 6) -> Field:
    """Random trigonometric polynomial on the periodic grid with sup-norm 1."""
    X = spec.mesh()
    v = np.zeros(spec.shape)
    for _ in range(modes):
        k = rng.integers(-max_wavenumber, max_wavenumber + 1, size=spec.d) / (2 * spec.L)
        phase = rng.uniform(0, 2 * np.pi)
        v += rng.uniform(-1, 1) * np.cos(2 * np.pi * sum(ki * xi for ki, xi in zip(k, X)) + phase)
    return Field(spec, v / np.max(np.abs(v)))


EQUIVARIANCE_ELEMENTS = (
    GroupElement((37, -11), "identity"),
    GroupElement((0, 0), "reflect-x1"),
    GroupElement((5, 0), "reflect-x2"),
    GroupElement((0, 0), "rotate-90"),
    GroupElement((-8, 13), "rotate-180"),
)


# -- experiment runners -------------------------------------------------------------

def run(cfg: ExperimentConfig, out_dir) -> ArtifactSet:
    """Run one experiment, writing artifacts and ``manifest.json`` to ``out_dir``.

    On failure the partial artifacts are kept, a manifest with status
    ``failed`` is written and the exception is re-raised.
    """
    arts = ArtifactSet(out_dir, cfg)
    start = time.perf_counter()
    runner = _RUNNERS[cfg.experiment]
    try:
        runner(cfg, arts)
    except Exception as exc:
        arts.write_manifest("failed", f"{type(exc).__name__}: {exc}", time.perf_counter() - start)
        raise
    arts.write_manifest("ok", None, time.perf_counter() - start)
    return arts


def _report(rep):
    return {
        "iterations": rep.iterations,
        "residual": rep.residual,
        "contraction_ratio_estimate": rep.contraction_ratio_estimate,
    }


def _render_state(cfg, arts, name, u):
    arts.field(name, u)
    arts.image(name, field_to_image(u), cfg.png)
    pattern = binarize(u)
    arts.add(write_pbm(arts.path(f"{name}_binary.pbm"), pattern_to_image(pattern)))
    retina = warp_to_retina(pattern, cfg.out_px, cfg.r_max, cfg.angular_scale)
    arts.image(f"{name}_retina", retina, cfg.png)
    return pattern


def _run_stationary(cfg, arts):
    spec, kind, params = cfg.grid, cfg.kind, cfg.params
    I = generate(cfg.stim, spec)
    arts.image("input", field_to_image(I), cfg.png)
    arts.image("input_retina", warp_to_retina(binarize(I), cfg.out_px, cfg.r_max, cfg.angular_scale), cfg.png)
    a, rep = stationary_state(I, cfg.mu, kind, params, tol=cfg.tol, max_iter=cfg.max_iter)
    arts.reports["stationary"] = _report(rep)
    _render_state(cfg, arts, "stationary", a)
    return I, a


def _run_mackay(cfg, arts):
    I, a = _run_stationary(cfg, arts)
    if cfg.stimulus != "mackay_rays":
        return
    base = Stimulus("funnel", cfg.lam)
    a_f, rep = stationary_state(generate(base, cfg.grid), cfg.mu, cfg.kind, cfg.params,
                                tol=cfg.tol, max_iter=cfg.max_iter)
    arts.reports["funnel_stationary"] = _report(rep)
    prof = afterimage_profile(a, a_f, cfg.probe_x2, (cfg.window_lo, min(cfg.window_hi, cfg.L - cfg.seam_margin)))
    arts.add(write_csv(arts.path("afterimage.csv"), ["x1", "difference"],
                                     zip(prof.x1, prof.difference)))
    arts.reports["afterimage"] = {
        "x2_row": prof.x2,
        "sign_alternations": prof.count,
        "zeros": prof.zeros.tolist(),
        "spacings": prof.spacings.tolist(),
        "reference_spacing": 1 / math.sqrt(2 * math.pi / 3),
    }


def _run_simulate(cfg, arts):
    spec = cfg.grid
    I = generate(cfg.stim, spec)
    rng = np.random.default_rng(cfg.seed)
    a0 = random_smooth_field(spec, rng)
    res = integrate(a0, I, cfg.mu, cfg.kind, cfg.params, t_final=cfg.t_final, dt=cfg.dt,
                    log_every=max(1, int(round(0.1 / cfg.dt))))
    arts.image("input", field_to_image(I), cfg.png)
    _render_state(cfg, arts, "final", res.final)
    if res.decay_log:
        arts.add(write_csv(arts.path("decay.csv"), ["t", "distance_sup"], res.decay_log))
        d0 = res.decay_log[0][1]
        rate = 1 - cfg.mu * constants(cfg.params).l1_norm
        worst = max((d / d0) / math.exp(-rate * t) for t, d in res.decay_log) if d0 > 0 else 0.0
        arts.reports["decay"] = {"predicted_rate": rate, "worst_ratio_to_bound": worst}


def _run_zeros(cfg, arts):
    kind = "K" if cfg.experiment == "kernel-zeros" else "b"
    table = locate_zeros(kind, cfg.k_max)
    name = f"zeros_{table.kind}"
    arts.add(table.to_csv(arts.path(f"{name}.csv")))
    arts.reports[name] = {"all_pass": table.all_pass, "rows": len(table.rows)}
    if not table.all_pass:
        raise NeuroFieldError(f"{name}: bound violated in at least one row")


def _run_control(cfg, arts):
    spec = cfg.grid
    rng = np.random.default_rng(cfg.seed)
    a0, a1 = random_smooth_field(spec, rng), random_smooth_field(spec, rng)
    kind = cfg.kind
    lin = linear_control(ControlProblem(a0, a1, cfg.total_time, cfg.mu, params=cfg.params))
    short = small_time_control(ControlProblem(a0, a1, cfg.horizon, cfg.mu, kind, cfg.params))
    both = two_phase_control(ControlProblem(a0, a1, cfg.total_time, cfg.mu, kind, cfg.params), cfg.horizon)
    arts.add(write_schedule(lin, arts.dir, "linear"))
    arts.add(write_schedule(short, arts.dir, "short"))
    arts.add(write_schedule(both, arts.dir, "two_phase"))
    for stem, res in (("linear", lin), ("short", short), ("two_phase", both)):
        for i in range(len(res.schedule)):
            arts.add(arts.path(f"{stem}_segment{i}.nfld"))
    arts.reports["control"] = {
        "tau_max": tau_max(cfg.mu, constants(cfg.params).mu_0),
        "linear_endpoint_error": lin.endpoint_error,
        "short_endpoint_error": short.endpoint_error,
        "short_iterations": short.iterations,
        "two_phase_endpoint_error": both.endpoint_error,
    }


def equivariance_errors(spec, mu, kind, params, inputs, elements=EQUIVARIANCE_ELEMENTS, tol=1e-12):
    """``||Psi(T_g I) - T_g Psi(I)||_inf`` for every (input, element) pair."""
    rows = []
    for i, I in enumerate(inputs):
        out, _ = stationary_state(I, mu, kind, params, tol=tol)
        for g in elements:
            moved, _ = stationary_state(act(g, I), mu, kind, params, tol=tol)
            rows.append((i, g.orthogonal, g.translation, (moved - act(g, out)).sup()))
    return rows


def _run_equivariance(cfg, arts):
    rng = np.random.default_rng(cfg.seed)
    inputs = [random_smooth_field(cfg.grid, rng) for _ in range(5)]
    rows = equivariance_errors(cfg.grid, cfg.mu, cfg.kind, cfg.params, inputs, tol=cfg.tol)
    arts.add(write_csv(
        arts.path("equivariance.csv"), ["input", "orthogonal", "translation", "error_sup"],
        [(i, o, f"{t[0]} {t[1]}", e) for i, o, t, e in rows],
    ))
    worst = max(r[3] for r in rows)
    arts.reports["equivariance"] = {"max_error": worst, "limit": 10 * cfg.tol}


_RUNNERS = {
    "simulate": _run_simulate,
    "stationary": _run_stationary,
    "kernel-zeros": _run_zeros,
    "heaviside-zeros": _run_zeros,
    "mackay-rays": _run_mackay,
    "mackay-target": _run_mackay,
    "control": _run_control,
    "equivariance": _run_equivariance,
}


# -- verification suites ------------------------------------------------------------------

@dataclass
class Check:
    name: str
    value: float
    limit: float
    passed: bool


@dataclass
class SuiteResult:
    suite: str
    checks: list = field(default_factory=list)
    files: list = field(default_factory=list)

    def add(self, name, value, limit, passed=None, at_least=False):
        if passed is None:
            passed = value >= limit if at_least else value <= limit
        ok = bool(passed)
        self.checks.append(Check(name, float(value), float(limit), ok))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def write(self, out_dir) -> Path:
        path = Path(out_dir) / f"verify_{self.suite}.csv"
        write_csv(path, ["check", "value", "limit", "pass"],
                  [(c.name, c.value, c.limit, c.passed) for c in self.checks])
        self.files.append(path)
        return path


def _golden_max(fn, lo, hi, tol=1e-12):
    g = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    while b - a > tol:
        if fn(c) > fn(d):
            b, d = d, c
            c = b - g * (b - a)
        else:
            a, c = c, d
            d = a + g * (b - a)
    return 0.5 * (a + b)


def _verify_kernels(out, res):
    c = constants(_CANON)
    res.add("mu_0 == 2", abs(c.mu_0 - 2), 1e-12)
    res.add("mu_c == 4", abs(c.mu_c - 4), 1e-12)
    radial = lambda r: abs(float(dog_radial(_CANON, 2, r))) * 2 * math.pi * r
    root = brentq(lambda r: float(dog_radial(_CANON, 2, r)), 1e-3, 2.0)
    quad_l1 = integrate_quad(radial, 0, root, epsabs=1e-14)[0] + integrate_quad(radial, root, np.inf, epsabs=1e-14)[0]
    res.add("l1 closed form vs radial quadrature", abs(quad_l1 - c.l1_norm), 1e-6)
    # an argmax of a smooth function is only resolvable to about sqrt(machine eps)
    q = _golden_max(lambda r: float(omega_hat(_CANON, 1, r)), 0.0, 3.0)
    res.add("q_c vs golden-section argmax", abs(q - c.q_c), 1e-7)
    spec = GridSpec(10.0, 512, 2)
    disc = kernel_spectrum(kernel_field(_CANON, spec)).real
    closed = multiplier_values(omega_hat_multiplier(_CANON), spec)
    res.add("sampled kernel spectrum vs closed form", np.max(np.abs(disc - closed)), 1e-8)


def _verify_analytic(out, res):
    for kind in ("K", "b"):
        table = locate_zeros(kind, 20)
        res.files.append(table.to_csv(Path(out) / f"zeros_{table.kind}.csv"))
        res.add(f"zero table {table.kind} failing rows", sum(not r.passed for r in table.rows), 0)
    xs = np.geomspace(0.1, 5, 50)
    q = np.array([K_quadrature_eval(x) for x in xs])
    res.add("K series vs quadrature", np.max(np.abs(K_series_eval(xs) - q)), 1e-8)
    res.add("remainder |S| bound", np.max(np.abs(remainder_S(xs))), math.sqrt(6) / (3 * math.pi**2))
    g = gaussian_negative_control()
    res.add("Gaussian kernel sign changes", g.gaussian_sign_changes, 0)
    res.add("DoG kernel sign changes", g.dog_sign_changes, 10, at_least=True)


def _verify_dynamics(out, res):
    from .response import LINEAR, RATIONAL

    spec = GridSpec(10.0, 512, 2)
    I = generate(Stimulus("funnel"), spec)
    a, rep = stationary_state(I, 1.0, LINEAR, _CANON, tol=1e-13)
    w = float(omega_hat(_CANON, 2, np.array([0.0, 2.5])))
    res.add("linear stationary vs closed form", (a - I / (1 - w)).sup(), 1e-8)
    rays = generate(Stimulus("mackay_rays", epsilon=0.025, theta=2.0), spec)
    _, rep = stationary_state(rays, 1.0, RATIONAL, _CANON, tol=1e-12)
    res.add("contraction ratio (rational)", rep.contraction_ratio_estimate, 0.55)
    rng = np.random.default_rng(3)
    small = GridSpec(10.0, 128, 2)
    worst = 0.0
    for _ in range(10):
        a0 = random_smooth_field(small, rng) * 3
        I = random_smooth_field(small, rng)
        ev = integrate(a0, I, 1.0, RATIONAL, _CANON, t_final=10.0, dt=0.01, log_every=10)
        d0 = ev.decay_log[0][1]
        worst = max(worst, max(d / d0 / math.exp(-0.5 * t) for t, d in ev.decay_log))
    res.add("decay ratio to e^{-t/2}", worst, 1.02)
    g1 = sup_bound_g1(1.0, 2.0, RATIONAL)
    res.add("g1 rational", abs(g1 - (0.5 + math.sqrt(4.25)) / 2), 1e-12)


def _verify_control(out, res):
    from .response import RATIONAL

    rng = np.random.default_rng(5)
    spec = GridSpec(10.0, 256, 2)
    worst = 0.0
    for _ in range(3):
        r = linear_control(ControlProblem(random_smooth_field(spec, rng), random_smooth_field(spec, rng), 1.0))
        worst = max(worst, r.endpoint_error)
    res.add("linear control endpoint (256^2)", worst, 1e-8)
    spec = GridSpec(10.0, 64, 2)
    tau = 0.1
    res.add("tau within admissible bound", tau, tau_max(1.0, 2.0), tau < tau_max(1.0, 2.0))
    worst = 0.0
    for _ in range(3):
        r = small_time_control(ControlProblem(random_smooth_field(spec, rng), random_smooth_field(spec, rng),
                                              tau, kind=RATIONAL))
        worst = max(worst, r.endpoint_error)
    res.add("nonlinear small-time endpoint (64^2)", worst, 1e-4)


def _verify_symmetry(out, res):
    from .response import RATIONAL, TANH

    spec = GridSpec(10.0, 128, 2)
    rng = np.random.default_rng(7)
    inputs = [random_smooth_field(spec, rng) for _ in range(5)]
    rows = equivariance_errors(spec, 1.0, RATIONAL, _CANON, inputs, tol=1e-12)
    res.add("equivariance max error", max(r[3] for r in rows), 1e-11)
    spec = GridSpec(10.0, 512, 2)
    I = generate(Stimulus("funnel"), spec)
    a, _ = stationary_state(I, 0.8, TANH, _CANON, tol=1e-13)
    res.add("funnel state x1-variance", float(np.max(np.var(a.values, axis=0))), 1e-10)


def _verify_figures(out, res):
    from .response import LINEAR, RATIONAL

    spec = GridSpec(10.0, 512, 2)
    rays = generate(Stimulus("mackay_rays", epsilon=0.025, theta=2.0), spec)
    funnel = generate(Stimulus("funnel"), spec)
    counts, patterns = {}, {}
    ref = 1 / math.sqrt(2 * math.pi / 3)
    for kind in (LINEAR, RATIONAL):
        a, _ = stationary_state(rays, 1.0, kind, _CANON, tol=1e-14, max_iter=3000)
        f, _ = stationary_state(funnel, 1.0, kind, _CANON, tol=1e-14, max_iter=3000)
        prof = afterimage_profile(a, f)
        counts[kind.name] = prof.count
        patterns[kind.name] = binarize(a)
        res.add(f"afterimage sign alternations ({kind.name})", prof.count, 5, at_least=True)
        if prof.count > 1:
            res.add(f"afterimage spacing deviation ({kind.name})",
                    float(np.max(np.abs(prof.spacings - ref)) / ref), 0.15)
    res.add("rational keeps the alternation count", abs(counts["linear"] - counts["rational"]), 0)
    res.add("rays binary mismatch linear vs rational", patterns["linear"].mismatch(patterns["rational"]), 0.02)
    target = generate(Stimulus("mackay_target", epsilon=0.025), spec)
    pats = [binarize(stationary_state(target, 1.0, k, _CANON, tol=1e-13)[0]) for k in (LINEAR, RATIONAL)]
    res.add("target binary mismatch linear vs rational", pats[0].mismatch(pats[1]), 0.02)


_SUITES = {
    "kernels": _verify_kernels,
    "analytic": _verify_analytic,
    "dynamics": _verify_dynamics,
    "control": _verify_control,
    "symmetry": _verify_symmetry,
    "figures": _verify_figures,
}


def verify(suite: str, out_dir) -> SuiteResult:
    """Run a named verification suite and write ``verify_<suite>.csv``."""
    if suite not in _SUITES:
        raise ValueError(f"unknown suite {suite!r}; expected one of {SUITES}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    res = SuiteResult(suite)
    _SUITES[suite](out_dir, res)
    res.write(out_dir)
    return res
