"""Run configuration: flat ``key = value`` text with dotted section names.

Blank lines and ``#`` comments are ignored.  Lists are comma-separated.
Every key has a default, so an empty file describes the Example 1 (m=1)
run with hbar = 6, ubar = -1.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import ConfigError
from .integrator import IntegratorConfig
from .model import PRESETS, Normalization, OrbitModel, preset

DEFAULTS = {
    "model.preset": "example1-m1",
    "model.kind": "",
    "model.d1": "",
    "model.d2": "",
    "model.A2": "",
    "model.A3": "",
    "model.dims": "",
    "model.lambdas": "",
    "model.epsilon": "",
    "model.C": "",
    "normalization": "c_zero",
    "run.mode": "physical",
    "startup.hbar": "6",
    "startup.ubar": "-1",
    "startup.order": "6",
    "startup.t0": "1e-2",
    "launch.delta": "1e-6",
    "launch.seed": "0",
    "launch.c_w": "1",
    "launch.c_y": "1",
    "integrator.h": "1e-3",
    "integrator.end": "20",
    "integrator.adaptive": "false",
    "integrator.rel_tol": "1e-10",
    "integrator.max_steps": "10000000",
    "integrator.blowup_norm": "1e12",
    "integrator.floor_guard": "1e-14",
    "integrator.decimation": "1",
    "integrator.min_horizon": "",
    "monitors": "all",
    "fits.tail_fraction": "0.2",
    "fits.min_points": "50",
    "output.trajectory": "trajectory.csv",
    "output.monitors": "monitors.csv",
    "output.fits": "fits.csv",
    "output.summary": "summary.txt",
    "output.plots": "true",
    "sweep.hbar": "",
    "sweep.ubar": "",
    "sweep.seed": "",
}

MODES = ("physical", "phase", "einstein")


def parse_text(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _float(key, v):
    try:
        return float(v)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {v!r}") from None


def _int(key, v):
    try:
        return int(v)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {v!r}") from None


def _bool(key, v):
    low = v.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{key}: expected true/false, got {v!r}")


def _floats(key, v):
    return [_float(key, p.strip()) for p in v.split(",") if p.strip()]


def build_model(kv: dict) -> tuple[OrbitModel, str]:
    """Return the model and a label (preset name or 'custom')."""
    get = lambda k: kv.get(k, DEFAULTS[k])
    kind = get("model.kind").lower()
    if kind in ("", "preset"):
        name = get("model.preset")
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
        model = preset(name)
        label = name
    elif kind in ("two_summand", "two-summand"):
        model = OrbitModel.two_summand(_int("model.d1", get("model.d1")), _int("model.d2", get("model.d2")),
                                       _float("model.A2", get("model.A2")), _float("model.A3", get("model.A3")))
        label = "custom"
    elif kind == "warped":
        dims = [int(x) for x in _floats("model.dims", get("model.dims"))]
        lams = _floats("model.lambdas", get("model.lambdas"))
        if not dims or len(dims) != len(lams):
            raise ConfigError("model.dims and model.lambdas must be non-empty lists of equal length")
        model = OrbitModel.warped(dims, lams)
        label = "custom"
    else:
        raise ConfigError(f"model.kind must be preset, two_summand or warped, got {kind!r}")
    eps = get("model.epsilon")
    C = get("model.C")
    if eps or C:
        model = replace(model, epsilon=_float("model.epsilon", eps) if eps else model.epsilon,
                        C=_float("model.C", C) if C else model.C)
    return model, label


def parse_model_spec(spec: str) -> OrbitModel:
    """Parse the compact ``dims=1,2;lambdas=0,1;epsilon=1`` form used on the command line."""
    kv = {}
    for part in spec.split(";"):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ConfigError(f"model spec: expected key=value, got {part!r}")
        k, v = (p.strip() for p in part.split("=", 1))
        if k not in ("dims", "lambdas", "epsilon", "C"):
            raise ConfigError(f"model spec: unknown key {k!r}")
        kv["model." + k] = v
    kv["model.kind"] = "warped"
    return build_model(kv)[0]


@dataclass
class RunConfig:
    model: OrbitModel
    label: str = "example1-m1"
    normalization: Normalization = Normalization.C_ZERO
    mode: str = "physical"
    hbar: tuple = (6.0,)
    ubar: float = -1.0
    order: int = 6
    t0: float = 1e-2
    delta: float = 1e-6
    seed: int = 0
    c_w: float = 1.0
    c_y: float = 1.0
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    min_horizon: float | None = None
    monitors: tuple = ()
    tail_fraction: float = 0.2
    min_points: int = 50
    out_trajectory: str = "trajectory.csv"
    out_monitors: str = "monitors.csv"
    out_fits: str = "fits.csv"
    out_summary: str = "summary.txt"
    plots: bool = True
    sweep_hbar: tuple = ()
    sweep_ubar: tuple = ()
    sweep_seed: tuple = ()


def build(kv: dict) -> RunConfig:
    from .monitors import PHYSICAL_MONITORS

    get = lambda k: kv.get(k, DEFAULTS[k])
    model, label = build_model(kv)
    try:
        norm = Normalization(get("normalization").lower())
    except ValueError:
        raise ConfigError(f"normalization must be one of {[n.value for n in Normalization]}") from None
    mode = get("run.mode").lower()
    if mode not in MODES:
        raise ConfigError(f"run.mode must be one of {MODES}, got {mode!r}")
    mons = get("monitors").strip()
    if mons.lower() == "all":
        mon_names = tuple(PHYSICAL_MONITORS)
    else:
        mon_names = tuple(m.strip() for m in mons.split(",") if m.strip())
        unknown = [m for m in mon_names if m not in PHYSICAL_MONITORS]
        if unknown:
            raise ConfigError(f"unknown monitors {unknown}")
    try:
        integ = IntegratorConfig(
            h=_float("integrator.h", get("integrator.h")),
            end=_float("integrator.end", get("integrator.end")),
            adaptive=_bool("integrator.adaptive", get("integrator.adaptive")),
            rel_tol=_float("integrator.rel_tol", get("integrator.rel_tol")),
            max_steps=_int("integrator.max_steps", get("integrator.max_steps")),
            blowup_norm=_float("integrator.blowup_norm", get("integrator.blowup_norm")),
            floor_guard=_float("integrator.floor_guard", get("integrator.floor_guard")),
            decimation=_int("integrator.decimation", get("integrator.decimation")),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    mh = get("integrator.min_horizon")
    order = _int("startup.order", get("startup.order"))
    if not 2 <= order <= 6:
        raise ConfigError(f"startup.order must be in [2, 6], got {order}")
    t0 = _float("startup.t0", get("startup.t0"))
    if not t0 > 0:
        raise ConfigError("startup.t0 must be positive")
    hbar = tuple(_floats("startup.hbar", get("startup.hbar")))
    if not hbar:
        raise ConfigError("startup.hbar must not be empty")
    return RunConfig(
        model=model, label=label, normalization=norm, mode=mode, hbar=hbar,
        ubar=_float("startup.ubar", get("startup.ubar")), order=order, t0=t0,
        delta=_float("launch.delta", get("launch.delta")), seed=_int("launch.seed", get("launch.seed")),
        c_w=_float("launch.c_w", get("launch.c_w")), c_y=_float("launch.c_y", get("launch.c_y")),
        integrator=integ, min_horizon=_float("integrator.min_horizon", mh) if mh else None,
        monitors=mon_names, tail_fraction=_float("fits.tail_fraction", get("fits.tail_fraction")),
        min_points=_int("fits.min_points", get("fits.min_points")),
        out_trajectory=get("output.trajectory"), out_monitors=get("output.monitors"),
        out_fits=get("output.fits"), out_summary=get("output.summary"),
        plots=_bool("output.plots", get("output.plots")),
        sweep_hbar=tuple(_floats("sweep.hbar", get("sweep.hbar"))),
        sweep_ubar=tuple(_floats("sweep.ubar", get("sweep.ubar"))),
        sweep_seed=tuple(int(v) for v in _floats("sweep.seed", get("sweep.seed"))),
    )


def load(path=None, preset_name: str | None = None) -> RunConfig:
    kv = {}
    if path is not None:
        try:
            with open(path) as fh:
                kv = parse_text(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
    if preset_name:
        kv["model.kind"] = "preset"
        kv["model.preset"] = preset_name
    return build(kv)
