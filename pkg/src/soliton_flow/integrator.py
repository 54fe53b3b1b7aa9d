"""Classical fourth-order Runge-Kutta with optional step doubling.

The integrator knows nothing about the geometry: it advances any vector
field ``f(t, x)`` (in arclength t or in the phase variable s), records
samples, and stops on events.  Events are terminal and are data, never
exceptions.  ``x`` may carry leading batch axes if ``f`` is vectorized;
an event in any batch member stops the whole batch.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import SolitonFlowError


@dataclass(frozen=True)
class IntegratorConfig:
    h: float = 1e-3
    end: float = 20.0
    adaptive: bool = False
    rel_tol: float = 1e-10
    max_steps: int = 10_000_000
    blowup_norm: float = 1e12
    floor_guard: float = 1e-14
    decimation: int = 1

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError(f"step size must be positive, got {self.h}")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if self.decimation < 1:
            raise ValueError("decimation must be at least 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")

    def fingerprint(self) -> str:
        return hashlib.sha256(repr(sorted(asdict(self).items())).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class InlineMonitor:
    """Per-sample check evaluated during integration.

    ``fn(t, x)`` returns a margin; negative means violated.  A terminal
    monitor stops the run on its first violation.
    """

    name: str
    fn: Callable
    terminal: bool = False


@dataclass
class Trajectory:
    variable: str
    grid: np.ndarray
    states: np.ndarray
    events: list = field(default_factory=list)
    records: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.grid)

    @property
    def completed(self) -> bool:
        return not self.events

    @property
    def final(self):
        return self.grid[-1], self.states[-1]

    def member(self, b: int) -> "Trajectory":
        """Extract one run from a batched trajectory."""
        recs = {k: v[:, b] if v.ndim > 1 else v for k, v in self.records.items()}
        return Trajectory(self.variable, self.grid, self.states[:, b], list(self.events), recs, dict(self.meta))

    def window(self, lo=-math.inf, hi=math.inf) -> np.ndarray:
        return (self.grid >= lo) & (self.grid <= hi)


def rk4_step(f, x, t, h):
    """One classical RK4 step; returns None if any stage is not finite."""
    k1 = f(t, x)
    if not np.all(np.isfinite(k1)):
        return None
    k2 = f(t + 0.5 * h, x + (0.5 * h) * k1)
    if not np.all(np.isfinite(k2)):
        return None
    k3 = f(t + 0.5 * h, x + (0.5 * h) * k2)
    if not np.all(np.isfinite(k3)):
        return None
    k4 = f(t + h, x + h * k3)
    if not np.all(np.isfinite(k4)):
        return None
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _safe_step(f, x, t, h):
    try:
        return rk4_step(f, x, t, h), None
    except SolitonFlowError as exc:
        return None, exc
    except (ZeroDivisionError, FloatingPointError) as exc:
        return None, exc


def integrate(f, x0, start: float, config: IntegratorConfig, monitors: Sequence[InlineMonitor] = (),
              guard: Callable | None = None, project: Callable | None = None,
              variable: str = "t", meta: dict | None = None) -> Trajectory:
    """Advance ``x' = f(var, x)`` from ``start`` to ``config.end``.

    ``guard(x)`` returns the smallest quantity that must stay above
    ``config.floor_guard`` (warping functions, typically).  ``project(x)``
    is applied after every accepted step.
    """
    x = np.array(x0, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("initial state must be finite")
    grid = [float(start)]
    states = [x.copy()]
    records = {m.name: [] for m in monitors}
    if config.adaptive:
        records["error_estimate"] = [0.0]
        records["error_bound"] = [config.rel_tol * (1.0 + float(np.max(np.abs(x))))]
    events = []

    def check(t, x):
        """Return an event tuple or None; append monitor margins."""
        if np.max(np.abs(x)) > config.blowup_norm:
            return ("blowup", t)
        if guard is not None and np.min(guard(x)) < config.floor_guard:
            return ("floor", t)
        hit = None
        margins = {}
        for m in monitors:
            margins[m.name] = m.fn(t, x)
            if m.terminal and np.any(np.asarray(margins[m.name]) < 0) and hit is None:
                hit = ("monitor_abort:" + m.name, t)
        return hit, margins

    first = check(grid[0], x)
    if isinstance(first[0], str):
        events.append(first)
        return _finish(variable, grid, states, records, events, config, meta)
    hit, margins = first
    for name, v in margins.items():
        records[name].append(v)
    if hit:
        events.append(hit)
        return _finish(variable, grid, states, records, events, config, meta)

    t = float(start)
    end = float(config.end)
    h = config.h
    k = 0
    steps = 0
    span = end - t
    n_full = int(math.floor(span / config.h + 1e-9)) if span > 0 else 0
    while t < end - 1e-12 * max(1.0, abs(end)):
        if steps >= config.max_steps:
            events.append(("max_steps", t))
            break
        if config.adaptive:
            h = min(h, end - t)
            x_new, err = _safe_step(f, x, t, h)
            half = None
            if x_new is not None:
                mid, _ = _safe_step(f, x, t, 0.5 * h)
                half = None if mid is None else _safe_step(f, mid, t + 0.5 * h, 0.5 * h)[0]
            if x_new is None or half is None:
                events.append(("stage_blowup", t) if err is None else ("singular", t))
                break
            est = np.max(np.abs(half - x_new)) / 15.0
            scale = config.rel_tol * (1.0 + np.max(np.abs(half)))
            if est > scale:
                h *= max(0.1, 0.9 * (scale / est) ** 0.2)
                if h < 1e-14 * max(1.0, abs(t)):
                    events.append(("step_underflow", t))
                    break
                continue
            t_new = t + h
            x_new = half
            accepted = (float(est), float(scale))
            grow = 2.0 if est == 0 else min(2.0, 0.9 * (scale / est) ** 0.2)
            h *= max(grow, 1.0)
        else:
            k += 1
            # grid points are start + k*h; the last step may be partial
            t_new = min(start + k * config.h, end) if k <= n_full else end
            x_new, err = _safe_step(f, x, t, t_new - t)
            if x_new is None:
                events.append(("stage_blowup", t) if err is None else ("singular", t))
                break
        if project is not None:
            x_new = project(x_new)
        steps += 1
        res = check(t_new, x_new)
        if isinstance(res[0], str):
            events.append(res)
            break
        hit, margins = res
        t, x = t_new, x_new
        last = t >= end - 1e-12 * max(1.0, abs(end))
        if steps % config.decimation == 0 or last or hit:
            grid.append(t)
            states.append(x.copy())
            for name, v in margins.items():
                records[name].append(v)
            if config.adaptive:
                records["error_estimate"].append(accepted[0])
                records["error_bound"].append(accepted[1])
        if hit:
            events.append(hit)
            break
    return _finish(variable, grid, states, records, events, config, meta)


def _finish(variable, grid, states, records, events, config, meta):
    m = {"config": config.fingerprint(), "h": config.h}
    if meta:
        m.update(meta)
    recs = {k: np.array(v) for k, v in records.items()}
    return Trajectory(variable, np.array(grid), np.array(states), events, recs, m)


def restart(traj: Trajectory, f, config: IntegratorConfig, index: int = -1, **kw) -> Trajectory:
    """Continue a run from one of its samples; the new run starts there."""
    meta = dict(traj.meta)
    meta.update(kw.pop("meta", {}))
    return integrate(f, traj.states[index], traj.grid[index], config, variable=traj.variable, meta=meta, **kw)


def concatenate(first: Trajectory, second: Trajectory) -> Trajectory:
    """Join a run and its continuation (which must start at a sample of the first)."""
    cut = np.searchsorted(first.grid, second.grid[0])
    recs = {k: np.concatenate([first.records[k][:cut], second.records[k]]) for k in first.records
            if k in second.records}
    return Trajectory(first.variable, np.concatenate([first.grid[:cut], second.grid]),
                      np.concatenate([first.states[:cut], second.states]), list(second.events), recs,
                      dict(second.meta))


def with_end(config: IntegratorConfig, end: float) -> IntegratorConfig:
    return replace(config, end=end)
