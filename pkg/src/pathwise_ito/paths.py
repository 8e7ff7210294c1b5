"""Sampled paths, envelopes, and seeded test-path generators.

A path lives on a finite strictly increasing time grid starting at 0 and
carries one of two interpolation regimes:

* ``continuous-linear`` -- piecewise-linear between grid points (the model
  for continuous integrators and integrands);
* ``cadlag-step`` -- right-continuous and flat between grid points, so
  jumps occur only at grid points and left limits are the previous grid
  value.

Envelopes bound either the jumps of a step integrator (``JumpEnvelope``)
or the disagreement region of a possibly non-right-continuous integrand
(``PredictabilityEnvelope``).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

CONTINUOUS = "continuous-linear"
CADLAG = "cadlag-step"
REGIMES = (CONTINUOUS, CADLAG)

PRNG_NAME = "numpy.default_rng(PCG64)"

GENERATOR_KINDS = (
    "brownian",
    "poisson-jump",
    "deterministic-formula",
    "tanaka-indicator",
    "tanaka-sign",
    "constant",
)


def _as_float_array(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 1:
        raise ValueError("expected a one-dimensional sequence")
    return a


@dataclass(frozen=True)
class SampledPath:
    """A real path sampled on a finite grid with a declared regime."""

    times: np.ndarray
    values: np.ndarray
    regime: str = CONTINUOUS
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "times", _as_float_array(self.times))
        object.__setattr__(self, "values", _as_float_array(self.values))
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")
        if len(self.times) != len(self.values):
            raise ValueError("times and values must have equal length")
        if len(self.times) < 1:
            raise ValueError("path needs at least one grid point")
        if self.times[0] != 0.0:
            raise ValueError("time grid must start at 0")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("time grid must be strictly increasing")
        if not (np.all(np.isfinite(self.times)) and np.all(np.isfinite(self.values))):
            raise ValueError("times and values must be finite")

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def _check_domain(self, t: np.ndarray):
        if np.any(t < self.times[0]) or np.any(t > self.times[-1]):
            raise ValueError(
                f"evaluation time outside path domain [0, {self.horizon}]"
            )

    def evaluate(self, t):
        """Path value at ``t`` (scalar or array); exact at grid points."""
        scalar = np.isscalar(t)
        tt = np.atleast_1d(np.asarray(t, dtype=np.float64))
        self._check_domain(tt)
        if self.regime == CONTINUOUS:
            out = np.interp(tt, self.times, self.values)
        else:
            idx = np.searchsorted(self.times, tt, side="right") - 1
            out = self.values[np.clip(idx, 0, len(self.values) - 1)]
        return float(out[0]) if scalar else out

    def left_limit(self, t):
        """Left limit at ``t > 0``: previous grid value for step paths."""
        scalar = np.isscalar(t)
        tt = np.atleast_1d(np.asarray(t, dtype=np.float64))
        if np.any(tt <= self.times[0]):
            raise ValueError("left limit requires t > start of the grid")
        self._check_domain(tt)
        if self.regime == CONTINUOUS:
            out = np.interp(tt, self.times, self.values)
        else:
            # value at the greatest grid point strictly below t
            idx = np.searchsorted(self.times, tt, side="left") - 1
            out = self.values[np.clip(idx, 0, len(self.values) - 1)]
        return float(out[0]) if scalar else out

    def max_step_oscillation(self) -> float:
        """Largest |value increment| over a single grid step."""
        if len(self.values) < 2:
            return 0.0
        return float(np.max(np.abs(np.diff(self.values))))

    def rms_step_oscillation(self) -> float:
        """Quadratic-mean |value increment| over a single grid step."""
        if len(self.values) < 2:
            return 0.0
        d = np.diff(self.values)
        return float(math.sqrt(float(np.mean(d * d))))

    def restrict(self, horizon: float) -> "SampledPath":
        """Restriction to [0, horizon]; horizon becomes the last grid point."""
        if horizon > self.horizon or horizon <= 0:
            raise ValueError("horizon outside path domain")
        k = int(np.searchsorted(self.times, horizon, side="right"))
        times = self.times[:k]
        values = self.values[:k]
        if times[-1] < horizon:
            times = np.append(times, horizon)
            values = np.append(values, self.evaluate(horizon))
        return SampledPath(times, values, self.regime, dict(self.meta))

    # -- serialization ----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "regime": self.regime,
            "times": self.times.tolist(),
            "values": self.values.tolist(),
            "meta": self.meta,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SampledPath":
        return cls(d["times"], d["values"], d["regime"], d.get("meta", {}))

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, s: str) -> "SampledPath":
        return cls.from_json_dict(json.loads(s))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time", "value"])
        for t, v in zip(self.times, self.values):
            w.writerow([repr(float(t)), repr(float(v))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, s: str, regime: str = CONTINUOUS) -> "SampledPath":
        rows = list(csv.reader(io.StringIO(s)))
        if not rows or rows[0] != ["time", "value"]:
            raise ValueError("expected CSV header 'time,value'")
        times = [float(r[0]) for r in rows[1:]]
        values = [float(r[1]) for r in rows[1:]]
        return cls(times, values, regime)


class IntervalUnion:
    """A finite union of closed intervals of [0, inf); points are degenerate."""

    def __init__(self, intervals: Iterable[tuple[float, float]] = ()):
        pairs = sorted((float(a), float(b)) for a, b in intervals)
        starts: list[float] = []
        ends: list[float] = []
        for a, b in pairs:
            if b < a:
                raise ValueError(f"interval end {b} before start {a}")
            if starts and a <= ends[-1]:
                ends[-1] = max(ends[-1], b)
            else:
                starts.append(a)
                ends.append(b)
        self.starts = np.asarray(starts, dtype=np.float64)
        self.ends = np.asarray(ends, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.starts)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, IntervalUnion)
            and np.array_equal(self.starts, other.starts)
            and np.array_equal(self.ends, other.ends)
        )

    def contains(self, t) -> np.ndarray | bool:
        scalar = np.isscalar(t)
        tt = np.atleast_1d(np.asarray(t, dtype=np.float64))
        if len(self.starts) == 0:
            out = np.zeros(len(tt), dtype=bool)
        else:
            i = np.searchsorted(self.starts, tt, side="right") - 1
            ok = i >= 0
            out = np.zeros(len(tt), dtype=bool)
            out[ok] = tt[ok] <= self.ends[i[ok]]
        return bool(out[0]) if scalar else out

    def first_entry_after(self, t: float) -> float:
        """inf{s > t : s in the union}; inf of the empty set is +inf."""
        if len(self.starts) == 0:
            return math.inf
        i = int(np.searchsorted(self.ends, t, side="left"))
        while i < len(self.starts) and self.ends[i] <= t:
            i += 1
        if i >= len(self.starts):
            return math.inf
        if self.starts[i] <= t < self.ends[i]:
            # t sits inside an interval: every s > t nearby is in the union
            return float(np.nextafter(t, math.inf))
        return float(self.starts[i]) if self.starts[i] > t else float(
            np.nextafter(t, math.inf)
        )

    def clip(self, lo: float, hi: float) -> "IntervalUnion":
        out = []
        for a, b in zip(self.starts, self.ends):
            a2, b2 = max(a, lo), min(b, hi)
            if a2 <= b2:
                out.append((a2, b2))
        return IntervalUnion(out)

    def total_length(self) -> float:
        return float(np.sum(self.ends - self.starts))

    def to_list(self) -> list[list[float]]:
        return [[float(a), float(b)] for a, b in zip(self.starts, self.ends)]

    @classmethod
    def from_list(cls, pairs) -> "IntervalUnion":
        return cls((p[0], p[1]) for p in pairs)


@dataclass(frozen=True)
class JumpEnvelope:
    """Cadlag bounds (lower, upper) constraining the jumps of an integrator."""

    lower: SampledPath
    upper: SampledPath

    def __post_init__(self):
        if self.lower.regime != CADLAG or self.upper.regime != CADLAG:
            raise ValueError("envelope paths must be cadlag-step")

    def constrains(self, omega: SampledPath) -> bool:
        """lower(t-) <= omega(t) <= upper(t-) at every grid point t > 0."""
        t = omega.times[1:]
        if len(t) == 0:
            return True
        lo = self.lower.left_limit(t)
        hi = self.upper.left_limit(t)
        w = omega.values[1:]
        return bool(np.all(lo <= w) and np.all(w <= hi))

    def validate(self, omega: SampledPath) -> None:
        if not self.constrains(omega):
            raise ValueError("jump envelope violated: lower(t-) <= omega(t) <= upper(t-) fails")

    def to_json_dict(self) -> dict:
        return {
            "kind": "jump-envelope",
            "lower": self.lower.to_json_dict(),
            "upper": self.upper.to_json_dict(),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "JumpEnvelope":
        return cls(
            SampledPath.from_json_dict(d["lower"]),
            SampledPath.from_json_dict(d["upper"]),
        )


@dataclass(frozen=True)
class PredictabilityEnvelope:
    """Bounds (lower, upper) on an integrand plus its closed disagreement set.

    Outside ``exception_set`` the two bounds agree; the set where they may
    differ is a finite union of closed intervals (degenerate ones allowed),
    which is closed by construction.
    """

    lower: SampledPath
    upper: SampledPath
    exception_set: IntervalUnion

    def validate(self, phi: SampledPath) -> None:
        """Check the envelope invariants on phi's grid."""
        t = phi.times
        lo = self.lower.evaluate(np.clip(t, 0, self.lower.horizon))
        hi = self.upper.evaluate(np.clip(t, 0, self.upper.horizon))
        v = phi.values
        if not (np.all(lo <= v + 1e-12) and np.all(v <= hi + 1e-12)):
            raise ValueError("predictability envelope violated: lower <= phi <= upper fails")
        differ = lo < hi
        inside = self.exception_set.contains(t)
        if np.any(differ & ~inside):
            raise ValueError("bounds differ at a grid point outside the exception set")

    def to_json_dict(self) -> dict:
        return {
            "kind": "predictability-envelope",
            "lower": self.lower.to_json_dict(),
            "upper": self.upper.to_json_dict(),
            "exception_set": self.exception_set.to_list(),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "PredictabilityEnvelope":
        return cls(
            SampledPath.from_json_dict(d["lower"]),
            SampledPath.from_json_dict(d["upper"]),
            IntervalUnion.from_list(d["exception_set"]),
        )


@dataclass(frozen=True)
class PathGeneratorConfig:
    """Seeded, fully deterministic test-path generator configuration."""

    kind: str
    seed: int = 0
    horizon: float = 1.0
    grid_step: float = 2.0 ** -10
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if self.grid_step <= 0:
            raise ValueError("grid_step must be positive")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")


def _grid(config: PathGeneratorConfig) -> np.ndarray:
    n = int(round(config.horizon / config.grid_step))
    n = max(n, 1)
    return np.linspace(0.0, config.horizon, n + 1)


def _meta(config: PathGeneratorConfig) -> dict:
    return {
        "generator": config.kind,
        "seed": int(config.seed),
        "params": {k: config.parameters[k] for k in sorted(config.parameters)},
        "prng": PRNG_NAME,
    }


def derive_seed(base_seed: int, index: int) -> int:
    """Per-path seed for ensembles: SeedSequence([base_seed, index])."""
    return int(np.random.SeedSequence([int(base_seed), int(index)]).generate_state(1, np.uint64)[0])


def level_crossings(values: np.ndarray, times: np.ndarray, level: float) -> IntervalUnion:
    """Exact {t : linear interpolant == level} as a union of closed intervals."""
    v = np.asarray(values, dtype=np.float64) - level
    t = np.asarray(times, dtype=np.float64)
    pieces: list[tuple[float, float]] = []
    for i in range(len(v) - 1):
        a, b = v[i], v[i + 1]
        if a == 0.0 and b == 0.0:
            pieces.append((t[i], t[i + 1]))
        elif a == 0.0:
            pieces.append((t[i], t[i]))
        elif b == 0.0:
            pieces.append((t[i + 1], t[i + 1]))
        elif (a < 0 < b) or (b < 0 < a):
            s = t[i] + (t[i + 1] - t[i]) * (-a) / (b - a)
            pieces.append((s, s))
    return IntervalUnion(pieces)


def tanaka_envelope(
    base: SampledPath, level: float, kind: str = "tanaka-indicator"
) -> tuple[SampledPath, PredictabilityEnvelope]:
    """Indicator/sign integrand of ``base > level`` plus its envelope.

    lower = strict indicator, upper = non-strict indicator (both as step
    paths on the base grid); the exception set is the exact level set of
    the piecewise-linear base.
    """
    if base.regime != CONTINUOUS:
        raise ValueError("tanaka integrands require a continuous-linear base path")
    w = base.values
    strict = (w > level).astype(np.float64)
    loose = (w >= level).astype(np.float64)
    if kind == "tanaka-indicator":
        phi_vals = strict
        lo_vals, hi_vals = strict, loose
    elif kind == "tanaka-sign":
        phi_vals = np.sign(w - level)
        lo_vals, hi_vals = 2.0 * strict - 1.0, 2.0 * loose - 1.0
    else:
        raise ValueError(f"unknown tanaka kind {kind!r}")
    exc = level_crossings(w, base.times, level)
    meta = {"generator": kind, "level": float(level), "base": base.meta.get("generator", "user")}
    phi = SampledPath(base.times, phi_vals, CADLAG, meta)
    env = PredictabilityEnvelope(
        SampledPath(base.times, lo_vals, CADLAG),
        SampledPath(base.times, hi_vals, CADLAG),
        exc,
    )
    return phi, env


def generate_with_envelope(
    config: PathGeneratorConfig, base: SampledPath | None = None
) -> tuple[SampledPath, JumpEnvelope | PredictabilityEnvelope | None]:
    """Generate a path (and envelope when the kind defines one).

    Pure in ``config`` (and ``base``): the same inputs give bit-identical
    output. Stochastic kinds draw from ``default_rng(SeedSequence(seed))``.
    """
    kind = config.kind
    params = config.parameters
    t = _grid(config)
    meta = _meta(config)

    if kind == "constant":
        value = float(params.get("value", 0.0))
        return SampledPath(t, np.full(len(t), value), CONTINUOUS, meta), None

    if kind == "deterministic-formula":
        c = [float(params.get(f"c{i}", 0.0)) for i in range(4)]
        v = c[0] + c[1] * t + c[2] * t**2 + c[3] * t**3
        return SampledPath(t, v, CONTINUOUS, meta), None

    if kind == "brownian":
        rng = np.random.default_rng(np.random.SeedSequence(int(config.seed)))
        start = float(params.get("start", 0.0))
        dz = rng.normal(0.0, math.sqrt(config.horizon / (len(t) - 1)), len(t) - 1)
        v = np.concatenate(([start], start + np.cumsum(dz)))
        return SampledPath(t, v, CONTINUOUS, meta), None

    if kind == "poisson-jump":
        rng = np.random.default_rng(np.random.SeedSequence(int(config.seed)))
        rate = float(params.get("rate", 20.0))
        bound = float(params.get("jump_bound", 0.1))
        start = float(params.get("start", 0.0))
        n = len(t) - 1
        step = config.horizon / n
        # jump magnitudes in [bound/2, bound]: bounded by the declared
        # constant and bounded away from 0, so partitions stabilize at a
        # finite level
        hit = rng.random(n) < min(rate * step, 1.0)
        mag = rng.uniform(bound / 2.0, bound, n)
        sign = rng.choice(np.array([-1.0, 1.0]), n)
        v = np.concatenate(([start], start + np.cumsum(hit * sign * mag)))
        omega = SampledPath(t, v, CADLAG, meta)
        env = JumpEnvelope(
            SampledPath(t, v - bound, CADLAG),
            SampledPath(t, v + bound, CADLAG),
        )
        return omega, env

    if kind in ("tanaka-indicator", "tanaka-sign"):
        if base is None:
            raise ValueError(f"{kind} requires a base path")
        level = float(params.get("level", 0.0))
        phi, env = tanaka_envelope(base, level, kind)
        phi.meta.update({"seed": int(config.seed), "prng": PRNG_NAME})
        return phi, env

    raise ValueError(f"unknown generator kind {kind!r}")


def generate(config: PathGeneratorConfig, base: SampledPath | None = None) -> SampledPath:
    """Generate just the path; see :func:`generate_with_envelope`."""
    return generate_with_envelope(config, base)[0]
