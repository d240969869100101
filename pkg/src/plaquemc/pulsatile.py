"""Periodic inlet volume-flow waveform.

Flow rates are kept in mL/s (the unit of the tabulated carotid waveform);
:func:`mean_velocity_at` converts to a cross-section-average speed in m/s.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

DEFAULT_PERIOD = 0.9
T_PS = 0.16  # peak systole
T_ED = 0.40  # early diastole trough
T_LD = 0.90  # late diastole, end of cycle


class WaveformError(ValueError):
    pass


@dataclass(frozen=True)
class PulsatileWaveform:
    times: np.ndarray
    flow_rates: np.ndarray
    period: float = DEFAULT_PERIOD
    t_ps: Optional[float] = None
    t_ed: Optional[float] = None
    t_ld: Optional[float] = None

    def __post_init__(self):
        # unspecified landmarks keep their phase within the cycle
        scale = 1.0 if self.period == DEFAULT_PERIOD else self.period / DEFAULT_PERIOD
        for name, default in (("t_ps", T_PS * scale), ("t_ed", T_ED * scale), ("t_ld", self.period)):
            if getattr(self, name) is None:
                object.__setattr__(self, name, default)
        t = np.asarray(self.times, dtype=float)
        q = np.asarray(self.flow_rates, dtype=float)
        t.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "flow_rates", q)
        if not self.period > 0:
            raise WaveformError(f"period must be positive, got {self.period}")
        if t.ndim != 1 or t.shape != q.shape or t.size < 2:
            raise WaveformError("need at least two (time, flow rate) samples")
        if np.any(np.diff(t) <= 0):
            raise WaveformError("sample times must be strictly increasing")
        if t[0] < 0 or t[-1] >= self.period:
            raise WaveformError(f"sample times must lie in [0, {self.period})")
        if np.any(q < 0):
            raise WaveformError("flow rates must be non-negative")
        for name in ("t_ps", "t_ed", "t_ld"):
            if not 0 <= getattr(self, name) <= self.period:
                raise WaveformError(f"landmark {name} outside the cycle")

    def __eq__(self, other):
        if not isinstance(other, PulsatileWaveform):
            return NotImplemented
        return (
            np.array_equal(self.times, other.times)
            and np.array_equal(self.flow_rates, other.flow_rates)
            and (self.period, self.t_ps, self.t_ed, self.t_ld) == (other.period, other.t_ps, other.t_ed, other.t_ld)
        )

    __hash__ = None

    def landmark(self, name: str) -> float:
        """Release landmark by short name: ``ps``, ``ed`` or ``ld``."""
        try:
            return {"ps": self.t_ps, "ed": self.t_ed, "ld": self.t_ld}[name.lower()]
        except KeyError:
            raise WaveformError(f"unknown landmark {name!r}") from None


def load_waveform(samples: Iterable[tuple[float, float]], period: float = DEFAULT_PERIOD) -> PulsatileWaveform:
    """Build a waveform from ``(t, Q)`` pairs.

    A closing sample at exactly ``t = period`` is accepted when it repeats the
    first sample's value, and dropped since the cycle wraps.
    """
    rows = [(float(t), float(q)) for t, q in samples]
    if not rows:
        raise WaveformError("empty waveform table")
    if len(rows) > 2 and math.isclose(rows[-1][0], period, rel_tol=1e-12, abs_tol=1e-12):
        t_close, q_close = rows.pop()
        if rows[0][0] != 0.0 or not math.isclose(q_close, rows[0][1], rel_tol=1e-9, abs_tol=1e-12):
            raise WaveformError(f"closing sample at t={t_close} does not repeat the t=0 sample")
    t, q = zip(*rows)
    return PulsatileWaveform(np.array(t), np.array(q), period=period)


def parse_waveform_text(text: str, period: float = DEFAULT_PERIOD) -> PulsatileWaveform:
    """Parse a two-column ``time_s,flow_rate_ml_per_s`` table.

    Lines starting with ``#`` are comments; a non-numeric first row is taken as
    a header.
    """
    rows = []
    header_allowed = True
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if rows:
            header_allowed = False
        try:
            if len(parts) != 2:
                raise ValueError
            rows.append((float(parts[0]), float(parts[1])))
        except ValueError:
            if header_allowed:
                header_allowed = False
                continue
            raise WaveformError(f"line {lineno}: expected two numbers, got {raw.strip()!r}") from None
    return load_waveform(rows, period=period)


def read_waveform(path: Union[str, Path], period: float = DEFAULT_PERIOD) -> PulsatileWaveform:
    return parse_waveform_text(Path(path).read_text(), period=period)


def default_waveform() -> PulsatileWaveform:
    """Shipped 10 ms digitization of a human carotid flow cycle (0.9 s)."""
    text = resources.files("plaquemc").joinpath("data/carotid_waveform.csv").read_text()
    return parse_waveform_text(text, period=DEFAULT_PERIOD)


def flow_rate_at(w: PulsatileWaveform, t):
    """Linearly interpolated flow rate (mL/s), periodic in ``w.period``."""
    t = np.asarray(t, dtype=float)
    q = np.interp(np.mod(t, w.period), w.times, w.flow_rates, period=w.period)
    return q if q.ndim else float(q)


def mean_velocity_at(w: PulsatileWaveform, t, r_c: float):
    """Cross-section-average axial speed (m/s) in a pipe of radius ``r_c``."""
    if not r_c > 0:
        raise ValueError("r_c must be positive")
    return flow_rate_at(w, t) * 1e-6 / (math.pi * r_c**2)


def cycle_mean_flow(w: PulsatileWaveform) -> float:
    """Exact mean of the piecewise-linear waveform over one period (mL/s)."""
    t = np.append(w.times, w.times[0] + w.period)
    q = np.append(w.flow_rates, w.flow_rates[0])
    # samples may not start at 0; the wrap segment closes the loop either way
    return float(np.sum(0.5 * (q[1:] + q[:-1]) * np.diff(t)) / w.period)


def cycle_mean_velocity(w: PulsatileWaveform, r_c: float) -> float:
    return cycle_mean_flow(w) * 1e-6 / (math.pi * r_c**2)


def normalize_mean(w: PulsatileWaveform, target_u_avg: float, r_c: float) -> PulsatileWaveform:
    """Scale ``w`` so that its cycle-mean speed equals ``target_u_avg``."""
    current = cycle_mean_velocity(w, r_c)
    if not current > 0:
        raise WaveformError("cannot normalise a waveform with zero mean")
    scale = target_u_avg / current
    return replace(w, flow_rates=w.flow_rates * scale)


def sample_waveform(w: PulsatileWaveform, resolution: float, cycles: float = 1.0):
    """Uniform samples ``(t, Q)`` covering ``cycles`` periods inclusive."""
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    n = int(round(cycles * w.period / resolution))
    t = np.arange(n + 1) * resolution
    return t, flow_rate_at(w, t)
