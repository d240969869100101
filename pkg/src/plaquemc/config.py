"""Sectioned key-value experiment configuration.

Example::

    [channel]
    r_p_rel = 0.25

    [fluid]
    model = power_law

    [flow]
    mode = pulsatile
    release = ps

    [sim]
    seed = 7

Every omitted key takes its default.  All values are SI, except that
waveform tables are in mL/s.
"""

from __future__ import annotations

import configparser
import math
from pathlib import Path
from typing import Callable, Optional, Union

from .channel import BOLTZMANN, DiffusionSpec
from .geometry import VesselGeometry
from .pulsatile import DEFAULT_PERIOD, WaveformError, default_waveform, normalize_mean, read_waveform
from .rheology import (
    BLOOD_DENSITY,
    BLOOD_VISCOSITY,
    DEFAULT_ZETA,
    POWER_LAW_K,
    POWER_LAW_N,
    YIELD_STRESS,
    FluidKind,
    FluidModel,
    RheologyError,
)
from .transport import ConfigError, ConstantFlow, PulsatileFlow, SimulationConfig, default_dt

SECTIONS = {
    "channel": {"r_c", "l_c", "r_p", "r_p_rel", "l_p_outer", "l_p_inner", "x_center"},
    "fluid": {"model", "K", "n", "tau_y", "zeta", "density"},
    "particles": {"N", "radius", "temperature", "viscosity", "k_B", "D"},
    "flow": {"mode", "u_avg", "waveform", "period", "release", "normalize"},
    "sim": {"dt", "t_end", "seed"},
}

DEFAULT_U_AVG = 0.342


def _key_lines(text: str) -> dict[tuple[str, str], int]:
    lines = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
        elif section is not None:
            for sep in "=:":
                if sep in line:
                    lines.setdefault((section, line.split(sep, 1)[0].strip()), lineno)
                    break
    return lines


class _Reader:
    """Typed access to a parsed config that reports offending line numbers."""

    def __init__(self, parser: configparser.ConfigParser, lines: dict):
        self.parser = parser
        self.lines = lines

    def where(self, section: str, key: str) -> str:
        lineno = self.lines.get((section, key))
        return f"line {lineno}: " if lineno else ""

    def has(self, section: str, key: str) -> bool:
        return self.parser.has_option(section, key)

    def get(self, section: str, key: str, convert: Callable, default=None):
        if not self.has(section, key):
            return default
        raw = self.parser.get(section, key)
        try:
            return convert(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{self.where(section, key)}[{section}] {key} = {raw!r}: {exc}") from None

    def number(self, section: str, key: str, default=None, positive=False, nonneg=False):
        value = self.get(section, key, _float, default)
        if value is None or not self.has(section, key):
            return value
        if positive and not value > 0:
            raise ConfigError(f"{self.where(section, key)}[{section}] {key} must be positive, got {value}")
        if nonneg and value < 0:
            raise ConfigError(f"{self.where(section, key)}[{section}] {key} must be non-negative, got {value}")
        return value


def _float(raw: str) -> float:
    value = float(raw)
    if not math.isfinite(value):
        raise ValueError("not a finite number")
    return value


def _int(raw: str) -> int:
    return int(raw.strip(), 0)


def _bool(raw: str) -> bool:
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def parse_release(spec: str, period: float = DEFAULT_PERIOD) -> float:
    """Release time from ``ps``, ``ed``, ``ld`` or ``t=<seconds>``."""
    from .pulsatile import T_ED, T_LD, T_PS

    s = spec.strip().lower()
    named = {"ps": T_PS, "ed": T_ED, "ld": T_LD}
    if s in named:
        return named[s]
    if s.startswith("t="):
        t = float(s[2:])
        if not 0 <= t <= period:
            raise ValueError(f"release time must lie in [0, {period}]")
        return t
    raise ValueError("expected ps, ed, ld or t=<seconds>")


def parse_config(text: str, base_dir: Union[str, Path, None] = None) -> SimulationConfig:
    """Parse configuration text into a validated :class:`SimulationConfig`.

    Relative waveform paths are resolved against ``base_dir``.
    """
    parser = configparser.ConfigParser(interpolation=None, strict=True, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"parse error: {exc}") from None
    lines = _key_lines(text)
    rd = _Reader(parser, lines)

    for section in parser.sections():
        if section not in SECTIONS:
            lineno = next((n for (s, _), n in lines.items() if s == section), None)
            raise ConfigError(f"unknown section [{section}]" + (f" near line {lineno}" if lineno else ""))
        for key in parser.options(section):
            if key not in SECTIONS[section]:
                raise ConfigError(f"{rd.where(section, key)}unknown key {key!r} in [{section}]")

    # channel
    r_c = rd.number("channel", "r_c", 3.0e-3, positive=True)
    if rd.has("channel", "r_p") and rd.has("channel", "r_p_rel"):
        raise ConfigError(f"{rd.where('channel', 'r_p_rel')}give either r_p or r_p_rel, not both")
    if rd.has("channel", "r_p_rel"):
        r_p = rd.number("channel", "r_p_rel", nonneg=True) * r_c
    else:
        r_p = rd.number("channel", "r_p", 0.0, nonneg=True)
    geometry = VesselGeometry(
        r_c=r_c,
        l_c=rd.number("channel", "l_c", 50.0e-3, positive=True),
        r_p=r_p,
        l_p_outer=rd.number("channel", "l_p_outer", 20.0e-3, positive=True),
        l_p_inner=rd.number("channel", "l_p_inner", 10.0e-3, positive=True),
        x_center=rd.number("channel", "x_center", None, nonneg=True),
    )

    # fluid
    kind = rd.get("fluid", "model", lambda s: FluidKind(s.strip().lower()), FluidKind.NEWTONIAN)
    density = rd.number("fluid", "density", BLOOD_DENSITY, positive=True)
    try:
        if kind is FluidKind.NEWTONIAN:
            for key in ("n", "tau_y", "zeta"):
                if rd.has("fluid", key):
                    raise ConfigError(f"{rd.where('fluid', key)}{key} does not apply to a Newtonian fluid")
            fluid = FluidModel.newtonian(rd.number("fluid", "K", BLOOD_VISCOSITY, positive=True), density)
        elif kind is FluidKind.POWER_LAW:
            for key in ("tau_y", "zeta"):
                if rd.has("fluid", key):
                    raise ConfigError(f"{rd.where('fluid', key)}{key} does not apply to a power-law fluid")
            fluid = FluidModel.power_law(
                rd.number("fluid", "K", POWER_LAW_K, positive=True),
                rd.number("fluid", "n", POWER_LAW_N, positive=True),
                density,
            )
        else:
            fluid = FluidModel.herschel_bulkley(
                rd.number("fluid", "K", POWER_LAW_K, positive=True),
                rd.number("fluid", "n", POWER_LAW_N, positive=True),
                rd.number("fluid", "tau_y", YIELD_STRESS, nonneg=True),
                rd.number("fluid", "zeta", DEFAULT_ZETA, nonneg=True),
                density,
            )
    except RheologyError as exc:
        raise ConfigError(f"[fluid] {exc}") from None

    # particles
    try:
        diffusion = DiffusionSpec(
            k_B=rd.number("particles", "k_B", BOLTZMANN, positive=True),
            T=rd.number("particles", "temperature", 300.0, positive=True),
            eta=rd.number("particles", "viscosity", 4e-3, positive=True),
            r_particle=rd.number("particles", "radius", 50e-9, positive=True),
            D_override=rd.number("particles", "D", None, nonneg=True),
        )
    except ValueError as exc:
        raise ConfigError(f"[particles] {exc}") from None
    n_particles = rd.get("particles", "N", _int, 1000)

    # flow
    mode = rd.get("flow", "mode", lambda s: s.strip().lower(), "constant")
    u_avg = rd.number("flow", "u_avg", DEFAULT_U_AVG, positive=True)
    if mode == "constant":
        for key in ("waveform", "period", "release", "normalize"):
            if rd.has("flow", key):
                raise ConfigError(f"{rd.where('flow', key)}{key} requires mode = pulsatile")
        flow = ConstantFlow(u_avg)
    elif mode == "pulsatile":
        period = rd.number("flow", "period", DEFAULT_PERIOD, positive=True)
        source = rd.get("flow", "waveform", str.strip, "default")
        release = rd.get("flow", "release", lambda s: parse_release(s, period), parse_release("ps"))
        normalize = rd.get("flow", "normalize", _bool, True)
        try:
            if source == "default":
                waveform = default_waveform()
                if rd.has("flow", "period") and period != waveform.period:
                    raise ConfigError(f"{rd.where('flow', 'period')}the default waveform has a fixed 0.9 s period")
            else:
                path = Path(source)
                if not path.is_absolute() and base_dir is not None:
                    path = Path(base_dir) / path
                waveform = read_waveform(path, period=period)
                source = str(path.resolve())
            if normalize:
                waveform = normalize_mean(waveform, u_avg, geometry.r_c)
        except (OSError, WaveformError) as exc:
            raise ConfigError(f"{rd.where('flow', 'waveform')}waveform {source!r}: {exc}") from None
        flow = PulsatileFlow(waveform, release, source=source, target_u_avg=u_avg if normalize else None)
    else:
        raise ConfigError(f"{rd.where('flow', 'mode')}mode must be constant or pulsatile, got {mode!r}")

    return SimulationConfig(
        geometry=geometry,
        fluid=fluid,
        diffusion=diffusion,
        flow=flow,
        N=n_particles,
        dt=rd.number("sim", "dt", None, positive=True),
        t_end=rd.number("sim", "t_end", 1.0, positive=True),
        seed=rd.get("sim", "seed", _int, 0),
    )


def load_config(path: Union[str, Path, None]) -> SimulationConfig:
    if path is None:
        return parse_config("")
    path = Path(path)
    return parse_config(path.read_text(), base_dir=path.parent)


def serialize_config(cfg: SimulationConfig) -> str:
    """Write ``cfg`` back as configuration text that parses to the same config."""
    g, f, d = cfg.geometry, cfg.fluid, cfg.diffusion
    sections: dict[str, dict[str, str]] = {
        "channel": {
            "r_c": repr(g.r_c),
            "l_c": repr(g.l_c),
            "r_p": repr(g.r_p),
            "l_p_outer": repr(g.l_p_outer),
            "l_p_inner": repr(g.l_p_inner),
        },
        "fluid": {"model": f.kind.value, "K": repr(f.K), "density": repr(f.density)},
        "particles": {
            "N": str(cfg.N),
            "radius": repr(d.r_particle),
            "temperature": repr(d.T),
            "viscosity": repr(d.eta),
            "k_B": repr(d.k_B),
        },
        "flow": {},
        "sim": {"dt": repr(cfg.dt), "t_end": repr(cfg.t_end), "seed": str(cfg.seed)},
    }
    if g.x_center is not None:
        sections["channel"]["x_center"] = repr(g.x_center)
    if f.kind is not FluidKind.NEWTONIAN:
        sections["fluid"]["n"] = repr(f.n)
    if f.kind is FluidKind.HERSCHEL_BULKLEY:
        sections["fluid"]["tau_y"] = repr(f.tau_y)
        sections["fluid"]["zeta"] = repr(f.zeta)
    if d.D_override is not None:
        sections["particles"]["D"] = repr(d.D_override)
    flow = cfg.flow
    if isinstance(flow, ConstantFlow):
        sections["flow"] = {"mode": "constant", "u_avg": repr(flow.u_avg)}
    else:
        sections["flow"] = {
            "mode": "pulsatile",
            "waveform": flow.source,
            "release": f"t={flow.release_time!r}",
            "normalize": "true" if flow.target_u_avg is not None else "false",
        }
        if flow.source != "default":
            sections["flow"]["period"] = repr(flow.waveform.period)
        if flow.target_u_avg is not None:
            sections["flow"]["u_avg"] = repr(flow.target_u_avg)
    out = []
    for name, values in sections.items():
        out.append(f"[{name}]")
        out.extend(f"{k} = {v}" for k, v in values.items())
        out.append("")
    return "\n".join(out)


def config_hash(cfg: SimulationConfig) -> str:
    return cfg.digest()


def resolve_overrides(
    cfg: SimulationConfig,
    seed: Optional[int] = None,
    release: Optional[str] = None,
    r_p_rel: Optional[float] = None,
    particles: Optional[int] = None,
) -> SimulationConfig:
    """Apply command-line overrides by round-tripping through the text form.

    Going through :func:`parse_config` keeps every override subject to the
    same validation and default rules (for example the stenosis time step).
    """
    text = serialize_config(cfg)
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    parser.read_string(text)
    if seed is not None:
        parser["sim"]["seed"] = str(seed)
    if particles is not None:
        parser["particles"]["N"] = str(particles)
    if r_p_rel is not None:
        parser["channel"]["r_p"] = repr(r_p_rel * cfg.geometry.r_c)
        # the step follows the plaque size unless the user pinned it
        if cfg.dt == default_dt(cfg.geometry):
            parser.remove_option("sim", "dt")
    if release is not None:
        flow = parser["flow"]
        if flow.get("mode") != "pulsatile":
            flow["mode"] = "pulsatile"
            flow["waveform"] = "default"
            flow["normalize"] = "true"
        flow["release"] = release
    lines = []
    for name in parser.sections():
        lines.append(f"[{name}]")
        lines.extend(f"{k} = {v}" for k, v in parser[name].items())
    return parse_config("\n".join(lines))
