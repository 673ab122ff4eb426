"""
Run configuration: flat ``key = value`` files with ``[section]`` headers.

Parsing uses :mod:`configparser` (no interpolation, ``#`` and ``;``
comments). Every value error names the file and line of the offending
key. Unknown sections and keys are rejected so that typos do not pass
silently.

Sections and keys (defaults in parentheses):

``[problem]``
    ``name``, ``type`` (cauchy | ibvp), ``t_final``, ``seed`` (0)
``[flux]``
    ``name`` (a built-in flux) and numeric parameters passed to it
``[domain]``
    ``lo``, ``hi``, ``N``, ``closure`` (extend), ``sigma`` (IBVP collar)
``[scheme]``
    ``M``, ``n``, ``resolve`` (0), ``substeps``, ``alpha`` (true),
    ``lam_lo``/``lam_hi`` (the flux's [a, b])
``[initial]``
    ``profile`` (riemann | heaviside | constant | box | csv) with
    ``u_l``, ``u_r``, ``x0`` / ``eps``, ``sign`` / ``value`` /
    ``left``, ``right``, ``value``, ``background`` / ``path``
``[boundary]``
    ``left``, ``right``: a number, ``step t0 before after`` or
    ``ramp t0 t1 before after``
``[output]``
    ``snapshots`` (comma separated times; default 0 and t_final),
    ``plot`` (true), ``companion`` (false: for an IBVP, also run the
    Cauchy problem with the same flux and initial data)
``[exact]``
    ``kind`` (none | riemann | advection)
``[verify]``
    ``suites`` (comma separated), ``levels`` (``N:M:n`` triples),
    ``trials``, ``exclude_unresolved`` (true), ``c1`` (pinned constants)
``[compare]``
    ``godunov`` (true), ``max_exact``, ``max_godunov``, ``cfl`` (0.9)
``[convergence]``
    ``levels``, ``min_ratio``, ``max_ratio``
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from tcollapse.errors import ConfigurationError

SCHEMA = {
    "problem": {"name", "type", "t_final", "seed"},
    "flux": None,  # name plus free numeric parameters
    "domain": {"lo", "hi", "n", "closure", "sigma"},
    "scheme": {"m", "n", "resolve", "substeps", "alpha", "lam_lo", "lam_hi"},
    "initial": {"profile", "u_l", "u_r", "x0", "eps", "sign", "value", "left", "right",
                "background", "path"},
    "boundary": {"left", "right"},
    "output": {"snapshots", "plot", "companion"},
    "exact": {"kind"},
    "verify": {"suites", "levels", "trials", "exclude_unresolved", "c1", "properties_n",
               "properties_m", "properties_dt", "properties_lo", "properties_hi"},
    "compare": {"godunov", "max_exact", "max_godunov", "cfl"},
    "convergence": {"levels", "min_ratio", "max_ratio"},
}

SUITES = ("properties", "bounds", "kruzhkov", "nonentropy", "def3", "def1", "implication",
          "kinetic", "inflow", "outflow", "characteristics")

PROFILES = ("riemann", "heaviside", "constant", "box", "csv")


@dataclass
class RunConfig:
    """Validated contents of a configuration file."""

    name: str
    problem: str
    t_final: float
    seed: int
    flux_name: str
    flux_params: dict
    lo: float
    hi: float
    N: int
    M: int
    n: int
    closure: str = "extend"
    sigma: Optional[float] = None
    resolve: float = 0.0
    substeps: Optional[int] = None
    alpha: bool = True
    lam_range: Optional[tuple] = None
    initial: dict = field(default_factory=dict)
    boundary: dict = field(default_factory=dict)
    snapshots: tuple = ()
    plot: bool = True
    companion: bool = False
    exact: str = "none"
    verify: dict = field(default_factory=dict)
    compare: dict = field(default_factory=dict)
    convergence: dict = field(default_factory=dict)
    # raw sections, echoed into the manifest
    raw: dict = field(default_factory=dict)
    source: str = "<string>"


class _Reader:
    """Typed access to a parsed file with line-numbered error messages."""

    def __init__(self, parser: configparser.ConfigParser, lines: dict, source: str):
        self.parser = parser
        self.lines = lines
        self.source = source

    def where(self, section: str, key: Optional[str] = None) -> str:
        line = self.lines.get((section, key)) or self.lines.get((section, None))
        return f"{self.source}:{line}" if line else self.source

    def error(self, section: str, key: Optional[str], msg: str) -> ConfigurationError:
        label = f"[{section}] {key}" if key else f"[{section}]"
        return ConfigurationError(f"{self.where(section, key)}: {label}: {msg}")

    def has(self, section: str, key: str) -> bool:
        return self.parser.has_option(section, key)

    def str(self, section: str, key: str, default=None, required: bool = False):
        if self.has(section, key):
            return self.parser.get(section, key).strip()
        if required:
            raise self.error(section, key, "missing required key")
        return default

    def float(self, section: str, key: str, default=None, required: bool = False,
              positive: bool = False):
        raw = self.str(section, key, None, required)
        if raw is None:
            return default
        try:
            v = float(raw)
        except ValueError:
            raise self.error(section, key, f"expected a number, got {raw!r}") from None
        if not math.isfinite(v):
            raise self.error(section, key, f"expected a finite number, got {raw!r}")
        if positive and not v > 0:
            raise self.error(section, key, f"must be positive, got {raw}")
        return v

    def int(self, section: str, key: str, default=None, required: bool = False,
            positive: bool = False):
        raw = self.str(section, key, None, required)
        if raw is None:
            return default
        try:
            v = int(raw)
        except ValueError:
            raise self.error(section, key, f"expected an integer, got {raw!r}") from None
        if positive and not v > 0:
            raise self.error(section, key, f"must be positive, got {raw}")
        return v

    def bool(self, section: str, key: str, default: bool):
        if not self.has(section, key):
            return default
        try:
            return self.parser.getboolean(section, key)
        except ValueError:
            raise self.error(section, key, "expected true or false") from None

    def floats(self, section: str, key: str, default=()):
        raw = self.str(section, key)
        if raw is None:
            return tuple(default)
        try:
            return tuple(float(v) for v in re.split(r"[,\s]+", raw) if v)
        except ValueError:
            raise self.error(section, key, f"expected comma separated numbers, got {raw!r}") from None

    def levels(self, section: str, key: str, default=()):
        raw = self.str(section, key)
        if raw is None:
            return tuple(default)
        out = []
        for item in (v for v in re.split(r"[,\s]+", raw) if v):
            parts = item.split(":")
            try:
                N, M, n = (int(p) for p in parts)
            except ValueError:
                raise self.error(section, key,
                                 f"expected N:M:n triples, got {item!r}") from None
            if min(N, M, n) < 1:
                raise self.error(section, key, f"level {item!r} must be positive")
            out.append((N, M, n))
        return tuple(out)


def _line_numbers(text: str) -> dict:
    """(section, key) -> 1-based line number, plus (section, None) for headers."""
    out = {}
    section = None
    for i, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip().lower()
            out.setdefault((section, None), i)
            continue
        if section is not None and "=" in s:
            out.setdefault((section, s.split("=", 1)[0].strip().lower()), i)
    return out


def _parse_text(text: str, source: str) -> _Reader:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"),
                                       delimiters=("=",), strict=True)
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigurationError(f"{source}:{exc.lineno}: key outside any [section]") from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigurationError(f"{source}:{exc.lineno}: {exc.message.splitlines()[0]}") from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigurationError(f"{source}:{lineno}: cannot parse {line.strip()}") from None
    lines = _line_numbers(text)
    reader = _Reader(parser, lines, source)
    for section in parser.sections():
        if section not in SCHEMA:
            raise reader.error(section, None,
                               f"unknown section; expected one of {', '.join(SCHEMA)}")
        allowed = SCHEMA[section]
        if allowed is None:
            continue
        for key in parser.options(section):
            if key not in allowed:
                raise reader.error(section, key, "unknown key")
    return reader


def _initial(r: _Reader, base: Path) -> dict:
    s = "initial"
    profile = r.str(s, "profile", required=True)
    if profile not in PROFILES:
        raise r.error(s, "profile", f"unknown profile {profile!r}; expected one of {PROFILES}")
    spec = {"profile": profile}
    if profile == "riemann":
        spec.update(u_l=r.float(s, "u_l", required=True), u_r=r.float(s, "u_r", required=True),
                    x0=r.float(s, "x0", 0.0))
    elif profile == "heaviside":
        spec.update(eps=r.float(s, "eps", required=True, positive=True),
                    sign=r.float(s, "sign", 1.0), x0=r.float(s, "x0", 0.0))
        if spec["sign"] not in (1.0, -1.0):
            raise r.error(s, "sign", "must be 1 or -1")
    elif profile == "constant":
        spec.update(value=r.float(s, "value", required=True))
    elif profile == "box":
        spec.update(left=r.float(s, "left", required=True), right=r.float(s, "right", required=True),
                    value=r.float(s, "value", required=True),
                    background=r.float(s, "background", 0.0))
        if not spec["right"] > spec["left"]:
            raise r.error(s, "right", "box needs right > left")
    else:
        path = Path(r.str(s, "path", required=True))
        if not path.is_absolute():
            path = base / path
        if not path.is_file():
            raise r.error(s, "path", f"file not found: {path}")
        spec.update(path=str(path))
    return spec


def _waveform(r: _Reader, section: str, key: str):
    raw = r.str(section, key, required=True)
    parts = raw.split()
    try:
        if len(parts) == 1:
            return float(parts[0])
        kind, args = parts[0], [float(p) for p in parts[1:]]
    except ValueError:
        raise r.error(section, key, f"cannot read waveform {raw!r}") from None
    arity = {"constant": 1, "step": 3, "ramp": 4}
    if kind not in arity:
        raise r.error(section, key, f"unknown waveform {kind!r}; expected one of {sorted(arity)}")
    if len(args) != arity[kind]:
        raise r.error(section, key, f"{kind} takes {arity[kind]} numbers, got {len(args)}")
    if kind == "ramp" and not args[1] > args[0]:
        raise r.error(section, key, "ramp needs t1 > t0")
    return (kind, *args)


def parse_config(text: str, source: str = "<string>", base: Optional[Path] = None) -> RunConfig:
    r = _parse_text(text, source)
    base = Path(".") if base is None else base
    for section in ("problem", "flux", "domain", "scheme", "initial"):
        if not r.parser.has_section(section):
            raise ConfigurationError(f"{source}: missing section [{section}]")

    problem = r.str("problem", "type", "cauchy")
    if problem not in ("cauchy", "ibvp"):
        raise r.error("problem", "type", f"expected cauchy or ibvp, got {problem!r}")
    t_final = r.float("problem", "t_final", required=True, positive=True)

    flux_name = r.str("flux", "name", required=True)
    flux_params = {}
    for key in r.parser.options("flux"):
        if key != "name":
            flux_params[key] = r.float("flux", key)

    lo = r.float("domain", "lo", required=True)
    hi = r.float("domain", "hi", required=True)
    if not hi > lo:
        raise r.error("domain", "hi", "need hi > lo")
    closure = r.str("domain", "closure", "extend")
    if closure not in ("compact_support", "zero", "periodic", "extend"):
        raise r.error("domain", "closure", f"unknown closure {closure!r}")
    sigma = r.float("domain", "sigma", None, positive=True)
    if problem == "ibvp" and sigma is None:
        raise r.error("domain", "sigma", "an IBVP needs the collar width sigma")

    lam_lo = r.float("scheme", "lam_lo")
    lam_hi = r.float("scheme", "lam_hi")
    if (lam_lo is None) != (lam_hi is None):
        raise r.error("scheme", "lam_lo", "give both lam_lo and lam_hi or neither")
    if lam_lo is not None and not lam_hi > lam_lo:
        raise r.error("scheme", "lam_hi", "need lam_hi > lam_lo")
    resolve = r.float("scheme", "resolve", 0.0)
    if resolve < 0:
        raise r.error("scheme", "resolve", "must be non-negative")

    boundary = {}
    if problem == "ibvp":
        if not r.parser.has_section("boundary"):
            raise ConfigurationError(f"{source}: an IBVP needs a [boundary] section")
        boundary = {"left": _waveform(r, "boundary", "left"),
                    "right": _waveform(r, "boundary", "right")}

    snapshots = r.floats("output", "snapshots", (0.0, t_final))
    for t in snapshots:
        if not 0.0 <= t <= t_final * (1 + 1e-12):
            raise r.error("output", "snapshots", f"time {t} outside [0, t_final={t_final}]")

    exact = r.str("exact", "kind", "none")
    if exact not in ("none", "riemann", "advection"):
        raise r.error("exact", "kind", f"unknown exact solution {exact!r}")

    suites = tuple(v for v in re.split(r"[,\s]+", r.str("verify", "suites", "") or "") if v)
    for name in suites:
        if name not in SUITES:
            raise r.error("verify", "suites", f"unknown suite {name!r}; expected one of {SUITES}")
    verify = {
        "suites": suites,
        "levels": r.levels("verify", "levels"),
        "trials": r.int("verify", "trials", 100, positive=True),
        "exclude_unresolved": r.bool("verify", "exclude_unresolved", True),
        "c1": r.float("verify", "c1", None, positive=True),
        "properties_N": r.int("verify", "properties_n", 200, positive=True),
        "properties_M": r.int("verify", "properties_m", 200, positive=True),
        "properties_dt": r.float("verify", "properties_dt", 0.01, positive=True),
        "properties_lo": r.float("verify", "properties_lo", 0.0),
        "properties_hi": r.float("verify", "properties_hi", 1.0),
    }
    compare = {
        "godunov": r.bool("compare", "godunov", problem == "cauchy"),
        "max_exact": r.float("compare", "max_exact", None, positive=True),
        "max_godunov": r.float("compare", "max_godunov", None, positive=True),
        "cfl": r.float("compare", "cfl", 0.9, positive=True),
    }
    convergence = {
        "levels": r.levels("convergence", "levels"),
        "min_ratio": r.float("convergence", "min_ratio", None, positive=True),
        "max_ratio": r.float("convergence", "max_ratio", None, positive=True),
    }

    raw = {s: dict(r.parser.items(s)) for s in r.parser.sections()}
    return RunConfig(
        name=r.str("problem", "name", Path(source).stem),
        problem=problem, t_final=t_final, seed=r.int("problem", "seed", 0),
        flux_name=flux_name, flux_params=flux_params, lo=lo, hi=hi,
        N=r.int("domain", "n", required=True, positive=True),
        M=r.int("scheme", "m", required=True, positive=True),
        n=r.int("scheme", "n", required=True, positive=True),
        closure=closure, sigma=sigma, resolve=resolve,
        substeps=r.int("scheme", "substeps", None, positive=True),
        alpha=r.bool("scheme", "alpha", True),
        lam_range=None if lam_lo is None else (lam_lo, lam_hi),
        initial=_initial(r, base), boundary=boundary, snapshots=snapshots,
        plot=r.bool("output", "plot", True),
        companion=r.bool("output", "companion", False), exact=exact, verify=verify,
        compare=compare, convergence=convergence, raw=raw, source=source)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, source=str(path), base=path.parent)


# {{{ presets

PRESET_DIR = Path(__file__).parent / "presets"


def preset_names() -> list:
    return sorted(p.stem for p in PRESET_DIR.glob("*.ini"))


def preset_path(name: str) -> Path:
    path = PRESET_DIR / f"{name}.ini"
    if not path.is_file():
        raise ConfigurationError(f"unknown preset {name!r}; known: {', '.join(preset_names())}")
    return path


def resolve_config_path(arg: str) -> Path:
    """A file path, or the name of a shipped preset."""
    path = Path(arg)
    if path.is_file():
        return path
    if path.suffix == "" and (PRESET_DIR / f"{arg}.ini").is_file():
        return PRESET_DIR / f"{arg}.ini"
    raise ConfigurationError(f"config file not found: {arg}")

# }}}


def read_initial_csv(path) -> tuple:
    """Two-column (x, u) CSV with a header row, as written by ``run``."""
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigurationError(f"cannot read initial data {path}: {exc}") from None
    if data.shape[1] < 2 or data.shape[0] < 2:
        raise ConfigurationError(f"initial data {path} needs at least two (x, u) rows")
    return data[:, 0], data[:, 1]
