"""Flat ``key = value`` experiment configuration.

Keys are dotted (``grid.Nz = 32``); blank lines and lines starting with
``#`` are ignored.  Every key is checked against a whitelist and every
value is parsed and validated before a suite starts, so a malformed file
fails fast with a message naming the offending field.

Recognised keys::

    suite                  suite name (may also be given on the command line)
    group.preset           heisenberg1 | heisenbergN | quaternionic
    group.ell, group.nc    explicit dimensions (instead of a preset)
    group.U                comma separated entries of the U matrices
    group.htype            require the H-type relations (true/false)
    grid.L, grid.T         box half-width and central half-period
                           (``pi``, ``2pi``, ``pi/2`` are accepted)
    grid.Nz, grid.Nt       even point counts
    window.jmin/jmax       dyadic window
    seed                   unsigned 64-bit seed
    eps                    multiplier accuracy
    order                  stencil order (even, 2..16) or ``spectral``
    corpus.manifest        path of a corpus manifest (relative to the file)
    input.hgrd             comma separated HGRD files used as input functions
    output.dir             report directory
    output.hgrd            also export the input functions (true/false)
    params.<name>          suite parameters, see :mod:`carnot_spectra.suites`
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass, field

from .grid import Grid
from .group import GroupSpec, heisenberg, make_group, quaternionic_htype


class ConfigError(ValueError):
    """Invalid configuration; the message names the field."""


TOP_KEYS = {
    "suite", "group.preset", "group.ell", "group.nc", "group.U",
    "group.htype", "grid.L", "grid.T", "grid.Nz", "grid.Nt", "window.jmin",
    "window.jmax", "seed", "eps", "order", "corpus.manifest", "input.hgrd",
    "output.dir", "output.hgrd",
}


@dataclass
class ExperimentConfig:
    """Resolved experiment configuration."""

    suite: str | None = None
    group_preset: str | None = "heisenberg1"
    group_ell: int | None = None
    group_nc: int | None = None
    group_U: tuple | None = None
    group_htype: bool = False
    L: float = 8.0
    T: float = math.pi
    Nz: int = 32
    Nt: int = 32
    jmin: int = -2
    jmax: int = 4
    seed: int = 0
    eps: float = 1e-8
    order: int | str = 8
    manifest: str | None = None
    hgrd_inputs: tuple = ()
    out_dir: str = "out"
    export_hgrd: bool = False
    params: dict = field(default_factory=dict)
    base_dir: str = "."
    explicit: frozenset = frozenset()

    def group(self) -> GroupSpec:
        if self.group_ell is not None:
            return make_group(self.group_ell, self.group_nc, self.group_U,
                              require_htype=self.group_htype)
        return preset_group(self.group_preset)

    def grid(self) -> Grid:
        return Grid(self.L, self.T, self.Nz, self.Nt)

    @property
    def window(self) -> tuple:
        return (self.jmin, self.jmax)

    def manifest_path(self) -> str | None:
        if self.manifest is None or self.manifest == "builtin":
            return None
        return os.path.normpath(os.path.join(self.base_dir, self.manifest))

    def resolved(self) -> dict:
        """Plain dictionary of every setting (embedded in reports)."""
        out = {"suite": self.suite}
        if self.group_ell is not None:
            out.update({"group.ell": self.group_ell, "group.nc": self.group_nc,
                        "group.U": list(self.group_U),
                        "group.htype": self.group_htype})
        else:
            out["group.preset"] = self.group_preset
        out.update({"grid.L": self.L, "grid.T": self.T, "grid.Nz": self.Nz,
                    "grid.Nt": self.Nt, "window.jmin": self.jmin,
                    "window.jmax": self.jmax, "seed": self.seed,
                    "eps": self.eps, "order": self.order,
                    "corpus.manifest": self.manifest or "builtin",
                    "input.hgrd": list(self.hgrd_inputs),
                    "output.hgrd": self.export_hgrd})
        for k in sorted(self.params):
            v = self.params[k]
            if isinstance(v, (tuple, list)):
                v = [x.to_text() if hasattr(x, "to_text") else x for x in v]
            out[f"params.{k}"] = v
        return out


def preset_group(name: str) -> GroupSpec:
    m = re.fullmatch(r"heisenberg(\d+)", name or "")
    if m and int(m.group(1)) >= 1:
        return heisenberg(int(m.group(1)))
    if name == "quaternionic":
        return quaternionic_htype()
    raise ConfigError(f"group.preset: unknown preset {name!r} "
                      f"(heisenberg1, heisenberg2, ..., quaternionic)")


def parse_real(text: str, key: str) -> float:
    """Parse a real number; multiples and fractions of ``pi`` are allowed."""
    s = text.strip().replace(" ", "")
    m = re.fullmatch(r"([0-9.eE+-]*)\*?pi(?:/([0-9.eE+]+))?", s)
    try:
        if m:
            a = {"": 1.0, "+": 1.0, "-": -1.0}.get(m.group(1))
            a = float(m.group(1)) if a is None else a
            b = float(m.group(2)) if m.group(2) else 1.0
            return a * math.pi / b
        v = float(s)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"{key}: value must be finite, got {text!r}")
    return v


def parse_int(text: str, key: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from None


def parse_bool(text: str, key: str) -> bool:
    s = text.strip().lower()
    if s in ("true", "yes", "1", "on"):
        return True
    if s in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{key}: expected true or false, got {text!r}")


def read_pairs(text: str, source: str = "<config>") -> list:
    """Split config text into ``(key, value, line)`` triples."""
    out = []
    seen = set()
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{n}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{n}: empty key")
        if key in seen:
            raise ConfigError(f"{key}: duplicate key ({source}:{n})")
        seen.add(key)
        out.append((key, value, n))
    return out


def parse_config(text: str, base_dir: str = ".", source: str = "<config>",
                 suite: str | None = None, seed: int | None = None
                 ) -> ExperimentConfig:
    """Parse and validate configuration text.

    ``suite`` and ``seed`` override the values in the file (command-line
    arguments).  Suite parameters are validated by
    :func:`carnot_spectra.suites.validate_params`.

    Raises
    ------
    ConfigError
        On unknown keys, malformed values or violated constraints.
    """
    from .suites import SUITES, validate_params

    cfg = ExperimentConfig(base_dir=base_dir)
    raw_params = {}
    explicit = set()
    for key, value, _ in read_pairs(text, source):
        explicit.add(key)
        if key.startswith("params."):
            raw_params[key[len("params."):]] = value
            continue
        if key not in TOP_KEYS:
            raise ConfigError(f"{key}: unknown configuration key")
        if key == "suite":
            cfg.suite = value
        elif key == "group.preset":
            cfg.group_preset = value
        elif key in ("group.ell", "group.nc"):
            setattr(cfg, key.replace(".", "_"), parse_int(value, key))
        elif key == "group.U":
            try:
                cfg.group_U = tuple(float(v) for v in value.split(","))
            except ValueError:
                raise ConfigError(f"group.U: expected comma separated "
                                  f"numbers, got {value!r}") from None
        elif key == "group.htype":
            cfg.group_htype = parse_bool(value, key)
        elif key in ("grid.L", "grid.T"):
            setattr(cfg, key[5:], parse_real(value, key))
        elif key in ("grid.Nz", "grid.Nt"):
            setattr(cfg, key[5:], parse_int(value, key))
        elif key in ("window.jmin", "window.jmax"):
            setattr(cfg, key[7:], parse_int(value, key))
        elif key == "seed":
            cfg.seed = parse_seed(value)
        elif key == "eps":
            cfg.eps = parse_real(value, key)
        elif key == "order":
            cfg.order = value if value == "spectral" else parse_int(value, key)
        elif key == "corpus.manifest":
            cfg.manifest = value
        elif key == "input.hgrd":
            cfg.hgrd_inputs = tuple(v.strip() for v in value.split(",")
                                    if v.strip())
        elif key == "output.dir":
            cfg.out_dir = value
        elif key == "output.hgrd":
            cfg.export_hgrd = parse_bool(value, key)
    if suite is not None:
        if cfg.suite is not None and cfg.suite != suite:
            raise ConfigError(f"suite: command line asks for {suite!r} but "
                              f"the config file is for {cfg.suite!r}")
        cfg.suite = suite
    if seed is not None:
        cfg.seed = parse_seed(str(seed))
    cfg.explicit = frozenset(explicit)
    _validate(cfg)
    if cfg.suite not in SUITES:
        raise ConfigError(f"suite: unknown suite {cfg.suite!r} "
                          f"(one of {', '.join(SUITES)})")
    cfg.params = validate_params(cfg, raw_params)
    return cfg


def load_config(path, suite: str | None = None, seed: int | None = None
                ) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") \
            from None
    base = os.path.dirname(os.path.abspath(path))
    return parse_config(text, base, os.fspath(path), suite, seed)


def parse_seed(text: str) -> int:
    v = parse_int(text, "seed")
    if not 0 <= v < 2 ** 64:
        raise ConfigError(f"seed: must be an unsigned 64-bit integer, got {v}")
    return v


def _validate(cfg: ExperimentConfig):
    if cfg.suite is None:
        raise ConfigError("suite: no suite given")
    for name in ("Nz", "Nt"):
        v = getattr(cfg, name)
        if v < 2 or v % 2:
            raise ConfigError(f"grid.{name}: must be an even integer >= 2, "
                              f"got {v}")
    for name in ("L", "T"):
        if not getattr(cfg, name) > 0:
            raise ConfigError(f"grid.{name}: must be positive")
    if cfg.jmin > cfg.jmax:
        raise ConfigError(f"window.jmin: must not exceed window.jmax "
                          f"({cfg.jmin} > {cfg.jmax})")
    if not cfg.eps > 0:
        raise ConfigError("eps: must be positive")
    if cfg.order != "spectral" and (cfg.order % 2 or not 2 <= cfg.order <= 16):
        raise ConfigError(f"order: must be an even integer in [2, 16] or "
                          f"'spectral', got {cfg.order}")
    explicit = [k for k in ("group.ell", "group.nc", "group.U")
                if getattr(cfg, k.replace(".", "_")) is not None]
    if explicit:
        if len(explicit) != 3:
            missing = sorted({"group.ell", "group.nc", "group.U"}
                             - set(explicit))
            raise ConfigError(f"{', '.join(missing)}: required when the "
                              f"group is given explicitly")
        try:
            g = make_group(cfg.group_ell, cfg.group_nc, cfg.group_U,
                           require_htype=cfg.group_htype)
        except ValueError as exc:
            raise ConfigError(f"group.U: {exc}") from None
    else:
        g = preset_group(cfg.group_preset)
    npts = cfg.Nz ** g.hdim * cfg.Nt ** g.nc
    if npts > 2 ** 26:
        raise ConfigError(f"grid.Nz: grid with {npts} points is too large")
