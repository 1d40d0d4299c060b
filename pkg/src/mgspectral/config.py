"""Run configuration: a flat, diff-friendly key = value file with sections.

Format:

    # comment
    [section]
    key = value            # becomes "section.key"
    list_key = 0, 2.51     # comma-separated lists

Unsectioned keys are allowed and keep their bare name.  Values stay strings
until a typed accessor interprets them; unknown keys are rejected up front so
typos fail loudly.  The config hash is a sha256 over the sorted canonical
"key = value" lines, which is what run manifests record.

Sections and keys:

    [run]      kind (line|full|picard), scheme (exact_line|if_rk4), seed
    [grid]     N, pad
    [line]     q (rational triple), N_L, beta, amplitude, seed_offset,
               normalize_order, normalize_value (number or "auto:epsilon0")
    [field3d]  beta, amplitude, kmax, kind (random|curved), k1_list
    [model]    eps_hyper, eps_kappa, gamma, omega_prime
    [time]     dt, t_end, record_every
    [analysis] sobolev_orders, delta, alpha, C_s, C_alpha, C_kappa,
               cone_aperture
    [picard]   eps, s, n_max, steps, horizon (number or "auto"), drift
               (frozen|self_consistent), eps_sweep (vanishing-regularization
               list, reported in the summary)
    [checks]   enabled, leakage_tol, projected_mass_tol, divergence_tol,
               pairing_tol, nonlinear_rel_tol, energy_residual_tol,
               max_principle, decay_rate_tol, picard_ratio_max
    [outputs]  snapshots (none|ends), symbol_slices
"""

from __future__ import annotations

import hashlib
from fractions import Fraction
from pathlib import Path

from .errors import ConfigError

_KNOWN_KEYS = {
    "run.kind", "run.scheme", "run.seed",
    "grid.N", "grid.pad",
    "line.q", "line.N_L", "line.beta", "line.amplitude", "line.seed_offset",
    "line.normalize_order", "line.normalize_value",
    "field3d.beta", "field3d.amplitude", "field3d.kmax", "field3d.kind",
    "field3d.k1_list",
    "model.eps_hyper", "model.eps_kappa", "model.gamma", "model.omega_prime",
    "time.dt", "time.t_end", "time.record_every",
    "analysis.sobolev_orders", "analysis.delta", "analysis.alpha",
    "analysis.C_s", "analysis.C_alpha", "analysis.C_kappa",
    "analysis.cone_aperture",
    "picard.eps", "picard.s", "picard.n_max", "picard.steps", "picard.horizon",
    "picard.drift", "picard.eps_sweep",
    "checks.enabled", "checks.leakage_tol", "checks.projected_mass_tol",
    "checks.divergence_tol", "checks.pairing_tol", "checks.nonlinear_rel_tol",
    "checks.energy_residual_tol", "checks.max_principle",
    "checks.decay_rate_tol", "checks.picard_ratio_max",
    "outputs.snapshots", "outputs.symbol_slices",
}


class Config:
    """Flat string map with typed accessors."""

    def __init__(self, entries: dict[str, str]):
        unknown = sorted(set(entries) - _KNOWN_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        self.entries = dict(entries)

    # -- typed accessors ------------------------------------------------

    def _raw(self, key, default):
        val = self.entries.get(key, None)
        if val is None or val == "":
            return default
        return val

    def get_str(self, key, default=None):
        return self._raw(key, default)

    def get_int(self, key, default=None):
        v = self._raw(key, None)
        if v is None:
            return default
        try:
            return int(v)
        except ValueError as exc:
            raise ConfigError(f"{key}: expected integer, got {v!r}") from exc

    def get_float(self, key, default=None):
        v = self._raw(key, None)
        if v is None:
            return default
        try:
            return float(v)
        except ValueError as exc:
            raise ConfigError(f"{key}: expected number, got {v!r}") from exc

    def get_bool(self, key, default=None):
        v = self._raw(key, None)
        if v is None:
            return default
        low = v.strip().lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ConfigError(f"{key}: expected boolean, got {v!r}")

    def get_floats(self, key, default=()):
        v = self._raw(key, None)
        if v is None:
            return list(default)
        try:
            return [float(c.strip()) for c in v.split(",") if c.strip() != ""]
        except ValueError as exc:
            raise ConfigError(f"{key}: expected number list, got {v!r}") from exc

    def get_ints(self, key, default=()):
        v = self._raw(key, None)
        if v is None:
            return list(default)
        try:
            return [int(c.strip()) for c in v.split(",") if c.strip() != ""]
        except ValueError as exc:
            raise ConfigError(f"{key}: expected integer list, got {v!r}") from exc

    def get_rational_triple(self, key, default=None):
        v = self._raw(key, None)
        if v is None:
            return default
        parts = [c.strip() for c in v.split(",")]
        if len(parts) != 3:
            raise ConfigError(f"{key}: expected 3 components, got {v!r}")
        try:
            return tuple(Fraction(c) for c in parts)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"{key}: expected rational triple, got {v!r}") from exc

    # -- serialization ----------------------------------------------------

    def canonical_lines(self):
        return [f"{k} = {v}" for k, v in sorted(self.entries.items()) if v != ""]

    def hash(self) -> str:
        blob = "\n".join(self.canonical_lines()).encode()
        return hashlib.sha256(blob).hexdigest()

    def write(self, path):
        """Write the canonical sectioned form."""
        sections: dict[str, list[tuple[str, str]]] = {}
        for k, v in sorted(self.entries.items()):
            if v == "":
                continue
            sec, _, name = k.partition(".")
            sections.setdefault(sec, []).append((name, v))
        with open(path, "w") as fh:
            for sec in sorted(sections):
                fh.write(f"[{sec}]\n")
                for name, v in sections[sec]:
                    fh.write(f"{name} = {v}\n")
                fh.write("\n")


def parse_config_text(text: str) -> Config:
    entries: dict[str, str] = {}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if not section:
                raise ConfigError(f"line {lineno}: empty section name")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        full = f"{section}.{key}" if section else key
        if full in entries:
            raise ConfigError(f"line {lineno}: duplicate key {full}")
        entries[full] = value.strip()
    return Config(entries)


def load_config(path) -> Config:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)
