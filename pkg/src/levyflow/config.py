"""Plain-text config files: parsing, defaults, and the canonical echo.

Grammar (see docs/config.md): '#' comments, '[section]' headers, and
'key = value' lines.  Values parse as bool, int, float, comma lists, or
bare strings.  Keys named in the published parameter tables appear
verbatim (gamma_1, sigma_W, tau, h_x1, N_x1, ...).
"""

from __future__ import annotations

from .drivers import CauchyModulatedNoise, GaussianNoise, SwitchingNoise
from .errors import ConfigInvalid
from .grids import Grid
from .macro import MacroConfig
from .micro import MicroConfig
from .ensemble import EnsembleConfig


# ---------------------------------------------------------------------------
# parsing and rendering
# ---------------------------------------------------------------------------


def _parse_scalar(token: str):
    token = token.strip()
    low = token.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        pass
    return token


def parse_config_text(text: str):
    """Parse the documented key/value grammar into {section: {key: value}}."""
    sections: dict = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if not current:
                raise ConfigInvalid(f"line {lineno}: empty section name")
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigInvalid(f"line {lineno}: expected 'key = value'")
        if current is None:
            raise ConfigInvalid(f"line {lineno}: key outside any [section]")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigInvalid(f"line {lineno}: empty key")
        if "," in value:
            sections[current][key] = tuple(_parse_scalar(v) for v in value.split(","))
        else:
            sections[current][key] = _parse_scalar(value)
    return sections


def _render_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (tuple, list)):
        return ", ".join(_render_value(v) for v in value)
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def render_config(sections) -> str:
    """Canonical text form: sections and keys in sorted order."""
    lines = []
    for section in sorted(sections):
        lines.append(f"[{section}]")
        for key in sorted(sections[section]):
            lines.append(f"{key} = {_render_value(sections[section][key])}")
        lines.append("")
    return "\n".join(lines)


def load_config_file(path) -> dict:
    from pathlib import Path

    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text)


# ---------------------------------------------------------------------------
# schemas: defaults live here; a config file overrides by key
# ---------------------------------------------------------------------------

MACRO_DEFAULTS = {
    "N": 150,
    "tau": 0.1,
    "h_x1": 0.1,
    "h_x2": 0.1,
    "N_x1": 21,
    "N_x2": 21,
    "gamma_1": 0.005,
    "gamma_2": 0.05,
    "gamma_3": 0.015,
    "sigma_W": 0.131,
    "sigma_H": 0.0008,
    "gamma_C": 0.00035,
    "gamma_g": 0.0007,
    "gamma_h": 0.0037,
    "gamma_f": 0.0082,
    "a": 1.0,
    "a_1": 0.6,
    "a_2": 0.9,
    "qwiener_modes": 4,
    "solver_tol": 1e-10,
    "scheme_literal": False,
    "h0_amp": 0.2,
    "h0_sigma": 0.3,
    "c0_amp": 1.0,
    "c0_sigma": 0.25,
    "n0_smooth_sigma": 0.25,
    "ic_seed": 171717,
}

MICRO_DEFAULTS = {
    "M": 2500,
    "N": 25,
    "tau": 0.05,
    "noise": "gaussian",
    "h_1": 0.3,
    "h_2": 1.6,
    "h_3": 3.2,
    "efflux_rate": 3.6,
    "buffering_rate": 0.45,
    "production_rate": 8.1,
    "vascular_uptake": 0.3,
    "field_coupling": 0.02,
    "gamma": 0.4,
    "taxis_sign": 1.0,
    "noise_scale": 1.0,
    "deposit_bandwidth": 0.04,
    "grid_points": 41,
    "domain_length": 1.0,
    "lattice_lo": 0.28,
    "lattice_hi": 0.72,
    "proton_init": 1.0,
    "acid_amp": 3.0,
    "acid_sigma": 0.27,
    "tissue_lo": 0.5,
    "tissue_hi": 1.0,
    "tissue_smooth_sigma": 0.06,
    "ic_seed": 424242,
}

ENSEMBLE_DEFAULTS = {
    "M": 500,
    "kind": "macro",
    "snapshot_steps": (0, 50, 100, 150),
    "export_samples": (),
}

SYMBOL_DEFAULTS = {
    "name": "alpha_stable",
    "xi_max": 10.0,
    "points": 201,
}

# the 96/192/384 ladder is monotone for all of modes 1..3; the coarser
# 64-point start is preasymptotic for mode 3 at large exponents
FRACHECK_DEFAULTS = {
    "resolutions": (96, 192, 384),
    "exponents": (0.5, 1.0, 1.5),
    "modes": (1, 2, 3),
    "length": 1.0,
}

REPORT_DEFAULTS = {
    "levels": (0.2, 0.5, 0.8),
}

_NOISE_NAMES = {
    "gaussian": GaussianNoise,
    "switching": SwitchingNoise,
    "cauchy_modulated": CauchyModulatedNoise,
}


def resolve_section(name: str, defaults: dict, sections: dict):
    """Defaults overridden by the file section; unknown keys rejected and
    overrides coerced to the default's scalar type."""
    given = dict(sections.get(name, {}))
    unknown = set(given) - set(defaults)
    if unknown:
        raise ConfigInvalid(f"[{name}]: unknown keys {sorted(unknown)}")
    resolved = dict(defaults)
    for key, value in given.items():
        default = defaults[key]
        try:
            if isinstance(default, bool):
                if not isinstance(value, bool):
                    raise ValueError(value)
            elif isinstance(default, int) and not isinstance(value, bool):
                value = int(value)
            elif isinstance(default, float):
                value = float(value)
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid(f"[{name}] {key}: cannot interpret {value!r}") from exc
        resolved[key] = value
    return resolved


def _as_tuple(value):
    if isinstance(value, (tuple, list)):
        return tuple(value)
    return (value,)


def macro_config_from(sections) -> tuple:
    """Returns (MacroConfig, resolved mapping for the echo)."""
    r = resolve_section("macro", MACRO_DEFAULTS, sections)
    grid = Grid(
        (r["h_x1"] * r["N_x1"], r["h_x2"] * r["N_x2"]),
        (r["N_x1"], r["N_x2"]),
    )
    cfg = MacroConfig(
        grid=grid,
        tau=float(r["tau"]),
        n_steps=int(r["N"]),
        gamma_1=float(r["gamma_1"]),
        gamma_2=float(r["gamma_2"]),
        gamma_3=float(r["gamma_3"]),
        sigma_W=float(r["sigma_W"]),
        sigma_H=float(r["sigma_H"]),
        gamma_C=float(r["gamma_C"]),
        gamma_g=float(r["gamma_g"]),
        gamma_h=float(r["gamma_h"]),
        gamma_f=float(r["gamma_f"]),
        a=float(r["a"]),
        a_1=float(r["a_1"]),
        a_2=float(r["a_2"]),
        qwiener_modes=int(r["qwiener_modes"]),
        solver_tol=float(r["solver_tol"]),
        scheme_literal=bool(r["scheme_literal"]),
        h0_amp=float(r["h0_amp"]),
        h0_sigma=float(r["h0_sigma"]),
        c0_amp=float(r["c0_amp"]),
        c0_sigma=float(r["c0_sigma"]),
        n0_smooth_sigma=float(r["n0_smooth_sigma"]),
        ic_seed=int(r["ic_seed"]),
    )
    return cfg, r


def micro_config_from(sections) -> tuple:
    r = resolve_section("micro", MICRO_DEFAULTS, sections)
    noise_name = str(r["noise"])
    if noise_name not in _NOISE_NAMES:
        raise ConfigInvalid(
            f"unknown noise {noise_name!r}; choose from {sorted(_NOISE_NAMES)}"
        )
    n = int(r["grid_points"])
    cfg = MicroConfig(
        n_particles=int(r["M"]),
        n_steps=int(r["N"]),
        tau=float(r["tau"]),
        noise=_NOISE_NAMES[noise_name](),
        kill_low=float(r["h_1"]),
        kill_high=float(r["h_2"]),
        kill_acid=float(r["h_3"]),
        efflux_rate=float(r["efflux_rate"]),
        buffering_rate=float(r["buffering_rate"]),
        production_rate=float(r["production_rate"]),
        vascular_uptake=float(r["vascular_uptake"]),
        field_coupling=float(r["field_coupling"]),
        tissue_decay=float(r["gamma"]),
        taxis_sign=float(r["taxis_sign"]),
        noise_scale=float(r["noise_scale"]),
        deposit_bandwidth=float(r["deposit_bandwidth"]),
        grid=Grid((float(r["domain_length"]),) * 2, (n, n)),
        lattice_lo=float(r["lattice_lo"]),
        lattice_hi=float(r["lattice_hi"]),
        proton_init=float(r["proton_init"]),
        acid_amp=float(r["acid_amp"]),
        acid_sigma=float(r["acid_sigma"]),
        tissue_lo=float(r["tissue_lo"]),
        tissue_hi=float(r["tissue_hi"]),
        tissue_smooth_sigma=float(r["tissue_smooth_sigma"]),
        ic_seed=int(r["ic_seed"]),
    )
    return cfg, r


def ensemble_config_from(sections, base_seed: int, workers: int) -> tuple:
    r = resolve_section("ensemble", ENSEMBLE_DEFAULTS, sections)
    cfg = EnsembleConfig(
        n_samples=int(r["M"]),
        base_seed=base_seed,
        snapshot_steps=tuple(int(s) for s in _as_tuple(r["snapshot_steps"]) if s != ""),
        export_sample_ids=tuple(int(s) for s in _as_tuple(r["export_samples"]) if s != ""),
        workers=workers,
    )
    return cfg, r


def symbol_params_from(sections) -> dict:
    return resolve_section("symbol", SYMBOL_DEFAULTS, sections)


def fracheck_params_from(sections) -> dict:
    r = resolve_section("fracheck", FRACHECK_DEFAULTS, sections)
    r["resolutions"] = tuple(int(v) for v in _as_tuple(r["resolutions"]))
    r["exponents"] = tuple(float(v) for v in _as_tuple(r["exponents"]))
    r["modes"] = tuple(int(v) for v in _as_tuple(r["modes"]))
    return r


def report_params_from(sections) -> dict:
    r = resolve_section("report", REPORT_DEFAULTS, sections)
    r["levels"] = tuple(float(v) for v in _as_tuple(r["levels"]))
    return r


def echo_sections(**named_sections) -> dict:
    """Assemble the resolved mapping that goes into the run manifest."""
    return {name: dict(mapping) for name, mapping in named_sections.items() if mapping}
