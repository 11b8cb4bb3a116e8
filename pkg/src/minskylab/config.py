"""TOML scenario files.

A file has an optional ``schema = 1`` key and the sections ``[params]``
(with ``[params.phillips]``), ``[driver]``, ``[integration]`` and ``[init]``.
Every key is optional and falls back to the documented defaults; unknown keys
are rejected. Example::

    schema = 1
    name = "fig1-row2-alpha0.02"

    [params]
    theta1 = 0.5
    theta2 = 0.5

    [driver]
    kind = "constant"
    alpha = 0.02

    [integration]
    dt = 0.01
    horizon = 250
    record_stride = 10

    [init]
    standard = true          # or: [init.explicit] d_target, debt, employment, wage_share
"""
from __future__ import annotations

import sys
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .dynamics import Constant, IntegrationConfig, LinearRamp, StepDown, StochasticAnnual
from .errors import ConfigError, MinskyError
from .experiments import DEFAULT_SEED, Scenario
from .model import ModelParams, PhillipsCurve, SystemState

SCHEMA_VERSION = 1

PARAM_KEYS = ("r", "delta", "nu", "theta1", "theta2", "eta1", "eta2", "d0", "population", "y0")
PHILLIPS_KEYS = ("c1", "c2", "c3", "c4")
DRIVER_DEFAULTS = {
    "constant": {"alpha": 0.02},
    "step": {"alpha_before": 0.02, "alpha_after": 0.0, "t_switch": 50.0},
    "ramp": {"alpha_before": 0.02, "alpha_after": 0.0, "t_start": 50.0, "t_end": 60.0},
    "stochastic": {"mean": 0.02, "std_dev": 0.01, "seed": DEFAULT_SEED, "mean_after": None, "t_switch": None},
}
DRIVER_TYPES = {"constant": Constant, "step": StepDown, "ramp": LinearRamp, "stochastic": StochasticAnnual}
INTEGRATION_KEYS = ("dt", "horizon", "record_stride", "eps_singularity")
STATE_KEYS = ("d_target", "debt", "employment", "wage_share")


def _reject_unknown(table: dict, allowed, section: str):
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key {section}.{key}", key=f"{section}.{key}")


def _number(value, key: str, integer: bool = False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}", key=key)
    if integer:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{key} must be an integer, got {value!r}", key=key)
        return int(value)
    return float(value)


def _table(doc: dict, name: str, parent: str = "") -> dict:
    val = doc.get(name, {})
    if not isinstance(val, dict):
        raise ConfigError(f"[{parent}{name}] must be a table", key=parent + name)
    return val


def scenario_from_dict(doc: dict, name: str = "config") -> Scenario:
    _reject_unknown(doc, ("schema", "name", "params", "driver", "integration", "init"), "top-level")
    schema = doc.get("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema version {schema!r} (expected {SCHEMA_VERSION})", key="schema")
    name = str(doc.get("name", name))

    params_tbl = _table(doc, "params")
    _reject_unknown(params_tbl, PARAM_KEYS + ("phillips",), "params")
    phil_tbl = _table(params_tbl, "phillips", "params.")
    _reject_unknown(phil_tbl, PHILLIPS_KEYS, "params.phillips")
    try:
        curve = PhillipsCurve(**{k: _number(v, f"params.phillips.{k}") for k, v in phil_tbl.items()})
    except MinskyError as exc:
        raise ConfigError(f"invalid [params.phillips]: {exc}", key="params.phillips") from exc
    values = {k: _number(v, f"params.{k}") for k, v in params_tbl.items() if k != "phillips"}
    try:
        params = ModelParams(phillips=curve, **values)
    except MinskyError as exc:
        bad = next((k for k in PARAM_KEYS if str(exc).startswith(k + " ")), None)
        raise ConfigError(f"invalid [params]: {exc}", key=f"params.{bad}" if bad else "params") from exc

    drv_tbl = dict(_table(doc, "driver"))
    kind = drv_tbl.pop("kind", "constant")
    if kind not in DRIVER_TYPES:
        raise ConfigError(f"driver.kind must be one of {', '.join(DRIVER_TYPES)}, got {kind!r}", key="driver.kind")
    defaults = DRIVER_DEFAULTS[kind]
    _reject_unknown(drv_tbl, defaults, "driver")
    fields = dict(defaults)
    for k, v in drv_tbl.items():
        fields[k] = _number(v, f"driver.{k}", integer=(k == "seed"))
    try:
        driver = DRIVER_TYPES[kind](**fields)
    except (MinskyError, TypeError) as exc:
        raise ConfigError(f"invalid [driver]: {exc}", key="driver") from exc

    int_tbl = _table(doc, "integration")
    _reject_unknown(int_tbl, INTEGRATION_KEYS, "integration")
    ivals = {k: _number(v, f"integration.{k}", integer=(k == "record_stride")) for k, v in int_tbl.items()}
    try:
        config = IntegrationConfig(**ivals)
    except MinskyError as exc:
        bad = next((k for k in INTEGRATION_KEYS if str(exc).startswith(k + " ")), None)
        raise ConfigError(f"invalid [integration]: {exc}", key=f"integration.{bad}" if bad else "integration") from exc

    init_tbl = _table(doc, "init")
    _reject_unknown(init_tbl, ("standard", "explicit"), "init")
    standard = init_tbl.get("standard", "explicit" not in init_tbl)
    if not isinstance(standard, bool):
        raise ConfigError("init.standard must be true or false", key="init.standard")
    init = None
    if not standard:
        exp = _table(init_tbl, "explicit", "init.")
        _reject_unknown(exp, STATE_KEYS, "init.explicit")
        missing = [k for k in STATE_KEYS if k not in exp]
        if missing:
            raise ConfigError(f"init.explicit is missing {', '.join(missing)}", key=f"init.explicit.{missing[0]}")
        init = SystemState(**{k: _number(exp[k], f"init.explicit.{k}") for k in STATE_KEYS})
    elif "explicit" in init_tbl:
        raise ConfigError("init.explicit given together with standard = true", key="init.standard")
    return Scenario(name=name, params=params, driver=driver, init=init, config=config)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path} is not valid TOML: {exc}") from exc
    return scenario_from_dict(doc, name=path.stem)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    return repr(float(v))


def scenario_to_toml(sc: Scenario) -> str:
    """Serialise a scenario; :func:`scenario_from_dict` reads it back unchanged."""
    p, drv, cfg = sc.params, sc.driver, sc.config
    lines = [f"schema = {SCHEMA_VERSION}", f"name = {_fmt(sc.name)}", "", "[params]"]
    lines += [f"{k} = {_fmt(getattr(p, k))}" for k in PARAM_KEYS]
    lines += ["", "[params.phillips]"]
    lines += [f"{k} = {_fmt(getattr(p.phillips, k))}" for k in PHILLIPS_KEYS]
    lines += ["", "[driver]", f"kind = {_fmt(drv.kind)}"]
    for k in DRIVER_DEFAULTS[drv.kind]:
        v = getattr(drv, k)
        if v is not None:
            lines.append(f"{k} = {_fmt(int(v) if k == 'seed' else v)}")
    lines += ["", "[integration]", f"dt = {_fmt(cfg.dt)}", f"horizon = {_fmt(cfg.horizon)}",
              f"record_stride = {cfg.record_stride}", f"eps_singularity = {_fmt(cfg.eps_singularity)}", "", "[init]"]
    if sc.init is None:
        lines.append("standard = true")
    else:
        lines += ["standard = false", "", "[init.explicit]"]
        lines += [f"{k} = {_fmt(getattr(sc.init, k))}" for k in STATE_KEYS]
    return "\n".join(lines) + "\n"
