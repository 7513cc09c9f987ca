"""Experiment config files: parse, validate, emit, hash.

Configs are YAML documents with sections ``model``, ``scheme``, ``rule``,
``protocol``, ``output`` and (for sweeps) ``sweep``. Parsing re-validates
every invariant of the underlying types and reports errors with their field
path, e.g. ``scheme.theta: must be > 0``. Emitting the effective config and
re-parsing it yields an identical experiment.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from typing import Any, Mapping

import yaml

from .dynamics import Deterministic, Fermi, UpdateRule
from .engine import MAX_SEED, RunConfig
from .game import PayoffParams
from .grid import MIN_SIDE_LENGTH
from .interference import InterferenceScheme, Neb, NebI, NebII, NoInterference, Pop
from .sweep import SweepSpec

SCHEME_KINDS = ("none", "pop", "neb", "neb_i", "neb_ii")
RULE_KINDS = ("deterministic", "fermi")


class ConfigError(ValueError):
    """A config file problem, message prefixed with the offending field path."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat, validated view of one experiment config document."""

    side_length: int
    b: float
    punishment: float
    initial_coop_probability: float
    initial_exact_fraction: bool
    scheme_kind: str
    p_c: float | None
    n_c: int | None
    theta: float | None
    eps: float | None
    rule_kind: str
    fermi_k: float | None
    mu: float
    generations: int
    measure_window: int
    replicates: int
    base_seed: int
    early_stop_on_homogeneous: bool
    output_dir: str
    label: str
    sweep_theta_values: tuple[float, ...] | None
    sweep_threshold_values: tuple[float, ...] | None

    def payoff(self) -> PayoffParams:
        return PayoffParams(b=self.b, punishment=self.punishment)

    def scheme(self) -> InterferenceScheme:
        if self.scheme_kind == "none":
            return NoInterference()
        if self.scheme_kind == "pop":
            if self.p_c is None or self.theta is None:
                raise ConfigError("scheme: p_c/theta unset (sweep-style config; use the sweep command)")
            return Pop(p_c=self.p_c, theta=self.theta)
        if self.scheme_kind == "neb":
            if self.n_c is None or self.theta is None:
                raise ConfigError("scheme: n_c/theta unset (sweep-style config; use the sweep command)")
            return Neb(n_c=self.n_c, theta=self.theta)
        if self.eps is None:
            raise ConfigError("scheme: eps unset (sweep-style config; use the sweep command)")
        if self.scheme_kind == "neb_i":
            return NebI(eps=self.eps)
        return NebII(eps=self.eps)

    def rule(self) -> UpdateRule:
        if self.rule_kind == "deterministic":
            return Deterministic()
        return Fermi(K=self.fermi_k, mu=self.mu)

    def run_config(self, scheme: InterferenceScheme | None = None) -> RunConfig:
        return RunConfig(
            side_length=self.side_length,
            payoff=self.payoff(),
            scheme=self.scheme() if scheme is None else scheme,
            rule=self.rule(),
            generations=self.generations,
            measure_window=self.measure_window,
            seed=self.base_seed,
            initial_coop_probability=self.initial_coop_probability,
            initial_exact_fraction=self.initial_exact_fraction,
            early_stop_on_homogeneous=self.early_stop_on_homogeneous,
        )

    def sweep_spec(self) -> SweepSpec:
        if self.sweep_theta_values is None or self.sweep_threshold_values is None:
            raise ConfigError("sweep: section with theta_values and threshold_values required")
        if self.scheme_kind == "none":
            raise ConfigError("sweep: scheme.kind must name a scheme family, not 'none'")
        try:
            return SweepSpec(
                base=self.run_config(scheme=NoInterference()),
                scheme_kind=self.scheme_kind,
                theta_values=self.sweep_theta_values,
                threshold_values=self.sweep_threshold_values,
                replicates=self.replicates,
                base_seed=self.base_seed,
            )
        except ValueError as exc:
            raise ConfigError(f"sweep: {exc}") from exc


class _Section:
    """Typed accessors over one config mapping, with field-path errors."""

    def __init__(self, name: str, data: Any):
        if data is None:
            data = {}
        if not isinstance(data, Mapping):
            raise ConfigError(f"{name}: must be a mapping, got {type(data).__name__}")
        self.name = name
        self.data = dict(data)

    def reject_unknown(self, known: tuple[str, ...]) -> None:
        unknown = [key for key in self.data if key not in known]
        if unknown:
            raise ConfigError(f"{self.name}.{unknown[0]}: unknown field")

    def _fetch(self, field: str, required: bool, default):
        if field in self.data:
            return self.data[field]
        if required:
            raise ConfigError(f"{self.name}.{field}: required field is missing")
        return default

    def get_int(self, field: str, required: bool = False, default: int | None = None) -> int | None:
        value = self._fetch(field, required, default)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{self.name}.{field}: expected an integer, got {value!r}")
        return value

    def get_float(self, field: str, required: bool = False, default=None) -> float | None:
        value = self._fetch(field, required, default)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{self.name}.{field}: expected a number, got {value!r}")
        return float(value)

    def get_bool(self, field: str, required: bool = False, default=None) -> bool | None:
        value = self._fetch(field, required, default)
        if value is None:
            return None
        if not isinstance(value, bool):
            raise ConfigError(f"{self.name}.{field}: expected true/false, got {value!r}")
        return value

    def get_str(self, field: str, required: bool = False, default=None) -> str | None:
        value = self._fetch(field, required, default)
        if value is None:
            return None
        if not isinstance(value, str):
            raise ConfigError(f"{self.name}.{field}: expected a string, got {value!r}")
        return value

    def get_float_list(self, field: str) -> tuple[float, ...] | None:
        value = self._fetch(field, required=False, default=None)
        if value is None:
            return None
        if not isinstance(value, (list, tuple)) or not value:
            raise ConfigError(f"{self.name}.{field}: expected a non-empty list of numbers")
        out = []
        for item in value:
            if isinstance(item, bool) or not isinstance(item, (int, float)):
                raise ConfigError(f"{self.name}.{field}: expected numbers, got {item!r}")
            out.append(float(item))
        return tuple(out)


def _fraction_from(value: float, z: int, field: str) -> float:
    """Population threshold: fraction in [0, 1], or a count in (1, Z] scaled by Z."""
    if value > 1.0:
        if value != int(value) or value > z:
            raise ConfigError(f"{field}: count form must be an integer in 1..Z={z}, got {value}")
        return value / z
    if value < 0.0:
        raise ConfigError(f"{field}: must be a fraction in [0, 1] or a count, got {value}")
    return value


def parse_config(data: Mapping[str, Any]) -> ExperimentConfig:
    root = _Section("config", data)
    root.reject_unknown(("model", "scheme", "rule", "protocol", "output", "sweep"))

    model = _Section("model", root.data.get("model"))
    model.reject_unknown(
        (
            "side_length",
            "b",
            "punishment",
            "initial_coop_probability",
            "initial_exact_fraction",
        )
    )
    side_length = model.get_int("side_length", required=True)
    if side_length < MIN_SIDE_LENGTH:
        raise ConfigError(f"model.side_length: must be >= {MIN_SIDE_LENGTH}, got {side_length}")
    b = model.get_float("b", required=True)
    punishment = model.get_float("punishment", default=0.0)
    initial_coop = model.get_float("initial_coop_probability", default=0.5)
    exact_fraction = model.get_bool("initial_exact_fraction", default=False)
    try:
        PayoffParams(b=b, punishment=punishment)
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from exc
    if not 0.0 <= initial_coop <= 1.0:
        raise ConfigError(
            f"model.initial_coop_probability: must be in [0, 1], got {initial_coop}"
        )

    has_sweep = "sweep" in root.data

    scheme = _Section("scheme", root.data.get("scheme"))
    scheme.reject_unknown(("kind", "p_c", "n_c", "theta", "eps"))
    scheme_kind = scheme.get_str("kind", required=True)
    if scheme_kind not in SCHEME_KINDS:
        raise ConfigError(f"scheme.kind: must be one of {SCHEME_KINDS}, got {scheme_kind!r}")
    allowed_fields = {
        "none": (),
        "pop": ("p_c", "theta"),
        "neb": ("n_c", "theta"),
        "neb_i": ("eps",),
        "neb_ii": ("eps",),
    }[scheme_kind]
    for field in ("p_c", "n_c", "theta", "eps"):
        if field in scheme.data and field not in allowed_fields:
            raise ConfigError(f"scheme.{field}: not valid for kind {scheme_kind!r}")
        if field in scheme.data and has_sweep:
            raise ConfigError(
                f"scheme.{field}: not allowed alongside a sweep section "
                "(cell values come from sweep.theta_values / sweep.threshold_values)"
            )
    p_c = n_c = theta = eps = None
    z = side_length * side_length
    if scheme_kind == "pop" and not has_sweep:
        p_c = _fraction_from(scheme.get_float("p_c", required=True), z, "scheme.p_c")
        theta = scheme.get_float("theta", required=True)
    elif scheme_kind == "neb" and not has_sweep:
        n_c = scheme.get_int("n_c", required=True)
        theta = scheme.get_float("theta", required=True)
    elif scheme_kind in ("neb_i", "neb_ii") and not has_sweep:
        eps = scheme.get_float("eps", required=True)

    rule = _Section("rule", root.data.get("rule"))
    rule.reject_unknown(("kind", "K", "mu"))
    rule_kind = rule.get_str("kind", required=True)
    if rule_kind not in RULE_KINDS:
        raise ConfigError(f"rule.kind: must be one of {RULE_KINDS}, got {rule_kind!r}")
    fermi_k = None
    mu = 0.0
    if rule_kind == "fermi":
        fermi_k = rule.get_float("K", required=True)
        mu = rule.get_float("mu", default=0.0)
    elif "K" in rule.data or "mu" in rule.data:
        raise ConfigError("rule.K: only valid when rule.kind is 'fermi'")

    protocol = _Section("protocol", root.data.get("protocol"))
    protocol.reject_unknown(
        (
            "generations",
            "measure_window",
            "replicates",
            "base_seed",
            "early_stop_on_homogeneous",
        )
    )
    generations = protocol.get_int("generations", default=200)
    measure_window = protocol.get_int("measure_window", default=50)
    replicates = protocol.get_int("replicates", default=1)
    base_seed = protocol.get_int("base_seed", default=0)
    early_stop = protocol.get_bool("early_stop_on_homogeneous", default=True)
    if replicates < 1:
        raise ConfigError(f"protocol.replicates: must be >= 1, got {replicates}")
    if not 0 <= base_seed < MAX_SEED:
        raise ConfigError(f"protocol.base_seed: must be in [0, 2^64), got {base_seed}")

    output = _Section("output", root.data.get("output"))
    output.reject_unknown(("directory", "label"))
    output_dir = output.get_str("directory", default="runs")
    label = output.get_str("label", default="experiment")

    sweep_theta = sweep_thresholds = None
    if "sweep" in root.data:
        sweep = _Section("sweep", root.data.get("sweep"))
        sweep.reject_unknown(("theta_values", "threshold_values"))
        sweep_theta = sweep.get_float_list("theta_values")
        sweep_thresholds = sweep.get_float_list("threshold_values")
        if sweep_thresholds is None:
            raise ConfigError("sweep.threshold_values: required field is missing")
        if sweep_theta is None:
            if scheme_kind in ("neb_i", "neb_ii"):
                sweep_theta = (1.0,)  # placeholder; these schemes take no theta
            else:
                raise ConfigError("sweep.theta_values: required field is missing")
        if scheme_kind == "pop":
            sweep_thresholds = tuple(
                _fraction_from(v, z, "sweep.threshold_values") for v in sweep_thresholds
            )

    config = ExperimentConfig(
        side_length=side_length,
        b=b,
        punishment=punishment,
        initial_coop_probability=initial_coop,
        initial_exact_fraction=exact_fraction,
        scheme_kind=scheme_kind,
        p_c=p_c,
        n_c=n_c,
        theta=theta,
        eps=eps,
        rule_kind=rule_kind,
        fermi_k=fermi_k,
        mu=mu,
        generations=generations,
        measure_window=measure_window,
        replicates=replicates,
        base_seed=base_seed,
        early_stop_on_homogeneous=early_stop,
        output_dir=output_dir,
        label=label,
        sweep_theta_values=sweep_theta,
        sweep_threshold_values=sweep_thresholds,
    )
    # Surface any remaining type-level invariant violation with its section.
    placeholder = NoInterference() if has_sweep else None
    try:
        if not has_sweep:
            config.scheme()
    except ValueError as exc:
        raise ConfigError(f"scheme: {exc}") from exc
    try:
        config.rule()
    except ValueError as exc:
        raise ConfigError(f"rule: {exc}") from exc
    try:
        config.run_config(scheme=placeholder)
    except ValueError as exc:
        raise ConfigError(f"protocol: {exc}") from exc
    return config


def parse_config_text(text: str) -> ExperimentConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config: invalid YAML ({exc})") from exc
    if data is None:
        raise ConfigError("config: document is empty")
    if not isinstance(data, Mapping):
        raise ConfigError("config: top level must be a mapping of sections")
    return parse_config(data)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config_text(fh.read())


def config_dict(config: ExperimentConfig) -> dict:
    """Nested section layout of the effective config (round-trips via parse)."""
    doc: dict[str, Any] = {
        "model": {
            "side_length": config.side_length,
            "b": config.b,
            "punishment": config.punishment,
            "initial_coop_probability": config.initial_coop_probability,
            "initial_exact_fraction": config.initial_exact_fraction,
        },
        "scheme": {"kind": config.scheme_kind},
        "rule": {"kind": config.rule_kind},
        "protocol": {
            "generations": config.generations,
            "measure_window": config.measure_window,
            "replicates": config.replicates,
            "base_seed": config.base_seed,
            "early_stop_on_homogeneous": config.early_stop_on_homogeneous,
        },
        "output": {"directory": config.output_dir, "label": config.label},
    }
    for field, value in (
        ("p_c", config.p_c),
        ("n_c", config.n_c),
        ("theta", config.theta),
        ("eps", config.eps),
    ):
        if value is not None:
            doc["scheme"][field] = value
    if config.rule_kind == "fermi":
        doc["rule"]["K"] = config.fermi_k
        doc["rule"]["mu"] = config.mu
    if config.sweep_theta_values is not None:
        doc["sweep"] = {
            "theta_values": list(config.sweep_theta_values),
            "threshold_values": list(config.sweep_threshold_values),
        }
    return doc


def emit_config(config: ExperimentConfig) -> str:
    return yaml.safe_dump(config_dict(config), sort_keys=True)


def config_hash(config: ExperimentConfig) -> str:
    """8-hex-char digest of the experiment parameters (output section excluded)."""
    doc = config_dict(config)
    doc.pop("output", None)
    canonical = yaml.safe_dump(doc, sort_keys=True)
    return hashlib.blake2b(canonical.encode(), digest_size=4).hexdigest()


def with_overrides(
    config: ExperimentConfig,
    seed: int | None = None,
    output_dir: str | None = None,
) -> ExperimentConfig:
    if seed is not None:
        if not 0 <= seed < MAX_SEED:
            raise ConfigError(f"--seed: must be in [0, 2^64), got {seed}")
        config = replace(config, base_seed=seed)
    if output_dir is not None:
        config = replace(config, output_dir=output_dir)
    return config
