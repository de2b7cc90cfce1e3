"""JSON experiment configuration: schema validation and model conversion."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources

import jsonschema

from .errors import ConfigError
from .hyperbolic import boundary_point, cayley_to_disc, disc_point
from .regions import DEFAULT_R_CUT, RegionSpec
from .schottky import GeneratorSpec


def load_schema() -> dict:
    text = resources.files("eislab").joinpath("schema/config.schema.json").read_text()
    return json.loads(text)


def _reject_constant(name):
    raise ConfigError(f"non-finite number {name} in config")


@dataclass(frozen=True)
class LabConfig:
    model: str
    group: tuple
    xi: complex
    lambdas: tuple
    chart: tuple
    r0: float = 0.8
    tol: float = 0.02
    q: int = 8
    region: RegionSpec = field(default_factory=lambda: RegionSpec.fundamental(DEFAULT_R_CUT))
    output_dir: str = "out"
    certify_length: int = 4
    phi: str = "one"
    jensen_eps: float | None = None
    jensen_n_theta: int | None = None
    max_words: int = 10**7
    name: str = ""
    sha256: str = ""


def _complex(v) -> complex:
    if isinstance(v, list):
        return complex(v[0], v[1])
    return complex(v)


def _boundary(v, model: str) -> complex:
    if model == "half_plane":
        if v == "inf":
            return 1.0 + 0.0j
        z = _complex(v)
        if z.imag != 0:
            raise ConfigError(f"half-plane boundary point must be real or 'inf', got {v!r}")
        return cayley_to_disc(z.real)
    if v == "inf":
        raise ConfigError("'inf' is only meaningful in the half_plane model")
    return boundary_point(_complex(v))


def _interior(v, model: str) -> complex:
    if v == "inf":
        raise ConfigError("'inf' is not an interior point")
    z = _complex(v)
    if model == "half_plane":
        if z.imag <= 0:
            raise ConfigError(f"half-plane point needs Im > 0, got {v!r}")
        return cayley_to_disc(z)
    return disc_point(z)


def _generator(g: dict, model: str) -> GeneratorSpec:
    kind = g["kind"]
    if kind == "axis":
        return GeneratorSpec.axis(_boundary(g["p"], model), _boundary(g["q"], model), g["length"])
    if kind == "half_plane_dilation":
        return GeneratorSpec.half_plane_dilation(g["length"])
    return GeneratorSpec.matrix(_complex(g["a"]), _complex(g["b"]))


def _region(r: dict | None, model: str) -> RegionSpec:
    if r is None:
        return RegionSpec.fundamental()
    kind = r["kind"]
    if kind == "fundamental":
        return RegionSpec.fundamental(r.get("r_cut", DEFAULT_R_CUT))
    if kind == "collar":
        return RegionSpec.collar(r["width"], r.get("r_cut", DEFAULT_R_CUT))
    if kind == "disk":
        return RegionSpec.disk(_interior(r["center"], model), r["radius"])
    return RegionSpec.polygon([_interior(v, model) for v in r["vertices"]])


def config_hash(raw: dict) -> str:
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def parse_config(raw: dict) -> LabConfig:
    """Validate a decoded config against the schema and convert to disc coordinates."""
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.path) or "<root>"
        raise ConfigError(f"schema violation at {where}: {e.message}")
    lambdas = tuple(float(x) for x in raw["lambdas"])
    if any(b <= a for a, b in zip(lambdas, lambdas[1:])):
        raise ConfigError("lambdas must be strictly increasing")
    model = raw.get("model", "disc")
    try:
        region = _region(raw.get("region"), model).validate()
        return LabConfig(
            model=model,
            group=tuple(_generator(g, model) for g in raw["group"]),
            xi=_boundary(raw["xi"], model),
            lambdas=lambdas,
            chart=(_boundary(raw["chart"][0], model), _boundary(raw["chart"][1], model)),
            r0=float(raw.get("r0", 0.8)),
            tol=float(raw.get("tol", 0.02)),
            q=int(raw.get("q", 8)),
            region=region,
            output_dir=raw.get("output_dir", "out"),
            certify_length=int(raw.get("certify_length", 4)),
            phi=raw.get("phi", "one"),
            jensen_eps=raw.get("jensen_eps"),
            jensen_n_theta=raw.get("jensen_n_theta"),
            max_words=int(raw.get("max_words", 10**7)),
            name=raw.get("name", ""),
            sha256=config_hash(raw),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> LabConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh, parse_constant=_reject_constant)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return parse_config(raw)
