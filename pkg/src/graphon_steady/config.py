"""Experiment configuration: JSON files checked against a bundled schema."""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from .errors import ValidationError
from .kernels import kernel_from_config
from .models import build_model
from .solver import SolveOptions

SEED_ENV = "GRAPHON_SEED"


def load_schema() -> dict:
    text = resources.files("graphon_steady").joinpath("schema/experiment.schema.json").read_text()
    return json.loads(text)


@dataclass
class DynamicsConfig:
    dt: float = 1e-2
    t_end: float = 50.0
    eps: float = 1e-3
    trajectory: bool = False
    stride: int = 10


@dataclass
class ProbeConfig:
    rho: float = 0.05
    pairs: int = 20


@dataclass
class ExperimentConfig:
    model: dict = field(default_factory=lambda: {"model": "lotka_volterra", "lambda": 1.0})
    kernel: dict = field(default_factory=lambda: {"family": "constant", "p": 0.5})
    n_list: list = field(default_factory=lambda: [100])
    seeds: list = field(default_factory=lambda: [1])
    mode: str = "random"
    solver: SolveOptions = field(default_factory=SolveOptions)
    outputs: str = "out"
    m: int | None = None
    branch: int = 0
    refinement: int = 4
    restarts: int = 64
    jacobian: str = "discrete"
    ring_analytic: bool = False
    ell_max: int = 10
    dynamics: DynamicsConfig = field(default_factory=DynamicsConfig)
    probe: ProbeConfig = field(default_factory=ProbeConfig)
    base_dir: Path | None = None

    @classmethod
    def from_dict(cls, raw: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        try:
            jsonschema.validate(raw, load_schema())
        except jsonschema.ValidationError as exc:
            where = ".".join(str(k) for k in exc.absolute_path) or "<root>"
            raise ValidationError(f"config: {where}: {exc.message}") from exc
        data = dict(raw)
        data["solver"] = SolveOptions(**data.get("solver", {}))
        data["dynamics"] = DynamicsConfig(**data.get("dynamics", {}))
        data["probe"] = ProbeConfig(**data.get("probe", {}))
        cfg = cls(**data, base_dir=base_dir)
        cfg.check()
        return cfg

    def check(self):
        if not self.n_list:
            raise ValidationError("config: n_list must be nonempty")
        if not self.seeds:
            raise ValidationError("config: seeds must be nonempty")
        # resolve names now so that errors surface before any work starts
        self.build_model()
        self.build_kernel()

    def build_model(self):
        return build_model(self.model)

    def build_kernel(self):
        return kernel_from_config(self.kernel, self.base_dir)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("base_dir")
        return d


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    return ExperimentConfig.from_dict(json.loads(path.read_text()), base_dir=path.parent)


def parse_seeds(text: str) -> list[int]:
    return [int(s) for s in str(text).replace(",", " ").split()]


def seed_override(cli_value: str | None = None) -> list[int] | None:
    """Seeds from --seed-override, else from $GRAPHON_SEED, else None."""
    if cli_value:
        return parse_seeds(cli_value)
    env = os.environ.get(SEED_ENV)
    return parse_seeds(env) if env else None
