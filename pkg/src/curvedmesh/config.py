"""Flat TOML run configuration for the benchmark driver.

The file is a single flat table (no sections): every key sits at the top
level with a scalar or list value, so configs stay human-diffable. Unknown
keys are rejected rather than ignored.
"""

import hashlib
import json
from dataclasses import dataclass, field

import tomli

MANIFOLDS = ("sphere", "torus")
OPERATORS = ("laplace_beltrami", "bochner", "hodge")
FRAME_MODES = ("reduced", "full")
METRIC_MODES = ("curved", "linear")
QUADRATURE_RULES = ("vertex", "midpoint")

DEFAULTS = {
    "manifold": "sphere",
    "operator": "bochner",
    "sample_sizes": [1000, 2000, 4000, 8000],
    "trials": 10,
    "seed": 7,
    "noise": 0.0,             # radial noise amplitude eta (sphere only)
    "k": 0,                   # 0 selects max(12, ceil(2 log2 N))
    "frame_mode": "full",
    "metric_mode": "curved",  # linear applies to laplace_beltrami only
    "stiffness_rule": "vertex",
    "mass_rule": "midpoint",
    "num_modes": 48,          # eigenvalue error uses this many modes
    "eigenvector_modes": 6,   # 0 disables the eigenvector metric
    "tol": 1e-8,
    "sigma": 0.0,             # 0 selects the automatic shift
    "output_dir": "runs/out",
}


@dataclass
class RunConfig:
    manifold: str = "sphere"
    operator: str = "bochner"
    sample_sizes: list = field(default_factory=lambda: list(DEFAULTS["sample_sizes"]))
    trials: int = 10
    seed: int = 7
    noise: float = 0.0
    k: int = 0
    frame_mode: str = "full"
    metric_mode: str = "curved"
    stiffness_rule: str = "vertex"
    mass_rule: str = "midpoint"
    num_modes: int = 48
    eigenvector_modes: int = 6
    tol: float = 1e-8
    sigma: float = 0.0
    output_dir: str = "runs/out"

    def __post_init__(self):
        validate_config(self)

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["sample_sizes"] = [int(v) for v in self.sample_sizes]
        return d

    def config_hash(self) -> str:
        """Hash of the canonical JSON encoding; identical configs hash equal."""
        blob = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @property
    def k_or_auto(self) -> int | None:
        return None if self.k == 0 else self.k

    @property
    def sigma_or_auto(self) -> float | None:
        return None if self.sigma == 0.0 else self.sigma


def _require(cond: bool, msg: str):
    if not cond:
        raise ValueError(f"bad config: {msg}")


def validate_config(cfg: RunConfig):
    _require(cfg.manifold in MANIFOLDS, f"manifold must be one of {MANIFOLDS}")
    _require(cfg.operator in OPERATORS, f"operator must be one of {OPERATORS}")
    sizes = list(cfg.sample_sizes)
    _require(len(sizes) > 0, "sample_sizes must be nonempty")
    _require(all(isinstance(v, int) and v >= 20 for v in sizes),
             "sample_sizes must be integers >= 20")
    _require(isinstance(cfg.trials, int) and cfg.trials >= 1, "trials must be >= 1")
    _require(isinstance(cfg.seed, int), "seed must be an integer")
    _require(cfg.noise >= 0.0, "noise must be >= 0")
    _require(cfg.noise == 0.0 or cfg.manifold == "sphere",
             "noise is only supported on the sphere")
    _require(isinstance(cfg.k, int) and cfg.k >= 0, "k must be 0 (auto) or a positive integer")
    _require(cfg.k == 0 or cfg.k >= 7, "explicit k must be at least 7")
    _require(cfg.frame_mode in FRAME_MODES, f"frame_mode must be one of {FRAME_MODES}")
    _require(cfg.metric_mode in METRIC_MODES, f"metric_mode must be one of {METRIC_MODES}")
    _require(cfg.metric_mode == "curved" or cfg.operator == "laplace_beltrami",
             "linear metric_mode applies to laplace_beltrami only")
    _require(cfg.stiffness_rule in QUADRATURE_RULES,
             f"stiffness_rule must be one of {QUADRATURE_RULES}")
    _require(cfg.mass_rule in QUADRATURE_RULES,
             f"mass_rule must be one of {QUADRATURE_RULES}")
    _require(isinstance(cfg.num_modes, int) and cfg.num_modes >= 1,
             "num_modes must be >= 1")
    _require(isinstance(cfg.eigenvector_modes, int) and cfg.eigenvector_modes >= 0,
             "eigenvector_modes must be >= 0")
    _require(cfg.eigenvector_modes == 0 or cfg.manifold == "sphere",
             "the eigenvector metric has analytic references on the sphere only")
    _require(cfg.tol > 0.0, "tol must be positive")
    _require(cfg.sigma <= 0.0, "sigma must be 0 (auto) or negative")
    _require(isinstance(cfg.output_dir, str) and cfg.output_dir != "",
             "output_dir must be a nonempty string")


def config_from_dict(data: dict) -> RunConfig:
    unknown = sorted(set(data) - set(DEFAULTS))
    if unknown:
        raise ValueError(f"bad config: unknown keys {unknown}; "
                         f"known keys are {sorted(DEFAULTS)}")
    merged = dict(DEFAULTS)
    merged.update(data)
    # the eigenvector metric is sphere-only; off the sphere the default is off
    if merged.get("manifold") != "sphere" and "eigenvector_modes" not in data:
        merged["eigenvector_modes"] = 0
    # integers are acceptable where floats are expected
    for key in ("noise", "tol", "sigma"):
        merged[key] = float(merged[key])
    return RunConfig(**merged)


def load_config(path: str) -> RunConfig:
    with open(path, "rb") as fh:
        data = tomli.load(fh)
    return config_from_dict(data)


def dump_config(cfg: RunConfig) -> str:
    """Render a config back to flat TOML text (round-trips with load_config)."""
    lines = []
    for key in DEFAULTS:
        value = getattr(cfg, key)
        if isinstance(value, bool):
            lines.append(f"{key} = {str(value).lower()}")
        elif isinstance(value, str):
            lines.append(f'{key} = "{value}"')
        elif isinstance(value, list):
            lines.append(f"{key} = [{', '.join(str(v) for v in value)}]")
        else:
            lines.append(f"{key} = {value!r}")
    return "\n".join(lines) + "\n"
