"""Run configuration shared by the verification suite and the CLI."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .errors import ConfigError

ALL_CHECKS = [
    "su11_identity",
    "determinant_identity",
    "reflection_symmetry",
    "hermite_biehler",
    "gronwall",
    "frozen_coefficients",
    "constant_oracle",
    "linearization_orders",
    "w_cross_identity",
    "plancherel",
    "maximal_log_a",
    "hausdorff_young",
    "free_kernel",
    "reproducing_property",
    "zero_free_strip",
    "riccati_tracking",
    "k_vs_sinc",
    "e_sine",
    "e_exp",
    "joint_parts",
    "a_magnitude",
    "theta_estimates",
    "alignment_lemma",
    "displacement",
    "fejer_mean",
]

IDENTITY_CHECKS = ALL_CHECKS[:16]


@dataclass
class FixtureSpec:
    kind: str = "truncated_gaussian"
    T: float = 1.0
    l1_target: float = 0.3
    seed: int = 7
    n_samples: int = 513

    @property
    def fixture_id(self) -> str:
        return f"{self.kind}_l1={self.l1_target:g}_T={self.T:g}_n={self.n_samples}_seed={self.seed}"


@dataclass
class RunConfig:
    fixtures: list[FixtureSpec] = field(default_factory=lambda: [
        FixtureSpec(kind="box", l1_target=0.3),
        FixtureSpec(kind="truncated_gaussian", l1_target=0.3),
        FixtureSpec(kind="chirp", l1_target=0.3),
        FixtureSpec(kind="random_bandlimited", l1_target=0.3),
        FixtureSpec(kind="box", l1_target=1.0 / 6.0),
        FixtureSpec(kind="truncated_gaussian", l1_target=1.0 / 6.0),
    ])
    x_window: float = 16.0
    n_x: int = 1025
    t_values: list[float] = field(default_factory=lambda: [0.75, 1.0])
    s_values: list[float] | None = None   # None: auto-pick near a zero and at min eps
    steps_multiplier: float = 1.0
    depth_cap_y: float = 8.0
    zero_count: int = 5
    checks: list[str] = field(default_factory=lambda: list(ALL_CHECKS))
    d_ladder: list[float] = field(default_factory=lambda: [0.125, 0.25, 1.0, 4.0, 16.0, 64.0])
    heavy_fixture_count: int = 2          # zero-based checks run on this many fixtures
    sample_points: int = 24               # low-discrepancy samples for sup-type claims
    admissibility_delta: float = 1.0
    out_dir: str = "out"
    formats: list[str] = field(default_factory=lambda: ["csv", "json"])
    seed: int = 7
    allow_large_l1: bool = False
    plots: bool = False
    threads: int = 1

    def validate(self) -> None:
        if not self.fixtures:
            raise ConfigError("at least one fixture is required")
        for fx in self.fixtures:
            if fx.n_samples < 8:
                raise ConfigError("fixture n_samples must be >= 8")
            if fx.l1_target > 0.5 + 1e-12 and not self.allow_large_l1:
                raise ConfigError(
                    f"l1_target={fx.l1_target} exceeds 1/2; pass allow_large_l1 to override"
                )
            if fx.T <= 0:
                raise ConfigError("fixture support T must be positive")
        if self.n_x < 8:
            raise ConfigError("n_x must be >= 8")
        if not self.t_values:
            raise ConfigError("t_values must be nonempty")
        unknown = [c for c in self.checks if c not in ALL_CHECKS]
        if unknown:
            raise ConfigError(f"unknown check ids: {unknown}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        fixtures = [FixtureSpec(**fx) for fx in data.pop("fixtures", [])]
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        unknown = set(data) - set(known)
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        cfg = cls(**known) if fixtures == [] else cls(fixtures=fixtures, **known)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config JSON must be an object")
        return cls.from_dict(data)
