"""Run configuration read from small TOML files.

Example::

    seed = 0

    [family]
    kind = "cap"        # cap | disk | mobius-image | union | catenoid
    k = 2
    n = 3
    theta = 0.7853981633974483

    [measure]
    truncation = 1.0
    grid_size = 100
    theta_grid = [0.5235987755982988, 1.5707963267948966]

    [optimizer]
    restarts = 16

    [output]
    dir = "out"

All numbers are validated before any computation starts.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import tomli

from .charts import Submanifold
from .errors import DomainError
from .verify import OptimizerConfig, TheoremId

FAMILY_KINDS = ("cap", "disk", "mobius-image", "union", "catenoid")


@dataclass
class FamilySpec:
    kind: str = "disk"
    k: int = 2
    n: int = 3
    theta: float = math.pi / 4
    axis: list | None = None
    translation: list | None = None  # Mobius translation for mobius-image
    base: str = "disk"  # family translated by mobius-image
    neck: float = 0.5
    union_count: int = 2  # flat disks through the origin, rotated about e_1

    def validate(self) -> None:
        if self.kind not in FAMILY_KINDS:
            raise DomainError(f"family.kind must be one of {FAMILY_KINDS}, got {self.kind!r}")
        if not 1 <= self.k <= self.n:
            raise DomainError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.kind in ("cap", "mobius-image") and not 0 < self.theta <= math.pi / 2:
            raise DomainError(f"theta must lie in (0, pi/2], got {self.theta}")
        if self.axis is not None and (len(self.axis) != self.n or np.linalg.norm(self.axis) == 0):
            raise DomainError("family.axis must be a nonzero vector of length n")
        if self.kind == "mobius-image":
            if self.base not in ("disk", "cap"):
                raise DomainError("family.base must be 'disk' or 'cap'")
            a = np.zeros(self.n) if self.translation is None else np.asarray(self.translation, float)
            if a.shape != (self.n,) or not np.linalg.norm(a) < 1:
                raise DomainError("family.translation must be a point of the open unit ball")
        if self.kind == "catenoid" and (self.n < 3 or self.k != 2 or not self.neck > 0):
            raise DomainError("catenoids need k=2, n>=3 and neck > 0")
        if self.kind == "union" and (self.k != 2 or self.n < 3 or self.union_count < 2):
            raise DomainError("unions need k=2, n>=3 and at least two disks")

    def build(self) -> Submanifold:
        from . import families
        from .ball import mobius_translate

        self.validate()
        axis = None if self.axis is None else np.asarray(self.axis, dtype=float)
        if self.kind == "disk":
            return families.flat_disk(self.k, self.n)
        if self.kind == "cap":
            return families.geodesic_cap(self.k, self.n, self.theta, axis)
        if self.kind == "catenoid":
            return families.catenoid(self.neck, self.n)
        if self.kind == "union":
            return families.union([_rotated_disk(self.n, i * math.pi / self.union_count)
                                   for i in range(self.union_count)])
        base = (families.flat_disk(self.k, self.n) if self.base == "disk"
                else families.geodesic_cap(self.k, self.n, self.theta, axis))
        a = np.zeros(self.n) if self.translation is None else np.asarray(self.translation, float)
        return families.mobius_image(base, mobius_translate(a))


def _rotated_disk(n: int, angle: float):
    from .families import flat_disk

    e = np.zeros((n, 2))
    e[0, 0] = 1.0
    e[1, 1], e[2, 1] = math.cos(angle), math.sin(angle)
    return flat_disk(2, n, orientation=e)


@dataclass
class MeasureSettings:
    truncation: float = 1.0
    grid_size: int = 100
    rtol: float = 1e-11
    theta_grid: list | None = None
    theta_count: int = 50  # used when theta_grid is absent
    laplacian_samples: int = 100

    def validate(self) -> None:
        if not 0 < self.truncation <= 1:
            raise DomainError(f"truncation must lie in (0, 1], got {self.truncation}")
        if self.grid_size < 10:
            raise DomainError("grid_size must be at least 10")
        if not 0 < self.rtol < 1:
            raise DomainError("rtol must lie in (0, 1)")
        if self.theta_count < 1 or self.laplacian_samples < 1:
            raise DomainError("theta_count and laplacian_samples must be positive")
        for t in self.thetas():
            if not 0 < t <= math.pi / 2:
                raise DomainError(f"theta grid values must lie in (0, pi/2], got {t}")

    def thetas(self) -> list:
        if self.theta_grid is not None:
            return [float(t) for t in self.theta_grid]
        m = self.theta_count
        return [0.5 * math.pi * (i + 1) / m for i in range(m)]


@dataclass
class RunConfig:
    family: FamilySpec = field(default_factory=FamilySpec)
    measure: MeasureSettings = field(default_factory=MeasureSettings)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    verdicts: list = field(default_factory=lambda: [t.value for t in TheoremId])
    output_dir: str = "out"
    seed: int = 0
    corrupt_curve: bool = False  # negative control: one ratio 1e-3 below its left neighbour

    def validate(self) -> "RunConfig":
        self.family.validate()
        self.measure.validate()
        opt = self.optimizer
        if opt.restarts < 1 or opt.max_evaluations < 1 or not opt.tolerance > 0:
            raise DomainError("optimizer restarts, max_evaluations and tolerance must be positive")
        known = {t.value for t in TheoremId}
        bad = [v for v in self.verdicts if v not in known]
        if bad:
            raise DomainError(f"unknown verdicts {bad}; choose from {sorted(known)}")
        return self

    def selected(self, tid: TheoremId) -> bool:
        return tid.value in self.verdicts

    def to_dict(self) -> dict:
        return {"family": asdict(self.family), "measure": asdict(self.measure),
                "optimizer": asdict(self.optimizer), "verdicts": list(self.verdicts),
                "seed": self.seed, "corrupt_curve": self.corrupt_curve}


def _section(cls, data: dict, name: str):
    names = {f.name for f in fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise DomainError(f"unknown keys in [{name}]: {sorted(unknown)}")
    return cls(**data)


def parse_config(data: dict) -> RunConfig:
    data = dict(data)
    cfg = RunConfig(
        family=_section(FamilySpec, data.pop("family", {}), "family"),
        measure=_section(MeasureSettings, data.pop("measure", {}), "measure"),
        optimizer=_section(OptimizerConfig, data.pop("optimizer", {}), "optimizer"),
    )
    verdicts = data.pop("verdicts", {})
    if "select" in verdicts:
        cfg.verdicts = list(verdicts.pop("select"))
    cfg.corrupt_curve = bool(verdicts.pop("corrupt_curve", False))
    if verdicts:
        raise DomainError(f"unknown keys in [verdicts]: {sorted(verdicts)}")
    output = data.pop("output", {})
    cfg.output_dir = str(output.pop("dir", cfg.output_dir))
    if output:
        raise DomainError(f"unknown keys in [output]: {sorted(output)}")
    cfg.seed = int(data.pop("seed", 0))
    if data:
        raise DomainError(f"unknown top-level keys: {sorted(data)}")
    cfg.optimizer.seed = cfg.seed
    return cfg.validate()


def load_config(path) -> RunConfig:
    with open(Path(path), "rb") as fh:
        return parse_config(tomli.load(fh))
