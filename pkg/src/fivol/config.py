"""Numerical defaults in one place.

Every routine that needs a tolerance or node set takes it from here unless the
caller passes an override, which keeps acceptance runs reproducible.
"""

from dataclasses import dataclass, field


@dataclass(frozen=True)
class QuadratureConfig:
    rtol: float = 1e-10
    atol: float = 1e-14
    order: int = 20
    max_panels: int = 6000


@dataclass(frozen=True)
class SphereConfig:
    # nodes per angular coordinate; the angular integrands are either
    # polynomials or analytic, so these are generous
    order_2d: int = 256
    order_polar: int = 64


@dataclass(frozen=True)
class SteinerConfig:
    r_min: float = 0.1
    r_max: float = 2.1
    extra_nodes: int = 2          # n + 1 + extra_nodes nodes -> least squares
    residual_tol: float = 1e-7
    coefficient_tol: float = 1e-6


@dataclass(frozen=True)
class GridConfig:
    margin: float = 0.1           # dual box = gradient range plus 10%


@dataclass(frozen=True)
class Config:
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)
    sphere: SphereConfig = field(default_factory=SphereConfig)
    steiner: SteinerConfig = field(default_factory=SteinerConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    density_tol: float = 1e-12
    max_dim: int = 8


DEFAULT = Config()
