"""Isoperimetric and monotonicity checks for minimal submanifolds of the Poincare ball."""
from .ball import (MobiusMap, apply, compose, conformal_factor, hyperbolic_distance, inverse,
                   mobius_translate, random_mobius, rotation_map)
from .charts import Chart, Submanifold
from .errors import (ChartError, ConditioningError, ConvergenceError, DomainError, HypisoError,
                     TruncationError)
from .families import (catenoid, flat_disk, geodesic_cap, mobius_image, spherical_cap, union,
                       unit_ball_volume)
from .measure import (DensityEstimate, MonotonicityCurve, VolumeReport, density, euclidean_volume,
                      ideal_boundary_volume, monotonicity_curve, truncated_volume)
from .verify import InequalityVerdict, MobiusVolumeResult, OptimizerConfig, TheoremId, mobius_volume

__version__ = "0.1.0"
