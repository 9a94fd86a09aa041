"""Positive-scalar-curvature warped metrics, singularity classification and
Gromov-Lawson cobordism assembly at model scale."""

__version__ = "0.1.0"

from . import assembler, curvature, errors, isotopy, kernels, metrics, singular, warp  # noqa: E402

__all__ = ["assembler", "curvature", "errors", "isotopy", "kernels", "metrics", "singular", "warp",
           "__version__"]
