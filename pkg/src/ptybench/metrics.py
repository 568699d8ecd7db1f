"""Reconstruction error, invariant to the global phase and scale
ambiguities inherent to modulus-only data, restricted to the illuminated
region of the object."""

import numpy as np

from .forward import ScanGeometry


def illumination_mask(probe: np.ndarray, geometry: ScanGeometry,
                      threshold: float = 0.1) -> np.ndarray:
    """Boolean mask of pixels where the accumulated probe intensity
    sum_X |P(x - X)|^2 reaches `threshold` times its maximum."""
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    coverage = np.zeros(geometry.object_dims)
    wh, ww = probe.shape
    intensity = np.abs(probe) ** 2
    for (r, c) in geometry.positions:
        coverage[r:r + wh, c:c + ww] += intensity
    mask = coverage >= threshold * coverage.max()
    if not mask.any():
        raise ValueError("illumination mask is empty; lower the threshold")
    return mask


def align_and_error(estimate: np.ndarray, truth: np.ndarray,
                    mask: np.ndarray = None) -> float:
    """Relative L2 error after least-squares global phase/scale alignment.

    c = <truth, estimate> / <estimate, estimate> over the mask, then
    ||c * estimate - truth|| / ||truth||.
    """
    if estimate.shape != truth.shape:
        raise ValueError("estimate and truth must share dimensions")
    if mask is None:
        e = estimate.ravel()
        t = truth.ravel()
    else:
        e = estimate[mask]
        t = truth[mask]
    denom = np.vdot(e, e)
    if denom == 0:
        raise ValueError("estimate is zero on the mask; alignment undefined")
    c = np.vdot(e, t) / denom
    return float(np.linalg.norm(c * e - t) / np.linalg.norm(t))
