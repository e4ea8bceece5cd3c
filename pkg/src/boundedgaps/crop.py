"""The fixed C⁴ crop on ``[1, 2]`` and its unit-mass normalization."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

CROP_SCALE = 1024
# Integral of the crop: 1024 * B(6, 6) = 256/693.
CROP_INTEGRAL = Fraction(256, 693)


def crop(t: np.ndarray | float) -> np.ndarray | float:
    """``1024 ((t-1)(2-t))^5`` on ``(1, 2)``, else 0; maximum 1 at ``t = 3/2``.

    The first four derivatives vanish at both ends, so the function is C⁴.
    """
    t_arr = np.asarray(t, dtype=np.float64)
    inside = (t_arr > 1.0) & (t_arr < 2.0)
    out = np.where(inside, CROP_SCALE * ((t_arr - 1.0) * (2.0 - t_arr)) ** 5, 0.0)
    return float(out) if np.ndim(t) == 0 else out


def smooth_weight(t: np.ndarray | float) -> np.ndarray | float:
    """The crop scaled to unit integral: ``2772 ((t-1)(2-t))^5``."""
    scale = float(1 / CROP_INTEGRAL)
    res = np.asarray(crop(t)) * scale
    return float(res) if np.ndim(t) == 0 else res


def sharp_weight(t: np.ndarray | float) -> np.ndarray | float:
    """Indicator of ``(1, 2]``."""
    t_arr = np.asarray(t, dtype=np.float64)
    out = ((t_arr > 1.0) & (t_arr <= 2.0)).astype(np.float64)
    return float(out) if np.ndim(t) == 0 else out
