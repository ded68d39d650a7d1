"""NumPy reference implementations of the hot kernels.

These mirror `_native` operation for operation; the compiled module is just
a faster evaluation of the same arithmetic.  Keep the interpolation formula
(`lo + frac * (hi - lo)`) identical in both backends.
"""

from __future__ import annotations

import numpy as np


def color_shift_apply(
    phi: np.ndarray,
    d_horiz: np.ndarray,
    beta_tables: np.ndarray,
    d_lo: float,
    d_step: float,
    t_vert: np.ndarray,
    background: np.ndarray,
    out: np.ndarray,
) -> None:
    """Per-pixel observation model with table-interpolated attenuation.

    phi:         (H, W, 3) clean intensities in [0, 1]
    d_horiz:     (H, W) camera-to-scene distance in metres
    beta_tables: (3, N) horizontal attenuation sampled at
                 d_lo + i * d_step for i in range(N)
    t_vert:      (3,) vertical transmission per channel
    background:  (3,) background light per channel
    out:         (H, W, 3) result, clipped to [0, 1]
    """
    n = beta_tables.shape[1]
    pos = (d_horiz - d_lo) / d_step
    idx = np.clip(np.floor(pos).astype(np.intp), 0, n - 2)
    frac = np.clip(pos - idx, 0.0, 1.0)
    for c in range(3):
        tab = beta_tables[c]
        lo = tab[idx]
        beta = lo + frac * (tab[idx + 1] - lo)
        t_h = np.exp(-beta * d_horiz)
        out[:, :, c] = t_vert[c] * (t_h * phi[:, :, c] + background[c] * (1.0 - t_h))
    np.clip(out, 0.0, 1.0, out=out)


def accumulate_stamps(
    layer: np.ndarray,
    patch: np.ndarray,
    xs: np.ndarray,
    ys: np.ndarray,
) -> None:
    """Add ``patch`` centred on each (x, y) into ``layer``, clipped at borders."""
    h, w = layer.shape
    kh, kw = patch.shape
    ry, rx = kh // 2, kw // 2
    for x, y in zip(xs, ys):
        x = int(x)
        y = int(y)
        y0, y1 = max(0, y - ry), min(h, y + ry + 1)
        x0, x1 = max(0, x - rx), min(w, x + rx + 1)
        if y0 >= y1 or x0 >= x1:
            continue
        layer[y0:y1, x0:x1] += patch[
            y0 - (y - ry) : y1 - (y - ry), x0 - (x - rx) : x1 - (x - rx)
        ]
