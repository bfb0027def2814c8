"""Rectangular charts and chart-aware finite differences.

Fields live on (nu, nv, ...) arrays: axis 0 is the u index, axis 1 the v
index, trailing axes are components.  All derivative operators are 2nd-order
central stencils in the interior; the single boundary layer is filled with
one-sided 2nd-order stencils so arrays keep full shape, but no boundary value
should feed a reported statistic (use `interior`).

On a chart with reality='complex_conjugate' the two index axes are real
coordinates (x, y) and the conjugate parameters are u = x + iy, v = x - iy;
the derivative operators are then the Wirtinger combinations
d_u = (d_x - i d_y)/2 and d_v = (d_x + i d_y)/2.
"""

from dataclasses import dataclass

import numpy as np

REAL = "real"
COMPLEX_CONJUGATE = "complex_conjugate"


@dataclass(frozen=True)
class GridChart:
    """A rectangular (u,v) parameter chart.

    nu, nv: grid sizes (>= 5 so central stencils leave a 2-node margin).
    hu, hv: spacings in parameter units.
    reality: 'real' or 'complex_conjugate'.
    orientation: +1 or -1 (sign of du^dv against the stored index order).
    """

    nu: int
    nv: int
    hu: float
    hv: float
    reality: str = REAL
    orientation: int = 1

    def __post_init__(self):
        if self.nu < 5 or self.nv < 5:
            raise ValueError("grid sizes must be >= 5 (2-node stencil margins)")
        if self.hu <= 0 or self.hv <= 0:
            raise ValueError("grid spacings must be positive")
        if self.reality not in (REAL, COMPLEX_CONJUGATE):
            raise ValueError(f"unknown reality flag {self.reality!r}")

    def refine(self, factor=2):
        """Chart covering the same window with (n-1)*factor+1 nodes per axis."""
        return GridChart(
            (self.nu - 1) * factor + 1,
            (self.nv - 1) * factor + 1,
            self.hu / factor,
            self.hv / factor,
            self.reality,
            self.orientation,
        )


def _diff_axis(field, h, axis):
    """2nd-order first derivative along one axis, one-sided at the edges."""
    f = np.asarray(field)
    out = np.empty_like(f, dtype=np.result_type(f.dtype, np.float64))
    fm = np.moveaxis(f, axis, 0)
    om = np.moveaxis(out, axis, 0)
    om[1:-1] = (fm[2:] - fm[:-2]) / (2.0 * h)
    om[0] = (-3.0 * fm[0] + 4.0 * fm[1] - fm[2]) / (2.0 * h)
    om[-1] = (3.0 * fm[-1] - 4.0 * fm[-2] + fm[-3]) / (2.0 * h)
    return out


def _diff2_axis(field, h, axis):
    """2nd-order second derivative along one axis, one-sided at the edges."""
    f = np.asarray(field)
    out = np.empty_like(f, dtype=np.result_type(f.dtype, np.float64))
    fm = np.moveaxis(f, axis, 0)
    om = np.moveaxis(out, axis, 0)
    om[1:-1] = (fm[2:] - 2.0 * fm[1:-1] + fm[:-2]) / (h * h)
    om[0] = (2.0 * fm[0] - 5.0 * fm[1] + 4.0 * fm[2] - fm[3]) / (h * h)
    om[-1] = (2.0 * fm[-1] - 5.0 * fm[-2] + 4.0 * fm[-3] - fm[-4]) / (h * h)
    return out


def d_u(field, chart):
    if chart.reality == REAL:
        return _diff_axis(field, chart.hu, 0)
    dx = _diff_axis(field, chart.hu, 0)
    dy = _diff_axis(field, chart.hv, 1)
    return 0.5 * (dx - 1j * dy)


def d_v(field, chart):
    if chart.reality == REAL:
        return _diff_axis(field, chart.hv, 1)
    dx = _diff_axis(field, chart.hu, 0)
    dy = _diff_axis(field, chart.hv, 1)
    return 0.5 * (dx + 1j * dy)


def d_uu(field, chart):
    if chart.reality == REAL:
        return _diff2_axis(field, chart.hu, 0)
    return d_u(d_u(field, chart), chart)


def d_vv(field, chart):
    if chart.reality == REAL:
        return _diff2_axis(field, chart.hv, 1)
    return d_v(d_v(field, chart), chart)


def interior(field, margin=2):
    """View of a node field with `margin` layers stripped from each side."""
    if margin == 0:
        return field
    return field[margin:-margin, margin:-margin]


def interior_max(field, margin=2):
    """Max absolute value over the interior sub-grid, NaNs ignored."""
    sub = interior(np.abs(np.asarray(field)), margin)
    return float(np.nanmax(sub))


def node_list(mask):
    """(i, j) pairs where a boolean node mask is set."""
    return [(int(i), int(j)) for i, j in zip(*np.nonzero(mask))]
