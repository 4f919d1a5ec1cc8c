"""Uniform-grid sampled functions and their CSV round trip.

Everything downstream (transforms, norms, eigensolvers) consumes the same
container: complex or real values on a uniform rectangular grid, described
by a per-axis origin and spacing.  Keeping the grid implicit (never storing
coordinate arrays) makes rescaled copies cheap, which the scaling checks
exploit: f(c*x) on the matching grid is the same value array with spacing
divided by c.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

_AXIS_NAMES = ("x", "y", "z")


@dataclass(frozen=True)
class SampledFunction:
    """Function samples on a uniform grid in one to three dimensions.

    Parameters
    ----------
    origin : tuple of float
        Coordinate of the first sample along each axis.
    spacing : tuple of float
        Grid step along each axis, strictly positive.
    values : numpy.ndarray
        Sample values, real or complex; ``values.ndim == len(origin)``.
    support_radius : float, optional
        Declared bound R such that the function is negligible outside
        ``max_i |x_i| <= R``.  Purely advisory; operations that need
        decay at the grid edge check the samples, not this field.
    """

    origin: tuple[float, ...]
    spacing: tuple[float, ...]
    values: np.ndarray
    support_radius: float | None = None

    def __post_init__(self):
        values = np.asarray(self.values)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))
        object.__setattr__(self, "spacing", tuple(float(s) for s in self.spacing))
        if values.ndim != len(self.origin) or values.ndim != len(self.spacing):
            raise ValueError("origin/spacing length must match values.ndim")
        if values.ndim not in (1, 2, 3):
            raise ValueError("only 1, 2, or 3 dimensional grids are supported")
        if any(s <= 0 for s in self.spacing):
            raise ValueError("grid spacing must be positive")
        if any(n < 2 for n in values.shape):
            raise ValueError("need at least two samples per axis")

    @property
    def ndim(self) -> int:
        return self.values.ndim

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def coords(self, axis: int = 0) -> np.ndarray:
        """Sample coordinates along one axis."""
        n = self.values.shape[axis]
        return self.origin[axis] + self.spacing[axis] * np.arange(n)

    def grids(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays broadcastable against ``values``."""
        return tuple(
            self.coords(ax).reshape([-1 if a == ax else 1 for a in range(self.ndim)])
            for ax in range(self.ndim)
        )

    def rescaled(self, factor: float) -> "SampledFunction":
        """Samples of x -> f(factor * x): same values, grid shrunk by factor."""
        if factor <= 0:
            raise ValueError("rescale factor must be positive")
        return replace(
            self,
            origin=tuple(o / factor for o in self.origin),
            spacing=tuple(s / factor for s in self.spacing),
            support_radius=None
            if self.support_radius is None
            else self.support_radius / factor,
        )

    def boundary_peak(self) -> float:
        """Largest |value| on the outermost grid shell.

        Used to decide whether a quadrature over this grid can be trusted
        as an integral over all of space.
        """
        peak = 0.0
        for ax in range(self.ndim):
            for idx in (0, -1):
                face = np.take(self.values, idx, axis=ax)
                peak = max(peak, float(np.max(np.abs(face))))
        return peak

    def is_compactly_supported(self, rel_tol: float = 1e-8) -> bool:
        """True when boundary samples are below rel_tol of the peak value."""
        top = float(np.max(np.abs(self.values)))
        if top == 0.0:
            return True
        return self.boundary_peak() <= rel_tol * top


def sample(
    fn: Callable[..., np.ndarray],
    axes: Sequence[tuple[float, float, int]],
    support_radius: float | None = None,
) -> SampledFunction:
    """Sample a callable on the closed box described by (lo, hi, n) triples.

    ``fn`` receives one broadcastable coordinate array per axis and must
    vectorize over them.
    """
    origin, spacing, coord1d = [], [], []
    for lo, hi, n in axes:
        if n < 2 or not hi > lo:
            raise ValueError("each axis needs hi > lo and n >= 2")
        origin.append(float(lo))
        spacing.append((hi - lo) / (n - 1))
        coord1d.append(np.linspace(lo, hi, n))
    grids = np.meshgrid(*coord1d, indexing="ij") if len(axes) > 1 else [coord1d[0]]
    values = np.asarray(fn(*grids))
    return SampledFunction(
        origin=tuple(origin),
        spacing=tuple(spacing),
        values=values,
        support_radius=support_radius,
    )


def to_csv(f: SampledFunction, path_or_buf) -> None:
    """Write samples as rows of coordinates plus re/im columns.

    Rows are emitted in C order of the value array, so the file is a
    deterministic function of the grid and values.
    """
    own = isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__")
    buf = open(path_or_buf, "w", newline="") if own else path_or_buf
    try:
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(list(_AXIS_NAMES[: f.ndim]) + ["re", "im"])
        axes = [f.coords(ax) for ax in range(f.ndim)]
        flat = f.values.reshape(-1)
        for lin, val in enumerate(flat):
            idx = np.unravel_index(lin, f.values.shape)
            row = [repr(float(axes[a][i])) for a, i in enumerate(idx)]
            cval = complex(val)
            row += [repr(cval.real), repr(cval.imag)]
            writer.writerow(row)
    finally:
        if own:
            buf.close()


def from_csv(path_or_buf) -> SampledFunction:
    """Rebuild a SampledFunction written by :func:`to_csv`.

    The grid is inferred from the coordinate columns and must be uniform.
    """
    own = isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__")
    buf = open(path_or_buf, "r", newline="") if own else path_or_buf
    try:
        rows = list(csv.reader(buf))
    finally:
        if own:
            buf.close()
    header, data = rows[0], rows[1:]
    ndim = len(header) - 2
    if ndim not in (1, 2, 3) or header[ndim:] != ["re", "im"]:
        raise ValueError("unrecognized sampled-function CSV header")
    cols = np.array([[float(v) for v in row] for row in data])
    coords = [np.unique(cols[:, a]) for a in range(ndim)]
    shape = tuple(len(c) for c in coords)
    if int(np.prod(shape)) != len(data):
        raise ValueError("CSV rows do not form a full rectangular grid")
    origin, spacing = [], []
    for c in coords:
        steps = np.diff(c)
        if steps.size == 0 or not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
            raise ValueError("CSV coordinates are not a uniform grid")
        origin.append(float(c[0]))
        spacing.append(float(steps[0]))
    values = (cols[:, ndim] + 1j * cols[:, ndim + 1]).reshape(shape)
    if np.all(values.imag == 0.0):
        values = values.real
    return SampledFunction(tuple(origin), tuple(spacing), values)


def csv_text(f: SampledFunction) -> str:
    """CSV serialization as a string, for hashing and tests."""
    buf = io.StringIO()
    to_csv(f, buf)
    return buf.getvalue()
