"""Magnetic fields, vector potentials and their phase factors.

A magnetic field is an antisymmetric matrix-valued map B(x); only the
strict upper triangle is stored, so antisymmetry holds by construction.
Line and triangle integrals use fixed-node Gauss-Legendre quadrature
(16 nodes on segments, 8 x 8 on the triangle), which is exact for
polynomial fields of the degrees used here and below 1e-10 for the
smooth bounded test fields.

All operations broadcast over leading axes: points are arrays of shape
``(..., d)``.
"""

from __future__ import annotations

import numpy as np

_GL16 = np.polynomial.legendre.leggauss(16)
_GL8 = np.polynomial.legendre.leggauss(8)


def _gl_nodes(pair, a=0.0, b=1.0):
    nodes, weights = pair
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * nodes, half * weights


_SEG_S, _SEG_W = _gl_nodes(_GL16)
_TRI_S, _TRI_W = _gl_nodes(_GL8)

_FD_STEP = np.finfo(float).eps ** (1.0 / 3.0)


class ScalarField:
    """Smooth scalar function of x with optional analytic gradient."""

    def __init__(self, fn, grad=None, dim=None):
        self.fn = fn
        self._grad = grad
        self.dim = dim

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        if self._grad is not None:
            return self._grad(x)
        out = np.empty_like(x)
        for j in range(x.shape[-1]):
            h = _FD_STEP * (1.0 + np.abs(x[..., j]))
            shift = np.zeros_like(x)
            shift[..., j] = h
            out[..., j] = (self.fn(x + shift) - self.fn(x - shift)) / (2.0 * h)
        return out


class MagneticField:
    """Antisymmetric two-form B with entries B_jk(x), j < k stored.

    Parameters
    ----------
    dim : int
    upper : dict
        Maps (j, k) with j < k to a vectorized callable of x.
    """

    def __init__(self, dim, upper=None):
        self.dim = int(dim)
        self.upper = dict(upper or {})
        for (j, k) in self.upper:
            if not 0 <= j < k < dim:
                raise ValueError(f"invalid entry index {(j, k)} for d={dim}")

    def entry(self, j, k, x):
        x = np.asarray(x, dtype=float)
        base = np.zeros(x.shape[:-1])
        if j == k:
            return base
        sign = 1.0
        if j > k:
            j, k, sign = k, j, -1.0
        fn = self.upper.get((j, k))
        if fn is None:
            return base
        return sign * np.asarray(fn(x))

    def matrix(self, x):
        """Full antisymmetric matrix B(x), shape (..., d, d)."""
        x = np.asarray(x, dtype=float)
        d = self.dim
        out = np.zeros(x.shape[:-1] + (d, d))
        for (j, k), fn in self.upper.items():
            v = np.asarray(fn(x))
            out[..., j, k] = v
            out[..., k, j] = -v
        return out

    @property
    def is_zero(self):
        return not self.upper


class VectorPotential:
    """One-form A with components A_j(x)."""

    def __init__(self, dim, components):
        self.dim = int(dim)
        self.components = list(components)
        if len(self.components) != self.dim:
            raise ValueError("need one component per dimension")

    def values(self, x):
        """A(x) as an array (..., d)."""
        x = np.asarray(x, dtype=float)
        return np.stack([np.asarray(c(x)) + np.zeros(x.shape[:-1])
                         for c in self.components], axis=-1)

    def curl(self, x, step=None):
        """Finite-difference d A: entries d_j A_k - d_k A_j, shape (..., d, d)."""
        x = np.asarray(x, dtype=float)
        d = self.dim
        grad = np.empty(x.shape[:-1] + (d, d))  # grad[..., j, k] = d_j A_k
        for j in range(d):
            h = step if step is not None else _FD_STEP * (1.0 + np.abs(x[..., j]))
            shift = np.zeros_like(x)
            shift[..., j] = h
            hi = self.values(x + shift)
            lo = self.values(x - shift)
            grad[..., j, :] = (hi - lo) / (2.0 * np.asarray(h)[..., None])
        return grad - np.swapaxes(grad, -1, -2)

    @property
    def is_zero(self):
        return getattr(self, "_known_zero", False)


def zero_potential(dim):
    pot = VectorPotential(dim, [lambda x: np.zeros(x.shape[:-1])] * dim)
    pot._known_zero = True
    return pot


def transverse_gauge(B):
    """Vector potential with dA = B: A_j(x) = -sum_k int_0^1 B_jk(s x) s x_k ds."""
    if B.is_zero:
        return zero_potential(B.dim)

    def component(j):
        def fn(x):
            x = np.asarray(x, dtype=float)
            acc = np.zeros(x.shape[:-1])
            for (p, q) in B.upper:
                for k in (p, q):
                    j2 = p + q - k
                    if j2 != j:
                        continue
                    vals = np.zeros(x.shape[:-1])
                    for s, w in zip(_SEG_S, _SEG_W):
                        vals += w * s * B.entry(j, k, s * x) * x[..., k]
                    acc -= vals
            return acc
        return fn

    return VectorPotential(B.dim, [component(j) for j in range(B.dim)])


def segment_average(A, x, y):
    """Gauss-Legendre value of int_0^1 A((1-s) x + s y) ds, shape (..., d)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    acc = 0.0
    for s, w in zip(_SEG_S, _SEG_W):
        acc = acc + w * A.values((1.0 - s) * x + s * y)
    return acc


def circulation(A, x, y):
    """Line integral of A along the straight segment from x to y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    gamma = segment_average(A, x, y)
    return -np.sum((x - y) * gamma, axis=-1)


def omega_phase(A, x, y):
    """Unit phase exp(-i int_[x,y] A); |result| = 1 exactly."""
    return np.exp(-1j * circulation(A, x, y))


def flux_matrix(B, x, y, z):
    """Antisymmetric matrix C(x,y,z) of double integrals of B over the triangle.

    Entries c_jk = int_0^1 ds int_0^s dt B_jk(t x + (s - t) y + (1 - s) z),
    computed with the inner integral mapped to t = s tau on an 8 x 8
    Gauss-Legendre product grid.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    d = B.dim
    shape = np.broadcast(x[..., 0], y[..., 0], z[..., 0]).shape
    out = np.zeros(shape + (d, d))
    for (j, k) in B.upper:
        acc = np.zeros(shape)
        for s, ws in zip(_TRI_S, _TRI_W):
            for tau, wt in zip(_TRI_S, _TRI_W):
                t = s * tau
                pt = t * x + (s - t) * y + (1.0 - s) * z
                acc += ws * wt * s * B.entry(j, k, pt)
        out[..., j, k] = acc
        out[..., k, j] = -acc
    return out


def triangle_flux(B, x, y, z):
    """Flux of B through the oriented triangle with vertices x, y, z.

    Returns -<C(x,y,z)(x - y), (x - z)>; for a constant field in d = 2 this
    equals field strength times the signed area of (x, y, z) traversed in
    that order (positive for the counterclockwise unit triangle).
    """
    if B.is_zero:
        x = np.asarray(x, dtype=float)
        return np.zeros(np.broadcast(x[..., 0], np.asarray(y)[..., 0],
                                     np.asarray(z)[..., 0]).shape)
    C = flux_matrix(B, x, y, z)
    xy = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    xz = np.asarray(x, dtype=float) - np.asarray(z, dtype=float)
    return -np.einsum("...jk,...k,...j->...", C, xy, xz)


def omega_triangle(B, x, y, z):
    """Unit phase exp(-i * triangle_flux); |result| = 1 exactly."""
    return np.exp(-1j * triangle_flux(B, x, y, z))


def gauge_shift(A, phi):
    """A + grad(phi) for a smooth scalar phi with gradient access."""
    if not isinstance(phi, ScalarField):
        phi = ScalarField(phi)

    def component(j):
        def fn(x):
            x = np.asarray(x, dtype=float)
            return A.values(x)[..., j] + phi.gradient(x)[..., j]
        return fn

    return VectorPotential(A.dim, [component(j) for j in range(A.dim)])


# -- registries ----------------------------------------------------------


def zero_field(dim):
    return MagneticField(dim, {})


def constant_field(dim, b=1.0):
    if dim < 2:
        return zero_field(dim)
    return MagneticField(dim, {(0, 1): lambda x, b=float(b): np.full(x.shape[:-1], b)})


def bump_field(dim, b0=1.0, width=1.0):
    """Entries b0 / (1 + |x / width|^2) on the (0, 1) slot."""
    if dim < 2:
        return zero_field(dim)
    b0, width = float(b0), float(width)

    def entry(x):
        r2 = np.sum((x / width) ** 2, axis=-1)
        return b0 / (1.0 + r2)

    return MagneticField(dim, {(0, 1): entry})


_FIELDS = {
    "zero": lambda dim, **kw: zero_field(dim),
    "constant": lambda dim, b=1.0, **kw: constant_field(dim, b),
    "bump": lambda dim, b0=1.0, width=1.0, **kw: bump_field(dim, b0, width),
}


def field_names():
    return sorted(_FIELDS)


def make_field(name, dim, **params):
    if name not in _FIELDS:
        raise KeyError(f"unknown field '{name}' (have {field_names()})")
    return _FIELDS[name](dim, **params)


_GAUGES = {
    "zero": lambda dim, **kw: ScalarField(lambda x: np.zeros(x.shape[:-1]),
                                          grad=lambda x: np.zeros_like(x)),
    "bilinear": lambda dim, c=0.25, **kw: _bilinear_gauge(dim, c),
    "quadratic": lambda dim, c=0.25, **kw: _quadratic_gauge(dim, c),
}


def _bilinear_gauge(dim, c):
    if dim < 2:
        raise ValueError("bilinear gauge needs d >= 2")
    c = float(c)

    def grad(x):
        g = np.zeros_like(x)
        g[..., 0] = c * x[..., 1]
        g[..., 1] = c * x[..., 0]
        return g

    return ScalarField(lambda x: c * x[..., 0] * x[..., 1], grad=grad)


def _quadratic_gauge(dim, c):
    c = float(c)
    return ScalarField(lambda x: c * np.sum(x * x, axis=-1),
                       grad=lambda x: 2.0 * c * x)


def gauge_names():
    return sorted(_GAUGES)


def make_gauge(name, dim, **params):
    if name not in _GAUGES:
        raise KeyError(f"unknown gauge '{name}' (have {gauge_names()})")
    return _GAUGES[name](dim, **params)
