"""Phase-space symbols with derivative access.

A symbol is an evaluable function a(x, xi) on R^d x R^d together with an
order (its growth rate in <xi>) and partial derivatives.  Symbols form a
small closed algebra: sums, products, scalar multiples, cutoffs and
pullbacks again yield symbols, with derivatives propagated by the
chain/product rule.  Derivatives that have no analytic rule fall back to
central differences with step eps**(1/3) * (1 + |coordinate|).

Everything evaluates vectorized: ``x`` and ``xi`` are arrays of shape
``(..., dim)`` and the result has shape ``(...)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

_FD_STEP = np.finfo(float).eps ** (1.0 / 3.0)


def _component(points, j):
    return np.asarray(points)[..., j]


def bracket(xi):
    """<xi> = sqrt(1 + |xi|^2), vectorized over (..., d)."""
    xi = np.asarray(xi, dtype=float)
    return np.sqrt(1.0 + np.sum(xi * xi, axis=-1))


class Symbol:
    """Base class for phase-space functions a(x, xi).

    Attributes
    ----------
    dim : int
        Dimension d of each of the x and xi slots.
    order : float
        Growth order m: |a| is expected to be O(<xi>^m).
    is_real : bool
        True when values are guaranteed real.
    x_independent : bool
        True when a does not depend on x (enables exact flows).
    singular_near_zero : bool
        True for positively homogeneous symbols undefined at xi = 0.
    principal : Symbol or None
        Optional homogeneous principal part.
    """

    def __init__(self, dim, order, is_real=False, x_independent=False,
                 singular_near_zero=False):
        self.dim = int(dim)
        self.order = float(order)
        self.is_real = bool(is_real)
        self.x_independent = bool(x_independent)
        self.singular_near_zero = bool(singular_near_zero)
        self.is_elliptic_claimed = False
        self.principal = None
        self._deriv_cache = {}

    # -- evaluation ----------------------------------------------------

    def value(self, x, xi):
        raise NotImplementedError

    def __call__(self, x, xi):
        return self.value(x, xi)

    # -- derivative rules (None means "no analytic rule") ---------------

    def _dx(self, j):
        return None

    def _dxi(self, j):
        return None

    def dx(self, j):
        key = ("x", j)
        if key not in self._deriv_cache:
            rule = self._dx(j)
            if rule is None and self.x_independent:
                rule = _Const(0.0, self.dim)
            if rule is None:
                rule = _FiniteDifference(self, "x", j)
            self._deriv_cache[key] = rule
        return self._deriv_cache[key]

    def dxi(self, j):
        key = ("xi", j)
        if key not in self._deriv_cache:
            rule = self._dxi(j)
            if rule is None:
                rule = _FiniteDifference(self, "xi", j)
            self._deriv_cache[key] = rule
        return self._deriv_cache[key]

    def derivative(self, alpha, beta):
        """The symbol d_x^alpha d_xi^beta a for multi-indices alpha, beta."""
        alpha = tuple(int(a) for a in alpha)
        beta = tuple(int(b) for b in beta)
        key = (alpha, beta)
        if key in self._deriv_cache:
            return self._deriv_cache[key]
        out = self
        for j, k in enumerate(alpha):
            for _ in range(k):
                out = out.dx(j)
        for j, k in enumerate(beta):
            for _ in range(k):
                out = out.dxi(j)
        self._deriv_cache[key] = out
        return out

    def grad_x(self, x, xi):
        """Array (..., d) of first x-derivatives."""
        return np.stack([self.dx(j).value(x, xi) for j in range(self.dim)],
                        axis=-1)

    def grad_xi(self, x, xi):
        return np.stack([self.dxi(j).value(x, xi) for j in range(self.dim)],
                        axis=-1)

    def hess(self, x, xi, kind):
        """Second-derivative block; kind in {'xx', 'xxi', 'xixi'}.

        ``out[..., i, j]`` is d_i d_j a with the first index in the block's
        first slot (so 'xxi'[i, j] = d_{x_i} d_{xi_j} a).
        """
        d = self.dim
        out = np.empty(np.broadcast(np.asarray(x)[..., 0],
                                    np.asarray(xi)[..., 0]).shape + (d, d),
                       dtype=complex if not self.is_real else float)
        for i in range(d):
            base = self.dx(i) if kind in ("xx", "xxi") else self.dxi(i)
            for j in range(d):
                second = base.dx(j) if kind == "xx" else base.dxi(j)
                out[..., i, j] = second.value(x, xi)
        if kind == "xx":
            # symmetrize: mixed analytic/FD rules can differ at roundoff
            out = 0.5 * (out + np.swapaxes(out, -1, -2))
        elif kind == "xixi":
            out = 0.5 * (out + np.swapaxes(out, -1, -2))
        return out

    # -- algebra --------------------------------------------------------

    def __add__(self, other):
        other = _coerce(other, self.dim)
        return _Sum(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * _coerce(other, self.dim)

    def __rsub__(self, other):
        return _coerce(other, self.dim) + (-1.0) * self

    def __mul__(self, other):
        if isinstance(other, Symbol):
            return _Product(self, other)
        return _Scaled(complex(other), self)

    __rmul__ = __mul__

    def __neg__(self):
        return _Scaled(-1.0, self)


def _coerce(value, dim):
    if isinstance(value, Symbol):
        return value
    return _Const(value, dim)


class _Const(Symbol):
    def __init__(self, value, dim):
        value = complex(value)
        super().__init__(dim, 0.0, is_real=(value.imag == 0.0),
                         x_independent=True)
        self.c = value.real if value.imag == 0.0 else value

    def value(self, x, xi):
        shape = np.broadcast(np.asarray(x)[..., 0], np.asarray(xi)[..., 0]).shape
        return np.full(shape, self.c)

    def _dx(self, j):
        return _Const(0.0, self.dim)

    _dxi = _dx


class _CoordX(Symbol):
    def __init__(self, j, dim):
        super().__init__(dim, 0.0, is_real=True)
        self.j = j

    def value(self, x, xi):
        return _component(x, self.j) + 0.0 * _component(xi, 0)

    def _dx(self, j):
        return _Const(1.0 if j == self.j else 0.0, self.dim)

    def _dxi(self, j):
        return _Const(0.0, self.dim)


class _CoordXi(Symbol):
    def __init__(self, j, dim):
        super().__init__(dim, 1.0, is_real=True, x_independent=True)
        self.j = j

    def value(self, x, xi):
        return _component(xi, self.j) + 0.0 * _component(x, 0)

    def _dx(self, j):
        return _Const(0.0, self.dim)

    def _dxi(self, j):
        return _Const(1.0 if j == self.j else 0.0, self.dim)


class _BracketPow(Symbol):
    """<xi>^p."""

    def __init__(self, p, dim):
        super().__init__(dim, p, is_real=True, x_independent=True)
        self.p = float(p)

    def value(self, x, xi):
        return bracket(xi) ** self.p + 0.0 * _component(x, 0)

    def _dx(self, j):
        return _Const(0.0, self.dim)

    def _dxi(self, j):
        return self.p * _CoordXi(j, self.dim) * _BracketPow(self.p - 2.0, self.dim)


class _NormPow(Symbol):
    """|xi|^p; positively homogeneous of degree p, singular at xi = 0."""

    def __init__(self, p, dim):
        super().__init__(dim, p, is_real=True, x_independent=True,
                         singular_near_zero=True)
        self.p = float(p)

    def value(self, x, xi):
        r = np.sqrt(np.sum(np.asarray(xi, dtype=float) ** 2, axis=-1))
        with np.errstate(divide="ignore"):
            out = r ** self.p
        return out + 0.0 * _component(x, 0)

    def _dx(self, j):
        return _Const(0.0, self.dim)

    def _dxi(self, j):
        return self.p * _CoordXi(j, self.dim) * _NormPow(self.p - 2.0, self.dim)


class _SinX(Symbol):
    def __init__(self, j, dim):
        super().__init__(dim, 0.0, is_real=True)
        self.j = j

    def value(self, x, xi):
        return np.sin(_component(x, self.j)) + 0.0 * _component(xi, 0)

    def _dx(self, j):
        if j == self.j:
            return _CosX(self.j, self.dim)
        return _Const(0.0, self.dim)

    def _dxi(self, j):
        return _Const(0.0, self.dim)


class _CosX(Symbol):
    def __init__(self, j, dim):
        super().__init__(dim, 0.0, is_real=True)
        self.j = j

    def value(self, x, xi):
        return np.cos(_component(x, self.j)) + 0.0 * _component(xi, 0)

    def _dx(self, j):
        if j == self.j:
            return _Scaled(-1.0, _SinX(self.j, self.dim))
        return _Const(0.0, self.dim)

    def _dxi(self, j):
        return _Const(0.0, self.dim)


class _GaussBump(Symbol):
    """exp(-(|x|^2 + |xi|^2)/2)."""

    def __init__(self, dim):
        super().__init__(dim, 0.0, is_real=True)

    def value(self, x, xi):
        q = np.sum(np.asarray(x, dtype=float) ** 2, axis=-1)
        q = q + np.sum(np.asarray(xi, dtype=float) ** 2, axis=-1)
        return np.exp(-0.5 * q)

    def _dx(self, j):
        return _Scaled(-1.0, _CoordX(j, self.dim)) * self

    def _dxi(self, j):
        return _Scaled(-1.0, _CoordXi(j, self.dim)) * self


class _Sum(Symbol):
    def __init__(self, a, b):
        super().__init__(a.dim, max(a.order, b.order),
                         is_real=a.is_real and b.is_real,
                         x_independent=a.x_independent and b.x_independent,
                         singular_near_zero=a.singular_near_zero
                         or b.singular_near_zero)
        self.a, self.b = a, b

    def value(self, x, xi):
        return self.a.value(x, xi) + self.b.value(x, xi)

    def _dx(self, j):
        return self.a.dx(j) + self.b.dx(j)

    def _dxi(self, j):
        return self.a.dxi(j) + self.b.dxi(j)


class _Product(Symbol):
    def __init__(self, a, b):
        super().__init__(a.dim, a.order + b.order,
                         is_real=a.is_real and b.is_real,
                         x_independent=a.x_independent and b.x_independent,
                         singular_near_zero=a.singular_near_zero
                         or b.singular_near_zero)
        self.a, self.b = a, b

    def value(self, x, xi):
        return self.a.value(x, xi) * self.b.value(x, xi)

    def _dx(self, j):
        return self.a.dx(j) * self.b + self.a * self.b.dx(j)

    def _dxi(self, j):
        return self.a.dxi(j) * self.b + self.a * self.b.dxi(j)


class _Scaled(Symbol):
    def __init__(self, c, a):
        c = complex(c)
        super().__init__(a.dim, a.order,
                         is_real=a.is_real and c.imag == 0.0,
                         x_independent=a.x_independent,
                         singular_near_zero=a.singular_near_zero)
        self.c = c.real if c.imag == 0.0 else c
        self.a = a

    def value(self, x, xi):
        return self.c * self.a.value(x, xi)

    def _dx(self, j):
        return _Scaled(self.c, self.a.dx(j))

    def _dxi(self, j):
        return _Scaled(self.c, self.a.dxi(j))


class _FiniteDifference(Symbol):
    """Central-difference first derivative, step eps^(1/3) * (1 + |coord|)."""

    def __init__(self, a, wrt, j):
        order = a.order if wrt == "x" else a.order - 1.0
        super().__init__(a.dim, order, is_real=a.is_real,
                         x_independent=a.x_independent and wrt == "xi",
                         singular_near_zero=a.singular_near_zero)
        self.a, self.wrt, self.j = a, wrt, j

    def value(self, x, xi):
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        target = x if self.wrt == "x" else xi
        h = _FD_STEP * (1.0 + np.abs(target[..., self.j]))
        shift = np.zeros_like(target)
        shift[..., self.j] = h
        if self.wrt == "x":
            hi = self.a.value(x + shift, xi)
            lo = self.a.value(x - shift, xi)
        else:
            hi = self.a.value(x, xi + shift)
            lo = self.a.value(x, xi - shift)
        return (hi - lo) / (2.0 * h)


class FunctionSymbol(Symbol):
    """Wrap an arbitrary vectorized callable f(x, xi) as a Symbol.

    All derivatives fall back to central differences.
    """

    def __init__(self, dim, order, fn, is_real=False, x_independent=False):
        super().__init__(dim, order, is_real=is_real,
                         x_independent=x_independent)
        self._fn = fn

    def value(self, x, xi):
        return self._fn(np.asarray(x, dtype=float), np.asarray(xi, dtype=float))


class PullbackSymbol(Symbol):
    """a composed with a phase-space map (x, xi) -> (X(x,xi), Xi(x,xi)).

    First derivatives use the chain rule when the map's Jacobian is given;
    otherwise (and for higher order) finite differences apply.
    """

    def __init__(self, a, phase_map, jacobian=None, order=None):
        super().__init__(a.dim, a.order if order is None else order,
                         is_real=a.is_real)
        self.a = a
        self.phase_map = phase_map
        self.jacobian = jacobian

    def value(self, x, xi):
        X, Xi = self.phase_map(np.asarray(x, dtype=float),
                               np.asarray(xi, dtype=float))
        return self.a.value(X, Xi)


# -- smooth cutoff ------------------------------------------------------


def _bump_g(t):
    """exp(-1/t) for t > 0, 0 otherwise."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 1e-3  # exp(-1/t) underflows well before this
    with np.errstate(over="ignore"):
        out[pos] = np.exp(-1.0 / t[pos])
    return out


def _bump_g1(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 1e-3
    tp = t[pos]
    out[pos] = np.exp(-1.0 / tp) / tp ** 2
    return out


def _bump_g2(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 1e-3
    tp = t[pos]
    out[pos] = np.exp(-1.0 / tp) * (1.0 / tp ** 4 - 2.0 / tp ** 3)
    return out


def _step_s(u, nderiv=0):
    """C-infinity step s(u) = g(u-1) / (g(u-1) + g(2-u)) and derivatives.

    Exactly 0 for u <= 1 and exactly 1 for u >= 2 (derivatives vanish
    there); nderiv in {0, 1, 2}.
    """
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    if nderiv == 0:
        out[u >= 2.0] = 1.0
    mid = (u > 1.0) & (u < 2.0)
    if not np.any(mid):
        return out
    um = u[mid]
    g1, g2 = _bump_g(um - 1.0), _bump_g(2.0 - um)
    d1, d2 = _bump_g1(um - 1.0), -_bump_g1(2.0 - um)
    h = g1 + g2
    if nderiv == 0:
        out[mid] = g1 / h
    elif nderiv == 1:
        out[mid] = (d1 * g2 - g1 * d2) / h ** 2
    elif nderiv == 2:
        e1, e2 = _bump_g2(um - 1.0), _bump_g2(2.0 - um)
        num = d1 * g2 - g1 * d2
        dnum = e1 * g2 - g1 * e2
        dh = d1 + d2
        out[mid] = dnum / h ** 2 - 2.0 * num * dh / h ** 3
    else:
        raise ValueError("analytic step derivatives stop at order 2")
    return out


class _RadialCutoff(Symbol):
    """k-th derivative (in q = |xi|^2) of chi_rho(xi) = s(|xi|/rho).

    Writing chi as a function of q keeps the derivative algebra free of
    1/|xi| factors: d/d(xi_j) maps k -> 2 xi_j * (k+1).
    """

    def __init__(self, rho, dim, k=0):
        super().__init__(dim, -2.0 * k, is_real=True, x_independent=True)
        self.rho = float(rho)
        self.k = int(k)

    def value(self, x, xi):
        xi = np.asarray(xi, dtype=float)
        q = np.sum(xi * xi, axis=-1)
        r = np.sqrt(q)
        u = r / self.rho
        if self.k == 0:
            val = _step_s(u, 0)
        else:
            safe = np.where(r > 0.5 * self.rho, r, 1.0)
            s1 = _step_s(u, 1)
            if self.k == 1:
                val = s1 / (2.0 * self.rho * safe)
            elif self.k == 2:
                s2 = _step_s(u, 2)
                val = (s2 * safe / self.rho - s1) / (4.0 * self.rho * safe ** 3)
            else:
                raise ValueError("cutoff derivatives beyond order 2 use FD")
            val = np.where(r > 0.5 * self.rho, val, 0.0)
        return val + 0.0 * _component(x, 0)

    def _dx(self, j):
        return _Const(0.0, self.dim)

    def _dxi(self, j):
        if self.k >= 2:
            return None  # fall back to finite differences
        return 2.0 * _CoordXi(j, self.dim) * _RadialCutoff(self.rho, self.dim,
                                                           self.k + 1)


@dataclass
class CutoffFunction:
    """Smooth radial cutoff: 0 for |xi| <= rho, 1 for |xi| >= 2 rho."""

    rho: float
    dim: int = 1

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        r = np.sqrt(np.sum(xi * xi, axis=-1))
        return _step_s(r / self.rho, 0)

    def radial(self, r, nderiv=0):
        r = np.asarray(r, dtype=float)
        return _step_s(r / self.rho, nderiv) / self.rho ** nderiv

    def as_symbol(self, dim=None):
        return _RadialCutoff(self.rho, self.dim if dim is None else dim)


# -- constructors / registry --------------------------------------------


def constant(value, dim):
    return _Const(value, dim)


def coordinate_x(j, dim):
    return _CoordX(j, dim)


def coordinate_xi(j, dim):
    return _CoordXi(j, dim)


def bracket_power(p, dim):
    return _BracketPow(p, dim)


def norm_power(p, dim):
    return _NormPow(p, dim)


def relativistic(dim):
    """<xi>, order 1, elliptic, with principal part |xi|."""
    a = _BracketPow(1.0, dim)
    a.is_elliptic_claimed = True
    a.principal = _NormPow(1.0, dim)
    return a


def homog_relativistic(dim, rho=1.0):
    """chi_rho(xi) |xi|: the truncated homogeneous relativistic symbol."""
    a = _RadialCutoff(rho, dim) * _NormPow(1.0, dim)
    a.order = 1.0
    a.is_elliptic_claimed = True
    a.principal = _NormPow(1.0, dim)
    a.cutoff_radius = rho
    return a


def aniso(dim, c=0.3):
    """<xi> + c sin(x_1) xi_1 / <xi>: order-1 elliptic, x-dependent."""
    a = _BracketPow(1.0, dim) + float(c) * (_SinX(0, dim)
                                            * _CoordXi(0, dim)
                                            * _BracketPow(-1.0, dim))
    a.order = 1.0
    a.is_elliptic_claimed = abs(c) < 1.0
    a.principal = _NormPow(1.0, dim)
    return a


def homog_aniso(dim, c=0.3):
    """|xi| + c sin(x_1) xi_1^2 / |xi|: x-dependent, homogeneous of degree 1."""
    a = _NormPow(1.0, dim) + float(c) * (_SinX(0, dim)
                                         * _CoordXi(0, dim) * _CoordXi(0, dim)
                                         * _NormPow(-1.0, dim))
    a.order = 1.0
    a.is_elliptic_claimed = abs(c) < 1.0
    a.principal = a
    return a


def gaussian_bump(dim):
    return _GaussBump(dim)


_REGISTRY = {
    "one": lambda dim, **kw: constant(1.0, dim),
    "relativistic": lambda dim, **kw: relativistic(dim),
    "homog_relativistic": lambda dim, rho=1.0, **kw: homog_relativistic(dim, rho),
    "aniso": lambda dim, c=0.3, **kw: aniso(dim, c),
    "homog_aniso": lambda dim, c=0.3, **kw: homog_aniso(dim, c),
    "gaussian_bump": lambda dim, **kw: gaussian_bump(dim),
    "bracket_power": lambda dim, p=1.0, **kw: bracket_power(p, dim),
}


def symbol_names():
    return sorted(_REGISTRY)


def make_symbol(name, dim, **params):
    if name not in _REGISTRY:
        raise KeyError(f"unknown symbol '{name}' (have {symbol_names()})")
    return _REGISTRY[name](dim, **params)


# -- operations ----------------------------------------------------------


@dataclass
class SeminormResult:
    value: float
    diverging: bool


def _direction_set(dim, count=32):
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        th = 2.0 * np.pi * np.arange(count) / count
        return np.stack([np.cos(th), np.sin(th)], axis=-1)
    rng = np.random.default_rng(7)
    v = rng.standard_normal((count, dim))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def sample_points(dim, box_half_width=4.0, nx=17, shells=(1, 2, 4, 8, 16, 32, 64),
                  directions=32):
    """Cartesian product of a uniform x grid and log-spaced xi shells."""
    axis = np.linspace(-box_half_width, box_half_width, nx)
    xg = np.stack(np.meshgrid(*([axis] * dim), indexing="ij"),
                  axis=-1).reshape(-1, dim)
    dirs = _direction_set(dim, directions)
    xig = np.concatenate([r * dirs for r in shells], axis=0)
    x = np.repeat(xg, len(xig), axis=0)
    xi = np.tile(xig, (len(xg), 1))
    return x, xi


def seminorm_estimate(a, alpha, beta, box_half_width=4.0, nx=17,
                      shells=(1, 2, 4, 8, 16, 32, 64)):
    """Sampled sup of <xi>^(|beta| - m) |d_x^alpha d_xi^beta a|.

    Divergence in x (value still growing when the x box is enlarged) is
    reported through the ``diverging`` flag rather than as an exception.
    """
    alpha, beta = tuple(alpha), tuple(beta)
    if sum(alpha) + sum(beta) > 2 and not _has_analytic_chain(a):
        raise ValueError("derivative order beyond 2 requires analytic partials")
    da = a.derivative(alpha, beta)
    weight_pow = sum(beta) - a.order

    def sup_on(half_width):
        x, xi = sample_points(a.dim, half_width, nx, shells)
        vals = np.abs(da.value(x, xi)) * bracket(xi) ** weight_pow
        return float(np.max(vals))

    inner = sup_on(0.5 * box_half_width)
    outer = sup_on(box_half_width)
    diverging = outer > 1.5 * inner + 1e-12 or not np.isfinite(outer)
    return SeminormResult(value=outer, diverging=diverging)


def _has_analytic_chain(a):
    probe = a
    try:
        for _ in range(3):
            probe = probe._dx(0) or probe._dxi(0)
            if probe is None:
                return False
    except Exception:
        return False
    return True


def is_elliptic_sample(a, R, box_half_width=4.0, nx=9,
                       shells=(1.0, 2.0, 4.0, 8.0, 16.0, 32.0)):
    """Check |a(x, xi)| >= C <xi>^m on sampled |xi| >= R; returns (bool, C)."""
    shells = [s for s in np.asarray(shells, dtype=float) * max(R, 1.0) if s >= R]
    if not shells:
        shells = [R]
    x, xi = sample_points(a.dim, box_half_width, nx, tuple(shells))
    ratio = np.abs(a.value(x, xi)) / bracket(xi) ** a.order
    c_est = float(np.min(ratio))
    return c_est > 1e-8, c_est


def asymptotic_sum(terms, schedule=None):
    """Borel-style sum: a = sum_j chi(xi / t_j) a_j for decreasing orders.

    The default schedule is t_j = 2^j.  The cutoff chi vanishes for
    |xi| <= t_j and equals 1 for |xi| >= 2 t_j.
    """
    terms = list(terms)
    if not terms:
        raise ValueError("need at least one term")
    orders = [t.order for t in terms]
    if any(o2 >= o1 for o1, o2 in zip(orders, orders[1:])):
        raise ValueError(f"orders must be strictly decreasing, got {orders}")
    if schedule is None:
        schedule = [2.0 ** j for j in range(len(terms))]
    schedule = [float(t) for t in schedule]
    if len(schedule) != len(terms):
        raise ValueError("schedule length must match terms")
    dim = terms[0].dim
    out = _RadialCutoff(schedule[0], dim) * terms[0]
    for t_j, a_j in zip(schedule[1:], terms[1:]):
        out = out + _RadialCutoff(t_j, dim) * a_j
    out.order = orders[0]
    return out


def _multi_indices(dim, total):
    for combo in itertools.product(range(total + 1), repeat=dim):
        if sum(combo) == total:
            yield combo


def _quantization_series(a, n_terms, half_sign):
    dim = a.dim
    out = a
    for total in range(1, n_terms):
        for alpha in _multi_indices(dim, total):
            fact = math.prod(math.factorial(k) for k in alpha)
            coeff = (half_sign ** total) * ((-1j) ** total) / fact
            out = out + coeff * a.derivative(alpha, alpha)
    out.order = a.order
    return out


def weyl_to_left(a, n_terms):
    """Truncated series mapping a Weyl symbol to the equivalent left symbol.

    terms: sum over |alpha| < n_terms of (1/alpha!) (1/2)^|alpha|
    (D_x^alpha d_eta^alpha a), with D = -i d.
    """
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    if n_terms > 3 and not _has_analytic_chain(a):
        raise ValueError("n_terms > 3 needs analytic derivatives")
    return _quantization_series(a, n_terms, 0.5)


def left_to_weyl(b, n_terms):
    """Mirror of weyl_to_left with coefficients (-1/2)^|alpha|."""
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    if n_terms > 3 and not _has_analytic_chain(b):
        raise ValueError("n_terms > 3 needs analytic derivatives")
    return _quantization_series(b, n_terms, -0.5)


def principal_truncation(a0, chi):
    """Globally smooth symbol chi * a0 from a homogeneous principal part."""
    dim = a0.dim
    out = chi.as_symbol(dim) * a0
    out.order = a0.order
    out.is_real = a0.is_real
    out.singular_near_zero = False
    out.principal = a0
    out.cutoff_radius = chi.rho
    out.is_elliptic_claimed = a0.is_elliptic_claimed
    return out
