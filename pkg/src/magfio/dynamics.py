"""Hamiltonian flows with variational Jacobians.

The flow of a real symbol a is integrated with fixed-step RK4 on the
2d-dimensional system xdot = grad_xi a, xidot = -grad_x a, co-integrating
the variational system for the Jacobian d X(t) / d Y.  Fixed steps keep
the time grid deterministic and aligned with the quadratures built on
top of it.

Batched throughout: initial conditions are arrays (n, 2d).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class FlowError(RuntimeError):
    pass


class FlowDomainError(FlowError):
    """A homogeneous Hamiltonian was evaluated too close to xi = 0."""


class FlowNumericalError(FlowError):
    """NaN or overflow during integration."""


def _as_phase_batch(Y, dim):
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[None, :]
    if Y.shape[-1] != 2 * dim:
        raise ValueError(f"phase points must have {2 * dim} components")
    return Y


class HamiltonianRHS:
    """Cached derivative symbols of a Hamiltonian, evaluated in batch."""

    def __init__(self, a):
        self.a = a
        d = a.dim
        self._gx = [a.dx(j) for j in range(d)]
        self._gxi = [a.dxi(j) for j in range(d)]
        self._hxx = [[self._gx[i].dx(j) for j in range(d)] for i in range(d)]
        self._hxxi = [[self._gx[i].dxi(j) for j in range(d)] for i in range(d)]
        self._hxixi = [[self._gxi[i].dxi(j) for j in range(d)] for i in range(d)]

    def velocity(self, x, xi):
        """(xdot, xidot), each (n, d)."""
        gx = np.stack([g.value(x, xi).real for g in self._gx], axis=-1)
        gxi = np.stack([g.value(x, xi).real for g in self._gxi], axis=-1)
        return gxi, -gx

    def variational_matrix(self, x, xi):
        """M with (dxdot, dxidot) = M @ (dx, dxi), shape (n, 2d, 2d)."""
        d = self.a.dim
        n = x.shape[0]
        M = np.empty((n, 2 * d, 2 * d))
        for i in range(d):
            for j in range(d):
                hxxi = self._hxxi[i][j].value(x, xi).real
                M[:, j, i] = hxxi            # d(xdot_j)/d(x_i) = a_{x_i xi_j}
                M[:, d + i, d + j] = -hxxi   # d(xidot_i)/d(xi_j)
                M[:, i, d + j] = 0.5 * (self._hxixi[i][j].value(x, xi).real
                                        + self._hxixi[j][i].value(x, xi).real)
                M[:, d + i, j] = -0.5 * (self._hxx[i][j].value(x, xi).real
                                         + self._hxx[j][i].value(x, xi).real)
        return M


def _rk4_flow(rhs, x0, xi0, t_final, n_steps, jacobian, observer=None,
              xi_floor=None):
    """Fixed-step RK4; returns the final state and optionally stores steps.

    ``observer(k, t, x, xi, J)`` is called at every accepted step endpoint
    including k = 0.
    """
    x = np.array(x0, dtype=float)
    xi = np.array(xi0, dtype=float)
    n, d = x.shape
    J = np.tile(np.eye(2 * d), (n, 1, 1)) if jacobian else None
    dt = t_final / n_steps
    if observer is not None:
        observer(0, 0.0, x, xi, J)

    def check(xiv, step):
        if xi_floor is not None:
            r = np.sqrt(np.sum(xiv * xiv, axis=-1))
            if np.any(r < xi_floor):
                raise FlowDomainError(
                    f"|xi| fell below floor {xi_floor:g} at step {step}")

    check(xi, 0)
    for k in range(n_steps):
        stages = []
        for cx, cxi, cJ in _rk4_stage_points(x, xi, J, stages, dt):
            vx, vxi = rhs.velocity(cx, cxi)
            if jacobian:
                M = rhs.variational_matrix(cx, cxi)
                stages.append((vx, vxi, M @ cJ))
            else:
                stages.append((vx, vxi, None))
        w = (1.0, 2.0, 2.0, 1.0)
        x = x + (dt / 6.0) * sum(wi * s[0] for wi, s in zip(w, stages))
        xi = xi + (dt / 6.0) * sum(wi * s[1] for wi, s in zip(w, stages))
        if jacobian:
            J = J + (dt / 6.0) * sum(wi * s[2] for wi, s in zip(w, stages))
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(xi))):
            raise FlowNumericalError(f"non-finite state at step {k + 1}")
        check(xi, k + 1)
        if observer is not None:
            observer(k + 1, (k + 1) * dt, x, xi, J)
    return x, xi, J


def _rk4_stage_points(x, xi, J, stages, dt):
    yield x, xi, J
    vx, vxi, vJ = stages[0]
    yield x + 0.5 * dt * vx, xi + 0.5 * dt * vxi, \
        None if J is None else J + 0.5 * dt * vJ
    vx, vxi, vJ = stages[1]
    yield x + 0.5 * dt * vx, xi + 0.5 * dt * vxi, \
        None if J is None else J + 0.5 * dt * vJ
    vx, vxi, vJ = stages[2]
    yield x + dt * vx, xi + dt * vxi, None if J is None else J + dt * vJ


@dataclass
class Trajectory:
    """Flow samples X(t_i; Y) with variational Jacobians dX/dY."""

    times: np.ndarray            # (m+1,)
    states: np.ndarray           # (m+1, n, 2d)
    jacobians: np.ndarray | None  # (m+1, n, 2d, 2d)
    hamiltonian: object = field(repr=False, default=None)

    @property
    def dim(self):
        return self.states.shape[-1] // 2

    def positions(self, i=-1):
        return self.states[i, :, :self.dim]

    def momenta(self, i=-1):
        return self.states[i, :, self.dim:]

    def energies(self):
        d = self.dim
        a = self.hamiltonian
        return np.stack([a.value(s[:, :d], s[:, d:]).real for s in self.states])

    def energy_defect(self):
        e = self.energies()
        return float(np.max(np.abs(e - e[0])))

    def position_jacobian(self, i=-1):
        """Block d x(t) / d y, shape (n, d, d)."""
        d = self.dim
        return self.jacobians[i][:, :d, :d]

    def bracket_ratio_bound(self):
        """max over samples of (<xi(t)>/<eta>)^{+-1}."""
        d = self.dim
        br = np.sqrt(1.0 + np.sum(self.states[:, :, d:] ** 2, axis=-1))
        ratio = br / br[0]
        return float(max(ratio.max(), (1.0 / ratio).max()))


def _default_xi_floor(a):
    if not getattr(a, "singular_near_zero", False):
        return None
    rho = getattr(a, "cutoff_radius", None)
    return 0.5 * rho if rho is not None else 1e-8


def hamiltonian_flow(a, Y, t_final, n_steps, jacobian=True, force_rk4=False,
                     xi_floor=None):
    """Integrate the Hamiltonian system of a from states Y over [0, t_final].

    For x-independent symbols the flow x(t) = y + t grad a(eta),
    xi(t) = eta is evaluated in closed form unless ``force_rk4`` is set.

    Parameters
    ----------
    Y : array (n, 2d) or (2d,)
        Initial phase points (y, eta).
    n_steps : int
        Number of fixed RK4 steps (also the sample count of the result).
    """
    Y = _as_phase_batch(Y, a.dim)
    d = a.dim
    if xi_floor is None:
        xi_floor = _default_xi_floor(a)
    y, eta = Y[:, :d], Y[:, d:]
    times = np.linspace(0.0, t_final, n_steps + 1)

    if a.x_independent and not force_rk4:
        if xi_floor is not None:
            r = np.sqrt(np.sum(eta * eta, axis=-1))
            if np.any(r < xi_floor):
                raise FlowDomainError("initial |eta| below floor")
        vel = np.stack([a.dxi(j).value(y, eta).real for j in range(d)], axis=-1)
        states = np.empty((n_steps + 1, len(Y), 2 * d))
        jacs = None
        if jacobian:
            jacs = np.tile(np.eye(2 * d), (n_steps + 1, len(Y), 1, 1))
        hxixi = np.empty((len(Y), d, d))
        for i in range(d):
            for j in range(d):
                hxixi[:, i, j] = a.dxi(i).dxi(j).value(y, eta).real
        for k, t in enumerate(times):
            states[k, :, :d] = y + t * vel
            states[k, :, d:] = eta
            if jacobian:
                jacs[k][:, :d, d:] = t * hxixi
        return Trajectory(times, states, jacs, hamiltonian=a)

    rhs = HamiltonianRHS(a)
    m = n_steps
    states = np.empty((m + 1, len(Y), 2 * d))
    jacs = np.empty((m + 1, len(Y), 2 * d, 2 * d)) if jacobian else None

    def observer(k, t, x, xi, J):
        states[k, :, :d] = x
        states[k, :, d:] = xi
        if jacobian:
            jacs[k] = J

    _rk4_flow(rhs, y, eta, t_final, n_steps, jacobian, observer,
              xi_floor=xi_floor)
    return Trajectory(times, states, jacs, hamiltonian=a)


def symplectic_defect(traj):
    """max_t || DPhi^T J DPhi - J || (Frobenius), J the symplectic matrix."""
    if traj.jacobians is None:
        raise ValueError("trajectory was integrated without Jacobians")
    d = traj.dim
    J = np.zeros((2 * d, 2 * d))
    J[:d, d:] = np.eye(d)
    J[d:, :d] = -np.eye(d)
    worst = 0.0
    for Jt in traj.jacobians:
        G = np.swapaxes(Jt, -1, -2) @ J @ Jt - J
        worst = max(worst, float(np.sqrt(np.sum(np.abs(G) ** 2, axis=(-2, -1))).max()))
    return worst


def homogeneity_check(a0, Y, lam, t, n_steps=1000):
    """Defect of flow equivariance under xi -> lam xi for homogeneous a0.

    Returns max of |x(t; y, lam eta) - x(t; y, eta)| and
    |xi(t; y, lam eta) - lam xi(t; y, eta)|.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    Y = _as_phase_batch(Y, a0.dim)
    d = a0.dim
    Y_scaled = Y.copy()
    Y_scaled[:, d:] *= lam
    base = hamiltonian_flow(a0, Y, t, n_steps, jacobian=False)
    scaled = hamiltonian_flow(a0, Y_scaled, t, n_steps, jacobian=False)
    dx = np.abs(scaled.positions() - base.positions()).max()
    dxi = np.abs(scaled.momenta() - lam * base.momenta()).max()
    return float(max(dx, dxi))


def flow_window(a, sample_Ys, t_max, delta, steps_per_unit=1000,
                resolution=1e-3):
    """Largest T <= t_max with sup_sample ||I - d x(t)/d y|| <= delta on |t| <= T.

    The bound is monitored on the stored step grid (refined below
    ``resolution``) for both time directions; returns 0.0 if even the
    first step violates it.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must be in (0, 1)")
    Y = _as_phase_batch(sample_Ys, a.dim)
    d = a.dim
    n_steps = max(int(np.ceil(t_max * steps_per_unit)),
                  int(np.ceil(t_max / resolution)), 2)
    T = t_max
    for direction in (+1.0, -1.0):
        traj = hamiltonian_flow(a, Y, direction * t_max, n_steps)
        eye = np.eye(d)
        for k in range(1, n_steps + 1):
            dev = traj.position_jacobian(k) - eye
            norm = np.linalg.norm(dev, ord=2, axis=(-2, -1)).max()
            if norm > delta:
                T = min(T, abs(traj.times[k - 1]))
                break
    return float(T)
