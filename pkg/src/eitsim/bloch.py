"""Rotating-frame optical Bloch equations for an n-level system.

Builds the rotating-frame Hamiltonian from a set of classical drives, adds
Bloch-form relaxation (population branching plus per-pair coherence decay,
not a Lindblad dissipator), and solves the resulting linear master equation
dvec(rho)/dt = L vec(rho) for steady states and transients.

The density matrix is vectorized row-major: element (m, k) of the n x n
matrix sits at index m*n + k of the length-n^2 state vector.
"""

from collections import deque
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from . import kernels
from .errors import (ConfigError, InconsistentFrameError, IntegrationError,
                     InvalidArgumentError, SteadyStateError)
from .materials import LevelSystem
from .states import DensityMatrix, assert_density_matrix

# Residual gate for the steady-state solve, relative to the generator's
# infinity norm.
STEADY_STATE_RTOL = 1e-9
# Two independent pivot orderings must agree this closely or the nullspace
# is treated as degenerate.
DEGENERACY_TOL = 1e-8

EVOLVE_TOL_MIN = 1e-12
EVOLVE_TOL_MAX = 1e-3

# The reference level whose rotating-frame phase is pinned to zero when it
# participates in the drive graph (the probe's lower level in the default
# six-level model); any other connected component is anchored at its lowest
# level.
FRAME_REFERENCE_LEVEL = 2


@dataclass(frozen=True)
class FieldDrive:
    """One classical field coupling two levels.

    upper/lower are 1-based level indices; rabi is the complex Rabi
    frequency in rad/s; detuning = omega_atom - omega_field in rad/s.
    A zero-rabi drive is legal and still pins the rotating frame.
    """

    upper: int
    lower: int
    rabi: complex
    detuning: float = 0.0

    def __post_init__(self):
        if not (isinstance(self.upper, int) and isinstance(self.lower, int)):
            raise InvalidArgumentError("level indices must be integers")
        if self.upper == self.lower:
            raise InvalidArgumentError("a drive must couple two distinct levels")
        if self.upper < 1 or self.lower < 1:
            raise InvalidArgumentError("level indices are 1-based")
        rabi = complex(self.rabi)
        detuning = float(self.detuning)
        if not (np.isfinite(rabi.real) and np.isfinite(rabi.imag)):
            raise InvalidArgumentError("rabi frequency must be finite")
        if not np.isfinite(detuning):
            raise InvalidArgumentError("detuning must be finite")
        object.__setattr__(self, "rabi", rabi)
        object.__setattr__(self, "detuning", detuning)


@dataclass(frozen=True)
class Liouvillian:
    """Linear generator acting on the row-major vectorized density matrix."""

    generator: np.ndarray
    n_levels: int

    def __post_init__(self):
        gen = np.asarray(self.generator, dtype=complex)
        object.__setattr__(self, "generator", gen)
        dim = self.n_levels * self.n_levels
        if gen.shape != (dim, dim):
            raise ConfigError("generator dimension does not match level count")


@dataclass(frozen=True)
class Trajectory:
    """Sampled transient solution plus integration diagnostics.

    max_trace_dev / max_herm_dev are measured on the raw integrator output,
    before the per-state validation pass cleans the states up.
    """

    times: np.ndarray
    states: Tuple[DensityMatrix, ...]
    n_steps: int
    kernels_used: str
    max_trace_dev: float
    max_herm_dev: float

    @property
    def final(self) -> DensityMatrix:
        return self.states[-1]

    def populations(self) -> np.ndarray:
        """(n_times, n_levels) array of level populations."""
        return np.array([s.populations() for s in self.states])


def _check_drives(n_levels: int, drives) -> None:
    seen = set()
    for d in drives:
        if d.upper > n_levels or d.lower > n_levels:
            raise InvalidArgumentError(
                f"drive {d.upper}-{d.lower} outside 1..{n_levels}"
            )
        pair = frozenset((d.upper, d.lower))
        if pair in seen:
            raise ConfigError(
                f"duplicate drive on level pair {d.lower}-{d.upper}"
            )
        seen.add(pair)


def frame_phases(n_levels: int, drives) -> np.ndarray:
    """Rotating-frame phase derivative (rad/s) for every level.

    Constraint: phase(upper) - phase(lower) = detuning for every drive.
    The component containing FRAME_REFERENCE_LEVEL is anchored there at
    zero; every other component is anchored at its lowest level.  A drive
    cycle whose detunings contradict each other has no consistent frame.
    """
    _check_drives(n_levels, drives)
    adjacency = {m: [] for m in range(1, n_levels + 1)}
    max_det = 1.0
    for d in drives:
        adjacency[d.upper].append((d.lower, -d.detuning))
        adjacency[d.lower].append((d.upper, d.detuning))
        max_det = max(max_det, abs(d.detuning))
    tol = 1e-9 * max_det

    phases = np.zeros(n_levels)
    assigned = [False] * (n_levels + 1)
    for start in range(1, n_levels + 1):
        if assigned[start]:
            continue
        component = []
        stack = [start]
        marked = {start}
        while stack:
            m = stack.pop()
            component.append(m)
            for neighbor, _ in adjacency[m]:
                if neighbor not in marked:
                    marked.add(neighbor)
                    stack.append(neighbor)
        root = FRAME_REFERENCE_LEVEL if FRAME_REFERENCE_LEVEL in component \
            else min(component)
        phases[root - 1] = 0.0
        assigned[root] = True
        queue = deque([root])
        while queue:
            m = queue.popleft()
            for neighbor, offset in adjacency[m]:
                candidate = phases[m - 1] + offset
                if assigned[neighbor]:
                    if abs(phases[neighbor - 1] - candidate) > tol:
                        raise InconsistentFrameError(
                            f"drive cycle through level {neighbor} implies "
                            f"frame phases {phases[neighbor - 1]!r} and "
                            f"{candidate!r}"
                        )
                    continue
                phases[neighbor - 1] = candidate
                assigned[neighbor] = True
                queue.append(neighbor)
    return phases


def build_hamiltonian(n_levels: int, drives) -> np.ndarray:
    """Rotating-frame Hamiltonian divided by hbar, in rad/s.

    Diagonal: frame phases.  Off-diagonal: H[u,l] = -rabi/2 and its
    conjugate, for each drive.
    """
    ham = np.diag(frame_phases(n_levels, drives)).astype(complex)
    for d in drives:
        u, l = d.upper - 1, d.lower - 1
        ham[u, l] = -0.5 * d.rabi
        ham[l, u] = -0.5 * np.conj(d.rabi)
    return ham


def build_liouvillian(ham: np.ndarray, levels: LevelSystem,
                      gamma: np.ndarray) -> Liouvillian:
    """Assemble the full generator: coherent commutator, population
    branching, and coherence decay."""
    n = levels.n_levels
    ham = np.asarray(ham, dtype=complex)
    gamma = np.asarray(gamma, dtype=float)
    if ham.shape != (n, n):
        raise ConfigError("Hamiltonian dimension does not match level count")
    if gamma.shape != (n, n):
        raise ConfigError("gamma table dimension does not match level count")

    eye = np.eye(n)
    gen = -1j * (np.kron(ham, eye) - np.kron(eye, ham.T))

    branching = levels.branching
    for m in range(n):
        row = m * n + m
        gen[row, row] -= branching[m].sum()
        for j in range(n):
            if j != m:
                gen[row, j * n + j] += branching[j, m]
    for m in range(n):
        for k in range(n):
            if m != k:
                gen[m * n + k, m * n + k] -= gamma[m, k]
    return Liouvillian(generator=gen, n_levels=n)


def _solve_pinned(gen: np.ndarray, trace_row: np.ndarray, order: np.ndarray,
                  pin_position: int) -> np.ndarray:
    """Solve gen*vec = 0 with the unit-trace constraint substituted for one
    row, under a caller-chosen row ordering (forces a distinct pivot path)."""
    a = gen[order].copy()
    a[pin_position, :] = trace_row
    b = np.zeros(gen.shape[0], dtype=complex)
    b[pin_position] = 1.0
    return np.linalg.solve(a, b)


def steady_state(lv: Liouvillian) -> DensityMatrix:
    """Stationary density matrix of the generator.

    Solves the dense linear system by elimination with partial pivoting,
    with one row replaced by the trace constraint; re-solves under a second
    pivot ordering to detect degenerate (non-unique) nullspaces.
    """
    n = lv.n_levels
    dim = n * n
    gen = np.asarray(lv.generator, dtype=complex)
    trace_row = np.zeros(dim, dtype=complex)
    trace_row[:: n + 1] = 1.0
    try:
        vec = _solve_pinned(gen, trace_row, np.arange(dim), 0)
        vec_alt = _solve_pinned(gen, trace_row, np.arange(dim)[::-1], dim - 1)
    except np.linalg.LinAlgError as exc:
        raise SteadyStateError(f"singular steady-state system: {exc}") from exc

    gen_norm = float(np.max(np.abs(gen).sum(axis=1)))
    residual = float(np.max(np.abs(gen @ vec)))
    if residual > STEADY_STATE_RTOL * max(gen_norm, 1.0):
        raise SteadyStateError(
            f"steady-state residual {residual:.3e} exceeds "
            f"{STEADY_STATE_RTOL:.1e} * ||L|| = {STEADY_STATE_RTOL * gen_norm:.3e}"
        )
    disagreement = float(np.max(np.abs(vec - vec_alt)))
    if disagreement > DEGENERACY_TOL:
        raise SteadyStateError(
            f"steady state is not unique: two pivot orderings disagree by "
            f"{disagreement:.3e} (residual {residual:.3e})"
        )
    return assert_density_matrix(vec.reshape(n, n))


def evolve(rho0, lv: Liouvillian, t_end: float, tol: float,
           n_samples: int = 201,
           max_steps: int = kernels.DEFAULT_MAX_STEPS) -> Trajectory:
    """Integrate the master equation from rho0 over [0, t_end].

    tol is the relative local-error target per step (absolute floor is
    tol * 1e-3); t_end = 0 returns the validated initial state alone.
    """
    if isinstance(rho0, DensityMatrix):
        rho0 = rho0.matrix
    start = assert_density_matrix(rho0)
    n = start.n_levels
    if n != lv.n_levels:
        raise ConfigError("initial state dimension does not match generator")
    t_end = float(t_end)
    if not np.isfinite(t_end) or t_end < 0:
        raise InvalidArgumentError("t_end must be finite and non-negative")
    if not (EVOLVE_TOL_MIN <= tol <= EVOLVE_TOL_MAX):
        raise InvalidArgumentError(
            f"tol must lie in [{EVOLVE_TOL_MIN:.0e}, {EVOLVE_TOL_MAX:.0e}]"
        )
    if t_end == 0.0:
        return Trajectory(
            times=np.zeros(1), states=(start,), n_steps=0,
            kernels_used=kernels.ACTIVE_KERNELS,
            max_trace_dev=0.0, max_herm_dev=0.0,
        )
    if n_samples < 2:
        raise InvalidArgumentError("need at least two samples when t_end > 0")

    times = np.linspace(0.0, t_end, n_samples)
    raw, status, n_steps, filled = kernels.integrate(
        lv.generator, start.matrix.reshape(-1), times, tol, 1e-3 * tol,
        max_steps,
    )
    if status != kernels.STATUS_OK:
        reason = ("step size underflow" if status == kernels.STATUS_UNDERFLOW
                  else "step budget exhausted")
        reached = times[max(filled - 1, 0)]
        raise IntegrationError(
            f"{reason} after {n_steps} steps near t = {reached:.6e} s "
            f"(reached {filled}/{n_samples} samples at tol = {tol:.1e})"
        )

    mats = raw.reshape(n_samples, n, n)
    trace_dev = np.abs(np.einsum("tii->t", mats) - 1.0)
    herm_dev = np.abs(mats - np.conj(np.swapaxes(mats, 1, 2))).max(axis=(1, 2))
    states = tuple(assert_density_matrix(m) for m in mats)
    return Trajectory(
        times=times, states=states, n_steps=n_steps,
        kernels_used=kernels.ACTIVE_KERNELS,
        max_trace_dev=float(trace_dev.max()),
        max_herm_dev=float(herm_dev.max()),
    )
