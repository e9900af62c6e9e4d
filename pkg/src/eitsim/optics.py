"""Observable optics derived from the probe coherence: susceptibility,
refractive index, absorption, group velocity, transparency window, and
detuning sweeps over the analytic lambda backend or the full six-level
steady-state backend.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Tuple

import numpy as np

from .bloch import FieldDrive, build_hamiltonian, build_liouvillian, steady_state
from .constants import C_LIGHT, TWO_PI
from .errors import (ConfigError, ConventionError, DivergentVelocityError,
                     EitsimError, InvalidArgumentError)
from .lambda_system import Susceptibility, chi_analytic, lambda_from_material
from .materials import MaterialParams
from .states import coherence

BACKEND_ANALYTIC = "analytic"
BACKEND_FULL = "full"
BACKENDS = (BACKEND_ANALYTIC, BACKEND_FULL)

# Fixed drive geometry of the six-level model: probe 5-2, coupling 5-3,
# auxiliary repump 6-1.
PROBE_LEVELS = (5, 2)
COUPLING_LEVELS = (5, 3)
AUX_LEVELS = (6, 1)

# Weak-probe gate for the full backend (the lambda reduction assumes the
# probe does not redistribute population).
WEAK_PROBE_RATIO = 0.05

# chi_im more negative than this violates the absorption sign convention;
# anything between it and zero is rounded up to zero absorption.
CHI_IM_SIGN_TOL = 1e-12

GROUP_INDEX_MIN = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Uniform detuning grid in rad/s."""

    delta_min: float
    delta_max: float
    points: int

    def __post_init__(self):
        if not (np.isfinite(self.delta_min) and np.isfinite(self.delta_max)):
            raise ConfigError("grid bounds must be finite")
        if self.delta_max <= self.delta_min:
            raise ConfigError("grid needs delta_max > delta_min")
        if self.points < 2:
            raise ConfigError("grid needs at least 2 points")

    def values(self) -> np.ndarray:
        return np.linspace(self.delta_min, self.delta_max, self.points)


@dataclass(frozen=True)
class DriveSet:
    """Rabi frequencies and detunings of the three standard fields.

    The probe detuning stored here is the sweep's reference point; sweeps
    override it per grid point.  Zero-magnitude drives are kept in the
    model because they still anchor the rotating frame.
    """

    probe_rabi: complex
    coupling_rabi: complex
    aux_rabi: complex
    probe_detuning: float = 0.0
    coupling_detuning: float = 0.0
    aux_detuning: float = 0.0

    def field_drives(self, probe_detuning: float) -> tuple:
        return (
            FieldDrive(*PROBE_LEVELS, rabi=self.probe_rabi,
                       detuning=float(probe_detuning)),
            FieldDrive(*COUPLING_LEVELS, rabi=self.coupling_rabi,
                       detuning=self.coupling_detuning),
            FieldDrive(*AUX_LEVELS, rabi=self.aux_rabi,
                       detuning=self.aux_detuning),
        )


@dataclass(frozen=True)
class Spectrum:
    """Susceptibility, index and absorption on a detuning grid."""

    backend: str
    deltas: np.ndarray
    chi_re: np.ndarray
    chi_im: np.ndarray
    n_index: np.ndarray
    alpha: np.ndarray
    params_digest: dict = field(default_factory=dict)

    def __post_init__(self):
        arrays = {}
        for name in ("deltas", "chi_re", "chi_im", "n_index", "alpha"):
            arrays[name] = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arrays[name])
        if any(a.shape != arrays["deltas"].shape for a in arrays.values()):
            raise InvalidArgumentError("spectrum columns must share one shape")
        if np.any(np.diff(arrays["deltas"]) <= 0):
            raise InvalidArgumentError("deltas must be strictly increasing")
        if np.any(arrays["alpha"] < 0):
            raise InvalidArgumentError("alpha must be non-negative")
        if not np.array_equal(arrays["n_index"], 1.0 + 0.5 * arrays["chi_re"]):
            raise InvalidArgumentError("n must equal 1 + chi_re/2 on every row")

    def rows(self):
        for i in range(self.deltas.size):
            yield (self.deltas[i], self.chi_re[i], self.chi_im[i],
                   self.n_index[i], self.alpha[i])


@dataclass(frozen=True)
class WindowReport:
    """Half-absorption transparency interval around zero detuning."""

    width: float  # rad/s
    width_hz: float
    threshold_alpha: float
    reference_alpha: float
    edges: Tuple[float, float]
    has_window: bool
    truncated: bool = False


def rho_to_chi(rho52: complex, mat: MaterialParams,
               omega_p: complex) -> Susceptibility:
    """Susceptibility from the 5-2 coherence at probe Rabi frequency omega_p:
    chi = 2 * A * rho52 / omega_p with A = N*mu^2/(eps0*hbar).

    Raises ZeroDivisionError for omega_p = 0.
    """
    chi = 2.0 * mat.coupling_strength * complex(rho52) / complex(omega_p)
    return Susceptibility(chi_re=chi.real, chi_im=chi.imag)


def refractive_index(chi: Susceptibility) -> float:
    return 1.0 + 0.5 * chi.chi_re


def absorption(chi: Susceptibility, wavelength: float) -> float:
    """alpha = 0.5 * (2*pi/wavelength) * chi_im, in 1/m.

    chi_im below -CHI_IM_SIGN_TOL breaks the sign convention; tiny negative
    values inside the tolerance are clamped to zero absorption.
    """
    if not wavelength > 0:
        raise InvalidArgumentError("wavelength must be positive")
    if chi.chi_im < -CHI_IM_SIGN_TOL:
        raise ConventionError(
            f"chi_im = {chi.chi_im!r} is negative beyond tolerance; "
            "absorption must be non-negative"
        )
    return max(0.5 * (TWO_PI / wavelength) * chi.chi_im, 0.0)


def group_velocity(n_of_omega: Callable[[float], float], omega: float,
                   h: float) -> float:
    """v_g = c / (n + omega * dn/domega), dn/domega by central difference.

    The difference is divided by the realized spacing of the two sample
    points rather than the nominal 2h: at optical omega the grid spacing of
    doubles (~0.5 rad/s) would otherwise contaminate small steps.
    """
    if not (np.isfinite(omega) and omega > 0):
        raise InvalidArgumentError("omega must be positive and finite")
    if not (np.isfinite(h) and h > 0):
        raise InvalidArgumentError("finite-difference step must be positive")
    above = omega + h
    below = omega - h
    if not above > below:
        raise InvalidArgumentError(
            f"step {h!r} vanishes at omega = {omega!r}"
        )
    dn_domega = (n_of_omega(above) - n_of_omega(below)) / (above - below)
    group_index = n_of_omega(omega) + omega * dn_domega
    if abs(group_index) < GROUP_INDEX_MIN:
        raise DivergentVelocityError(
            f"group index {group_index!r} is below {GROUP_INDEX_MIN:.0e}"
        )
    return C_LIGHT / group_index


def make_index_sampler(chi_of_delta: Callable[[float], Susceptibility],
                       probe_omega: float,
                       delta_at_probe_omega: float) -> Callable[[float], float]:
    """n(omega) from chi(delta) under delta = omega_atom - omega_field,
    i.e. d delta / d omega = -1 with the atom frequency held fixed."""
    def sampler(omega: float) -> float:
        delta = delta_at_probe_omega + (probe_omega - omega)
        return refractive_index(chi_of_delta(delta))

    return sampler


def probe_angular_frequency(mat: MaterialParams) -> float:
    return TWO_PI * C_LIGHT / mat.probe_wavelength


def window_width_closed_form(gamma52: float, omega_c: float) -> float:
    """Half-absorption window width in the small-gamma32 limit:
    sqrt(gamma52^2 + omega_c^2) - gamma52."""
    return math.hypot(gamma52, omega_c) - gamma52


def transparency_window(spectrum: Spectrum,
                        reference_alpha: float) -> WindowReport:
    """Maximal contiguous interval containing delta = 0 with
    alpha <= reference_alpha / 2; edges by linear interpolation."""
    if not reference_alpha > 0:
        raise InvalidArgumentError("reference absorption must be positive")
    deltas, alpha = spectrum.deltas, spectrum.alpha
    if deltas[0] > 0.0 or deltas[-1] < 0.0:
        raise ConfigError("spectrum grid must cover delta = 0")
    threshold = 0.5 * reference_alpha

    if float(np.interp(0.0, deltas, alpha)) >= threshold:
        return WindowReport(
            width=0.0, width_hz=0.0, threshold_alpha=threshold,
            reference_alpha=reference_alpha, edges=(0.0, 0.0),
            has_window=False,
        )

    center = int(np.searchsorted(deltas, 0.0))
    if center == deltas.size or (center > 0 and alpha[center] > threshold):
        center -= 1

    def crossing(inside: int, outside: int) -> float:
        d_in, a_in = deltas[inside], alpha[inside]
        d_out, a_out = deltas[outside], alpha[outside]
        return d_in + (threshold - a_in) * (d_out - d_in) / (a_out - a_in)

    truncated = False
    lo = center
    while lo > 0 and alpha[lo - 1] <= threshold:
        lo -= 1
    if lo == 0:
        left, truncated = float(deltas[0]), True
    else:
        left = crossing(lo, lo - 1)

    hi = center
    while hi < deltas.size - 1 and alpha[hi + 1] <= threshold:
        hi += 1
    if hi == deltas.size - 1:
        right, truncated = float(deltas[-1]), True
    else:
        right = crossing(hi, hi + 1)

    width = right - left
    return WindowReport(
        width=width, width_hz=width / TWO_PI, threshold_alpha=threshold,
        reference_alpha=reference_alpha, edges=(left, right),
        has_window=True, truncated=truncated,
    )


def _digest(backend: str, mat: MaterialParams, drives: DriveSet,
            grid: GridSpec) -> dict:
    return {
        "backend": backend,
        "material": {
            "number_density_per_m3": mat.number_density,
            "probe_dipole_c_m": mat.probe_dipole,
            "probe_wavelength_m": mat.probe_wavelength,
            "rate_convention": mat.rate_convention,
            "lifetimes_s": mat.levels.lifetimes.tolist(),
            "branching_per_s": mat.levels.branching.tolist(),
            "dephasing_hz": mat.levels.dephasing.tolist(),
        },
        "drives": {
            "probe_rabi_rad_s": _complex_digest(drives.probe_rabi),
            "coupling_rabi_rad_s": _complex_digest(drives.coupling_rabi),
            "aux_rabi_rad_s": _complex_digest(drives.aux_rabi),
            "probe_detuning_rad_s": drives.probe_detuning,
            "coupling_detuning_rad_s": drives.coupling_detuning,
            "aux_detuning_rad_s": drives.aux_detuning,
        },
        "grid": {
            "delta_min_rad_s": grid.delta_min,
            "delta_max_rad_s": grid.delta_max,
            "points_count": grid.points,
        },
    }


def _complex_digest(value: complex):
    value = complex(value)
    return value.real if value.imag == 0.0 else [value.real, value.imag]


def full_model_chi(mat: MaterialParams, drives: DriveSet,
                   probe_detuning: float) -> Susceptibility:
    """Steady-state six-level susceptibility at one probe detuning."""
    field_drives = drives.field_drives(probe_detuning)
    ham = build_hamiltonian(mat.levels.n_levels, field_drives)
    lv = build_liouvillian(ham, mat.levels, mat.gamma)
    rho = steady_state(lv)
    return rho_to_chi(coherence(rho, *PROBE_LEVELS), mat, drives.probe_rabi)


def sweep(backend: str, mat: MaterialParams, drives: DriveSet, grid: GridSpec,
          jobs: int = 1) -> Spectrum:
    """Evaluate chi, n, alpha on the detuning grid.

    Grid points are independent; with jobs > 1 they are fanned out to a
    thread pool.  Row order and values are identical for any job count.
    """
    if backend not in BACKENDS:
        raise ConfigError(f"backend must be one of {BACKENDS}")
    if jobs < 1:
        raise ConfigError("jobs must be >= 1")
    omega_c = abs(drives.coupling_rabi)
    omega_p = abs(drives.probe_rabi)
    if backend == BACKEND_FULL:
        if omega_p == 0.0:
            raise ConfigError("full backend needs a nonzero probe field")
        if omega_c > 0.0 and omega_p > WEAK_PROBE_RATIO * omega_c:
            raise ConfigError(
                f"full backend requires probe rabi <= {WEAK_PROBE_RATIO} * "
                f"coupling rabi (got {omega_p!r} vs {omega_c!r})"
            )
        lam = None
    else:
        lam = lambda_from_material(mat, omega_c)

    def eval_point(delta: float) -> Susceptibility:
        try:
            if lam is not None:
                return chi_analytic(lam, float(delta))
            return full_model_chi(mat, drives, float(delta))
        except EitsimError as exc:
            raise type(exc)(f"at delta = {delta!r} rad/s: {exc}") from exc

    deltas = grid.values()
    if jobs == 1:
        chis = [eval_point(d) for d in deltas]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            chis = list(pool.map(eval_point, deltas))

    chi_re = np.array([c.chi_re for c in chis])
    chi_im = np.array([c.chi_im for c in chis])
    alpha = np.array([absorption(c, mat.probe_wavelength) for c in chis])
    return Spectrum(
        backend=backend, deltas=deltas, chi_re=chi_re, chi_im=chi_im,
        n_index=1.0 + 0.5 * chi_re, alpha=alpha,
        params_digest=_digest(backend, mat, drives, grid),
    )


CSV_HEADER = "delta_rad_s,chi_re,chi_im,n,alpha_per_m"


def spectrum_to_csv(spectrum: Spectrum) -> str:
    """Byte-stable CSV: shortest round-trip decimal per value."""
    lines = [CSV_HEADER]
    for row in spectrum.rows():
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"
