"""Physical parameters and analytic fixed-point machinery.

All rates are expressed in units of the single-qubit dissipation rate
kappa (default 1), which fixes the time unit to 1/kappa.  The steady
states of the driven network satisfy a cubic in the mean excited-state
population nbar; this module evaluates its coefficients, classifies the
mono-/bistable regime through the depressed-cubic discriminant, and
returns the real roots in closed form together with the matching
steady coherence.
"""

from __future__ import annotations

import cmath
import enum
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Optional

from .errors import DegenerateDenominator, NoFixedPoint

if TYPE_CHECKING:  # pragma: no cover - typing only
    from .collective import StabilityReport

# A Cardano root counts as real when its imaginary part is below this.
REAL_ROOT_TOL = 1e-9
# Numerically coincident real roots are merged below this separation.
ROOT_MERGE_TOL = 1e-9

_OMEGA_CUBE = (-1.0 + 1j * 3.0 ** 0.5) / 2.0  # primitive cube root of unity


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the driven qubit network.

    n_qubits: N, network size.
    detuning: qubit-laser detuning Delta (units of kappa).
    drive: laser drive strength Omega >= 0 (units of kappa).
    coherent_coupling: sigma_z sigma_z coupling g (units of kappa).
    dissipative_coupling: environment-mediated coupling V >= 0.
    kappa: local pump/decay rate, the rate unit (> 0).
    inactive_ratio: p = N_i / N, fraction of decaying qubits.
    """

    n_qubits: int
    detuning: float
    drive: float
    coherent_coupling: float
    dissipative_coupling: float
    kappa: float = 1.0
    inactive_ratio: float = 0.0

    def __post_init__(self):
        if int(self.n_qubits) != self.n_qubits or self.n_qubits < 1:
            raise ValueError(f"n_qubits must be a positive integer, got {self.n_qubits}")
        if self.kappa <= 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.drive < 0:
            raise ValueError(f"drive must be >= 0, got {self.drive}")
        if self.dissipative_coupling < 0:
            raise ValueError(
                f"dissipative_coupling must be >= 0, got {self.dissipative_coupling}"
            )
        if not 0.0 <= self.inactive_ratio <= 1.0:
            raise ValueError(
                f"inactive_ratio must lie in [0, 1], got {self.inactive_ratio}"
            )

    # -- derived rates used throughout the equations of motion --

    def loss_rate(self) -> float:
        """Total population loss rate 2*kappa + 4V(N-1)/N."""
        n = self.n_qubits
        return 2.0 * self.kappa + 4.0 * self.dissipative_coupling * (n - 1) / n

    def shifted_detuning(self) -> float:
        """Coupling-shifted detuning Delta - 4g(N-1)."""
        return self.detuning - 4.0 * self.coherent_coupling * (self.n_qubits - 1)

    def split_counts(self, p: Optional[float] = None) -> tuple[int, int, float]:
        """Active/inactive counts (N_a, N_i) for the discrete solvers.

        Returns (n_active, n_inactive, drift) where drift = |N*p - N_i|
        measures how far N*p is from the integer it was rounded to.
        """
        if p is None:
            p = self.inactive_ratio
        target = self.n_qubits * p
        n_i = int(round(target))
        n_i = min(max(n_i, 0), self.n_qubits)
        return self.n_qubits - n_i, n_i, abs(target - n_i)

    def with_inactive_ratio(self, p: float) -> "ModelParams":
        return replace(self, inactive_ratio=p)


class Region(enum.Enum):
    """Position of a parameter point relative to the bistable window."""

    I = "I"      # below the window: single fixed point, upper branch
    II = "II"    # inside: three real fixed points
    III = "III"  # above: single fixed point, lower branch


@dataclass(frozen=True)
class CubicCoeffs:
    """Coefficients a x^3 + b x^2 + c x + d of the steady-state cubic.

    m and n are the depressed-cubic parameters (t^3 + n t + m = 0 after
    x = t - b/3a) and discriminant = (m/2)^2 + (n/3)^3.  All three are
    None when a = 0 (degenerate: the equation is at most quadratic).
    """

    a: float
    b: float
    c: float
    d: float
    m: Optional[float] = None
    n: Optional[float] = None
    discriminant: Optional[float] = None
    degenerate: bool = False

    def evaluate(self, x: float) -> float:
        return ((self.a * x + self.b) * x + self.c) * x + self.d


@dataclass(frozen=True)
class FixedPoint:
    """A real root of the steady-state cubic with its coherence."""

    nbar: float
    coherence: complex
    stability: Optional["StabilityReport"] = None
    unphysical: bool = False      # nbar outside [0, 1]; kept, not discarded
    multiplicity: int = 1         # > 1 when coincident roots were merged

    def with_stability(self, report: "StabilityReport") -> "FixedPoint":
        return replace(self, stability=report)


@dataclass(frozen=True)
class FixedPointSet:
    region: Region
    points: list[FixedPoint] = field(default_factory=list)

    @property
    def upper(self) -> FixedPoint:
        """Largest-nbar fixed point (the branch stable for all p)."""
        return self.points[0]

    @property
    def lower(self) -> FixedPoint:
        """Smallest-nbar fixed point; the low stable branch in region II."""
        return self.points[-1]

    @property
    def middle(self) -> Optional[FixedPoint]:
        """The intermediate (unstable) fixed point, present in region II."""
        return self.points[1] if len(self.points) == 3 else None


def cubic_coefficients(params: ModelParams, p: float) -> CubicCoeffs:
    """Steady-state cubic coefficients at inactive ratio p.

    Total function of valid parameters: when the cubic degenerates
    (g = V = 0 forces a = 0) the depressed parameters are left unset and
    the degenerate flag is raised.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    n = params.n_qubits
    kappa = params.kappa
    omega = params.drive
    g = params.coherent_coupling
    v = params.dissipative_coupling
    gamma = params.loss_rate()
    dshift = params.shifted_detuning()

    quad = 64.0 * g * g * n * n + 16.0 * v * v
    lin = 16.0 * g * n * dshift + 8.0 * kappa * v
    const = dshift * dshift + kappa * kappa
    pump = 2.0 * kappa * (1.0 - p)

    a = gamma * quad
    b = gamma * lin - pump * quad
    c = gamma * const - pump * lin + omega * omega * (kappa + 2.0 * v)
    d = -0.5 * omega * omega * (kappa + 2.0 * v) - pump * const

    if a == 0.0:
        return CubicCoeffs(a=a, b=b, c=c, d=d, degenerate=True)

    bn = b / a
    m = d / a - bn * c / (3.0 * a) + (2.0 / 27.0) * bn ** 3
    nn = c / a - bn * bn / 3.0
    disc = (m / 2.0) ** 2 + (nn / 3.0) ** 3
    return CubicCoeffs(a=a, b=b, c=c, d=d, m=m, n=nn, discriminant=disc)


def steady_coherence(params: ModelParams, p: float, nbar: float) -> complex:
    """Steady coherence matching a given steady population nbar.

    Raises DegenerateDenominator when the closed-form denominator is
    numerically singular (|den| <= 1e-12), which flags a parameter set
    where the steady relation itself breaks down.
    """
    n = params.n_qubits
    den = (
        2j * params.detuning
        - 8j * params.coherent_coupling * (n - 1)
        - 2.0 * params.kappa
        + (16j * params.coherent_coupling * n - 8.0 * params.dissipative_coupling) * nbar
    )
    if abs(den) <= 1e-12:
        raise DegenerateDenominator(
            f"steady-coherence denominator magnitude {abs(den):.3e} at nbar={nbar}"
        )
    return 1j * params.drive * (2.0 * nbar - 1.0) / den


def _cardano_real_roots(coeffs: CubicCoeffs) -> list[float]:
    """Real roots of the cubic via the closed-form resolvent.

    Works in complex arithmetic throughout and keeps roots whose
    imaginary part is below REAL_ROOT_TOL.
    """
    a, b = coeffs.a, coeffs.b
    m, n = coeffs.m, coeffs.n
    shift = -b / (3.0 * a)
    sqrt_disc = cmath.sqrt(coeffs.discriminant)
    alpha = (-m / 2.0 + sqrt_disc) ** (1.0 / 3.0)
    if abs(alpha) < 1e-30:
        # Happens only when n == 0 as well: t^3 = -m.
        t1 = -(complex(m) ** (1.0 / 3.0))
        candidates = [t1, t1 * _OMEGA_CUBE, t1 * _OMEGA_CUBE ** 2]
    else:
        # Pair the cube roots so that alpha * beta = -n/3 exactly.
        beta = -n / (3.0 * alpha)
        candidates = [
            alpha + beta,
            _OMEGA_CUBE * alpha + _OMEGA_CUBE ** 2 * beta,
            _OMEGA_CUBE ** 2 * alpha + _OMEGA_CUBE * beta,
        ]
    return [t.real + shift for t in candidates if abs(t.imag) <= REAL_ROOT_TOL]


def _reduced_real_roots(coeffs: CubicCoeffs) -> list[float]:
    """Roots when a = 0: quadratic, linear, or no equation at all."""
    b, c, d = coeffs.b, coeffs.c, coeffs.d
    if b != 0.0:
        disc = c * c - 4.0 * b * d
        if disc < 0.0:
            return []
        s = disc ** 0.5
        return [(-c + s) / (2.0 * b), (-c - s) / (2.0 * b)]
    if c != 0.0:
        return [-d / c]
    if d != 0.0:
        return []
    raise NoFixedPoint("steady-state equation degenerated to 0 = 0")


def _merge_close(roots: list[float]) -> list[tuple[float, int]]:
    """Collapse numerically coincident roots, tracking multiplicity."""
    merged: list[tuple[float, int]] = []
    for r in sorted(roots, reverse=True):
        if merged and abs(merged[-1][0] - r) < ROOT_MERGE_TOL:
            value, count = merged[-1]
            merged[-1] = (value, count + 1)
        else:
            merged.append((r, 1))
    return merged


def solve_fixed_points(params: ModelParams, p: float) -> FixedPointSet:
    """All real steady states at inactive ratio p, sorted descending.

    points[0] is the upper branch; in the bistable regime points[2] is
    the low stable branch and points[1] the unstable intermediate one.
    Roots outside [0, 1] are flagged unphysical but retained.
    """
    coeffs = cubic_coefficients(params, p)
    if coeffs.degenerate:
        roots = _reduced_real_roots(coeffs)
        region = Region.I
        if not roots:
            raise NoFixedPoint(
                "degenerate steady-state equation has no real solution"
            )
    else:
        roots = _cardano_real_roots(coeffs)
        if coeffs.discriminant < 0.0:
            region = Region.II
        else:
            # One real root.  It sits above the cubic's inflection point
            # when the lower fold has not yet been crossed (region I)
            # and below it once only the low branch survives (region III).
            inflection = -coeffs.b / (3.0 * coeffs.a)
            region = Region.I if max(roots) >= inflection else Region.III

    points = []
    for r, mult in _merge_close(roots):
        try:
            coherence = steady_coherence(params, p, r)
        except DegenerateDenominator:
            # Spurious root of the cleared-denominator cubic (reachable
            # only through unphysical branches); keep it, flagged, with
            # no defined coherence.
            coherence = complex(float("nan"), float("nan"))
        points.append(
            FixedPoint(
                nbar=r,
                coherence=coherence,
                unphysical=not 0.0 <= r <= 1.0,
                multiplicity=mult,
            )
        )
    return FixedPointSet(region=region, points=points)
