"""Closed-form stiffness and lumped-frequency model of a T-shaped cantilever.

Each of the parallel beams is modeled as a clamped-free stepped beam: a
narrow segment of length ``l1`` and width ``w1`` followed by a wide "extra
mass" segment of length ``l2`` and width ``w2``, all of thickness ``h``.
Everything is in SI units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_finite, check_non_negative, check_positive
from .exceptions import GeometryError

#: Effective-mass coefficient of a bare rectangular beam used by the lumped model.
BEAM_MASS_COEFF = 0.24
#: Coefficient that makes the lumped model reproduce the exact first mode, 3 / 1.875104**4.
CLASSICAL_BEAM_MASS_COEFF = 0.2427

#: Single-crystal silicon defaults (<110> in-plane).
SILICON_YOUNGS_MODULUS = 169e9
SILICON_DENSITY = 2330.0


@dataclass(frozen=True)
class MaterialSpec:
    """Isotropic elastic material.

    Attributes:
        youngs_modulus: Young's modulus (Pa).
        density: Mass density (kg/m^3).
    """

    youngs_modulus: float = SILICON_YOUNGS_MODULUS
    density: float = SILICON_DENSITY

    def __post_init__(self):
        object.__setattr__(self, "youngs_modulus", check_positive("youngs_modulus", self.youngs_modulus))
        object.__setattr__(self, "density", check_positive("density", self.density))


@dataclass(frozen=True)
class TGeometry:
    """Dimensions of one beam of a T-shaped cantilever (meters).

    ``l2 == 0`` is the plain rectangular cantilever; ``w2`` is then ignored.
    ``n_beams`` only scales the reported totals (stiffness, mass), never the
    frequency.
    """

    l1: float
    l2: float
    w1: float
    w2: float
    h: float
    n_beams: int = 3

    def __post_init__(self):
        for name in ("l1", "w1", "h"):
            object.__setattr__(self, name, check_positive(name, getattr(self, name), GeometryError))
        for name in ("l2", "w2"):
            object.__setattr__(self, name, check_non_negative(name, getattr(self, name), GeometryError))
        if int(self.n_beams) != self.n_beams or self.n_beams < 1:
            raise GeometryError(f"n_beams must be a positive integer, got {self.n_beams!r}")
        object.__setattr__(self, "n_beams", int(self.n_beams))

    @property
    def length(self) -> float:
        """Total length ``l1 + l2``."""
        return self.l1 + self.l2

    @property
    def is_rectangular(self) -> bool:
        return self.l2 == 0.0

    @classmethod
    def from_total_length(cls, length, l2, w1, w2, h, n_beams=3):
        """Build from total length ``l`` and extra-mass length ``l2`` (catalog-style rows)."""
        return cls(l1=length - l2, l2=l2, w1=w1, w2=w2, h=h, n_beams=n_beams)

    def scaled_lateral(self, factor: float) -> "TGeometry":
        """Scale lengths and widths by ``factor`` at fixed thickness."""
        return TGeometry(
            self.l1 * factor, self.l2 * factor, self.w1 * factor, self.w2 * factor, self.h, self.n_beams
        )

    def with_l2(self, l2: float) -> "TGeometry":
        """Same total length and widths, with the split moved to ``l1 = l - l2``."""
        return TGeometry(self.length - l2, l2, self.w1, self.w2, self.h, self.n_beams)


@dataclass(frozen=True)
class SectionInertia:
    """Area moments of the narrow (``i1``) and wide (``i2``) regions, m^4."""

    i1: float
    i2: float


@dataclass(frozen=True)
class LumpedPrediction:
    """Per-beam lumped-model result.

    ``frequency`` is computed once from ``spring_constant`` and
    ``effective_mass``; totals over all beams are exposed as properties.
    """

    spring_constant: float
    beam_mass: float
    extra_mass: float
    effective_mass: float
    frequency: float
    n_beams: int = 1

    @property
    def total_spring_constant(self) -> float:
        return self.n_beams * self.spring_constant

    @property
    def total_mass(self) -> float:
        return self.n_beams * (self.beam_mass + self.extra_mass)


def _require_stepped(g: TGeometry):
    if g.l2 == 0.0 or g.w2 == 0.0:
        raise GeometryError(
            "stepped deflection needs l2 > 0 and w2 > 0; use spring_constant_rect for a plain beam"
        )


def _require_supported(g: TGeometry):
    if g.l2 > 0.0 and g.w2 == 0.0:
        raise GeometryError("extra-mass segment with l2 > 0 must have w2 > 0")


def section_inertias(g: TGeometry) -> SectionInertia:
    """Rectangular-section area moments ``w h^3 / 12`` of both regions."""
    h3 = g.h**3
    return SectionInertia(i1=g.w1 * h3 / 12.0, i2=g.w2 * h3 / 12.0)


def segment_masses(g: TGeometry, m: MaterialSpec) -> tuple[float, float]:
    """Masses of the narrow beam segment and of the extra-mass segment (kg)."""
    m1 = m.density * g.l1 * g.w1 * g.h
    m2 = m.density * g.l2 * g.w2 * g.h
    return m1, m2


def resonance_frequency(spring_constant: float, effective_mass: float) -> float:
    """``f = sqrt(k / m_eff) / 2 pi``."""
    return math.sqrt(spring_constant / effective_mass) / (2.0 * math.pi)


@dataclass(frozen=True)
class DeflectionCurve:
    """Static elastic curve of the stepped beam under a tip load.

    Each region follows ``y = -F/(E I) * (x^3/6 - L x^2/2 + p x + q)`` with
    ``(p, q) = (a, b)`` on ``[0, l1]`` and ``(c, d)`` on ``[l1, L]``.
    ``coeffs1``/``coeffs2`` hold the expanded cubic, highest power first.
    """

    geometry: TGeometry
    material: MaterialSpec
    force: float
    a: float
    b: float
    c: float
    d: float
    coeffs1: np.ndarray = field(repr=False)
    coeffs2: np.ndarray = field(repr=False)

    @property
    def length(self) -> float:
        return self.geometry.length

    def _branch(self, x):
        return np.where(np.asarray(x) <= self.geometry.l1, 0, 1)

    def _eval(self, x, deriv):
        x = np.asarray(x, dtype=float)
        if np.any(x < 0) or np.any(x > self.length * (1 + 1e-12)):
            raise ValueError("x outside [0, l1 + l2]")
        p1 = np.polyder(self.coeffs1, deriv) if deriv else self.coeffs1
        p2 = np.polyder(self.coeffs2, deriv) if deriv else self.coeffs2
        y = np.where(x <= self.geometry.l1, np.polyval(p1, x), np.polyval(p2, x))
        return y if y.ndim else float(y)

    def __call__(self, x):
        """Deflection at ``x`` (scalar or array)."""
        return self._eval(x, 0)

    def slope(self, x):
        return self._eval(x, 1)

    def curvature(self, x):
        return self._eval(x, 2)

    def region_value(self, region: int, x, deriv: int = 0):
        """Evaluate one branch (1 or 2) without the region switch, for matching checks."""
        coeffs = self.coeffs1 if region == 1 else self.coeffs2
        return np.polyval(np.polyder(coeffs, deriv) if deriv else coeffs, x)

    def tip_deflection(self) -> float:
        return float(np.polyval(self.coeffs2, self.length))

    def condition_residuals(self) -> dict[str, float]:
        """Relative violations of the clamped-free and matching conditions.

        Keys: ``root_deflection``, ``root_slope``, ``tip_moment``,
        ``continuity_deflection``, ``continuity_slope``. Each is normalized by
        the natural scale of its quantity; all zero for ``force == 0``.
        """
        g = self.geometry
        L, l1 = self.length, g.l1
        y_scale = abs(self.tip_deflection())
        if y_scale == 0.0:
            return dict.fromkeys(
                ("root_deflection", "root_slope", "tip_moment", "continuity_deflection", "continuity_slope"),
                0.0,
            )
        slope_scale = max(abs(self.region_value(2, L, 1)), y_scale / L)
        curv_scale = abs(self.region_value(1, 0.0, 2))
        y1, y2 = self.region_value(1, l1), self.region_value(2, l1)
        s1, s2 = self.region_value(1, l1, 1), self.region_value(2, l1, 1)
        return {
            "root_deflection": abs(self.region_value(1, 0.0)) / y_scale,
            "root_slope": abs(self.region_value(1, 0.0, 1)) / slope_scale,
            "tip_moment": abs(self.region_value(2, L, 2)) / curv_scale,
            "continuity_deflection": abs(y1 - y2) / max(abs(y1), abs(y2)),
            "continuity_slope": abs(s1 - s2) / max(abs(s1), abs(s2)),
        }

    def ode_residuals(self, n_points: int = 10) -> np.ndarray:
        """Relative mismatch of ``y''`` against ``-F (x - L) / (E I)`` on each branch.

        Samples ``n_points`` interior points per region; returns both regions
        concatenated.
        """
        g = self.geometry
        inertia = section_inertias(g)
        E, F, L = self.material.youngs_modulus, self.force, self.length
        out = []
        for region, lo, hi, i_reg in ((1, 0.0, g.l1, inertia.i1), (2, g.l1, L, inertia.i2)):
            # open interval: the exact curvature vanishes at x = L
            x = lo + (hi - lo) * (np.arange(n_points) + 0.5) / n_points
            expected = -F * (x - L) / (E * i_reg)
            got = self.region_value(region, x, 2)
            scale = np.maximum(np.abs(expected), 1e-300)
            out.append(np.abs(got - expected) / scale if F != 0 else np.abs(got))
        return np.concatenate(out)


def integration_constants(g: TGeometry) -> tuple[float, float, float, float]:
    """Solve the clamped-root and matching conditions for ``a, b, c, d``.

    The force cancels, so the constants depend on geometry only. Rows are
    ``y1(0) = 0``, ``y1'(0) = 0``, ``y1(l1) = y2(l1)``, ``y1'(l1) = y2'(l1)``
    written with the common factor ``-F/E`` removed.
    """
    _require_stepped(g)
    L, l1 = g.length, g.l1
    inertia = section_inertias(g)
    r1, r2 = 1.0 / inertia.i1, 1.0 / inertia.i2
    base_val = l1**3 / 6.0 - L * l1**2 / 2.0
    base_slope = l1**2 / 2.0 - L * l1
    A = np.array(
        [
            [0.0, r1, 0.0, 0.0],
            [r1, 0.0, 0.0, 0.0],
            [r1 * l1, r1, -r2 * l1, -r2],
            [r1, 0.0, -r2, 0.0],
        ]
    )
    rhs = np.array([0.0, 0.0, (r2 - r1) * base_val, (r2 - r1) * base_slope])
    # column scaling keeps the solve well conditioned for micrometre lengths
    col = np.array([L**2, L**3, L**2, L**3])
    sol = np.linalg.solve(A * col, rhs) * col
    return tuple(float(v) for v in sol)


def printed_integration_constants(g: TGeometry) -> tuple[float, float, float, float]:
    """The published closed forms of ``a, b, c, d``, kept as a cross-check."""
    l1, l2, w1, w2 = g.l1, g.l2, g.w1, g.w2
    c = -(-(l1**2) * w1 - 2 * l1 * l2 * w1 + l1**2 * w2 + 2 * l1 * l2 * w2) / (2 * w1)
    d = -(l1**3 * w1 + 3 * l1**2 * l2 * w1 - l1**3 * w2 - 3 * l1**2 * l2 * w2) / (6 * w1)
    return 0.0, 0.0, c, d


def deflection_curve(g: TGeometry, m: MaterialSpec, force: float) -> DeflectionCurve:
    """Piecewise-cubic static deflection under a tip force ``force`` (N).

    Raises:
        GeometryError: if ``l2 == 0`` or ``w2 == 0``.
        ValueError: if ``force`` is not finite.
    """
    _require_stepped(g)
    force = check_finite("force", force)
    a, b, c, d = integration_constants(g)
    inertia = section_inertias(g)
    L = g.length
    E = m.youngs_modulus

    def expand(i_reg, p, q):
        s = -force / (E * i_reg)
        return np.array([s / 6.0, -s * L / 2.0, s * p, s * q])

    return DeflectionCurve(
        geometry=g,
        material=m,
        force=force,
        a=a,
        b=b,
        c=c,
        d=d,
        coeffs1=expand(inertia.i1, a, b),
        coeffs2=expand(inertia.i2, c, d),
    )


def tip_deflection(g: TGeometry, m: MaterialSpec, force: float) -> float:
    """Closed-form tip deflection ``y_max`` of the stepped beam (m)."""
    _require_stepped(g)
    force = check_finite("force", force)
    l1, l2, w1, w2 = g.l1, g.l2, g.w1, g.w2
    compliance_sum = l2**3 / w2 + l1**3 / w1 + 3 * l1**2 * l2 / w1 + 3 * l1 * l2**2 / w1
    return 4.0 * force / (m.youngs_modulus * g.h**3) * compliance_sum


def spring_constant_rect(l1: float, w1: float, h: float, youngs_modulus: float) -> float:
    """Tip stiffness ``E h^3 w / (4 l^3)`` of a plain rectangular cantilever."""
    return youngs_modulus * h**3 * w1 / (4.0 * l1**3)


def spring_constant_t(g: TGeometry, m: MaterialSpec) -> float:
    """Tip stiffness of one stepped beam (N/m).

    Falls back to the rectangular formula when ``l2 == 0``.

    Raises:
        GeometryError: if ``l2 > 0`` and ``w2 == 0``.
    """
    _require_supported(g)
    E, h = m.youngs_modulus, g.h
    if g.is_rectangular:
        return spring_constant_rect(g.l1, g.w1, h, E)
    l1, l2, w1, w2 = g.l1, g.l2, g.w1, g.w2
    denom = l2**3 * w1 + l1**3 * w2 + 3 * l1**2 * l2 * w2 + 3 * l1 * l2**2 * w2
    return E * h**3 / 4.0 * (w1 * w2 / denom)


def lumped_prediction(
    g: TGeometry,
    m: MaterialSpec,
    beam_mass_coeff: float = BEAM_MASS_COEFF,
    added_mass: float = 0.0,
) -> LumpedPrediction:
    """Lumped resonance frequency of one beam with its extra mass.

    The effective mass is ``beam_mass_coeff * m1 + m2 + added_mass``; the
    optional ``added_mass`` is a point load at the tip (e.g. an adsorbed
    analyte).
    """
    k = spring_constant_t(g, m)
    m1, m2 = segment_masses(g, m)
    m_eff = beam_mass_coeff * m1 + m2 + added_mass
    if not m_eff > 0.0:
        raise GeometryError(f"effective mass must be positive, got {m_eff!r}")
    return LumpedPrediction(
        spring_constant=k,
        beam_mass=m1,
        extra_mass=m2,
        effective_mass=m_eff,
        frequency=resonance_frequency(k, m_eff),
        n_beams=g.n_beams,
    )


def mass_sensitivity(p: LumpedPrediction) -> float:
    """Frequency change per kg of tip mass, ``-f / (2 m_eff)`` (Hz/kg)."""
    return -p.frequency / (2.0 * p.effective_mass)
