"""Frequency versus extra-mass length at fixed total length.

Moving the width step along a beam of fixed total length trades stiffness
against mass: a short extra mass lowers the frequency as it grows
(mass-dominated), while a very long one shortens the compliant narrow
segment and raises it again (stiffness-dominated). The boundary is the
minimum of ``f(l2)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import BEAM_MASS_COEFF, MaterialSpec, TGeometry, lumped_prediction
from .exceptions import NoTransitionError
from .modal import DEFAULT_ELEMENTS, modal_analysis

MODELS = ("lumped", "fem")
DEFAULT_FRACTIONS = (0.01, 0.95)
DEFAULT_POINTS = 64
MIN_POINTS = 9
MAX_FRACTION = 0.99

INV_PHI = (math.sqrt(5) - 1) / 2


class Regime(str, Enum):
    MASS_DOMINATED = "mass-dominated"
    STIFFNESS_DOMINATED = "stiffness-dominated"


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep.

    ``base`` fixes the total length and the widths; its own ``l1/l2`` split
    is ignored. ``fractions`` are ``l2 / l`` values; when omitted, a uniform
    grid of ``n_points`` over ``fraction_range`` is used.
    """

    base: TGeometry
    model: str = "lumped"
    material: MaterialSpec = field(default_factory=MaterialSpec)
    fraction_range: tuple[float, float] = DEFAULT_FRACTIONS
    n_points: int = DEFAULT_POINTS
    n_elements: int = DEFAULT_ELEMENTS
    beam_mass_coeff: float = BEAM_MASS_COEFF
    fractions: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        grid = self.grid_fractions()
        if len(grid) < MIN_POINTS:
            raise ValueError(f"sweep needs at least {MIN_POINTS} points, got {len(grid)}")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("sweep fractions must be strictly increasing")
        if grid[0] < 0.0 or grid[-1] > MAX_FRACTION:
            raise ValueError(f"sweep fractions must lie in [0, {MAX_FRACTION}]")
        if self.base.w2 <= 0.0:
            raise ValueError("sweep base geometry needs w2 > 0")

    def grid_fractions(self) -> np.ndarray:
        if self.fractions is not None:
            return np.asarray(self.fractions, dtype=float)
        lo, hi = self.fraction_range
        return np.linspace(lo, hi, self.n_points)

    @property
    def total_length(self) -> float:
        return self.base.length

    def evaluate(self, l2: float) -> float:
        """Frequency (Hz) of the selected model with the step at ``l2``."""
        g = self.base.with_l2(l2)
        if self.model == "lumped":
            return lumped_prediction(g, self.material, self.beam_mass_coeff).frequency
        return modal_analysis(g, self.material, self.n_elements).f1


@dataclass(frozen=True)
class Transition:
    l2: float
    fraction: float


@dataclass(frozen=True)
class SweepResult:
    """Sampled ``(l2, f)`` curve with its refined minimum.

    ``transition`` is ``None`` when the sampled range has no interior
    minimum; ``labels`` is then ``None`` as well.
    """

    spec: SweepSpec
    l2: np.ndarray
    frequencies: np.ndarray
    transition: Transition | None
    labels: tuple[Regime, ...] | None

    @property
    def fractions(self) -> np.ndarray:
        return self.l2 / self.spec.total_length

    @property
    def l2_star(self) -> float | None:
        return None if self.transition is None else self.transition.l2


class SweepPointError(RuntimeError):
    def __init__(self, index, l2, cause):
        super().__init__(f"sweep point {index} (l2 = {l2:.6g} m) failed: {cause}")
        self.index = index
        self.l2 = l2


def golden_section(func, a: float, b: float, tol: float) -> float:
    """Minimize a unimodal ``func`` on ``[a, b]`` down to an interval below ``tol``.

    Returns the midpoint of the final bracket.
    """
    a, b = min(a, b), max(a, b)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = func(c), func(d)
    while b - a >= tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = func(d)
    return 0.5 * (a + b)


def _parabola_through(x, y):
    coeffs = np.polyfit(np.asarray(x, dtype=float), np.asarray(y, dtype=float), 2)
    return lambda t: float(np.polyval(coeffs, t))


def find_transition(l2, frequencies, total_length: float, objective=None, rtol: float = 1e-3) -> Transition:
    """Refine the grid minimum of ``frequencies(l2)``.

    The smallest sample and its two neighbours bracket the minimum; a
    golden-section search then shrinks the bracket below ``rtol * total_length``.
    ``objective(l2)`` re-evaluates the model inside the bracket; without it
    the parabola through the bracketing triple is searched instead.

    Raises:
        NoTransitionError: if the smallest sample is at either end of the grid.
    """
    l2 = np.asarray(l2, dtype=float)
    f = np.asarray(frequencies, dtype=float)
    if l2.shape != f.shape or l2.ndim != 1 or len(l2) < 3:
        raise ValueError("need matching 1-D grids with at least 3 samples")
    i = int(np.argmin(f))
    if i == 0 or i == len(f) - 1:
        raise NoTransitionError(
            f"no transition in range: minimum at grid end l2/l = {l2[i] / total_length:.4g}"
        )
    lo, hi = l2[i - 1], l2[i + 1]
    func = objective if objective is not None else _parabola_through(l2[i - 1 : i + 2], f[i - 1 : i + 2])
    x = golden_section(func, lo, hi, rtol * total_length)
    return Transition(l2=float(x), fraction=float(x / total_length))


def classify_regime(result, l2_query: float) -> Regime:
    """Label ``l2_query`` relative to the transition of ``result``.

    ``result`` is a ``SweepResult`` or a ``Transition``; the boundary itself
    counts as stiffness-dominated.
    """
    transition = result.transition if isinstance(result, SweepResult) else result
    if transition is None:
        raise NoTransitionError("sweep has no transition; regimes are undefined")
    return Regime.MASS_DOMINATED if l2_query < transition.l2 else Regime.STIFFNESS_DOMINATED


def sweep(spec: SweepSpec, n_jobs: int | None = None) -> SweepResult:
    """Evaluate the model over the grid and locate the regime boundary.

    ``n_jobs > 1`` evaluates grid points on a thread pool; results keep grid
    order either way.
    """
    l2 = spec.grid_fractions() * spec.total_length

    def point(item):
        idx, x = item
        try:
            return spec.evaluate(x)
        except Exception as exc:
            raise SweepPointError(idx, x, exc) from exc

    if n_jobs is not None and n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            freqs = np.array(list(pool.map(point, enumerate(l2))))
    else:
        freqs = np.array([point(item) for item in enumerate(l2)])

    try:
        transition = find_transition(l2, freqs, spec.total_length, objective=spec.evaluate)
    except NoTransitionError:
        return SweepResult(spec=spec, l2=l2, frequencies=freqs, transition=None, labels=None)
    labels = tuple(classify_regime(transition, x) for x in l2)
    return SweepResult(spec=spec, l2=l2, frequencies=freqs, transition=transition, labels=labels)
