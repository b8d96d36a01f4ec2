"""scikit-learn compatible wrappers.

Geometry enters as an ``(n_samples, 5)`` array of ``l1, l2, w1, w2, h`` in
meters, one row per beam, so the models drop into pipelines, grid searches
and cross-validation like any other regressor.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import check_geometry_array
from .core import (
    BEAM_MASS_COEFF,
    SILICON_DENSITY,
    SILICON_YOUNGS_MODULUS,
    MaterialSpec,
    TGeometry,
    lumped_prediction,
    segment_masses,
    spring_constant_t,
)
from .devices import gauss_newton_effective_mass
from .modal import DEFAULT_ELEMENTS, effective_mass_from_modal, modal_analysis

GEOMETRY_COLUMNS = ("l1", "l2", "w1", "w2", "h")
FEATURE_COLUMNS = ("spring_constant", "beam_mass", "extra_mass", "effective_mass", "frequency")


def _rows(X):
    X = check_array(X, dtype=np.float64, ensure_2d=False)
    return check_geometry_array(X)


def _geometries(X):
    return [TGeometry(*row) for row in X]


class ResonatorFrequencyModel(TransformerMixin, RegressorMixin, BaseEstimator):
    """First flexural resonance frequency of T-shaped beams.

    Parameters
    ----------
    model : {"lumped", "fem"}
        Closed-form lumped model or the stepped-beam finite-element solver.
    youngs_modulus, density : float
        Material constants in Pa and kg/m^3.
    beam_mass_coeff : float
        Effective-mass coefficient of the narrow segment (lumped model only).
    n_elements : int
        Element count for the finite-element model.

    ``fit`` learns nothing beyond input checks; ``transform`` returns the
    columns of ``FEATURE_COLUMNS``.
    """

    def __init__(
        self,
        model="lumped",
        youngs_modulus=SILICON_YOUNGS_MODULUS,
        density=SILICON_DENSITY,
        beam_mass_coeff=BEAM_MASS_COEFF,
        n_elements=DEFAULT_ELEMENTS,
    ):
        self.model = model
        self.youngs_modulus = youngs_modulus
        self.density = density
        self.beam_mass_coeff = beam_mass_coeff
        self.n_elements = n_elements

    def fit(self, X, y=None):
        if self.model not in ("lumped", "fem"):
            raise ValueError(f"model must be 'lumped' or 'fem', got {self.model!r}")
        _rows(X)
        self.material_ = MaterialSpec(self.youngs_modulus, self.density)
        self.n_features_in_ = len(GEOMETRY_COLUMNS)
        return self

    def _features(self, g):
        if self.model == "lumped":
            p = lumped_prediction(g, self.material_, self.beam_mass_coeff)
            return p.spring_constant, p.beam_mass, p.extra_mass, p.effective_mass, p.frequency
        k = spring_constant_t(g, self.material_)
        m1, m2 = segment_masses(g, self.material_)
        result = modal_analysis(g, self.material_, self.n_elements)
        return k, m1, m2, effective_mass_from_modal(k, result.omega1), result.f1

    def transform(self, X):
        check_is_fitted(self, "material_")
        return np.array([self._features(g) for g in _geometries(_rows(X))]).reshape(-1, len(FEATURE_COLUMNS))

    def predict(self, X):
        return self.transform(X)[:, -1]


class EffectiveMassCalibrator(RegressorMixin, BaseEstimator):
    """Fit ``m_eff = alpha m1 + beta m2`` to measured frequencies.

    ``y`` holds measured frequencies in Hz. After ``fit``: ``alpha_``,
    ``beta_``, ``residual_`` (sum of squared relative errors), ``n_iter_``,
    ``trajectory_`` and ``physical_`` (False for negative coefficients).
    """

    def __init__(
        self,
        youngs_modulus=SILICON_YOUNGS_MODULUS,
        density=SILICON_DENSITY,
        alpha0=BEAM_MASS_COEFF,
        beta0=1.0,
        max_iter=100,
    ):
        self.youngs_modulus = youngs_modulus
        self.density = density
        self.alpha0 = alpha0
        self.beta0 = beta0
        self.max_iter = max_iter

    def _design(self, X):
        geoms = _geometries(_rows(X))
        k = np.array([spring_constant_t(g, self.material_) for g in geoms])
        masses = np.array([segment_masses(g, self.material_) for g in geoms]).reshape(-1, 2)
        return k, masses

    def fit(self, X, y):
        y = check_array(y, ensure_2d=False, dtype=np.float64).ravel()
        self.material_ = MaterialSpec(self.youngs_modulus, self.density)
        k, masses = self._design(X)
        if len(y) != len(k):
            raise ValueError(f"X has {len(k)} rows but y has {len(y)} values")
        if np.any(y <= 0):
            raise ValueError("measured frequencies must be positive")
        result = gauss_newton_effective_mass(k, masses, y, start=(self.alpha0, self.beta0), max_iter=self.max_iter)
        self.alpha_ = result.alpha
        self.beta_ = result.beta
        self.residual_ = result.residual
        self.n_iter_ = result.iterations
        self.trajectory_ = result.trajectory
        self.physical_ = result.physical
        self.n_features_in_ = len(GEOMETRY_COLUMNS)
        return self

    def predict(self, X):
        check_is_fitted(self, "alpha_")
        k, masses = self._design(X)
        m_eff = masses @ np.array([self.alpha_, self.beta_])
        return np.sqrt(k / m_eff) / (2 * np.pi)
