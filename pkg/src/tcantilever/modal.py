"""Stepped Euler-Bernoulli beam finite elements for the clamped-free T-beam.

Two-node Hermite-cubic bending elements with consistent mass matrices.
Each node carries (deflection, rotation); node 0 is clamped. The first
eigenpair is found by shifted inverse iteration on the dense pencil.

Matrices are assembled in a nondimensional form (lengths over the total
length ``L``, rigidity over ``E I1``, mass per length over ``rho w1 h``) so
that deflection and rotation unknowns are of comparable size; results are
converted back to SI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from ._validation import check_positive
from .core import MaterialSpec, TGeometry, section_inertias
from .exceptions import ConvergenceError, GeometryError

DEFAULT_ELEMENTS = 128
MIN_ELEMENTS = 4


@dataclass(frozen=True)
class SteppedBeamMesh:
    """Discretized stepped beam.

    Attributes:
        nodes: Strictly increasing node coordinates (m), ``nodes[0] == 0``.
        bending_rigidity: ``E I`` per element (N m^2).
        mass_per_length: ``rho w h`` per element (kg/m).
        l1: Position of the width step (m); a node sits exactly there.
    """

    nodes: np.ndarray
    bending_rigidity: np.ndarray
    mass_per_length: np.ndarray
    l1: float

    @property
    def n_elements(self) -> int:
        return len(self.nodes) - 1

    @property
    def length(self) -> float:
        return float(self.nodes[-1])

    @property
    def element_lengths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.mass_per_length * self.element_lengths))


@dataclass(frozen=True)
class ModalResult:
    """First flexural mode.

    ``mode_shape`` interleaves (deflection, rotation) for every node including
    the clamped root, scaled so that the tip deflection is 1.
    """

    omega1: float
    mode_shape: np.ndarray
    n_elements: int
    residual: float
    iterations: int

    @property
    def f1(self) -> float:
        return self.omega1 / (2.0 * math.pi)


def _split_counts(n_el, l1, l2):
    if l2 == 0.0:
        return n_el, 0
    if l1 <= l2:
        n1 = max(2, math.floor(n_el * l1 / (l1 + l2) + 0.5))
        n1 = min(n1, n_el - 2)
        return n1, n_el - n1
    n2 = max(2, math.floor(n_el * l2 / (l1 + l2) + 0.5))
    n2 = min(n2, n_el - 2)
    return n_el - n2, n2


def build_mesh(g: TGeometry, m: MaterialSpec, n_el: int = DEFAULT_ELEMENTS) -> SteppedBeamMesh:
    """Mesh the stepped beam with a node exactly at the width step.

    Elements are split between the regions in proportion to their lengths,
    with at least two per nonempty region; the shorter region's count is
    rounded and the remainder goes to the longer one.
    """
    if int(n_el) != n_el or n_el < MIN_ELEMENTS:
        raise GeometryError(f"n_el must be an integer >= {MIN_ELEMENTS}, got {n_el!r}")
    n_el = int(n_el)
    if g.l2 > 0.0 and g.w2 == 0.0:
        raise GeometryError("extra-mass segment with l2 > 0 must have w2 > 0")

    inertia = section_inertias(g)
    E, rho, h = m.youngs_modulus, m.density, g.h
    n1, n2 = _split_counts(n_el, g.l1, g.l2)
    x1 = np.linspace(0.0, g.l1, n1 + 1)
    if n2:
        x2 = np.linspace(g.l1, g.length, n2 + 1)[1:]
        x2[-1] = g.length
        nodes = np.concatenate([x1, x2])
    else:
        nodes = x1
    ei = np.concatenate([np.full(n1, E * inertia.i1), np.full(n2, E * inertia.i2)])
    mu = np.concatenate([np.full(n1, rho * g.w1 * h), np.full(n2, rho * g.w2 * h)])
    return SteppedBeamMesh(nodes=nodes, bending_rigidity=ei, mass_per_length=mu, l1=g.l1)


def element_stiffness(length: float, bending_rigidity: float) -> np.ndarray:
    le = length
    return (bending_rigidity / le**3) * np.array(
        [
            [12.0, 6 * le, -12.0, 6 * le],
            [6 * le, 4 * le**2, -6 * le, 2 * le**2],
            [-12.0, -6 * le, 12.0, -6 * le],
            [6 * le, 2 * le**2, -6 * le, 4 * le**2],
        ]
    )


def element_mass(length: float, mass_per_length: float) -> np.ndarray:
    le = length
    return (mass_per_length * le / 420.0) * np.array(
        [
            [156.0, 22 * le, 54.0, -13 * le],
            [22 * le, 4 * le**2, 13 * le, -3 * le**2],
            [54.0, 13 * le, 156.0, -22 * le],
            [-13 * le, -3 * le**2, -22 * le, 4 * le**2],
        ]
    )


def _reference_scales(mesh):
    return mesh.length, float(mesh.bending_rigidity[0]), float(mesh.mass_per_length[0])


def assemble(
    mesh: SteppedBeamMesh, nondimensional: bool = False, dtype=float
) -> tuple[np.ndarray, np.ndarray]:
    """Global stiffness and mass matrices with the clamped root DOFs removed.

    With ``nondimensional=True`` the matrices are those of the scaled problem
    (see module docstring); its eigenvalues are ``omega^2 mu0 L^4 / EI0``.
    """
    lengths = np.diff(mesh.nodes.astype(dtype))
    ei = mesh.bending_rigidity.astype(dtype)
    mu = mesh.mass_per_length.astype(dtype)
    if nondimensional:
        L, ei0, mu0 = (dtype(v) for v in _reference_scales(mesh))
        lengths, ei, mu = lengths / L, ei / ei0, mu / mu0
    n_dof = 2 * (mesh.n_elements + 1)
    K = np.zeros((n_dof, n_dof), dtype=dtype)
    M = np.zeros((n_dof, n_dof), dtype=dtype)
    for e, (le, ei_e, mu_e) in enumerate(zip(lengths, ei, mu)):
        s = slice(2 * e, 2 * e + 4)
        K[s, s] += element_stiffness(le, ei_e)
        M[s, s] += element_mass(le, mu_e)
    return K[2:, 2:], M[2:, 2:]


def _to_si_shape(mesh, phi_scaled):
    # scaled rotation is dy/d(x/L); divide by L for rad per unit tip deflection
    full = np.concatenate([[0.0, 0.0], np.asarray(phi_scaled, dtype=float)])
    full[1::2] /= mesh.length
    return full / full[-2]


class _RefinedSolver:
    """Float64 LU of ``K - shift M`` with residuals in extended precision.

    The first mode is smooth, so ``K phi`` cancels heavily; plain float64
    solves cap the relative eigen-residual near 1e-7 on fine meshes. The
    matrix is equilibrated symmetrically first, which keeps refinement
    convergent when one region has much shorter elements than the other.
    """

    def __init__(self, A_ext, refinements=3):
        self.A = A_ext
        self.d = 1.0 / np.sqrt(np.abs(np.diag(A_ext)))
        scaled = (self.d[:, None] * A_ext * self.d[None, :]).astype(float)
        self.lu = linalg.lu_factor(scaled)
        self.refinements = refinements

    def _solve64(self, r):
        return self.d * linalg.lu_solve(self.lu, (self.d * r).astype(float)).astype(r.dtype)

    def solve(self, b):
        y = self._solve64(b)
        for _ in range(self.refinements):
            y += self._solve64(b - self.A @ y)
        return y


def first_mode(
    mesh: SteppedBeamMesh,
    shift: float = 0.0,
    rtol: float = 1e-12,
    max_iter: int = 500,
    residual_tol: float = 1e-8,
    settle: int = 10,
) -> ModalResult:
    """Smallest eigenpair of ``K phi = omega^2 M phi`` by shifted inverse iteration.

    ``shift`` is in the nondimensional eigenvalue scale; the default 0 is
    safe because the clamped stiffness matrix is positive definite.
    Iteration stops once the Rayleigh quotient changes by less than
    ``rtol`` (relative) and the eigen-residual
    ``||K phi - lam M phi|| / ||K phi||`` is below ``residual_tol``. On meshes
    mixing very short and long elements the quotient jitters above ``rtol``;
    the iteration then stops after ``settle`` consecutive iterations inside
    ``residual_tol``.

    Raises:
        ConvergenceError: after ``max_iter`` iterations without convergence.
    """
    ext = np.longdouble
    K, M = assemble(mesh, nondimensional=True, dtype=ext)
    L, ei0, mu0 = _reference_scales(mesh)
    solver = _RefinedSolver(K - ext(shift) * M)

    # static shape under uniform load: positive overlap with mode 1
    x = solver.solve(M @ np.tile(np.array([1.0, 0.0], dtype=ext), len(K) // 2))
    lam_prev = math.inf
    lam = math.nan
    residual = math.inf
    inside = 0
    for it in range(1, max_iter + 1):
        x = x / np.sqrt(x @ M @ x)
        Kx = K @ x
        lam = float(x @ Kx)
        residual = float(np.linalg.norm((Kx - lam * (M @ x)).astype(float)) / np.linalg.norm(Kx.astype(float)))
        inside = inside + 1 if residual <= residual_tol else 0
        if inside and (abs(lam - lam_prev) <= rtol * abs(lam) or inside >= settle):
            break
        lam_prev = lam
        x = solver.solve(M @ x)
    else:
        raise ConvergenceError(
            f"inverse iteration did not converge in {max_iter} iterations (residual {residual:.3e})",
            residual=residual,
        )
    if not lam > 0.0:
        raise ConvergenceError(f"non-positive eigenvalue {lam!r}", residual=residual)

    omega1 = math.sqrt(lam * ei0 / (mu0 * L**4))
    return ModalResult(
        omega1=omega1,
        mode_shape=_to_si_shape(mesh, x),
        n_elements=mesh.n_elements,
        residual=residual,
        iterations=it,
    )


def static_tip_stiffness(mesh: SteppedBeamMesh, force: float = 1.0) -> float:
    """Tip force over tip deflection from a static solve ``K u = F e_tip`` (N/m).

    Raises:
        ConvergenceError: if the stiffness matrix is not positive definite.
    """
    force = check_positive("force", abs(force)) * math.copysign(1.0, force)
    ext = np.longdouble
    K, _ = assemble(mesh, nondimensional=True, dtype=ext)
    L, ei0, _ = _reference_scales(mesh)
    rhs = np.zeros(len(K), dtype=ext)
    rhs[-2] = 1.0
    try:
        linalg.cho_factor(K.astype(float))
        solver = _RefinedSolver(K)
    except linalg.LinAlgError as exc:
        raise ConvergenceError(f"singular stiffness matrix: {exc}") from exc
    tip = float(solver.solve(rhs)[-2]) * force * L**3 / ei0
    return force / tip


def effective_mass_from_modal(k: float, omega1: float) -> float:
    """Tip-equivalent mass ``k / omega1^2`` that reproduces ``omega1`` with ``k``."""
    k = check_positive("k", k)
    omega1 = check_positive("omega1", omega1)
    return k / omega1**2


def modal_analysis(g: TGeometry, m: MaterialSpec, n_el: int = DEFAULT_ELEMENTS) -> ModalResult:
    """Mesh and solve in one call."""
    return first_mode(build_mesh(g, m, n_el))
