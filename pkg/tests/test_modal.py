import math

import numpy as np
import pytest
from scipy import linalg

from tcantilever import (
    GeometryError,
    MaterialSpec,
    TGeometry,
    build_mesh,
    effective_mass_from_modal,
    first_mode,
    lumped_prediction,
    resonance_frequency,
    segment_masses,
    shipped_catalog,
    spring_constant_t,
    static_tip_stiffness,
)
from tcantilever.exceptions import ConvergenceError
from tcantilever.modal import assemble, element_mass, element_stiffness, modal_analysis

from oracles import uniform_first_frequency

UM = 1e-6
UNIFORM = TGeometry(400 * UM, 0.0, 64 * UM, 0.0, 15 * UM)


class TestMesh:
    def test_rectangular_single_region(self, silicon):
        mesh = build_mesh(UNIFORM, silicon, 16)
        assert mesh.n_elements == 16
        assert np.allclose(mesh.element_lengths, 25 * UM)
        assert len(set(mesh.bending_rigidity)) == 1
        assert len(set(mesh.mass_per_length)) == 1

    def test_device1_split(self, device1, silicon):
        mesh = build_mesh(device1, silicon, 128)
        ei1 = silicon.youngs_modulus * 64 * UM * (15 * UM) ** 3 / 12
        assert np.sum(np.isclose(mesh.bending_rigidity, ei1, rtol=1e-12, atol=0.0)) == 16
        assert mesh.n_elements - 16 == 112

    def test_node_at_step(self, device4, silicon):
        mesh = build_mesh(device4, silicon, 37)
        assert device4.l1 in mesh.nodes
        assert np.all(np.diff(mesh.nodes) > 0)
        assert mesh.nodes[0] == 0.0
        assert mesh.nodes[-1] == device4.length

    def test_minimum_two_per_region(self, silicon):
        g = TGeometry(399 * UM, 1 * UM, 64 * UM, 100 * UM, 15 * UM)
        mesh = build_mesh(g, silicon, 8)
        ei2 = silicon.youngs_modulus * 100 * UM * (15 * UM) ** 3 / 12
        assert np.sum(np.isclose(mesh.bending_rigidity, ei2, rtol=1e-12, atol=0.0)) == 2

    def test_mass_is_conserved(self, device4, silicon):
        mesh = build_mesh(device4, silicon, 50)
        assert mesh.total_mass == pytest.approx(sum(segment_masses(device4, silicon)), rel=1e-13)

    @pytest.mark.parametrize("n_el", [3, 0, 4.5])
    def test_rejects_bad_counts(self, silicon, n_el):
        with pytest.raises(GeometryError):
            build_mesh(UNIFORM, silicon, n_el)

    def test_rejects_zero_width_mass(self, silicon):
        with pytest.raises(GeometryError):
            build_mesh(TGeometry(100 * UM, 50 * UM, 10 * UM, 0.0, 5 * UM), silicon)


class TestMatrices:
    def test_element_matrices_symmetric(self):
        assert np.allclose(element_stiffness(0.3, 2.0), element_stiffness(0.3, 2.0).T)
        assert np.allclose(element_mass(0.3, 2.0), element_mass(0.3, 2.0).T)

    def test_element_mass_integrates_translation(self):
        # rigid translation picks up the element mass
        me = element_mass(0.5, 3.0)
        u = np.array([1.0, 0.0, 1.0, 0.0])
        assert u @ me @ u == pytest.approx(1.5)

    def test_rigid_modes_carry_no_strain_energy(self):
        ke = element_stiffness(0.7, 5.0)
        assert np.allclose(ke @ [1.0, 0.0, 1.0, 0.0], 0.0)
        assert np.allclose(ke @ [0.0, 1.0, 0.7, 1.0], 0.0, atol=1e-12)

    def test_global_definiteness(self, device4, silicon):
        K, M = assemble(build_mesh(device4, silicon, 20), nondimensional=True)
        assert np.allclose(K, K.T) and np.allclose(M, M.T)
        assert np.all(np.linalg.eigvalsh(K) > 0)
        assert np.all(np.linalg.eigvalsh(M) > 0)


class TestFirstMode:
    def test_uniform_beam_closed_form(self, silicon):
        expected = uniform_first_frequency(400 * UM, 15 * UM, silicon.youngs_modulus, silicon.density)
        assert expected == pytest.approx(129.0e3, rel=1e-3)
        result = first_mode(build_mesh(UNIFORM, silicon, 64))
        assert result.f1 == pytest.approx(expected, rel=1e-3)

    def test_width_cancels_for_uniform_beams(self, silicon):
        a = modal_analysis(TGeometry(400 * UM, 0.0, 20 * UM, 0.0, 15 * UM), silicon, 32).f1
        b = modal_analysis(TGeometry(400 * UM, 0.0, 90 * UM, 0.0, 15 * UM), silicon, 32).f1
        c = modal_analysis(TGeometry(200 * UM, 200 * UM, 90 * UM, 90 * UM, 15 * UM), silicon, 32).f1
        assert a == pytest.approx(b, rel=1e-12)
        assert a == pytest.approx(c, rel=1e-9)

    def test_lumped_classical_coefficient_close(self, silicon):
        fem = modal_analysis(UNIFORM, silicon, 64).f1
        lumped = lumped_prediction(UNIFORM, silicon, 0.2427).frequency
        assert lumped == pytest.approx(fem, rel=0.01)

    @pytest.mark.parametrize("device_id", range(1, 9))
    def test_matches_dense_eigensolver(self, silicon, device_id):
        g = next(d for d in shipped_catalog() if d.id == device_id).geometry()
        mesh = build_mesh(g, silicon, 48)
        K, M = assemble(mesh)
        lam = linalg.eigh(K, M, eigvals_only=True, subset_by_index=[0, 0])[0]
        result = first_mode(mesh)
        # a float64 dense solve of this pencil is itself only good to ~1e-7
        assert result.f1 == pytest.approx(math.sqrt(lam) / (2 * math.pi), rel=1e-6)

    def test_residual_and_rayleigh_quotient(self, device1, silicon):
        mesh = build_mesh(device1, silicon, 128)
        result = first_mode(mesh)
        assert result.residual <= 1e-8
        K, M = assemble(mesh, dtype=np.longdouble)
        phi = result.mode_shape[2:].astype(np.longdouble)
        rq = float((phi @ K @ phi) / (phi @ M @ phi))
        assert rq == pytest.approx(result.omega1**2, rel=1e-10)

    def test_mode_shape_normalized_and_clamped(self, device4, silicon):
        shape = modal_analysis(device4, silicon, 32).mode_shape
        assert shape[0] == 0.0 and shape[1] == 0.0
        assert shape[-2] == pytest.approx(1.0)
        assert np.all(shape[2::2] > 0)

    def test_deterministic(self, device4, silicon):
        mesh = build_mesh(device4, silicon, 64)
        a, b = first_mode(mesh), first_mode(mesh)
        assert a.omega1 == b.omega1
        assert np.array_equal(a.mode_shape, b.mode_shape)

    def test_iteration_cap_reports_failure(self, device4, silicon):
        with pytest.raises(ConvergenceError) as info:
            first_mode(build_mesh(device4, silicon, 64), max_iter=1)
        assert info.value.residual is not None

    @pytest.mark.parametrize("device_id", range(1, 9))
    def test_convergence_under_refinement(self, silicon, device_id):
        g = next(d for d in shipped_catalog() if d.id == device_id).geometry()
        coarse = modal_analysis(g, silicon, 64).f1
        fine = modal_analysis(g, silicon, 128).f1
        assert abs(fine - coarse) / fine <= 1e-3

    def test_large_extra_mass_brackets(self, device1, silicon):
        fem = modal_analysis(device1, silicon).f1
        assert lumped_prediction(device1, silicon).frequency < fem < uniform_first_frequency(
            400 * UM, 15 * UM, silicon.youngs_modulus, silicon.density
        )


class TestStatic:
    def test_device4(self, device4, silicon):
        k = static_tip_stiffness(build_mesh(device4, silicon, 128))
        assert k == pytest.approx(spring_constant_t(device4, silicon), rel=1e-9)
        assert k == pytest.approx(142.9, rel=1e-3)

    def test_rectangular(self, silicon):
        assert static_tip_stiffness(build_mesh(UNIFORM, silicon, 8)) == pytest.approx(142.59375, rel=1e-10)

    def test_independent_of_load(self, device1, silicon):
        mesh = build_mesh(device1, silicon, 32)
        assert static_tip_stiffness(mesh, 1e-9) == pytest.approx(static_tip_stiffness(mesh, 5.0), rel=1e-12)


class TestEffectiveMass:
    def test_uniform_beam(self):
        m_eff = effective_mass_from_modal(142.6, 2 * math.pi * 129.7e3)
        assert m_eff == pytest.approx(2.15e-10, rel=5e-3)
        m1 = 2330 * 400 * UM * 64 * UM * 15 * UM
        assert m_eff / m1 == pytest.approx(0.24, rel=5e-3)

    def test_round_trip(self):
        omega = 2 * math.pi * 88e3
        assert resonance_frequency(150.0, effective_mass_from_modal(150.0, omega)) == pytest.approx(
            omega / (2 * math.pi), rel=1e-15
        )

    def test_inverse_square(self):
        assert effective_mass_from_modal(10.0, 2.0) == pytest.approx(4 * effective_mass_from_modal(10.0, 4.0))

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            effective_mass_from_modal(0.0, 1.0)


def test_material_scaling(device4):
    base = modal_analysis(device4, MaterialSpec(169e9, 2330), 32).f1
    stiffer = modal_analysis(device4, MaterialSpec(4 * 169e9, 2330), 32).f1
    assert stiffer == pytest.approx(2 * base, rel=1e-10)
