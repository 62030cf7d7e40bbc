"""NV and donor Hamiltonians, misalignment geometry, dephasing estimates."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spinbus.errors import (
    DegenerateGeometryError,
    DomainError,
    UnsupportedIsotopeError,
)
from spinbus.params import GAMMA_E, DonorSpinParams
from spinbus.spin import (
    TETRAHEDRAL_ANGLE,
    donor_hamiltonian,
    donor_secular_hamiltonian,
    evolve,
    ionization_dephasing,
    misalignment_angle,
    nuclear_flip_drive_mhz,
    nv_hamiltonian,
    product_state_expansion,
    separated_nv_hamiltonian,
)

D_GS = 2.87


class TestNVHamiltonian:
    def test_zero_field_splitting(self):
        w = nv_hamiltonian(D_GS, 0.0).eigenvalues()
        assert w == pytest.approx([-2 * D_GS / 3, D_GS / 3, D_GS / 3], abs=1e-12)
        # m_s = 0 sits exactly D below the degenerate m_s = +-1 pair
        assert w[1] - w[0] == pytest.approx(D_GS, abs=1e-12)

    def test_zero_everything(self):
        assert np.allclose(nv_hamiltonian(0.0, 0.0).matrix, 0.0)

    def test_level_crossing_field(self):
        # gamma_e B* = D brings m_s = -1 down to the m_s = 0 energy
        b_star = D_GS / GAMMA_E
        assert b_star == pytest.approx(1024.0, rel=1e-3)
        h = nv_hamiltonian(D_GS, b_star)
        diag = np.real(np.diag(h.matrix))  # basis order +1, 0, -1
        assert diag[2] == pytest.approx(diag[1], abs=1e-12)

    @given(st.floats(-5, 5), st.floats(0, 5000))
    def test_traceless_and_hermitian(self, d, b):
        h = nv_hamiltonian(d, b)
        assert abs(np.trace(h.matrix)) < 1e-12
        assert np.allclose(h.matrix, h.matrix.conj().T)

    def test_basis_labels(self):
        assert nv_hamiltonian(D_GS, 0.0).basis_labels == ((1, None), (0, None), (-1, None))

    def test_degeneracies_reported_not_resolved(self):
        groups = nv_hamiltonian(D_GS, 0.0).degenerate_groups()
        assert groups == [[0], [1, 2]]  # m_s = +-1 pair stays adjacent
        assert nv_hamiltonian(D_GS, 500.0).degenerate_groups() == [[0], [1], [2]]


class TestDonorHamiltonian:
    def test_dimensions(self):
        assert donor_hamiltonian("14N_S0", 0.0).dimension == 6
        assert donor_hamiltonian("15N_S0", 0.0).dimension == 4
        assert donor_hamiltonian("P_S0", 0.0).dimension == 4

    def test_axial_hyperfine_splitting_in_flip_branches(self):
        # electron-spin-flip energy differs by A_par between m_I = 0 and
        # m_I = +-1 at high field (quadrupole and nuclear Zeeman cancel)
        h = donor_hamiltonian("14N_S0", 5000.0, 0.0)
        w, v = h.eigensystem()
        labels = np.array(h.basis_labels, dtype=float)
        # map each eigenvector to its dominant basis state
        energy = {}
        for k in range(6):
            idx = int(np.argmax(np.abs(v[:, k]) ** 2))
            energy[tuple(labels[idx])] = w[k]
        flip_mi0 = energy[(0.5, 0.0)] - energy[(-0.5, 0.0)]
        flip_mi1 = energy[(0.5, 1.0)] - energy[(-0.5, 1.0)]
        assert (flip_mi1 - flip_mi0) * 1e3 == pytest.approx(114.0, abs=1.0)

    def test_zero_couplings_zero_field(self):
        bare = DonorSpinParams("bare", "<111>", 2.0, 0.0, 1.0, 0.0, 0.0, 0.0)
        assert np.allclose(donor_hamiltonian(bare, 0.0).matrix, 0.0)

    def test_misaligned_matches_secular(self):
        # brute-force diagonalization of both 6x6 matrices
        full = donor_hamiltonian("14N_S0", 5000.0, TETRAHEDRAL_ANGLE)
        sec = donor_secular_hamiltonian("14N_S0", 5000.0, aligned=False)
        dev_mhz = np.max(np.abs(full.eigenvalues() - sec.eigenvalues())) * 1e3
        assert dev_mhz < 1.0

    @pytest.mark.parametrize("isotope,a_par", [("15N_S0", -160.0), ("P_S0", 162.0)])
    def test_spin_half_flip_branch_splitting(self, isotope, a_par):
        # at high field the electron-flip energy differs by A_par between the
        # two nuclear projections of an I = 1/2 donor
        h = donor_hamiltonian(isotope, 10000.0, 0.0)
        w, v = h.eigensystem()
        labels = np.array(h.basis_labels, dtype=float)
        energy = {}
        for k in range(4):
            idx = int(np.argmax(np.abs(v[:, k]) ** 2))
            energy[tuple(labels[idx])] = w[k]
        flip_up = energy[(0.5, 0.5)] - energy[(-0.5, 0.5)]
        flip_dn = energy[(0.5, -0.5)] - energy[(-0.5, -0.5)]
        assert (flip_up - flip_dn) * 1e3 == pytest.approx(a_par, abs=1.0)

    def test_negative_field_rejected(self):
        with pytest.raises(DomainError):
            donor_hamiltonian("14N_S0", -10.0)


class TestMisalignmentAngle:
    def test_aligned(self):
        assert misalignment_angle(114.0, 81.0, aligned=True) == (0.0, 1.0)

    def test_misaligned_closed_form(self):
        alpha, chi = misalignment_angle(114.0, 81.0, aligned=False)
        # independent evaluation of the closed form
        theta = math.acos(-1.0 / 3.0)
        num = -(114.0 - 81.0) * math.sin(2 * theta)
        den = 114.0 + 81.0 + (114.0 - 81.0) * math.cos(2 * theta)
        assert alpha == pytest.approx(math.atan(num / den), abs=1e-15)
        assert alpha == pytest.approx(0.122, abs=1e-3)
        assert chi == pytest.approx(math.sqrt(5.0) / 3.0, abs=1e-15)

    def test_isotropic_hyperfine(self):
        alpha, _ = misalignment_angle(90.0, 90.0, aligned=False)
        assert alpha == 0.0

    def test_degenerate_geometry(self):
        # A_perp = -A_par/8 makes the denominator vanish at the tetrahedral angle
        with pytest.raises(DegenerateGeometryError):
            misalignment_angle(8.0, -1.0, aligned=False)


class TestSecularHamiltonian:
    def test_aligned_agreement(self):
        full = donor_hamiltonian("14N_S0", 5000.0, 0.0)
        sec = donor_secular_hamiltonian("14N_S0", 5000.0, aligned=True)
        dev_mhz = np.max(np.abs(full.eigenvalues() - sec.eigenvalues())) * 1e3
        assert dev_mhz < 1.0

    def test_aligned_mi0_block_unshifted(self):
        # chi A_par s_z I_z vanishes on m_I = 0: no magnetic hyperfine shift
        h = donor_secular_hamiltonian("14N_S0", 5000.0, aligned=True)
        m = h.matrix * 1e3  # MHz
        labels = h.basis_labels
        for k, (ms, mi) in enumerate(labels):
            if mi == 0.0:
                zeeman = GAMMA_E * 1e3 * 5000.0 * ms
                quad = -3.97 * (0.0 - 2.0 / 3.0)
                assert m[k, k].real == pytest.approx(zeeman + quad, abs=1e-9)

    def test_flip_drive_magnitude(self):
        mag = nuclear_flip_drive_mhz("14N_S0", 5000.0, aligned=False)
        assert 0.1 < mag < 3.0  # of order 1 MHz
        assert nuclear_flip_drive_mhz("14N_S0", 5000.0, aligned=True) == 0.0

    def test_agreement_improves_with_field(self):
        for aligned, angle in ((True, 0.0), (False, TETRAHEDRAL_ANGLE)):
            devs = []
            for b in (1000.0, 2000.0, 4000.0, 8000.0):
                full = donor_hamiltonian("14N_S0", b, angle)
                sec = donor_secular_hamiltonian("14N_S0", b, aligned=aligned)
                devs.append(np.max(np.abs(full.eigenvalues() - sec.eigenvalues())))
            for lo_b, hi_b in zip(devs, devs[1:]):
                assert hi_b <= lo_b + 1e-12

    def test_matches_block_diagonalized_full_hamiltonian(self):
        # independent construction: project the full Hamiltonian onto its
        # electron-spin blocks (the textbook secular reduction) and compare
        for aligned, angle in ((True, 0.0), (False, TETRAHEDRAL_ANGLE)):
            full = donor_hamiltonian("14N_S0", 5000.0, angle).matrix
            block = full.copy()
            block[:3, 3:] = 0.0
            block[3:, :3] = 0.0
            w_block = np.sort(np.linalg.eigvalsh(block))
            w_sec = donor_secular_hamiltonian("14N_S0", 5000.0, aligned=aligned).eigenvalues()
            dev_mhz = np.max(np.abs(w_block - w_sec)) * 1e3
            assert dev_mhz < 0.5

    def test_spin_half_unsupported(self):
        for isotope in ("15N_S0", "P_S0"):
            with pytest.raises(UnsupportedIsotopeError):
                donor_secular_hamiltonian(isotope, 5000.0, aligned=True)

    def test_low_field_warns(self):
        with pytest.warns(UserWarning):
            donor_secular_hamiltonian("14N_S0", 100.0, aligned=True)


class TestSeparatedNV:
    def test_balanced_state_never_dephases(self):
        h, est = separated_nv_hamiltonian(1 / math.sqrt(2), 1 / math.sqrt(2), D_GS, 0.0)
        assert np.allclose(h.matrix, 0.0)
        assert math.isinf(est.timescale)
        assert est.coherence_factor == 1.0

    def test_polarized_state_timescale(self):
        _, est = separated_nv_hamiltonian(1.0, 0.0, D_GS, 0.0)
        assert est.timescale == pytest.approx(1.0 / D_GS, rel=1e-12)
        assert round(est.timescale, 2) == 0.35
        assert est.mechanism == "zero-field-D"

    def test_half_imbalance(self):
        h, est = separated_nv_hamiltonian(math.sqrt(3) / 2, 0.5, D_GS, 0.0)
        # D-term coefficient D/2 on s_z = diag(1/2, -1/2)
        assert h.matrix[0, 0].real == pytest.approx(D_GS / 4, rel=1e-12)
        assert est.timescale == pytest.approx(2.0 / D_GS, rel=1e-12)

    def test_unnormalized_rejected(self):
        with pytest.raises(DomainError):
            separated_nv_hamiltonian(1.0, 1.0, D_GS, 0.0)


class TestProductStateExpansion:
    def test_polarized(self):
        assert product_state_expansion(1.0, 0.0) == pytest.approx([1.0, 0.0, 0.0])

    def test_balanced(self):
        c = product_state_expansion(1 / math.sqrt(2), 1 / math.sqrt(2))
        assert c == pytest.approx([0.5, 1 / math.sqrt(2), 0.5], rel=1e-12)

    @given(st.floats(0, 2 * math.pi), st.floats(0, math.pi / 2), st.floats(0, 2 * math.pi))
    def test_normalized_and_factorizes(self, phase_a, mix, phase_b):
        alpha = math.cos(mix) * complex(math.cos(phase_a), math.sin(phase_a))
        beta = math.sin(mix) * complex(math.cos(phase_b), math.sin(phase_b))
        c = product_state_expansion(alpha, beta)
        assert np.sum(np.abs(c) ** 2) == pytest.approx(1.0, abs=1e-9)
        # re-expansion in the two-electron basis is exactly (a,b) x (a,b)
        two_e = np.kron([alpha, beta], [alpha, beta])
        triplet = np.array([two_e[0], (two_e[1] + two_e[2]) / math.sqrt(2), two_e[3]])
        assert np.max(np.abs(c - triplet)) < 1e-12

    def test_unnormalized_rejected(self):
        with pytest.raises(DomainError):
            product_state_expansion(1.0, 0.5)


class TestIonizationDephasing:
    def test_zero_coupling_full_coherence(self):
        est = ionization_dephasing(0.0, 1.0)
        assert est.coherence_factor == 1.0
        assert math.isinf(est.timescale)

    def test_hundred_mhz_timescale(self):
        est = ionization_dephasing(100.0, 1.0)
        assert est.timescale == pytest.approx(1.0 / (2 * math.pi * 0.1), rel=1e-12)
        assert est.timescale == pytest.approx(1.6, abs=0.01)

    def test_closed_form_value(self):
        est = ionization_dephasing(100.0, 1.0)
        omega = 2 * math.pi * 0.1
        assert est.coherence_factor == pytest.approx(1.0 / math.hypot(1.0, omega), rel=1e-12)
        assert est.coherence_factor == pytest.approx(0.847, abs=1e-3)

    def test_nonpositive_rate_rejected(self):
        with pytest.raises(DomainError):
            ionization_dephasing(10.0, 0.0)

    @given(st.floats(0.0, 1e3), st.floats(0.0, 1e3), st.floats(1e-3, 1e2))
    def test_monotone_in_coupling(self, c1, c2, k):
        lo, hi = sorted((c1, c2))
        assert (ionization_dephasing(hi, k).coherence_factor
                <= ionization_dephasing(lo, k).coherence_factor)

    @given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e2), st.floats(1e-3, 1e2))
    def test_monotone_in_rate(self, c, k1, k2):
        lo, hi = sorted((k1, k2))
        assert (ionization_dephasing(c, lo).coherence_factor
                <= ionization_dephasing(c, hi).coherence_factor)


class TestDephasingEstimate:
    def test_invariants_enforced(self):
        from spinbus.spin import DephasingEstimate
        with pytest.raises(DomainError):
            DephasingEstimate(0.0, "transport-EY", 1.0)
        with pytest.raises(DomainError):
            DephasingEstimate(1.0, "transport-EY", 1.5)
        from spinbus.errors import ParameterError
        with pytest.raises(ParameterError):
            DephasingEstimate(1.0, "cosmic-rays", 0.5)


class TestEvolve:
    def test_identity_at_zero_time(self):
        h = nv_hamiltonian(D_GS, 100.0)
        psi = np.array([0.6, 0.8j, 0.0])
        assert np.allclose(evolve(h, psi, 0.0), psi, atol=1e-12)

    def test_eigenstate_picks_up_global_phase_only(self):
        h = donor_hamiltonian("14N_S0", 5000.0, 0.0)
        _, v = h.eigensystem()
        psi = v[:, 2]
        out = evolve(h, psi, 3.7)
        assert abs(abs(np.vdot(psi, out)) - 1.0) < 1e-10

    def test_relative_phase_pi_at_half_period(self):
        h = nv_hamiltonian(D_GS, 0.0)
        psi = np.array([1.0, 1.0, 0.0]) / math.sqrt(2)
        out = evolve(h, psi, 1.0 / (2 * D_GS))
        target = np.array([1.0, -1.0, 0.0]) / math.sqrt(2)
        assert abs(abs(np.vdot(target, out)) - 1.0) < 1e-9

    @given(st.floats(0, 50), st.floats(0, 50))
    def test_norm_preserved_and_composes(self, t1, t2):
        h = donor_hamiltonian("14N_S0", 3000.0, TETRAHEDRAL_ANGLE)
        rng = np.random.default_rng(7)
        psi = rng.normal(size=6) + 1j * rng.normal(size=6)
        psi /= np.linalg.norm(psi)
        one = evolve(h, evolve(h, psi, t1), t2)
        two = evolve(h, psi, t1 + t2)
        assert abs(np.linalg.norm(one) - 1.0) < 1e-10
        assert np.max(np.abs(one - two)) < 1e-9

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            evolve(nv_hamiltonian(D_GS, 0.0), np.array([1.0, 0.0]), 1.0)

    def test_against_matrix_exponential_oracle(self):
        from scipy.linalg import expm
        h = donor_hamiltonian("14N_S0", 5000.0, TETRAHEDRAL_ANGLE)
        rng = np.random.default_rng(11)
        psi = rng.normal(size=6) + 1j * rng.normal(size=6)
        psi /= np.linalg.norm(psi)
        t = 2.31
        direct = expm(-2j * math.pi * h.matrix * t) @ psi
        assert np.max(np.abs(evolve(h, psi, t) - direct)) < 1e-10
