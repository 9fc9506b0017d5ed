from __future__ import annotations

import numpy as np
import pytest

from chlab.dynamics import SolverConfig
from chlab.experiments import (
    LadderSpec,
    TERM_EXPONENTS,
    compute_ladder_cell,
    compute_packet_cell,
    e1_norm_limit,
    e2_residual_decay,
    e3_actual_vs_approx,
    e4_interpolated_hs_decay,
    e5_nonuniform_dependence,
    fit_slope,
    oracle_packet_ratio,
    ref_bump_norm,
)
from chlab.spectral import PHI, PHI_TILDE


class TestFitSlope:
    def test_exact_power_law(self):
        pts = [(lam, lam**-2.0) for lam in (16.0, 32.0, 64.0, 128.0)]
        slope, err = fit_slope(pts, top_k=3)
        assert slope == pytest.approx(-2.0, abs=1e-12)
        assert err <= 1e-12

    def test_constant_values(self):
        pts = [(lam, 3.7) for lam in (8.0, 16.0, 32.0)]
        slope, _ = fit_slope(pts, top_k=3)
        assert slope == pytest.approx(0.0, abs=1e-13)

    def test_perturbed_power_law(self):
        pts = [(lam, lam**-2.0 * (1 + 5.0 / lam)) for lam in (16.0, 32.0, 64.0, 128.0)]
        slope, _ = fit_slope(pts, top_k=3)
        assert abs(slope - (-2.0)) <= 0.1

    def test_two_points_zero_stderr(self):
        slope, err = fit_slope([(2.0, 4.0), (4.0, 16.0)], top_k=3)
        assert slope == pytest.approx(2.0) and err == 0.0

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            fit_slope([(2.0, 1.0), (4.0, 0.0)])
        with pytest.raises(ValueError):
            fit_slope([(2.0, 1.0)])


class TestPacketOracle:
    @pytest.mark.parametrize("lam", [8.0, 16.0])
    def test_measured_matches_quadrature(self, lam):
        spec = LadderSpec(lambdas=(8.0, 16.0))
        cell = compute_packet_cell(lam, spec)
        for row in cell.rows:
            assert row.ratio == pytest.approx(row.oracle_ratio, abs=1e-6)

    def test_ratio_approaches_one_from_above(self):
        r8 = oracle_packet_ratio(8.0, 1.5, 2.0, 0.0, "cos")
        r16 = oracle_packet_ratio(16.0, 1.5, 2.0, 0.0, "cos")
        r64 = oracle_packet_ratio(64.0, 1.5, 2.0, 0.0, "cos")
        assert r8 > r16 > r64 > 1.0


class TestE1:
    def test_report(self, mini_spec, mini_cells):
        packet, _ = mini_cells
        rep = e1_norm_limit(mini_spec, cells=packet)
        assert rep.experiment_id == "e1"
        assert len(rep.csv_rows) == 2 * 4
        assert rep.all_pass
        ids = {v.verdict_id for v in rep.verdicts}
        assert "e1.sin_cos_agreement" in ids
        assert any(i.startswith("e1.ratio_dev.cos") for i in ids)

    def test_monotone_deviation(self, mini_spec, mini_cells):
        packet, _ = mini_cells
        for trig in ("cos", "sin"):
            devs = [
                abs(next(r.ratio for r in packet[lam].rows if r.trig == trig and r.alpha == 0.0) - 1.0)
                for lam in mini_spec.lambdas
            ]
            assert devs == sorted(devs, reverse=True)

    def test_resolution_robustness(self, mini_spec, mini_cells):
        packet, _ = mini_cells
        spec2 = LadderSpec(lambdas=mini_spec.lambdas, resolution_multiplier=2)
        packet2 = {lam: compute_packet_cell(lam, spec2) for lam in spec2.lambdas}
        v1 = {v.verdict_id: v.passed for v in e1_norm_limit(mini_spec, cells=packet).verdicts}
        v2 = {v.verdict_id: v.passed for v in e1_norm_limit(spec2, cells=packet2).verdicts}
        assert v1 == v2


class TestE2:
    def test_identity_and_slopes(self, mini_spec, mini_cfg, mini_cells):
        _, ladder = mini_cells
        rep = e2_residual_decay(mini_spec, mini_cfg, cells=ladder)
        gap = next(v for v in rep.verdicts if v.verdict_id == "e2.identity_gap")
        assert gap.passed and gap.measured <= 1e-6
        for v in rep.verdicts:
            if v.verdict_id.startswith("e2.slope.t="):
                assert v.passed, f"{v.verdict_id}: {v.measured} vs {v.threshold}"

    def test_per_term_verdicts_cover_all_eight(self, mini_spec, mini_cfg, mini_cells):
        _, ladder = mini_cells
        rep = e2_residual_decay(mini_spec, mini_cfg, cells=ladder)
        term_ids = [v for v in rep.verdicts if v.verdict_id.startswith("e2.term_slope.f")]
        assert len(term_ids) == 8
        assert all(v.passed for v in term_ids)

    def test_low_freq_verdicts(self, mini_spec, mini_cfg, mini_cells):
        _, ladder = mini_cells
        rep = e2_residual_decay(mini_spec, mini_cfg, cells=ladder)
        by_id = {v.verdict_id: v for v in rep.verdicts}
        assert by_id["e2.low_doubling"].passed
        assert by_id["e2.low_h2_ratio"].passed
        assert by_id["e2.dealias_band"].passed

    def test_direct_norm_decreasing(self, mini_spec, mini_cells):
        _, ladder = mini_cells
        for t in (0.5, 1.0):
            vals = [
                next(r.direct_h1 for r in ladder[lam].resid_rows if r.t == t)
                for lam in mini_spec.lambdas
            ]
            assert vals[1] < vals[0]

    def test_csv_schema(self, mini_spec, mini_cfg, mini_cells):
        _, ladder = mini_cells
        rep = e2_residual_decay(mini_spec, mini_cfg, cells=ladder)
        assert rep.csv_header[:4] == ("lambda", "delta", "s", "t")
        assert rep.csv_header[4:12] == tuple(f"f{j}_h1" for j in range(1, 9))
        assert rep.csv_header[12:] == ("sum_h1", "direct_h1", "rel_gap")


class TestE3E4:
    def test_v_zero_and_slopes(self, mini_spec, mini_cfg, mini_cells):
        _, ladder = mini_cells
        rep = e3_actual_vs_approx(mini_spec, mini_cfg, cells=ladder)
        by_id = {v.verdict_id: v for v in rep.verdicts}
        assert by_id["e3.v_zero_at_t0"].measured == 0.0
        assert all(v.passed for v in rep.verdicts), [
            (v.verdict_id, v.measured, v.threshold) for v in rep.verdicts if not v.passed
        ]

    def test_interpolation_pointwise(self, mini_spec, mini_cfg, mini_cells):
        _, ladder = mini_cells
        rep = e4_interpolated_hs_decay(mini_spec, mini_cfg, cells=ladder)
        v = next(x for x in rep.verdicts if x.verdict_id == "e4.interpolation_pointwise")
        assert v.passed and v.measured <= 1e-10

    def test_hs_between_h1_and_hk(self, mini_cells):
        _, ladder = mini_cells
        for cell in ladder.values():
            for r in cell.actual_rows:
                if r.t > 0:
                    assert r.v_h1 <= r.v_hs <= r.v_hk


class TestE5:
    def test_d0_matches_formula(self, mini_cells):
        _, ladder = mini_cells
        for cell in ladder.values():
            assert cell.d0_reldev <= 1e-12
            assert cell.d0 == pytest.approx(cell.d0_formula, rel=1e-10)

    def test_d0_decreasing(self, mini_spec, mini_cells):
        _, ladder = mini_cells
        d0s = [ladder[lam].d0 for lam in mini_spec.lambdas]
        assert d0s[1] < d0s[0]

    def test_triangle_consistency(self, mini_cells):
        _, ladder = mini_cells
        for cell in ladder.values():
            v_by = {}
            for r in cell.actual_rows:
                v_by.setdefault(r.t, []).append(r.v_hs)
            for c in cell.cross_rows:
                bound = sum(v_by[c.t]) + 1e-12
                assert abs(c.d_t - c.approx_gap) <= bound

    def test_verdicts(self, mini_spec, mini_cfg, mini_cells):
        _, ladder = mini_cells
        rep = e5_nonuniform_dependence(mini_spec, mini_cfg, cells=ladder)
        by_id = {v.verdict_id: v for v in rep.verdicts}
        assert by_id["e5.d0_slope"].passed
        assert by_id["e5.d0_prefactor"].passed
        assert by_id["e5.families_bounded"].passed
        lower = [v for v in rep.verdicts if v.verdict_id.startswith("e5.lower_bound")]
        assert lower and all(v.passed for v in lower)


class TestDeterminism:
    def test_ladder_cell_bit_identical(self):
        spec = LadderSpec(lambdas=(8.0, 16.0))
        cfg = SolverConfig()
        c1 = compute_ladder_cell(8.0, spec, cfg, need_actual=True)
        c2 = compute_ladder_cell(8.0, spec, cfg, need_actual=True)
        assert c1 == c2


class TestLadderSpec:
    def test_defaults(self):
        spec = LadderSpec()
        assert spec.lambdas == (16.0, 32.0, 64.0, 128.0)
        assert spec.k_growth == 4

    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            LadderSpec(lambdas=(16.0, 8.0))

    def test_rejects_sample_off_record_grid(self):
        spec = LadderSpec(lambdas=(8.0, 16.0), t_samples=(0.0, 0.3))
        with pytest.raises(ValueError):
            spec.validate_against(SolverConfig())

    def test_exponent_table(self):
        exps = TERM_EXPONENTS(2.0, 1.5)
        assert exps == (-1.25, -3.5, -2.0, -2.75, -3.0, -4.75, -2.0, -2.75)


class TestReferenceNorms:
    def test_values_stable(self):
        # pinned reference magnitudes (loose brackets, protect against
        # accidental convention changes)
        l2_phi = ref_bump_norm(PHI.inner_radius, PHI.outer_radius, 0.0)
        l2_phit = ref_bump_norm(PHI_TILDE.inner_radius, PHI_TILDE.outer_radius, 0.0)
        assert 1.6 < l2_phi < 1.8
        assert 2.1 < l2_phit < 2.3
        h2_phit = ref_bump_norm(PHI_TILDE.inner_radius, PHI_TILDE.outer_radius, 2.0)
        assert 7.0 < h2_phit < 9.5
