import numpy as np
import pytest

from hesscond import (
    CorrelationMatrix,
    HessianModel,
    check_circulant_exactness,
    compute_bounds_report,
    factored_bounds,
    general_bounds,
    haben_bounds,
    kappa_via_rank_p,
    make_operator,
)

from conftest import make_model

SLACK = 1e-8


def identity_model(kind="alternate", n=8, p=4):
    return HessianModel(
        background=CorrelationMatrix(np.eye(n)),
        observation=CorrelationMatrix(np.eye(p)),
        operator=make_operator(kind, p, n),
    )


class TestIdentityLimits:
    def test_general_bounds_collapse_to_two(self):
        lower, upper = general_bounds(identity_model())
        np.testing.assert_allclose(lower, [2.0, 2.0, 2.0], atol=1e-12)
        np.testing.assert_allclose(upper, [2.0, 2.0], atol=1e-12)

    def test_factored_bounds_collapse(self):
        lower, upper = factored_bounds(identity_model())
        np.testing.assert_allclose(lower, [2.0, 2.0], atol=1e-12)
        assert upper == pytest.approx(2.0, abs=1e-12)

    def test_haben_bounds_collapse(self):
        lower, upper = haben_bounds(identity_model())
        assert lower == pytest.approx(2.0, abs=1e-12)
        assert upper == pytest.approx(2.0, abs=1e-12)


SAMPLE_CELLS = [
    ("first-half", 0.1, 1.0), ("first-half", 1.0, 0.1),
    ("alternate", 0.5, 0.2), ("alternate", 0.2, 0.9),
    ("smoothed-alternate", 0.7, 0.7), ("smoothed-alternate", 0.05, 1.0),
    ("random-direct", 0.3, 0.6), ("random-direct", 0.9, 0.05),
]


class TestSandwich:
    @pytest.mark.parametrize("kind,lb,lr", SAMPLE_CELLS)
    def test_all_three_families(self, kind, lb, lr):
        model = make_model(kind, lb, lr)
        kappa = kappa_via_rank_p(model)
        slack = SLACK * kappa
        gl, gu = general_bounds(model)
        assert max(gl) <= kappa + slack
        assert kappa <= min(gu) + slack
        fl, fu = factored_bounds(model)
        assert max(fl) <= kappa + slack
        assert kappa <= fu + slack
        hl, hu = haben_bounds(model)
        assert hl <= kappa + slack
        assert kappa <= hu + slack

    @pytest.mark.parametrize("kind,lb,lr", SAMPLE_CELLS)
    def test_factored_never_tighter_than_general(self, kind, lb, lr):
        model = make_model(kind, lb, lr)
        gl, gu = general_bounds(model)
        fl, fu = factored_bounds(model)
        assert max(fl) <= max(gl) + 1e-10
        assert fu >= min(gu) - 1e-10


class TestTermBehaviour:
    def test_direct_first_lower_dominates(self):
        # All eigenvalues of HH.T are one for direct observations, so the
        # first factored lower candidate always beats the second.
        for kind in ("first-half", "alternate", "random-direct"):
            for lb, lr in ((0.1, 0.9), (0.5, 0.5), (0.9, 0.1)):
                fl, _ = factored_bounds(make_model(kind, lb, lr))
                assert fl[0] >= fl[1] - 1e-12

    def test_factored_lower_beats_row_sum_lower_here(self):
        # Verified on this cell: small L_B with large L_R is the regime
        # where the factored lower candidate is the tightest lower bound.
        model = make_model("alternate", 0.1, 1.0)
        fl, _ = factored_bounds(model)
        hl, _ = haben_bounds(model)
        assert fl[0] > hl
        assert fl[0] > 100.0 and hl < 2.0

    def test_degenerate_background_floor(self):
        # At L_B = 1 the smallest eigenvalue of B is ~2.6e-6, so the first
        # general lower candidate collapses towards 1.
        gl, _ = general_bounds(make_model("alternate", 1.0, 0.5))
        assert 1.0 < gl[0] < 1.2

    def test_directional_responses(self):
        ls = (0.1, 0.3, 0.5, 0.7, 0.9)
        for kind in ("alternate", "first-half"):
            # Factored upper nondecreasing in L_R at fixed L_B.
            uppers = [factored_bounds(make_model(kind, 0.5, lr))[1] for lr in ls]
            assert all(a <= b + 1e-12 for a, b in zip(uppers[:-1], uppers[1:]))
            # Factored upper nondecreasing in L_B at fixed L_R.
            uppers = [factored_bounds(make_model(kind, lb, 0.5))[1] for lb in ls]
            assert all(a <= b + 1e-12 for a, b in zip(uppers[:-1], uppers[1:]))
            # Both factored lower candidates nonincreasing in L_B.
            lowers = [factored_bounds(make_model(kind, lb, 0.5))[0] for lb in ls]
            for idx in (0, 1):
                seq = [lo[idx] for lo in lowers]
                assert all(a >= b - 1e-12 for a, b in zip(seq[:-1], seq[1:]))


class TestCirculantExactness:
    def test_alternate_product_is_circulant(self):
        diag = check_circulant_exactness(make_model("alternate", 0.5, 0.3))
        assert diag.shift_defect_hbht <= 1e-10
        assert diag.shift_defect_r <= 1e-10
        assert diag.exact

    def test_smoothed_product_is_circulant(self):
        diag = check_circulant_exactness(make_model("smoothed-alternate", 0.5, 0.3))
        assert diag.shift_defect_hbht <= 1e-10
        assert diag.exact

    def test_first_half_block_not_circulant(self):
        # The leading block of a circulant matrix is Toeplitz, not circulant;
        # the measured defect at n=16 is ~0.6.
        diag = check_circulant_exactness(make_model("first-half", 0.3, 0.3, n=16, p=8))
        assert diag.shift_defect_hbht > 0.1
        assert not diag.exact

    def test_negative_entries_break_exactness(self):
        # Verified cell: the product is exactly circulant yet carries large
        # negative entries, so the row-sum bounds are not exact.
        model = make_model("alternate", 0.1, 0.9)
        diag = check_circulant_exactness(model)
        assert diag.shift_defect_hbht <= 1e-10
        assert diag.most_negative_entry < -1e-12
        assert not diag.exact
        hl, hu = haben_bounds(model)
        kappa = kappa_via_rank_p(model)
        assert hu - hl > 1e-6 * kappa

    def test_positive_regime_cell(self):
        # Verified cell: L_B >= L_R keeps every product entry positive here.
        diag = check_circulant_exactness(make_model("smoothed-alternate", 0.9, 0.1))
        assert diag.most_negative_entry > 0
        assert diag.exact

    def test_equal_lengthscales_roundoff_blocks_certificate(self):
        # With L_B = L_R the product is the identity up to roundoff scaled by
        # kappa(R), which undershoots the -1e-12 sign floor; the diagnostic
        # then conservatively refuses to certify exactness.
        diag = check_circulant_exactness(make_model("alternate", 0.5, 0.5))
        assert not diag.exact
        assert -1e-9 < diag.most_negative_entry < -1e-12

    @pytest.mark.parametrize("kind,lb,lr", [
        ("alternate", 0.5, 0.3), ("alternate", 0.8, 0.5),
        ("smoothed-alternate", 0.9, 0.1), ("smoothed-alternate", 0.6, 0.45),
    ])
    def test_exactness_implies_row_sum_bounds_tight(self, kind, lb, lr):
        model = make_model(kind, lb, lr)
        assert check_circulant_exactness(model).exact
        hl, hu = haben_bounds(model)
        kappa = kappa_via_rank_p(model)
        assert abs(hu - hl) <= SLACK * kappa
        assert abs(hu - kappa) <= SLACK * kappa
        assert abs(hl - kappa) <= SLACK * kappa


class TestBoundsReport:
    def test_report_consistent_with_individual_calls(self):
        model = make_model("alternate", 0.4, 0.6)
        rep = compute_bounds_report(model)
        gl, gu = general_bounds(model)
        fl, fu = factored_bounds(model)
        hl, hu = haben_bounds(model)
        assert rep.general_lower_terms == pytest.approx(gl)
        assert rep.general_upper_terms == pytest.approx(gu)
        assert rep.factored_lower_terms == pytest.approx(fl)
        assert rep.factored_upper == pytest.approx(fu)
        assert rep.haben_lower == pytest.approx(hl)
        assert rep.haben_upper == pytest.approx(hu)
        assert rep.kappa_exact == pytest.approx(kappa_via_rank_p(model), rel=1e-12)

    def test_csv_dict_carries_descriptor_and_terms(self):
        rep = compute_bounds_report(make_model("random-direct", 0.4, 0.6, seed=11))
        d = rep.to_csv_dict()
        for key in (
            "operator", "n", "p", "lengthscale_b", "lengthscale_r", "sigma_b",
            "sigma_r", "seed", "kappa_exact", "general_lower_1", "general_upper_2",
            "factored_lower_2", "factored_upper", "haben_lower", "haben_upper",
            "exactness_flag", "most_negative_entry",
        ):
            assert key in d
        assert d["seed"] == 11
