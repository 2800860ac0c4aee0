import math

import numpy as np
import pytest

from asymcsit import (
    CsitQuality,
    SchemeConditionError,
    SchemePlan,
    SlotPlan,
    SymbolLayer,
    build_case_i,
    build_case_ii,
    build_case_ii_alt,
    build_ges12_asym,
    build_preset,
    build_sc_zf,
    contains,
    corner_points,
    dof_region,
    plan_as_dict,
    validate_plan,
)
from asymcsit.geometry import DofPoint
from asymcsit.schemes import (
    OWNER_COMMON,
    OWNER_USER1,
    OWNER_USER2,
    QuantizationLink,
    first_antenna,
    orth_to,
)


def _random_case_i_quality(rng):
    a2 = rng.uniform(0.5, 1.0)
    a1 = rng.uniform(0.0, 2.0 * a2 - 1.0)
    return CsitQuality(a1, a2)


def _random_case_ii_quality(rng):
    while True:
        a2 = rng.uniform(0.0, 1.0)
        a1 = rng.uniform(max(0.0, 2.0 * a2 - 1.0), a2)
        if 2.0 * a2 - a1 < 1.0 - 1e-9:
            return CsitQuality(a1, a2)


def _cycle_prelog_sums(plan):
    per = {OWNER_USER1: 0.0, OWNER_USER2: 0.0}
    per_cycle = len(plan.cycle_slots) // plan.n_cycles
    for slot in plan.cycle_slots[:per_cycle]:
        for owner in per:
            per[owner] += sum(l.encoding_prelog for l in slot.fresh(owner))
    return per[OWNER_USER1], per[OWNER_USER2]


class TestPredictedDof:
    def test_ges12_examples(self):
        assert build_ges12_asym(CsitQuality(0.3, 0.5)).predicted_dof.as_tuple() == pytest.approx(
            (0.7, 2.5 / 3), abs=1e-12
        )
        assert build_ges12_asym(CsitQuality(0.0, 0.0)).predicted_dof.as_tuple() == pytest.approx(
            (2 / 3, 2 / 3), abs=1e-12
        )

    def test_ges12_symmetric_is_optimal(self):
        for alpha in (0.2, 0.5, 0.9):
            plan = build_ges12_asym(CsitQuality(alpha, alpha))
            assert plan.predicted_dof.as_tuple() == pytest.approx(
                ((2 + alpha) / 3, (2 + alpha) / 3), abs=1e-12
            )

    def test_case_i_examples(self):
        assert build_case_i(CsitQuality(0.2, 0.8), 2).predicted_dof.as_tuple() == pytest.approx(
            (0.6, 1.0), abs=1e-12
        )
        assert build_case_i(CsitQuality(1.0, 1.0), 2).predicted_dof.as_tuple() == pytest.approx(
            (1.0, 1.0), abs=1e-12
        )

    def test_case_ii_examples(self):
        assert build_case_ii(CsitQuality(0.3, 0.5), 2).predicted_dof.as_tuple() == pytest.approx(
            (0.7, 0.9), abs=1e-12
        )
        assert build_case_ii(CsitQuality(0.0, 0.0), 2).predicted_dof.as_tuple() == pytest.approx(
            (2 / 3, 2 / 3), abs=1e-12
        )

    def test_case_ii_alt_examples(self):
        assert build_case_ii_alt(CsitQuality(0.3, 0.5), 2).predicted_dof.as_tuple() == pytest.approx(
            (0.5, 1.0), abs=1e-12
        )
        assert build_case_ii_alt(CsitQuality(0.0, 0.0), 2).predicted_dof.as_tuple() == pytest.approx(
            (0.0, 1.0), abs=1e-12
        )

    def test_sc_zf_examples(self):
        assert build_sc_zf(CsitQuality(0.3, 0.5)).predicted_dof.as_tuple() == pytest.approx(
            (1.0, 0.3), abs=1e-12
        )
        assert build_sc_zf(CsitQuality(0.0, 0.7)).predicted_dof.as_tuple() == pytest.approx(
            (1.0, 0.0), abs=1e-12
        )
        assert build_sc_zf(CsitQuality(1.0, 1.0)).predicted_dof.as_tuple() == pytest.approx(
            (1.0, 1.0), abs=1e-12
        )


class TestCaseSplit:
    def test_case_i_rejects_interior_quality(self):
        with pytest.raises(SchemeConditionError, match=r"2\*alpha2 - alpha1 >= 1"):
            build_case_i(CsitQuality(0.3, 0.5), 2)

    def test_case_ii_rejects_outer_quality(self):
        with pytest.raises(SchemeConditionError, match=r"2\*alpha2 - alpha1 < 1"):
            build_case_ii(CsitQuality(0.2, 0.8), 2)

    def test_case_ii_alt_rejects_outer_quality(self):
        with pytest.raises(SchemeConditionError):
            build_case_ii_alt(CsitQuality(0.2, 0.8), 2)

    def test_boundary_routes_to_case_i(self):
        q = CsitQuality(0.2, 0.6)  # 2*a2 - a1 = 1 exactly
        assert build_preset("auto", q, 2).name == "case-i"
        build_case_i(q, 2)  # no error

    def test_auto_selection(self):
        assert build_preset("auto", CsitQuality(0.3, 0.5), 2).name == "case-ii"
        assert build_preset("auto", CsitQuality(0.2, 0.8), 2).name == "case-i"

    def test_unknown_preset(self):
        with pytest.raises(ValueError, match="unknown preset"):
            build_preset("nope", CsitQuality(0.3, 0.5), 2)

    def test_n_cycles_validated(self):
        with pytest.raises(ValueError):
            build_case_ii(CsitQuality(0.3, 0.5), 0)


class TestBookkeeping:
    def test_case_i_rates_exact(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            q = _random_case_i_quality(rng)
            plan = build_case_i(q, 3)
            s1, s2 = _cycle_prelog_sums(plan)
            assert abs(s1 / plan.cycle_channel_uses - (1 + q.alpha1) / 2) <= 1e-12
            assert abs(s2 / plan.cycle_channel_uses - 1.0) <= 1e-12

    def test_case_ii_rates_exact(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            q = _random_case_ii_quality(rng)
            plan = build_case_ii(q, 3)
            s1, s2 = _cycle_prelog_sums(plan)
            assert abs(s1 / 3 - (2 + 2 * q.alpha1 - q.alpha2) / 3) <= 1e-12
            assert abs(s2 / 3 - (2 + 2 * q.alpha2 - q.alpha1) / 3) <= 1e-12

    def test_ges12_deficit_is_third_of_gap(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            q = _random_case_ii_quality(rng)
            plan = build_ges12_asym(q)
            corner = corner_points(q)[2]
            assert abs((corner.d2 - plan.predicted_dof.d2) - q.delta() / 3) <= 1e-12


class TestTablePowers:
    def test_case_i_small_slot_rows(self):
        q = CsitQuality(0.2, 0.8)
        plan = build_case_i(q, 1)
        _, v32 = plan.find_layer("v3_2")
        assert v32.power_coefficient == pytest.approx(0.25)
        assert v32.power_exponent == pytest.approx(q.delta())
        assert v32.encoding_prelog == pytest.approx(q.delta())
        _, u3 = plan.find_layer("u3")
        assert (u3.power_coefficient, u3.power_exponent) == (0.5, 0.8)
        assert u3.encoding_prelog == pytest.approx(0.8)
        _, carrier = plan.find_layer("eta_hat_3_1")
        assert carrier.power_sub_exponent == pytest.approx(1 - q.delta())
        assert carrier.encoding_prelog == pytest.approx(q.delta())

    def test_case_ii_big_slot_rows(self):
        q = CsitQuality(0.3, 0.5)
        plan = build_case_ii(q, 1)
        _, u41 = plan.find_layer("u4_1")
        assert u41.power_exponent == pytest.approx(0.8)
        assert u41.power_sub_exponent == pytest.approx(0.3)
        assert u41.encoding_prelog == pytest.approx(0.8)
        _, u42 = plan.find_layer("u4_2")
        assert u42.encoding_prelog == pytest.approx(0.3)
        _, v42 = plan.find_layer("v4_2")
        assert v42.encoding_prelog == pytest.approx(0.5)
        # slot 6 stacked carriers over disjoint power intervals
        _, top = plan.find_layer("eta_hat_4_2")
        _, second = plan.find_layer("eta_hat_5_1")
        assert (top.power_exponent, top.power_sub_exponent) == pytest.approx((1.0, 0.7))
        assert (second.power_exponent, second.power_sub_exponent) == pytest.approx((0.7, 0.5))
        assert top.encoding_prelog == pytest.approx(0.3)
        assert second.encoding_prelog == pytest.approx(0.2)

    def test_case_ii_alt_substitution(self):
        q = CsitQuality(0.3, 0.5)
        plan = build_case_ii_alt(q, 1)
        _, u4 = plan.find_layer("u4")
        assert u4.power_exponent == pytest.approx(0.5)
        assert u4.encoding_prelog == pytest.approx(0.5)
        # user-2 vector keeps the case-i allocation
        _, v41 = plan.find_layer("v4_1")
        assert v41.power_exponent == pytest.approx(1 - q.delta())

    def test_layer_power_floor(self):
        layer = SymbolLayer("x", OWNER_USER1, orth_to(2), 0.5, 1.0, 1.0,
                            power_sub_coefficient=1.0, power_sub_exponent=1.0)
        assert layer.power(100.0) == 0.0


class TestDegenerateDrops:
    def test_symmetric_drops_gap_layers(self):
        plan = build_case_ii(CsitQuality(0.4, 0.4), 1)
        ids = {l.id for s in plan.all_slots() for l in s.layers}
        for absent in ("v3_2", "eta_hat_3_1", "eta_hat_5_1"):
            assert absent not in ids
        assert "eta_hat_4_2" in ids

    def test_no_csit_reduces_to_three_slot_shape(self):
        plan = build_case_ii(CsitQuality(0.0, 0.0), 1)
        slot4 = plan.slot(4)
        assert len(slot4.fresh(OWNER_USER1)) == 2
        assert len(slot4.fresh(OWNER_USER2)) == 2
        assert slot4.commons(1e6) == []
        # slots 5 and 6 are pure retransmission
        assert plan.slot(5).fresh(OWNER_USER1) == [] and plan.slot(5).fresh(OWNER_USER2) == []
        assert len(plan.slot(6).commons(1e6)) == 1

    def test_perfect_csit_drops_all_links(self):
        plan = build_case_i(CsitQuality(1.0, 1.0), 2)
        assert plan.links == ()
        assert all(l.precoder.kind != "first_antenna" for s in plan.all_slots() for l in s.layers)

    def test_sc_zf_perfect_csit_drops_common(self):
        plan = build_sc_zf(CsitQuality(1.0, 1.0))
        assert {l.id for l in plan.slot(1).layers} == {"u1", "v1"}


class TestValidation:
    @pytest.mark.parametrize("name,a1,a2", [
        ("ges12-asym", 0.3, 0.5),
        ("case-ii", 0.3, 0.5),
        ("case-ii-alt", 0.3, 0.5),
        ("case-i", 0.2, 0.8),
        ("sc-zf", 0.3, 0.5),
        ("case-ii", 0.0, 0.0),
        ("case-i", 1.0, 1.0),
    ])
    def test_presets_validate_clean(self, name, a1, a2):
        plan = build_preset(name, CsitQuality(a1, a2), 3)
        assert validate_plan(plan) == []

    def test_power_budget_diagnostic(self):
        q = CsitQuality(0.3, 0.5)
        slot = SlotPlan(1, (
            SymbolLayer("a", OWNER_USER1, orth_to(2), 1.0, 1.0, 1.0),
            SymbolLayer("b", OWNER_USER2, orth_to(1), 1.0, 1.0, 1.0),
        ))
        plan = SchemePlan("hand", q, (slot,), (), (), DofPoint(0, 0), 1.0, 0.0, 0)
        diags = validate_plan(plan)
        assert any("power budget exceeded" in d for d in diags)

    def test_causality_diagnostic(self):
        q = CsitQuality(0.3, 0.5)
        carrier = SymbolLayer("eta_hat_2_1", OWNER_COMMON, first_antenna(), 1.0, 1.0, 0.5, 1.0, 0.5)
        slot1 = SlotPlan(1, (carrier,))
        slot2 = SlotPlan(2, (
            SymbolLayer("u2", OWNER_USER1, orth_to(2), 0.5, 0.5, 0.5),
            SymbolLayer("v2", OWNER_USER2, orth_to(1), 0.5, 0.5, 0.5),
        ))
        link = QuantizationLink(2, OWNER_USER1, "eta_2_1", 0.5 - 0.3, "eta_hat_2_1")
        plan = SchemePlan("hand", q, (slot1, slot2), (), (link,), DofPoint(0, 0), 2.0, 0.0, 0)
        diags = validate_plan(plan)
        assert any("causality violated" in d for d in diags)

    def test_quant_rate_mismatch_diagnostic(self):
        from asymcsit.schemes import perturb_link_prelog

        plan = build_case_ii(CsitQuality(0.3, 0.5), 1)
        bad = perturb_link_prelog(plan, "eta_4_1", -0.1)
        diags = validate_plan(bad)
        assert any("quantization rate mismatch" in d for d in diags)

    def test_quant_rates_match_received_exponents(self):
        rng = np.random.default_rng(14)
        for _ in range(10):
            q = _random_case_ii_quality(rng)
            plan = build_case_ii(q, 2)
            for link in plan.links:
                owner = OWNER_USER2 if link.observer == OWNER_USER1 else OWNER_USER1
                src = plan.slot(link.source_slot).fresh(owner)
                alpha = q.alpha1 if link.observer == OWNER_USER1 else q.alpha2
                assert abs(link.quant_prelog - (max(l.power_exponent for l in src) - alpha)) <= 1e-12


class TestRegionConsistency:
    @pytest.mark.parametrize("name", ["case-i", "case-ii", "case-ii-alt", "sc-zf", "ges12-asym"])
    def test_predicted_inside_region_and_on_corner(self, name):
        rng = np.random.default_rng(15)
        for _ in range(10):
            if name in ("case-ii", "case-ii-alt"):
                q = _random_case_ii_quality(rng)
            elif name == "case-i":
                q = _random_case_i_quality(rng)
            else:
                a1 = rng.uniform(0, 1)
                q = CsitQuality(a1, rng.uniform(a1, 1))
            plan = build_preset(name, q, 2)
            region = dof_region(q)
            assert contains(region, plan.predicted_dof, tol=1e-9)
            if name != "ges12-asym":
                corners = corner_points(q)
                dist = min(
                    math.hypot(c.d1 - plan.predicted_dof.d1, c.d2 - plan.predicted_dof.d2)
                    for c in corners
                )
                assert dist <= 1e-9


def test_plan_serialization_round_trip():
    plan = build_case_ii(CsitQuality(0.3, 0.5), 2)
    d = plan_as_dict(plan)
    assert d["name"] == "case-ii"
    assert d["n_cycles"] == 2
    assert len(d["slots"]) == len(plan.all_slots())
    assert len(d["links"]) == len(plan.links)
    ids = {l["id"] for s in d["slots"] for l in s["layers"]}
    assert {"u3", "v4_2", "eta_hat_3_1"} <= ids
