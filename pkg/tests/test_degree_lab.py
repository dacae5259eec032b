from __future__ import annotations

import pytest

from relcat.approx import DeltaApprox, encode_set, pair3, pair4, unpair3
from relcat.coding import build_symbolic, inst1, random_instance
from relcat.degree_lab import (
    DecodeExhaustionError,
    DishonestScenarioError,
    OperatorTable,
    build_ledger,
    compute_E_t,
    decide_E_with_D,
    decode_C,
    decode_D_complement,
    decode_report,
    honest_scenario,
)
from relcat.scott import generate_scott_family


@pytest.fixture(scope="module")
def lab():
    inst = inst1()
    g = build_symbolic(inst)
    fam = generate_scott_family(g, 1)
    return inst, fam


@pytest.fixture(scope="module")
def honest(lab):
    inst, fam = lab
    v, d = honest_scenario(inst, fam)
    return inst, fam, v, d


class TestOperatorTable:
    def test_rejects_non_monotone(self):
        with pytest.raises(ValueError):
            OperatorTable(1, (frozenset({0}), frozenset()))

    def test_empty(self):
        t = OperatorTable.empty(3)
        assert t.at(2) == frozenset()


class TestComputeEt:
    def test_t_zero(self, lab):
        inst, fam = lab
        v = OperatorTable.empty(inst.stage_bound)
        d = DeltaApprox.constant([0] * 4, 17)
        assert compute_E_t(v, d, inst, fam, 0) == frozenset()

    def test_empty_v_vacuity(self, lab):
        inst, fam = lab
        v = OperatorTable.empty(inst.stage_bound)
        d = DeltaApprox.constant([0] * 4, 17)
        for t in (1, 5, 10):
            assert compute_E_t(v, d, inst, fam, t) == frozenset(range(t))

    def test_stage_out_of_range(self, lab):
        inst, fam = lab
        v = OperatorTable.empty(inst.stage_bound)
        d = DeltaApprox.constant([0] * 4, 17)
        with pytest.raises(ValueError):
            compute_E_t(v, d, inst, fam, 17)

    def test_pinned_triple_excluded_past_activation(self, honest):
        # frozen oracle: the never-rejected pin formula keeps matched guesses out
        # of E_t once the certifying stage p has passed
        inst, fam, v, d = honest
        p0 = next(p for p in range(v.bound + 1) if v.at(p))
        code = pair3(1, 1, 0)  # x=1 is in the limit set, guess y=1 is right
        for t in range(p0 + 1, inst.stage_bound + 1):
            assert code not in compute_E_t(v, d, inst, fam, t)

    def test_members_recompute(self, honest):
        inst, fam, v, d = honest
        ledger = build_ledger(v, d, inst, fam, 10)
        for t in range(11):
            assert ledger.stages[t] == compute_E_t(v, d, inst, fam, t)


class TestDecideE:
    def test_wrong_guess_always_in(self, honest):
        inst, fam, v, d = honest
        assert decide_E_with_D(v, d, inst, fam, (0, 1, 2))
        assert decide_E_with_D(v, d, inst, fam, (1, 0, 5))

    def test_empty_v_dishonest(self, lab):
        inst, fam = lab
        v = OperatorTable.empty(inst.stage_bound)
        d = DeltaApprox.constant([1 if x in inst.ground_d else 0 for x in range(4)], 17)
        with pytest.raises(DishonestScenarioError):
            decide_E_with_D(v, d, inst, fam, (1, 1, 0))

    def test_agreement_with_ledger(self, honest):
        inst, fam, v, d = honest
        ledger = build_ledger(v, d, inst, fam, inst.stage_bound)
        for code in range(inst.stage_bound):
            x, y, s = unpair3(code)
            assert decide_E_with_D(v, d, inst, fam, (x, y, s)) == ledger.member(code)


class TestHonestScenario:
    def test_certificate_shape(self, honest):
        inst, fam, v, d = honest
        pin_set = encode_set({3})
        assert any(
            pair4(1, 1, pin_set, c) in v.at(v.bound) for c in range(pin_set)
        )
        assert d.limit(1) == 1 and d.limit(0) == 0

    def test_randomized_instances(self):
        for seed in (2, 5, 8):
            inst = random_instance(seed)
            fam = generate_scott_family(build_symbolic(inst), 1)
            v, d = honest_scenario(inst, fam)
            ledger = build_ledger(v, d, inst, fam, inst.stage_bound)
            for code in range(inst.stage_bound):
                x, y, s = unpair3(code)
                assert decide_E_with_D(v, d, inst, fam, (x, y, s)) == ledger.member(code)


class TestDecode:
    def test_inst1_c(self, lab):
        inst, fam = lab
        assert decode_C(fam, inst, 1) is True
        assert decode_C(fam, inst, 0) is False
        assert decode_C(fam, inst, 3) is False

    def test_inst1_d_complement(self, lab):
        inst, fam = lab
        assert decode_D_complement(fam, inst, 0) is True
        assert decode_D_complement(fam, inst, 1) is False
        assert decode_D_complement(fam, inst, 3) is False

    def test_report_matches_truth(self, lab):
        inst, fam = lab
        for row in decode_report(fam, inst):
            assert row["c_decoded"] == row["c_truth"]
            assert row["d_comp_decoded"] == row["d_comp_truth"]

    def test_exhaustion_reported(self, lab):
        inst, fam = lab
        # a family with no unary entries can never answer
        from relcat.scott import ScottFamily

        empty = ScottFamily(fam.parameters, (), fam.world)
        with pytest.raises(DecodeExhaustionError):
            decode_C(empty, inst, 1)

    def test_positive_answers_match_orbit_criterion(self, lab):
        inst, fam = lab
        from relcat.structures import OrbitQuery, V, W, orbit_equivalent

        g = build_symbolic(inst)
        for x in range(4):
            expected = x not in inst.ground_d
            if g.records[x].wchain_len == 0:
                # no w-head to pair with; the decoder answers False by exhaustion
                assert decode_D_complement(fam, inst, x) is False
                continue
            assert decode_D_complement(fam, inst, x) == orbit_equivalent(
                g, OrbitQuery((V(x, 0),), (W(x, 0),))
            ) == expected
