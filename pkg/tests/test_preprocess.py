"""
Tests for the preprocessing pipeline. The fixture cases pin exact values;
the random suite checks that nothing preprocessing derives ever cuts away
every valid order.
"""

import json

import pytest

from ctop.bitset import iter_bits
from ctop.instance_io import gen_wheel
from ctop.oracle import Instance, ranks_of
from ctop.preprocess import (
    RULE_NEIGHBOURHOOD,
    RULE_SMALL_DEGREE,
    ConditionalPrecede,
    FixRank,
    Precede,
    PreprocessError,
    PreprocessReport,
    check_large_degree_lb,
    check_max_stable_set,
    check_min_degree,
    check_min_edges,
    check_small_degree_ub,
    detect_symmetry_breaking,
    generate_valid_inequalities,
    infeasible_subsets,
    preprocess,
    rank_capacity,
    reduce_domains,
    run_checks,
    stable_set_threshold,
    symmetry_priority,
)

from conftest import RANDOM_SEEDS


def holds(constraint, ranks, k):
    if isinstance(constraint, FixRank):
        return ranks[constraint.vertex] == constraint.rank
    if isinstance(constraint, Precede):
        return ranks[constraint.before] < ranks[constraint.after]
    if isinstance(constraint, ConditionalPrecede):
        if abs(ranks[constraint.v] - ranks[constraint.w]) <= k:
            return True
        return ranks[constraint.before] < ranks[constraint.after]
    raise TypeError(constraint)


def spans(inequality, ranks, k):
    members = [ranks[v] for v in inequality.members]
    if inequality.pairwise:
        return all(
            abs(a - b) >= k + 1
            for i, a in enumerate(members)
            for b in members[i + 1 :]
        )
    return max(members) - min(members) >= inequality.min_span


def test_min_degree_check(fixture_instance):
    verdict = check_min_degree(fixture_instance("fig4", 3))
    assert verdict.infeasible
    assert verdict.check == "min_degree"
    assert verdict.witness == (0, 4)

    assert not check_min_degree(fixture_instance("fig4", 2)).infeasible


def test_min_edges_check(fixture_instance):
    verdict = check_min_edges(fixture_instance("fig4", 2))
    assert verdict.infeasible
    assert verdict.detail == "m=8 < bound 9"

    # bound 7 is met with equality
    assert not check_min_edges(fixture_instance("fig5b", 2)).infeasible

    w7 = check_min_edges(fixture_instance("w7", 3))
    assert w7.detail == "m=12 < bound 15"


def test_small_degree_check(fixture_instance):
    verdict = check_small_degree_ub(fixture_instance("fig5b", 2))
    assert verdict.infeasible
    assert verdict.witness == 1
    assert "only 4 ranks" in verdict.detail

    # four degree-3 vertices, two end ranks
    fig5a = check_small_degree_ub(fixture_instance("fig5a", 3))
    assert fig5a.infeasible
    assert fig5a.witness == 0
    assert "only 2 ranks" in fig5a.detail


def test_rank_capacity():
    assert rank_capacity(6, 2, 2) == 2
    assert rank_capacity(6, 2, 3) == 4
    assert rank_capacity(6, 2, 4) == 6
    assert rank_capacity(7, 3, 3) == 2


def test_large_degree_check(fixture_instance):
    assert check_large_degree_lb(fixture_instance("fig4", 2)).infeasible
    assert not check_large_degree_lb(fixture_instance("fig8", 3)).infeasible
    # n < 2K + 1 is never decided here
    assert not check_large_degree_lb(fixture_instance("fig5a", 3)).infeasible

    # no vertex of degree 2K for the one middle rank
    fig5b = check_large_degree_lb(fixture_instance("fig5b", 2))
    assert fig5b.infeasible
    assert fig5b.witness == 0


def test_max_stable_set_check(fixture_instance):
    assert stable_set_threshold(7, 3) == pytest.approx(2.75)

    verdict = check_max_stable_set(fixture_instance("w7", 3))
    assert verdict.infeasible
    assert verdict.witness == (1, 3, 5)
    assert "> 2.75" in verdict.detail


def test_max_stable_set_check_falls_back_when_truncated(fixture_instance):
    verdict = check_max_stable_set(fixture_instance("w7", 3), cap=1)
    assert verdict.infeasible
    assert len(verdict.witness) == 3


def test_run_checks_order(fixture_instance):
    first = run_checks(fixture_instance("fig4", 2))
    assert [v.check for v in first] == ["min_edges"]

    every = run_checks(fixture_instance("fig4", 2), first_hit=False)
    assert [v.check for v in every] == [
        "min_edges",
        "small_degree_ub",
        "large_degree_lb",
    ]

    w7 = run_checks(fixture_instance("w7", 3), first_hit=False)
    assert [v.check for v in w7] == [
        "min_edges",
        "small_degree_ub",
        "max_stable_set",
    ]


@pytest.mark.parametrize(
    "name, k, check",
    [
        ("fig4", 2, "min_edges"),
        ("fig4", 3, "min_degree"),
        ("fig5a", 3, "min_edges"),
        ("fig5b", 2, "small_degree_ub"),
        ("fig12a", 3, "min_degree"),
        ("fig12b", 3, "min_degree"),
        ("w7", 3, "min_edges"),
    ],
)
def test_first_check_on_fixtures(fixture_instance, name, k, check):
    fired = run_checks(fixture_instance(name, k))
    assert [v.check for v in fired] == [check]


@pytest.mark.parametrize("n", [6, 7, 9, 12])
def test_wheels_at_two_fail_small_degree(n):
    fired = run_checks(Instance(gen_wheel(n), 2))
    assert fired[0].check == "small_degree_ub"
    assert fired[0].witness == 1


@pytest.mark.parametrize("n", [5, 6, 8])
@pytest.mark.parametrize("k", [3, 4])
def test_wheels_fail_edge_bound(n, k):
    fired = run_checks(Instance(gen_wheel(n), k), first_hit=False)
    assert "min_edges" in [v.check for v in fired]


def test_wheel_five_passes_at_two():
    assert run_checks(Instance(gen_wheel(5), 2), first_hit=False) == []


def test_domain_reduction_small_degree(fixture_instance):
    reduction = reduce_domains(fixture_instance("fig6", 2))
    domains = [set(iter_bits(mask)) for mask in reduction.domains]

    assert domains[0] == {0, 1, 4, 5}
    assert domains[4] == {0, 5}
    assert domains[2] == set(range(6))
    assert RULE_SMALL_DEGREE in reduction.rules
    assert not reduction.verdict.infeasible


def test_domain_reduction_neighbourhood(fixture_instance):
    reduction = reduce_domains(fixture_instance("fig7", 2))
    domains = [set(iter_bits(mask)) for mask in reduction.domains]

    assert domains[0] == {0, 1, 6, 7}
    assert domains[7] == {0, 7}
    assert domains[4] == {0, 1, 2, 5, 6, 7}
    assert domains[5] == {0, 1, 2, 5, 6, 7}
    assert reduction.rules == (RULE_SMALL_DEGREE, RULE_NEIGHBOURHOOD)


def test_domain_reduction_needs_min_degree(fixture_instance):
    with pytest.raises(PreprocessError):
        reduce_domains(fixture_instance("fig4", 3))


def test_symmetry_priority(fixture_instance):
    assert symmetry_priority(fixture_instance("fig9", 2)) == (4, 2, 1, 3, 5, 0)


def test_symmetry_constraints_on_fig9(fixture_instance):
    constraints = detect_symmetry_breaking(fixture_instance("fig9", 2))

    assert set(constraints) == {
        Precede(1, 5),
        ConditionalPrecede(3, 4, 3, 0),
        ConditionalPrecede(2, 4, 2, 1),
        ConditionalPrecede(1, 3, 1, 0),
        ConditionalPrecede(5, 3, 5, 0),
        ConditionalPrecede(2, 0, 2, 3),
        FixRank(4, 0),
    }
    assert len(constraints) == 7
    assert constraints[-1] == FixRank(4, 0)


def test_symmetry_survivor_on_fig9(fixture_instance, oracle):
    inst = fixture_instance("fig9", 2)
    constraints = detect_symmetry_breaking(inst)
    survivors = [
        order
        for order in oracle(inst).orders
        if all(holds(c, ranks_of(order), inst.k) for c in constraints)
    ]
    assert survivors == [(4, 2, 3, 1, 5, 0)]


def test_stable_set_inequalities(fixture_instance):
    fig12a = fixture_instance("fig12a", 3)
    inequalities = generate_valid_inequalities(fig12a)
    assert inequalities
    assert {vi.min_span for vi in inequalities} == {4}

    fig12b = fixture_instance("fig12b", 3)
    (vi,) = generate_valid_inequalities(fig12b, sets=[{0, 2, 4}])
    assert vi.members == (0, 2, 4)
    assert vi.min_span == 8
    assert not vi.pairwise

    fig8 = fixture_instance("fig8", 3)
    (vi,) = generate_valid_inequalities(fig8, sets=[{0, 5}], form="pairwise")
    assert vi.min_span == 4
    assert vi.pairwise


def test_subset_inequalities(fixture_instance):
    fig12a = fixture_instance("fig12a", 3)
    (vi,) = generate_valid_inequalities(fig12a, sets=[range(5)], kind="subset")
    assert vi.min_span == 6

    fig12b = fixture_instance("fig12b", 3)
    (vi,) = generate_valid_inequalities(
        fig12b, sets=[{0, 2, 4}], kind="subset"
    )
    assert vi.min_span == 5

    fig8 = fixture_instance("fig8", 3)
    (vi,) = generate_valid_inequalities(
        fig8, sets=[{0, 3, 4, 5}], kind="subset"
    )
    assert vi.min_span == 5


def test_inequality_input_errors(fixture_instance):
    fig8 = fixture_instance("fig8", 3)
    with pytest.raises(PreprocessError):
        generate_valid_inequalities(fig8, sets=[{0, 1}])
    with pytest.raises(PreprocessError):
        generate_valid_inequalities(fig8, sets=[{0, 1}], kind="subset")
    with pytest.raises(PreprocessError):
        generate_valid_inequalities(fig8, form="pairwise", kind="subset")
    with pytest.raises(PreprocessError):
        generate_valid_inequalities(fig8, form="triangle")


def test_infeasible_subsets(fixture_instance):
    fig8 = fixture_instance("fig8", 3)
    assert infeasible_subsets(fig8, 2) == [(0, 4), (0, 5), (1, 5)]
    assert infeasible_subsets(fig8, 2, limit=1) == [(0, 4)]
    with pytest.raises(PreprocessError):
        infeasible_subsets(fig8, 1)
    with pytest.raises(PreprocessError):
        infeasible_subsets(fig8, 7)


def test_preprocess_stops_at_first_check(fixture_instance):
    report = preprocess(fixture_instance("fig4", 2))
    assert report.infeasible
    assert report.verdict.check == "min_edges"
    assert len(report.fired) == 1
    assert report.symmetry_constraints == ()

    every = preprocess(fixture_instance("fig4", 2), all_checks=True)
    assert len(every.fired) == 3


def test_preprocess_without_checks_skips_reduction(fixture_instance):
    report = preprocess(fixture_instance("fig4", 3), use_checks=False)
    assert not report.infeasible
    assert report.domain(0) == set(range(6))


def test_preprocess_report(fixture_instance):
    report = preprocess(
        fixture_instance("fig7", 2), use_valid_inequalities=True
    )
    assert not report.infeasible
    assert report.domain(7) == {0, 7}
    assert report.valid_inequalities
    assert report.symmetry_constraints
    assert report.conditions

    payload = json.loads(report.to_json())
    assert payload["rank_domains"][7] == [0, 7]
    assert payload["verdict"]["infeasible"] is False
    assert payload["rules"] == [RULE_SMALL_DEGREE, RULE_NEIGHBOURHOOD]


@pytest.mark.parametrize("seed", RANDOM_SEEDS[::10])
def test_report_json_is_repeatable(random_instance, seed):
    inst = random_instance(seed)
    first = preprocess(inst, use_valid_inequalities=True, all_checks=True)
    second = preprocess(
        random_instance(seed), use_valid_inequalities=True, all_checks=True
    )
    assert first.to_json() == second.to_json()


def test_empty_report():
    report = PreprocessReport.empty(3)
    assert not report.infeasible
    assert [report.domain(v) for v in range(3)] == [{0, 1, 2}] * 3


@pytest.mark.parametrize("seed", RANDOM_SEEDS)
def test_checks_never_reject_feasible_instances(random_instance, oracle, seed):
    inst = random_instance(seed)
    if oracle(inst).count:
        assert run_checks(inst, first_hit=False) == []


@pytest.mark.parametrize("seed", RANDOM_SEEDS)
def test_domains_keep_every_valid_order(random_instance, oracle, seed):
    inst = random_instance(seed)
    if check_min_degree(inst).infeasible:
        return
    reduction = reduce_domains(inst)
    orders = oracle(inst).orders
    if orders:
        assert not reduction.verdict.infeasible
    for order in orders:
        for v, rank in enumerate(ranks_of(order)):
            assert reduction.domains[v] >> rank & 1, (order, v)


@pytest.mark.parametrize("seed", RANDOM_SEEDS)
def test_symmetry_keeps_a_valid_order(random_instance, oracle, seed):
    inst = random_instance(seed)
    orders = oracle(inst).orders
    if not orders:
        return
    constraints = detect_symmetry_breaking(inst)
    assert any(
        all(holds(c, ranks_of(order), inst.k) for c in constraints)
        for order in orders
    )


@pytest.mark.parametrize("seed", RANDOM_SEEDS[::4])
def test_inequalities_hold_on_every_valid_order(random_instance, oracle, seed):
    inst = random_instance(seed)
    inequalities = generate_valid_inequalities(inst)
    inequalities += generate_valid_inequalities(inst, form="pairwise")
    inequalities += generate_valid_inequalities(
        inst, sets=infeasible_subsets(inst, 3, limit=10), kind="subset"
    )
    for order in oracle(inst).orders:
        ranks = ranks_of(order)
        for inequality in inequalities:
            assert spans(inequality, ranks, inst.k), (order, inequality)
