"""
Tests for model construction and the individual propagators.
"""

import pytest

from ctop.bitset import full_mask, to_mask, to_set
from ctop.oracle import Instance
from ctop.preprocess import (
    ConditionalPrecede,
    FixRank,
    Precede,
    PreprocessReport,
    SeparationConstraint,
)
from ctop.solvers import ModelKind, build_model
from ctop.solvers.network import (
    AllDifferent,
    Channel,
    ConditionalPrecedeConstraint,
    Network,
    PrecedeConstraint,
    Separation,
    Span,
    Window,
)


def test_rank_model_shape(fixture_instance):
    inst = fixture_instance("fig3a", 2)
    net = build_model(inst, PreprocessReport.empty(inst.n), ModelKind.RANK)

    assert net.variables == list(range(6))
    assert net.count(Separation) == 4
    assert net.count(AllDifferent) == 1
    assert net.count(Window) == 0
    assert net.count(Channel) == 0


def test_vertex_model_shape(fixture_instance):
    inst = fixture_instance("fig3a", 2)
    net = build_model(inst, PreprocessReport.empty(inst.n), ModelKind.VERTEX)

    assert net.variables == list(range(6, 12))
    assert net.count(Window) == 9
    assert net.count(Separation) == 0


def test_combined_model_shape(fixture_instance):
    inst = fixture_instance("fig8", 3)
    net = build_model(inst, PreprocessReport.empty(inst.n), ModelKind.COMBINED)

    assert len(net.variables) == 12
    assert net.count(AllDifferent) == 2
    assert net.count(Channel) == 1
    assert net.count(Separation) == 3
    assert net.count(Window) == 12


def test_window_filters_successor(fixture_instance):
    inst = fixture_instance("fig3a", 2)
    net = build_model(inst, PreprocessReport.empty(inst.n), ModelKind.VERTEX)
    net.schedule_all()
    assert net.propagate()

    net.mark()
    assert net.restrict(net.n + 0, 1 << 4)
    assert net.propagate()
    assert to_set(net.domains[net.n + 1]) <= {2, 3}
    assert to_set(net.domains[net.n + 2]) <= {2, 3}

    net.undo()
    assert net.domains[net.n + 1] == full_mask(6)


def test_separation_by_bounds(graph_from_edges):
    inst = Instance(graph_from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)]), 1)
    net = build_model(inst, PreprocessReport.empty(5), ModelKind.RANK)
    net.schedule_all()
    assert net.propagate()

    net.mark()
    assert net.restrict(0, 1 << 0)
    assert net.propagate()
    # 2 is not adjacent to 0 and must keep a distance of two ranks
    assert not net.domains[2] & to_mask([0, 1])
    net.undo()


def test_trail_restores_every_level(fixture_instance):
    inst = fixture_instance("fig8", 3)
    net = build_model(inst, PreprocessReport.empty(inst.n), ModelKind.RANK)
    before = list(net.domains)

    net.mark()
    net.restrict(0, 0b11)
    net.mark()
    net.restrict(1, 0b1)
    net.restrict(0, 0b10)
    assert net.trail.depth == 2

    net.undo()
    assert net.domains[0] == 0b11
    assert net.domains[1] == before[1]
    net.undo()
    assert net.domains == before


def test_restrict_reports_wipeout(fixture_instance):
    inst = fixture_instance("fig8", 3)
    net = build_model(inst, PreprocessReport.empty(inst.n), ModelKind.RANK)
    net.mark()
    assert not net.restrict(0, 0)
    net.undo()
    assert net.domains[0] == full_mask(6)


def test_all_different_pigeonhole():
    net = Network(3, 1, (0b110, 0b101, 0b011), ModelKind.RANK, [0b011] * 3)
    net.add(AllDifferent(range(3)))
    net.schedule_all()
    assert not net.propagate()


def test_all_different_hall_intervals():
    masks = [0b0011, 0b0011, 0b1111, 0b1111]
    plain = Network(4, 1, (0,) * 4, ModelKind.RANK, masks)
    plain.add(AllDifferent(range(4)))
    plain.schedule_all()
    assert plain.propagate()
    assert plain.domains[2] == 0b1111

    hall = Network(4, 1, (0,) * 4, ModelKind.RANK, masks)
    hall.add(AllDifferent(range(4), hall_intervals=True))
    hall.schedule_all()
    assert hall.propagate()
    assert hall.domains[2] == 0b1100
    assert hall.domains[3] == 0b1100


def test_fix_rank_reaches_domains(fixture_instance):
    inst = fixture_instance("fig9", 2)
    report = PreprocessReport.empty(inst.n)._replace(
        symmetry_constraints=(FixRank(4, 0), Precede(1, 5))
    )
    net = build_model(inst, report, ModelKind.RANK)
    assert net.domains[4] == 1
    assert net.count(PrecedeConstraint) == 1

    vertex = build_model(inst, report, ModelKind.VERTEX)
    assert vertex.rank_domain(4) == 1
    vertex.schedule_all()
    assert vertex.propagate()
    assert vertex.domains[vertex.n + 0] == 1 << 4


def test_precede_through_rank_view(fixture_instance):
    inst = fixture_instance("fig9", 2)
    report = PreprocessReport.empty(inst.n)._replace(
        symmetry_constraints=(Precede(1, 5),)
    )
    net = build_model(inst, report, ModelKind.VERTEX)
    net.schedule_all()
    assert net.propagate()
    assert not net.rank_domain(5) & 1
    assert not net.rank_domain(1) >> 5 & 1


def test_conditional_precede_fires_once_separated(fixture_instance):
    inst = fixture_instance("fig9", 2)
    report = PreprocessReport.empty(inst.n)._replace(
        symmetry_constraints=(ConditionalPrecede(2, 0, 2, 3),)
    )
    net = build_model(inst, report, ModelKind.RANK)
    assert net.count(ConditionalPrecedeConstraint) == 1
    net.schedule_all()
    assert net.propagate()

    net.mark()
    assert net.restrict(2, 1 << 1) and net.restrict(0, 1 << 5)
    assert net.propagate()
    assert net.domains[3] & 0b11 == 0
    net.undo()


def test_conditional_precede_contrapositive(fixture_instance):
    inst = fixture_instance("fig9", 2)
    report = PreprocessReport.empty(inst.n)._replace(
        symmetry_constraints=(ConditionalPrecede(2, 0, 2, 3),)
    )
    net = build_model(inst, report, ModelKind.RANK)
    net.mark()
    # rank 3 before rank 2 rules out a wide gap between 2 and 0
    assert net.restrict(3, 1 << 1) and net.restrict(2, 1 << 4)
    constraint = net.constraints[-1]
    assert constraint.propagate(net)
    assert to_set(net.domains[0]) <= {2, 3, 4, 5}


def test_span_inequality(fixture_instance):
    inst = fixture_instance("fig8", 3)
    report = PreprocessReport.empty(inst.n)._replace(
        valid_inequalities=(SeparationConstraint((0, 5), 4, False),)
    )
    net = build_model(inst, report, ModelKind.RANK)
    assert net.count(Span) == 1
    net.mark()
    assert net.restrict(0, 1 << 1)
    constraint = net.constraints[-1]
    assert constraint.propagate(net)
    assert to_set(net.domains[5]) == {5}


def test_pairwise_inequality_adds_separations(fixture_instance):
    inst = fixture_instance("fig8", 3)
    report = PreprocessReport.empty(inst.n)._replace(
        valid_inequalities=(SeparationConstraint((0, 4, 5), 8, True),)
    )
    net = build_model(inst, report, ModelKind.VERTEX)
    assert net.count(Separation) == 3


@pytest.mark.parametrize("kind", list(ModelKind))
def test_fully_assigned_order(fixture_instance, kind):
    inst = fixture_instance("fig8", 3)
    net = build_model(inst, PreprocessReport.empty(inst.n), kind)
    order = (5, 4, 3, 2, 1, 0)
    if net.has_positions:
        for j, v in enumerate(order):
            net.restrict(net.n + j, 1 << v)
    if net.has_ranks:
        for j, v in enumerate(order):
            net.restrict(v, 1 << j)
    net.schedule_all()
    assert net.propagate()
    assert net.all_assigned()
    assert net.order() == order
