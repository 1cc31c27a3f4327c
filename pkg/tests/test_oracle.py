import math

import pytest

from habicascade.diffusion import Cadence, DiffusionConfig, Seeding, monte_carlo_coverage, rank_nodes
from habicascade.graph import Graph, complete_graph, path_graph, star_graph
from habicascade.habituation import HabituationParams, habituate_step, HabituationState
from habicascade.oracle import (MAX_DIRECTED_EDGES, OracleLimitError, enumerate_outcomes,
                                exact_expected_coverage)
from smallgraphs import nonisomorphic_graphs, triangle


def hand_triangle(pp, hab):
    """Seed a at t=0. Both of a's attempts succeed, one does, or none do.

    With exactly one success the other node was contacted and failed, so
    the second attempt from the newly active node uses the habituated factor.
    """
    h = habituate_step(HabituationState(), HabituationParams()).factor if hab else 1.0
    q = pp * h
    return pp * pp + 2 * pp * (1 - pp) * (q + (1 - q) * 2 / 3) + (1 - pp) ** 2 / 3


def test_star_hand_value():
    g = star_graph(3)
    for hab in (False, True):
        cfg = DiffusionConfig(0.5, 0.25, habituation_enabled=hab)
        assert exact_expected_coverage(g, cfg, rank_nodes(g, "degree")) == pytest.approx(
            (1 + 3 * 0.5) / 4, abs=1e-15)


def test_triangle_hand_values():
    g = triangle()
    hab = exact_expected_coverage(g, DiffusionConfig(0.5, 0.3), [0, 1, 2])
    assert hab == pytest.approx(hand_triangle(0.5, True), abs=1e-15)
    assert hab == pytest.approx(0.6984077, abs=1e-7)
    plain = exact_expected_coverage(g, DiffusionConfig(0.5, 0.3, habituation_enabled=False), [0, 1, 2])
    assert plain == pytest.approx(0.75, abs=1e-15)
    for pp in (0.2, 0.8):
        assert exact_expected_coverage(g, DiffusionConfig(pp, 0.3), [0, 1, 2]) == pytest.approx(
            hand_triangle(pp, True), abs=1e-15)


def test_path_hand_timeline():
    # 0-1-2 seeded at the end: each hop is a single contact
    g = path_graph(3)
    cfg = DiffusionConfig(0.4, 0.3)
    assert exact_expected_coverage(g, cfg, [0, 1, 2]) == pytest.approx(
        (1 + 0.4 + 0.4 * 0.4) / 3, abs=1e-15)


def test_full_probability_connected():
    for g in (complete_graph(4), path_graph(5), star_graph(4)):
        cfg = DiffusionConfig(1.0, 1 / g.node_count)
        assert exact_expected_coverage(g, cfg, rank_nodes(g, "degree")) == 1.0


def test_masses_sum_to_one():
    for g in nonisomorphic_graphs(4):
        for seeding in Seeding:
            for cadence in Cadence:
                cfg = DiffusionConfig(0.6, 0.5, seeding=seeding, cadence=cadence)
                total = math.fsum(o.probability for o in enumerate_outcomes(
                    g, cfg, rank_nodes(g, "degree")))
                assert total == pytest.approx(1.0, abs=1e-12)


def test_labelings_only_cover_attempted_edges():
    g = triangle()
    for o in enumerate_outcomes(g, DiffusionConfig(0.5, 0.3), [0, 1, 2]):
        edges = [e for e, _ in o.labeling]
        assert len(edges) == len(set(edges))
        assert len(edges) <= g.directed_edge_count


def test_refuses_large_graphs():
    g = complete_graph(6)
    assert g.directed_edge_count > MAX_DIRECTED_EDGES
    with pytest.raises(OracleLimitError):
        exact_expected_coverage(g, DiffusionConfig(0.5, 0.2), rank_nodes(g, "degree"))
    k5 = complete_graph(5)
    assert k5.directed_edge_count == MAX_DIRECTED_EDGES
    exact_expected_coverage(k5, DiffusionConfig(0.5, 0.2), rank_nodes(k5, "degree"))


def test_monte_carlo_matches_oracle_on_six_nodes():
    g = Graph(6, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3)])
    ranking = rank_nodes(g, "degree")
    for seeding in Seeding:
        for hab in (False, True):
            cfg = DiffusionConfig(0.5, 2 / 6, seeding=seeding, habituation_enabled=hab,
                                  habituation_params=HabituationParams(tau=2.0))
            exact = exact_expected_coverage(g, cfg, ranking)
            mean, _ = monte_carlo_coverage(g, cfg, ranking, 100_000, 3)
            assert abs(mean - exact) <= 4 * math.sqrt(exact * (1 - exact) / 100_000)


def test_literal_restart_and_per_step_cadence_match_monte_carlo():
    g = Graph(5, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (2, 4)])
    ranking = rank_nodes(g, "degree")
    cfg = DiffusionConfig(0.4, 0.4, seeding=Seeding.SEQUENTIAL, cadence=Cadence.PER_STEP,
                          habituation_params=HabituationParams(restart="literal"))
    exact = exact_expected_coverage(g, cfg, ranking)
    mean, se = monte_carlo_coverage(g, cfg, ranking, 100_000, 4)
    assert abs(mean - exact) <= 4 * math.sqrt(exact * (1 - exact) / 100_000)
