"""Block-pattern detection, classification, and the coincidence verdict.

The verdict layer decides between "guaranteed_coincide" and "unknown"
given the detected pattern; the decision must be stable under selection
exchange and under matched coordinate permutations, while the quoted
reason is allowed to depend on the selection the search landed on.
"""
from itertools import combinations

import numpy as np
import pytest

from posmap.bilinear import StructuredMap
from posmap.errors import SpanViolation
from posmap.mapmodel import (from_choi, from_matricization, l_block,
                             permute_map_matched, star_linearity)
from posmap.pattern import (CASE_I, CASE_II, CASE_III, REASON_C1_FAILS,
                            REASON_EXCEPTIONAL, REASON_HETERO, REASON_MAIN,
                            REASON_ROW_OR_COLUMN, REASON_ZERO_REMAINDER,
                            REMAINDER_HETERO, REMAINDER_SINGLE, REMAINDER_ZERO,
                            VERDICT_COINCIDE, VERDICT_UNKNOWN, c2_flags,
                            classify, classify_case, condition_c1,
                            detect_pattern, theorem_verdict,
                            verdict_for_pattern)
from posmap import zoo


def rand_pd(m, seed, field="real"):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((m, m))
    if field == "complex":
        g = g + 1j * rng.standard_normal((m, m))
    h = g @ g.conj().T + m * np.eye(m)
    return 0.5 * (h + h.conj().T)


def hetero_spec():
    """Two leftover directions that no spanning selection can merge.

    Direction d1 sits at blocks (0,0) and (0,1), d2 at (1,1) and (1,2),
    d3 alone at (0,2); block (1,0) is zero.
    """
    G = np.zeros((3, 6))
    for c, k in ((0, 0), (2, 0), (3, 1), (5, 1), (4, 2)):
        G[k, c] = 1.0
    C = G.T @ rand_pd(3, 13).T @ G
    return from_choi(C, 2, "real")


def test_transpose_independence_fails():
    rep = theorem_verdict(zoo.transpose_map(2))
    assert rep.verdict == VERDICT_UNKNOWN
    assert rep.reason == REASON_C1_FAILS
    assert rep.pattern.m == 4
    assert rep.pattern.remainder == REMAINDER_ZERO
    assert rep.selections_tried == 1  # m = nq leaves nothing to exchange
    cl = classify(rep.pattern)
    assert not cl.c1 and cl.case is None and cl.sum_alpha_is_one is False


def test_upper_triangular_no_alternative_selection():
    rep = theorem_verdict(zoo.entry("upper2x2").spec)
    assert rep.verdict == VERDICT_UNKNOWN and rep.reason == REASON_C1_FAILS
    assert rep.pattern.positions == ((0, 0), (0, 1), (1, 1))
    assert rep.pattern.remainder == REMAINDER_ZERO
    assert rep.selections_tried == 1


def test_toeplitz_single_remainder_exchange_futile():
    sp = zoo.entry("toeplitz2x2").spec
    pat = detect_pattern(sp)
    assert pat.positions == ((0, 0), (0, 1), (1, 0))
    assert pat.remainder == REMAINDER_SINGLE
    assert np.array_equal(pat.alpha, np.array([1.0, 0.0, 0.0]))
    cl = classify(pat)
    assert not cl.c1 and cl.sum_alpha_is_one is True and cl.case is None
    rep = theorem_verdict(sp)
    assert rep.verdict == VERDICT_UNKNOWN and rep.reason == REASON_C1_FAILS
    assert rep.selections_tried == 2


def test_single_row_always_coincides():
    sp = zoo.random_star_linear(2, 2, ((0, 0), (0, 1)), (1.0, 2.0), seed=3,
                                remainder="random")
    pat = detect_pattern(sp)
    assert pat.remainder == REMAINDER_SINGLE
    v, r = verdict_for_pattern(pat, sp.field)
    assert v == VERDICT_COINCIDE and r == REASON_ROW_OR_COLUMN


def test_single_column_is_case_i():
    sp = zoo.random_star_linear(3, 1, ((0, 0), (1, 0), (2, 0)),
                                (1.0, 2.0, 3.0), seed=4)
    rep = theorem_verdict(sp)
    assert rep.verdict == VERDICT_COINCIDE
    assert rep.reason == REASON_ROW_OR_COLUMN
    assert classify(rep.pattern).case.kind == CASE_I


def test_single_row_is_case_ii():
    sp = zoo.random_star_linear(1, 3, ((0, 0), (0, 1), (0, 2)),
                                (2.0, 1.0, 0.5), seed=5)
    assert classify(detect_pattern(sp)).case.kind == CASE_II


def test_diagonal_zero_remainder():
    sp = zoo.random_star_linear(2, 2, ((0, 0), (1, 1)), (1.0, 2.0), seed=6)
    rep = theorem_verdict(sp)
    assert rep.verdict == VERDICT_COINCIDE
    assert rep.reason == REASON_ZERO_REMAINDER


def test_diagonal_single_remainder_routes():
    # greedy hits the combination block first and lands in a full row;
    # pinning the diagonal selection exposes the main route instead
    sp = zoo.random_star_linear(2, 2, ((0, 0), (1, 1)), (1.0, 2.0), seed=6,
                                remainder="random")
    rep = theorem_verdict(sp)
    assert rep.verdict == VERDICT_COINCIDE
    assert rep.reason == REASON_ROW_OR_COLUMN
    pat = detect_pattern(sp, positions=((0, 0), (1, 1)))
    assert pat.remainder == REMAINDER_SINGLE
    v, r = verdict_for_pattern(pat, sp.field)
    assert v == VERDICT_COINCIDE and r == REASON_MAIN


@pytest.mark.parametrize("field", ["real", "complex"])
def test_scattered_selection_main_route(field):
    sp = zoo.random_star_linear(3, 4, ((0, 1), (1, 3), (2, 0)),
                                (1.0, 1.5, 2.0), seed=7, field=field,
                                remainder="random")
    rep = theorem_verdict(sp)
    assert rep.verdict == VERDICT_COINCIDE and rep.reason == REASON_MAIN


def test_real_cross_large_sums_exceptional_route():
    positions = ((0, 1), (0, 2), (1, 0), (2, 0))
    alpha = np.array([0.5, 0.5, 0.5, 0.5])
    ahat = StructuredMap(3, 3, positions, alpha, "real").matrix
    C = ahat.T @ rand_pd(4, 11).T @ ahat
    sp = from_choi(C, 3, "real")
    assert star_linearity(sp).is_star_linear
    rep = theorem_verdict(sp)
    assert rep.verdict == VERDICT_COINCIDE
    assert rep.reason == REASON_EXCEPTIONAL
    assert rep.selections_tried > 1
    info = classify_case(rep.pattern.positions, 3, 3)
    assert info is not None and info.kind == CASE_III
    assert info.pivot == (0, 0)
    # both canonical group sums equal one: the range check is genuinely needed
    a = rep.pattern.alpha[list(info.order)]
    assert np.sum(a[:2]).real == pytest.approx(1.0, abs=1e-9)
    assert np.sum(a[2:]).real == pytest.approx(1.0, abs=1e-9)


def test_complex_cross_stays_main():
    positions = ((0, 1), (0, 2), (1, 0), (2, 0))
    alpha = np.array([0.5, 0.5, 0.5, 0.5])
    ahat = StructuredMap(3, 3, positions, alpha, "complex").matrix
    H = rand_pd(4, 11, "complex")
    C = ahat.conj().T @ H.T @ ahat
    rep = theorem_verdict(from_choi(C, 3, "complex"))
    assert rep.verdict == VERDICT_COINCIDE and rep.reason == REASON_MAIN


def test_real_cross_small_sums_stays_main():
    positions = ((0, 1), (0, 2), (1, 0), (2, 0))
    alpha = np.array([0.1, 0.1, 0.1, 0.1])
    ahat = StructuredMap(3, 3, positions, alpha, "real").matrix
    C = ahat.T @ rand_pd(4, 12).T @ ahat
    rep = theorem_verdict(from_choi(C, 3, "real"))
    assert rep.verdict == VERDICT_COINCIDE and rep.reason == REASON_MAIN


def test_heterogeneous_remainder_stays_unknown():
    sp = hetero_spec()
    assert star_linearity(sp).is_star_linear
    pat = detect_pattern(sp)
    assert pat.positions == ((0, 0), (0, 2), (1, 1))
    assert pat.remainder == REMAINDER_HETERO
    assert pat.alpha is None
    assert classify(pat).sum_alpha_is_one is None
    rep = theorem_verdict(sp)
    assert rep.verdict == VERDICT_UNKNOWN and rep.reason == REASON_HETERO
    assert rep.selections_tried > 1


def test_exchange_rescues_shared_combination():
    # one combination block repeated three times plus two lone directions:
    # the greedy basis swallows the combination and reports an independence
    # failure, but a one-block exchange reaches the selection whose leftover
    # blocks are all equal
    combo = np.array([0.3, 0.4, 0.5])
    G2 = np.zeros((3, 6))
    G2[0, 0] = 1.0
    G2[1, 3] = 1.0
    G2[2, 5] = 1.0
    for c in (1, 2, 4):
        G2[:, c] = combo
    C2 = G2.T @ rand_pd(3, 14).T @ G2
    rep = theorem_verdict(from_choi(C2, 2, "real"))
    assert rep.verdict == VERDICT_COINCIDE and rep.reason == REASON_MAIN
    assert rep.pattern.positions == ((0, 0), (1, 2), (1, 1))
    assert rep.pattern.remainder == REMAINDER_SINGLE
    assert rep.selections_tried > 1


def test_zero_map():
    rep = theorem_verdict(from_matricization(np.zeros((4, 4)), "real"))
    assert rep.verdict == VERDICT_COINCIDE
    assert rep.reason == REASON_ZERO_REMAINDER
    assert rep.pattern.m == 0


def test_non_spanning_selection_rejected():
    with pytest.raises(SpanViolation):
        detect_pattern(zoo.entry("upper2x2").spec, positions=((0, 0), (0, 1)))


def test_remainder_tolerance_knob():
    # nudge one leftover block along a basis direction (staying inside the
    # selected span): the two leftover expansions then differ by 3e-6
    base = zoo.random_star_linear(2, 2, ((0, 0), (1, 1)), (1.0, 2.0), seed=6,
                                  remainder="random")
    sel = ((0, 0), (1, 1))
    L = base.L.copy()
    L[0:2, 2:4] += 3e-6 * l_block(base.L, 0, 0, 2, 2)
    pert = from_matricization(L, base.field)
    assert detect_pattern(pert, positions=sel).remainder == REMAINDER_HETERO
    assert detect_pattern(pert, rtol=1e-4,
                          positions=sel).remainder == REMAINDER_SINGLE


def test_verdict_invariant_under_matched_permutations():
    cases = [zoo.entry("upper2x2").spec, zoo.entry("toeplitz2x2").spec,
             zoo.transpose_map(2),
             zoo.random_star_linear(3, 3, ((0, 1), (1, 0), (2, 2)),
                                    (1.0, 2.0, 3.0), seed=21,
                                    remainder="random"),
             hetero_spec()]
    for sp in cases:
        base = theorem_verdict(sp).verdict
        for row_swap, col_swap in (((0, sp.n - 1), None),
                                   (None, (0, sp.q - 1)),
                                   ((0, sp.n - 1), (0, sp.q - 1))):
            other = permute_map_matched(sp, row_swap=row_swap,
                                        col_swap=col_swap)
            # the decision is permutation invariant; the quoted reason may
            # differ because the greedy selection is coordinate bound
            assert theorem_verdict(other).verdict == base


def test_classified_cases_satisfy_the_conditions():
    checked = 0
    for n in range(1, 4):
        for q in range(1, 4):
            coords = [(i, j) for i in range(n) for j in range(q)]
            for m in range(1, min(5, len(coords) + 1)):
                for sel in combinations(coords, m):
                    info = classify_case(sel, n, q)
                    if info is None:
                        continue
                    checked += 1
                    assert condition_c1(sel)
                    assert not c2_flags(sel, n, q).any
    assert checked > 10
