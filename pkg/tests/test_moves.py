"""Simultaneous-move resolution: exhaustive micro-grid verification."""

from itertools import product

from taskembed.envs.base import CARDINAL, resolve_moves


def _all_proposals(pos, h, w):
    """Stay plus every in-bounds cardinal move."""
    opts = [pos]
    for dr, dc in CARDINAL:
        tgt = (pos[0] + dr, pos[1] + dc)
        if 0 <= tgt[0] < h and 0 <= tgt[1] < w:
            opts.append(tgt)
    return opts


def test_same_target_conflict_no_one_moves():
    pos = [(0, 0), (0, 2)]
    final = resolve_moves(pos, [(0, 1), (0, 1)])
    assert final == pos


def test_swap_blocked():
    pos = [(0, 0), (0, 1)]
    final = resolve_moves(pos, [(0, 1), (0, 0)])
    assert final == pos


def test_move_onto_stationary_blocked():
    pos = [(0, 0), (0, 1)]
    final = resolve_moves(pos, [(0, 1), (0, 1)])
    assert final == pos


def test_follow_move_allowed():
    pos = [(0, 0), (0, 1)]
    final = resolve_moves(pos, [(0, 1), (0, 2)])
    assert final == [(0, 1), (0, 2)]


def test_chain_blocks_when_head_blocked():
    # head of the chain runs into a wall-stopped agent: whole chain stalls
    pos = [(0, 0), (0, 1), (0, 2)]
    final = resolve_moves(pos, [(0, 1), (0, 2), (0, 2)])
    assert final == pos


def test_rotation_cycle_allowed():
    pos = [(0, 0), (0, 1), (1, 1), (1, 0)]
    proposals = [(0, 1), (1, 1), (1, 0), (0, 0)]
    assert resolve_moves(pos, proposals) == proposals


def test_exhaustive_two_agents_micro_grid():
    """Every 2-agent placement and proposal combo on a 2x3 grid stays legal."""
    h, w = 2, 3
    cells = [(r, c) for r in range(h) for c in range(w)]
    for p0, p1 in product(cells, cells):
        if p0 == p1:
            continue
        for t0 in _all_proposals(p0, h, w):
            for t1 in _all_proposals(p1, h, w):
                final = resolve_moves([p0, p1], [t0, t1])
                f0, f1 = final
                # never stack two agents
                assert f0 != f1
                # each agent either moved to its proposal or stayed
                assert f0 in (p0, t0) and f1 in (p1, t1)
                # same target -> both stay
                if t0 == t1 and t0 != p0 and t1 != p1:
                    assert final == [p0, p1]
                # swap -> both stay
                if t0 == p1 and t1 == p0 and t0 != p0:
                    assert final == [p0, p1]
                # order independence
                swapped = resolve_moves([p1, p0], [t1, t0])
                assert swapped == [f1, f0]
