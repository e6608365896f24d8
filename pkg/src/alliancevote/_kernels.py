"""Numeric kernels shared by every rule.

Each kernel exists twice: an explicit-loop version compiled with numba and a
vectorised numpy version.  Set ``ALLIANCEVOTE_DISABLE_NUMBA=1`` to force the
numpy path (useful for debugging and for the benchmark in ``benchmarks/``).

Conventions
-----------
ballots : (b, m) int64, each row a ranking best-first
counts  : (b,) int64 ballot multiplicities
pos     : (b, m) int64, ``pos[i, c]`` is the 0-based position of ``c`` in row i
active  : (m,) bool, candidates still present in the election
alliance_of : (m,) int64 alliance id of every candidate
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

NUMBA_ENABLED = numba is not None and os.environ.get("ALLIANCEVOTE_DISABLE_NUMBA", "") in ("", "0")


def _njit(func):
    return numba.njit(cache=True, nogil=True)(func)


# ---------------------------------------------------------------------------
# loop kernels (numba)
# ---------------------------------------------------------------------------

def _positions_loop(ballots):
    b, m = ballots.shape
    pos = np.empty((b, m), dtype=np.int64)
    for i in range(b):
        for j in range(m):
            pos[i, ballots[i, j]] = j
    return pos


def _pref_matrix_loop(pos, counts):
    b, m = pos.shape
    pref = np.zeros((m, m), dtype=np.int64)
    for i in range(b):
        w = counts[i]
        for x in range(m):
            px = pos[i, x]
            for y in range(m):
                if px < pos[i, y]:
                    pref[x, y] += w
    return pref


def _top_counts_loop(ballots, counts, active):
    b, m = ballots.shape
    out = np.zeros(m, dtype=np.int64)
    for i in range(b):
        for j in range(m):
            c = ballots[i, j]
            if active[c]:
                out[c] += counts[i]
                break
    return out


def _prefix_counts_loop(ballots, counts, active, alliance_of):
    # alliance-aware plurality: c scores w when no active opponent precedes it
    b, m = ballots.shape
    out = np.zeros(m, dtype=np.int64)
    for i in range(b):
        lead = -1
        for j in range(m):
            c = ballots[i, j]
            if not active[c]:
                continue
            if lead == -1:
                lead = alliance_of[c]
            if alliance_of[c] != lead:
                break
            out[c] += counts[i]
    return out


def _widest_paths_loop(pref, active, admit):
    m = pref.shape[0]
    p = np.zeros((m, m), dtype=np.int64)
    for i in range(m):
        if not active[i]:
            continue
        for j in range(m):
            if i != j and active[j]:
                p[i, j] = pref[i, j]
    for k in range(m):
        if not (active[k] and admit[k]):
            continue
        for i in range(m):
            if i == k or not active[i]:
                continue
            pik = p[i, k]
            if pik == 0:
                continue
            for j in range(m):
                if j == k or j == i or not active[j]:
                    continue
                v = pik if pik < p[k, j] else p[k, j]
                if v > p[i, j]:
                    p[i, j] = v
    return p


_widest_paths_impl = _widest_paths_loop


def _restricted_strengths_loop(pref, active, alliance_of):
    # strength[a, b] over paths whose intermediates avoid b's alliance;
    # alliance ids must lie in 0..m-1
    m = pref.shape[0]
    out = np.zeros((m, m), dtype=np.int64)
    admit = np.empty(m, dtype=np.bool_)
    done = np.zeros(m, dtype=np.bool_)
    for t in range(m):
        if not active[t] or done[alliance_of[t]]:
            continue
        target = alliance_of[t]
        for k in range(m):
            admit[k] = alliance_of[k] != target
        p = _widest_paths_impl(pref, active, admit)
        for bb in range(m):
            if active[bb] and alliance_of[bb] == target:
                for a in range(m):
                    if active[a] and a != bb:
                        out[a, bb] = p[a, bb]
        done[target] = True
    return out


def _maximin_scores_loop(pref, active, alliance_of, opponents_only, n):
    m = pref.shape[0]
    out = np.full(m, -1, dtype=np.int64)
    for c in range(m):
        if not active[c]:
            continue
        best = n
        for d in range(m):
            if d == c or not active[d]:
                continue
            if opponents_only and alliance_of[d] == alliance_of[c]:
                continue
            if pref[c, d] < best:
                best = pref[c, d]
        out[c] = best
    return out


def _beatpath_scores_loop(strength, active, alliance_of, aware):
    m = strength.shape[0]
    out = np.full(m, -1, dtype=np.int64)
    for a in range(m):
        if not active[a]:
            continue
        s = 0
        for bb in range(m):
            if bb == a or not active[bb]:
                continue
            if aware and alliance_of[bb] == alliance_of[a]:
                s += 1
            elif strength[a, bb] >= strength[bb, a]:
                s += 1
        out[a] = s
    return out


# ---------------------------------------------------------------------------
# numpy kernels
# ---------------------------------------------------------------------------

def _positions_np(ballots):
    return np.argsort(ballots, axis=1).astype(np.int64)


def _pref_matrix_np(pos, counts):
    above = pos[:, :, None] < pos[:, None, :]
    return np.einsum("i,ixy->xy", counts, above.astype(np.int64))


def _top_counts_np(ballots, counts, active):
    m = ballots.shape[1]
    live = active[ballots]
    first = np.argmax(live, axis=1)
    tops = ballots[np.arange(len(ballots)), first]
    weights = np.where(live.any(axis=1), counts, 0)
    return np.bincount(tops, weights=weights, minlength=m).astype(np.int64)


def _prefix_counts_np(ballots, counts, active, alliance_of):
    m = ballots.shape[1]
    live = active[ballots]
    tags = alliance_of[ballots]
    first = np.argmax(live, axis=1)
    lead = tags[np.arange(len(ballots)), first][:, None]
    broken = np.cumsum(live & (tags != lead), axis=1) > 0
    hit = live & ~broken
    w = np.broadcast_to(counts[:, None], ballots.shape)
    return np.bincount(ballots[hit], weights=w[hit], minlength=m).astype(np.int64)


def _widest_paths_np(pref, active, admit):
    m = pref.shape[0]
    pair = np.outer(active, active) & ~np.eye(m, dtype=bool)
    p = np.where(pair, pref, 0).astype(np.int64)
    for k in np.flatnonzero(active & admit):
        via = np.minimum(p[:, k : k + 1], p[k : k + 1, :])
        via[k, :] = 0
        via[:, k] = 0
        np.fill_diagonal(via, 0)
        np.maximum(p, via, out=p)
    return p


def _restricted_strengths_np(pref, active, alliance_of):
    m = pref.shape[0]
    out = np.zeros((m, m), dtype=np.int64)
    for target in np.unique(alliance_of[active]):
        members = active & (alliance_of == target)
        p = _widest_paths_np(pref, active, alliance_of != target)
        cols = np.flatnonzero(members)
        out[:, cols] = p[:, cols]
    np.fill_diagonal(out, 0)
    return out


def _maximin_scores_np(pref, active, alliance_of, opponents_only, n):
    m = pref.shape[0]
    valid = np.outer(active, active) & ~np.eye(m, dtype=bool)
    if opponents_only:
        valid &= alliance_of[:, None] != alliance_of[None, :]
    masked = np.where(valid, pref, n)
    out = masked.min(axis=1, initial=n).astype(np.int64)
    out[~active] = -1
    return out


def _beatpath_scores_np(strength, active, alliance_of, aware):
    m = strength.shape[0]
    valid = np.outer(active, active) & ~np.eye(m, dtype=bool)
    wins = strength >= strength.T
    if aware:
        wins |= alliance_of[:, None] == alliance_of[None, :]
    out = (wins & valid).sum(axis=1).astype(np.int64)
    out[~active] = -1
    return out


_KERNEL_NAMES = (
    "positions",
    "pref_matrix",
    "top_counts",
    "prefix_counts",
    "widest_paths",
    "restricted_strengths",
    "maximin_scores",
    "beatpath_scores",
)

NUMPY_KERNELS = {name: globals()[f"_{name}_np"] for name in _KERNEL_NAMES}


def _compile_all():
    global _widest_paths_impl
    out = {name: _njit(globals()[f"_{name}_loop"]) for name in _KERNEL_NAMES}
    # the restricted kernel calls widest paths; numba must see the compiled one
    _widest_paths_impl = out["widest_paths"]
    return out


NUMBA_KERNELS = _compile_all() if numba is not None else None

_active = NUMBA_KERNELS if NUMBA_ENABLED else NUMPY_KERNELS
positions = _active["positions"]
pref_matrix = _active["pref_matrix"]
top_counts = _active["top_counts"]
prefix_counts = _active["prefix_counts"]
widest_paths = _active["widest_paths"]
restricted_strengths = _active["restricted_strengths"]
maximin_scores = _active["maximin_scores"]
beatpath_scores = _active["beatpath_scores"]


def first_best(scores, eligible):
    """Index of the highest score among ``eligible``; ties go to the lowest index."""
    best = -1
    for c in np.flatnonzero(eligible):
        if best < 0 or scores[c] > scores[best]:
            best = c
    return int(best)
