"""Brute-force reference implementations used only by the tests.

They share no code with the package beyond the Topology container.
"""

from fractions import Fraction
from itertools import permutations


def brute_simple_paths(topo, s1, s2, max_hops=None):
    """Every simple path, by trying every ordered choice of intermediates."""
    others = sorted(topo.switches - {s1, s2})
    links = {frozenset(l) for l in topo.links}
    found = []
    for k in range(len(others) + 1):
        for mid in permutations(others, k):
            p = (s1,) + mid + (s2,)
            if max_hops is not None and len(p) - 1 > max_hops:
                continue
            if all(frozenset((u, v)) in links for u, v in zip(p, p[1:])):
                found.append(p)
    return sorted(found)


def brute_shortest(topo, s1, s2):
    if s1 == s2:
        return (s1,)
    paths = brute_simple_paths(topo, s1, s2)
    best = min(len(p) for p in paths)
    return min(p for p in paths if len(p) == best)


def brute_shared(p, q):
    ep = {frozenset(e) for e in zip(p, p[1:])}
    eq = {frozenset(e) for e in zip(q, q[1:])}
    return len(ep & eq)


def brute_path_set(topo, s1, s2, max_paths=None):
    primary = brute_shortest(topo, s1, s2)
    alts = [p for p in brute_simple_paths(topo, s1, s2) if p != primary]
    # stable sort on the pre-sorted (lexicographic) list
    alts = sorted(alts, key=lambda p: (brute_shared(p, primary), len(p) - 1))
    out = [primary] + alts
    return out if max_paths is None else out[:max_paths]


def exact_maxmin(flows, capacities):
    """Bottleneck water-filling in exact rational arithmetic.

    ``flows`` maps id -> list of link keys, ``capacities`` maps link key ->
    number. Each round fixes the flows crossing the link with the smallest
    equal share of what the already fixed flows left over.
    """
    caps = {l: Fraction(c) for l, c in capacities.items()}
    fixed = {}
    while len(fixed) < len(flows):
        best = None
        for l, cap in caps.items():
            free = [f for f, ls in flows.items() if l in ls and f not in fixed]
            if not free:
                continue
            used = sum((fixed[f] for f, ls in flows.items() if l in ls and f in fixed), Fraction(0))
            share = (cap - used) / len(free)
            if best is None or share < best:
                best = share
        for l, cap in caps.items():
            free = [f for f, ls in flows.items() if l in ls and f not in fixed]
            if not free:
                continue
            used = sum((fixed[f] for f, ls in flows.items() if l in ls and f in fixed), Fraction(0))
            if (cap - used) / len(free) == best:
                for f in free:
                    fixed[f] = best
    return fixed


def is_maxmin(rates, flows, capacities, tol=1e-9):
    """Every flow crosses a saturated link on which no flow is faster."""
    load = {l: 0.0 for l in capacities}
    for f, ls in flows.items():
        for l in ls:
            load[l] += rates[f]
    if any(load[l] > capacities[l] * (1 + tol) for l in capacities):
        return False
    for f, ls in flows.items():
        ok = False
        for l in ls:
            saturated = load[l] >= capacities[l] * (1 - tol)
            fastest = all(rates[g] <= rates[f] * (1 + tol) for g, gl in flows.items() if l in gl)
            if saturated and fastest:
                ok = True
                break
        if not ok:
            return False
    return True
