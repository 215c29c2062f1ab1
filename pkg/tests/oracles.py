"""Independent test oracles, kept free of production-code imports."""
from unionsearch.matching import UnionabilityGraph


def brute_force_matching_score(g: UnionabilityGraph) -> float:
    """Max-weight matching by enumerating every injective assignment."""
    by_left: dict[int, list[tuple[int, float]]] = {}
    for i, j, w in g.edges:
        by_left.setdefault(i, []).append((j, w))
    lefts = sorted(by_left)
    best = 0.0

    def recurse(idx: int, used: set[int], total: float) -> None:
        nonlocal best
        if total > best:
            best = total
        if idx == len(lefts):
            return
        recurse(idx + 1, used, total)
        for j, w in by_left[lefts[idx]]:
            if j not in used:
                used.add(j)
                recurse(idx + 1, used, total + w)
                used.remove(j)

    recurse(0, set(), 0.0)
    return best
