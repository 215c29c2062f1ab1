"""Table unionability scores: bipartite matching and its greedy bounds.

Reproduces the four-by-three worked example: two tables whose columns form
a thresholded similarity graph, scored by maximum-weight matching and
bracketed by the cheap greedy bounds used for pruning.
"""
from unionsearch import UnionabilityGraph, exact_match, lower_bound, upper_bound

# Columns s1..s4 on the left, t1..t3 on the right; cosine weights for the
# pairs that clear tau = 0.5. The (s3, t3) pair sits at 0.3 and is excluded.
edges = [
    (0, 0, 0.80),  # s1 - t1
    (0, 1, 0.85),  # s1 - t2
    (1, 1, 0.70),  # s2 - t2
    (3, 2, 0.65),  # s4 - t3
]
graph = UnionabilityGraph(left_size=4, right_size=3, edges=tuple(edges), tau=0.5)

result = exact_match(graph)
print("qualifying edges:", [(f"s{i+1}", f"t{j+1}", w) for i, j, w in graph.edges])
print(f"exact matching score U = {result.score:.2f}")
print("matched pairs:", [(f"s{i+1}", f"t{j+1}") for i, j in result.pairs])

ub = upper_bound(graph)
lb = lower_bound(graph)
print(f"greedy upper bound = {ub:.2f}  (drops the one-to-one constraint)")
print(f"greedy lower bound = {lb:.2f}  (greedy maximal matching)")
assert lb <= result.score <= ub

# The bounds let a search skip exact matching: a candidate whose upper
# bound cannot beat the current k-th score is discarded untouched, and in
# fast mode a candidate whose lower bound already beats it is admitted.
print("\nsandwich holds: lower <= exact <= upper")
