"""
Permutations as walks on a state graph
======================================

The sequential sampler only needs to remember which right vertices near the
current position are still free.  That window is a strictly increasing
t-tuple of offsets, and matching a vertex moves the window by one of the
maps ``T_0, ..., T_t``.
"""

from bandsis.graph import BandSpec
from bandsis.states import decode_sequence, encode_permutation, enumerate_states, state_graph

###############################################################################
# Six states for the (2, 2) band, in lexicographic order.  The first three
# contain -2 and are forced: the vertex two places back must be matched now.

space = enumerate_states(2, 2)
for x, forced in zip(space.states, space.forced):
    print(x, "forced" if forced else "")
print(state_graph(2, 2))

###############################################################################
# Encoding a few permutations.  Each listed state is the window seen just
# before the corresponding vertex is matched.

spec = BandSpec(2, 2, 5)
for perm in [(1, 2, 3, 4, 5), (2, 3, 1, 5, 4), (2, 1, 4, 3, 5), (3, 2, 1, 5, 4), (3, 1, 2, 4, 5)]:
    path = encode_permutation(perm, spec)
    assert decode_sequence(path, spec) == perm
    print("".join(map(str, perm)), path[:-1])
