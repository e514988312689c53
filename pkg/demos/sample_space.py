"""
The layered sample space
========================

Builds the smallest interesting space (two received signals, two sources,
two samples), prints its states and cover edges, and shows which pairs lost
their order when the source/received edges with matching index were cut.
"""

# %%
import numpy as np

from igbss import BOTTOM, build_sample_space, compute_p, mixing, received, source

space = build_sample_space(L=2, N=2, M=2)
print(space)
print([str(s) for s in space.states])

# %%
# Cover edges, one per line.  Note that z(0,m) only feeds x(1,m).
print(space.dump_edges())

# %%
# Order queries are constant-time bit lookups.
print("a(0,0) <= x(1,1):", space.leq(mixing(0, 0), received(1, 1)))
print("z(0,0) <= x(0,0):", space.leq(source(0, 0), received(0, 0)))
print("upset of a(0,0):", sorted(map(str, space.upset(mixing(0, 0)))))
print("downset of z(0,0):", sorted(map(str, space.downset(source(0, 0)))))

# %%
# The dense model matrix is lower triangular in enumeration order, so it is
# invertible with unit pivots.
F = space.model_matrix()
print(F.astype(int))
print("determinant:", np.linalg.det(F))

# %%
# With all parameters at zero the distribution is uniform; eta counts upsets.
state = compute_p(space, np.zeros(space.n_params))
print("p:", np.round(state.p, 4))
print("eta of z(0,0) = 2/13:", state.eta_of(source(0, 0)))
print("eta of a(0,0) = 5/13:", state.eta_of(mixing(0, 0)))
print("eta of bottom:", state.eta_of(BOTTOM))
