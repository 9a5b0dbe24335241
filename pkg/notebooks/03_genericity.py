# ---
# jupyter:
#   jupytext:
#     formats: py:light
#     text_representation:
#       extension: .py
#       format_name: light
# ---

# # How typical are degenerate critical points?
#
# Draw random games, find their critical points by multistart Newton, and
# count how they classify.  Degenerate points should essentially never show
# up, and every differential Nash point should be hyperbolic.

import json

import gameform as gf

stats = gf.genericity_sample({"family": "random_polynomial", "degree": 3}, 100, rng_seed=0)
print(json.dumps(stats.to_dict(), indent=2))

# Games with positive definite player blocks only have differential Nash
# points.

stats = gf.genericity_sample("random_quadratic_pd", 50, rng_seed=1, dims=gf.BlockDims(2, 2))
print(stats.n_critical_points, stats.n_dne, stats.n_hyperbolic)

# The per-game random streams are seeded by `(rng_seed, game index)`, so the
# numbers do not change with the worker count set in `GAMEFORM_THREADS`.
