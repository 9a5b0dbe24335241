# ---
# jupyter:
#   jupytext:
#     formats: py:light
#     text_representation:
#       extension: .py
#       format_name: light
# ---

# # Gradient play on softmax rock-paper-scissors
#
# Each player holds a weight vector `w_i` and plays `pi_i = softmax(-w_i)`.
# With `eps = 0` the uniform policies form a continuum of degenerate
# critical points.  A tiny quadratic term (`eps = 1e-3`) changes the picture.

import io

import numpy as np

import gameform as gf

x0 = np.array([0.1, 0.0, 0.0, 0.0, 0.0, 0.0])
steps = gf.StepSizes.uniform(0.05)

# ## Unperturbed game: cycling

rps = gf.RpsSoftmax(1.0, 1.0, 0.0)
tr = gf.gradient_play_discrete(rps, x0, steps, 200_000, record_every=1)
avg = gf.time_average_observable(tr, "policy1")
print("time-averaged policy 1:", np.round(avg, 4))

# The time average is uniform, but the explicit iteration spirals slowly
# outward, so the final policy is far from uniform.

pol = gf.dynamics.observable_values(tr, "policy1")
for k in (0, 1_000, 10_000, 50_000, 100_000, 200_000):
    print(f"step {k:7d}: pi1 = {np.round(pol[k], 4)}")

# The continuous-time flow, integrated with RK4, shows the same cycling.

flow = gf.flow_rk4(rps, x0, 0.05, 200.0, record_every=400)
print(np.round(gf.dynamics.observable_values(flow, "policy1"), 4))

# ## Perturbed game: collapse to a pure policy

rps_eps = gf.RpsSoftmax(1.0, 1.0, 1e-3)
tr = gf.gradient_play_discrete(rps_eps, x0, steps, 50_000, record_every=5_000)
for s, p in zip(tr.steps, gf.dynamics.observable_values(tr, "policy1")):
    print(f"step {s:6d}: pi1 = {np.round(p, 4)}")

# The trajectory can be written out for plotting elsewhere.

buf = io.StringIO()
gf.write_trajectory_csv(tr, buf, "policy1")
print(buf.getvalue().splitlines()[0])
