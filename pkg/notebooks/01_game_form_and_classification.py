# ---
# jupyter:
#   jupytext:
#     formats: py:light
#     text_representation:
#       extension: .py
#       format_name: light
# ---

# # Game form and critical-point classification
#
# A zero-sum game is one cost `f(x1, x2)`: player 1 minimizes it, player 2
# maximizes it.  Its game form is `omega = (D1 f, -D2 f)` and the Jacobian
# of `omega` decides what kind of critical point we are looking at.

import numpy as np

import gameform as gf

# ## Bilinear game
#
# `f = x^T A y` has `omega = (A y, -A^T x)` and a skew-symmetric Jacobian.

A = np.array([[1.0, 2.0], [0.0, 1.0]])
bil = gf.Bilinear(A)
z = np.array([0.3, -1.0, 2.0, 0.5])
print("omega      ", gf.omega(bil, z))
print("(Ay, -A^Tx)", np.concatenate([A @ z[2:], -A.T @ z[:2]]))
print(gf.game_jacobian(bil, z))

# The origin passes the necessary conditions for a local Nash equilibrium
# (both player blocks are zero, hence semidefinite), but it is not a
# differential Nash point and the spectrum sits on the imaginary axis.

rep = gf.classify_point(bil, np.zeros(4))
print(rep.label, "| hyperbolic:", rep.hyperbolic)
print("eigenvalues:", rep.spectrum.eigenvalues)

# ## A quadratic saddle
#
# With positive definite player blocks every eigenvalue of the Jacobian has
# positive real part.

quad = gf.QuadraticSaddle([[1.0]], [[1.0]], [[1.0]])
rep = gf.classify_point(quad, [0.0, 0.0])
print(rep.label, rep.spectrum.eigenvalues)

# ## Perturbing the bilinear game
#
# Adding `-(eps/2) |x|^2` keeps the origin critical but breaks the Nash
# conditions for every `eps > 0`.

for eps in (0.0, 1e-3, 1e-2):
    r = gf.classify_point(gf.PerturbedBilinear([[1.0]], eps), [0.0, 0.0])
    print(f"eps={eps:g}: {r.label}, block 1 min eig {r.block1_verdict.min_eig:+.3g}")

# Continuation along `f + t g` with `g = -x^2 / 2` shows the same thing as a
# path: the point stays put, the Nash property is lost at the first step.

minus_half = gf.Polynomial(gf.BlockDims(1, 1), (gf.PolyTerm(-0.5, (2,), (0,)),))
path = gf.continuation(gf.Bilinear([[1.0]]), minus_half, [0.0, 0.0], 0.1, 10)
print(path.status, "at t =", path.status_t)
for e in path.entries[:4]:
    print(f"t={e.t:.3f} point={e.point.flat} lne_necessary={e.report.lne_necessary}")

# A differential Nash point instead survives small smooth perturbations.

rng = np.random.default_rng(0)
pert = gf.random_polynomial(gf.BlockDims(1, 1), 3, rng, min_degree=2)
ok, path = gf.structural_stability_check(quad, pert, [0.0, 0.0], 0.05, 20)
print("persists:", ok)
print(np.round(path.points[::5], 6))

# ## Finding critical points
#
# Multistart Newton from uniform seeds, deduplicated and sorted.

game = gf.random_polynomial(gf.BlockDims(1, 1), 3, np.random.default_rng(7))
found = gf.multistart(game, -2, 2, 32, rng_seed=0)
print(f"{len(found)} critical points, {found.n_unconverged} seeds did not converge")
for r in found:
    print(np.round(r.point.flat, 6), r.label, "hyperbolic" if r.hyperbolic else "")
