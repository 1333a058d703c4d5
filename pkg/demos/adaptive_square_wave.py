"""How few nodes the adaptive scheme needs for a travelling square pulse.

The pulse crosses the periodic domain once.  Fine nodes only live near the
two jumps and follow them; smooth plateaus stay at the coarse level.  The
uniform run at the finest level is the yardstick for both accuracy and cost.

    python demos/adaptive_square_wave.py
"""
import time

from wavelet_upwind import (AdaptConfig, LimiterConfig, SchemeConfig, TimeControl, error_norms,
                            make_problem, solve)
from wavelet_upwind.problems import M_BY_LEVEL, node_weights

problem = make_problem("square_wave")
J0, Jmax = 6, 10
limiter_M = M_BY_LEVEL[Jmax]

t0 = time.perf_counter()
adaptive = solve(problem, SchemeConfig(N=5, J0=J0, Jmax=Jmax, adaptive=True),
                 AdaptConfig(eps=1e-3), LimiterConfig("TVBR", limiter_M), TimeControl(problem.t_end))
t_adaptive = time.perf_counter() - t0

t0 = time.perf_counter()
uniform = solve(problem, SchemeConfig(N=5, J0=Jmax), limiter=LimiterConfig("TVBU", limiter_M),
                control=TimeControl(problem.t_end))
t_uniform = time.perf_counter() - t0

for name, sol, secs in (("adaptive", adaptive, t_adaptive), ("uniform", uniform, t_uniform)):
    err = error_norms(sol.state, problem.exact(sol.x, sol.t), node_weights(sol.grid))
    print(f"{name:9s} nodes {sol.grid.size:5d}  l2 error {err.l2:.4f}  {secs:5.1f}s")

counts = [r.n_active for r in adaptive.adapt_log.records]
print(f"active nodes during the run: min {min(counts)}, max {max(counts)}, "
      f"uniform grid {uniform.grid.size}")
deepest = adaptive.grid.levels.max()
fine = adaptive.x[adaptive.grid.levels == deepest]
print(f"deepest level at the end is {deepest}; its nodes cluster around the jumps at -0.4 and 0.4:")
print("  " + " ".join(f"{x:.3f}" for x in fine[:: max(1, len(fine) // 8)]))
