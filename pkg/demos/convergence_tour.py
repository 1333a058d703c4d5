"""Uniform-grid refinement of the upwind wavelet scheme on smooth data.

A sine wave travels once around the periodic interval [-1, 1].  Each halving
of the spacing should divide the error by 2**4 for the fifth-order basis and
by about 2**6 for the seventh-order one, until round-off takes over.

    python demos/convergence_tour.py
"""
from wavelet_upwind import convergence_study, make_problem

problem = make_problem("linear_smooth")
for N in (5, 7):
    table = convergence_study(problem, N, [16, 32, 64, 128])
    print(f"\nbasis order N={N}")
    print("  N1    max error    order")
    for n1, rep in table.rows:
        order = "" if rep.l_inf_order is None else f"{rep.l_inf_order:5.2f}"
        print(f"{n1:5d}   {rep.l_inf:.3e}   {order}")
