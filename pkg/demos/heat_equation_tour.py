"""Tour of the heat-equation structure behind the closed forms.

Three related facts, each checked numerically:

1. every closed-form right-hand side solves the same heat equation
   2*pi*i*kappa du/dtau = d^2u/dlambda^2 + p(p+1) rho'(lambda) u
   that the block integrals satisfy (residuals at machine precision,
   using exact series derivatives);

2. a block computed purely by quadrature satisfies it too, which is
   checked with Richardson finite differences -- quadrature and
   closed forms never share code, so this is an independent loop;

3. at the degeneration points lambda -> 0 and lambda -> tau the heat
   equation collapses to a first-order ODE in tau that pins down the
   scalar weight in each closed form; all four weight recipes solve it.

Run:  python3 demos/heat_equation_tour.py
"""

from elliptic_selberg.blocks import BlockIndex
from elliptic_selberg.specfun import ModularPoint
from elliptic_selberg.transforms import BlockFunction
from elliptic_selberg.verify import (kzb_residual, kzb_solution_for_identity,
                                     ode_residual, symmetric_theta_solution)


def main():
    pt = ModularPoint(0.9j)

    print("1. closed forms, exact derivatives")
    for ident in range(1, 11):
        sol = kzb_solution_for_identity(ident, 1)
        resid = kzb_residual(sol, 0.31, pt, mode="analytic_rhs")
        print(f"   identity-{ident:<2d} (kappa={sol.kappa:2d}):  "
              f"residual {resid:.1e}")
    for level, m in ((2, 1), (4, 1), (6, 5)):
        sol = symmetric_theta_solution(level, m)
        resid = kzb_residual(sol, 0.27, pt, mode="analytic_rhs")
        print(f"   sym-theta({level},{m}) alone:  residual {resid:.1e}")

    print()
    print("2. a quadrature block, finite differences")
    f = BlockFunction.from_block(BlockIndex(1, 5, 2))
    resid = kzb_residual(f, 0.31, pt, mode="finite_difference", h=5e-3)
    print(f"   u(p=1, kappa=5, n=2):  residual {resid:.1e}")

    print()
    print("3. scalar-weight ODE at the two degeneration points")
    for recipe, kappa in (("eta_power", 5), ("theta21_power", 6),
                          ("theta4_power", 8), ("theta6_power", 10)):
        r0 = ode_residual("del_at_0", kappa, 1, recipe, pt)
        rt = ode_residual("del3_at_tau", kappa, 1, recipe, pt)
        print(f"   {recipe:15s} (kappa={kappa:2d}):  "
              f"at 0 {r0:.1e},  at tau {rt:.1e}")


if __name__ == "__main__":
    main()
