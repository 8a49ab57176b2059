"""r = 2: the dispersive Lax operator d^2 + u and its eps^2 correction.

For KdV the eps^2 layer of u should be (1/12) d_x^2 log(u_0x), with u_0 the
dispersionless solution. Both sides are printed truncated to the degree the
jet determines.
"""

from fractions import Fraction

from rspin.hierarchy import build_L0, build_L_dispersive, dispersive_layer
from rspin.series import TSeries


def log_one_plus(w: TSeries, cap: int) -> TSeries:
    out, p = TSeries.zero(w.space, cap), TSeries.constant(w.space, cap, 1)
    for k in range(1, cap + 1):
        p = p * w
        out = out + p.scale(Fraction((-1) ** (k + 1), k))
    return out


def main() -> None:
    cap = 5
    jet = build_L_dispersive(2, cap, 6, 2)
    u0 = build_L0(2, cap + 2, 6).f(0)
    print("u0      :", u0.truncate(cap).to_text())
    for g in range(3):
        print(f"eps^{g}   :", dispersive_layer(jet, 0, g).to_text())
    w = u0.derivative(0).scale(Fraction(1, 2)) - 1  # u0_x / 2 starts at 1
    formula = log_one_plus(w, cap + 2).derivative(0).derivative(0).scale(Fraction(1, 12))
    print("formula :", formula.truncate(cap - 2).to_text())
    ok = dispersive_layer(jet, 0, 2).truncate(cap - 2) == formula.truncate(cap - 2)
    print("agree   :", ok)


if __name__ == "__main__":
    main()
