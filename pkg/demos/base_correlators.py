"""Print the base extended correlators and the X series for small r, from both pipelines."""

from fractions import Fraction

from rspin.correlators import CorrelatorKey, Engine
from rspin.scalar import format_rational


def main() -> None:
    for r in range(2, 6):
        engine = Engine(r, r + 1, 0)
        print(f"r = {r}")
        keys = [[(1, 0), (r - 2, 0)], [(1, 0), (r - 1, 0), (r - 1, 0)]]
        keys += [[(a, 0)] + [(r - 1, 0)] * (a + 1) for a in range(r)]
        for ins in keys:
            rec, hie = engine.extended(ins), engine.hierarchy_extended(ins)
            mark = "" if rec == hie else "   MISMATCH"
            text = CorrelatorKey(r, "extended", tuple(ins)).text()
            print(f"  {text:<48} {format_rational(Fraction(rec)):>8}{mark}")


if __name__ == "__main__":
    main()
