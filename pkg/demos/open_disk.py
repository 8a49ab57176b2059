"""Nonzero open (disk) correlators read off the extended potential."""

from fractions import Fraction

from rspin.correlators import CorrelatorKey, Engine, multisets
from rspin.scalar import format_rational


def main() -> None:
    for r in (2, 3, 4):
        engine = Engine(r, 5, 1)
        print(f"r = {r}")
        for ins in multisets(r, 3, 1):
            for m in range(5 - len(ins) + 1):
                v = engine.open(ins, m)
                if v:
                    key = CorrelatorKey(r, "open", tuple(ins), m)
                    print(f"  {key.text():<40} {format_rational(Fraction(v))}")


if __name__ == "__main__":
    main()
