"""Compare every extended correlator from the recursion with the Lax-operator route."""

import sys
import time

from rspin.correlators import Engine


def main(argv: list[str]) -> int:
    rs = [int(a) for a in argv] or [2, 3, 4]
    failed = False
    for r in rs:
        start = time.perf_counter()
        report = Engine(r, 6, 2).crosscheck()
        print(f"{report.summary()}  [{time.perf_counter() - start:.1f}s]")
        failed |= not report.ok
    return int(failed)


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
