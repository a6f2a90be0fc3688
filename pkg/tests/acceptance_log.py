"""Collects one verdict line per acceptance criterion for the terminal summary."""

_RESULTS = {}


def record(number, passed, detail):
    _RESULTS[number] = (bool(passed), detail)
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
    print(line)
    return passed


def lines():
    return [f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
            for k, (ok, detail) in sorted(_RESULTS.items())]
