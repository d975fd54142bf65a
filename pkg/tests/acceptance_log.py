"""Collects one verdict line per acceptance criterion for the end-of-run summary."""

RESULTS: dict[int, str] = {}


def record(criterion: int, ok: bool, detail: str) -> str:
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[criterion] = line
    print(line)
    return line
