"""Collects one verdict per acceptance criterion for the terminal summary."""

from collections import defaultdict


class AcceptanceLog:
    def __init__(self):
        self._parts = defaultdict(list)

    def record(self, criterion: int, ok: bool, detail: str) -> bool:
        self._parts[criterion].append((bool(ok), detail))
        return ok

    def summary(self):
        out = []
        for c in sorted(self._parts):
            parts = self._parts[c]
            verdict = "PASS" if all(ok for ok, _ in parts) else "FAIL"
            out.append(f"criterion {c}: {verdict}  " + "; ".join(d for _, d in parts))
        return out


LOG = AcceptanceLog()
