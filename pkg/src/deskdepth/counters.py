"""Lightweight instrumentation counters.

Used to verify code-path invariants, e.g. that a pure reconstruction run
never touches pseudo-label files and a pure distillation run never builds
a warped view.
"""

from __future__ import annotations

from collections import defaultdict

_COUNTS: defaultdict[str, int] = defaultdict(int)


def bump(name: str, amount: int = 1) -> None:
    _COUNTS[name] += amount


def value(name: str) -> int:
    return _COUNTS[name]


def reset() -> None:
    _COUNTS.clear()
