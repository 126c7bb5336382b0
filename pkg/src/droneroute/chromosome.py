"""Type-aware chromosomes: signed customer permutations.

A positive gene is served by the truck, a negative gene by the drone.
Depots are implicit and never stored.
"""

from __future__ import annotations

import enum
from operator import ne
from typing import Iterable, List, Sequence, Tuple

Genes = Tuple[int, ...]


class FeasibilityClass(enum.Enum):
    FEASIBLE = "feasible"
    TYPE1 = "type1"  # consecutive drone genes
    TYPE2 = "type2"  # endurance violation


class ChromosomeError(ValueError):
    pass


def has_adjacent_drones(genes: Sequence[int]) -> bool:
    prev = 1
    for g in genes:
        if g < 0 and prev < 0:
            return True
        prev = g
    return False


def classify(genes: Sequence[int], range_violation: bool) -> FeasibilityClass:
    if has_adjacent_drones(genes):
        return FeasibilityClass.TYPE1
    if range_violation:
        return FeasibilityClass.TYPE2
    return FeasibilityClass.FEASIBLE


def validate(genes: Sequence[int], inst) -> List[str]:
    """Return a list of violations; empty means the chromosome is valid."""
    problems = []
    n = inst.n
    if len(genes) != n:
        problems.append(f"length {len(genes)} != n = {n}")
    seen = set()
    for pos, g in enumerate(genes):
        if not isinstance(g, int) or isinstance(g, bool):
            problems.append(f"position {pos}: gene {g!r} is not an integer")
            continue
        c = abs(g)
        if c == 0:
            problems.append(f"position {pos}: gene 0 is not a customer")
        elif c > n:
            problems.append(f"position {pos}: customer {c} out of range 1..{n}")
        elif c in seen:
            problems.append(f"position {pos}: duplicate customer {c}")
        else:
            seen.add(c)
            if g < 0 and not inst.eligible[c]:
                problems.append(f"position {pos}: customer {c} is not drone-eligible")
    missing = set(range(1, n + 1)) - seen
    if missing and len(genes) == n:
        problems.append(f"missing customers {sorted(missing)}")
    return problems


def check(genes: Sequence[int], inst) -> None:
    problems = validate(genes, inst)
    if problems:
        raise ChromosomeError("; ".join(problems))


def enforce_eligibility(genes: Iterable[int], eligible: Sequence[bool]) -> Genes:
    return tuple(g if g > 0 or eligible[-g] else -g for g in genes)


def hamming(p1: Sequence[int], p2: Sequence[int]) -> float:
    """Fraction of positions holding a different signed gene."""
    if len(p1) != len(p2):
        raise ValueError("chromosomes must have equal length")
    if not p1:
        return 0.0
    return sum(map(ne, p1, p2)) / len(p1)


def dumps(genes: Sequence[int]) -> str:
    return ",".join(str(g) for g in genes)


def loads(text: str) -> Genes:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError as exc:
        raise ChromosomeError(f"cannot parse chromosome {text!r}") from exc
