"""Line-failure probability generators for the distribution experiments.

Covers the probability models used to study how the failure distribution
shapes the worst-case interdiction plan:

* ``severe_event`` shifts a region's reliability probabilities toward 1 in
  steps of one fifth of the remaining headroom, simulating an extreme event
  of increasing severity over a geographic set of lines;
* ``budget_normalize`` rescales raw positive weights to sum to a fixed
  probability budget (clamping at 1 and redistributing any excess), so that
  different distributions can be compared fairly;
* ``sample`` draws the three budget-experiment distributions: a degenerate
  0.5 ("det", the deterministic variant), uniform on (0,1), and a unit-rate
  exponential truncated to (0,1);
* ``range_uniform`` draws i.i.d. uniforms over the [min, max] range of a
  reference reliability dataset, for cases without published line data.

All randomness flows through a counter-based Philox generator seeded
explicitly, so streams are reproducible across platforms and processes.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, UsageError

PRNG_ALGORITHM = "philox4x64"

DET = "det"
UNIFORM = "uniform"
TEXP = "texp"
SAMPLE_MODES = (DET, UNIFORM, TEXP)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def severe_event(pr_reliability, region, n: int):
    """Shift the probabilities of the region's lines toward 1 by n fifths.

    ``pr_reliability`` maps line id -> base probability; lines in ``region``
    get ``pr + n (1 - pr)/5``, everything else is untouched.  ``n = 0`` is
    the identity; severities beyond 3 are accepted but exceed the range the
    scaling was designed for.
    """
    if n < 0:
        raise DomainError(f"severity must be nonnegative, got {n}")
    region = set(region)
    missing = region.difference(pr_reliability)
    if missing:
        raise UsageError(f"region lines missing from probability data: {sorted(missing)}")
    out = {}
    for lid, pr in pr_reliability.items():
        if not (0.0 < pr <= 1.0):
            raise DomainError(f"line {lid}: probability {pr} outside (0, 1]")
        out[lid] = pr + n * (1.0 - pr) / 5.0 if lid in region else pr
    return out


def budget_normalize(raw, budget: float):
    """Scale positive weights to sum to ``budget``, staying within (0, 1].

    Plain proportional scaling is used when it keeps every value at or below
    1.  Otherwise the offending values are clamped to 1 and the remaining
    budget is redistributed proportionally among the unclamped lines,
    iterating until feasible.  The result is invariant to a positive
    rescaling of ``raw``.
    """
    ids = list(raw)
    vals = np.array([float(raw[i]) for i in ids])
    if np.any(vals <= 0):
        raise DomainError("raw weights must be strictly positive")
    if budget <= 0:
        raise DomainError(f"budget must be positive, got {budget}")
    if budget > len(vals):
        raise DomainError(f"budget {budget} cannot fit in (0,1]^{len(vals)}")
    out = np.zeros(len(vals))
    clamped = np.zeros(len(vals), dtype=bool)
    remaining = float(budget)
    while True:
        free = ~clamped
        scale = remaining / vals[free].sum()
        scaled = vals * scale
        over = free & (scaled > 1.0)
        if not over.any():
            out[free] = scaled[free]
            break
        clamped |= over
        out[over] = 1.0
        remaining = budget - clamped.sum()
        if remaining <= 0 or not (~clamped).any():
            # budget <= number of clamped lines: everything left gets epsilon-free scaling
            out[~clamped] = remaining / max((~clamped).sum(), 1)
            break
    return {i: float(v) for i, v in zip(ids, out)}


def sample(mode: str, count: int, seed: int):
    """Draw ``count`` raw probability samples from one of the three models."""
    if count < 1:
        raise UsageError(f"count must be >= 1, got {count}")
    if mode == DET:
        return np.full(count, 0.5)
    rng = _rng(seed)
    u = rng.random(count)
    if mode == UNIFORM:
        return u
    if mode == TEXP:
        # inverse CDF of density e^{-x} / (1 - e^{-1}) on (0, 1)
        return -np.log(1.0 - u * (1.0 - math.exp(-1.0)))
    raise UsageError(f"unknown sample mode {mode!r}")


def texp_mean() -> float:
    """Analytic mean of the truncated exponential: (1 - 2/e) / (1 - 1/e)."""
    return (1.0 - 2.0 / math.e) / (1.0 - 1.0 / math.e)


def range_uniform(pr_reference, count: int, seed: int):
    """i.i.d. draws uniform over [min, max] of a reference probability set."""
    vals = list(pr_reference.values()) if isinstance(pr_reference, dict) else list(pr_reference)
    if not vals:
        raise UsageError("reference probability set is empty")
    lo, hi = min(vals), max(vals)
    rng = _rng(seed)
    return lo + (hi - lo) * rng.random(count)


def probability_csv(net, pr_by_line) -> str:
    """Render probabilities in the grid-model CSV format for the given network."""
    lines = ["from_bus,to_bus,circuit,probability"]
    counts = {}
    for line in net.lines:
        key = (line.from_bus, line.to_bus)
        counts[key] = counts.get(key, 0) + 1
        lines.append(f"{line.from_bus},{line.to_bus},{counts[key]},{pr_by_line[line.id]!r}")
    return "\n".join(lines) + "\n"


def parse_region(text: str):
    """Newline-separated line ids (a geographic region file)."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tok = raw.strip()
        if not tok or tok.startswith("#"):
            continue
        try:
            out.append(int(tok))
        except ValueError:
            raise DomainError(f"region file line {lineno}: not a line id: {tok!r}") from None
    return out
