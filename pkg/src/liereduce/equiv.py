"""Expression equivalence: structural zero test with seeded numeric fallback.

The structural path (normalize the difference, clear term-level denominators)
never yields false positives.  When it is inconclusive, the difference is
evaluated at random rational sample points drawn from the safe domain of every
kernel and fractional power present: if any such constraint exists, all
variables are sampled positive and the constraints are rechecked numerically.
Sampling is deterministic: the RNG is seeded from the configured seed and a
checksum of the expression, so results do not depend on call order.
"""

from __future__ import annotations

import math
import random
import zlib
from dataclasses import dataclass
from fractions import Fraction

from .expr import (DomainError, Expr, ExprError, ZERO, clear_denominators,
                   eval_numeric, free_vars, positivity_constraints, render)


class SamplingDomainError(ExprError):
    """No sample point satisfying the positivity constraints was found."""


@dataclass(frozen=True)
class SampleConfig:
    tolerance: float = 1e-9
    samples: int = 16
    seed: int = 20260809
    max_attempts: int = 80

    def with_(self, **kw) -> "SampleConfig":
        d = dict(tolerance=self.tolerance, samples=self.samples,
                 seed=self.seed, max_attempts=self.max_attempts)
        d.update(kw)
        return SampleConfig(**d)


DEFAULT_CONFIG = SampleConfig()


def _rng_for(e: Expr, config: SampleConfig) -> random.Random:
    digest = zlib.crc32(render(e).encode("utf-8"))
    return random.Random((config.seed << 32) ^ digest)


def _draw(rng: random.Random, positive: bool) -> Fraction:
    v = Fraction(rng.randint(3, 40), rng.randint(10, 24))
    if not positive and rng.random() < 0.5:
        v = -v
    return v


def sample_points(e: Expr, config: SampleConfig = DEFAULT_CONFIG,
                  extra_vars=()) -> list[dict[str, Fraction]]:
    """Deterministic rational sample points inside the safe domain of e."""
    rng = _rng_for(e, config)
    names = sorted(set(free_vars(e)) | set(extra_vars))
    constraints = positivity_constraints(e)
    positive = bool(constraints)
    points = []
    attempts = 0
    while len(points) < config.samples:
        attempts += 1
        if attempts > config.max_attempts + config.samples:
            raise SamplingDomainError(
                f"sampling domain empty for {render(e)!r}")
        pt = {n: _draw(rng, positive) for n in names}
        try:
            ok = all(eval_numeric(c, pt) > 1e-6 for c in constraints)
        except (DomainError, OverflowError):
            ok = False
        if ok:
            points.append(pt)
    return points


def equiv(a: Expr, b: Expr, config: SampleConfig = DEFAULT_CONFIG) -> bool:
    """True when a - b is zero structurally or at every sample point."""
    d = a - b
    if d == ZERO:
        return True
    if clear_denominators(d) == ZERO:
        return True
    if not free_vars(d):
        try:
            return abs(eval_numeric(d, {})) <= config.tolerance
        except DomainError:
            raise SamplingDomainError(
                f"constant expression {render(d)!r} leaves the real domain")
    checked = 0
    rng = _rng_for(d, config)
    names = sorted(free_vars(d))
    constraints = positivity_constraints(d)
    positive = bool(constraints)
    attempts = 0
    while checked < config.samples:
        attempts += 1
        if attempts > config.max_attempts + config.samples:
            raise SamplingDomainError(f"sampling domain empty for {render(d)!r}")
        pt = {n: _draw(rng, positive) for n in names}
        try:
            if any(eval_numeric(c, pt) <= 1e-6 for c in constraints):
                continue
            v = eval_numeric(d, pt)
        except (DomainError, OverflowError):
            continue
        if not math.isfinite(v):
            continue
        if abs(v) > config.tolerance:
            return False
        checked += 1
    return True


def is_zero(e: Expr, config: SampleConfig = DEFAULT_CONFIG) -> bool:
    return equiv(e, ZERO, config)


def sampled_nonzero(e: Expr, config: SampleConfig = DEFAULT_CONFIG) -> bool:
    """True when e is not equivalent to zero (so safe to divide by)."""
    return not is_zero(e, config)
