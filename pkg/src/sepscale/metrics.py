"""Scale-invariant SDR and its permutation-invariant variant.

All inner products run in float64.  A perfect reconstruction yields +inf dB
(a real sentinel, not a capped number); capping for display is the caller's
concern.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import ShapeError, ZeroReferenceError


@dataclass(frozen=True)
class EvalResult:
    """Outcome of a permutation-invariant evaluation."""

    per_source_si_sdr: tuple[float, ...]
    mean_si_sdr: float
    best_permutation: tuple[int, ...]


def si_sdr(estimate, reference) -> float:
    """Scale-invariant signal-to-distortion ratio in dB.

    The estimate is projected onto the reference (alpha = <est, ref> /
    <ref, ref>); the value is 10*log10(||alpha*ref||^2 / ||alpha*ref -
    est||^2).  Rescaling the estimate leaves the value unchanged.  An
    all-zero reference is undefined; a zero residual returns +inf.
    """
    e = np.asarray(estimate, dtype=np.float64).reshape(-1)
    r = np.asarray(reference, dtype=np.float64).reshape(-1)
    if e.size != r.size or e.size < 1:
        raise ShapeError(
            f"estimate has {e.size} samples, reference has {r.size}; "
            "need equal non-zero lengths"
        )
    ref_energy = float(np.dot(r, r))
    if ref_energy == 0.0:
        raise ZeroReferenceError("reference signal is all zeros")
    alpha = float(np.dot(e, r)) / ref_energy
    target = alpha * r
    residual = target - e
    target_energy = float(np.dot(target, target))
    residual_energy = float(np.dot(residual, residual))
    if residual_energy == 0.0:
        return math.inf if target_energy > 0.0 else -math.inf
    if target_energy == 0.0:
        return -math.inf
    return 10.0 * math.log10(target_energy / residual_energy)


def pit_si_sdr(estimates, references) -> EvalResult:
    """Best-permutation SI-SDR over equal-count source lists.

    Every assignment of estimates to references is scored; the permutation
    maximizing the mean wins (ties keep the earliest permutation in
    lexicographic order, so identity beats a swap at equal score).
    ``best_permutation[j]`` is the estimate index paired with reference j.
    """
    ests = [np.asarray(e, dtype=np.float64).reshape(-1) for e in estimates]
    refs = [np.asarray(r, dtype=np.float64).reshape(-1) for r in references]
    if len(ests) != len(refs) or not ests:
        raise ShapeError(
            f"got {len(ests)} estimates and {len(refs)} references; "
            "need equal non-zero counts"
        )
    lengths = {a.size for a in ests} | {a.size for a in refs}
    if len(lengths) != 1:
        raise ShapeError(f"signals have mixed lengths {sorted(lengths)}")

    best: tuple[tuple[int, ...], tuple[float, ...], float] | None = None
    for perm in permutations(range(len(ests))):
        scores = tuple(si_sdr(ests[perm[j]], refs[j]) for j in range(len(refs)))
        mean = sum(scores) / len(scores)
        if best is None or mean > best[2]:
            best = (perm, scores, mean)
    assert best is not None
    return EvalResult(
        per_source_si_sdr=best[1],
        mean_si_sdr=best[2],
        best_permutation=best[0],
    )
