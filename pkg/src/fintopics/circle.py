"""Circle-loss forward pass, analytic gradients, and the scale/margin schedule.

The loss couples positive-pair and negative-pair similarity scores through a
joint softplus-of-products form with per-pair adaptive weights:

    L = log(1 + sum_j exp(g * an_j * (sn_j - Dn))
              * sum_i exp(-g * ap_i * (sp_i - Dp)))

with ap = max(0, Op - sp), an = max(0, sn - On), Op = 1 + m, On = -m,
Dp = 1 - m, Dn = m.  Either pair list empty collapses the product term and
yields L = 0.  Evaluated forward-only: no optimizer lives here.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams, StepOutOfRange


@dataclass(frozen=True)
class CircleLossParams:
    scale: float
    margin: float

    def __post_init__(self):
        if not (self.scale > 0.0):
            raise InvalidParams(f"scale must be positive, got {self.scale}")
        if not (0.0 < self.margin < 0.5):
            raise InvalidParams(f"margin must lie in (0, 0.5), got {self.margin}")


@dataclass
class SimilarityBatch:
    """Similarity scores for positive and negative pairs.

    Cosine scores live in [-1, 1], but the loss is well defined slightly
    beyond: the positive-pair optimum sits at 1 + margin, and evaluating
    exactly there must be possible (it clamps the pair weight to zero).
    """

    positives: np.ndarray
    negatives: np.ndarray

    def __post_init__(self):
        self.positives = np.asarray(self.positives, dtype=np.float64).ravel()
        self.negatives = np.asarray(self.negatives, dtype=np.float64).ravel()


def _logits(batch: SimilarityBatch, params: CircleLossParams):
    g, m = params.scale, params.margin
    sp, sn = batch.positives, batch.negatives
    ap = np.maximum(0.0, (1.0 + m) - sp)
    an = np.maximum(0.0, sn - (-m))
    logit_p = -g * ap * (sp - (1.0 - m))
    logit_n = g * an * (sn - m)
    return ap, an, logit_p, logit_n


def _logsumexp(x: np.ndarray) -> float:
    hi = float(np.max(x))
    return hi + float(np.log(np.sum(np.exp(x - hi))))


def circle_loss(batch: SimilarityBatch, params: CircleLossParams) -> float:
    """Forward loss value; zero when either pair list is empty."""
    if batch.positives.size == 0 or batch.negatives.size == 0:
        return 0.0
    _, _, logit_p, logit_n = _logits(batch, params)
    z = _logsumexp(logit_n) + _logsumexp(logit_p)
    # softplus(z) via logaddexp keeps exp(z) from overflowing at scale 16
    return float(np.logaddexp(0.0, z))


def circle_loss_grad(
    batch: SimilarityBatch, params: CircleLossParams
) -> tuple[np.ndarray, np.ndarray]:
    """Partial derivatives of the loss w.r.t. each score.

    The clamp in ap/an is treated as a function of the score with subgradient
    0 at the clamp point, so scores at or past their optimum get gradient 0.
    Returns (d_positives, d_negatives).
    """
    sp, sn = batch.positives, batch.negatives
    if sp.size == 0 or sn.size == 0:
        return np.zeros_like(sp), np.zeros_like(sn)
    g, m = params.scale, params.margin
    ap, an, logit_p, logit_n = _logits(batch, params)
    lse_p = _logsumexp(logit_p)
    lse_n = _logsumexp(logit_n)
    z = lse_n + lse_p
    sigma = 1.0 / (1.0 + np.exp(-z)) if z < 50 else 1.0  # d softplus / d z
    soft_p = np.exp(logit_p - lse_p)
    soft_n = np.exp(logit_n - lse_n)
    # d logit / d s with the product rule; indicator term vanishes when clamped
    dlogit_p = -g * (-(sp < 1.0 + m).astype(float) * (sp - (1.0 - m)) + ap)
    dlogit_n = g * ((sn > -m).astype(float) * (sn - m) + an)
    return sigma * soft_p * dlogit_p, sigma * soft_n * dlogit_n


def curriculum_schedule(
    step: int,
    total_steps: int,
    start: tuple[float, float] = (5.0, 0.25),
    end: tuple[float, float] = (16.0, 0.1),
) -> CircleLossParams:
    """Linear scale/margin interpolation from (5, 0.25) to (16, 0.1)."""
    if total_steps < 1:
        raise StepOutOfRange(f"total_steps must be >= 1, got {total_steps}")
    if not (0 <= step <= total_steps):
        raise StepOutOfRange(f"step {step} outside [0, {total_steps}]")
    t = step / total_steps
    scale = start[0] + t * (end[0] - start[0])
    margin = start[1] + t * (end[1] - start[1])
    return CircleLossParams(scale=scale, margin=margin)
