"""Exact rejection sampling from the tilted density ``f_m``.

Five proposals are available. Three of them (shifted Gamma, shifted
exponential, shifted Rayleigh) cover ``m < 0``; the Rayleigh/Gaussian mixture
and the Gaussian centred at the mode cover ``m >= 0``. ``sample_tilted``
picks, for each ``m``, the proposal with the smallest expected trial count
``C_m``; the Gaussian-mode proposal is never picked automatically.

Every sample carries ``excess = m + value`` computed without cancellation,
because the post-jump velocity depends on ``m + value`` and ``value`` alone
can be huge when ``m`` is very negative.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .special import LOG_SQRT_2PI, SQRT_2PI, log_theta, tilted_pdf

# Crossovers of C_m between neighbouring proposals (closed form):
# Gamma = Exponential at m = -e^{1/2}, Exponential = Rayleigh at m = -e^{-1/2}.
GAMMA_EXPONENTIAL_CUTOFF = -math.exp(0.5)
EXPONENTIAL_RAYLEIGH_CUTOFF = -math.exp(-0.5)

MAX_TRIALS = 1_000_000
_SQRT_E = math.exp(0.5)
_INV_SQRT_2PI = 1.0 / SQRT_2PI

# Fault-injection hook: scaling the envelope constant below 1 must make the
# acceptance ratio exceed one somewhere, which raises EnvelopeViolation.
_envelope_scale = 1.0


class ProposalKind(enum.Enum):
    GAMMA_SHIFTED = "gamma"
    EXPONENTIAL_SHIFTED = "exponential"
    RAYLEIGH_SHIFTED = "rayleigh"
    MIXED_RAYLEIGH_GAUSSIAN = "mixture"
    GAUSSIAN_MODE = "gaussian"

    @property
    def for_negative_m(self) -> bool:
        return self in _NEGATIVE_KINDS


_NEGATIVE_KINDS = frozenset(
    {ProposalKind.GAMMA_SHIFTED, ProposalKind.EXPONENTIAL_SHIFTED, ProposalKind.RAYLEIGH_SHIFTED}
)


class ProposalDomainError(ValueError):
    """Proposal used outside the sign of ``m`` it was derived for."""


class EnvelopeViolation(RuntimeError):
    """Acceptance ratio above one, or runaway trial loop: the envelope is wrong."""


@dataclass(frozen=True)
class TiltedSample:
    value: float
    excess: float
    trials: int
    proposal: ProposalKind


def _check_domain(kind: ProposalKind, m: float) -> None:
    if not math.isfinite(m):
        raise ValueError(f"m must be finite, got {m}")
    if kind.for_negative_m and not m < 0.0:
        raise ProposalDomainError(f"{kind.name} proposal requires m < 0, got m={m}")
    if not kind.for_negative_m and m < 0.0:
        raise ProposalDomainError(f"{kind.name} proposal requires m >= 0, got m={m}")


def gaussian_mode(m: float) -> float:
    """Mode ``(sqrt(m^2+4) - m)/2`` of ``f_m``, written without cancellation."""
    if m >= 0.0:
        return 2.0 / (math.sqrt(m * m + 4.0) + m)
    return 0.5 * (math.sqrt(m * m + 4.0) - m)


def log_expected_trials(kind: ProposalKind, m: float) -> float:
    _check_domain(kind, m)
    lt = log_theta(m)
    if kind is ProposalKind.GAMMA_SHIFTED:
        return -0.5 * m * m - LOG_SQRT_2PI - 2.0 * math.log(-m) - lt
    if kind is ProposalKind.EXPONENTIAL_SHIFTED:
        return -0.5 - 0.5 * m * m - LOG_SQRT_2PI - math.log(-m) - lt
    if kind is ProposalKind.RAYLEIGH_SHIFTED:
        return -0.5 * m * m - LOG_SQRT_2PI - lt
    if kind is ProposalKind.MIXED_RAYLEIGH_GAUSSIAN:
        return math.log(m + _INV_SQRT_2PI) - lt
    alpha = gaussian_mode(m)
    return -0.5 * alpha * alpha - math.log(alpha) - lt


def expected_trials(kind: ProposalKind, m: float) -> float:
    """Envelope constant ``C_m``, i.e. the mean number of proposals per sample."""
    return math.exp(log_expected_trials(kind, m))


def proposal_pdf(kind: ProposalKind, m: float, y):
    """Density ``g_m(y)`` of the proposed value ``y`` (not of the excess ``m + y``)."""
    _check_domain(kind, m)
    y = np.asarray(y, dtype=float)
    z = m + y
    pos = z > 0.0
    zp = np.where(pos, z, 0.0)
    if kind is ProposalKind.GAMMA_SHIFTED:
        s = -m
        out = np.where(pos, s * s * zp * np.exp(-s * zp), 0.0)
    elif kind is ProposalKind.EXPONENTIAL_SHIFTED:
        s = -m
        out = np.where(pos, s * np.exp(-s * zp), 0.0)
    elif kind is ProposalKind.RAYLEIGH_SHIFTED:
        out = np.where(pos, y * np.exp(-0.5 * (y * y - m * m)), 0.0)
    elif kind is ProposalKind.MIXED_RAYLEIGH_GAUSSIAN:
        w = m / (m + _INV_SQRT_2PI)
        gauss = np.exp(-0.5 * y * y) * _INV_SQRT_2PI
        rayleigh = np.where(y >= 0.0, y * np.exp(-0.5 * y * y), 0.0)
        out = w * gauss + (1.0 - w) * rayleigh
    else:
        alpha = gaussian_mode(m)
        out = np.exp(-0.5 * (y - alpha) ** 2) * _INV_SQRT_2PI
    return float(out) if out.ndim == 0 else out


def envelope_excess(kind: ProposalKind, m: float, y) -> float:
    """``max_y f_m(y) / (C_m g_m(y))`` over the points ``y``; at most 1 for a valid envelope.

    Honours the fault-injection scale, so a shrunken envelope shows up here too.
    """
    y = np.asarray(y, dtype=float)
    f = np.asarray(tilted_pdf(m, y))
    g = np.asarray(proposal_pdf(kind, m, y)) * expected_trials(kind, m) * _envelope_scale
    mask = f > 0.0
    if not mask.any():
        return 0.0
    with np.errstate(divide="ignore"):
        return float(np.max(f[mask] / g[mask]))


def select_proposal(m: float) -> ProposalKind:
    if m >= 0.0:
        return ProposalKind.MIXED_RAYLEIGH_GAUSSIAN
    if m < GAMMA_EXPONENTIAL_CUTOFF:
        return ProposalKind.GAMMA_SHIFTED
    if m < EXPONENTIAL_RAYLEIGH_CUTOFF:
        return ProposalKind.EXPONENTIAL_SHIFTED
    return ProposalKind.RAYLEIGH_SHIFTED


def _accept(ratio: float, rng) -> bool:
    ratio /= _envelope_scale
    if ratio > 1.0 + 1e-12:
        raise EnvelopeViolation(f"acceptance ratio {ratio!r} exceeds one")
    return rng.uniform() < ratio


def _gamma(m: float, rng) -> tuple[float, int]:
    s = -m
    for trial in range(1, MAX_TRIALS + 1):
        z = (rng.exponential() + rng.exponential()) / s
        if _accept(math.exp(-0.5 * z * z), rng):
            return z, trial
    raise EnvelopeViolation(f"no acceptance after {MAX_TRIALS} gamma proposals (m={m})")


def _exponential(m: float, rng) -> tuple[float, int]:
    s = -m
    for trial in range(1, MAX_TRIALS + 1):
        z = rng.exponential() / s
        if _accept(z * _SQRT_E * math.exp(-0.5 * z * z), rng):
            return z, trial
    raise EnvelopeViolation(f"no acceptance after {MAX_TRIALS} exponential proposals (m={m})")


def _rayleigh(m: float, rng) -> tuple[float, int]:
    for trial in range(1, MAX_TRIALS + 1):
        two_e = 2.0 * rng.exponential()
        y = math.sqrt(m * m + two_e)
        # y + m = 2E / (y - m) for m < 0
        z = two_e / (y - m)
        if _accept(z / y, rng):
            return z, trial
    raise EnvelopeViolation(f"no acceptance after {MAX_TRIALS} Rayleigh proposals (m={m})")


def _mixture(m: float, rng) -> tuple[float, int]:
    weight = m / (m + _INV_SQRT_2PI)
    for trial in range(1, MAX_TRIALS + 1):
        if rng.uniform() < weight:
            y = rng.normal()
        else:
            y = math.sqrt(2.0 * rng.exponential())
        z = m + y
        denom = m + y if y >= 0.0 else m
        if z <= 0.0 or denom <= 0.0:
            continue
        if _accept(z / denom, rng):
            return z, trial
    raise EnvelopeViolation(f"no acceptance after {MAX_TRIALS} mixture proposals (m={m})")


def _gaussian(m: float, rng) -> tuple[float, int]:
    alpha = gaussian_mode(m)
    for trial in range(1, MAX_TRIALS + 1):
        y = alpha + rng.normal()
        z = m + y
        if z <= 0.0:
            continue
        if _accept(alpha * z * math.exp(-alpha * y + alpha * alpha), rng):
            return z, trial
    raise EnvelopeViolation(f"no acceptance after {MAX_TRIALS} Gaussian proposals (m={m})")


_SAMPLERS = {
    ProposalKind.GAMMA_SHIFTED: _gamma,
    ProposalKind.EXPONENTIAL_SHIFTED: _exponential,
    ProposalKind.RAYLEIGH_SHIFTED: _rayleigh,
    ProposalKind.MIXED_RAYLEIGH_GAUSSIAN: _mixture,
    ProposalKind.GAUSSIAN_MODE: _gaussian,
}


def sample_tilted_with(kind: ProposalKind, m: float, rng) -> TiltedSample:
    """Draw from ``f_m`` with a forced proposal."""
    _check_domain(kind, m)
    z, trials = _SAMPLERS[kind](m, rng)
    return TiltedSample(value=z - m, excess=z, trials=trials, proposal=kind)


def sample_tilted(m: float, rng) -> TiltedSample:
    """Draw from ``f_m`` using the proposal with the smallest ``C_m``."""
    if not math.isfinite(m):
        raise ValueError(f"m must be finite, got {m}")
    kind = select_proposal(m)
    z, trials = _SAMPLERS[kind](m, rng)
    return TiltedSample(value=z - m, excess=z, trials=trials, proposal=kind)


def sample_excess(m: float, rng) -> float:
    """``m + Y`` with ``Y ~ f_m``; the scalar fast path used by the event loop."""
    return _SAMPLERS[select_proposal(m)](m, rng)[0]
