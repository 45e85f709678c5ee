import math

import numpy as np
import pytest
from scipy import stats

from gvjump import tilted
from gvjump.rng import RandomStream
from gvjump.special import tilted_cdf, tilted_moment
from gvjump.tilted import (
    EXPONENTIAL_RAYLEIGH_CUTOFF,
    GAMMA_EXPONENTIAL_CUTOFF,
    EnvelopeViolation,
    ProposalDomainError,
    ProposalKind,
    envelope_excess,
    expected_trials,
    gaussian_mode,
    sample_tilted,
    sample_tilted_with,
    select_proposal,
)

NEG = [ProposalKind.GAMMA_SHIFTED, ProposalKind.EXPONENTIAL_SHIFTED, ProposalKind.RAYLEIGH_SHIFTED]
POS = [ProposalKind.MIXED_RAYLEIGH_GAUSSIAN, ProposalKind.GAUSSIAN_MODE]


def test_expected_trials_anchors():
    assert expected_trials(ProposalKind.MIXED_RAYLEIGH_GAUSSIAN, 0.0) == pytest.approx(1.0, rel=1e-14)
    c0 = expected_trials(ProposalKind.GAUSSIAN_MODE, 0.0)
    assert c0 == pytest.approx(math.sqrt(2 * math.pi) * math.exp(-0.5), rel=1e-14)
    assert round(c0, 2) == 1.52


def test_mixture_constant_below_two():
    for m in np.concatenate([np.linspace(0.0, 10.0, 501), [50.0, 1e3]]):
        assert expected_trials(ProposalKind.MIXED_RAYLEIGH_GAUSSIAN, m) <= 2.0


def test_negative_side_asymptotics():
    assert expected_trials(ProposalKind.RAYLEIGH_SHIFTED, -1e-6) == pytest.approx(1.0, abs=1e-5)
    c6 = expected_trials(ProposalKind.RAYLEIGH_SHIFTED, -6.0)
    assert c6 / 36.0 == pytest.approx(1.0, abs=0.1)
    assert expected_trials(ProposalKind.RAYLEIGH_SHIFTED, -200.0) / 200.0**2 == pytest.approx(1.0, abs=1e-3)
    ratios = [expected_trials(ProposalKind.EXPONENTIAL_SHIFTED, m) / (math.exp(-0.5) * -m) for m in (-4.0, -16.0, -64.0)]
    assert ratios[0] == pytest.approx(1.0, abs=0.2)
    assert ratios[0] > ratios[1] > ratios[2] > 1.0
    assert expected_trials(ProposalKind.EXPONENTIAL_SHIFTED, -300.0) / (math.exp(-0.5) * 300) == pytest.approx(1.0, abs=1e-3)


def test_selected_proposal_is_cheap():
    for m in np.linspace(-40.0, 40.0, 4001):
        assert expected_trials(select_proposal(m), m) < 2.1


def test_regime_table():
    assert select_proposal(-6.0) is ProposalKind.GAMMA_SHIFTED
    assert select_proposal(GAMMA_EXPONENTIAL_CUTOFF) is ProposalKind.EXPONENTIAL_SHIFTED
    assert select_proposal(-1.0) is ProposalKind.EXPONENTIAL_SHIFTED
    assert select_proposal(EXPONENTIAL_RAYLEIGH_CUTOFF) is ProposalKind.RAYLEIGH_SHIFTED
    assert select_proposal(-0.1) is ProposalKind.RAYLEIGH_SHIFTED
    assert select_proposal(0.0) is ProposalKind.MIXED_RAYLEIGH_GAUSSIAN
    assert select_proposal(3.0) is ProposalKind.MIXED_RAYLEIGH_GAUSSIAN
    # cutoffs sit where neighbouring envelope constants cross
    for cut, lo, hi in (
        (GAMMA_EXPONENTIAL_CUTOFF, ProposalKind.GAMMA_SHIFTED, ProposalKind.EXPONENTIAL_SHIFTED),
        (EXPONENTIAL_RAYLEIGH_CUTOFF, ProposalKind.EXPONENTIAL_SHIFTED, ProposalKind.RAYLEIGH_SHIFTED),
    ):
        assert expected_trials(lo, cut) == pytest.approx(expected_trials(hi, cut), rel=1e-12)


@pytest.mark.parametrize("kind", NEG)
def test_negative_kinds_reject_nonnegative_m(kind, stream):
    with pytest.raises(ProposalDomainError):
        expected_trials(kind, 0.0)
    with pytest.raises(ProposalDomainError):
        sample_tilted_with(kind, 1.0, stream)


@pytest.mark.parametrize("kind", POS)
def test_positive_kinds_reject_negative_m(kind, stream):
    with pytest.raises(ProposalDomainError):
        expected_trials(kind, -0.5)


def test_gaussian_mode_is_mode():
    for m in (-5.0, -0.3, 0.0, 2.0, 1e4):
        a = gaussian_mode(m)
        assert a == pytest.approx(0.5 * (math.sqrt(m * m + 4) - m), rel=1e-9)
        # d/dy log f_m = 1/(m+y) - y vanishes at the mode
        assert 1.0 / (m + a) - a == pytest.approx(0.0, abs=1e-9 * max(1.0, abs(m)))


@pytest.mark.parametrize("m", [-6.0, -3.0, -2.0, -1.5, -0.5, -0.1])
@pytest.mark.parametrize("kind", NEG)
def test_envelope_domination_negative(kind, m):
    ys = np.linspace(-m, -m + 12.0 + abs(m), 10_000)
    assert envelope_excess(kind, m, ys) <= 1.0 + 1e-12


@pytest.mark.parametrize("m", [0.0, 0.1, 1.0, 3.0, 6.0])
@pytest.mark.parametrize("kind", POS)
def test_envelope_domination_positive(kind, m):
    ys = np.linspace(-m, -m + 12.0 + abs(m), 10_000)
    assert envelope_excess(kind, m, ys) <= 1.0 + 1e-12


def test_samples_respect_support(stream):
    vals = [sample_tilted(5.0, stream).value for _ in range(20_000)]
    assert min(vals) > -5.0
    for m in (-4.0, -0.7, 0.0):
        s = sample_tilted(m, stream)
        assert s.value > -m
        assert s.excess == pytest.approx(m + s.value)
        assert s.trials >= 1


def test_mean_at_zero_matches_quadrature():
    rng = RandomStream(99, 1)
    n = 1_000_000
    ys = np.fromiter((sample_tilted(0.0, rng).value for _ in range(n)), float, n)
    se = ys.std(ddof=1) / math.sqrt(n)
    assert abs(ys.mean() - tilted_moment(0.0, 1)) < 4 * se


def test_acceptance_rate_gamma():
    rng = RandomStream(5, 2)
    n = 100_000
    trials = np.array([sample_tilted_with(ProposalKind.GAMMA_SHIFTED, -3.0, rng).trials for _ in range(n)])
    # trials are geometric with success probability 1/C_m
    acc = n / trials.sum()
    p = 1.0 / expected_trials(ProposalKind.GAMMA_SHIFTED, -3.0)
    se = math.sqrt(p * p * (1 - p) / n)
    assert abs(acc - p) < 3 * se


@pytest.mark.parametrize(
    "kind,m",
    [(k, m) for k in NEG for m in (-4.0, -1.2, -0.3)] + [(k, m) for k in POS for m in (0.0, 0.8, 4.0)],
)
def test_each_proposal_ks(kind, m):
    rng = RandomStream(17, hash((kind.value, m)) % 1000)
    ys = np.array([sample_tilted_with(kind, m, rng).value for _ in range(20_000)])
    assert stats.kstest(ys, lambda y: tilted_cdf(m, y)).pvalue > 1e-3


def test_deterministic_given_stream():
    a = [sample_tilted(-1.3, RandomStream(3, 4)).value for _ in range(3)]
    r1, r2 = RandomStream(3, 4), RandomStream(3, 4)
    assert [sample_tilted(0.4, r1).value for _ in range(50)] == [sample_tilted(0.4, r2).value for _ in range(50)]
    assert len(set(a)) == 1


def test_shrunken_envelope_is_detected(monkeypatch):
    monkeypatch.setattr(tilted, "_envelope_scale", 0.9)
    assert envelope_excess(ProposalKind.GAUSSIAN_MODE, 1.0, np.linspace(-1, 11, 10_000)) > 1.0
    rng = RandomStream(1, 1)
    with pytest.raises(EnvelopeViolation):
        for _ in range(100_000):
            sample_tilted_with(ProposalKind.MIXED_RAYLEIGH_GAUSSIAN, 0.0, rng)
