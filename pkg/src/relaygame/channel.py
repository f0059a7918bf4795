"""Link-quality models over Rayleigh fading.

Closed-form outage and BER expressions plus a seeded Monte Carlo estimator of
the cooperative outage event.  All SNRs here are linear ratios; dB conversion
happens only at the scenario-loading boundary.

Monte Carlo fading convention: squared channel gains are exponentially
distributed with mean dist^-pathloss_exp (unit mean for the source-destination
hop) and a common SNR multiplier ``snr_avg``.  Under this convention the
closed-form outage expression is exact, so the estimator converges to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

#: Below this relative spacing the removable singularities switch to their
#: limit branches.
SINGULARITY_TOL = 1e-9


@dataclass(frozen=True)
class LinkModel:
    """Average-SNR and geometry description of one source-relay-destination path."""

    target_rate: float   # bits/s/Hz
    snr_avg: float       # common transmit SNR for the cooperative outage form
    pathloss_exp: float
    dist_sr: float       # source -> relay, normalized units
    dist_rd: float       # relay -> destination
    snr_sd: float        # mean per-hop SNRs for the BER forms
    snr_sr: float
    snr_rd: float

    def __post_init__(self) -> None:
        if self.target_rate < 0:
            raise ValidationError(f"target_rate must be >= 0, got {self.target_rate}")
        if self.pathloss_exp < 0:
            raise ValidationError(f"pathloss_exp must be >= 0, got {self.pathloss_exp}")
        for name in ("snr_avg", "snr_sd", "snr_sr", "snr_rd"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("dist_sr", "dist_rd"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be > 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class ChannelDraw:
    """One realization of the three squared channel gains."""

    gain_sd: float
    gain_sr: float
    gain_rd: float

    def __post_init__(self) -> None:
        for name in ("gain_sd", "gain_sr", "gain_rd"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0")


@dataclass(frozen=True)
class OutageEstimate:
    """Monte Carlo hit fraction with its binomial standard error."""

    probability: float
    stderr: float
    trials: int
    seed: int


def mutual_info_direct(gain_sd: float, snr: float) -> float:
    """Direct-path rate: log2(1 + g*snr)."""
    return math.log2(1.0 + gain_sd * snr)


def mutual_info_source_relay(gain_sr: float, snr: float) -> float:
    """First-hop rate, halved for the two-slot cooperative cycle."""
    return 0.5 * math.log2(1.0 + gain_sr * snr)


def mutual_info_mrc(gain_sd: float, gain_rd: float, snr: float) -> float:
    """Combined-path rate after maximal-ratio combining, halved likewise."""
    return 0.5 * math.log2(1.0 + (gain_sd + gain_rd) * snr)


def cooperative_outage_event(draw: ChannelDraw, link: LinkModel) -> bool:
    """Whether this realization fails to carry the target rate.

    The achieved rate is max(direct, min(first hop, combined)): the relay path
    only helps when the relay itself decoded.
    """
    snr, r = link.snr_avg, link.target_rate
    direct = mutual_info_direct(draw.gain_sd, snr)
    relay_path = min(mutual_info_source_relay(draw.gain_sr, snr),
                     mutual_info_mrc(draw.gain_sd, draw.gain_rd, snr))
    return max(direct, relay_path) < r


def outage_closed_form(link: LinkModel) -> float:
    """Cooperative outage probability in closed form.

    Raw value is returned unclamped; reporting layers may clip tiny negative
    round-off.  The removable singularity at dist_rd^pathloss_exp == 1 is
    evaluated by its analytic limit.
    """
    if link.snr_avg <= 0:
        raise ValidationError("snr_avg must be > 0")
    gamma, r = link.snr_avg, link.target_rate
    ln_v = -(2.0 ** r - 1.0) / gamma
    v = math.exp(ln_v)
    # omega = exp(2*ln(v) - ln(v)^2 * gamma); work in log space so extreme
    # rates/SNRs underflow to 0 instead of tripping 0**negative.
    ln_omega = 2.0 * ln_v - ln_v * ln_v * gamma
    s = link.dist_sr ** link.pathloss_exp
    x = link.dist_rd ** link.pathloss_exp
    if abs(1.0 - x) < SINGULARITY_TOL:
        # lim_{x->1} (v^(1-x) - 1)/(1 - x) = ln v
        return 1.0 - v + math.exp(ln_omega * (s + x)) * ln_v
    term = math.exp(ln_omega * (s + x) + ln_v * (1.0 - x)) - math.exp(ln_omega * (s + x))
    return 1.0 - v + term / (1.0 - x)


def outage_monte_carlo(link: LinkModel, trials: int, seed: int) -> OutageEstimate:
    """Estimate the cooperative outage probability by simulation.

    Gains are drawn per the module fading convention; the estimate is the hit
    fraction of the outage event, reproducible for a fixed seed.
    """
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(seed)
    alpha = link.pathloss_exp
    g_sd = rng.exponential(1.0, trials)
    g_sr = rng.exponential(link.dist_sr ** -alpha, trials)
    g_rd = rng.exponential(link.dist_rd ** -alpha, trials)

    snr, r = link.snr_avg, link.target_rate
    direct = np.log2(1.0 + g_sd * snr)
    first_hop = 0.5 * np.log2(1.0 + g_sr * snr)
    combined = 0.5 * np.log2(1.0 + (g_sd + g_rd) * snr)
    hits = np.maximum(direct, np.minimum(first_hop, combined)) < r

    p_hat = float(hits.mean())
    stderr = math.sqrt(p_hat * (1.0 - p_hat) / trials)
    return OutageEstimate(probability=p_hat, stderr=stderr, trials=trials, seed=seed)


def outage_sr_link(target_rate: float, snr_sr: float) -> float:
    """First-hop outage probability of the source->relay link."""
    if snr_sr <= 0:
        raise ValidationError(f"snr_sr must be > 0, got {snr_sr}")
    return 1.0 - math.exp(-(2.0 ** (2.0 * target_rate) - 1.0) / snr_sr)


def ber_direct(snr_sd: float) -> float:
    """BPSK bit error rate of the direct path under Rayleigh fading."""
    if snr_sd <= 0:
        raise ValidationError(f"snr_sd must be > 0, got {snr_sd}")
    return 0.5 * (1.0 - math.sqrt(snr_sd / (1.0 + snr_sd)))


def _ber_diversity_raw(snr_sd: float, snr_rd: float) -> float:
    return 0.5 * (1.0 + (1.0 / (snr_rd - snr_sd))
                  * (snr_sd / math.sqrt(1.0 + 1.0 / snr_sd)
                     - snr_rd / math.sqrt(1.0 + 1.0 / snr_rd)))


def ber_diversity(snr_sd: float, snr_rd: float) -> float:
    """BER of the combined (direct + relayed) signal.

    The expression has a removable singularity at equal mean SNRs; near it the
    value is taken as the average of two symmetric perturbations, which
    preserves continuity without a separate limit form.
    """
    if snr_sd <= 0 or snr_rd <= 0:
        raise ValidationError("both SNRs must be > 0")
    if abs(snr_rd - snr_sd) < SINGULARITY_TOL * max(snr_rd, snr_sd):
        return 0.5 * (_ber_diversity_raw(snr_sd, snr_rd * (1.0 + 1e-6))
                      + _ber_diversity_raw(snr_sd, snr_rd * (1.0 - 1e-6)))
    return _ber_diversity_raw(snr_sd, snr_rd)


def ber_end_to_end(
    target_rate: float, snr_sd: float, snr_sr: float, snr_rd: float
) -> float:
    """End-to-end BER: direct-only when the first hop is in outage, combined otherwise."""
    p_out_sr = outage_sr_link(target_rate, snr_sr)
    return (p_out_sr * ber_direct(snr_sd)
            + (1.0 - p_out_sr) * ber_diversity(snr_sd, snr_rd))


def packet_success(ber: float, packet_bits: int) -> float:
    """Probability a packet of the given length arrives with no bit errors."""
    if not 0.0 <= ber <= 1.0:
        raise ValidationError(f"ber must be in [0, 1], got {ber}")
    if packet_bits < 1:
        raise ValidationError(f"packet_bits must be >= 1, got {packet_bits}")
    return (1.0 - ber) ** packet_bits
