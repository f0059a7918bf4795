"""Payload/ARQ throughput equations, message-count search, auth policy."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relaygame.errors import NoFeasibleMessageCountError, ValidationError
from relaygame.throughput import (
    ArqMode,
    SecurityRequirement,
    ThroughputConfig,
    ceil_log2,
    compromising_probability,
    min_auth_probability,
    optimize_messages,
    payload_auth,
    payload_noauth,
    throughput_for_mode,
    throughput_gbn,
    throughput_general,
    throughput_sr,
    window_size,
)


def cfg(**kwargs):
    base = dict(packet_bits=1000, hash_bits=160, n_messages=4, auth_prob=0.5,
                presig_time=0.0, transfer_time=1.0)
    base.update(kwargs)
    return ThroughputConfig(**base)


def test_ceil_log2():
    assert [ceil_log2(n) for n in (1, 2, 3, 4, 5, 8, 9, 32, 33)] == \
        [0, 1, 2, 2, 3, 3, 4, 5, 6]


def test_payload_auth_examples():
    assert payload_auth(cfg(n_messages=1, auth_prob=1.0)) == 840.0
    assert payload_auth(cfg(n_messages=4, auth_prob=0.5)) == 1040.0
    assert payload_auth(cfg(auth_prob=0.0)) == 0.0
    # Oversized tree: negative payload is representable data.
    assert payload_auth(cfg(packet_bits=100, auth_prob=1.0)) < 0


def test_payload_noauth_examples():
    assert payload_noauth(cfg(n_messages=4, auth_prob=0.5)) == 1680.0
    assert payload_noauth(cfg(auth_prob=1.0)) == 0.0
    assert payload_noauth(cfg(packet_bits=160, hash_bits=160)) == 0.0


def test_throughput_general():
    assert throughput_general(cfg()) == pytest.approx(2720.0)
    assert throughput_general(cfg(presig_time=1.0)) == pytest.approx(1360.0)
    assert throughput_general(cfg(packet_bits=160, hash_bits=160, auth_prob=0.0)) == 0.0


def test_throughput_sr():
    assert throughput_sr(cfg(), 1.0) == throughput_general(cfg())
    assert throughput_sr(cfg(), 0.0) == 0.0
    assert throughput_sr(cfg(), 0.5) == pytest.approx(1360.0)
    with pytest.raises(ValidationError):
        throughput_sr(cfg(), 1.5)


def test_throughput_gbn():
    c = cfg(window=10)
    assert throughput_gbn(c, 0.5) == pytest.approx(2720 * 0.5 / 5.5)
    assert throughput_gbn(cfg(window=1), 0.5) == throughput_sr(cfg(), 0.5)
    assert throughput_gbn(c, 1.0) == throughput_sr(cfg(), 1.0)
    with pytest.raises(ValidationError):
        throughput_gbn(cfg(), 0.5)  # no window and no way to derive one


def test_window_size_examples():
    assert window_size(1e6, 0.01, 1000) == 10
    assert window_size(1e3, 0.0001, 1000) == 1
    assert window_size(1e6, 0.0015, 1000) == 2
    with pytest.raises(ValidationError):
        window_size(0.0, 0.01, 1000)


@given(st.floats(0.0, 1.0), st.integers(1, 200))
@settings(max_examples=150, deadline=None)
def test_sr_dominates_gbn(p_c, window):
    c = cfg(window=window)
    sr, gbn = throughput_sr(c, p_c), throughput_gbn(c, p_c)
    assert sr >= gbn - 1e-12
    if 1e-9 < p_c < 1.0 - 1e-9 and window > 1:  # fp-resolvable strict gap
        assert sr > gbn


def test_sr_gbn_equality_cases():
    c1, c10 = cfg(window=1), cfg(window=10)
    assert throughput_gbn(c1, 0.3) == pytest.approx(throughput_sr(c1, 0.3), abs=1e-12)
    assert throughput_gbn(c10, 1.0) == pytest.approx(throughput_sr(c10, 1.0), abs=1e-12)


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.integers(2, 64))
@settings(max_examples=150, deadline=None)
def test_throughput_non_increasing_in_auth(pa_low, bump, n):
    # With a real tree (ceil(log2 n) >= 1) authentication only costs payload.
    pa_high = min(1.0, pa_low + bump)
    low = throughput_general(cfg(n_messages=n, auth_prob=pa_low))
    high = throughput_general(cfg(n_messages=n, auth_prob=pa_high))
    assert high <= low + 1e-9


def test_fully_authenticated_baseline():
    baseline = throughput_general(cfg(auth_prob=1.0))
    swept = throughput_general(cfg(auth_prob=1.0))
    assert swept == baseline
    assert compromising_probability(1.0, 0.4593) == 0.0


def rise_fall_config():
    return ThroughputConfig(packet_bits=1000, hash_bits=160, n_messages=1,
                            auth_prob=1.0, presig_time=0.1, data_rate=1e6,
                            reaction_time=0.01)


def test_throughput_vs_n_rises_falls_and_cuts_off():
    c = rise_fall_config()
    # Cutoff: first n with packet_bits <= hash_bits * (ceil(log2 n) + 1).
    cutoff = next(n for n in range(1, 1000)
                  if c.with_messages(n).auth_payload_per_packet() <= 0)
    assert cutoff == 33
    values = [throughput_general(c.with_messages(n)) for n in range(1, 65)]
    peak = max(range(len(values)), key=values.__getitem__) + 1
    assert 1 < peak < cutoff
    assert values[-1] < values[peak - 1]  # falls after the peak
    for n, value in enumerate(values, start=1):
        assert (value > 0) == (n < cutoff)  # sign change exactly at the cutoff


def exhaustive_best(c, n_max, arq, p_c):
    best = None
    for n in range(1, n_max + 1):
        at_n = c.with_messages(n)
        if c.auth_prob > 0.0 and at_n.auth_payload_per_packet() <= 0:
            continue
        t = throughput_for_mode(at_n, arq, p_c)
        if best is None or t > best[1]:
            best = (n, t)
    return best


def test_optimize_messages_matches_exhaustive_search():
    rng = np.random.default_rng(1234)
    checked = 0
    while checked < 100:
        packet = int(rng.integers(200, 2001))
        hashes = int(rng.integers(32, 257))
        pa = float(rng.uniform(0.0, 1.0))
        arq = list(ArqMode)[int(rng.integers(0, 3))]
        p_c = float(rng.uniform(0.05, 1.0))
        if bool(rng.integers(0, 2)):
            c = ThroughputConfig(packet_bits=packet, hash_bits=hashes, n_messages=1,
                                 auth_prob=pa, presig_time=float(rng.uniform(0, 1)),
                                 transfer_time=float(rng.uniform(0.01, 1.0)),
                                 window=int(rng.integers(1, 32)))
        else:
            c = ThroughputConfig(packet_bits=packet, hash_bits=hashes, n_messages=1,
                                 auth_prob=pa, presig_time=float(rng.uniform(0, 1)),
                                 data_rate=float(rng.uniform(1e4, 1e7)),
                                 reaction_time=float(rng.uniform(1e-4, 0.05)))
        n_max = int(rng.integers(1, 65))
        expected = exhaustive_best(c, n_max, arq, p_c)
        if expected is None:
            with pytest.raises(NoFeasibleMessageCountError):
                optimize_messages(c, n_max, arq, p_c)
        else:
            assert optimize_messages(c, n_max, arq, p_c) == expected
        checked += 1


def test_optimize_messages_no_feasible_n():
    c = cfg(packet_bits=100, hash_bits=160, auth_prob=1.0)
    with pytest.raises(NoFeasibleMessageCountError):
        optimize_messages(c, 64, ArqMode.GENERAL)


def test_optimize_messages_unauthenticated_prefers_max_n():
    # Fixed total time, no tree penalty: payload grows linearly with n.
    c = cfg(auth_prob=0.0)
    assert optimize_messages(c, 32, ArqMode.GENERAL) == \
        (32, throughput_general(c.with_messages(32)))


def test_min_auth_probability_examples():
    req = SecurityRequirement(max_compromised_fraction=0.20)
    assert min_auth_probability(0.4593, req) == pytest.approx(0.56456, abs=1e-5)
    assert min_auth_probability(0.15, req) == 0.0   # already satisfied
    assert min_auth_probability(0.0, req) == 0.0    # never attacked


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
@settings(max_examples=200, deadline=None)
def test_min_auth_probability_bound(p_star, p_s):
    pa = min_auth_probability(p_star, SecurityRequirement(p_s))
    assert 0.0 <= pa <= 1.0
    assert (1.0 - pa) * p_star <= p_s + 1e-12


def test_compromising_probability():
    assert compromising_probability(1.0, 0.77) == 0.0
    assert compromising_probability(0.0, 0.4593) == pytest.approx(0.4593)
    assert compromising_probability(0.5, 0.4) == pytest.approx(0.2)
    grid = [compromising_probability(pa, 0.4593) for pa in (0.0, 0.25, 0.5, 0.75, 1.0)]
    assert grid == sorted(grid, reverse=True)  # linear and decreasing


def test_config_validation():
    with pytest.raises(ValidationError):
        cfg(packet_bits=0)
    with pytest.raises(ValidationError):
        cfg(auth_prob=1.2)
    with pytest.raises(ValidationError):
        cfg(transfer_time=None)  # neither timing source
    with pytest.raises(ValidationError):
        ThroughputConfig(packet_bits=1000, hash_bits=160, n_messages=1,
                         auth_prob=1.0, transfer_time=1.0, data_rate=1e6)
    with pytest.raises(ValidationError):
        cfg(window=0)


def test_derived_timing_and_window():
    c = ThroughputConfig(packet_bits=1000, hash_bits=160, n_messages=4,
                         auth_prob=1.0, presig_time=0.1,
                         data_rate=1e6, reaction_time=0.01)
    assert c.timing_model == "derived"
    assert c.resolved_transfer_time == pytest.approx(0.004)
    assert c.with_messages(8).resolved_transfer_time == pytest.approx(0.008)
    assert c.resolved_window == 10
    assert cfg().timing_model == "explicit"
