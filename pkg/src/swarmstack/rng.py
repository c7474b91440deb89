"""Deterministic pseudo-random core: JKISS generator plus primitive samplers.

Every stochastic component of the optimizer draws from an explicit
:class:`RngState`, one per trial, so runs are reproducible bit for bit and
trials can execute concurrently without sharing generator state.

The base generator is David Jones's JKISS (a KISS variant combining a linear
congruential step, a 5/7/22 xorshift and a multiply-with-carry step), chosen
for its long period and good statistical behavior at a tiny state size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import gammainc

_M32 = 0xFFFFFFFF
_M64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN64 = 0x9E3779B97F4A7C15

# Fallback words used when a seeding draw hits a forbidden value.
_DEFAULT_Y = 987654321
# The multiply-with-carry step locks up when (z, c) = (0, 0) and when the pair
# sits at its other fixed point near the modulus, so c is confined to
# [1, 698769068] exactly as the generator's published seeding procedure does.
_C_RANGE = 698769068


@dataclass
class RngState:
    """JKISS state: four 32-bit words. ``y`` must stay nonzero."""

    x: int
    y: int
    z: int
    c: int

    def copy(self) -> "RngState":
        return RngState(self.x, self.y, self.z, self.c)


def _mix64(v: int) -> int:
    """64-bit avalanche finalizer (splitmix64 style)."""
    v &= _M64
    v = ((v ^ (v >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    v = ((v ^ (v >> 27)) * 0x94D049BB133111EB) & _M64
    return v ^ (v >> 31)


def seed(master_seed: int, stream_index: int) -> RngState:
    """Derive an independent generator state for one trial stream.

    Distinct (master_seed, stream_index) pairs are decorrelated by a 64-bit
    avalanche mix; words that would break the generator (y = 0, degenerate
    multiply-with-carry pairs) are remapped to safe values.
    """
    if stream_index < 0:
        raise ValueError(f"stream_index must be >= 0, got {stream_index}")
    h = (int(master_seed) + _GOLDEN64 * (int(stream_index) + 1)) & _M64
    a = _mix64(h)
    b = _mix64(h ^ 0xD1B54A32D192ED03)
    x = a >> 32
    y = a & _M32
    z = b >> 32
    c = (b & _M32) % _C_RANGE + 1
    if y == 0:
        y = _DEFAULT_Y
    return RngState(x, y, z, c)


def next_u32(state: RngState) -> int:
    """Advance JKISS by one step and return a 32-bit unsigned value."""
    x = (314527869 * state.x + 1234567) & _M32
    y = state.y
    y ^= (y << 5) & _M32
    y ^= y >> 7
    y ^= (y << 22) & _M32
    t = 4294584393 * state.z + state.c
    state.x = x
    state.y = y
    state.c = t >> 32
    state.z = t & _M32
    return (x + y + state.z) & _M32


def fill_u32(state: RngState, n: int) -> list[int]:
    """Return ``n`` consecutive raw outputs.

    Bit-identical to ``n`` calls of :func:`next_u32`; the loop keeps the state
    words in locals, which matters when tests stream tens of millions of draws.
    """
    x, y, z, c = state.x, state.y, state.z, state.c
    out = []
    append = out.append
    for _ in range(n):
        x = (314527869 * x + 1234567) & _M32
        y ^= (y << 5) & _M32
        y ^= y >> 7
        y ^= (y << 22) & _M32
        t = 4294584393 * z + c
        c = t >> 32
        z = t & _M32
        append((x + y + z) & _M32)
    state.x, state.y, state.z, state.c = x, y, z, c
    return out


_INV_2_32 = 1.0 / 4294967296.0


def uniform01(state: RngState) -> float:
    """Uniform draw in [0, 1)."""
    return next_u32(state) * _INV_2_32


def randint_below(state: RngState, n: int) -> int:
    """Uniform integer in [0, n) via the multiply-shift reduction."""
    return (next_u32(state) * n) >> 32


def gaussian(state: RngState, mean: float, sd: float) -> float:
    """Normal draw via the Marsaglia polar method.

    Uniforms are consumed in pairs until a point lands in the unit disk; the
    second variate of each accepted pair is discarded so no state beyond
    ``state`` survives the call.
    """
    if sd <= 0.0:
        raise ValueError(f"sd must be > 0, got {sd}")
    while True:
        u = 2.0 * uniform01(state) - 1.0
        v = 2.0 * uniform01(state) - 1.0
        s = u * u + v * v
        if 0.0 < s < 1.0:
            return mean + sd * u * math.sqrt(-2.0 * math.log(s) / s)


_SQRT1_2 = math.sqrt(0.5)


def normal_cdf(x: float) -> float:
    """Standard normal CDF."""
    return 0.5 * (1.0 + math.erf(x * _SQRT1_2))


# Below this untruncated acceptance mass the draw-and-discard loop is expected
# to need more than four tries, so sampling switches to interval rejection.
_MASS_SWITCH = 0.25


def bounded_gaussian(state: RngState, mean: float, sd: float,
                     lo: float, hi: float) -> float:
    """Normal(mean, sd) conditioned on [lo, hi].

    When the interval holds at least a quarter of the untruncated mass,
    plain draws are discarded until one lands inside.  Otherwise candidates
    are proposed uniformly on the interval and accepted against the density
    peak there; both routes sample the identical conditional law.
    """
    if sd <= 0.0:
        raise ValueError(f"sd must be > 0, got {sd}")
    if lo >= hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    mass = normal_cdf((hi - mean) / sd) - normal_cdf((lo - mean) / sd)
    if mass >= _MASS_SWITCH:
        while True:
            g = gaussian(state, mean, sd)
            if lo <= g <= hi:
                return g
    # Interval rejection: the density maximum over [lo, hi] sits at the mean
    # clamped into the interval; log-space comparison avoids underflow.
    peak = min(max(mean, lo), hi)
    log_peak = -0.5 * ((peak - mean) / sd) ** 2
    while True:
        x = lo + (hi - lo) * uniform01(state)
        log_ratio = -0.5 * ((x - mean) / sd) ** 2 - log_peak
        if math.log(max(uniform01(state), 1e-300)) < log_ratio:
            return x


def bounded_exponential(state: RngState, rate: float,
                        lo: float, hi: float) -> float:
    """Truncated, rescaled exponential on [lo, hi], sampled by inverse CDF.

    Density is proportional to exp(-rate * (x - lo) / (hi - lo)), so the
    endpoint density ratio pdf(lo)/pdf(hi) equals e**rate.
    """
    if rate <= 0.0:
        raise ValueError(f"rate must be > 0, got {rate}")
    if lo >= hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    u = uniform01(state)
    y = -math.log1p(-u * (1.0 - math.exp(-rate))) / rate
    return lo + y * (hi - lo)


def _gamma_unbounded(state: RngState, shape: float) -> float:
    """Gamma(shape, 1) via Marsaglia-Tsang squeeze (with the shape<1 boost)."""
    if shape < 1.0:
        # Gamma(a) = Gamma(a + 1) * U^(1/a)
        g = _gamma_unbounded(state, shape + 1.0)
        u = max(uniform01(state), 1e-300)
        return g * u ** (1.0 / shape)
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        g = gaussian(state, 0.0, 1.0)
        v = (1.0 + c * g) ** 3
        if v <= 0.0:
            continue
        u = max(uniform01(state), 1e-300)
        if math.log(u) < 0.5 * g * g + d - d * v + d * math.log(v):
            return d * v


_GAMMA_RETRY_CAP = 64
_BISECT_STEPS = 200


def truncated_gamma(state: RngState, shape: float, scale: float,
                    lo: float, hi: float) -> float:
    """Gamma(shape, scale) conditioned on [lo, hi].

    Rejection against the unconditional sampler, capped at 64 tries; if the
    truncation window is too improbable the draw falls back to inverse-CDF
    bisection on the window, so the call always terminates.
    """
    if shape <= 0.0 or scale <= 0.0:
        raise ValueError(f"shape and scale must be > 0, got {shape}, {scale}")
    if lo < 0.0 or hi <= lo:
        raise ValueError(f"invalid interval [{lo}, {hi}]")
    for _ in range(_GAMMA_RETRY_CAP):
        g = scale * _gamma_unbounded(state, shape)
        if lo <= g <= hi:
            return g
    # Deterministic fallback: invert the regularized incomplete gamma
    # restricted to [lo, hi] by bisection.
    f_lo = float(gammainc(shape, lo / scale))
    f_hi = 1.0 if math.isinf(hi) else float(gammainc(shape, hi / scale))
    target = f_lo + uniform01(state) * (f_hi - f_lo)
    a, b = lo, hi if not math.isinf(hi) else scale * (shape + 40.0)
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (a + b)
        if float(gammainc(shape, mid / scale)) < target:
            a = mid
        else:
            b = mid
        if b - a <= 1e-14 * max(1.0, abs(b)):
            break
    return min(max(0.5 * (a + b), lo), hi)
