"""Independent reference implementations used only by the tests.

Written with scalar loops and ``cmath`` so they share no code path with the
vectorised package implementation.
"""
import cmath
import itertools
import math


def steering_scalar(nx, ny, delta, az, el):
    out = []
    for ix in range(nx):
        for iy in range(ny):
            out.append(cmath.exp(2j * math.pi * delta * (ix * math.cos(az) + iy * math.sin(el))))
    return out


def amplitude_scalar(phases, hbar, absorb=None):
    total = 0j
    for p, h in zip(phases, hbar):
        if p is absorb:
            continue
        total += cmath.exp(1j * p) * h
    return total


def exhaustive_best_power(hbar, phase_values):
    """Max of |sum exp(j psi_n) hbar_n|^2 over all len(phase_values)**N assignments."""
    best = 0.0
    for combo in itertools.product(phase_values, repeat=len(hbar)):
        best = max(best, abs(amplitude_scalar(combo, hbar)) ** 2)
    return best


def circular_nearest(target, phases):
    best_k, best_d = None, None
    for k, p in enumerate(phases):
        d = abs((target - p + math.pi) % (2 * math.pi) - math.pi)
        if best_d is None or d < best_d - 1e-15:
            best_k, best_d = k, d
    return best_k


def beampattern_scalar(coeffs, nx, ny, delta, tx, obs):
    """|sum_n c_n conj(a_n(obs)) a_n(tx)|^2 for one observation direction."""
    a_tx = steering_scalar(nx, ny, delta, *tx)
    a_obs = steering_scalar(nx, ny, delta, *obs)
    return abs(sum(c * o.conjugate() * t for c, o, t in zip(coeffs, a_obs, a_tx))) ** 2
