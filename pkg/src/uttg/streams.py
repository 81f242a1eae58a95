"""Canonical input streams used by tests, benchmarks, and the CLI docs.

The standard stream is a 2-DoF sinusoid (0.5 Hz and 0.3 Hz, amplitudes
0.8 and 0.5 rad) sampled at 20 Hz for 5 s.  The step-jump variant holds,
then ramps faster than the robot's velocity limit before holding the far
target: responsiveness-vs-fidelity behavior separates the two servo modes
on it.
"""

import numpy as np

STANDARD_RATE_HZ = 20.0
STANDARD_DURATION_S = 5.0


def standard_stream():
    """(t, q) pairs: 2-DoF sinusoid, 20 Hz, 5 s (100 samples)."""
    ts = np.arange(0, int(STANDARD_DURATION_S * STANDARD_RATE_HZ)) / STANDARD_RATE_HZ
    q0 = 0.8 * np.sin(2.0 * np.pi * 0.5 * ts)
    q1 = 0.5 * np.sin(2.0 * np.pi * 0.3 * ts)
    return [(float(t), np.array([q0[i], q1[i]])) for i, t in enumerate(ts)]


STEP_JUMP_TARGET = np.array([2.4, -1.4])
STEP_JUMP_AT_S = 0.5
STEP_JUMP_WIGGLE = 0.08
STEP_JUMP_WIGGLE_END_S = 3.5


def step_jump_stream():
    """Hold at zero, then jump to a far target with decaying hand jitter.

    After the jump the stream wiggles around the target (amplitude decays
    from 0.05 rad to zero by t=3 s) and then holds it exactly.  A planner
    that must visit every sample spends the whole transit accumulating
    stale off-path waypoints and replays them afterwards; one that chases
    the newest sample converges as soon as the jitter dies out.
    """
    pts = []
    dt = 1.0 / STANDARD_RATE_HZ
    n = int(STANDARD_DURATION_S * STANDARD_RATE_HZ)
    for k in range(n):
        t = k * dt
        if t < STEP_JUMP_AT_S - 1e-9:
            pts.append((t, np.zeros(2)))
            continue
        decay = max(0.0, 1.0 - (t - STEP_JUMP_AT_S) / (STEP_JUMP_WIGGLE_END_S - STEP_JUMP_AT_S))
        wiggle = STEP_JUMP_WIGGLE * decay * np.array(
            [np.sin(2.0 * np.pi * 1.0 * t), np.cos(2.0 * np.pi * 1.0 * t)]
        )
        pts.append((t, STEP_JUMP_TARGET + wiggle))
    return [(float(t), q.copy()) for t, q in pts]
