"""Fixed-point simulation time.

All engine timestamps are integer microseconds so that time comparisons are
exact and runs are reproducible bit-for-bit.
"""

US_PER_S = 1_000_000


def us(seconds):
    """Convert seconds (float) to integer microseconds, rounding to nearest."""
    return round(seconds * US_PER_S)


def s(t_us):
    """Convert integer microseconds back to float seconds."""
    return t_us / US_PER_S
