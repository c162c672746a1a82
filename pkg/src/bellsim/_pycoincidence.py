"""Pure-Python fallback for the coincidence-matching kernel."""


def match_sorted(t1, t2, half_window):
    """Count one-shot pairings between two sorted timestamp sequences.

    Events pair when |t1[i] - t2[j]| <= half_window; each event is consumed
    by at most one coincidence, scanning both streams in time order.
    """
    i = j = 0
    n1, n2 = len(t1), len(t2)
    count = 0
    while i < n1 and j < n2:
        delta = t1[i] - t2[j]
        if delta < -half_window:
            i += 1
        elif delta > half_window:
            j += 1
        else:
            count += 1
            i += 1
            j += 1
    return count
