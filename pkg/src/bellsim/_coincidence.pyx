# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled greedy one-shot coincidence matcher.

Semantics are identical to bellsim._pycoincidence.match_sorted; this
version exists because the scan is the hot inner loop when millions of
time tags are matched.
"""


def match_sorted(double[::1] t1, double[::1] t2, double half_window):
    """Count one-shot pairings between two sorted timestamp arrays.

    Events pair when |t1[i] - t2[j]| <= half_window; each event is consumed
    by at most one coincidence, scanning both streams in time order.
    """
    cdef Py_ssize_t i = 0, j = 0
    cdef Py_ssize_t n1 = t1.shape[0], n2 = t2.shape[0]
    cdef long long count = 0
    cdef double delta
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
