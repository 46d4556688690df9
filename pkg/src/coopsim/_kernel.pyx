# cython: boundscheck=False, wraparound=False, language_level=3
"""Compiled stepping kernel; built at install time when a C compiler exists.

Exact twin of ``_kernel_py``: same RNG draws and the same floating-point
operations in the same order, so a run produces bit-identical results on
either backend. Any change here must be mirrored there.
"""

from libc.stdint cimport int8_t, int64_t, uint8_t, uint64_t
from libc.math cimport exp

BACKEND = "compiled"

cdef uint64_t _GOLDEN = <uint64_t>0x9E3779B97F4A7C15
cdef uint64_t _MIX1 = <uint64_t>0xBF58476D1CE4E5B9
cdef uint64_t _MIX2 = <uint64_t>0x94D049BB133111EB
cdef double _TWO_NEG53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _next(uint64_t* state) nogil:
    state[0] = state[0] + _GOLDEN
    cdef uint64_t z = state[0]
    z = (z ^ (z >> 30)) * _MIX1
    z = (z ^ (z >> 27)) * _MIX2
    return z ^ (z >> 31)


cdef inline double _pay(int8_t ax, int8_t ay,
                        double r, double s, double t, double p) nogil:
    # payoff to the first agent; mirrors resolve to the opponent's
    # action, two mirrors resolve to mutual cooperation
    if ax == 2:
        if ay == 2:
            ax = 0
            ay = 0
        else:
            ax = ay
    elif ay == 2:
        ay = ax
    if ax == 0:
        return r if ay == 0 else s
    return t if ay == 0 else p


def run_steps(int64_t[::1] indptr, int64_t[::1] indices, int8_t[::1] action,
              uint8_t[::1] is_ai, double[::1] fitness, int64_t[::1] humans,
              double r, double s, double t, double p,
              double beta_h, double beta_ai,
              long long n_steps, unsigned long long rng_state,
              long long coop_count, long long steps_done,
              long long window_start,
              int64_t[::1] visits, int64_t[::1] ups, int64_t[::1] downs):
    """Advance the simulation by ``n_steps`` elementary events.

    Mutates ``action`` and ``fitness`` in place, tallies per-state event
    counts into ``visits``/``ups``/``downs`` (indexed by the cooperator
    count before the event), and returns the updated
    (rng_state, coop_count, window_sum) where window_sum accumulates the
    post-event cooperator count of every event past ``window_start``.
    """
    cdef uint64_t state = <uint64_t>rng_state
    cdef uint64_t z
    cdef long long k = coop_count
    cdef long long wsum = 0
    cdef long long step_abs = steps_done
    cdef uint64_t nh = <uint64_t>humans.shape[0]
    cdef long long step
    cdef int64_t a, b, j, lo, deg, idx
    cdef int8_t act_a, act_b, aj
    cdef double beta, x, e, prob, u, fa

    with nogil:
        for step in range(n_steps):
            z = _next(&state)
            a = humans[<int64_t>(z % nh)]

            lo = indptr[a]
            deg = indptr[a + 1] - lo
            z = _next(&state)
            b = indices[lo + <int64_t>(z % <uint64_t>deg)]

            visits[k] += 1
            act_b = action[b]
            act_a = action[a]
            # a mirror exposes the focal's own action: imitation is a
            # no-op; equal exposed actions need no draw either
            if act_b != 2 and act_b != act_a:
                beta = beta_ai if is_ai[b] else beta_h
                x = beta * (fitness[b] - fitness[a])
                if x >= 0.0:
                    prob = 1.0 / (1.0 + exp(-x))
                else:
                    e = exp(x)
                    prob = e / (1.0 + e)
                z = _next(&state)
                u = <double>(z >> 11) * _TWO_NEG53
                if u < prob:
                    action[a] = act_b
                    fa = 0.0
                    for idx in range(lo, lo + deg):
                        j = indices[idx]
                        aj = action[j]
                        fitness[j] += (_pay(aj, act_b, r, s, t, p)
                                       - _pay(aj, act_a, r, s, t, p))
                        fa += _pay(act_b, aj, r, s, t, p)
                    fitness[a] = fa
                    if act_b == 0:
                        ups[k] += 1
                        k += 1
                    else:
                        downs[k] += 1
                        k -= 1
            step_abs += 1
            if step_abs > window_start:
                wsum += k

    return state, k, wsum
