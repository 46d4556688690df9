"""Pure-Python stepping kernel; fallback twin of the compiled one.

This module and ``_kernel.pyx`` implement the same event loop with the
same RNG draws and the same floating-point operations in the same
order, so a run produces bit-identical results on either backend. Any
change here must be mirrored there.

Action codes: 0 cooperate, 1 defect, 2 mirror (discriminatory AI).
"""

import math

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_TWO_NEG53 = 1.0 / 9007199254740992.0

BACKEND = "python"


def run_steps(indptr, indices, action, is_ai, fitness, humans,
              r, s, t, p, beta_h, beta_ai,
              n_steps, rng_state, coop_count, steps_done, window_start,
              visits, ups, downs):
    """Advance the simulation by ``n_steps`` elementary events.

    Mutates ``action`` and ``fitness`` in place, tallies per-state event
    counts into ``visits``/``ups``/``downs`` (indexed by the cooperator
    count before the event), and returns the updated
    (rng_state, coop_count, window_sum) where window_sum accumulates the
    post-event cooperator count of every event past ``window_start``.
    """
    # plain lists: python ints/floats are much faster than numpy scalars
    indptr_l = indptr.tolist()
    indices_l = indices.tolist()
    action_l = action.tolist()
    is_ai_l = is_ai.tolist()
    fitness_l = fitness.tolist()
    humans_l = humans.tolist()
    visits_l = visits.tolist()
    ups_l = ups.tolist()
    downs_l = downs.tolist()

    exp = math.exp
    state = rng_state
    k = coop_count
    wsum = 0
    nh = len(humans_l)
    step_abs = steps_done

    for _ in range(n_steps):
        state = (state + _GOLDEN) & _MASK
        z = state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        z ^= z >> 31
        a = humans_l[z % nh]

        lo = indptr_l[a]
        deg = indptr_l[a + 1] - lo
        state = (state + _GOLDEN) & _MASK
        z = state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        z ^= z >> 31
        b = indices_l[lo + (z % deg)]

        visits_l[k] += 1
        act_b = action_l[b]
        act_a = action_l[a]
        # a mirror exposes the focal's own action: imitation is a no-op;
        # equal exposed actions need no draw either
        if act_b != 2 and act_b != act_a:
            beta = beta_ai if is_ai_l[b] else beta_h
            x = beta * (fitness_l[b] - fitness_l[a])
            if x >= 0.0:
                prob = 1.0 / (1.0 + exp(-x))
            else:
                e = exp(x)
                prob = e / (1.0 + e)
            state = (state + _GOLDEN) & _MASK
            z = state
            z = ((z ^ (z >> 30)) * _MIX1) & _MASK
            z = ((z ^ (z >> 27)) * _MIX2) & _MASK
            z ^= z >> 31
            u = (z >> 11) * _TWO_NEG53
            if u < prob:
                action_l[a] = act_b
                fa = 0.0
                for idx in range(lo, lo + deg):
                    j = indices_l[idx]
                    aj = action_l[j]
                    fitness_l[j] += (_pay(aj, act_b, r, s, t, p)
                                     - _pay(aj, act_a, r, s, t, p))
                    fa += _pay(act_b, aj, r, s, t, p)
                fitness_l[a] = fa
                if act_b == 0:
                    ups_l[k] += 1
                    k += 1
                else:
                    downs_l[k] += 1
                    k -= 1
        step_abs += 1
        if step_abs > window_start:
            wsum += k

    action[:] = action_l
    fitness[:] = fitness_l
    visits[:] = visits_l
    ups[:] = ups_l
    downs[:] = downs_l
    return state, k, wsum


def _pay(ax, ay, r, s, t, p):
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
