"""Latent contact-graph kernels.

The final outcome of an SIR epidemic only depends on who would infect whom,
so each kernel explores the random contact digraph breadth first, sampling
an individual's out-edges the first time it is reached. Every function is
written against the subset of numpy that numba supports and is compiled when
numba is available; the random streams are identical either way.

Periods are passed as ``(kind, p1, p2)``: kind 0 constant(p1), kind 1
exponential(rate=p1), kind 2 gamma(shape=p1, rate=p2).
"""
import numpy as np

from ._accel import njit


@njit
def draw_period(rng, kind, p1, p2):
    if kind == 0:
        return p1
    if kind == 1:
        return rng.exponential(1.0 / p1)
    return rng.gamma(p1, 1.0 / p2)


@njit
def floyd_sample(rng, M, d, mark, stamp, out):
    """Write a uniform ``d``-subset of ``range(M)`` to ``out[:d]`` (Floyd's algorithm).

    ``mark`` entries equal to ``stamp`` flag members; callers bump ``stamp``
    between calls instead of clearing ``mark``.
    """
    c = 0
    for j in range(M - d, M):
        t = rng.integers(0, j + 1)
        if mark[t] == stamp:
            t = j
        mark[t] = stamp
        out[c] = t
        c += 1


@njit
def bfs_single(n_sus, a_init, beta_w, kind, p1, p2, rng):
    """Final size and severity of a one-community epidemic; initial infectives included."""
    n_tot = n_sus + a_init
    infected = np.zeros(n_tot, np.bool_)
    per = np.empty(n_tot)
    queue = np.empty(n_tot, np.int64)
    mark = np.zeros(max(n_tot, 1), np.int64)
    out = np.empty(max(n_tot, 1), np.int64)
    severity = 0.0
    tail = 0
    for i in range(a_init):
        infected[i] = True
        per[i] = draw_period(rng, kind, p1, p2)
        severity += per[i]
        queue[tail] = i
        tail += 1
    if beta_w <= 0.0 or n_sus == 0:
        return tail, severity
    head = 0
    stamp = 0
    while head < tail:
        i = queue[head]
        head += 1
        d = rng.binomial(n_tot - 1, -np.expm1(-beta_w * per[i]))
        if d == 0:
            continue
        stamp += 1
        floyd_sample(rng, n_tot - 1, d, mark, stamp, out)
        for c in range(d):
            j = out[c]
            if j >= i:
                j += 1
            if not infected[j]:
                infected[j] = True
                per[j] = draw_period(rng, kind, p1, p2)
                severity += per[j]
                queue[tail] = j
                tail += 1
        if tail == n_tot:
            break
    return tail, severity


@njit
def bfs_multi(n, m, beta_w, beta_g, kind, p1, p2, rng):
    """Final outcome of the (m+1)-community epidemic started by one infective in community 0.

    Community 0's purely local epidemic is explored first so its size and
    severity (``z0``, ``a0``) are available for conditioning; global edges of
    those individuals are drawn afterwards. Exploration order does not change
    the final outcome.

    Returns ``(Z_T, A_T, community_sizes, z0, a0)``.
    """
    C = m + 1
    N = n * C
    infected = np.zeros(N, np.bool_)
    per = np.empty(N)
    queue = np.empty(N, np.int64)
    sizes = np.zeros(C, np.int64)
    lmark = np.zeros(n, np.int64)
    gmark = np.zeros(N, np.int64)
    out = np.empty(N, np.int64)
    lstamp = 0
    gstamp = 0

    seed = rng.integers(0, n)
    infected[seed] = True
    per[seed] = draw_period(rng, kind, p1, p2)
    severity = per[seed]
    sizes[0] = 1
    queue[0] = seed
    tail = 1
    lhead = 0
    ghead = 0
    z0 = 0
    a0 = 0.0
    phase_one = True
    while True:
        if lhead < tail:
            i = queue[lhead]
            lhead += 1
            if beta_w <= 0.0 or n == 1:
                continue
            d = rng.binomial(n - 1, -np.expm1(-beta_w * per[i]))
            if d == 0:
                continue
            c = i // n
            base = c * n
            li = i - base
            lstamp += 1
            floyd_sample(rng, n - 1, d, lmark, lstamp, out)
            for r in range(d):
                lj = out[r]
                if lj >= li:
                    lj += 1
                j = base + lj
                if not infected[j]:
                    infected[j] = True
                    per[j] = draw_period(rng, kind, p1, p2)
                    severity += per[j]
                    sizes[c] += 1
                    queue[tail] = j
                    tail += 1
        else:
            if phase_one:
                phase_one = False
                z0 = tail
                a0 = severity
            if ghead >= tail:
                break
            i = queue[ghead]
            ghead += 1
            if beta_g <= 0.0 or N == 1:
                continue
            d = rng.binomial(N - 1, -np.expm1(-beta_g * per[i]))
            if d == 0:
                continue
            gstamp += 1
            floyd_sample(rng, N - 1, d, gmark, gstamp, out)
            for r in range(d):
                j = out[r]
                if j >= i:
                    j += 1
                if not infected[j]:
                    infected[j] = True
                    per[j] = draw_period(rng, kind, p1, p2)
                    severity += per[j]
                    sizes[j // n] += 1
                    queue[tail] = j
                    tail += 1
    return tail, severity, sizes, z0, a0


@njit
def bfs_path(n, beta_w, rate, t_max, kind, p1, p2, rng):
    """Trigger-driven cumulative (size, severity) path of one community on [0, t_max].

    Points of a rate-``rate`` Poisson process pick a uniform individual; a
    susceptible pick sets off an instantaneous epidemic among the current
    susceptibles. Only effective jumps are recorded.
    """
    times = np.empty(n)
    cz = np.empty(n, np.int64)
    ca = np.empty(n)
    k = 0
    S = n
    t = 0.0
    z = 0
    a = 0.0
    if rate <= 0.0:
        return times[:0], cz[:0], ca[:0]
    scale = 1.0 / rate
    while S > 0:
        t += rng.exponential(scale)
        if t > t_max:
            break
        # individuals are exchangeable: label the susceptibles 0..S-1
        if rng.integers(0, n) < S:
            dz, da = bfs_single(S - 1, 1, beta_w, kind, p1, p2, rng)
            S -= dz
            z += dz
            a += da
            times[k] = t
            cz[k] = z
            ca[k] = a
            k += 1
    return times[:k], cz[:k], ca[:k]


@njit
def bfs_paths(m, n, beta_w, rate, t_max, kind, p1, p2, rng):
    """``m`` independent paths, flattened; ``counts[i]`` jumps belong to path i."""
    counts = np.zeros(m, np.int64)
    cap = 64
    times = np.empty(cap)
    cz = np.empty(cap, np.int64)
    ca = np.empty(cap)
    pos = 0
    for i in range(m):
        ti, zi, ai = bfs_path(n, beta_w, rate, t_max, kind, p1, p2, rng)
        k = ti.shape[0]
        while pos + k > cap:
            cap *= 2
            times2 = np.empty(cap)
            cz2 = np.empty(cap, np.int64)
            ca2 = np.empty(cap)
            times2[:pos] = times[:pos]
            cz2[:pos] = cz[:pos]
            ca2[:pos] = ca[:pos]
            times, cz, ca = times2, cz2, ca2
        times[pos:pos + k] = ti
        cz[pos:pos + k] = zi
        ca[pos:pos + k] = ai
        pos += k
        counts[i] = k
    return times[:pos], cz[:pos], ca[:pos], counts
