"""Pure-Python/numpy implementations of the compiled kernels (same results, slower)."""
import numpy as np


def jacobi_eigh(a_in, tol=1e-10, max_sweeps=100):
    a = np.array(a_in, dtype=np.float64, order="C", copy=True)
    n = a.shape[0]
    v = np.eye(n)
    frob = np.sqrt(np.sum(a * a))
    if frob == 0.0:
        return np.diag(a).copy(), v, 0
    iu = np.triu_indices(n, 1)
    sweep = 0
    while True:
        off = np.sqrt(2.0 * np.sum(a[iu] ** 2))
        if off < tol * frob or sweep >= max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                x, y = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * x - s * y
                a[:, q] = s * x + c * y
                x, y = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * x - s * y
                a[q, :] = s * x + c * y
                a[p, q] = a[q, p] = 0.0
                x, y = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * x - s * y
                v[:, q] = s * x + c * y
        sweep += 1
    return np.diag(a).copy(), v, sweep


def coupling_matrix(intervals, starts, ends, alpha, psc_leap=0.3, psc_step=0.15, reach=2):
    iv = np.asarray(intervals, dtype=np.int64)
    st = np.asarray(starts, dtype=np.int64)
    en = np.asarray(ends, dtype=np.int64)
    # link[i, j]: pair j starts within `reach` semitones of where pair i ends
    link = np.abs(st[None, :] - en[:, None]) <= reach
    psc = np.where(link, np.where(iv[:, None] >= 3, psc_leap, psc_step), 0.0)
    out = alpha / (1.0 + np.abs(iv[:, None] - iv[None, :])) + psc + psc.T
    np.fill_diagonal(out, 0.0)
    return out
