"""numpy implementation of the path-advance kernels.

Vectorized across the active paths of a block, sequential in time. The
arithmetic is written in exactly the operation order of ``_ckernels.pyx``
so the two backends agree bit for bit.

Status codes: 0 active, 1 converged to R, 2 converged to L, 3 finished
unresolved.
"""

import numpy as np

NAME = "python"


def _freeze(status, fpt_k, rec, idx, pv, up, conv, k, stride):
    ci = idx[conv]
    status[ci] = np.where(up[conv], 1, 2)
    fpt_k[ci] = k
    rec[ci, -(-k // stride):] = pv[conv][:, np.newaxis]


def reduced_advance(p, status, fpt_k, rec, act, noise, k0, n_steps, stride,
                    dt, sqrt_dt, coupling, T, lo, hi, two):
    idx = np.asarray(act, dtype=np.int64)
    rows = np.arange(idx.size)
    pv = p[idx]
    for s in range(noise.shape[1]):
        k = k0 + s
        up = pv >= hi
        conv = up | (pv <= lo)
        if conv.any():
            _freeze(status, fpt_k, rec, idx, pv, up, conv, k, stride)
            p[idx[conv]] = pv[conv]
            keep = ~conv
            idx, rows, pv = idx[keep], rows[keep], pv[keep]
            if idx.size == 0:
                return
        if k % stride == 0:
            rec[idx, k // stride] = pv
        if k == n_steps:
            status[idx] = 3
            break
        t = k * dt
        beta = t / T if (T > 0.0 and t < T) else 1.0
        if two:
            dB = sqrt_dt * noise[rows, s, 0] - sqrt_dt * noise[rows, s, 1]
        else:
            dB = sqrt_dt * noise[rows, s, 0]
        pv = pv * (1.0 + coupling * beta * (1.0 - pv) * dB)
        np.clip(pv, 0.0, 1.0, out=pv)
    p[idx] = pv


def continuous_advance(c0, c1, status, fpt_k, rec, act, noise, eig, k0, n_steps,
                       stride, dt, sqrt_dt, sqrt_gamma, half_gamma, lo, hi):
    idx = np.asarray(act, dtype=np.int64)
    rows = np.arange(idx.size)
    x0 = c0[idx]
    x1 = c1[idx]
    n_obs = eig.shape[0]
    for s in range(noise.shape[1]):
        k = k0 + s
        pv = x1 * x1
        up = pv >= hi
        conv = up | (pv <= lo)
        if conv.any():
            _freeze(status, fpt_k, rec, idx, pv, up, conv, k, stride)
            c0[idx[conv]] = x0[conv]
            c1[idx[conv]] = x1[conv]
            keep = ~conv
            idx, rows, x0, x1, pv = idx[keep], rows[keep], x0[keep], x1[keep], pv[keep]
            if idx.size == 0:
                return
        if k % stride == 0:
            rec[idx, k // stride] = pv
        if k == n_steps:
            status[idx] = 3
            break
        f0 = 1.0
        f1 = 1.0
        for m in range(n_obs):
            a0 = eig[m, 0]
            a1 = eig[m, 1]
            mean = a0 * x0 * x0 + a1 * x1 * x1
            dB = sqrt_dt * noise[rows, s, m]
            d0 = a0 - mean
            d1 = a1 - mean
            f0 = f0 + (sqrt_gamma * d0 * dB - half_gamma * d0 * d0 * dt)
            f1 = f1 + (sqrt_gamma * d1 * dB - half_gamma * d1 * d1 * dt)
        x0 = x0 * f0
        x1 = x1 * f1
        nrm = np.sqrt(x0 * x0 + x1 * x1)
        x0 = x0 / nrm
        x1 = x1 / nrm
    c0[idx] = x0
    c1[idx] = x1


def hitting_advance(p, t_cur, status, fpt, act, waits, u, r0, r1, ev_t, ev_p,
                    t_max, lo, hi):
    idx = np.asarray(act, dtype=np.int64)
    rows = np.arange(idx.size)
    pv = p[idx]
    tc = t_cur[idx]
    for s in range(waits.shape[1]):
        t_new = tc + waits[rows, s]
        late = t_new > t_max
        if late.any():
            status[idx[late]] = 3
            p[idx[late]] = pv[late]
            t_cur[idx[late]] = tc[late]
            keep = ~late
            idx, rows, pv, t_new = idx[keep], rows[keep], pv[keep], t_new[keep]
            if idx.size == 0:
                return
        r = np.where(u[rows, s] < pv, r1[rows, s], r0[rows, s])
        q = 1.0 - pv
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            pv = np.where(r > 1.0, pv / (q / r + pv), pv * r / (q + pv * r))
        tc = t_new
        ev_t[rows, s] = tc
        ev_p[rows, s] = pv
        up = pv >= hi
        conv = up | (pv <= lo)
        if conv.any():
            ci = idx[conv]
            status[ci] = np.where(up[conv], 1, 2)
            fpt[ci] = tc[conv]
            p[ci] = pv[conv]
            t_cur[ci] = tc[conv]
            keep = ~conv
            idx, rows, pv, tc = idx[keep], rows[keep], pv[keep], tc[keep]
            if idx.size == 0:
                return
    p[idx] = pv
    t_cur[idx] = tc
