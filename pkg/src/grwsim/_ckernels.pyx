# cython: language_level=3
"""Compiled path-advance kernels.

Same contract and operation order as ``_pykernels``; loops run per path
without the GIL.
"""

from libc.math cimport sqrt

NAME = "cython"


cdef inline void _fill(double[:, ::1] rec, Py_ssize_t i, Py_ssize_t j0, double v) noexcept nogil:
    cdef Py_ssize_t j
    for j in range(j0, rec.shape[1]):
        rec[i, j] = v


def reduced_advance(double[::1] p, signed char[::1] status, long long[::1] fpt_k,
                    double[:, ::1] rec, const long long[::1] act,
                    const double[:, :, ::1] noise, long long k0, long long n_steps,
                    long long stride, double dt, double sqrt_dt, double coupling,
                    double T, double lo, double hi, bint two):
    cdef Py_ssize_t j, s, i
    cdef Py_ssize_t n_act = act.shape[0]
    cdef Py_ssize_t length = noise.shape[1]
    cdef long long k
    cdef double pv, t, beta, dB
    with nogil:
        for j in range(n_act):
            i = act[j]
            pv = p[i]
            for s in range(length):
                k = k0 + s
                if pv >= hi or pv <= lo:
                    status[i] = 1 if pv >= hi else 2
                    fpt_k[i] = k
                    _fill(rec, i, (k + stride - 1) // stride, pv)
                    break
                if k % stride == 0:
                    rec[i, k // stride] = pv
                if k == n_steps:
                    status[i] = 3
                    break
                t = k * dt
                if T > 0.0 and t < T:
                    beta = t / T
                else:
                    beta = 1.0
                if two:
                    dB = sqrt_dt * noise[j, s, 0] - sqrt_dt * noise[j, s, 1]
                else:
                    dB = sqrt_dt * noise[j, s, 0]
                pv = pv * (1.0 + coupling * beta * (1.0 - pv) * dB)
                if pv < 0.0:
                    pv = 0.0
                elif pv > 1.0:
                    pv = 1.0
            p[i] = pv


def continuous_advance(double[::1] c0, double[::1] c1, signed char[::1] status,
                       long long[::1] fpt_k, double[:, ::1] rec,
                       const long long[::1] act, const double[:, :, ::1] noise,
                       const double[:, ::1] eig, long long k0, long long n_steps,
                       long long stride, double dt, double sqrt_dt, double sqrt_gamma,
                       double half_gamma, double lo, double hi):
    cdef Py_ssize_t j, s, i, m
    cdef Py_ssize_t n_act = act.shape[0]
    cdef Py_ssize_t length = noise.shape[1]
    cdef Py_ssize_t n_obs = eig.shape[0]
    cdef long long k
    cdef double x0, x1, pv, f0, f1, a0, a1, mean, dB, d0, d1, nrm
    with nogil:
        for j in range(n_act):
            i = act[j]
            x0 = c0[i]
            x1 = c1[i]
            for s in range(length):
                k = k0 + s
                pv = x1 * x1
                if pv >= hi or pv <= lo:
                    status[i] = 1 if pv >= hi else 2
                    fpt_k[i] = k
                    _fill(rec, i, (k + stride - 1) // stride, pv)
                    break
                if k % stride == 0:
                    rec[i, k // stride] = pv
                if k == n_steps:
                    status[i] = 3
                    break
                f0 = 1.0
                f1 = 1.0
                for m in range(n_obs):
                    a0 = eig[m, 0]
                    a1 = eig[m, 1]
                    mean = a0 * x0 * x0 + a1 * x1 * x1
                    dB = sqrt_dt * noise[j, s, m]
                    d0 = a0 - mean
                    d1 = a1 - mean
                    f0 = f0 + (sqrt_gamma * d0 * dB - half_gamma * d0 * d0 * dt)
                    f1 = f1 + (sqrt_gamma * d1 * dB - half_gamma * d1 * d1 * dt)
                x0 = x0 * f0
                x1 = x1 * f1
                nrm = sqrt(x0 * x0 + x1 * x1)
                x0 = x0 / nrm
                x1 = x1 / nrm
            c0[i] = x0
            c1[i] = x1


def hitting_advance(double[::1] p, double[::1] t_cur, signed char[::1] status,
                    double[::1] fpt, const long long[::1] act,
                    const double[:, ::1] waits, const double[:, ::1] u,
                    const double[:, ::1] r0, const double[:, ::1] r1,
                    double[:, ::1] ev_t, double[:, ::1] ev_p,
                    double t_max, double lo, double hi):
    cdef Py_ssize_t j, s, i
    cdef Py_ssize_t n_act = act.shape[0]
    cdef Py_ssize_t length = waits.shape[1]
    cdef double pv, tc, t_new, r, q
    with nogil:
        for j in range(n_act):
            i = act[j]
            pv = p[i]
            tc = t_cur[i]
            for s in range(length):
                t_new = tc + waits[j, s]
                if t_new > t_max:
                    status[i] = 3
                    break
                r = r1[j, s] if u[j, s] < pv else r0[j, s]
                q = 1.0 - pv
                if r > 1.0:
                    pv = pv / (q / r + pv)
                else:
                    pv = pv * r / (q + pv * r)
                tc = t_new
                ev_t[j, s] = tc
                ev_p[j, s] = pv
                if pv >= hi or pv <= lo:
                    status[i] = 1 if pv >= hi else 2
                    fpt[i] = tc
                    break
            p[i] = pv
            t_cur[i] = tc
