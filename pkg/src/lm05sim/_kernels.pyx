# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled round kernel; must stay bit-for-bit in step with _kernels_py."""

from libc.math cimport cos, sin, sqrt

import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef double SQRT1_2 = 1.0 / sqrt(2.0)


cdef struct Qubit:
    double a0r
    double a0i
    double a1r
    double a1i


cdef inline void prep(Qubit* q, int basis, int bit) noexcept nogil:
    q.a0i = 0.0
    q.a1i = 0.0
    if basis == 0:
        q.a0r = 1.0 if bit == 0 else 0.0
        q.a1r = 0.0 if bit == 0 else 1.0
    else:
        q.a0r = SQRT1_2
        q.a1r = SQRT1_2 if bit == 0 else -SQRT1_2


cdef inline double prob0(Qubit* q, int basis) noexcept nogil:
    cdef double sr, si
    if basis == 0:
        return q.a0r * q.a0r + q.a0i * q.a0i
    sr = q.a0r + q.a1r
    si = q.a0i + q.a1i
    return 0.5 * (sr * sr + si * si)


cdef inline void apply_x(Qubit* q) noexcept nogil:
    cdef double tr = q.a0r, ti = q.a0i
    q.a0r = q.a1r
    q.a0i = q.a1i
    q.a1r = tr
    q.a1i = ti


cdef inline void apply_y(Qubit* q) noexcept nogil:
    # [[0, -i], [i, 0]]
    cdef double b0r = q.a1i, b0i = -q.a1r
    cdef double b1r = -q.a0i, b1i = q.a0r
    q.a0r = b0r
    q.a0i = b0i
    q.a1r = b1r
    q.a1i = b1i


cdef inline void apply_iy(Qubit* q) noexcept nogil:
    # [[0, 1], [-1, 0]]
    cdef double tr = q.a0r, ti = q.a0i
    q.a0r = q.a1r
    q.a0i = q.a1i
    q.a1r = -tr
    q.a1i = -ti


cdef inline void apply_attack(Qubit* q, int axis, double c, double s) noexcept nogil:
    cdef double b0r, b0i, b1r, b1i
    if axis == 1:
        # diag(c + is, c - is)
        b0r = c * q.a0r - s * q.a0i
        b0i = c * q.a0i + s * q.a0r
        b1r = c * q.a1r + s * q.a1i
        b1i = c * q.a1i - s * q.a1r
    else:
        # [[c, is], [is, c]]
        b0r = c * q.a0r - s * q.a1i
        b0i = c * q.a0i + s * q.a1r
        b1r = c * q.a1r - s * q.a0i
        b1i = c * q.a1i + s * q.a0r
    q.a0r = b0r
    q.a0i = b0i
    q.a1r = b1r
    q.a1i = b1i


cdef inline void leg(Qubit* q, const double* u, int axis, double c, double s,
                     double kick, double flip) noexcept nogil:
    if axis != 0:
        apply_attack(q, axis, c, s)
    if u[0] < kick:
        apply_x(q)
    if u[1] < kick:
        apply_y(q)
    if u[2] < flip:
        apply_y(q)


cdef inline int readout(int bit, double xi, const double* u) noexcept nogil:
    if u[0] < xi:
        return 1 if u[1] >= 0.5 else 0
    return bit


def simulate_rounds(const double[:, ::1] u, const double[::1] params):
    """Run ``u.shape[0]`` rounds; returns an (n, 7) int8 record array."""
    cdef Py_ssize_t n = u.shape[0], i
    if u.shape[1] != 16:
        raise ValueError("expected 16 uniforms per round")
    if params.shape[0] != 9:
        raise ValueError("expected 9 kernel parameters")
    out_arr = np.empty((n, 7), dtype=np.int8)
    cdef signed char[:, ::1] out = out_arr

    cdef int axis = <int>params[0]
    cdef double cf = cos(0.5 * params[1]), sf = sin(0.5 * params[1])
    cdef double cb = cos(0.5 * params[2]), sb = sin(0.5 * params[2])
    cdef double kick = 0.5 * params[3]
    cdef double xi = params[4]
    cdef double flip_f = params[5], flip_b = params[6]
    cdef double control = params[7]
    cdef bint xi_all = params[8] != 0.0

    cdef Qubit q
    cdef const double* r
    cdef int pb, bit, ab, outcome, enc, bob
    with nogil:
        for i in range(n):
            r = &u[i, 0]
            pb = 0 if r[0] < 0.5 else 1
            bit = 0 if r[1] < 0.5 else 1
            prep(&q, pb, bit)
            leg(&q, r + 2, axis, cf, sf, kick, flip_f)
            if r[5] < control:
                ab = 0 if r[6] < 0.5 else 1
                outcome = 0 if r[7] < prob0(&q, ab) else 1
                if xi_all:
                    outcome = readout(outcome, xi, r + 8)
                prep(&q, ab, outcome)
                out[i, 2] = 0
                out[i, 3] = ab
                out[i, 4] = outcome
                out[i, 5] = -1
            else:
                enc = 0 if r[6] < 0.5 else 1
                if enc:
                    apply_iy(&q)
                out[i, 2] = 1
                out[i, 3] = -1
                out[i, 4] = -1
                out[i, 5] = enc
            leg(&q, r + 10, axis, cb, sb, kick, flip_b)
            bob = 0 if r[13] < prob0(&q, pb) else 1
            if xi_all or out[i, 2] == 1:
                bob = readout(bob, xi, r + 14)
            out[i, 0] = pb
            out[i, 1] = bit
            out[i, 6] = bob
    return out_arr


def tally(const signed char[:, ::1] rec):
    """Per preparation basis: [sifted CM, q1 errors, q2 errors, EM, decode errors]."""
    cdef Py_ssize_t n = rec.shape[0], i
    if rec.shape[1] != 7:
        raise ValueError("records must have shape (n, 7)")
    counts_arr = np.zeros((2, 5), dtype=np.int64)
    cdef long long[:, ::1] c = counts_arr
    cdef int pb, bit, bob, ao
    with nogil:
        for i in range(n):
            pb = rec[i, 0]
            bit = rec[i, 1]
            bob = rec[i, 6]
            if rec[i, 2] == 0:
                if rec[i, 3] == pb:
                    ao = rec[i, 4]
                    c[pb, 0] += 1
                    c[pb, 1] += ao != bit
                    c[pb, 2] += bob != ao
            else:
                c[pb, 3] += 1
                c[pb, 4] += (bob ^ bit) != rec[i, 5]
    return counts_arr
