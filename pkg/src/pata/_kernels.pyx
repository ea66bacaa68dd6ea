# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loop for affine problems.

Mirrors :mod:`pata._fallback` operation for operation; see that module for
the meaning of every argument.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, pow, isfinite, NAN
from libc.stdlib cimport qsort
from scipy.linalg.cython_blas cimport dgemv

cnp.import_array()

cdef enum:
    SET_BALL = 0
    SET_BOX = 1
    SET_SIMPLEX = 2

cdef enum:
    MODE_PRACTICAL = 0
    MODE_ERGODIC = 1
    MODE_PLAIN = 2

cdef enum:
    STEP_POWER = 0
    STEP_TABLE = 1
    STEP_CONSTANT = 2

cdef enum:
    STATUS_STOP = 0
    STATUS_EVENT = 1
    STATUS_NONFINITE = 2


cdef int _cmp_desc(const void* a, const void* b) noexcept nogil:
    cdef double x = (<double*>a)[0]
    cdef double y = (<double*>b)[0]
    if x < y:
        return 1
    if x > y:
        return -1
    return 0


cdef class AffineKernel:
    cdef const double[:, ::1] MF
    cdef const double[::1] bF
    cdef const double[:, ::1] MG
    cdef const double[::1] bG
    cdef double[:, ::1] M
    cdef double[::1] b
    cdef int n, set_kind, mode, step_kind
    cdef long check_every
    cdef double radius, scale, step_a, step_b
    cdef const double[::1] p1, p2
    cdef const double[::1] table
    cdef double[::1] phi, v, u, work

    def __init__(self, MF, bF, MG, bG, int set_kind, p1, p2, double radius, double scale,
                 int mode, int step_kind, double step_a, double step_b, long check_every):
        self.MF = np.ascontiguousarray(MF, dtype=np.float64)
        self.bF = np.ascontiguousarray(bF, dtype=np.float64)
        self.MG = np.ascontiguousarray(MG, dtype=np.float64)
        self.bG = np.ascontiguousarray(bG, dtype=np.float64)
        self.n = self.MF.shape[0]
        self.M = np.empty((self.n, self.n))
        self.b = np.empty(self.n)
        self.set_kind = set_kind
        self.p1 = np.ascontiguousarray(p1, dtype=np.float64)
        self.p2 = np.ascontiguousarray(p2, dtype=np.float64)
        self.radius = radius
        self.scale = scale
        self.mode = mode
        self.step_kind = step_kind
        self.step_a = step_a
        self.step_b = step_b
        self.check_every = check_every
        self.table = np.ones(1)
        self.phi = np.empty(self.n)
        self.v = np.empty(self.n)
        self.u = np.empty(self.n)
        self.work = np.empty(self.n)

    def set_tau(self, double tau):
        cdef int i, j
        for i in range(self.n):
            for j in range(self.n):
                self.M[i, j] = self.MF[i, j] + self.MG[i, j] / tau
            self.b[i] = self.bF[i] + self.bG[i] / tau

    def set_table(self, table):
        self.table = np.ascontiguousarray(table, dtype=np.float64)

    cdef inline double _step(self, long idx) noexcept nogil:
        if self.step_kind == STEP_POWER:
            if idx == 0:
                return 1.0
            return min(1.0, self.step_a / pow(<double>idx, self.step_b))
        if self.step_kind == STEP_TABLE:
            return self.table[idx]
        return self.step_a

    cdef inline void _phi(self, double[::1] x, double[::1] out) noexcept nogil:
        # out = M x + b ; M is row-major so BLAS sees its transpose
        cdef int n = self.n, inc = 1, i
        cdef double one = 1.0, zero = 0.0
        cdef char trans = b'T'
        dgemv(&trans, &n, &n, &one, &self.M[0, 0], &n, &x[0], &inc, &zero, &out[0], &inc)
        for i in range(n):
            out[i] = out[i] + self.b[i]

    cdef void _project(self, double[::1] x) noexcept nogil:
        cdef int n = self.n, i, rho
        cdef double s, nd, css, theta, t
        if self.set_kind == SET_BALL:
            s = 0.0
            for i in range(n):
                t = x[i] - self.p1[i]
                s += t * t
            nd = sqrt(s)
            if nd > self.radius:
                t = self.radius / nd
                for i in range(n):
                    x[i] = self.p1[i] + t * (x[i] - self.p1[i])
        elif self.set_kind == SET_BOX:
            for i in range(n):
                if x[i] < self.p1[i]:
                    x[i] = self.p1[i]
                if x[i] > self.p2[i]:
                    x[i] = self.p2[i]
        else:
            for i in range(n):
                self.work[i] = x[i]
            qsort(&self.work[0], n, sizeof(double), _cmp_desc)
            css = 0.0
            rho = 0
            theta = 0.0
            for i in range(n):
                css += self.work[i]
                t = (css - self.scale) / (i + 1)
                if self.work[i] - t > 0:
                    rho = i
                    theta = t
            for i in range(n):
                t = x[i] - theta
                x[i] = t if t > 0.0 else 0.0

    cdef double _gap(self, double[::1] z) noexcept nogil:
        cdef int n = self.n, i, jmin
        cdef double s, ng, g
        self._phi(z, self.phi)
        if self.set_kind == SET_BALL:
            s = 0.0
            for i in range(n):
                s += self.phi[i] * self.phi[i]
            ng = sqrt(s)
            if ng == 0.0:
                for i in range(n):
                    self.u[i] = self.p1[i]
            else:
                for i in range(n):
                    self.u[i] = self.p1[i] - (self.radius / ng) * self.phi[i]
        elif self.set_kind == SET_BOX:
            for i in range(n):
                self.u[i] = self.p2[i] if self.phi[i] < 0 else self.p1[i]
        else:
            jmin = 0
            for i in range(1, n):
                if self.phi[i] < self.phi[jmin]:
                    jmin = i
            for i in range(n):
                self.u[i] = 0.0
            self.u[jmin] = self.scale
        g = 0.0
        for i in range(n):
            g += self.phi[i] * (self.u[i] - z[i])
        return -g

    def gap(self, z):
        """Subproblem gap at ``z`` for the current ``tau``."""
        cdef double[::1] zz = np.ascontiguousarray(z, dtype=np.float64)
        return self._gap(zz)

    def advance(self, double[::1] y, double[::1] z, long k, long k_stop, long l,
                double wsum, double eps):
        """Run iterations ``k+1 .. k_stop``; stop early at an outer event."""
        cdef int n = self.n, i
        cdef long kk, s
        cdef double g = NAN, w, gap = NAN, nrm
        cdef int status = STATUS_STOP
        kk = k
        with nogil:
            while kk < k_stop:
                kk += 1
                s = kk - l
                if self.mode == MODE_ERGODIC:
                    g = self._step(s - 1)
                else:
                    g = self._step(s)
                self._phi(y, self.v)
                for i in range(n):
                    self.v[i] = y[i] - g * self.v[i]
                self._project(self.v)
                nrm = 0.0
                for i in range(n):
                    y[i] = self.v[i]
                    nrm += y[i] * y[i]
                if not isfinite(nrm):
                    status = STATUS_NONFINITE
                    break
                if self.mode == MODE_PLAIN:
                    for i in range(n):
                        z[i] = y[i]
                else:
                    w = g if self.mode == MODE_PRACTICAL else self._step(s)
                    for i in range(n):
                        z[i] = (z[i] * wsum + w * y[i]) / (wsum + w)
                    wsum = wsum + w
                if eps >= 0.0 and kk % self.check_every == 0:
                    gap = self._gap(z)
                    if not isfinite(gap):
                        status = STATUS_NONFINITE
                        break
                    if gap <= eps:
                        status = STATUS_EVENT
                        break
        return kk, wsum, status, gap, g
