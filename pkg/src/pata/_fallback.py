"""Pure-Python inner loop, used when the compiled kernel is unavailable.

The iteration counter ``k`` is 1-based and ``l`` is the iteration after
which the current subproblem started, so ``s = k - l >= 1`` counts steps
since the last restart.

``mode``
    0 -- running average weighted by the step that produced each point
    (the practical recurrence); 1 -- ergodic average where each point is
    weighted by the step taken *from* it, the restart point included;
    2 -- no averaging, ``z`` tracks ``y``.
``step_kind``
    0 -- ``min(1, a/s**alpha)``; 1 -- lookup in a table (recursive rule);
    2 -- constant ``a``.

``advance`` returns ``(k, wsum, status, gap, step)`` where status is 0
(stopped at ``k_stop``), 1 (outer event at ``k``) or 2 (non-finite iterate).
"""

import math

import numpy as np

SET_BALL, SET_BOX, SET_SIMPLEX = 0, 1, 2
MODE_PRACTICAL, MODE_ERGODIC, MODE_PLAIN = 0, 1, 2
STEP_POWER, STEP_TABLE, STEP_CONSTANT = 0, 1, 2
STATUS_STOP, STATUS_EVENT, STATUS_NONFINITE = 0, 1, 2


class PythonKernel:
    def __init__(self, feasible_set, mode, step_kind, step_a, step_b, check_every,
                 affine=None, maps=None):
        # affine = (MF, bF, MG, bG) ; maps = (F, G) callables
        self.set = feasible_set
        self.mode = mode
        self.step_kind = step_kind
        self.step_a = step_a
        self.step_b = step_b
        self.check_every = check_every
        self.affine = affine
        self.maps = maps
        self.table = np.ones(1)
        self.phi = None

    def set_tau(self, tau):
        if self.affine is not None:
            MF, bF, MG, bG = self.affine
            M = MF + MG / tau
            b = bF + bG / tau
            self.phi = lambda x: M @ x + b
        else:
            F, G = self.maps
            self.phi = lambda x: F(x) + G(x) / tau

    def set_table(self, table):
        self.table = np.asarray(table, dtype=np.float64)

    def _step(self, idx):
        if self.step_kind == STEP_POWER:
            if idx == 0:
                return 1.0
            return min(1.0, self.step_a / math.pow(idx, self.step_b))
        if self.step_kind == STEP_TABLE:
            return float(self.table[idx])
        return self.step_a

    def gap(self, z):
        p = self.phi(z)
        return float(-(p @ (self.set.lmo(p) - z)))

    def advance(self, y, z, k, k_stop, l, wsum, eps):
        phi, proj = self.phi, self.set.project
        mode, check = self.mode, self.check_every
        g = gap = math.nan
        status = STATUS_STOP
        while k < k_stop:
            k += 1
            s = k - l
            g = self._step(s - 1 if mode == MODE_ERGODIC else s)
            y[:] = proj(y - g * phi(y))
            if not math.isfinite(float(y @ y)):
                status = STATUS_NONFINITE
                break
            if mode == MODE_PLAIN:
                z[:] = y
            else:
                w = g if mode == MODE_PRACTICAL else self._step(s)
                z[:] = (z * wsum + w * y) / (wsum + w)
                wsum = wsum + w
            if eps >= 0.0 and k % check == 0:
                gap = self.gap(z)
                if not math.isfinite(gap):
                    status = STATUS_NONFINITE
                    break
                if gap <= eps:
                    status = STATUS_EVENT
                    break
        return k, wsum, status, gap, g
