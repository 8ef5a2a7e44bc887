"""Pure numpy versions of the batch kernels in ``_core.pyx``.

Signatures and in-place semantics match the compiled module exactly.
"""

import numpy as np


def apply_1q(states, qubit, mats):
    batch, dim = states.shape
    view = states.reshape(batch, dim >> (qubit + 1), 2, 1 << qubit)
    a0 = view[:, :, 0, :].copy()
    a1 = view[:, :, 1, :].copy()
    m = mats[:, :, :, None, None]
    view[:, :, 0, :] = m[:, 0, 0] * a0 + m[:, 0, 1] * a1
    view[:, :, 1, :] = m[:, 1, 0] * a0 + m[:, 1, 1] * a1


def _cx_pairs(dim, control, target):
    idx = np.arange(dim)
    src = idx[((idx >> control) & 1 == 1) & ((idx >> target) & 1 == 0)]
    return src, src | (1 << target)


def apply_cx(states, control, target):
    src, dst = _cx_pairs(states.shape[1], control, target)
    tmp = states[:, src].copy()
    states[:, src] = states[:, dst]
    states[:, dst] = tmp


def apply_cphase(states, control, target, phases):
    idx = np.arange(states.shape[1])
    both = (1 << control) | (1 << target)
    sel = (idx & both) == both
    states[:, sel] *= phases[:, None]


def abs2_overlaps(left, right, out):
    out[...] = np.abs(left.conj() @ right.T) ** 2
