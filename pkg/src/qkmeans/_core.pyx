# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch kernels for dense statevector simulation.

Every kernel works in place on a C-contiguous ``(batch, 2**n)`` complex128
array. Row ``b`` of the parameter array applies to row ``b`` of the states.
Qubit ``q`` is bit ``q`` of the basis index (little-endian).
"""

ctypedef double complex cplx


def apply_1q(cplx[:, ::1] states, int qubit, cplx[:, :, ::1] mats):
    cdef Py_ssize_t batch = states.shape[0]
    cdef Py_ssize_t dim = states.shape[1]
    cdef Py_ssize_t half = dim >> 1
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << qubit
    cdef Py_ssize_t low_mask = stride - 1
    cdef Py_ssize_t b, i, i0, i1
    cdef cplx m00, m01, m10, m11, a0, a1
    with nogil:
        for b in range(batch):
            m00 = mats[b, 0, 0]
            m01 = mats[b, 0, 1]
            m10 = mats[b, 1, 0]
            m11 = mats[b, 1, 1]
            for i in range(half):
                i0 = ((i & ~low_mask) << 1) | (i & low_mask)
                i1 = i0 | stride
                a0 = states[b, i0]
                a1 = states[b, i1]
                states[b, i0] = m00 * a0 + m01 * a1
                states[b, i1] = m10 * a0 + m11 * a1


def apply_cx(cplx[:, ::1] states, int control, int target):
    cdef Py_ssize_t batch = states.shape[0]
    cdef Py_ssize_t dim = states.shape[1]
    cdef Py_ssize_t cbit = (<Py_ssize_t>1) << control
    cdef Py_ssize_t tbit = (<Py_ssize_t>1) << target
    cdef Py_ssize_t b, i, j
    cdef cplx tmp
    with nogil:
        for b in range(batch):
            for i in range(dim):
                # visit each swapped pair once, from its target-bit-0 member
                if (i & cbit) and not (i & tbit):
                    j = i | tbit
                    tmp = states[b, i]
                    states[b, i] = states[b, j]
                    states[b, j] = tmp


def apply_cphase(cplx[:, ::1] states, int control, int target, cplx[::1] phases):
    cdef Py_ssize_t batch = states.shape[0]
    cdef Py_ssize_t dim = states.shape[1]
    cdef Py_ssize_t both = ((<Py_ssize_t>1) << control) | ((<Py_ssize_t>1) << target)
    cdef Py_ssize_t b, i
    cdef cplx ph
    with nogil:
        for b in range(batch):
            ph = phases[b]
            for i in range(dim):
                if (i & both) == both:
                    states[b, i] = states[b, i] * ph


def abs2_overlaps(cplx[:, ::1] left, cplx[:, ::1] right, double[:, ::1] out):
    """``out[i, j] = |<left_i|right_j>|**2``."""
    cdef Py_ssize_t n = left.shape[0]
    cdef Py_ssize_t m = right.shape[0]
    cdef Py_ssize_t dim = left.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double re, im, ar, ai, br, bi
    with nogil:
        for i in range(n):
            for j in range(m):
                re = 0.0
                im = 0.0
                for k in range(dim):
                    ar = left[i, k].real
                    ai = left[i, k].imag
                    br = right[j, k].real
                    bi = right[j, k].imag
                    re = re + ar * br + ai * bi
                    im = im + ar * bi - ai * br
                out[i, j] = re * re + im * im
