"""Numba statevector kernels and the per-shot trajectory VM.

Kernels are dtype-generic: numba specializes them for float64 states (circuits
made of real gates, the hot path for recall and capacity runs) and complex128
states (anything containing rz/sx/cy). Amplitudes are kept unnormalized along
a trajectory; probabilities are always ratios of strided mass sums, so a
collapse never needs a renormalization pass.

Every shot owns an independent splitmix64 stream derived from (seed, shot
index), which makes results bit-identical for any thread count or shot
execution order.
"""

import numpy as np
from numba import njit, prange

from qham.circuit import (
    CH_DAMP_A,
    CH_DAMP_B,
    CH_DEPH_A,
    CH_DEPH_B,
    CH_DEPOL1_A,
    CH_DEPOL1_B,
    CH_DEPOL2,
    OP_CNOT,
    OP_CRY,
    OP_CY,
    OP_ID,
    OP_JMP,
    OP_JZ,
    OP_MARK_FAIL,
    OP_MEASURE,
    OP_RESET,
    OP_RY,
    OP_RZ,
    OP_SWAP,
    OP_SX,
    OP_X,
)

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


@njit(cache=True, nogil=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True, inline="always")
def stream_init(seed, idx):
    return _mix64(seed + _GOLDEN * (idx + np.uint64(1)))


@njit(cache=True, nogil=True, inline="always")
def stream_next(s):
    s = s + _GOLDEN
    return s, np.float64(_mix64(s) >> np.uint64(11)) * _INV53


@njit(cache=True, nogil=True, inline="always")
def _abs2(v):
    return v.real * v.real + v.imag * v.imag


# Runs at least this long go through slice views, whose distinct base
# pointers let LLVM emit runtime alias checks and vectorize the loop.
_VEC_MIN = 8


@njit(cache=True, nogil=True, inline="always")
def _rot_pair_run(state, i0_start, i1_start, run, c, s):
    if run >= _VEC_MIN:
        lo = state[i0_start : i0_start + run]
        hi = state[i1_start : i1_start + run]
        for j in range(run):
            a0 = lo[j]
            a1 = hi[j]
            lo[j] = c * a0 - s * a1
            hi[j] = s * a0 + c * a1
    else:
        for j in range(run):
            a0 = state[i0_start + j]
            a1 = state[i1_start + j]
            state[i0_start + j] = c * a0 - s * a1
            state[i1_start + j] = s * a0 + c * a1


@njit(cache=True, nogil=True, inline="always")
def apply_ry_k(state, q, c, s):
    k = 1 << q
    for base in range(0, state.shape[0], k << 1):
        _rot_pair_run(state, base, base + k, k, c, s)


@njit(cache=True, nogil=True, inline="always")
def apply_cry_k(state, ctrl, t, c, s):
    kc = 1 << ctrl
    kt = 1 << t
    klo = 1 << min(ctrl, t)
    khi = 1 << max(ctrl, t)
    for a in range(0, state.shape[0], khi << 1):
        for b in range(a, a + khi, klo << 1):
            _rot_pair_run(state, b + kc, b + kc + kt, klo, c, s)


@njit(cache=True, nogil=True, inline="always")
def _swap_run(state, i0_start, i1_start, run):
    if run >= _VEC_MIN:
        lo = state[i0_start : i0_start + run]
        hi = state[i1_start : i1_start + run]
        for j in range(run):
            a0 = lo[j]
            lo[j] = hi[j]
            hi[j] = a0
    else:
        for j in range(run):
            a0 = state[i0_start + j]
            state[i0_start + j] = state[i1_start + j]
            state[i1_start + j] = a0


@njit(cache=True, nogil=True, inline="always")
def apply_x_k(state, q):
    k = 1 << q
    for base in range(0, state.shape[0], k << 1):
        _swap_run(state, base, base + k, k)


@njit(cache=True, nogil=True, inline="always")
def apply_z_k(state, q):
    k = 1 << q
    for base in range(0, state.shape[0], k << 1):
        for i1 in range(base + k, base + (k << 1)):
            state[i1] = -state[i1]


@njit(cache=True, nogil=True, inline="always")
def apply_yreal_k(state, q):
    # iY up to global phase: |0> -> |1>, |1> -> -|0>
    k = 1 << q
    for base in range(0, state.shape[0], k << 1):
        for i0 in range(base, base + k):
            i1 = i0 + k
            a0 = state[i0]
            state[i0] = -state[i1]
            state[i1] = a0


@njit(cache=True, nogil=True, inline="always")
def apply_cnot_k(state, ctrl, t):
    kc = 1 << ctrl
    kt = 1 << t
    klo = 1 << min(ctrl, t)
    khi = 1 << max(ctrl, t)
    for a in range(0, state.shape[0], khi << 1):
        for b in range(a, a + khi, klo << 1):
            _swap_run(state, b + kc, b + kc + kt, klo)


@njit(cache=True, nogil=True, inline="always")
def apply_swap_k(state, qa, qb):
    ka = 1 << qa
    kb = 1 << qb
    klo = 1 << min(qa, qb)
    khi = 1 << max(qa, qb)
    for a in range(0, state.shape[0], khi << 1):
        for b in range(a, a + khi, klo << 1):
            _swap_run(state, b + ka, b + kb, klo)


@njit(cache=True, nogil=True, inline="always")
def _mat_pair_run(state, i0_start, i1_start, run, m00, m01, m10, m11):
    for j in range(run):
        a0 = state[i0_start + j]
        a1 = state[i1_start + j]
        state[i0_start + j] = m00 * a0 + m01 * a1
        state[i1_start + j] = m10 * a0 + m11 * a1


@njit(cache=True, nogil=True, inline="always")
def apply_mat1_k(state, q, m00, m01, m10, m11):
    k = 1 << q
    for base in range(0, state.shape[0], k << 1):
        _mat_pair_run(state, base, base + k, k, m00, m01, m10, m11)


@njit(cache=True, nogil=True, inline="always")
def apply_cmat1_k(state, ctrl, t, m00, m01, m10, m11):
    kc = 1 << ctrl
    kt = 1 << t
    klo = 1 << min(ctrl, t)
    khi = 1 << max(ctrl, t)
    for a in range(0, state.shape[0], khi << 1):
        for b in range(a, a + khi, klo << 1):
            _mat_pair_run(state, b + kc, b + kc + kt, klo, m00, m01, m10, m11)


@njit(cache=True, nogil=True, inline="always")
def masses_k(state, q):
    """Unnormalized probability masses (bit clear, bit set) for one qubit."""
    k = 1 << q
    acc0 = 0.0
    acc1 = 0.0
    for base in range(0, state.shape[0], k << 1):
        for i in range(base, base + k):
            acc0 += _abs2(state[i])
        for i in range(base + k, base + (k << 1)):
            acc1 += _abs2(state[i])
    return acc0, acc1


@njit(cache=True, nogil=True, inline="always")
def collapse_k(state, q, outcome):
    """Zero the amplitudes inconsistent with the outcome; no renormalization."""
    k = 1 << q
    for base in range(0, state.shape[0], k << 1):
        if outcome == 1:
            for i in range(base, base + k):
                state[i] = 0.0
        else:
            for i in range(base + k, base + (k << 1)):
                state[i] = 0.0


@njit(cache=True, nogil=True, inline="always")
def _reset_channel(state, q, rs):
    """Trajectory reset: measure, then flip back to |0> if the outcome was 1."""
    acc0, acc1 = masses_k(state, q)
    rs, u = stream_next(rs)
    if u < acc1 / (acc0 + acc1):
        collapse_k(state, q, 1)
        apply_x_k(state, q)
    else:
        collapse_k(state, q, 0)
    return rs


@njit(cache=True, nogil=True, inline="always")
def _apply_pauli(state, q, which):
    # 0: X, 1: Y (real form), 2: Z
    if which == 0:
        apply_x_k(state, q)
    elif which == 1:
        apply_yreal_k(state, q)
    else:
        apply_z_k(state, q)


@njit(cache=True, nogil=True)
def run_one_shot(state, code, qa, qb, cth, sth, mat, ch_ptr, ch_kind, ch_prob, bits, rs):
    """Execute one trajectory on a prepared |0...0> state. Returns (rng, failed)."""
    n_ops = code.shape[0]
    failed = np.uint8(0)
    pc = 0
    while pc < n_ops:
        k = code[pc]
        if k == OP_MEASURE:
            q = qa[pc]
            acc0, acc1 = masses_k(state, q)
            rs, u = stream_next(rs)
            o = np.uint8(1) if u < acc1 / (acc0 + acc1) else np.uint8(0)
            collapse_k(state, q, o)
            for j in range(ch_ptr[pc], ch_ptr[pc + 1]):
                rs, u = stream_next(rs)
                if u < ch_prob[j]:
                    o ^= np.uint8(1)
            bits[qb[pc]] = o
            pc += 1
            continue
        if k == OP_RESET:
            rs = _reset_channel(state, qa[pc], rs)
            pc += 1
            continue
        if k == OP_JZ:
            if bits[qa[pc]] == 0:
                pc = qb[pc]
            else:
                pc += 1
            continue
        if k == OP_JMP:
            pc = qb[pc]
            continue
        if k == OP_MARK_FAIL:
            failed = np.uint8(1)
            pc += 1
            continue

        if k == OP_RY:
            apply_ry_k(state, qa[pc], cth[pc], sth[pc])
        elif k == OP_CRY:
            apply_cry_k(state, qa[pc], qb[pc], cth[pc], sth[pc])
        elif k == OP_X:
            apply_x_k(state, qa[pc])
        elif k == OP_CNOT:
            apply_cnot_k(state, qa[pc], qb[pc])
        elif k == OP_SWAP:
            apply_swap_k(state, qa[pc], qb[pc])
        elif k == OP_RZ or k == OP_SX:
            apply_mat1_k(state, qa[pc], mat[pc, 0], mat[pc, 1], mat[pc, 2], mat[pc, 3])
        elif k == OP_CY:
            apply_cmat1_k(state, qa[pc], qb[pc], mat[pc, 0], mat[pc, 1], mat[pc, 2], mat[pc, 3])
        # OP_ID: no state change; channels below still fire (idle noise).

        for j in range(ch_ptr[pc], ch_ptr[pc + 1]):
            rs, u = stream_next(rs)
            p = ch_prob[j]
            if u < p:
                ck = ch_kind[j]
                if ck == CH_DEPOL1_A or ck == CH_DEPOL1_B:
                    q = qa[pc] if ck == CH_DEPOL1_A else qb[pc]
                    _apply_pauli(state, q, min(int(u * 3.0 / p), 2))
                elif ck == CH_DEPOL2:
                    idx = min(int(u * 15.0 / p), 14) + 1
                    pa = idx >> 2
                    pb = idx & 3
                    if pa != 0:
                        _apply_pauli(state, qa[pc], pa - 1)
                    if pb != 0:
                        _apply_pauli(state, qb[pc], pb - 1)
                elif ck == CH_DAMP_A:
                    rs = _reset_channel(state, qa[pc], rs)
                elif ck == CH_DAMP_B:
                    rs = _reset_channel(state, qb[pc], rs)
                elif ck == CH_DEPH_A:
                    apply_z_k(state, qa[pc])
                elif ck == CH_DEPH_B:
                    apply_z_k(state, qb[pc])
        pc += 1
    return rs, failed


@njit(cache=True, nogil=True, parallel=True)
def run_shots(dim, code, qa, qb, cth, sth, mat, ch_ptr, ch_kind, ch_prob, shots, seed, n_cbits, shot_offset):
    """Run `shots` independent trajectories; returns (bits, failed) per shot."""
    bits = np.zeros((shots, n_cbits), dtype=np.uint8)
    fails = np.zeros(shots, dtype=np.uint8)
    for i in prange(shots):
        state = np.zeros(dim, mat.dtype)
        state[0] = 1.0
        rs = stream_init(seed, np.uint64(shot_offset + i))
        rs, failed = run_one_shot(state, code, qa, qb, cth, sth, mat, ch_ptr, ch_kind, ch_prob, bits[i], rs)
        fails[i] = failed
    return bits, fails


@njit(cache=True, nogil=True)
def apply_segment(state, code, qa, qb, cth, sth, mat, pc0, pc1):
    """Apply the unitary ops in [pc0, pc1). Returns 0, or 1 on a non-unitary op."""
    for pc in range(pc0, pc1):
        k = code[pc]
        if k == OP_RY:
            apply_ry_k(state, qa[pc], cth[pc], sth[pc])
        elif k == OP_CRY:
            apply_cry_k(state, qa[pc], qb[pc], cth[pc], sth[pc])
        elif k == OP_X:
            apply_x_k(state, qa[pc])
        elif k == OP_CNOT:
            apply_cnot_k(state, qa[pc], qb[pc])
        elif k == OP_SWAP:
            apply_swap_k(state, qa[pc], qb[pc])
        elif k == OP_RZ or k == OP_SX:
            apply_mat1_k(state, qa[pc], mat[pc, 0], mat[pc, 1], mat[pc, 2], mat[pc, 3])
        elif k == OP_CY:
            apply_cmat1_k(state, qa[pc], qb[pc], mat[pc, 0], mat[pc, 1], mat[pc, 2], mat[pc, 3])
        elif k != OP_ID:
            return 1
    return 0


@njit(cache=True, nogil=True)
def split_shots(state, q, shot_ids, rstates):
    """Draw a measurement outcome for every listed shot on a shared branch state.

    Advances each shot's RNG stream exactly as run_one_shot would and returns
    the outcome per shot. The caller partitions shots into the two branches.
    """
    acc0, acc1 = masses_k(state, q)
    p1 = acc1 / (acc0 + acc1)
    out = np.zeros(shot_ids.shape[0], dtype=np.uint8)
    for i in range(shot_ids.shape[0]):
        sid = shot_ids[i]
        rs, u = stream_next(rstates[sid])
        rstates[sid] = rs
        if u < p1:
            out[i] = 1
    return out


@njit(cache=True, nogil=True)
def leaf_sample(state, mqs, mcbs, shot_ids, rstates, bits):
    """Sample a trailing measure-only suffix for every listed shot.

    Reproduces run_one_shot's sequential conditional sampling bit-for-bit:
    masses are sums of the same |amplitude|^2 terms in the same index order
    (collapsed amplitudes are exact zeros, so skipping them changes nothing).
    """
    dim = state.shape[0]
    probs = np.empty(dim, dtype=np.float64)
    for i in range(dim):
        probs[i] = _abs2(state[i])
    for i in range(shot_ids.shape[0]):
        sid = shot_ids[i]
        rs = rstates[sid]
        fixed_mask = 0
        fixed_val = 0
        for j in range(mqs.shape[0]):
            k = 1 << mqs[j]
            acc0 = 0.0
            acc1 = 0.0
            for idx in range(dim):
                if (idx & fixed_mask) == fixed_val:
                    if idx & k:
                        acc1 += probs[idx]
                    else:
                        acc0 += probs[idx]
            rs, u = stream_next(rs)
            o = np.uint8(1) if u < acc1 / (acc0 + acc1) else np.uint8(0)
            fixed_mask |= k
            if o:
                fixed_val |= k
            bits[sid, mcbs[j]] = o
        rstates[sid] = rs


@njit(cache=True, nogil=True)
def prob_one_k(state, q):
    acc0, acc1 = masses_k(state, q)
    return acc1 / (acc0 + acc1)


def warmup():
    """Compile the hot kernels for both state dtypes (first-call JIT cost)."""
    for dtype in (np.float64, np.complex128):
        code = np.array([OP_RY, OP_CRY, OP_SWAP, OP_RESET, OP_MEASURE], dtype=np.int64)
        qa = np.array([0, 0, 1, 2, 0], dtype=np.int64)
        qb = np.array([0, 1, 2, 0, 0], dtype=np.int64)
        cth = np.full(5, np.cos(0.3), dtype=np.float64)
        sth = np.full(5, np.sin(0.3), dtype=np.float64)
        mat = np.zeros((5, 4), dtype=dtype)
        ch_ptr = np.zeros(6, dtype=np.int64)
        ch_kind = np.zeros(0, dtype=np.int64)
        ch_prob = np.zeros(0, dtype=np.float64)
        run_shots(8, code, qa, qb, cth, sth, mat, ch_ptr, ch_kind, ch_prob, 2, np.uint64(1), 1, 0)
        state = np.zeros(8, dtype=dtype)
        state[0] = 1.0
        apply_segment(state, code, qa, qb, cth, sth, mat, 0, 3)
        prob_one_k(state, 0)
        rst = np.array([stream_init(np.uint64(1), np.uint64(0))], dtype=np.uint64)
        ids = np.zeros(1, dtype=np.int64)
        split_shots(state, 2, ids, rst)
        bits = np.zeros((1, 1), dtype=np.uint8)
        leaf_sample(state, np.array([0], dtype=np.int64), np.array([0], dtype=np.int64), ids, rst, bits)
