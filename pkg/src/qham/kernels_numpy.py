"""Pure-numpy fallback for the statevector kernels.

Mirrors the kernels_numba API and consumes identical RNG streams, so a given
(circuit, seed, noise) triple draws the same outcomes on either backend.
Mass sums use numpy reductions whose rounding can differ from the numba
loops in the last ulp, so cross-backend equality of amplitudes is a
tolerance statement, not a bitwise one. Within this backend all execution
paths share the same expressions and are mutually bit-identical.
"""

import numpy as np

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

_M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_INV53 = 1.0 / 9007199254740992.0


def _mix64(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def stream_init(seed, idx):
    return _mix64((int(seed) + _GOLDEN * (int(idx) + 1)) & _M64)


def stream_next(s):
    s = (int(s) + _GOLDEN) & _M64
    return s, (_mix64(s) >> 11) * _INV53


def _pairs(dim, q):
    g = np.arange(dim >> 1, dtype=np.int64)
    i0 = ((g >> q) << (q + 1)) | (g & ((1 << q) - 1))
    return i0, i0 | (1 << q)


def _ctrl_base(dim, a, b):
    lo, hi = min(a, b), max(a, b)
    g = np.arange(dim >> 2, dtype=np.int64)
    v = ((g >> lo) << (lo + 1)) | (g & ((1 << lo) - 1))
    v = ((v >> hi) << (hi + 1)) | (v & ((1 << hi) - 1))
    return v


def apply_ry_k(state, q, c, s):
    i0, i1 = _pairs(state.shape[0], q)
    a0 = state[i0].copy()
    a1 = state[i1]
    state[i0] = c * a0 - s * a1
    state[i1] = s * a0 + c * a1


def apply_cry_k(state, ctrl, t, c, s):
    v = _ctrl_base(state.shape[0], ctrl, t)
    i0 = v | (1 << ctrl)
    i1 = i0 | (1 << t)
    a0 = state[i0].copy()
    a1 = state[i1]
    state[i0] = c * a0 - s * a1
    state[i1] = s * a0 + c * a1


def apply_x_k(state, q):
    i0, i1 = _pairs(state.shape[0], q)
    state[i0], state[i1] = state[i1].copy(), state[i0].copy()


def apply_z_k(state, q):
    _, i1 = _pairs(state.shape[0], q)
    state[i1] = -state[i1]


def apply_yreal_k(state, q):
    i0, i1 = _pairs(state.shape[0], q)
    a0 = state[i0].copy()
    state[i0] = -state[i1]
    state[i1] = a0


def apply_cnot_k(state, ctrl, t):
    v = _ctrl_base(state.shape[0], ctrl, t)
    i0 = v | (1 << ctrl)
    i1 = i0 | (1 << t)
    state[i0], state[i1] = state[i1].copy(), state[i0].copy()


def apply_swap_k(state, a, b):
    v = _ctrl_base(state.shape[0], a, b)
    ia = v | (1 << a)
    ib = v | (1 << b)
    state[ia], state[ib] = state[ib].copy(), state[ia].copy()


def apply_mat1_k(state, q, m00, m01, m10, m11):
    i0, i1 = _pairs(state.shape[0], q)
    a0 = state[i0].copy()
    a1 = state[i1]
    state[i0] = m00 * a0 + m01 * a1
    state[i1] = m10 * a0 + m11 * a1


def apply_cmat1_k(state, ctrl, t, m00, m01, m10, m11):
    v = _ctrl_base(state.shape[0], ctrl, t)
    i0 = v | (1 << ctrl)
    i1 = i0 | (1 << t)
    a0 = state[i0].copy()
    a1 = state[i1]
    state[i0] = m00 * a0 + m01 * a1
    state[i1] = m10 * a0 + m11 * a1


def masses_k(state, q):
    p = state.real * state.real + state.imag * state.imag
    one = (np.arange(state.shape[0]) & (1 << q)) != 0
    return float(p[~one].sum()), float(p[one].sum())


def collapse_k(state, q, outcome):
    one = (np.arange(state.shape[0]) & (1 << q)) != 0
    state[one != bool(outcome)] = 0.0


def prob_one_k(state, q):
    acc0, acc1 = masses_k(state, q)
    return acc1 / (acc0 + acc1)


def _reset_channel(state, q, rs):
    acc0, acc1 = masses_k(state, q)
    rs, u = stream_next(rs)
    if u < acc1 / (acc0 + acc1):
        collapse_k(state, q, 1)
        apply_x_k(state, q)
    else:
        collapse_k(state, q, 0)
    return rs


def _apply_pauli(state, q, which):
    if which == 0:
        apply_x_k(state, q)
    elif which == 1:
        apply_yreal_k(state, q)
    else:
        apply_z_k(state, q)


def _apply_unitary_op(state, code, qa, qb, cth, sth, mat, pc):
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


def run_one_shot(state, code, qa, qb, cth, sth, mat, ch_ptr, ch_kind, ch_prob, bits, rs):
    n_ops = code.shape[0]
    failed = 0
    pc = 0
    while pc < n_ops:
        k = code[pc]
        if k == OP_MEASURE:
            q = qa[pc]
            acc0, acc1 = masses_k(state, q)
            rs, u = stream_next(rs)
            o = 1 if u < acc1 / (acc0 + acc1) else 0
            collapse_k(state, q, o)
            for j in range(ch_ptr[pc], ch_ptr[pc + 1]):
                rs, u = stream_next(rs)
                if u < ch_prob[j]:
                    o ^= 1
            bits[qb[pc]] = o
            pc += 1
            continue
        if k == OP_RESET:
            rs = _reset_channel(state, qa[pc], rs)
            pc += 1
            continue
        if k == OP_JZ:
            pc = qb[pc] if bits[qa[pc]] == 0 else pc + 1
            continue
        if k == OP_JMP:
            pc = qb[pc]
            continue
        if k == OP_MARK_FAIL:
            failed = 1
            pc += 1
            continue

        _apply_unitary_op(state, code, qa, qb, cth, sth, mat, pc)

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
                    pa, pb = idx >> 2, idx & 3
                    if pa:
                        _apply_pauli(state, qa[pc], pa - 1)
                    if pb:
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


def run_shots(dim, code, qa, qb, cth, sth, mat, ch_ptr, ch_kind, ch_prob, shots, seed, n_cbits, shot_offset):
    bits = np.zeros((shots, n_cbits), dtype=np.uint8)
    fails = np.zeros(shots, dtype=np.uint8)
    for i in range(shots):
        state = np.zeros(dim, dtype=mat.dtype)
        state[0] = 1.0
        rs = stream_init(seed, shot_offset + i)
        _, fails[i] = run_one_shot(state, code, qa, qb, cth, sth, mat, ch_ptr, ch_kind, ch_prob, bits[i], rs)
    return bits, fails


def apply_segment(state, code, qa, qb, cth, sth, mat, pc0, pc1):
    for pc in range(pc0, pc1):
        if _apply_unitary_op(state, code, qa, qb, cth, sth, mat, pc):
            return 1
    return 0


def split_shots(state, q, shot_ids, rstates):
    acc0, acc1 = masses_k(state, q)
    p1 = acc1 / (acc0 + acc1)
    out = np.zeros(shot_ids.shape[0], dtype=np.uint8)
    for i, sid in enumerate(shot_ids):
        rs, u = stream_next(rstates[sid])
        rstates[sid] = rs
        if u < p1:
            out[i] = 1
    return out


def leaf_sample(state, mqs, mcbs, shot_ids, rstates, bits):
    # Per-shot replay with a state copy keeps the mass expressions identical
    # to run_one_shot within this backend.
    for sid in shot_ids:
        st = state.copy()
        rs = rstates[sid]
        for j in range(mqs.shape[0]):
            acc0, acc1 = masses_k(st, mqs[j])
            rs, u = stream_next(rs)
            o = 1 if u < acc1 / (acc0 + acc1) else 0
            collapse_k(st, mqs[j], o)
            bits[sid, mcbs[j]] = o
        rstates[sid] = rs


def warmup():
    pass
