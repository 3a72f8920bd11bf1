"""Adaptive byte-wise range coder over a zigzag symbol alphabet.

Signed symbols are zigzag-mapped; magnitudes up to MAG_CAP are coded
directly from an adaptive frequency model (Fenwick tree), larger ones emit
an escape symbol followed by a fixed-length raw remainder. The model starts
uniform and is rebuilt from halved counts when its total saturates, so no
probability tables are transmitted.
"""

import struct

import numpy as np
from numba import njit

from .errors import CorruptionError, DynamicRangeError

MAG_CAP = 1 << 15       # magnitudes above this escape to raw bits
SYMBOL_LIMIT = 1 << 23  # hard bound on |symbol|

_NDIRECT = 2 * MAG_CAP + 1   # zigzag values 0 .. 2*MAG_CAP
_ESC = _NDIRECT
_NSYM = _NDIRECT + 1
_FEN_BIT = 1 << 17           # smallest power of two > _NSYM
_INC = 1024
_RESCALE_AT = 1 << 22
_TOP = 1 << 24
_RAW_LO = 12                 # escape remainder split: 13 high + 12 low bits
_RAW_HI = 13


@njit(cache=True)
def _fen_build(freq, tree):
    n = freq.size
    for i in range(1, n + 1):
        tree[i] = freq[i - 1]
    for i in range(1, n + 1):
        j = i + (i & (-i))
        if j <= n:
            tree[j] += tree[i]


@njit(cache=True)
def _fen_prefix(tree, i):
    # sum of freq[0..i-1]
    s = 0
    while i > 0:
        s += tree[i]
        i -= i & (-i)
    return s


@njit(cache=True)
def _fen_add(tree, n, i, delta):
    i += 1
    while i <= n:
        tree[i] += delta
        i += i & (-i)


@njit(cache=True)
def _fen_find(tree, n, v):
    # largest idx with prefix(idx) <= v; returns idx and that prefix
    idx = 0
    cum = 0
    bit = _FEN_BIT
    while bit:
        nxt = idx + bit
        if nxt <= n and cum + tree[nxt] <= v:
            idx = nxt
            cum += tree[nxt]
        bit >>= 1
    return idx, cum


@njit(cache=True)
def _shift_low(st, out, pos):
    # st: [low, range, cache, cache_size]
    low = st[0]
    if low < 0xFF000000 or low > 0xFFFFFFFF:
        carry = low >> 32
        out[pos] = (st[2] + carry) & 0xFF
        pos += 1
        for _ in range(st[3] - 1):
            out[pos] = (0xFF + carry) & 0xFF
            pos += 1
        st[2] = (low >> 24) & 0xFF
        st[3] = 0
    st[3] += 1
    st[0] = (low << 8) & 0xFFFFFFFF
    return pos


@njit(cache=True)
def _enc_put(st, out, pos, cum, f, tot):
    st[1] //= tot
    st[0] += cum * st[1]
    st[1] *= f
    while st[1] < _TOP:
        st[1] <<= 8
        pos = _shift_low(st, out, pos)
    return pos


@njit(cache=True)
def _model_update(freq, tree, total, sym):
    freq[sym] += _INC
    _fen_add(tree, _NSYM, sym, _INC)
    total += _INC
    if total >= _RESCALE_AT:
        total = 0
        for i in range(_NSYM):
            freq[i] = (freq[i] + 1) >> 1
            total += freq[i]
        _fen_build(freq, tree)
    return total


@njit(cache=True)
def _rc_encode(symbols, out):
    freq = np.ones(_NSYM, np.int64)
    tree = np.zeros(_NSYM + 1, np.int64)
    _fen_build(freq, tree)
    total = _NSYM
    st = np.zeros(4, np.int64)
    st[1] = 0xFFFFFFFF
    st[3] = 1
    pos = 0
    for si in range(symbols.size):
        s = symbols[si]
        u = 2 * s if s >= 0 else -2 * s - 1
        sym = u if -MAG_CAP <= s <= MAG_CAP else _ESC
        cum = _fen_prefix(tree, sym)
        pos = _enc_put(st, out, pos, cum, freq[sym], total)
        if sym == _ESC:
            pos = _enc_put(st, out, pos, u >> _RAW_LO, 1, 1 << _RAW_HI)
            pos = _enc_put(st, out, pos, u & ((1 << _RAW_LO) - 1), 1,
                           1 << _RAW_LO)
        total = _model_update(freq, tree, total, sym)
    for _ in range(5):
        pos = _shift_low(st, out, pos)
    return pos


@njit(cache=True)
def _dec_get(st, data, tot):
    # st: [code, range, pos]
    st[1] //= tot
    dv = st[0] // st[1]
    if dv >= tot:
        dv = tot - 1
    return dv


@njit(cache=True)
def _dec_update(st, data, cum, f):
    st[0] -= cum * st[1]
    st[1] *= f
    while st[1] < _TOP:
        b = data[st[2]] if st[2] < data.size else 0
        st[2] += 1
        st[0] = ((st[0] << 8) | b) & 0xFFFFFFFF
        st[1] <<= 8


@njit(cache=True)
def _rc_decode(data, out):
    freq = np.ones(_NSYM, np.int64)
    tree = np.zeros(_NSYM + 1, np.int64)
    _fen_build(freq, tree)
    total = _NSYM
    st = np.zeros(3, np.int64)
    st[1] = 0xFFFFFFFF
    st[2] = 1  # skip the encoder's leading cache byte
    for _ in range(4):
        b = data[st[2]] if st[2] < data.size else 0
        st[2] += 1
        st[0] = (st[0] << 8) | b
    for i in range(out.size):
        dv = _dec_get(st, data, total)
        sym, cum = _fen_find(tree, _NSYM, dv)
        _dec_update(st, data, cum, freq[sym])
        if sym == _ESC:
            hi = _dec_get(st, data, 1 << _RAW_HI)
            _dec_update(st, data, hi, 1)
            lo = _dec_get(st, data, 1 << _RAW_LO)
            _dec_update(st, data, lo, 1)
            u = (hi << _RAW_LO) | lo
        else:
            u = sym
        out[i] = u >> 1 if (u & 1) == 0 else -((u + 1) >> 1)
        total = _model_update(freq, tree, total, sym)


def entropy_encode(symbols):
    """Encode a signed integer sequence; the payload embeds its length."""
    syms = np.ascontiguousarray(symbols, np.int64).reshape(-1)
    if syms.size and int(np.abs(syms).max()) > SYMBOL_LIMIT:
        raise DynamicRangeError(
            f"symbol magnitude exceeds {SYMBOL_LIMIT}"
        )
    header = struct.pack("<I", syms.size)
    if syms.size == 0:
        return header
    out = np.empty(16 * syms.size + 64, np.uint8)
    n = _rc_encode(syms, out)
    return header + out[:n].tobytes()


def entropy_decode(data, count):
    """Exact inverse of entropy_encode for a known symbol count."""
    if len(data) < 4:
        raise CorruptionError("entropy payload shorter than its header")
    (stored,) = struct.unpack_from("<I", data)
    if stored != count:
        raise CorruptionError(
            f"symbol count mismatch: payload has {stored}, expected {count}"
        )
    out = np.empty(count, np.int64)
    if count:
        _rc_decode(np.frombuffer(data, np.uint8, offset=4), out)
    return out
