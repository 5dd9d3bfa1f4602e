"""Svetlichny functionals in correlator and probability form.

The probability form averages ``P(parity(a) = XOR_{i<j} x_i x_j | x)`` over
all ``2**N`` settings; hybrid models reach at most 3/4.  The correlator form
``S_N = |sum_x v(x) E(x)|`` is bounded by ``2**(N-1)`` for the same models,
and the two are tied by ``S_N = |2**(N+1) avg - 2**N|``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from .boxcore import (
    TOL,
    Bits,
    BoxError,
    ConditionalBox,
    index_to_bits,
    make_deterministic,
    pair_parity_table,
    parity_table,
)

HYBRID_BOUND = 0.75
QUANTUM_BOUND = (1 + math.sqrt(2) / 2) / 2
ALGEBRAIC_BOUND = 1.0


def _as_bit_list(inputs: Bits) -> List[int]:
    if isinstance(inputs, str):
        if any(c not in "01" for c in inputs):
            raise BoxError(f"not a bit string: {inputs!r}")
        return [int(c) for c in inputs]
    return [int(b) for b in inputs]


def sign_v(inputs: Bits) -> int:
    """``(-1)**floor(k(k-1)/2)`` where ``k`` counts the ones in ``inputs``."""
    k = sum(_as_bit_list(inputs))
    return -1 if (k * (k - 1) // 2) % 2 else 1


def sign_v_parity(inputs: Bits) -> int:
    """``(-1)**(XOR_{i<j} x_i x_j)``; equal to :func:`sign_v` on every input."""
    bits = _as_bit_list(inputs)
    acc = 0
    for i, j in itertools.combinations(range(len(bits)), 2):
        acc ^= bits[i] & bits[j]
    return -1 if acc else 1


@dataclass(frozen=True)
class SignedSetting:
    inputs: str
    sign: int

    @classmethod
    def of(cls, inputs: Bits) -> "SignedSetting":
        bits = "".join(str(b) for b in _as_bit_list(inputs))
        return cls(bits, sign_v(bits))


def signed_settings(n_parties: int) -> List[SignedSetting]:
    return [SignedSetting.of(index_to_bits(i, n_parties)) for i in range(2**n_parties)]


def correlator(box: ConditionalBox, inputs: Bits) -> float:
    """``E(A_1...A_N | x)`` with ``A_i = (-1)**a_i``."""
    row = box.row(inputs)
    signs = 1 - 2 * parity_table(box.n_parties).astype(np.float64)
    return float(row @ signs)


def success_per_setting(box: ConditionalBox) -> np.ndarray:
    """``P(parity(a) = XOR_{i<j} x_i x_j | x)`` for every input index ``x``."""
    n = box.n_parties
    match = parity_table(n)[None, :] == pair_parity_table(n)[:, None]
    return np.sum(box.table * match, axis=1)


def svetlichny_probability(box: ConditionalBox) -> float:
    return float(np.mean(success_per_setting(box)))


def svetlichny_correlator(box: ConditionalBox) -> float:
    n = box.n_parties
    total = 0.0
    for idx in range(2**n):
        total += sign_v(index_to_bits(idx, n)) * correlator(box, idx)
    return abs(total)


@dataclass(frozen=True)
class SvetlichnyReport:
    n_parties: int
    avg_probability: float
    correlator_value: float
    violates_hybrid_bound: bool
    exceeds_quantum: bool
    at_algebraic_max: bool

    def to_dict(self) -> dict:
        return {
            "n_parties": self.n_parties,
            "avg_probability": self.avg_probability,
            "correlator_value": self.correlator_value,
            "hybrid_bound": 2.0 ** (self.n_parties - 1),
            "violates_hybrid_bound": self.violates_hybrid_bound,
            "exceeds_quantum": self.exceeds_quantum,
            "at_algebraic_max": self.at_algebraic_max,
        }


def evaluate(box: ConditionalBox, tol: float = TOL) -> SvetlichnyReport:
    n = box.n_parties
    avg = svetlichny_probability(box)
    s = svetlichny_correlator(box)
    expected = abs(2 ** (n + 1) * avg - 2**n)
    if abs(s - expected) > tol:
        raise ArithmeticError(
            f"correlator form {s!r} disagrees with probability form {expected!r}"
        )
    return SvetlichnyReport(
        n_parties=n,
        avg_probability=avg,
        correlator_value=s,
        violates_hybrid_bound=avg > HYBRID_BOUND,
        exceeds_quantum=avg > QUANTUM_BOUND,
        at_algebraic_max=abs(avg - ALGEBRAIC_BOUND) <= tol,
    )


# -- hybrid-local oracle -------------------------------------------------------


@dataclass(frozen=True)
class HybridOptimum:
    """Best hybrid strategy found by exhaustive search.

    ``strategy`` maps every input string to the output string of the witness.
    """

    n_parties: int
    value: float
    settings_won: int
    groups: Tuple[Tuple[int, ...], Tuple[int, ...]]
    strategy: Dict[str, str] = field(repr=False)
    strategies_checked: int = 0

    def witness_box(self) -> ConditionalBox:
        return make_deterministic(self.n_parties, self.strategy)


def bipartitions(n: int) -> List[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """Unordered splits of parties 1..n into two non-empty groups (party 1 on the left)."""
    parties = range(1, n + 1)
    out = []
    for size in range(1, n):
        for rest in itertools.combinations(range(2, n + 1), size - 1):
            left = (1,) + rest
            right = tuple(p for p in parties if p not in left)
            if right:
                out.append((left, right))
    return out


def _sub_index(n: int, group: Tuple[int, ...]) -> np.ndarray:
    """For every full input index, the index of the group's own input bits."""
    out = np.zeros(2**n, dtype=np.int64)
    for idx in range(2**n):
        sub = 0
        for p in group:
            sub = (sub << 1) | ((idx >> (n - p)) & 1)
        out[idx] = sub
    return out


def _group_functions(g: int, parity_only: bool) -> np.ndarray:
    """Every deterministic map from a group's ``2**g`` inputs to its outputs.

    Rows are functions, columns group inputs, entries output indices.  With
    ``parity_only`` the output alphabet is cut down to one representative
    per parity (``0`` and ``2**(g-1)``), which leaves the score unchanged.
    """
    alphabet = [0, 1 << (g - 1)] if parity_only else list(range(2**g))
    return np.array(list(itertools.product(alphabet, repeat=2**g)), dtype=np.int64)


def hybrid_local_optimum(n_parties: int, parity_only: bool | None = None) -> HybridOptimum:
    """Maximize the Svetlichny average over all deterministic hybrid strategies.

    For each bipartition both groups answer with arbitrary deterministic
    functions of their own inputs; mixtures cannot beat the best such pair.
    Full enumeration runs for N in {2, 3}; N = 4 enumerates one output per
    parity class since only the parity of each group's output enters.
    Ties keep the first strategy in enumeration order.
    """
    if n_parties not in (2, 3, 4):
        raise BoxError(f"hybrid oracle supports 2 to 4 parties, got {n_parties}")
    n = n_parties
    if parity_only is None:
        parity_only = n == 4
    target = pair_parity_table(n).astype(np.int64)
    best: tuple | None = None
    checked = 0
    for left, right in bipartitions(n):
        f_left = _group_functions(len(left), parity_only)
        f_right = _group_functions(len(right), parity_only)
        lsub, rsub = _sub_index(n, left), _sub_index(n, right)
        pl = np.asarray(parity_table(len(left)))[f_left][:, lsub]
        pr = np.asarray(parity_table(len(right)))[f_right][:, rsub]
        wins = ((pl[:, None, :] ^ pr[None, :, :]) == target).sum(axis=2)
        checked += wins.size
        i, j = np.unravel_index(int(np.argmax(wins)), wins.shape)
        score = int(wins[i, j])
        if best is None or score > best[0]:
            best = (score, left, right, f_left[i], f_right[j])
    assert best is not None
    score, left, right, fl, fr = best
    strategy = {}
    for idx in range(2**n):
        lo = index_to_bits(int(fl[_sub_index(n, left)[idx]]), len(left))
        ro = index_to_bits(int(fr[_sub_index(n, right)[idx]]), len(right))
        out = [""] * n
        for p, b in zip(left, lo):
            out[p - 1] = b
        for p, b in zip(right, ro):
            out[p - 1] = b
        strategy[index_to_bits(idx, n)] = "".join(out)
    return HybridOptimum(
        n_parties=n,
        value=score / 2**n,
        settings_won=score,
        groups=(left, right),
        strategy=strategy,
        strategies_checked=checked,
    )


def hybrid_local_bound(n_parties: int) -> float:
    return hybrid_local_optimum(n_parties).value
