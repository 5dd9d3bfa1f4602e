"""Information-causality games played with no-signaling boxes.

Two protocols are covered: the three-party guessing game in which Alice and
Bob send one bit ``m = a ^ b ^ xy ^ x`` and Carol guesses ``g = c ^ m``, and
the binary-tree concatenation of bipartite random access codes, where Alice
holds ``2**k`` bits, sends one bit, and Bob reads any addressed bit through
``k`` boxes.  Each protocol reports the exact information gain and the Fano
lower bound ``N - sum_k h(p_k)``; information causality demands at most
``n`` bits for ``n`` transmitted bits.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .boxcore import (
    TOL,
    BoxError,
    ConditionalBox,
    check_bias,
    make_bipartite_isotropic,
    make_isotropic,
    parity_table,
    require_no_signaling,
)
from .functionals import success_per_setting
from .wiring import GroupSplit, merge_parties, restrict_inputs

EXACT_RAC_MAX_DEPTH = 3


def binary_entropy(p: float) -> float:
    """Shannon entropy of a Bernoulli(p) variable in bits."""
    p = float(p)
    if not -1e-12 <= p <= 1 + 1e-12:
        raise ValueError(f"probability must lie in [0, 1], got {p!r}")
    p = min(max(p, 0.0), 1.0)
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def bias_information(x: float) -> float:
    """``1 - h((1+x)/2)`` for ``x`` in [-1, 1], accurate when ``x`` is tiny."""
    x = abs(float(x))
    if x >= 1.0:
        return 1.0
    return ((1 + x) * math.log1p(x) + (1 - x) * math.log1p(-x)) / (2 * math.log(2))


def mutual_information(joint: Sequence[Sequence[float]]) -> float:
    """``I(U:V)`` in bits from a joint table ``joint[u][v]``."""
    p = np.asarray(joint, dtype=np.float64)
    if p.ndim != 2:
        raise ValueError("joint distribution must be a 2-D table")
    if np.any(p < -TOL) or abs(p.sum() - 1.0) > TOL:
        raise ValueError(f"joint distribution is not normalized (sum {p.sum()!r})")
    p = np.clip(p, 0.0, None)
    pu = p.sum(axis=1, keepdims=True)
    pv = p.sum(axis=0, keepdims=True)
    mask = p > 0
    return float(np.sum(p[mask] * np.log2(p[mask] / (pu @ pv)[mask])))


@dataclass(frozen=True, eq=False)
class ICGameResult:
    n_database_bits: int
    n_message_bits: int
    success_probs: np.ndarray
    i_exact: float
    i_fano: float

    @property
    def violates_ic(self) -> bool:
        return max(self.i_exact, self.i_fano) > self.n_message_bits

    def to_dict(self) -> dict:
        probs = np.asarray(self.success_probs)
        return {
            "n_database_bits": self.n_database_bits,
            "n_message_bits": self.n_message_bits,
            # large uniform games keep one representative value
            "success_probs": [float(v) for v in probs] if probs.size <= 64 else None,
            "min_success": float(probs.min()),
            "i_exact": self.i_exact,
            "i_fano": self.i_fano,
            "violates_ic": self.violates_ic,
        }


def tripartite_guess_game(box: ConditionalBox, tol: float = TOL) -> ICGameResult:
    """Carol guesses ``x`` when ``z = 0`` and ``y`` when ``z = 1`` from one bit of Alice and Bob.

    ``x`` and ``y`` are independent uniform bits.
    """
    if box.n_parties != 3:
        raise BoxError(f"the guessing game needs a 3-party box, got {box.n_parties}")
    require_no_signaling(box, tol)
    par = parity_table(3)
    joints = [np.zeros((2, 2)), np.zeros((2, 2))]
    for x, y, z in itertools.product((0, 1), repeat=3):
        row = box.row((x, y, z))
        target = x if z == 0 else y
        for out in range(8):
            g = par[out] ^ (x & y) ^ x
            joints[z][target, g] += row[out] / 4
    probs = np.array([j[0, 0] + j[1, 1] for j in joints])
    return ICGameResult(
        n_database_bits=2,
        n_message_bits=1,
        success_probs=probs,
        i_exact=sum(mutual_information(j) for j in joints),
        i_fano=2 - sum(binary_entropy(p) for p in probs),
    )


@dataclass(frozen=True)
class RacLevel:
    depth: int
    bias: float
    per_bit_success: float
    i_fano: float

    @property
    def n_database_bits(self) -> int:
        return 2**self.depth

    @property
    def violates_ic(self) -> bool:
        return self.i_fano > 1


def _rac_fano(depth: int, p: float) -> float:
    return 2**depth * bias_information(2 * p - 1)


def concatenated_rac_exact(
    e: float, depth: int, box: Optional[ConditionalBox] = None
) -> RacLevel:
    """Run the tree protocol by summing over every joint outcome of all ``2**k - 1`` boxes.

    Boxes sit in heap order (root 1, children ``2n`` and ``2n+1``).  Alice
    feeds each leaf the XOR of its two data bits and each inner node the XOR
    of its children's messages, passing up ``left message ^ A``.  Bob feeds
    every box at level ``l`` his ``l``-th address bit and walks down from the
    root, XOR-ing in ``B`` at each box on his path.
    """
    e = check_bias(e)
    if not 1 <= depth <= EXACT_RAC_MAX_DEPTH:
        raise ValueError(f"exact enumeration supports depth 1..{EXACT_RAC_MAX_DEPTH}, got {depth}")
    if box is None:
        box = make_bipartite_isotropic(e)
    if box.n_parties != 2:
        raise BoxError("random access codes need bipartite boxes")
    require_no_signaling(box)
    table = box.table
    n_boxes = 2**depth - 1
    n_bits = 2**depth
    first_leaf = 2 ** (depth - 1)

    outcomes = np.array(list(itertools.product(range(4), repeat=n_boxes)), dtype=np.uint8)
    A = {node: (outcomes[:, node - 1] >> 1)[None, :] for node in range(1, n_boxes + 1)}
    B = {node: (outcomes[:, node - 1] & 1)[None, :] for node in range(1, n_boxes + 1)}
    dbs = np.arange(2**n_bits, dtype=np.int64)[:, None]
    data = [((dbs >> i) & 1).astype(np.uint8) for i in range(n_bits)]

    # Alice's side does not depend on the address
    msg, a_in = {}, {}
    for node in range(n_boxes, 0, -1):
        if node >= first_leaf:
            j = node - first_leaf
            d0, d1 = data[2 * j], data[2 * j + 1]
            a_in[node] = d0 ^ d1
            msg[node] = d0 ^ A[node]
        else:
            ml, mr = msg[2 * node], msg[2 * node + 1]
            a_in[node] = ml ^ mr
            msg[node] = ml ^ A[node]

    # Bob's input is shared by all boxes on one level, so the joint weight is a
    # product of per-level factors; each level's (a_in, A, B) bits are packed
    # into one code and looked up in a table of products
    level_weight = []
    for lvl in range(depth):
        nodes = range(2**lvl, 2 ** (lvl + 1))
        code = np.zeros((dbs.shape[0], outcomes.shape[0]), dtype=np.int32)
        for pos, node in enumerate(nodes):
            trip = (a_in[node] << 2) | (A[node] << 1) | B[node]
            code |= trip.astype(np.int32) << (3 * pos)
        per_bit = []
        for b_in in (0, 1):
            lut = np.ones(8 ** len(nodes))
            for c in range(lut.size):
                for pos in range(len(nodes)):
                    trip = (c >> (3 * pos)) & 7
                    lut[c] *= table[2 * (trip >> 2) + b_in, trip & 3]
            per_bit.append(lut[code])
        level_weight.append(per_bit)

    total = 0.0
    for addr in range(n_bits):
        addr_bits = [(addr >> (depth - 1 - lvl)) & 1 for lvl in range(depth)]
        weight = level_weight[0][addr_bits[0]]
        for lvl in range(1, depth):
            weight = weight * level_weight[lvl][addr_bits[lvl]]
        guess = msg[1]
        node = 1
        for lvl in range(depth):
            guess = guess ^ B[node]
            node = 2 * node + addr_bits[lvl]
        total += float(np.sum(weight * (guess == data[addr])))
    p = total / (n_bits * 2**n_bits)
    return RacLevel(depth=depth, bias=e, per_bit_success=p, i_fano=_rac_fano(depth, p))


def concatenated_rac_analytic(e: float, depth: int) -> RacLevel:
    """Closed form of the tree protocol: a bit is right iff an even number of path boxes err."""
    e = check_bias(e)
    if depth < 1:
        raise ValueError(f"depth must be at least 1, got {depth}")
    x = e**depth
    return RacLevel(
        depth=depth,
        bias=e,
        per_bit_success=(1 + x) / 2,
        i_fano=2**depth * bias_information(x),
    )


def ic_violation_scan(e: float, k_max: int) -> Optional[int]:
    """Smallest depth ``k <= k_max`` at which the Fano bound exceeds one bit, else ``None``."""
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    for k in range(1, k_max + 1):
        if concatenated_rac_analytic(e, k).violates_ic:
            return k
    return None


@dataclass(frozen=True)
class ScanRow:
    e: float
    k: Optional[int]
    per_bit_success: float
    i_fano: float

    @property
    def violates(self) -> bool:
        return self.k is not None


def scan_grid(grid: Iterable[float], k_max: int) -> List[ScanRow]:
    """One row per bias; ``p`` and ``i_fano`` at the violating depth, or at ``k_max`` if none."""
    rows = []
    for e in grid:
        k = ic_violation_scan(e, k_max)
        level = concatenated_rac_analytic(e, k if k is not None else k_max)
        rows.append(ScanRow(e=float(e), k=k, per_bit_success=level.per_bit_success, i_fano=level.i_fano))
    return rows


def effective_bias(box: ConditionalBox, tol: float = TOL) -> float:
    """Bias of a bipartite box whose CHSH-game success is the same for every setting."""
    if box.n_parties != 2:
        raise BoxError("effective bias is defined for bipartite boxes")
    succ = success_per_setting(box)
    if np.ptp(succ) > tol:
        raise BoxError("box success depends on the inputs; the tree law needs a uniform bias")
    e = 2 * float(succ.mean()) - 1
    if e < -tol:
        raise BoxError(f"box is anti-correlated (bias {e:.6g})")
    return min(max(e, 0.0), 1.0)


def multipartite_ic(
    box: ConditionalBox,
    split_k: Optional[int] = None,
    depth: int = 1,
    tol: float = TOL,
) -> ICGameResult:
    """Merge the box into a bipartite one and play the depth-``depth`` tree protocol with it."""
    split = GroupSplit(box.n_parties, box.n_parties - 1 if split_k is None else split_k)
    bipartite = restrict_inputs(merge_parties(box, split, tol))
    e = effective_bias(bipartite, tol)
    level = concatenated_rac_analytic(e, depth)
    n_bits = level.n_database_bits
    return ICGameResult(
        n_database_bits=n_bits,
        n_message_bits=1,
        success_probs=np.broadcast_to(level.per_bit_success, (n_bits,)),
        # every task is a uniform bit seen through the same binary symmetric channel
        i_exact=n_bits * bias_information(2 * level.per_bit_success - 1),
        i_fano=level.i_fano,
    )


def end_to_end_multipartite_ic(n_parties: int, e: float, split_k: int, depth: int) -> ICGameResult:
    return multipartite_ic(make_isotropic(n_parties, e), split_k, depth)
