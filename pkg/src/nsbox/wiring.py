"""Merge blocks of parties into effective single parties.

Parties ``1..k`` become one party with output
``A = XOR_{i<=k} a_i  XOR  XOR_{i<j<=k} x_i x_j`` and parties ``k+1..N``
another with the analogous ``B``.  Because
``XOR_{i<j} x_i x_j`` splits over GF(2) into the two in-block pair sums
plus ``(XOR left)(XOR right)``, an isotropic box of bias ``e`` turns into a
bipartite box winning ``A XOR B = (XOR left)(XOR right)`` with the same
probability ``(1+e)/2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .boxcore import (
    TOL,
    BoxError,
    ConditionalBox,
    SignalingError,
    check_bias,
    index_to_bits,
    make_bipartite_isotropic,
    make_isotropic,
    pair_parity_table,
    parity_table,
)


@dataclass(frozen=True)
class GroupSplit:
    n_parties: int
    k: int

    def __post_init__(self) -> None:
        if not 1 <= self.k < self.n_parties:
            raise BoxError(f"split k must satisfy 1 <= k < {self.n_parties}, got {self.k}")

    @property
    def left(self) -> range:
        return range(1, self.k + 1)

    @property
    def right(self) -> range:
        return range(self.k + 1, self.n_parties + 1)


@dataclass(frozen=True, eq=False)
class MergedBipartiteBox:
    """``table[xl, xr, A, B]`` with ``xl`` the left block's inputs (k bits)
    and ``xr`` the right block's (N-k bits)."""

    split: GroupSplit
    table: np.ndarray

    def __post_init__(self) -> None:
        k, n = self.split.k, self.split.n_parties
        table = np.array(self.table, dtype=np.float64)
        if table.shape != (2**k, 2 ** (n - k), 2, 2):
            raise BoxError(f"merged table has shape {table.shape}")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @property
    def left_input_bits(self) -> int:
        return self.split.k

    @property
    def right_input_bits(self) -> int:
        return self.split.n_parties - self.split.k

    def cut_discrepancy(self) -> float:
        """Largest dependence of one side's marginal on the other side's inputs."""
        pa = self.table.sum(axis=3)  # [xl, xr, A]
        pb = self.table.sum(axis=2)  # [xl, xr, B]
        da = np.max(np.abs(pa - pa[:, :1, :]))
        db = np.max(np.abs(pb - pb[:1, :, :]))
        return float(max(da, db))

    def success(self) -> np.ndarray:
        """``P(A XOR B = (XOR xl)(XOR xr))`` for every ``(xl, xr)``."""
        k, n = self.split.k, self.split.n_parties
        target = parity_table(k)[:, None] & parity_table(n - k)[None, :]
        p_even = self.table[:, :, 0, 0] + self.table[:, :, 1, 1]
        return np.where(target == 0, p_even, 1 - p_even)

    def to_dict(self) -> dict:
        k, n = self.split.k, self.split.n_parties
        rows = {}
        for xl in range(2**k):
            for xr in range(2 ** (n - k)):
                key = index_to_bits(xl, k) + index_to_bits(xr, n - k)
                rows[key] = [float(p) for p in self.table[xl, xr].reshape(-1)]
        return {"n_parties": n, "split": k, "table": rows}

    @classmethod
    def from_dict(cls, data: Mapping) -> "MergedBipartiteBox":
        try:
            split = GroupSplit(int(data["n_parties"]), int(data["split"]))
            rows = data["table"]
        except (KeyError, TypeError, ValueError) as exc:
            raise BoxError(f"merged box document is malformed: {exc}") from None
        k, n = split.k, split.n_parties
        table = np.full((2**k, 2 ** (n - k), 2, 2), np.nan)
        for key, values in rows.items():
            if len(key) != n or any(c not in "01" for c in key) or len(values) != 4:
                raise BoxError(f"bad merged row {key!r}")
            table[int(key[:k], 2), int(key[k:], 2)] = np.reshape(values, (2, 2))
        if np.isnan(table).any():
            raise BoxError("merged table is missing rows")
        return cls(split, table)


def cut_signaling_discrepancy(box: ConditionalBox, split: GroupSplit) -> float:
    """How much either block's joint output marginal depends on the other block's inputs."""
    n, k = box.n_parties, split.k
    t = box.table.reshape(2**k, 2 ** (n - k), 2**k, 2 ** (n - k))
    left = t.sum(axis=3)  # [xl, xr, al]
    right = t.sum(axis=2)  # [xl, xr, ar]
    dl = np.max(np.abs(left - left[:, :1, :]))
    dr = np.max(np.abs(right - right[:1, :, :]))
    return float(max(dl, dr))


def merge_parties(box: ConditionalBox, split: GroupSplit, tol: float = TOL) -> MergedBipartiteBox:
    """Push the box forward through the two block maps ``A`` and ``B``.

    Boxes that signal across the cut are refused; signaling inside a block
    is allowed since each block acts as one party.
    """
    n, k = box.n_parties, split.k
    if split.n_parties != n:
        raise BoxError(f"split is for {split.n_parties} parties, box has {n}")
    disc = cut_signaling_discrepancy(box, split)
    if disc > tol:
        raise SignalingError(f"box signals across the cut after party {k} (discrepancy {disc:.3g})")
    nr = n - k
    t = box.table.reshape(2**k, 2**nr, 2**k, 2**nr)
    a_par = parity_table(k)  # parity of left outputs
    b_par = parity_table(nr)
    l_pairs = pair_parity_table(k)
    r_pairs = pair_parity_table(nr)
    out = np.zeros((2**k, 2**nr, 2, 2))
    for xl in range(2**k):
        for xr in range(2**nr):
            a_bit = a_par ^ l_pairs[xl]
            b_bit = b_par ^ r_pairs[xr]
            block = t[xl, xr]
            for a in (0, 1):
                for b in (0, 1):
                    out[xl, xr, a, b] = block[np.ix_(a_bit == a, b_bit == b)].sum()
    return MergedBipartiteBox(split, out)


def restrict_inputs(
    merged: MergedBipartiteBox, left_live: int | None = None, right_live: int | None = None
) -> ConditionalBox:
    """Keep one live input party per side and pin the others to 0.

    ``left_live`` is a party in ``1..k`` (default ``1``), ``right_live`` a
    party in ``k+1..N`` (default ``N``).
    """
    k, n = merged.split.k, merged.split.n_parties
    left_live = 1 if left_live is None else left_live
    right_live = n if right_live is None else right_live
    if not 1 <= left_live <= k:
        raise BoxError(f"left live party must be in 1..{k}, got {left_live}")
    if not k < right_live <= n:
        raise BoxError(f"right live party must be in {k + 1}..{n}, got {right_live}")
    table = np.zeros((4, 4))
    for x in (0, 1):
        for y in (0, 1):
            xl = x << (k - left_live)
            xr = y << (n - right_live)
            table[2 * x + y] = merged.table[xl, xr].reshape(-1)
    return ConditionalBox(2, table)


def embeddings(split: GroupSplit):
    for left in split.left:
        for right in split.right:
            yield left, right


def verify_simulation(box: ConditionalBox, split: GroupSplit, e: float, tol: float = TOL) -> bool:
    """True iff merging and restricting ``box`` gives the bipartite isotropic box of bias ``e``
    for every choice of live inputs."""
    try:
        target = make_bipartite_isotropic(check_bias(e))
        merged = merge_parties(box, split, tol)
    except (BoxError, SignalingError):
        return False
    return all(
        restrict_inputs(merged, left, right).allclose(target, tol) for left, right in embeddings(split)
    )


def verify_isotropic_simulation(n_parties: int, k: int, e: float, tol: float = TOL) -> bool:
    return verify_simulation(make_isotropic(n_parties, e), GroupSplit(n_parties, k), e, tol)
