"""N-party binary-input, binary-output boxes.

A box is stored as a dense ``(2**N, 2**N)`` array ``table[x, a] = P(a | x)``
where ``x`` and ``a`` are bit strings read with party 1 as the leftmost
(most significant) bit.  Parties are numbered from 1 throughout the package.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Mapping, Sequence, Union

import numpy as np

TOL = 1e-9
MAX_PARTIES = 10

Bits = Union[str, Sequence[int], int]


class BoxError(ValueError):
    """A table or argument that does not describe a valid box."""


class SignalingError(ValueError):
    """Raised when an operation needs a no-signaling box and gets one that signals."""


def check_bias(e: float) -> float:
    """Validate an isotropy parameter and return it as a float."""
    e = float(e)
    if not 0.0 <= e <= 1.0:  # also rejects NaN
        raise BoxError(f"bias must lie in [0, 1], got {e!r}")
    return e


def check_n_parties(n: int) -> int:
    if isinstance(n, bool) or int(n) != n:
        raise BoxError(f"n_parties must be an integer, got {n!r}")
    n = int(n)
    if n < 2:
        raise BoxError(f"need at least 2 parties, got {n}")
    if n > MAX_PARTIES:
        raise BoxError(f"dense tables are limited to {MAX_PARTIES} parties, got {n}")
    return n


def bits_to_index(bits: Bits, n: int) -> int:
    """Convert a bit string (``"011"``, ``(0, 1, 1)`` or an int) to a row/column index."""
    if isinstance(bits, (int, np.integer)) and not isinstance(bits, bool):
        idx = int(bits)
        if not 0 <= idx < 2**n:
            raise BoxError(f"index {idx} out of range for {n} parties")
        return idx
    if isinstance(bits, str):
        digits = list(bits)
    else:
        digits = [str(int(b)) for b in bits]
    if len(digits) != n:
        raise BoxError(f"expected {n} bits, got {len(digits)}: {bits!r}")
    if any(d not in "01" for d in digits):
        raise BoxError(f"not a bit string: {bits!r}")
    return int("".join(digits), 2)


def index_to_bits(idx: int, n: int) -> str:
    return format(idx, f"0{n}b")


def party_bit(idx: int, party: int, n: int) -> int:
    """Bit of ``party`` (1-based) in the string with index ``idx``."""
    return (idx >> (n - party)) & 1


@lru_cache(maxsize=None)
def pair_parity_table(n: int) -> np.ndarray:
    """``XOR_{i<j} x_i x_j`` for every input index, computed pair by pair."""
    out = np.zeros(2**n, dtype=np.int8)
    for idx in range(2**n):
        bits = [party_bit(idx, i, n) for i in range(1, n + 1)]
        acc = 0
        for i in range(n):
            for j in range(i + 1, n):
                acc ^= bits[i] & bits[j]
        out[idx] = acc
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def parity_table(n: int) -> np.ndarray:
    """Parity of every n-bit string, indexed like the table columns."""
    out = np.array([bin(i).count("1") & 1 for i in range(2**n)], dtype=np.int8)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class ConditionalBox:
    """Immutable conditional probability table ``P(outputs | inputs)``.

    ``strategy`` marks deterministic strategy atoms, which are allowed to
    signal and are not meant to be physical boxes.
    """

    n_parties: int
    table: np.ndarray
    strategy: bool = False

    def __post_init__(self) -> None:
        n = check_n_parties(self.n_parties)
        object.__setattr__(self, "n_parties", n)
        try:
            table = np.array(self.table, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise BoxError(f"table is not numeric: {exc}") from None
        if table.shape != (2**n, 2**n):
            raise BoxError(f"table must have shape {(2**n, 2**n)}, got {table.shape}")
        if not np.all(np.isfinite(table)):
            raise BoxError("table contains non-finite entries")
        if table.min() < -TOL or table.max() > 1 + TOL:
            raise BoxError("table entries must lie in [0, 1]")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    def row(self, inputs: Bits) -> np.ndarray:
        return self.table[bits_to_index(inputs, self.n_parties)]

    def prob(self, outputs: Bits, inputs: Bits) -> float:
        n = self.n_parties
        return float(self.table[bits_to_index(inputs, n), bits_to_index(outputs, n)])

    def tensor(self) -> np.ndarray:
        """View of the table with one axis per party: inputs first, then outputs."""
        return self.table.reshape((2,) * (2 * self.n_parties))

    def allclose(self, other: "ConditionalBox", atol: float = TOL) -> bool:
        return self.n_parties == other.n_parties and bool(
            np.allclose(self.table, other.table, rtol=0.0, atol=atol)
        )


@dataclass(frozen=True)
class NoSignalingReport:
    normalized: bool
    no_signaling: bool
    max_marginal_discrepancy: float
    max_normalization_error: float

    @property
    def ok(self) -> bool:
        return self.normalized and self.no_signaling

    def to_dict(self) -> dict:
        return {
            "normalized": self.normalized,
            "no_signaling": self.no_signaling,
            "max_marginal_discrepancy": self.max_marginal_discrepancy,
            "max_normalization_error": self.max_normalization_error,
        }


def make_isotropic(n_parties: int, e: float) -> ConditionalBox:
    """Isotropic Svetlichny box with ``P(parity(a) = XOR_{i<j} x_i x_j | x) = (1+e)/2``.

    Within each parity class the mass is spread uniformly, which keeps every
    proper marginal uniform.
    """
    n = check_n_parties(n_parties)
    e = check_bias(e)
    hit = (1 + e) / 2 / 2 ** (n - 1)
    miss = (1 - e) / 2 / 2 ** (n - 1)
    match = parity_table(n)[None, :] == pair_parity_table(n)[:, None]
    return ConditionalBox(n, np.where(match, hit, miss))


def make_bipartite_isotropic(e: float) -> ConditionalBox:
    """Bipartite box with ``P(a XOR b = xy) = (1+e)/2``; ``e = 1`` is the PR box."""
    return make_isotropic(2, e)


def make_uniform(n_parties: int) -> ConditionalBox:
    return make_isotropic(n_parties, 0.0)


def make_deterministic(n_parties: int, output_strategy: Mapping[str, Bits]) -> ConditionalBox:
    """Deterministic strategy atom: all mass on ``output_strategy[x]`` for each input ``x``."""
    n = check_n_parties(n_parties)
    table = np.zeros((2**n, 2**n))
    seen = set()
    for x, a in output_strategy.items():
        xi = bits_to_index(x, n)
        if xi in seen:
            raise BoxError(f"input {index_to_bits(xi, n)} given twice")
        seen.add(xi)
        table[xi, bits_to_index(a, n)] = 1.0
    missing = [index_to_bits(i, n) for i in range(2**n) if i not in seen]
    if missing:
        raise BoxError(f"strategy undefined for inputs {missing}")
    return ConditionalBox(n, table, strategy=True)


def mix(boxes: Sequence[ConditionalBox], weights: Sequence[float]) -> ConditionalBox:
    """Convex combination of boxes with the same party count."""
    if len(boxes) != len(weights) or not boxes:
        raise BoxError("need one weight per box")
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0) or abs(w.sum() - 1) > TOL:
        raise BoxError("weights must be non-negative and sum to 1")
    n = boxes[0].n_parties
    if any(b.n_parties != n for b in boxes):
        raise BoxError("all boxes must have the same number of parties")
    table = np.tensordot(w, np.stack([b.table for b in boxes]), axes=1)
    return ConditionalBox(n, table)


def signaling_discrepancy(box: ConditionalBox, party: int) -> float:
    """Largest change in the other parties' joint marginal when ``party`` flips its input."""
    n = box.n_parties
    t = box.tensor()
    # sum out the party's own output, then compare its two input slices
    others = np.sum(t, axis=n + party - 1)
    diff = np.take(others, 1, axis=party - 1) - np.take(others, 0, axis=party - 1)
    return float(np.max(np.abs(diff)))


def verify_no_signaling(box: ConditionalBox, tol: float = TOL) -> NoSignalingReport:
    norm_err = float(np.max(np.abs(box.table.sum(axis=1) - 1.0)))
    disc = max(signaling_discrepancy(box, i) for i in range(1, box.n_parties + 1))
    return NoSignalingReport(
        normalized=norm_err <= tol,
        no_signaling=disc <= tol,
        max_marginal_discrepancy=disc,
        max_normalization_error=norm_err,
    )


def require_no_signaling(box: ConditionalBox, tol: float = TOL) -> None:
    report = verify_no_signaling(box, tol)
    if not report.ok:
        raise SignalingError(
            "box is not a normalized no-signaling box "
            f"(marginal discrepancy {report.max_marginal_discrepancy:.3g}, "
            f"normalization error {report.max_normalization_error:.3g})"
        )


def marginal(box: ConditionalBox, parties: Sequence[int], inputs: Bits) -> np.ndarray:
    """Exact marginal over ``parties`` (1-based) for one input string.

    Entries follow lexicographic order of the subset's output bits, lowest
    party number leftmost.
    """
    n = box.n_parties
    subset = sorted(set(int(p) for p in parties))
    if not subset:
        raise BoxError("marginal needs at least one party")
    if subset[0] < 1 or subset[-1] > n:
        raise BoxError(f"parties must be in 1..{n}, got {subset}")
    row = box.row(inputs).reshape((2,) * n)
    drop = tuple(i - 1 for i in range(1, n + 1) if i not in subset)
    return np.sum(row, axis=drop).reshape(-1) if drop else row.reshape(-1).copy()


def sample(box: ConditionalBox, inputs: Bits, seed: int) -> str:
    """Draw one output string for ``inputs``; reproducible for a given seed."""
    rng = np.random.default_rng(seed)
    row = box.row(inputs)
    idx = rng.choice(row.size, p=row / row.sum())
    return index_to_bits(int(idx), box.n_parties)


def sample_counts(box: ConditionalBox, inputs: Bits, shots: int, seed: int) -> np.ndarray:
    """Histogram of ``shots`` independent draws, indexed like the table columns."""
    if shots < 0:
        raise BoxError("shots must be non-negative")
    rng = np.random.default_rng(seed)
    row = box.row(inputs)
    draws = rng.choice(row.size, size=shots, p=row / row.sum())
    return np.bincount(draws, minlength=row.size)


# -- serialization ------------------------------------------------------------


def box_to_dict(box: ConditionalBox) -> dict:
    n = box.n_parties
    return {
        "n_parties": n,
        "table": {index_to_bits(i, n): [float(p) for p in box.table[i]] for i in range(2**n)},
    }


def box_from_dict(data: Mapping) -> ConditionalBox:
    try:
        n = check_n_parties(data["n_parties"])
        rows = data["table"]
    except (KeyError, TypeError) as exc:
        raise BoxError(f"box document needs 'n_parties' and 'table': {exc}") from None
    if not isinstance(rows, Mapping):
        raise BoxError("'table' must map input bit strings to probability arrays")
    table = np.full((2**n, 2**n), np.nan)
    for key, values in rows.items():
        idx = bits_to_index(str(key), n)
        if not isinstance(values, (list, tuple)) or len(values) != 2**n:
            raise BoxError(f"row {key!r} must hold {2**n} probabilities")
        table[idx] = values
    if np.isnan(table).any():
        raise BoxError("table is missing rows for some input strings")
    return ConditionalBox(n, table)


def dump_box(box: ConditionalBox, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(box_to_dict(box), indent=2) + "\n")


def load_box(path: Union[str, Path]) -> ConditionalBox:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise BoxError(f"{path}: not valid JSON ({exc})") from None
    return box_from_dict(data)
