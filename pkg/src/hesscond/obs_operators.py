"""Sparse observation operators mapping state space to observation space.

Four canonical p-by-n patterns are provided for the n = 2p framework:

* ``first-half``       -- row i observes state variable i directly
* ``alternate``        -- row i observes every other state variable
* ``smoothed-alternate`` -- the alternate pattern spread equally (weight 1/5)
  over the five neighbouring state variables, with periodic wraparound
* ``random-direct``    -- p distinct state variables drawn without
  replacement from a seeded generator, sorted ascending

The canonical definitions are 1-based (row i observes column 2i for the
alternate pattern, etc.); this module stores 0-based indices, so the
alternate pattern selects columns ``2i + 1`` for rows ``i = 0..p-1`` and the
smoothed pattern is centred on those columns.

Operators serialize to a JSON description carrying the explicit column/weight
rows, so a run can be reproduced bit for bit regardless of generator version.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CANONICAL_KINDS = ("first-half", "alternate", "smoothed-alternate", "random-direct")
DIRECT_KINDS = ("first-half", "alternate", "random-direct")
KINDS = CANONICAL_KINDS + ("custom",)

Rows = tuple[tuple[tuple[int, float], ...], ...]


@dataclass
class ObservationOperator:
    """Sparse p-by-n linear map, stored as per-row (column, weight) pairs.

    Immutable after construction. Requires p < n, every row nonempty with
    in-range column indices, and kind-specific structure: direct kinds carry
    one unit weight per row with all rows selecting distinct columns, the
    smoothed kind carries exactly five weights of 1/5 per row.
    """

    kind: str
    p: int
    n: int
    rows: Rows
    seed: int | None = None
    _cols: np.ndarray = field(init=False, repr=False)
    _weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if not (0 < self.p < self.n):
            raise ValueError(
                f"need 0 < p < n (fewer observations than state variables), "
                f"got p={self.p}, n={self.n}"
            )
        rows = tuple(tuple((int(c), float(w)) for c, w in row) for row in self.rows)
        if len(rows) != self.p:
            raise ValueError(f"expected {self.p} rows, got {len(rows)}")
        for i, row in enumerate(rows):
            if not row:
                raise ValueError(f"row {i} is empty")
            for c, _ in row:
                if not 0 <= c < self.n:
                    raise ValueError(f"row {i} column {c} outside [0, {self.n})")
        if self.kind in DIRECT_KINDS:
            cols = [row[0][0] for row in rows]
            if any(len(row) != 1 or row[0][1] != 1.0 for row in rows):
                raise ValueError(f"{self.kind} rows must each hold one unit weight")
            if len(set(cols)) != self.p:
                raise ValueError(f"{self.kind} rows must select distinct columns")
        if self.kind == "smoothed-alternate":
            for i, row in enumerate(rows):
                if len(row) != 5 or any(w != 0.2 for _, w in row):
                    raise ValueError(
                        f"smoothed-alternate row {i} must hold five weights of 1/5"
                    )
        self.rows = rows
        # Padded rectangular views for vectorized apply; padding weight 0.
        width = max(len(row) for row in rows)
        cols = np.zeros((self.p, width), dtype=int)
        weights = np.zeros((self.p, width), dtype=float)
        for i, row in enumerate(rows):
            for j, (c, w) in enumerate(row):
                cols[i, j] = c
                weights[i, j] = w
        cols.setflags(write=False)
        weights.setflags(write=False)
        self._cols = cols
        self._weights = weights

    def to_dense(self) -> np.ndarray:
        """Dense p-by-n materialization."""
        h = np.zeros((self.p, self.n))
        for i, row in enumerate(self.rows):
            for c, w in row:
                h[i, c] += w
        return h

    def to_json_dict(self) -> dict:
        """Explicit JSON description (kind, dims, seed, rows)."""
        return {
            "kind": self.kind,
            "p": self.p,
            "n": self.n,
            "seed": self.seed,
            "rows": [[[c, w] for c, w in row] for row in self.rows],
        }


def operator_from_json(d: dict) -> ObservationOperator:
    """Rebuild an operator from its JSON description."""
    rows = tuple(tuple((int(c), float(w)) for c, w in row) for row in d["rows"])
    return ObservationOperator(
        kind=d["kind"], p=int(d["p"]), n=int(d["n"]), rows=rows, seed=d.get("seed")
    )


def make_operator(
    kind: str, p: int, n: int, seed: int | None = None
) -> ObservationOperator:
    """Construct one of the canonical observation operators.

    The canonical kinds require n = 2p. ``random-direct`` additionally needs
    a seed, and the same seed always reproduces the same operator.

    Parameters
    ----------
    kind:
        One of ``first-half``, ``alternate``, ``smoothed-alternate``,
        ``random-direct``.
    p, n:
        Observation count and state dimension.
    seed:
        Generator seed, required for (and only used by) ``random-direct``.
    """
    if kind not in CANONICAL_KINDS:
        raise ValueError(f"unknown canonical operator kind {kind!r}")
    if n != 2 * p:
        raise ValueError(f"canonical operators require n = 2p, got p={p}, n={n}")
    if kind == "first-half":
        rows = tuple(((i, 1.0),) for i in range(p))
    elif kind == "alternate":
        rows = tuple(((2 * i + 1, 1.0),) for i in range(p))
    elif kind == "smoothed-alternate":
        rows = tuple(
            tuple(sorted(((2 * i + 1 + o) % n, 0.2) for o in (-2, -1, 0, 1, 2)))
            for i in range(p)
        )
    else:  # random-direct
        if seed is None:
            raise ValueError("random-direct requires a seed")
        rng = np.random.default_rng(seed)
        cols = np.sort(rng.choice(n, size=p, replace=False))
        rows = tuple(((int(c), 1.0),) for c in cols)
    return ObservationOperator(kind=kind, p=p, n=n, rows=rows, seed=seed)


def apply(h: ObservationOperator, x: np.ndarray) -> np.ndarray:
    """Sparse product ``H @ x``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (h.n,):
        raise ValueError(f"state vector must have shape ({h.n},), got {x.shape}")
    return (h._weights * x[h._cols]).sum(axis=1)


def apply_transpose(h: ObservationOperator, y: np.ndarray) -> np.ndarray:
    """Sparse product ``H.T @ y``."""
    y = np.asarray(y, dtype=float)
    if y.shape != (h.p,):
        raise ValueError(f"observation vector must have shape ({h.p},), got {y.shape}")
    out = np.zeros(h.n)
    np.add.at(out, h._cols, h._weights * y[:, None])
    return out


def gram(h: ObservationOperator) -> np.ndarray:
    """Dense symmetric Gram matrix ``H @ H.T`` (identity for direct kinds)."""
    dense = h.to_dense()
    return dense @ dense.T
