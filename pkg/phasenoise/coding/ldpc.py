"""
LDPC Codes
Parity-check matrices, alist interchange, GF(2) encoding, flooding
sum-product decoding and seeded construction of regular desk-scale codes.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import galois
import numpy as np
from loguru import logger

from phasenoise.errors import AlistParseError, ConfigError, FrameLayoutError

LLR_CLAMP = 50.0
_TANH_LIMIT = 0.9999999999999
GF2 = galois.GF(2)


# ====================
# PARITY-CHECK MATRIX
# ====================

@dataclass
class ParityCheckMatrix:
    """
    Sparse binary parity-check matrix

    Attributes:
        n_cols: Code length n
        n_rows: Number of checks m
        row_adjacency: Column indices (0-based, sorted) of each check
        name: Label used in logs and metadata
    """
    n_cols: int
    n_rows: int
    row_adjacency: List[np.ndarray]
    name: str = 'ldpc'
    col_adjacency: List[np.ndarray] = field(init=False, repr=False)
    edge_rows: np.ndarray = field(init=False, repr=False)
    edge_cols: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if len(self.row_adjacency) != self.n_rows:
            raise FrameLayoutError(f"Expected {self.n_rows} rows, got {len(self.row_adjacency)}")
        self.row_adjacency = [np.unique(np.asarray(row, dtype=np.int64)) for row in self.row_adjacency]
        self.edge_rows = np.concatenate(
            [np.full(row.size, i, dtype=np.int64) for i, row in enumerate(self.row_adjacency)]
        ) if self.n_rows else np.zeros(0, dtype=np.int64)
        self.edge_cols = np.concatenate(self.row_adjacency) if self.n_rows else np.zeros(0, dtype=np.int64)
        if self.edge_cols.size and (self.edge_cols.min() < 0 or self.edge_cols.max() >= self.n_cols):
            raise FrameLayoutError("Column index out of range in parity-check matrix")
        order = np.argsort(self.edge_cols, kind='mergesort')
        split = np.cumsum(np.bincount(self.edge_cols, minlength=self.n_cols))[:-1]
        self.col_adjacency = np.split(self.edge_rows[order], split)

    @classmethod
    def from_dense(cls, matrix: np.ndarray, name: str = 'ldpc') -> 'ParityCheckMatrix':
        matrix = np.asarray(matrix) % 2
        return cls(matrix.shape[1], matrix.shape[0], [np.flatnonzero(row) for row in matrix], name)

    @property
    def n(self) -> int:
        return self.n_cols

    @property
    def m(self) -> int:
        return self.n_rows

    @property
    def row_weights(self) -> np.ndarray:
        return np.array([row.size for row in self.row_adjacency], dtype=np.int64)

    @property
    def col_weights(self) -> np.ndarray:
        return np.array([col.size for col in self.col_adjacency], dtype=np.int64)

    def dense(self) -> np.ndarray:
        matrix = np.zeros((self.n_rows, self.n_cols), dtype=np.uint8)
        matrix[self.edge_rows, self.edge_cols] = 1
        return matrix

    def rank(self) -> int:
        return int(np.linalg.matrix_rank(GF2(self.dense())))

    @property
    def k(self) -> int:
        """Code dimension n - rank(H)"""
        return self.n_cols - self.rank()

    def syndrome(self, bits: np.ndarray) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.int64)
        return np.bincount(self.edge_rows, weights=bits[self.edge_cols], minlength=self.n_rows).astype(np.int64) % 2

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ParityCheckMatrix):
            return NotImplemented
        return (self.n_cols, self.n_rows) == (other.n_cols, other.n_rows) and all(
            np.array_equal(a, b) for a, b in zip(self.row_adjacency, other.row_adjacency)
        )


# ====================
# ALIST
# ====================

def _int_tokens(line: str, line_number: int) -> List[int]:
    try:
        return [int(token) for token in line.split()]
    except ValueError:
        raise AlistParseError(f"non-integer token in '{line.strip()}'", line_number) from None


def parse_alist(text: str, name: str = 'ldpc') -> ParityCheckMatrix:
    """
    Parse alist text into a parity-check matrix

    Grammar: "N M", "max_col max_row", N column weights, M row weights, then one
    line per column and one line per row of 1-indexed neighbours. Zero entries
    are padding. Blank lines are skipped; reported line numbers are 1-indexed
    positions in the original text.

    Raises:
        AlistParseError: On truncation, out-of-range indices or degree mismatches
    """
    lines = [(number, line) for number, line in enumerate(text.splitlines(), start=1) if line.strip()]
    cursor = 0
    last_line = len(text.splitlines())

    def take(expected: str) -> Tuple[int, List[int]]:
        nonlocal cursor
        if cursor >= len(lines):
            raise AlistParseError(f"unexpected end of file, expected {expected}", last_line + 1)
        number, line = lines[cursor]
        cursor += 1
        return number, _int_tokens(line, number)

    number, header = take("'N M'")
    if len(header) != 2 or min(header) <= 0:
        raise AlistParseError("header must hold two positive integers N M", number)
    n_cols, n_rows = header

    number, max_degrees = take("maximum degrees")
    if len(max_degrees) != 2 or min(max_degrees) < 0:
        raise AlistParseError("second line must hold the two maximum degrees", number)
    max_col, max_row = max_degrees

    number, col_weights = take("column weights")
    if len(col_weights) != n_cols:
        raise AlistParseError(f"expected {n_cols} column weights, got {len(col_weights)}", number)
    if max(col_weights) > max_col:
        raise AlistParseError(f"column weight exceeds declared maximum {max_col}", number)

    number, row_weights = take("row weights")
    if len(row_weights) != n_rows:
        raise AlistParseError(f"expected {n_rows} row weights, got {len(row_weights)}", number)
    if max(row_weights) > max_row:
        raise AlistParseError(f"row weight exceeds declared maximum {max_row}", number)

    def adjacency(count: int, weights: List[int], limit: int, bound: int, what: str) -> List[Tuple[int, List[int]]]:
        out = []
        for index in range(count):
            number, tokens = take(f"{what} {index + 1} adjacency")
            entries = [token for token in tokens if token != 0]
            if len(tokens) > limit:
                raise AlistParseError(f"{what} {index + 1} lists {len(tokens)} entries, maximum is {limit}", number)
            if len(entries) != weights[index]:
                raise AlistParseError(
                    f"{what} {index + 1} has {len(entries)} entries, declared weight {weights[index]}", number
                )
            if any(entry < 1 or entry > bound for entry in entries):
                raise AlistParseError(f"{what} {index + 1} index out of range 1..{bound}", number)
            if len(set(entries)) != len(entries):
                raise AlistParseError(f"{what} {index + 1} repeats an index", number)
            out.append((number, sorted(entry - 1 for entry in entries)))
        return out

    columns = adjacency(n_cols, col_weights, max_col, n_rows, 'column')
    rows = adjacency(n_rows, row_weights, max_row, n_cols, 'row')

    from_columns = [set() for _ in range(n_rows)]
    for col, (_, checks) in enumerate(columns):
        for row in checks:
            from_columns[row].add(col)
    for row, (number, cols) in enumerate(rows):
        if set(cols) != from_columns[row]:
            raise AlistParseError(f"row {row + 1} disagrees with the column adjacency", number)

    matrix = ParityCheckMatrix(n_cols, n_rows, [np.array(cols, dtype=np.int64) for _, cols in rows], name)
    rank = matrix.rank()
    if rank < n_rows:
        logger.info(f"Parity-check matrix '{name}' has rank {rank} < {n_rows} rows (redundant checks)")
    return matrix


def serialize_alist(matrix: ParityCheckMatrix) -> str:
    """Canonical alist text: single spaces, zero padding to the maximum degree"""
    col_weights = matrix.col_weights
    row_weights = matrix.row_weights
    max_col = int(col_weights.max(initial=0))
    max_row = int(row_weights.max(initial=0))

    def padded(entries: np.ndarray, width: int) -> str:
        values = [int(e) + 1 for e in entries] + [0] * (width - entries.size)
        return ' '.join(str(v) for v in values)

    lines = [
        f"{matrix.n_cols} {matrix.n_rows}",
        f"{max_col} {max_row}",
        ' '.join(str(int(w)) for w in col_weights),
        ' '.join(str(int(w)) for w in row_weights),
    ]
    lines += [padded(col, max_col) for col in matrix.col_adjacency]
    lines += [padded(row, max_row) for row in matrix.row_adjacency]
    return '\n'.join(lines) + '\n'


def load_alist(path: Union[str, Path]) -> ParityCheckMatrix:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"alist file not found: {path}")
    return parse_alist(path.read_text(), name=path.stem)


def save_alist(matrix: ParityCheckMatrix, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialize_alist(matrix))
    logger.info(f"Saved parity-check matrix '{matrix.name}' to {path}")
    return path


# ====================
# ENCODING
# ====================

class LdpcCode:
    """
    Linear code defined by a parity-check matrix

    The generator is the GF(2) null space of H in reduced row-echelon form, so
    the pivot columns carry the information bits unchanged.
    """

    def __init__(self, matrix: ParityCheckMatrix):
        self.matrix = matrix
        basis = GF2(matrix.dense()).null_space().row_reduce()
        self.generator = np.asarray(basis, dtype=np.uint8)
        if self.generator.shape[0] == 0:
            raise ConfigError(f"Code '{matrix.name}' has dimension 0")
        self.info_positions = np.argmax(self.generator != 0, axis=1)
        if np.any((self.generator.astype(np.int64) @ matrix.dense().T.astype(np.int64)) % 2):
            raise ConfigError(f"Generator of '{matrix.name}' is not orthogonal to H")
        logger.debug(f"Code '{matrix.name}': n={self.n}, k={self.k}, rate={self.rate:.3f}")

    @property
    def n(self) -> int:
        return self.matrix.n_cols

    @property
    def k(self) -> int:
        return self.generator.shape[0]

    @property
    def rate(self) -> float:
        return self.k / self.n

    def encode(self, info_bits: np.ndarray) -> np.ndarray:
        """Codeword u G mod 2 for k information bits"""
        info_bits = np.asarray(info_bits, dtype=np.int64).ravel()
        if info_bits.size != self.k:
            raise FrameLayoutError(f"Code '{self.matrix.name}' needs {self.k} information bits, got {info_bits.size}")
        return ((info_bits @ self.generator.astype(np.int64)) % 2).astype(np.uint8)

    def extract_info(self, codeword: np.ndarray) -> np.ndarray:
        return np.asarray(codeword, dtype=np.uint8)[self.info_positions]


# ====================
# DECODING
# ====================

@dataclass
class DecodeResult:
    """
    Output of the sum-product decoder

    Attributes:
        bits: Hard decisions (a zero posterior LLR decides 0)
        posterior_llrs: Channel plus check-node LLRs, clamped to +-50
        converged: All checks satisfied by unambiguous decisions
        iterations: Message-passing iterations run
    """
    bits: np.ndarray
    posterior_llrs: np.ndarray
    converged: bool
    iterations: int

    def extrinsic(self, channel_llrs: np.ndarray) -> np.ndarray:
        """Posterior minus channel LLRs, clamped"""
        return np.clip(self.posterior_llrs - np.asarray(channel_llrs, dtype=float), -LLR_CLAMP, LLR_CLAMP)


def _satisfied(matrix: ParityCheckMatrix, llrs: np.ndarray) -> Tuple[np.ndarray, bool]:
    """Hard decisions and whether they form a codeword; a zero LLR is an erasure"""
    bits = (llrs < 0).astype(np.uint8)
    if np.any(llrs == 0):
        return bits, False
    return bits, not np.any(matrix.syndrome(bits))


def _check_update(matrix: ParityCheckMatrix, v2c: np.ndarray) -> np.ndarray:
    """Tanh rule over every edge, excluding the edge's own incoming message"""
    t = np.clip(np.tanh(0.5 * v2c), -_TANH_LIMIT, _TANH_LIMIT)
    is_zero = t == 0
    magnitude = np.where(is_zero, 1.0, np.abs(t))
    log_mag = np.log(magnitude)
    negative = (t < 0).astype(np.int64)

    rows = matrix.edge_rows
    row_log = np.bincount(rows, weights=log_mag, minlength=matrix.n_rows)
    row_neg = np.bincount(rows, weights=negative, minlength=matrix.n_rows).astype(np.int64)
    row_zero = np.bincount(rows, weights=is_zero, minlength=matrix.n_rows).astype(np.int64)

    others_zero = row_zero[rows] - is_zero.astype(np.int64)
    sign = np.where((row_neg[rows] - negative) % 2 == 1, -1.0, 1.0)
    product = sign * np.exp(row_log[rows] - log_mag)
    product = np.where(others_zero > 0, 0.0, np.clip(product, -_TANH_LIMIT, _TANH_LIMIT))
    return np.clip(2.0 * np.arctanh(product), -LLR_CLAMP, LLR_CLAMP)


def bp_decode(llrs: np.ndarray, matrix: ParityCheckMatrix, max_iters: int = 50) -> DecodeResult:
    """
    Flooding sum-product decoding

    The input is checked first, so a valid codeword returns after zero
    iterations. Decoding stops as soon as the decisions satisfy every check.

    Args:
        llrs: Channel LLRs ln P(0)/P(1), length n
        matrix: Parity-check matrix
        max_iters: Iteration cap

    Returns:
        DecodeResult
    """
    llrs = np.clip(np.asarray(llrs, dtype=float).ravel(), -LLR_CLAMP, LLR_CLAMP)
    if llrs.size != matrix.n_cols:
        raise FrameLayoutError(f"Decoder expects {matrix.n_cols} LLRs, got {llrs.size}")

    bits, converged = _satisfied(matrix, llrs)
    if converged:
        return DecodeResult(bits, llrs.copy(), True, 0)

    cols = matrix.edge_cols
    v2c = llrs[cols].copy()
    posterior = llrs.copy()
    iteration = 0
    for iteration in range(1, max_iters + 1):
        c2v = _check_update(matrix, v2c)
        incoming = np.bincount(cols, weights=c2v, minlength=matrix.n_cols)
        posterior = np.clip(llrs + incoming, -LLR_CLAMP, LLR_CLAMP)
        v2c = np.clip(posterior[cols] - c2v, -LLR_CLAMP, LLR_CLAMP)
        bits, converged = _satisfied(matrix, posterior)
        if converged:
            break

    logger.debug(f"BP on '{matrix.name}': converged={converged} after {iteration} iteration(s)")
    return DecodeResult(bits, posterior, converged, iteration)


# ====================
# CODE CONSTRUCTION
# ====================

def generate_regular_code(
    n: int,
    col_weight: int,
    row_weight: int,
    seed: int,
    name: Optional[str] = None,
) -> ParityCheckMatrix:
    """
    Seeded greedy edge growth for a (col_weight, row_weight)-regular code

    Each variable node picks its checks one at a time among the least-loaded
    checks that would not close a 4-cycle; ties are broken by the seeded
    generator. If no such check remains the 4-cycle constraint is relaxed.

    Raises:
        ConfigError: If n * col_weight is not divisible by row_weight
    """
    if n <= 0 or col_weight <= 0 or row_weight <= col_weight:
        raise ConfigError(f"Invalid regular code parameters n={n}, dv={col_weight}, dc={row_weight}")
    if (n * col_weight) % row_weight:
        raise ConfigError(f"n * dv = {n * col_weight} is not divisible by dc = {row_weight}")
    m = n * col_weight // row_weight
    rng = np.random.default_rng(seed)
    degree = np.zeros(m, dtype=np.int64)
    check_vars: List[List[int]] = [[] for _ in range(m)]
    var_checks: List[List[int]] = [[] for _ in range(n)]
    relaxed = 0

    for var in range(n):
        for _ in range(col_weight):
            own = set(var_checks[var])
            blocked = set(own)
            for check in own:
                for other in check_vars[check]:
                    blocked.update(var_checks[other])
            open_mask = degree < row_weight
            candidates = open_mask.copy()
            candidates[list(blocked)] = False
            if not candidates.any():
                relaxed += 1
                candidates = open_mask.copy()
                candidates[list(own)] = False
            if not candidates.any():
                candidates = np.ones(m, dtype=bool)
                candidates[list(own)] = False
            allowed = np.flatnonzero(candidates)
            lightest = allowed[degree[allowed] == degree[allowed].min()]
            check = int(rng.choice(lightest))
            degree[check] += 1
            check_vars[check].append(var)
            var_checks[var].append(check)

    if relaxed:
        logger.debug(f"Code construction relaxed the 4-cycle constraint {relaxed} time(s)")
    label = name or f"regular-{col_weight}-{row_weight}-n{n}"
    logger.info(f"Generated {label}: n={n}, m={m}, seed={seed}")
    return ParityCheckMatrix(n, m, [np.array(sorted(v), dtype=np.int64) for v in check_vars], label)


# name -> (n, column weight, row weight, seed)
STANDARD_CODES: Dict[str, Tuple[int, int, int, int]] = {
    'regular-3-6-n2000': (2000, 3, 6, 20_001),
    'regular-3-15-n2000': (2000, 3, 15, 20_002),
}


def load_code(reference: str, codes_dir: Union[str, Path]) -> ParityCheckMatrix:
    """
    Resolve a code by file path or standard name

    Standard codes are generated on first use and cached as alist files under
    codes_dir, so later runs read the identical matrix.
    """
    path = Path(reference)
    if path.suffix == '.alist' and path.exists():
        return load_alist(path)
    cached = Path(codes_dir) / f"{reference}.alist"
    if cached.exists():
        return load_alist(cached)
    if reference in STANDARD_CODES:
        n, dv, dc, seed = STANDARD_CODES[reference]
        matrix = generate_regular_code(n, dv, dc, seed, name=reference)
        save_alist(matrix, cached)
        return matrix
    raise ConfigError(
        f"Unknown code '{reference}': not a file, not in {codes_dir}, not one of {sorted(STANDARD_CODES)}"
    )
