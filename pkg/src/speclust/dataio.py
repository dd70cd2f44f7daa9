"""Dataset ingestion, synthetic generators, and the seeded RNG substrate.

The random-number stream is a hand-specified xorshift64* generator so that
every experiment is reproducible from its integer seed alone, independent of
platform or library version.  Parallel consumers never share a stream; they
derive child streams keyed by (seed, index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, ParseError
from .linalg import as_matrix

_MASK64 = (1 << 64) - 1
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15


def _splitmix64(z: int) -> int:
    """One splitmix64 output step; used for seeding and stream splitting."""
    z = (z + _SPLITMIX_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class RngStream:
    """Deterministic 64-bit xorshift* stream.

    State update (all mod 2^64):
        x ^= x >> 12;  x ^= x << 25;  x ^= x >> 27
    Output: (x * 2685821657736338717) >> 11, giving 53 uniform bits.
    The initial state is splitmix64(seed), forced nonzero.  Identical
    (algorithm, seed) pairs produce the identical sequence forever.
    """

    algorithm = "xorshift64star/splitmix64"

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._state = _splitmix64(self.seed & _MASK64)
        if self._state == 0:
            self._state = _SPLITMIX_GAMMA
        self._gauss_cache: float | None = None

    def next_uint64(self) -> int:
        x = self._state
        x ^= x >> 12
        x ^= (x << 25) & _MASK64
        x ^= x >> 27
        self._state = x
        return (x * 2685821657736338717) & _MASK64

    def uniform(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_uint64() >> 11) * (1.0 / (1 << 53))

    def gaussian(self) -> float:
        """Standard normal via the Marsaglia polar (rejection) transform."""
        if self._gauss_cache is not None:
            z = self._gauss_cache
            self._gauss_cache = None
            return z
        while True:
            u = 2.0 * self.uniform() - 1.0
            v = 2.0 * self.uniform() - 1.0
            s = u * u + v * v
            if 0.0 < s < 1.0:
                break
        factor = math.sqrt(-2.0 * math.log(s) / s)
        self._gauss_cache = v * factor
        return u * factor

    def integer(self, n: int) -> int:
        """Unbiased integer in [0, n) by rejection on the 64-bit stream."""
        if n <= 0:
            raise ParameterError(f"integer() needs n > 0, got {n}")
        bound = (_MASK64 + 1) - ((_MASK64 + 1) % n)
        while True:
            u = self.next_uint64()
            if u < bound:
                return u % n

    def sample_distinct(self, n: int, k: int) -> list[int]:
        """k distinct indices from range(n) via partial Fisher-Yates."""
        if k > n:
            raise ParameterError(f"cannot sample {k} distinct values from {n}")
        pool = list(range(n))
        for i in range(k):
            j = i + self.integer(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]

    def gaussian_matrix(self, rows: int, cols: int) -> np.ndarray:
        out = np.empty((rows, cols))
        flat = out.reshape(-1)
        for i in range(flat.size):
            flat[i] = self.gaussian()
        return out

    def child(self, index: int) -> "RngStream":
        """Independent stream derived from (seed, index); safe to hand to workers."""
        return RngStream(_splitmix64(self.seed ^ _splitmix64(index + 1)))


@dataclass
class Dataset:
    """Feature matrix with ground-truth class ids densified to 0..C-1."""

    points: np.ndarray
    labels: np.ndarray
    name: str
    nnz: int | None = field(default=None, compare=False)

    def __post_init__(self):
        self.points = as_matrix(self.points, "points")
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.ndim != 1 or self.labels.shape[0] != self.points.shape[0]:
            raise ParameterError("labels length must equal the number of points")
        if self.points.shape[1] < 1:
            raise ParameterError("dataset needs at least one feature column")

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0


def _densify_labels(raw: list[float]) -> np.ndarray:
    mapping: dict[float, int] = {}
    out = np.empty(len(raw), dtype=np.int64)
    for i, value in enumerate(raw):
        if value not in mapping:
            mapping[value] = len(mapping)
        out[i] = mapping[value]
    return out


def parse_libsvm(text: str, name: str = "libsvm", n_features: int | None = None) -> Dataset:
    """Parse sparse `<label> <idx>:<val> ...` lines into a dense Dataset.

    Indices are 1-based and must be strictly increasing within a line; `#`
    starts a comment; blank lines are skipped.  Labels are densified to
    0..C-1 preserving first-appearance order.  ``n_features`` overrides the
    inferred width (which is the maximum index seen).
    """
    raw_labels: list[float] = []
    entries: list[tuple[int, int, float]] = []
    max_index = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        hash_pos = raw.find("#")
        if hash_pos != -1:
            raw = raw[:hash_pos]
        line = raw.strip()
        if not line:
            continue
        tokens = line.split()
        try:
            label = float(tokens[0])
        except ValueError:
            raise ParseError(f"line {lineno}: non-numeric label {tokens[0]!r}") from None
        row = len(raw_labels)
        raw_labels.append(label)
        prev = 0
        for token in tokens[1:]:
            idx_s, sep, val_s = token.partition(":")
            if not sep:
                raise ParseError(f"line {lineno}: malformed pair {token!r}")
            try:
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise ParseError(f"line {lineno}: non-numeric pair {token!r}") from None
            if idx < 1:
                raise ParseError(f"line {lineno}: index {idx} is not positive")
            if idx <= prev:
                raise ParseError(
                    f"line {lineno}: index {idx} does not increase (previous {prev})"
                )
            prev = idx
            max_index = max(max_index, idx)
            entries.append((row, idx - 1, val))
    if not raw_labels:
        raise ParseError("no data lines in input")
    width = n_features if n_features is not None else max_index
    if width < max_index:
        raise ParseError(
            f"declared width {width} is smaller than max feature index {max_index}"
        )
    if width < 1:
        raise ParseError("no feature indices present and no width override given")
    points = np.zeros((len(raw_labels), width))
    for row, col, val in entries:
        points[row, col] = val
    return Dataset(
        points=points,
        labels=_densify_labels(raw_labels),
        name=name,
        nnz=len(entries),
    )


def serialize_libsvm(ds: Dataset) -> str:
    """Inverse of parse_libsvm for datasets with canonical first-appearance labels."""
    lines = []
    for i in range(ds.points.shape[0]):
        parts = [str(int(ds.labels[i]))]
        row = ds.points[i]
        for j in np.nonzero(row)[0]:
            parts.append(f"{j + 1}:{float(row[j])!r}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def write_dataset_csv(ds: Dataset) -> str:
    """CSV with a `# name,n,d,classes` header; one row per point, label last."""
    n, d = ds.points.shape
    lines = [f"# {ds.name},{n},{d},{ds.n_classes}"]
    for i in range(n):
        values = ",".join(repr(float(v)) for v in ds.points[i])
        lines.append(f"{values},{int(ds.labels[i])}")
    return "\n".join(lines) + "\n"


def read_dataset_csv(text: str) -> Dataset:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ParseError("dataset CSV must start with a `# name,n,d,classes` header")
    header = lines[0][1:].strip().split(",")
    if len(header) != 4:
        raise ParseError("dataset CSV header must have name,n,d,classes")
    name = header[0]
    try:
        n, d, _classes = int(header[1]), int(header[2]), int(header[3])
    except ValueError:
        raise ParseError("dataset CSV header counts must be integers") from None
    if len(lines) - 1 != n:
        raise ParseError(f"expected {n} rows, found {len(lines) - 1}")
    points = np.zeros((n, d))
    labels = np.zeros(n, dtype=np.int64)
    for i, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != d + 1:
            raise ParseError(f"line {i}: expected {d + 1} fields, got {len(fields)}")
        try:
            points[i - 2] = [float(v) for v in fields[:-1]]
            labels[i - 2] = int(fields[-1])
        except ValueError:
            raise ParseError(f"line {i}: non-numeric field") from None
    return Dataset(points=points, labels=labels, name=name)


def read_square_csv(text: str) -> np.ndarray:
    """Parse a square numeric CSV (comment lines starting with `#` allowed)."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError:
            raise ParseError(f"line {lineno}: non-numeric matrix entry") from None
    if not rows:
        raise ParseError("no matrix rows in input")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ParseError("matrix rows have inconsistent lengths")
    w = as_matrix(np.array(rows), "w")
    if w.shape[0] != w.shape[1]:
        raise ParseError(f"matrix is {w.shape[0]}x{w.shape[1]}, expected square")
    return w


def write_square_csv(w: np.ndarray) -> str:
    w = as_matrix(w, "w")
    lines = [",".join(repr(float(v)) for v in row) for row in w]
    return "\n".join(lines) + "\n"


def gen_two_rings(
    n_per_ring: int,
    r_inner: float,
    r_outer: float,
    noise_sd: float,
    seed: int,
) -> Dataset:
    """Two concentric noisy circles sharing their centroid at the origin.

    Angles are spread uniformly around the circle (evenly spaced, so each
    ring's centroid sits at the origin up to the radial noise alone); radii
    get additive Gaussian noise.  Labels are the ring index (0 = inner).
    """
    if not (0.0 < r_inner < r_outer):
        raise ParameterError("need 0 < r_inner < r_outer")
    if noise_sd < 0.0:
        raise ParameterError("noise_sd must be nonnegative")
    if n_per_ring < 1:
        raise ParameterError("n_per_ring must be positive")
    stream = RngStream(seed)
    points = np.empty((2 * n_per_ring, 2))
    labels = np.empty(2 * n_per_ring, dtype=np.int64)
    for ring, radius in enumerate((r_inner, r_outer)):
        for i in range(n_per_ring):
            theta = 2.0 * math.pi * i / n_per_ring
            rho = radius + noise_sd * stream.gaussian()
            row = ring * n_per_ring + i
            points[row, 0] = rho * math.cos(theta)
            points[row, 1] = rho * math.sin(theta)
            labels[row] = ring
    return Dataset(points=points, labels=labels, name="two_rings")


def gen_blobs(
    k: int,
    n_per_blob: int,
    d: int,
    separation: float,
    seed: int,
) -> Dataset:
    """k unit-variance Gaussian blobs with centers spaced along the first axis."""
    if k < 1 or n_per_blob < 1 or d < 1:
        raise ParameterError("k, n_per_blob and d must all be positive")
    if separation <= 0.0:
        raise ParameterError("separation must be positive")
    stream = RngStream(seed)
    points = np.empty((k * n_per_blob, d))
    labels = np.empty(k * n_per_blob, dtype=np.int64)
    for blob in range(k):
        center = np.zeros(d)
        center[0] = blob * separation
        for i in range(n_per_blob):
            row = blob * n_per_blob + i
            points[row] = center + [stream.gaussian() for _ in range(d)]
            labels[row] = blob
    return Dataset(points=points, labels=labels, name="blobs")


def gen_sbm(
    sizes: list[int],
    p_in: float,
    p_out: float,
    seed: int,
    jitter: float = 0.0,
) -> np.ndarray:
    """Planted-block random adjacency matrix (explicit edge weights).

    Within-block pairs get an edge with probability p_in, cross-block pairs
    with p_out; entries are {0,1} plus an optional additive jitter on every
    off-diagonal entry, which guarantees positive degrees.
    """
    if not sizes or any(s < 1 for s in sizes):
        raise ParameterError("sizes must be nonempty positive counts")
    if not (0.0 <= p_out < p_in <= 1.0):
        raise ParameterError("need 0 <= p_out < p_in <= 1")
    if jitter < 0.0:
        raise ParameterError("jitter must be nonnegative")
    n = sum(sizes)
    block = np.repeat(np.arange(len(sizes)), sizes)
    stream = RngStream(seed)
    w = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            p = p_in if block[i] == block[j] else p_out
            if stream.uniform() < p:
                w[i, j] = 1.0
                w[j, i] = 1.0
    if jitter > 0.0:
        w = w + jitter
        np.fill_diagonal(w, 0.0)
    degrees = w.sum(axis=1)
    if (degrees <= 0.0).any():
        bad = int(np.argmin(degrees))
        raise ParameterError(
            f"vertex {bad} has zero degree; pass jitter > 0 to guarantee "
            f"positive degrees"
        )
    return w


def sbm_labels(sizes: list[int]) -> np.ndarray:
    """Ground-truth block index for each vertex of gen_sbm output."""
    return np.repeat(np.arange(len(sizes), dtype=np.int64), sizes)
