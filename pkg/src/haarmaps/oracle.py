"""Monte Carlo verification: sample Haar-distributed unitaries, evaluate
words at concrete matrices, and estimate joint trace moments/cumulants with
batch-means error bars for comparison against exact predictions.

Randomness comes from a counter-based generator (the SplitMix64 finalizer on
an affine counter), so identical ``(seed, stream)`` pairs reproduce the same
matrices on every platform and sampling parallelizes over streams.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .ncpoly import NCWord
from .expansion import cumulants_from_moments

__all__ = [
    "MatrixTuple",
    "SampleReport",
    "splitmix64",
    "counter_uniforms",
    "gaussian_matrices",
    "sample_haar",
    "haar_sampler",
    "evaluate_word",
    "evaluate_word_batch",
    "empirical_joint_cumulant",
]

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def splitmix64(state: int) -> int:
    """The SplitMix64 finalizer: a 64-bit bijective mixer."""
    z = state & _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return (z ^ (z >> 31)) & _MASK


def _stream_key(seed: int, stream: int) -> int:
    """Derive the base key of an independent stream."""
    return splitmix64((seed & _MASK) + _GOLDEN * ((stream & _MASK) + 1))


def counter_uniforms(seed: int, stream: int, start: int, count: int) -> np.ndarray:
    """Open-interval uniforms u_t = ((mix(key + (t+1)·golden) >> 11) + ½)·2⁻⁵³
    for t = start, …, start+count−1."""
    key = _stream_key(seed, stream)
    t = np.arange(start, start + count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (np.uint64(key) + (t + np.uint64(1)) * np.uint64(_GOLDEN)).astype(
            np.uint64
        )
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        z = z ^ (z >> np.uint64(31))
    bits = (z >> np.uint64(11)).astype(np.float64)
    return (bits + 0.5) * 2.0**-53


def gaussian_matrices(N: int, seed: int, stream: int, count: int) -> np.ndarray:
    """``count`` i.i.d. standard complex Gaussian N×N matrices (E|g|² = 1).

    Entry (s, i, j) uses the uniform counters 2c and 2c+1 with
    c = (s·N + i)·N + j: radius from an exponential, angle uniform
    (the polar form of the Box–Muller transform).
    """
    if N < 1:
        raise ValueError("dimension must be >= 1")
    total = count * N * N
    u = counter_uniforms(seed, stream, 0, 2 * total)
    u1 = u[0::2]
    u2 = u[1::2]
    radius = np.sqrt(-np.log(u1))
    angle = 2.0 * np.pi * u2
    g = radius * (np.cos(angle) + 1j * np.sin(angle))
    return g.reshape(count, N, N)


def _haar_from_gaussian(G: np.ndarray) -> np.ndarray:
    """Phase-normalized QR: rescale each Q column by the phase of the
    corresponding R diagonal entry, making the R factor's diagonal real
    positive — the unique decomposition whose Q factor is Haar."""
    Q, R = np.linalg.qr(G)
    d = np.diagonal(R, axis1=-2, axis2=-1)
    ph = d / np.abs(d)
    return Q * ph[..., None, :]


def haar_sampler(N: int, seed: int, stream: int, count: int) -> np.ndarray:
    """``count`` independent Haar-distributed N×N unitaries for the stream."""
    return _haar_from_gaussian(gaussian_matrices(N, seed, stream, count))


def sample_haar(N: int, seed: int) -> np.ndarray:
    """One Haar-distributed N×N unitary (stream 0, first sample)."""
    return haar_sampler(N, seed, 0, 1)[0]


@dataclass(frozen=True)
class MatrixTuple:
    """A dimension together with the deterministic matrices ``A_j``."""

    N: int
    A: Mapping[int, np.ndarray]
    bounded: bool = False

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("dimension must be >= 1")
        mats = {}
        for j, mat in dict(self.A).items():
            arr = np.asarray(mat, dtype=np.complex128)
            if arr.shape != (self.N, self.N):
                raise ValueError(
                    f"matrix a{j} has shape {arr.shape}, expected {(self.N, self.N)}"
                )
            if self.bounded:
                norm = float(np.linalg.norm(arr, ord=2))
                if norm > 1 + 1e-9:
                    raise ValueError(f"matrix a{j} has operator norm {norm} > 1")
            arr.setflags(write=False)
            mats[int(j)] = arr
        object.__setattr__(self, "A", mats)

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "A": {
                str(j): [
                    [[float(z.real), float(z.imag)] for z in row] for row in mat
                ]
                for j, mat in sorted(self.A.items())
            },
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "MatrixTuple":
        N = int(data["N"])
        A = {}
        for j, rows in data.get("A", {}).items():
            mat = np.array(
                [[complex(entry[0], entry[1]) for entry in row] for row in rows],
                dtype=np.complex128,
            )
            A[int(j)] = mat
        return cls(N, A, bounded=bool(data.get("bounded", False)))


@dataclass(frozen=True)
class SampleReport:
    """A Monte Carlo estimate with its batch-means standard error."""

    estimate: complex
    stderr: float
    samples: int
    target: complex | None = None
    sigma_distance: float = float("nan")

    def to_json(self) -> dict:
        out = {
            "estimate": [self.estimate.real, self.estimate.imag],
            "stderr": self.stderr,
            "samples": self.samples,
        }
        if self.target is not None:
            out["target"] = [self.target.real, self.target.imag]
            out["sigma_distance"] = self.sigma_distance
        return out


def _letter_matrix(
    ltr, U: Mapping[int, np.ndarray], A_map: Mapping[int, np.ndarray], N: int
) -> np.ndarray:
    if ltr.kind == "u":
        if ltr.index not in U:
            raise ValueError(f"no unitary provided for color {ltr.index}")
        return U[ltr.index]
    if ltr.kind == "u^-1":
        if ltr.index not in U:
            raise ValueError(f"no unitary provided for color {ltr.index}")
        return U[ltr.index].conj().swapaxes(-1, -2)
    if ltr.index not in A_map:
        raise ValueError(f"no matrix provided for deterministic letter a{ltr.index}")
    mat = A_map[ltr.index]
    return mat if ltr.kind == "a" else mat.conj().swapaxes(-1, -2)


def evaluate_word(
    word: NCWord, U: Mapping[int, np.ndarray], A: "MatrixTuple | Mapping[int, np.ndarray]"
) -> np.ndarray:
    """Ordered product of the word's letters at the given matrices
    (``u⁻¹`` and ``a*`` evaluate to conjugate transposes)."""
    if isinstance(A, MatrixTuple):
        N, A_map = A.N, A.A
    else:
        A_map = {int(j): np.asarray(m, dtype=np.complex128) for j, m in A.items()}
        sizes = [m.shape[0] for m in A_map.values()] + [
            np.asarray(u).shape[0] for u in U.values()
        ]
        N = sizes[0] if sizes else 1
    out = np.eye(N, dtype=np.complex128)
    for ltr in word.letters:
        mat = _letter_matrix(ltr, U, A_map, N)
        if mat.shape[-1] != N or mat.shape[-2] != N:
            raise ValueError(f"matrix for {ltr.token()} has wrong shape {mat.shape}")
        out = out @ mat
    return out


def evaluate_word_batch(
    word: NCWord,
    U_stacks: Mapping[int, np.ndarray],
    A: MatrixTuple,
    count: int | None = None,
) -> np.ndarray:
    """Unnormalized traces ``Tr(word)`` of a word across a stack of sampled
    unitaries: returns a complex vector of length ``count``."""
    counts = {stack.shape[0] for stack in U_stacks.values()}
    if len(counts) > 1:
        raise ValueError("all unitary stacks must have the same sample count")
    if counts:
        stack_count = counts.pop()
        if count is not None and count != stack_count:
            raise ValueError("count disagrees with the unitary stacks")
        count = stack_count
    elif count is None:
        count = 1
    N = A.N
    out = np.broadcast_to(np.eye(N, dtype=np.complex128), (count, N, N))
    for ltr in word.letters:
        mat = _letter_matrix(ltr, U_stacks, A.A, N)
        if mat.ndim == 2:
            mat = mat[None, :, :]
        if mat.shape[-1] != N or mat.shape[-2] != N:
            raise ValueError(f"matrix for {ltr.token()} has wrong shape {mat.shape}")
        out = out @ mat
    return np.trace(out, axis1=-2, axis2=-1)


Sampler = Callable[[int, int, int, int], np.ndarray]


def empirical_joint_cumulant(
    P: Sequence[NCWord],
    sampler: Sampler | None,
    A: MatrixTuple,
    samples: int,
    seed: int,
    *,
    target: complex | None = None,
    batches: int = 16,
) -> SampleReport:
    """Plug-in estimator of the joint cumulant of ``Tr(P_1), …, Tr(P_l)``.

    All words share the same sampled unitaries (one independent stream per
    color).  Empirical moments over the shared samples are combined by the
    set-partition recursion; the standard error comes from the spread of the
    same estimator over ``batches`` consecutive sample blocks, scaled by
    1/√batches.
    """
    words = tuple(P)
    if samples < 2:
        raise ValueError("need at least 2 samples")
    if sampler is None:
        sampler = haar_sampler
    colors = sorted({c for w in words for c in w.unitary_colors()})
    U_stacks = {c: sampler(A.N, seed, c, samples) for c in colors}
    traces = [evaluate_word_batch(w, U_stacks, A, count=samples) for w in words]

    def plugin(sl: slice) -> complex:
        def moment(positions: tuple) -> complex:
            prod = np.ones(traces[0][sl].shape if traces else (samples,), dtype=complex)
            for i in positions:
                prod = prod * traces[i][sl]
            return complex(np.mean(prod))

        return cumulants_from_moments(moment, tuple(range(len(words))))

    estimate = plugin(slice(0, samples))
    k = min(batches, samples)
    edges = [round(i * samples / k) for i in range(k + 1)]
    batch_vals = np.array(
        [plugin(slice(edges[i], edges[i + 1])) for i in range(k)], dtype=complex
    )
    center = batch_vals.mean()
    if k > 1:
        spread = math.sqrt(float(np.sum(np.abs(batch_vals - center) ** 2)) / (k - 1))
        stderr = spread / math.sqrt(k)
    else:
        stderr = float("nan")
    if target is None:
        return SampleReport(estimate, stderr, samples)
    dist = abs(estimate - target)
    if stderr > 0:
        sigma = dist / stderr
    else:
        sigma = 0.0 if dist == 0 else float("inf")
    return SampleReport(estimate, stderr, samples, target, sigma)
