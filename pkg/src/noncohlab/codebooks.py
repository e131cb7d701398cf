"""Alphabet construction: energy levels, random Grassmannian codebooks with
chordal-distance refinement, and dimension-union subspace codebooks."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .model import Alphabet, Codeword, ModelError

_COLLISION_TOL = 1e-6  # chordal distance below this counts as a resample-worthy collision


@dataclass(frozen=True)
class GrassmannCodebook:
    """Truncated-unitary codewords, plus the power-scaled alphabet."""

    bases: tuple  # orthonormal K x Nt matrices, one per codeword
    alphabet: Alphabet
    minChordalDistance: float
    designLog: tuple  # (iteration, min_distance, step, accepted) records


@dataclass(frozen=True)
class SubspaceUnionCodebook:
    """Union over ranks n = 0..Nt of Grassmannian sub-codebooks."""

    perDimension: tuple  # perDimension[n] = tuple of orthonormal K x n bases
    alphabet: Alphabet


def chordal_distance(A: np.ndarray, B: np.ndarray) -> float:
    """sqrt(n - ||A^H B||_F^2) for orthonormal bases of equal rank n."""
    n = A.shape[1]
    if B.shape[1] != n:
        raise ModelError("chordal distance needs equal-rank bases")
    return float(np.sqrt(max(n - np.linalg.norm(A.conj().T @ B) ** 2, 0.0)))


def min_pairwise_chordal(bases) -> float:
    if len(bases) < 2:
        return float("inf")
    return min(chordal_distance(a, b) for a, b in combinations(bases, 2))


def energy_constellation(levels, K: int, Nt: int = 1) -> Alphabet:
    """Scalar amplitude constellation x_i = sqrt(level_i), power-normalized."""
    if Nt != 1:
        raise ModelError("energy constellations are defined for Nt = 1")
    levels = [float(l) for l in levels]
    if any(l < 0 for l in levels):
        raise ModelError("levels must be nonnegative")
    if len(set(levels)) != len(levels):
        raise ModelError("duplicate energy levels")
    total = sum(levels)
    if total <= 0:
        warnings.warn("all-zero energy constellation; power normalization skipped")
        mats = [np.zeros((K, 1)) for _ in levels]
        return Alphabet.from_matrices(mats, normalize=False)
    scale = len(levels) / total
    col = np.ones((K, 1))
    mats = [np.sqrt(l * scale) * col for l in levels]
    return Alphabet(tuple(Codeword(m) for m in mats), normalized=True)


def _alphabet_from_bases(bases, K: int, Nt: int) -> Alphabet:
    """Zero-pad bases to K x Nt and rescale uniformly to unit mean per-use power."""
    mats = []
    total = 0.0
    for B in bases:
        S = np.zeros((K, Nt), dtype=np.complex128)
        if B.shape[1] > 0:
            S[:, : B.shape[1]] = B
        mats.append(S)
        total += float(np.linalg.norm(S) ** 2)
    if total <= 0:
        raise ModelError("cannot normalize an all-zero codebook")
    scale = np.sqrt(len(mats) * K / total)
    return Alphabet(tuple(Codeword(scale * m) for m in mats), normalized=True)


def _random_orthonormal(rng, K: int, n: int) -> np.ndarray:
    G = rng.standard_normal((K, n)) + 1j * rng.standard_normal((K, n))
    Q, _ = np.linalg.qr(G)
    return Q[:, :n]


def _draw_distinct_bases(rng, M: int, K: int, n: int, max_retries: int = 100):
    bases = []
    for _ in range(M):
        for _ in range(max_retries):
            B = _random_orthonormal(rng, K, n)
            if all(chordal_distance(B, other) > _COLLISION_TOL for other in bases):
                bases.append(B)
                break
        else:
            raise ModelError(f"could not draw {M} distinct rank-{n} subspaces in C^{K}")
    return bases


def random_grassmannian(M: int, K: int, Nt: int, seed: int) -> GrassmannCodebook:
    """M random points on the Grassmannian of Nt-dim subspaces of C^K."""
    if not (K >= Nt >= 1):
        raise ModelError("need K >= Nt >= 1")
    if M < 1:
        raise ModelError("M must be >= 1")
    if Nt == K and M > 1:
        raise ModelError(
            "the full-dimension Grassmannian is a single point; M > 1 is infeasible"
        )
    rng = np.random.default_rng(seed)
    bases = _draw_distinct_bases(rng, M, K, Nt)
    dmin = min_pairwise_chordal(bases)
    return GrassmannCodebook(
        bases=tuple(bases),
        alphabet=_alphabet_from_bases(bases, K, Nt),
        minChordalDistance=dmin,
        designLog=((0, dmin, 0.0, True),),
    )


def refine_packing(cb: GrassmannCodebook, iterations: int,
                   step_size: float = 0.5) -> GrassmannCodebook:
    """Maximize the minimum pairwise chordal distance by projected ascent.

    Each iteration pushes the worst pair apart along the gradient of their
    squared chordal distance and retracts by QR re-orthonormalization; steps
    that would decrease the objective are rejected and the step halved.
    """
    if iterations < 0:
        raise ModelError("iterations must be >= 0")
    bases = [b.copy() for b in cb.bases]
    log = list(cb.designLog)
    K, Nt = bases[0].shape
    best = min_pairwise_chordal(bases)
    step = step_size
    for it in range(1, iterations + 1):
        if len(bases) < 2 or step < 1e-12:
            log.append((it, best, step, False))
            continue
        i, j = min(combinations(range(len(bases)), 2),
                   key=lambda p: chordal_distance(bases[p[0]], bases[p[1]]))
        Bi, Bj = bases[i], bases[j]
        # d^2 = Nt - ||Bi^H Bj||_F^2: ascent direction for Bi is -Bj Bj^H Bi.
        Qi, _ = np.linalg.qr(Bi - step * (Bj @ (Bj.conj().T @ Bi)))
        Qj, _ = np.linalg.qr(Bj - step * (Bi @ (Bi.conj().T @ Bj)))
        trial = list(bases)
        trial[i], trial[j] = Qi[:, :Nt], Qj[:, :Nt]
        cand = min_pairwise_chordal(trial)
        if cand >= best:
            bases = trial
            best = cand
            log.append((it, best, step, True))
        else:
            step *= 0.5
            log.append((it, best, step, False))
    return GrassmannCodebook(
        bases=tuple(bases),
        alphabet=_alphabet_from_bases(bases, K, Nt),
        minChordalDistance=best,
        designLog=tuple(log),
    )


def subspace_union_codebook(sizes, K: int, Nt: int, seed: int) -> SubspaceUnionCodebook:
    """Union of per-rank Grassmannian sub-codebooks (plus optional zero word).

    sizes[n] is the number of rank-n codewords, n = 0..Nt; the rank-0 and the
    full-dimension (Nt = K) slots hold at most one element.
    """
    sizes = [int(s) for s in sizes]
    if len(sizes) != Nt + 1:
        raise ModelError(f"sizes must have length Nt+1 = {Nt + 1}")
    if any(s < 0 for s in sizes):
        raise ModelError("sizes must be nonnegative")
    if sizes[0] > 1:
        raise ModelError("the rank-0 sub-codebook holds at most the zero codeword")
    if Nt == K and sizes[Nt] > 1:
        raise ModelError("the full-dimension Grassmannian holds a single point")
    if not (K >= Nt >= 1):
        raise ModelError("need K >= Nt >= 1")
    if sum(sizes) < 1:
        raise ModelError("codebook must contain at least one codeword")
    rng = np.random.default_rng(seed)
    per_dim = []
    flat = []
    for n, count in enumerate(sizes):
        if n == 0:
            group = [np.zeros((K, 0), dtype=np.complex128)] * count
        else:
            if n == K and count > 1:
                raise ModelError(
                    f"rank {n} equals the ambient dimension; at most one subspace exists"
                )
            group = _draw_distinct_bases(rng, count, K, n) if count else []
        per_dim.append(tuple(group))
        flat.extend(group)
    return SubspaceUnionCodebook(
        perDimension=tuple(per_dim),
        alphabet=_alphabet_from_bases(flat, K, Nt),
    )


@dataclass(frozen=True)
class CodebookReport:
    power_value: float
    power_ok: bool
    unitary_claimed: bool
    unitary_ok: bool
    unitary_max_dev: float
    min_chordal: float
    ranks: tuple
    passed: bool


def validate_codebook(cb) -> CodebookReport:
    """Measure a codebook against its declared invariants.

    Accepts a GrassmannCodebook, a SubspaceUnionCodebook, or a bare Alphabet
    (for which no unitary structure is claimed).
    """
    from .singularity import column_space

    if isinstance(cb, GrassmannCodebook):
        alphabet, claimed, bases = cb.alphabet, True, list(cb.bases)
    elif isinstance(cb, SubspaceUnionCodebook):
        alphabet, claimed = cb.alphabet, True
        bases = [b for group in cb.perDimension for b in group]
    elif isinstance(cb, Alphabet):
        alphabet, claimed, bases = cb, False, None
    else:
        raise ModelError(f"cannot validate object of type {type(cb).__name__}")

    power = alphabet.mean_symbol_power()
    power_ok = abs(power - 1.0) <= 1e-9 or not alphabet.normalized

    unitary_dev = 0.0
    unitary_ok = True
    if claimed:
        for B in bases:
            n = B.shape[1]
            if n == 0:
                continue
            dev = float(np.linalg.norm(B.conj().T @ B - np.eye(n)))
            unitary_dev = max(unitary_dev, dev)
        unitary_ok = unitary_dev < 1e-10

    subs = [column_space(c) for c in alphabet.codewords]
    ranks = tuple(s.rank for s in subs)
    dmin = float("inf")
    for a, b in combinations(range(alphabet.M), 2):
        if subs[a].rank == subs[b].rank and subs[a].rank > 0:
            dmin = min(dmin, chordal_distance(subs[a].basis, subs[b].basis))
    return CodebookReport(
        power_value=power,
        power_ok=power_ok,
        unitary_claimed=claimed,
        unitary_ok=unitary_ok,
        unitary_max_dev=unitary_dev,
        min_chordal=dmin,
        ranks=ranks,
        passed=power_ok and unitary_ok,
    )
