"""Dense complex-matrix text schema shared by the library and the CLI.

Each block is a header line "complex-matrix ROWS COLS" followed by ROWS lines
of COLS whitespace-separated "re,im" pairs, row-major. A file may hold several
consecutive blocks (e.g. a codebook).
"""

from __future__ import annotations

import numpy as np

from .model import ModelError

HEADER = "complex-matrix"


def format_matrix(A: np.ndarray) -> str:
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2:
        raise ModelError("only 2-d matrices can be serialized")
    lines = [f"{HEADER} {A.shape[0]} {A.shape[1]}"]
    for row in A:
        lines.append(" ".join(f"{v.real:.17g},{v.imag:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def save_matrices(path, mats):
    with open(path, "w") as fh:
        for A in mats:
            fh.write(format_matrix(A))


def save_matrix(path, A):
    save_matrices(path, [A])


def _parse_entry(tok: str) -> complex:
    try:
        re_s, im_s = tok.split(",")
        return complex(float(re_s), float(im_s))
    except ValueError as e:
        raise ModelError(f"malformed matrix entry {tok!r}") from e


def load_matrices(path) -> list:
    mats = []
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    i = 0
    while i < len(lines):
        parts = lines[i].split()
        if len(parts) != 3 or parts[0] != HEADER:
            raise ModelError(f"{path}: expected '{HEADER} rows cols' header at line {i + 1}")
        try:
            rows, cols = int(parts[1]), int(parts[2])
        except ValueError as e:
            raise ModelError(f"{path}: bad shape header at line {i + 1}") from e
        if rows < 0 or cols < 0:
            raise ModelError(f"{path}: negative shape at line {i + 1}")
        if i + 1 + rows > len(lines):
            raise ModelError(f"{path}: truncated matrix block at line {i + 1}")
        A = np.zeros((rows, cols), dtype=np.complex128)
        for r in range(rows):
            toks = lines[i + 1 + r].split()
            if len(toks) != cols:
                raise ModelError(
                    f"{path}: row {r} has {len(toks)} entries, expected {cols}"
                )
            A[r] = [_parse_entry(t) for t in toks]
        mats.append(A)
        i += 1 + rows
    if not mats:
        raise ModelError(f"{path}: no matrix blocks found")
    return mats


def load_matrix(path) -> np.ndarray:
    mats = load_matrices(path)
    if len(mats) != 1:
        raise ModelError(f"{path}: expected exactly one matrix, found {len(mats)}")
    return mats[0]
