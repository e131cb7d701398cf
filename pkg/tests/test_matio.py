import numpy as np
import pytest

from noncohlab.matio import (
    format_matrix,
    load_matrices,
    load_matrix,
    save_matrices,
    save_matrix,
)
from noncohlab.model import ModelError


class TestRoundTrip:
    def test_real_matrix(self, tmp_path):
        A = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=complex)
        p = tmp_path / "a.txt"
        save_matrix(p, A)
        assert np.array_equal(load_matrix(p), A)

    def test_complex_matrix_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        A = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
        p = tmp_path / "a.txt"
        save_matrix(p, A)
        # %.17g round-trips double precision exactly
        assert np.array_equal(load_matrix(p), A)

    def test_multiple_blocks(self, tmp_path):
        mats = [np.eye(2, dtype=complex), np.ones((1, 3), dtype=complex),
                np.zeros((3, 1), dtype=complex)]
        p = tmp_path / "book.txt"
        save_matrices(p, mats)
        got = load_matrices(p)
        assert len(got) == 3
        for a, b in zip(mats, got):
            assert np.array_equal(a, b)

    def test_empty_matrix_block(self, tmp_path):
        p = tmp_path / "z.txt"
        save_matrix(p, np.zeros((0, 2), dtype=complex))
        assert load_matrix(p).shape == (0, 2)

    def test_header_format(self):
        text = format_matrix(np.array([[1 + 2j]]))
        assert text.splitlines()[0] == "complex-matrix 1 1"
        assert text.splitlines()[1] == "1,2"


class TestErrors:
    def test_vector_rejected(self):
        with pytest.raises(ModelError):
            format_matrix(np.ones(3))

    def test_missing_header(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("1,0 0,0\n")
        with pytest.raises(ModelError, match="header"):
            load_matrices(p)

    def test_bad_shape_tokens(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("complex-matrix two 2\n")
        with pytest.raises(ModelError, match="shape"):
            load_matrices(p)

    def test_truncated_block(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("complex-matrix 3 1\n1,0\n")
        with pytest.raises(ModelError, match="truncated"):
            load_matrices(p)

    def test_wrong_row_width(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("complex-matrix 1 2\n1,0\n")
        with pytest.raises(ModelError, match="entries"):
            load_matrices(p)

    def test_malformed_entry(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("complex-matrix 1 1\nnope\n")
        with pytest.raises(ModelError, match="malformed"):
            load_matrices(p)

    def test_empty_file(self, tmp_path):
        p = tmp_path / "empty.txt"
        p.write_text("")
        with pytest.raises(ModelError, match="no matrix blocks"):
            load_matrices(p)

    def test_load_matrix_multi_block(self, tmp_path):
        p = tmp_path / "two.txt"
        save_matrices(p, [np.eye(1, dtype=complex)] * 2)
        with pytest.raises(ModelError, match="exactly one"):
            load_matrix(p)
