"""CNOT-minimal synthesis: table structure, minimality, exact realization."""

import numpy as np
import pytest

from cnisim.compiler import (
    MIN_CNOT_DIAMETER,
    _make_canon,
    _mat_mul,
    _pack_key,
    _sp_matrix_rows,
    compile_words,
    compile_words_batch,
    load_table,
)
from cnisim.pauli import PauliString, conjugate_by_circuit
from cnisim.shadows import _sample_symplectic


def sp_group_order(n):
    o = 1
    for i in range(1, n + 1):
        o *= 4**i - 1
    return o << (n * n)


def random_words(n, rng):
    imgs = _sample_symplectic(n, rng)
    signs = rng.integers(0, 2, size=2 * n)
    return [(int(s), z, x) for s, (z, x) in zip(signs, imgs)]


def target_key(n, words):
    rows = [0] * (2 * n)
    for gi, (_, z, x) in enumerate(words):
        col = 2 * (gi % n) + (1 if gi >= n else 0)
        for r in range(n):
            if (x >> r) & 1:
                rows[2 * r] |= 1 << col
            if (z >> r) & 1:
                rows[2 * r + 1] |= 1 << col
    canon = _make_canon(n)
    return canon(np.array([_pack_key(n, rows)], dtype=np.uint64))[0]


def table_distance(table, key):
    idx = int(np.searchsorted(table.keys, key))
    assert table.keys[idx] == key
    return int(table.dist[idx])


def test_table_sizes_and_diameters():
    expected_hist = {
        1: [1],
        2: [1, 9, 9, 1],
        3: [1, 27, 432, 2784, 3042, 432, 2],
    }
    for n in (1, 2, 3):
        table = load_table(n)
        assert table.keys.size == sp_group_order(n) // 6**n
        assert table.diameter == MIN_CNOT_DIAMETER[n]
        assert table.distance_histogram().tolist() == expected_hist[n]
        assert np.all(np.diff(table.keys.astype(np.uint64)) > 0)


def test_distances_match_direct_search_n2():
    # 0-1 breadth-first sweep over all 720 elements of Sp(4, 2): free
    # single-qubit moves, unit-cost CNOTs; every element's distance must
    # agree with the coset table
    n = 2
    local = [("H", 0), ("H", 1), ("S", 0), ("S", 1)]
    cnots = [("CNOT", 0, 1), ("CNOT", 1, 0)]
    ident = tuple(1 << i for i in range(2 * n))
    from collections import deque

    dd = {ident: 0}
    queue = deque([ident])
    while queue:
        m = queue.popleft()
        for op in local:
            m2 = tuple(_mat_mul(n, list(m), _sp_matrix_rows(n, op)))
            if m2 not in dd or dd[m] < dd[m2]:
                dd[m2] = dd[m]
                queue.appendleft(m2)
        for op in cnots:
            m2 = tuple(_mat_mul(n, list(m), _sp_matrix_rows(n, op)))
            if m2 not in dd or dd[m] + 1 < dd[m2]:
                dd[m2] = dd[m] + 1
                queue.append(m2)
    assert len(dd) == sp_group_order(n)

    table = load_table(n)
    canon = _make_canon(n)
    for rows, d in dd.items():
        key = canon(np.array([_pack_key(n, rows)], dtype=np.uint64))[0]
        assert table_distance(table, key) == d


@pytest.mark.parametrize("n", [1, 2, 3])
def test_compile_realizes_images_with_minimal_cnots(n):
    rng = np.random.default_rng(40 + n)
    table = load_table(n)
    batch = [random_words(n, rng) for _ in range(150)]
    circs = compile_words_batch(n, batch)
    for words, circ in zip(batch, circs):
        for gi, (s, z, x) in enumerate(words):
            q = gi % n
            gen = (
                PauliString(n, 0, 0, 1 << q)
                if gi < n
                else PauliString(n, 0, 1 << q, 0)
            )
            img = conjugate_by_circuit(gen, circ)
            assert (img.sign_bit, img.z_mask, img.x_mask) == (s, z, x)
        ncnot = len(circ.cnot_positions())
        assert ncnot == table_distance(table, target_key(n, words))
        assert ncnot <= MIN_CNOT_DIAMETER[n]


def test_compile_deterministic():
    rng = np.random.default_rng(77)
    words = random_words(3, rng)
    a = compile_words(3, words)
    b = compile_words(3, words)
    assert a.ops == b.ops


def test_full_table_certifies_minimality_n4():
    # building (first use) certifies that every positive-distance coset has
    # a distance-decreasing move; afterwards the cached arrays are structure
    table = load_table(4)
    assert table.keys.size == sp_group_order(4) // 6**4
    assert table.diameter == 9
    assert table.distance_histogram().tolist() == [
        1, 54, 1917, 47904, 849438, 8192583, 22623581, 4809996, 31320, 6,
    ]
    rng = np.random.default_rng(44)
    batch = [random_words(4, rng) for _ in range(40)]
    circs = compile_words_batch(4, batch)
    for words, circ in zip(batch, circs):
        for gi, (s, z, x) in enumerate(words):
            q = gi % 4
            gen = (
                PauliString(4, 0, 0, 1 << q)
                if gi < 4
                else PauliString(4, 0, 1 << q, 0)
            )
            img = conjugate_by_circuit(gen, circ)
            assert (img.sign_bit, img.z_mask, img.x_mask) == (s, z, x)
        assert len(circ.cnot_positions()) == table_distance(
            table, target_key(4, words)
        )
