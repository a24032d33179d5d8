import numpy as np
import pytest

from levelstats.errors import ValidationError
from levelstats.xxz import (
    ChainSpec,
    build_basis,
    build_hamiltonian,
    disorder_fields,
    disorder_sweep,
    spectrum,
)


def _full_space_hamiltonian(length, jz, h_fields):
    """kron-product construction over the full 2^L space, bit n = site n."""
    sx = np.array([[0.0, 0.5], [0.5, 0.0]])
    sy = np.array([[0.0, -0.5j], [0.5j, 0.0]])
    sz = np.diag([-0.5, 0.5])  # site basis index 1 = spin up
    eye = np.eye(2)

    def site_op(op, n):
        out = np.eye(1)
        # bit n of the basis index selects site n; kron builds most
        # significant factor first, so site n sits at position length-1-n
        for m in range(length - 1, -1, -1):
            out = np.kron(out, op if m == n else eye)
        return out

    ham = np.zeros((2**length, 2**length), dtype=complex)
    for n in range(length - 1):
        ham += (
            site_op(sx, n) @ site_op(sx, n + 1)
            + site_op(sy, n) @ site_op(sy, n + 1)
            + jz * site_op(sz, n) @ site_op(sz, n + 1)
        )
    for n in range(length):
        ham += h_fields[n] * site_op(sz, n)
    return ham


def test_chain_spec_validation():
    with pytest.raises(ValidationError):
        ChainSpec(length=5)
    with pytest.raises(ValidationError):
        ChainSpec(length=18)
    ChainSpec(length=18, max_length=18)
    with pytest.raises(ValidationError):
        ChainSpec(length=4, disorder=-1.0)
    with pytest.raises(ValidationError):
        ChainSpec(length=4, boundary="periodic")
    assert ChainSpec(length=14).dim == 3432
    assert ChainSpec(length=16).dim == 12870


def test_basis_dimensions():
    assert build_basis(2).states.tolist() == [0b01, 0b10]
    assert build_basis(4).dim == 6
    for length in (2, 4, 6, 8, 10, 12, 14, 16):
        from math import comb

        assert build_basis(length).dim == comb(length, length // 2)


def test_basis_sixteen_matches_bruteforce_popcount():
    states = build_basis(16).states
    assert states.size == 12870
    brute = [s for s in range(1 << 16) if bin(s).count("1") == 8]
    assert states.tolist() == brute


def test_basis_rank_roundtrip():
    basis = build_basis(8)
    idx = basis.rank(basis.states[37])
    assert idx == 37
    with pytest.raises(ValidationError):
        basis.rank(np.int64(0b11111111))


def test_two_site_oracle():
    spec = ChainSpec(length=2, jz=1.0, disorder=0.0, seed=1)
    ham = build_hamiltonian(spec, build_basis(2))
    assert np.array_equal(ham, np.array([[-0.25, 0.5], [0.5, -0.25]]))
    assert np.allclose(np.linalg.eigvalsh(ham), [-0.75, 0.25])


def test_symmetry_exact():
    spec = ChainSpec(length=8, jz=0.4, disorder=2.0, seed=3)
    ham = build_hamiltonian(spec, build_basis(8), 1)
    assert np.max(np.abs(ham - ham.T)) == 0.0
    assert ham.dtype == np.float64


def test_sector_matches_full_space_oracle():
    length = 6
    spec = ChainSpec(length=length, jz=1.3, disorder=4.0, seed=7)
    basis = build_basis(length)
    h_fields = disorder_fields(spec, 2)
    sector = build_hamiltonian(spec, basis, 2)
    full = _full_space_hamiltonian(length, 1.3, h_fields)
    assert np.max(np.abs(full - full.conj().T)) < 1e-12
    popcounts = np.array([bin(s).count("1") for s in range(2**length)])
    sel = popcounts == length // 2
    block = full[np.ix_(sel, sel)].real
    # same basis ordering: sector states ascending == np.where(sel)
    assert np.array_equal(np.flatnonzero(sel), basis.states)
    assert np.max(np.abs(block - sector)) < 1e-12


def test_full_space_block_structure():
    # H never connects different total magnetization
    length = 6
    spec = ChainSpec(length=length, jz=0.9, disorder=1.0, seed=5)
    full = _full_space_hamiltonian(length, 0.9, disorder_fields(spec, 0))
    popcounts = np.array([bin(s).count("1") for s in range(2**length)])
    coupling = np.abs(full) > 1e-14
    np.fill_diagonal(coupling, False)
    rows, cols = np.nonzero(coupling)
    assert np.all(popcounts[rows] == popcounts[cols])


def test_trace_identity():
    length = 10
    spec = ChainSpec(length=length, jz=0.7, disorder=3.0, seed=11)
    basis = build_basis(length)
    h_fields = disorder_fields(spec, 4)
    ham = build_hamiltonian(spec, basis, 4)
    expected = 0.0
    for s in basis.states:
        z = [2 * ((int(s) >> n) & 1) - 1 for n in range(length)]
        expected += 0.7 * 0.25 * sum(z[n] * z[n + 1] for n in range(length - 1))
        expected += 0.5 * sum(h_fields[n] * z[n] for n in range(length))
    assert np.trace(ham) == pytest.approx(expected, rel=1e-12)


def test_disorder_fields_range_and_replay():
    spec = ChainSpec(length=8, disorder=6.0, seed=2)
    h = disorder_fields(spec, 3)
    assert h.shape == (8,)
    assert np.all(np.abs(h) <= 3.0)
    ham_stream = build_hamiltonian(spec, build_basis(8), 3)
    ham_replay = build_hamiltonian(spec, build_basis(8), 3, h_values=h)
    assert np.array_equal(ham_stream, ham_replay)


def test_zero_disorder_seed_independent():
    a = spectrum(ChainSpec(length=6, disorder=0.0, seed=1), 0)
    b = spectrum(ChainSpec(length=6, disorder=0.0, seed=999), 5)
    assert np.allclose(a.levels, b.levels, atol=1e-12)
    c = spectrum(ChainSpec(length=6, disorder=1.0, seed=1), 0)
    d = spectrum(ChainSpec(length=6, disorder=1.0, seed=1), 1)
    assert not np.allclose(c.levels, d.levels)


def test_spectrum_count_and_order():
    s = spectrum(ChainSpec(length=8, disorder=2.0, seed=4), 2)
    assert s.levels.size == 70
    assert np.all(np.diff(s.levels) >= 0)
    assert s.realization_index == 2


def test_disorder_sweep_small():
    template = ChainSpec(length=10, jz=1.0, disorder=1.0, seed=6)
    result = disorder_sweep(template, (1.0, 8.0), n_realizations=4, k_max=3, l_max=5)
    assert result.w_values == (1.0, 8.0)
    assert len(result.rows) == 6
    row = result.row(1.0, 2)
    assert row.k == 2 and row.disorder == 1.0
    assert row.mean == pytest.approx(2.0, rel=0.05)
    assert row.n_realizations == 4
    assert (1.0, 3) in result.histograms
    assert 8.0 in result.nv_curves
    assert result.nv_curves[8.0].lengths[-1] == 5.0
    # stronger disorder -> statistics drift toward uncorrelated: larger
    # variance at fixed k
    assert result.row(8.0, 3).variance > result.row(1.0, 3).variance
    with pytest.raises(KeyError):
        result.row(2.0, 1)


def test_disorder_sweep_validates():
    template = ChainSpec(length=6, seed=1)
    with pytest.raises(ValidationError):
        disorder_sweep(template, (), 4, 3)
    with pytest.raises(ValidationError):
        disorder_sweep(template, (1.0,), 1, 3)
    with pytest.raises(ValidationError):
        disorder_sweep(template, (1.0,), 4, 0)
