import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from varbesov.dyadic import block, build_partition, chi, low_cutoff, partition_range, phi, single_shell_region
from varbesov.errors import PartitionIndexError
from varbesov.spectral import Grid
from varbesov.data import random_field


def _chi_oracle(r):
    # closed form of the smooth step, written out scalar by scalar
    if r <= 0.75:
        return 1.0
    if r >= 4 / 3:
        return 0.0
    t = (r - 0.75) / (4 / 3 - 0.75)
    a, b = math.exp(-1 / (1 - t)), math.exp(-1 / t)
    return a / (a + b)


def test_chi_against_scalar_oracle():
    rs = np.linspace(0, 2, 401)
    assert np.abs(chi(rs) - [_chi_oracle(r) for r in rs]).max() < 1e-15


def test_chi_shape():
    rs = np.linspace(0, 3, 3001)
    c = chi(rs)
    assert np.all(np.diff(c) <= 0)
    assert np.all(c[rs <= 0.75] == 1) and np.all(c[rs >= 4 / 3] == 0)
    assert chi(0.8) < 1 and chi(4 / 3 - 0.01) > 0


def test_phi_support():
    rs = np.linspace(0, 4, 4001)
    p = phi(rs)
    assert np.all(p >= 0)
    assert np.all(p[(rs <= 0.75) | (rs >= 8 / 3)] == 0)
    assert np.all(p[(rs >= 4 / 3) & (rs <= 1.5)] == 1)


@pytest.mark.parametrize("dim,n,expected", [(1, 64, (-1, 4)), (2, 64, (-1, 5)), (3, 32, (-1, 4)), (2, 32, (-1, 4))])
def test_partition_range(dim, n, expected):
    assert partition_range(Grid(dim, n)) == expected


@pytest.mark.parametrize("dim,n,L", [(1, 64, 1.0), (2, 64, 1.0), (3, 32, 1.0), (2, 32, 2.0), (1, 128, 0.5)])
def test_partition_of_unity(dim, n, L):
    part = build_partition(Grid(dim, n, L))
    assert part.unity_deviation() <= 1e-12


def test_neighbour_overlap_only():
    part = build_partition(Grid(2, 64))
    m = part.phi_masks
    for i in range(len(m)):
        for k in range(i + 2, len(m)):
            assert not np.any((m[i] > 0) & (m[k] > 0))


def test_chi_is_telescoped_sum():
    part = build_partition(Grid(2, 32))
    for j in part.js:
        tele = part.chi_mask(part.j_min) + sum(part.phi_mask(k) for k in range(part.j_min, j + 1))
        assert np.abs(tele - part.chi_mask(j + 1)).max() < 1e-14


def test_index_errors():
    part = build_partition(Grid(1, 64))
    with pytest.raises(PartitionIndexError):
        part.phi_mask(part.j_max + 1)
    with pytest.raises(PartitionIndexError):
        part.chi_mask(part.j_min - 1)
    part.chi_mask(part.j_max + 1)


def test_blocks_sum_to_field(rng):
    g = Grid(2, 32)
    part = build_partition(g)
    u = random_field(g, rng)
    total = sum(block(u, part, j).coeffs for j in part.js)
    assert np.abs(total - u.coeffs).max() < 1e-13
    top = low_cutoff(u, part, part.j_max + 1)
    assert np.abs(top.coeffs - u.coeffs).max() < 1e-13


def test_single_shell_region_is_exclusive():
    part = build_partition(Grid(2, 64))
    for j in part.js:
        region = single_shell_region(part, j)
        others = [part.phi_mask(k) for k in part.js if k != j]
        assert (j == part.j_min or region.any()) and all(np.all(o[region] == 0) for o in others)
        assert np.allclose(part.phi_mask(j)[region], 1.0, atol=1e-15)


def test_to_json_round_trips_profile():
    d = build_partition(Grid(1, 64)).to_json()
    assert (d["j_min"], d["j_max"]) == (-1, 4)
    assert np.allclose(d["profile_chi"], chi(np.array(d["profile_r"])))


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-3, 50.0))
def test_shell_sum_identity(r):
    # sum over a finite range telescopes to a difference of two cutoffs
    a, b = -3, 6
    s = sum(phi(r * 2.0**-j) for j in range(a, b + 1))
    assert abs(s - (chi(r * 2.0 ** -(b + 1)) - chi(r * 2.0**-a))) < 1e-14


def test_origin_in_no_shell():
    part = build_partition(Grid(2, 32))
    assert np.all(part.phi_masks[(slice(None),) + part.grid.zero_index] == 0)


def test_block_orthogonality_and_cutoff_ends(rng):
    g = Grid(2, 64)
    part = build_partition(g)
    u = random_field(g, rng)
    j = 2
    shell = block(u, part, j)
    for k in (j - 2, j + 2, j + 3):
        assert np.all(block(shell, part, k).coeffs == 0)
    assert np.all(low_cutoff(u, part, part.j_min).coeffs == 0)


def test_paraproduct_support(rng):
    from varbesov.spectral import product
    g = Grid(2, 64)
    part = build_partition(g)
    f, h = random_field(g, rng), random_field(g, rng, k_max=12)
    for j in range(part.j_min + 1, 4):
        term = product(low_cutoff(f, part, j - 1), block(h, part, j))
        for i in part.js:
            if abs(i - j) >= 5:
                assert np.abs(block(term, part, i).coeffs).max() <= 1e-12 * max(term.norm(), 1e-300)
