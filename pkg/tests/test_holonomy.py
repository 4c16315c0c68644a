import numpy as np
import pytest

from basicindex import (
    HolonomyGroup,
    NotInvariantError,
    Subspace,
    check_equivariance,
    exterior_module,
    exterior_rep,
    invariant_dim_in,
    invariant_subspace,
)
from basicindex.holonomy import derive_component_action, derive_infinitesimal_action
from closure_builders import ROT2, so2_group, sphere_closure, torus_group


def svd_kernel_oracle(rows, n):
    """Independent joint-kernel dimension and basis via one SVD."""
    stacked = np.vstack(rows) if rows else np.zeros((1, n), dtype=complex)
    _, s, vh = np.linalg.svd(stacked)
    svals = np.concatenate([s, np.zeros(n - len(s))])
    keep = svals < 1e-9 * max(1.0, svals[0] if len(s) else 1.0)
    return int(np.sum(keep)), vh.conj().T[:, keep]


def rotation4(equal_speed=True):
    x = np.zeros((4, 4))
    x[:2, :2] = ROT2
    x[2:, 2:] = ROT2
    return x


def test_trivial_group_full_space():
    g = HolonomyGroup.trivial_group(2)
    assert invariant_subspace(g, 4).dim == 4


def test_so2_invariants_on_plane_forms():
    module = exterior_module(2, "parity")
    inv = invariant_subspace(so2_group(module), 4)
    assert inv.dim == 2
    # spanned by the scalar and the area form
    proj = inv.projector()
    for pos in (0, 3):
        e = np.zeros(4, dtype=complex)
        e[pos] = 1.0
        assert np.linalg.norm(proj @ e - e) < 1e-9


def test_equal_speed_double_rotation_invariants():
    # equal-angle rotation of both planes: six invariant even-degree forms
    module = exterior_module(4, "parity")
    x = rotation4()
    act = derive_infinitesimal_action(module, x)
    group = HolonomyGroup(4, ((x, act),), ())
    inv = invariant_subspace(group, 16)
    oracle_dim, oracle_basis = svd_kernel_oracle([act], 16)
    assert inv.dim == oracle_dim
    parity = module.grading
    evens = sum(1 for k in range(inv.dim)
                if np.real(inv.basis[:, k].conj() @ parity @ inv.basis[:, k]) > 0)
    assert evens == 6 and inv.dim == 6


def test_independent_torus_invariants():
    # independent plane rotations cut the invariants down to four
    module = exterior_module(4, "parity")
    group = torus_group(module)
    inv = invariant_subspace(group, 16)
    rows = [dx for _, dx in group.infinitesimal]
    oracle_dim, _ = svd_kernel_oracle(rows, 16)
    assert inv.dim == oracle_dim == 4


def test_invariant_dim_in_area_form():
    module = exterior_module(2, "parity")
    w = Subspace.from_span(np.eye(4, dtype=complex)[:, [3]])
    assert invariant_dim_in(so2_group(module), w) == 1


def test_invariant_dim_in_rejects_non_invariant():
    module = exterior_module(2, "parity")
    w = Subspace.from_span(np.eye(4, dtype=complex)[:, [1]])  # span{dx}
    with pytest.raises(NotInvariantError):
        invariant_dim_in(so2_group(module), w)


def test_invariant_dim_in_trivial_group():
    w = Subspace.full(4)
    assert invariant_dim_in(HolonomyGroup.trivial_group(2), w) == 4


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6, 7, 8])
def test_cyclic_averaging_projector(n):
    module = exterior_module(2, "parity")
    theta = 2.0 * np.pi / n
    g = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    rho = derive_component_action(module, g)
    group = HolonomyGroup(2, (), ((g, rho),))
    inv = invariant_subspace(group, 4)
    avg = sum(np.linalg.matrix_power(rho, k) for k in range(n)) / n
    assert np.linalg.norm(avg - inv.projector()) < 1e-9


def test_invariant_subspace_idempotent():
    from basicindex import subspace_intersection

    module = exterior_module(2, "parity")
    inv = invariant_subspace(so2_group(module), 4)
    again = subspace_intersection([inv, inv])
    assert again.dim == inv.dim
    assert np.linalg.norm(again.projector() - inv.projector()) < 1e-9


def test_redundant_generator_changes_nothing():
    module = exterior_module(2, "parity")
    theta = 2.0 * np.pi / 5
    g = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    rho = derive_component_action(module, g)
    one = HolonomyGroup(2, (), ((g, rho),))
    two = HolonomyGroup(2, (), ((g, rho), (g @ g, rho @ rho)))
    p1 = invariant_subspace(one, 4).projector()
    p2 = invariant_subspace(two, 4).projector()
    assert np.linalg.norm(p1 - p2) < 1e-9


def test_group_validation_flags_bad_matrices():
    bad = HolonomyGroup(2, ((np.eye(2), np.zeros((4, 4), dtype=complex)),), ())
    assert any("skew" in p for p in bad.validate(4))


def test_check_equivariance_trivial():
    d = sphere_closure("north")
    rep = check_equivariance(HolonomyGroup.trivial_group(2), d.module, d.z)
    assert rep.max_violation == 0.0


def test_check_equivariance_sphere():
    d = sphere_closure("north")
    rep = check_equivariance(d.holonomy, d.module, d.z)
    assert rep.max_violation < 1e-9


def test_check_equivariance_flags_perturbed_data():
    d = sphere_closure("north")
    z_bad = (d.z[0] + 0.05 * np.diag([1.0, -1.0, -1.0, 1.0]), d.z[1])
    rep = check_equivariance(d.holonomy, d.module, z_bad)
    assert rep.max_violation > 1e-3


def test_derived_actions_match_exterior_rep():
    module = exterior_module(2, "parity")
    theta = 0.37
    g = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    assert np.allclose(derive_component_action(module, g), exterior_rep(g))
