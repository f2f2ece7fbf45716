"""Tests for cochain complexes, Hodge decompositions and torsion."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from torsionlab.complexes import (
    CochainComplex,
    ComplexMorphism,
    direct_sum,
    hodge,
    induced_harmonic_map,
    laplacian,
    log_det_prime,
    mapping_cone,
    pad_complex,
    suspension,
    tensor_product,
    torsion,
    torsion_transfer_residual,
    torsion_via_laplacians,
)
from torsionlab.errors import DataValidationError
from torsionlab.generators import random_chain_morphism, random_cochain_complex
from torsionlab.vn import (
    HilbertModule,
    Morphism,
    complex_field,
    cyclic_group,
    group_ring_matrix,
    log_vol,
    regular_module,
    singular_values,
)

ROUTE_AGREEMENT_TOL = 1e-8
TRANSFER_TOL = 1e-8

CF = complex_field()


def _cf_module(n):
    return HilbertModule(CF, n)


def _two_term(matrix, offset=0, ctx=None):
    """0 -> W -> W' -> 0 with the given differential matrix."""
    m = np.atleast_2d(np.asarray(matrix, dtype=complex))
    ctx = ctx or CF
    dom = HilbertModule(ctx, m.shape[1], free=not ctx.is_group)
    cod = HilbertModule(ctx, m.shape[0], free=not ctx.is_group)
    return CochainComplex([dom, cod], [Morphism(dom, cod, m)], offset)


def _circle_complex(holonomy):
    return _two_term([[complex(holonomy) - 1.0]])


def test_validation_rejects_nonzero_composition():
    mods = [_cf_module(1), _cf_module(1), _cf_module(1)]
    d0 = Morphism(mods[0], mods[1], [[1.0]])
    d1 = Morphism(mods[1], mods[2], [[1.0]])
    with pytest.raises(DataValidationError) as err:
        CochainComplex(mods, [d0, d1])
    assert "degrees 0 -> 2" in str(err.value)


def test_degree_accessors_and_padding():
    c = _two_term([[2.0]], offset=3)
    assert list(c.degrees()) == [3, 4]
    assert c.module(2).ambient_dim == 0
    assert c.differential(7).shape == (0, 0)
    padded = pad_complex(c, 1, 6)
    assert padded.offset == 1
    assert [m.ambient_dim for m in padded.modules] == [0, 0, 1, 1, 0, 0]
    assert torsion(padded) == pytest.approx(torsion(c), abs=1e-12)


def test_euler_characteristic_uses_true_degrees():
    c = _two_term(np.zeros((2, 1)), offset=0)
    assert c.euler_characteristic() == pytest.approx(1.0 - 2.0)
    assert c.shifted(1).euler_characteristic() == pytest.approx(2.0 - 1.0)
    ctx = cyclic_group(2)
    d = group_ring_matrix([("e", 0.0)], ctx)
    cz = CochainComplex([d.domain, d.codomain], [d], 0)
    assert cz.euler_characteristic() == pytest.approx(0.0)


# ---------------------------------------------------------------------------
# Hodge decomposition


def test_hodge_three_term_example():
    mods = [_cf_module(1), _cf_module(2), _cf_module(1)]
    d0 = Morphism(mods[0], mods[1], [[1.0], [0.0]])
    d1 = Morphism(mods[1], mods[2], [[0.0, 1.0]])
    c = CochainComplex(mods, [d0, d1])
    h = hodge(c)
    assert [b.shape[1] for b in h.harmonic_bases] == [0, 0, 0]
    assert_allclose(h.plus_bases[1], [[1.0], [0.0]], atol=1e-12)
    assert_allclose(h.minus_bases[1], [[0.0], [1.0]], atol=1e-12)
    assert h.is_acyclic()


def test_hodge_circle_reduced_map():
    c = _circle_complex(1j)
    h = hodge(c)
    assert h.harmonic_dim(0) == 0 and h.harmonic_dim(1) == 0
    assert_allclose(h.reduced[0], [[1j - 1.0]], atol=1e-12)


def test_hodge_dimensions_add_up_on_random_complexes():
    rng = np.random.default_rng(5)
    for ctx in [CF, cyclic_group(3)]:
        for _ in range(10):
            c, shape = random_cochain_complex(rng, ctx, length=4, max_rank=2)
            h = hodge(c)
            for i, mod in enumerate(c.modules):
                total = (h.harmonic_bases[i].shape[1] + h.plus_bases[i].shape[1]
                         + h.minus_bases[i].shape[1])
                assert total == mod.ambient_dim
                assert h.harmonic_bases[i].shape[1] == shape.harmonic[i] * ctx.size
            # reduced differentials are invertible
            for r in h.reduced:
                if min(r.shape):
                    sv = np.linalg.svd(r, compute_uv=False)
                    assert sv[-1] > 1e-10


def test_hodge_bases_are_deterministic():
    rng = np.random.default_rng(6)
    c, _ = random_cochain_complex(rng, CF, length=3)
    h1 = hodge(c)
    h2 = hodge(c)
    for a, b in zip(h1.harmonic_bases + h1.reduced, h2.harmonic_bases + h2.reduced):
        assert np.array_equal(a, b)


def test_hodge_flags_ambiguous_rank():
    c = _two_term(np.diag([1.0, 5e-6]))
    h = hodge(c, rank_tol=1e-6)
    assert h.warnings
    assert hodge(c).warnings == []


# ---------------------------------------------------------------------------
# torsion, both routes


def test_torsion_circle_values():
    assert torsion(_circle_complex(-1.0)) == pytest.approx(np.log(2.0), abs=1e-12)
    assert torsion(_circle_complex(1j)) == pytest.approx(0.5 * np.log(2.0), abs=1e-12)


def test_torsion_respects_true_degree_signs():
    c = _two_term([[3.0]])
    assert torsion(c) == pytest.approx(np.log(3.0), abs=1e-12)
    assert torsion(c.shifted(1)) == pytest.approx(-np.log(3.0), abs=1e-12)


def test_suspension_negates_torsion():
    rng = np.random.default_rng(8)
    c, _ = random_cochain_complex(rng, CF, length=3, max_rank=2)
    s = suspension(c)
    assert s.offset == c.offset - 1
    assert torsion(s) == pytest.approx(-torsion(c), abs=1e-9)
    assert torsion_via_laplacians(s) == pytest.approx(-torsion_via_laplacians(c), abs=1e-9)


def test_laplacian_examples():
    circle = _circle_complex(-1.0)
    assert_allclose(laplacian(circle, 0).matrix, [[4.0]], atol=1e-12)
    assert_allclose(laplacian(circle, 1).matrix, [[4.0]], atol=1e-12)
    single = CochainComplex([_cf_module(2)], [], 0)
    assert_allclose(laplacian(single, 0).matrix, np.zeros((2, 2)), atol=0)


def test_log_det_prime_validation():
    bad = Morphism(_cf_module(2), _cf_module(2), [[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(DataValidationError):
        log_det_prime(bad)
    neg = Morphism(_cf_module(1), _cf_module(1), [[-1.0]])
    with pytest.raises(DataValidationError):
        log_det_prime(neg)


def test_circulant_laplacian_log_det_oracle():
    # brute force: prod_{k=1}^{m-1} (2 - 2cos(2 pi k/m)) = m^2
    for m in range(2, 65):
        eigs = 2.0 - 2.0 * np.cos(2.0 * np.pi * np.arange(1, m) / m)
        assert np.prod(eigs) == pytest.approx(m * m, rel=1e-9)
    for m in [2, 3, 8, 31, 64]:
        ctx = cyclic_group(m)
        shift = group_ring_matrix([("t", 1.0), ("e", -1.0)], ctx)
        lap = shift.adjoint() @ shift
        assert log_det_prime(lap) == pytest.approx(2.0 * np.log(m) / m, abs=1e-10)


def test_torsion_routes_agree_on_random_complexes():
    rng = np.random.default_rng(10)
    for ctx in [CF, cyclic_group(2), cyclic_group(3)]:
        for _ in range(10):
            c, _ = random_cochain_complex(rng, ctx, length=4, max_rank=2,
                                          offset=int(rng.integers(-2, 3)))
            a = torsion(c)
            b = torsion_via_laplacians(c)
            assert abs(a - b) < ROUTE_AGREEMENT_TOL * (1.0 + abs(a))


def test_direct_sum_torsion_is_additive():
    rng = np.random.default_rng(12)
    a, _ = random_cochain_complex(rng, CF, length=3)
    b, _ = random_cochain_complex(rng, CF, length=3)
    s = direct_sum(a, b)
    assert torsion(s) == pytest.approx(torsion(a) + torsion(b), abs=1e-9)


# ---------------------------------------------------------------------------
# tensor products


def test_tensor_product_formula_examples():
    interval_like = CochainComplex([_cf_module(1)], [], 0)  # 0 -> C -> 0
    circle = _circle_complex(-1.0)
    prod = tensor_product(interval_like, circle)
    assert torsion(prod) == pytest.approx(np.log(2.0), abs=1e-10)
    torus_like = tensor_product(circle, _circle_complex(1j))
    assert torsion(torus_like) == pytest.approx(0.0, abs=1e-10)


def test_tensor_product_formula_random():
    rng = np.random.default_rng(14)
    for ctx in [CF, cyclic_group(2)]:
        for _ in range(8):
            c1, _ = random_cochain_complex(rng, ctx, length=3, max_rank=2)
            c2, _ = random_cochain_complex(rng, CF, length=2, max_rank=2)
            prod = tensor_product(c1, c2)
            expected = (c2.euler_characteristic() * torsion(c1)
                        + c1.euler_characteristic() * torsion(c2))
            got = torsion(prod)
            assert abs(got - expected) < 1e-8 * (1.0 + abs(expected))
            assert prod.euler_characteristic() == pytest.approx(
                c1.euler_characteristic() * c2.euler_characteristic(), abs=1e-9)


def test_tensor_rejects_two_group_factors():
    ctx = cyclic_group(2)
    d = group_ring_matrix([("e", 0.0)], ctx)
    c = CochainComplex([d.domain], [], 0)
    with pytest.raises(DataValidationError):
        tensor_product(c, c)


def test_tensor_offset_arithmetic():
    c1 = _two_term([[2.0]], offset=1)
    c2 = _two_term([[3.0]], offset=-1)
    prod = tensor_product(c1, c2)
    assert prod.offset == 0
    assert prod.top_degree == 2


# ---------------------------------------------------------------------------
# morphisms, cones, harmonic maps


def test_complex_morphism_validates_chain_rule():
    c = _two_term([[2.0]])
    good = ComplexMorphism(c, c, [Morphism.identity(c.modules[0]),
                                  Morphism.identity(c.modules[1])])
    assert good.component(0).shape == (1, 1)
    with pytest.raises(DataValidationError):
        ComplexMorphism(c, c, [Morphism.identity(c.modules[0]),
                               Morphism(c.modules[1], c.modules[1], [[2.0]])])


def test_mapping_cone_of_identity_is_acyclic_with_zero_torsion():
    rng = np.random.default_rng(16)
    for ctx in [CF, cyclic_group(2)]:
        c, _ = random_cochain_complex(rng, ctx, length=3, max_rank=2)
        ident = ComplexMorphism(c, c, [Morphism.identity(m) for m in c.modules])
        cone, j, p = mapping_cone(ident)
        assert hodge(cone).is_acyclic()
        assert torsion(cone) == pytest.approx(0.0, abs=1e-9)
        # p o j = 0 and the window is padded consistently
        for q in cone.degrees():
            comp = p.component(q) @ j.component(q)
            assert np.linalg.norm(comp.matrix) < 1e-14


def test_mapping_cone_shapes():
    c = _circle_complex(-1.0)
    ident = ComplexMorphism(c, c, [Morphism.identity(m) for m in c.modules])
    cone, _, _ = mapping_cone(ident)
    assert cone.offset == -1
    assert [m.ambient_dim for m in cone.modules] == [1, 2, 1]


def test_induced_harmonic_map_invertible_for_isomorphisms():
    rng = np.random.default_rng(18)
    for ctx in [CF, cyclic_group(2)]:
        c, shape = random_cochain_complex(rng, ctx, length=3, max_rank=2)
        f, target, _ = random_chain_morphism(rng, c, shape, invertible=True)
        hs, ht = hodge(c), hodge(target)
        for q in c.degrees():
            hq = induced_harmonic_map(f, q, hs, ht)
            assert hq.shape[0] == hq.shape[1]
            if hq.shape[0]:
                assert singular_values(hq)[0] > 1e-10


def test_torsion_transfer_residual_small_for_isomorphisms():
    rng = np.random.default_rng(20)
    for ctx in [CF, cyclic_group(3)]:
        for _ in range(5):
            c, shape = random_cochain_complex(rng, ctx, length=3, max_rank=2)
            f, _, _ = random_chain_morphism(rng, c, shape, invertible=True)
            assert torsion_transfer_residual(f) < TRANSFER_TOL


def test_torsion_transfer_scalar_identity_on_acyclic():
    rng = np.random.default_rng(22)
    c, _ = random_cochain_complex(rng, CF, length=4, max_rank=2, acyclic=True)
    comps = [2.5 * Morphism.identity(m) for m in c.modules]
    f = ComplexMorphism(c, c, comps)
    assert torsion_transfer_residual(f) < 1e-9
