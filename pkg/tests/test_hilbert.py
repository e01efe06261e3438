import mpmath
import numpy as np
import pytest

from levyconv.hilbert import (
    DiagonalGenerator,
    apply_generator,
    apply_semigroup,
    inner,
    norm,
    yosida_generator,
    yosida_resolvent,
)


def random_gen(rng, d=None, contraction=False):
    d = d or int(rng.integers(1, 9))
    hi = 0.0 if contraction else 1.0
    return DiagonalGenerator(eigenvalues=rng.uniform(-3.0, hi, size=d))


def test_alpha_is_max_eigenvalue_not_clamped():
    gen = DiagonalGenerator(eigenvalues=np.array([-2.0, 0.5]))
    assert gen.alpha == 0.5
    assert not gen.is_contraction
    assert DiagonalGenerator(eigenvalues=np.array([-1.0, -0.1])).is_contraction


def test_semigroup_identity_at_zero():
    rng = np.random.default_rng(0)
    gen = random_gen(rng)
    x = rng.standard_normal(gen.dim)
    assert np.array_equal(apply_semigroup(gen, 0.0, x), x)


def test_semigroup_scalar_example():
    gen = DiagonalGenerator(eigenvalues=np.array([-1.0]))
    out = apply_semigroup(gen, np.log(2.0), np.array([2.0]))
    assert abs(out[0] - 1.0) < 1e-15


def test_semigroup_against_high_precision_oracle():
    # independent per-coordinate evaluation at 50 digits
    rng = np.random.default_rng(1)
    mpmath.mp.dps = 50
    for _ in range(100):
        gen = random_gen(rng)
        t = float(rng.uniform(0, 3))
        x = rng.standard_normal(gen.dim)
        got = apply_semigroup(gen, t, x)
        for i in range(gen.dim):
            want = float(mpmath.e ** (mpmath.mpf(gen.eigenvalues[i]) * mpmath.mpf(t)) * mpmath.mpf(x[i]))
            assert got[i] == pytest.approx(want, rel=1e-12, abs=1e-300)


def test_semigroup_rejects_negative_time():
    gen = DiagonalGenerator(eigenvalues=np.array([0.0]))
    with pytest.raises(ValueError):
        apply_semigroup(gen, -0.1, np.array([1.0]))


def test_semigroup_law_and_growth_bound():
    rng = np.random.default_rng(2)
    for _ in range(1000):
        gen = random_gen(rng, d=4)
        t, s = rng.uniform(0, 2, size=2)
        x = rng.standard_normal(4)
        once = apply_semigroup(gen, t + s, x)
        twice = apply_semigroup(gen, t, apply_semigroup(gen, s, x))
        assert np.allclose(once, twice, rtol=1e-12, atol=1e-300)
        assert norm(apply_semigroup(gen, t, x)) <= np.exp(gen.alpha * t) * norm(x) * (1 + 1e-12)


def test_inner_product_symmetric_bilinear():
    rng = np.random.default_rng(3)
    x, y, z = rng.standard_normal((3, 6))
    assert inner(x, y) == inner(y, x)
    assert inner(2.0 * x + y, z) == pytest.approx(2.0 * inner(x, z) + inner(y, z), rel=1e-12)
    assert norm(x) >= 0


def test_resolvent_identity_for_zero_generator():
    gen = DiagonalGenerator(eigenvalues=np.zeros(3))
    x = np.array([1.0, -2.0, 0.5])
    assert np.allclose(yosida_resolvent(gen, 3.0, x), x, rtol=1e-15)


def test_resolvent_scalar_example():
    gen = DiagonalGenerator(eigenvalues=np.array([-1.0]))
    out = yosida_resolvent(gen, 1.0, np.array([2.0]))
    assert out[0] == pytest.approx(1.0, abs=1e-15)


def test_resolvent_contraction_bound():
    rng = np.random.default_rng(4)
    for _ in range(10_000):
        gen = random_gen(rng, contraction=True)
        lam = float(rng.uniform(0.01, 100))
        x = rng.standard_normal(gen.dim)
        assert norm(yosida_resolvent(gen, lam, x)) <= norm(x) * (1 + 1e-12)


def test_resolvent_rejects_bad_lambda():
    gen = DiagonalGenerator(eigenvalues=np.array([0.5, -1.0]))
    with pytest.raises(ValueError):
        yosida_resolvent(gen, 0.5, np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        yosida_resolvent(gen, -1.0, np.array([1.0, 1.0]))


def test_yosida_generator_examples():
    gen = DiagonalGenerator(eigenvalues=np.array([-2.0]))
    assert yosida_generator(gen, 2.0, np.array([1.0]))[0] == pytest.approx(-1.0, abs=1e-15)
    assert np.array_equal(yosida_generator(gen, 2.0, np.zeros(1)), np.zeros(1))


def test_yosida_generator_dissipative_for_contraction():
    rng = np.random.default_rng(5)
    for _ in range(2000):
        gen = random_gen(rng, contraction=True)
        lam = float(rng.uniform(0.01, 50))
        x = rng.standard_normal(gen.dim)
        assert inner(x, yosida_generator(gen, lam, x)) <= 1e-12 * inner(x, x)


def test_yosida_generator_converges_to_generator():
    rng = np.random.default_rng(6)
    gen = random_gen(rng, d=5)
    x = rng.standard_normal(5)
    ax = apply_generator(gen, x)
    errs = [norm(yosida_generator(gen, 10.0**k, x) - ax) for k in range(1, 5)]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-2 * max(norm(ax), 1.0)


def test_resolvent_commutes_with_semigroup():
    rng = np.random.default_rng(7)
    for _ in range(500):
        gen = random_gen(rng, d=4)
        lam = gen.alpha + float(rng.uniform(0.5, 10)) + 1.0
        t = float(rng.uniform(0, 2))
        x = rng.standard_normal(4)
        a = yosida_resolvent(gen, lam, apply_semigroup(gen, t, x))
        b = apply_semigroup(gen, t, yosida_resolvent(gen, lam, x))
        assert np.allclose(a, b, rtol=1e-12, atol=1e-300)


def test_resolvent_converges_to_identity_monotonically():
    rng = np.random.default_rng(8)
    gen = random_gen(rng, d=6)
    x = rng.standard_normal(6)
    errs = [norm(yosida_resolvent(gen, 10.0**k, x) - x) for k in range(1, 7)]
    assert all(a >= b for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-4 * norm(x)


def test_laplacian_family():
    gen = DiagonalGenerator.laplacian(4, scale=0.5)
    assert np.allclose(gen.eigenvalues, [-0.5, -2.0, -4.5, -8.0])
    assert gen.is_contraction
