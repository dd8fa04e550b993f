"""Tests for the tape-based reverse-mode engine."""

from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from qganfinance.critic import tape as ad
from qganfinance.errors import StaleTape, ValidationError


def test_gradient_of_polynomial() -> None:
    """d/dx sum(x * x + 3x) = 2x + 3."""
    x0 = np.array([-1.5, 0.25, 2.0])
    with ad.Tape() as tape:
        x = tape.leaf(x0, "x")
        y = ad.sum_axis(x * x + x * 3.0)

    (gx,) = ad.grad(y, [x])
    np.testing.assert_allclose(gx.value, 2 * x0 + 3)


def test_second_derivative_through_recorded_reverse_pass() -> None:
    """Differentiating the recorded gradient of sum(x^3) gives 6x."""
    x0 = np.array([0.5, -2.0, 1.25])
    with ad.Tape() as tape:
        x = tape.leaf(x0, "x")
        y = ad.sum_axis(x * x * x)
        (gx,) = ad.grad(y, [x], create_graph=True)
        total = ad.sum_axis(gx)

    np.testing.assert_allclose(gx.value, 3 * x0**2)
    (hx,) = ad.grad(total, [x])
    np.testing.assert_allclose(hx.value, 6 * x0)


def test_einsum_and_broadcast_gradients() -> None:
    """Matrix product plus broadcast bias has the textbook gradients."""
    rng = np.random.default_rng(0)
    a0, w0, b0 = rng.normal(size=(4, 3)), rng.normal(size=(2, 3)), rng.normal(size=(2,))
    up = rng.normal(size=(4, 2))
    with ad.Tape() as tape:
        a, w, b = tape.leaf(a0, "a"), tape.leaf(w0, "w"), tape.leaf(b0, "b")
        out = ad.add(ad.einsum("bi,oi->bo", a, w), b)

    ga, gw, gb = ad.grad(out, [a, w, b], up)
    np.testing.assert_allclose(ga.value, up @ w0)
    np.testing.assert_allclose(gw.value, up.T @ a0)
    np.testing.assert_allclose(gb.value, up.sum(axis=0))


def test_gather_scatter_are_adjoint() -> None:
    """<gather(x), y> equals <x, scatter(y)> for overlapping windows."""
    rng = np.random.default_rng(1)
    index = 2 * np.arange(3)[:, None] + np.arange(3)[None, :]
    x = rng.normal(size=(2, 7))
    y = rng.normal(size=(2, 3, 3))

    lhs = np.sum(ad.gather(ad.Var(x), index).value * y)
    rhs = np.sum(x * ad.scatter(ad.Var(y), index, 7).value)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_pad_and_crop_gradients() -> None:
    """Padding passes gradients through to the original entries only."""
    with ad.Tape() as tape:
        x = tape.leaf(np.arange(4.0).reshape(1, 4), "x")
        padded = ad.pad_last(x, 2, 1)
        out = ad.sum_axis(ad.mul(padded, ad.Var(np.arange(7.0))))

    (gx,) = ad.grad(out, [x])
    np.testing.assert_allclose(gx.value, [[2.0, 3.0, 4.0, 5.0]])


def test_relu_and_sqrt_at_zero() -> None:
    """The ReLU kink and sqrt(0) both get derivative 0."""
    with ad.Tape() as tape:
        x = tape.leaf(np.array([-1.0, 0.0, 2.0]), "x")
        y = ad.sum_axis(ad.relu(x))
        z = tape.leaf(np.zeros(2), "z")
        r = ad.sum_axis(ad.sqrt(z))

    np.testing.assert_allclose(ad.grad(y, [x])[0].value, [0.0, 0.0, 1.0])
    np.testing.assert_allclose(ad.grad(r, [z])[0].value, [0.0, 0.0])


def test_unreachable_leaf_gets_zeros() -> None:
    """Leaves that do not influence the output have zero gradient."""
    with ad.Tape() as tape:
        x = tape.leaf(np.ones(3), "x")
        unused = tape.leaf(np.ones((2, 2)), "unused")
        y = ad.sum_axis(x)

    gx, gu = ad.grad(y, [x, unused])
    np.testing.assert_allclose(gx.value, 1.0)
    assert gu.shape == (2, 2)
    assert not np.any(gu.value)


def test_mutated_leaf_is_detected() -> None:
    """Changing a recorded leaf in place makes the tape stale."""
    values = np.array([1.0, 2.0])
    with ad.Tape() as tape:
        x = tape.leaf(values, "x")
        y = ad.sum_axis(x * x)
    x.value[0] = 5.0

    with pytest.raises(StaleTape):
        ad.grad(y, [x])


def test_replay_recomputes_values() -> None:
    """Replaying with a new leaf value refreshes the output and its gradient."""
    with ad.Tape() as tape:
        x = tape.leaf(np.array([1.0, 2.0]), "x")
        tape.output = ad.sum_axis(x * x)

    out = tape.replay(x=np.array([3.0, 4.0]))
    assert float(out.value) == pytest.approx(25.0)
    np.testing.assert_allclose(ad.grad(out, [x])[0].value, [6.0, 8.0])
    with pytest.raises(ValidationError):
        tape.replay(y=np.zeros(2))
    with pytest.raises(ValidationError):
        tape.replay(x=np.zeros(3))


def test_nothing_is_recorded_outside_a_tape() -> None:
    """Primitives on constants or under no_recording leave the tape untouched."""
    with ad.Tape() as tape:
        x = tape.leaf(np.ones(2), "x")
        recorded = len(tape)
        with ad.no_recording():
            ad.sum_axis(x * x)
        ad.sum_axis(ad.Var(np.ones(2)) * 2.0)

    assert len(tape) == recorded


def test_recording_tape_is_local_to_its_thread() -> None:
    """Another thread sees no active tape while this one records, and records nothing onto it."""
    with ad.Tape() as tape:
        x = tape.leaf(np.ones(3), "x")
        before = len(tape)
        with ThreadPoolExecutor(max_workers=1) as pool:
            other = pool.submit(ad.active_tape).result()
            pool.submit(lambda: ad.sum_axis(ad.Var(np.ones(3)) * 2.0)).result()

        assert other is None
        assert ad.active_tape() is tape
        assert len(tape) == before
        assert x.tape is tape
    assert ad.active_tape() is None
