import numpy as np
import pytest

from geoverb import autodiff as ad
from geoverb.autodiff import Tensor

SEEDS = range(5)


def rel_err(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(a) + np.linalg.norm(b), 1e-12)


def _outputs(build, xs):
    out = build(*xs)
    return out if isinstance(out, tuple) else (out,)


def check(build, arrays, seed, tol=1e-4):
    """Compare reverse-mode gradients of sum(build(*xs) * r) with central differences."""
    rng = np.random.default_rng(seed + 1000)
    xs = [Tensor(a, requires_grad=True) for a in arrays]
    weights = [rng.standard_normal(o.shape) for o in _outputs(build, xs)]

    def loss_tensor():
        terms = [ad.tsum(ad.mul(o, w)) for o, w in zip(_outputs(build, xs), weights)]
        total = terms[0]
        for t in terms[1:]:
            total = ad.add(total, t)
        return total

    grads = ad.grad(loss_tensor(), xs)
    for x, g in zip(xs, grads):
        num = ad.numeric_grad(lambda: float(loss_tensor().value), x.value)
        assert rel_err(g, num) < tol


def _r(rng, *shape):
    return rng.standard_normal(shape)


def _away_from_zero(rng, *shape):
    x = rng.standard_normal(shape)
    return np.where(np.abs(x) < 0.1, x + np.sign(x + 1e-12) * 0.2, x)


CASES = {
    "add": (lambda a, b: ad.add(a, b), lambda r: [_r(r, 3, 4), _r(r, 4)]),
    "sub": (lambda a, b: ad.sub(a, b), lambda r: [_r(r, 3, 4), _r(r, 3, 1)]),
    "mul": (lambda a, b: ad.mul(a, b), lambda r: [_r(r, 2, 3, 4), _r(r, 3, 4)]),
    "div": (lambda a, b: ad.div(a, b), lambda r: [_r(r, 3, 4), 1.5 + np.abs(_r(r, 3, 4))]),
    "exp": (ad.exp, lambda r: [_r(r, 5)]),
    "log": (ad.log, lambda r: [0.5 + np.abs(_r(r, 5))]),
    "tanh": (ad.tanh, lambda r: [_r(r, 5)]),
    "sigmoid": (ad.sigmoid, lambda r: [_r(r, 5)]),
    "relu": (ad.relu, lambda r: [_away_from_zero(r, 6)]),
    "square": (ad.square, lambda r: [_r(r, 5)]),
    "sqrt": (ad.sqrt, lambda r: [0.5 + np.abs(_r(r, 5))]),
    "clamp_min": (lambda x: ad.clamp_min(x, 0.05), lambda r: [_away_from_zero(r, 6)]),
    "sum": (lambda x: ad.tsum(x, axis=1), lambda r: [_r(r, 3, 4)]),
    "reshape": (lambda x: ad.reshape(x, (4, 3)), lambda r: [_r(r, 3, 4)]),
    "transpose": (lambda x: ad.transpose(x, (2, 0, 1)), lambda r: [_r(r, 2, 3, 4)]),
    "gather": (lambda x: ad.getitem(x, np.array([[0, 2], [2, 1]])), lambda r: [_r(r, 3, 2)]),
    "concat": (lambda a, b: ad.concat([a, b], axis=0), lambda r: [_r(r, 2, 3), _r(r, 4, 3)]),
    "pad": (lambda x: ad.pad_axis(x, 2, 1, 0), lambda r: [_r(r, 3, 2)]),
    "roll": (lambda x: ad.roll(x, 2, 0), lambda r: [_r(r, 5, 2)]),
    "matmul": (lambda a, b: ad.matmul(a, b), lambda r: [_r(r, 2, 3, 4), _r(r, 4, 5)]),
    "softmax": (lambda x: ad.softmax(x, axis=-1), lambda r: [_r(r, 3, 5)]),
    "log_softmax": (lambda x: ad.log_softmax(x, axis=0), lambda r: [_r(r, 4, 3)]),
    "layer_norm": (lambda x, g, b: ad.layer_norm(x, g, b), lambda r: [_r(r, 3, 6), _r(r, 6), _r(r, 6)]),
    "depthwise_conv1d": (ad.depthwise_conv1d, lambda r: [_r(r, 2, 7, 3), _r(r, 5, 3)]),
    "conv1d": (ad.conv1d, lambda r: [_r(r, 2, 6, 3), _r(r, 3, 3, 4)]),
    "frame": (lambda x: ad.frame(x, 4, 2), lambda r: [_r(r, 2, 11)]),
    "overlap_add": (lambda x: ad.overlap_add(x, 3), lambda r: [_r(r, 2, 4, 5)]),
}

COMPOSITES = {
    "mean": (lambda x: ad.mean(x, axis=0), lambda r: [_r(r, 3, 4)]),
    "swish": (ad.swish, lambda r: [_r(r, 5)]),
    "swap_last": (ad.swap_last, lambda r: [_r(r, 2, 3, 4)]),
    "linear": (ad.linear, lambda r: [_r(r, 3, 4), _r(r, 4, 2), _r(r, 2)]),
    "cmul": (ad.cmul, lambda r: [_r(r, 3), _r(r, 3), _r(r, 3), _r(r, 3)]),
    "cmatmul": (ad.cmatmul, lambda r: [_r(r, 2, 3), _r(r, 2, 3), _r(r, 3, 4), _r(r, 3, 4)]),
    "softmax_matmul_conv": (
        lambda x, w, k: ad.softmax(ad.matmul(ad.conv1d(x, k), w), axis=-1),
        lambda r: [_r(r, 5, 3), _r(r, 2, 4), _r(r, 3, 3, 2)],
    ),
}


def test_every_registered_primitive_is_checked():
    assert set(ad._VJP) == set(CASES)


@pytest.mark.parametrize("seed", SEEDS)
@pytest.mark.parametrize("name", sorted(CASES))
def test_primitive_gradient(name, seed):
    build, make = CASES[name]
    check(build, make(np.random.default_rng(seed)), seed)


@pytest.mark.parametrize("seed", SEEDS)
@pytest.mark.parametrize("name", sorted(COMPOSITES))
def test_composite_gradient(name, seed):
    build, make = COMPOSITES[name]
    check(build, make(np.random.default_rng(seed)), seed)


def test_square_at_three():
    x = Tensor(3.0, requires_grad=True)
    ad.backward(ad.square(x))
    assert x.grad == 6.0


def test_constant_has_zero_gradient():
    x = Tensor(np.ones(3), requires_grad=True)
    y = Tensor(np.ones(3), requires_grad=True)
    loss = ad.tsum(ad.mul(Tensor(np.arange(3.0)), 2.0))
    assert not loss.requires_grad
    gx, gy = ad.grad(ad.add(loss, ad.tsum(ad.mul(y, 0.0))), [x, y])
    assert not gx.any() and not gy.any()


def test_shared_subexpression_accumulates():
    x = Tensor(np.array([1.5, -2.0]), requires_grad=True)
    y = ad.mul(x, x)
    ad.backward(ad.tsum(ad.add(y, y)))
    np.testing.assert_allclose(x.grad, 4 * x.value)


def test_unsupported_primitive_named():
    x = Tensor(np.ones(2), requires_grad=True)
    bad = ad._node(x.value * 2, (x,), "mystery_op")
    with pytest.raises(ad.UnsupportedPrimitiveError, match="mystery_op"):
        ad.backward(ad.tsum(bad))


def test_backward_needs_scalar():
    x = Tensor(np.ones(2), requires_grad=True)
    with pytest.raises(ValueError):
        ad.backward(ad.mul(x, 2.0))


def test_grad_shapes_match_values():
    rng = np.random.default_rng(0)
    a = Tensor(rng.standard_normal((3, 4)), requires_grad=True)
    b = Tensor(rng.standard_normal((4,)), requires_grad=True)
    for p, g in zip((a, b), ad.grad(ad.tsum(ad.tanh(ad.add(a, b))), [a, b])):
        assert g.shape == p.shape


def test_graph_is_acyclic():
    x = Tensor(np.ones(3), requires_grad=True)
    y = ad.tanh(ad.mul(x, 2.0))
    z = ad.tsum(ad.add(y, ad.exp(y)))
    order = ad._topo(z)
    pos = {id(n): i for i, n in enumerate(order)}
    for n in order:
        for p in n.parents:
            assert pos[id(p)] < pos[id(n)]
