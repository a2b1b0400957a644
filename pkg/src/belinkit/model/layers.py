"""Forward/backward primitives for a float64 numpy transformer.

Each ``*_forward`` returns ``(output, cache)``; the matching ``*_backward``
consumes the upstream gradient and the cache and returns input gradients
followed by parameter gradients.
"""

import math

import numpy as np

NEG_INF = -1e30
LN_EPS = 1e-5
_GELU_C = math.sqrt(2.0 / math.pi)


def sinusoidal_positions(n_positions: int, d_model: int) -> np.ndarray:
    pos = np.arange(n_positions, dtype=np.float64)[:, None]
    i = np.arange(d_model)[None, :]
    angle = pos / np.power(10000.0, (2 * (i // 2)) / d_model)
    return np.where(i % 2 == 0, np.sin(angle), np.cos(angle))


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    z = x - x.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def log_softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    z = x - x.max(axis=axis, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=axis, keepdims=True))


def _sum_leading(x):
    return x.reshape(-1, x.shape[-1]).sum(axis=0)


def linear_forward(x, W, b):
    return x @ W + b, x


def linear_backward(dy, x, W):
    dx = dy @ W.T
    dW = x.reshape(-1, x.shape[-1]).T @ dy.reshape(-1, dy.shape[-1])
    return dx, dW, _sum_leading(dy)


def layernorm_forward(x, g, b):
    mu = x.mean(axis=-1, keepdims=True)
    var = ((x - mu) ** 2).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + LN_EPS)
    xhat = (x - mu) * inv
    return xhat * g + b, (xhat, inv, g)


def layernorm_backward(dy, cache):
    xhat, inv, g = cache
    dxhat = dy * g
    dx = inv * (
        dxhat
        - dxhat.mean(axis=-1, keepdims=True)
        - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
    )
    return dx, _sum_leading(dy * xhat), _sum_leading(dy)


def gelu_forward(x):
    t = np.tanh(_GELU_C * (x + 0.044715 * x**3))
    return 0.5 * x * (1.0 + t), (x, t)


def gelu_backward(dy, cache):
    x, t = cache
    du = _GELU_C * (1.0 + 3 * 0.044715 * x**2)
    return dy * (0.5 * (1.0 + t) + 0.5 * x * (1.0 - t**2) * du)


def _split_heads(x, h):
    B, T, d = x.shape
    return x.reshape(B, T, h, d // h).transpose(0, 2, 1, 3)


def _merge_heads(x):
    B, h, T, dk = x.shape
    return x.transpose(0, 2, 1, 3).reshape(B, T, h * dk)


def attention_forward(xq, xkv, p, mask, n_heads):
    """Multi-head attention.

    ``p`` maps ``Wq, Wk, Wv, Wo, bq, bk, bv, bo`` to arrays; ``mask`` is a
    boolean array broadcastable to ``(B, heads, Tq, Tk)``, True where a query
    may attend to a key.
    """
    q, _ = linear_forward(xq, p["Wq"], p["bq"])
    k, _ = linear_forward(xkv, p["Wk"], p["bk"])
    v, _ = linear_forward(xkv, p["Wv"], p["bv"])
    Q, K, V = (_split_heads(t, n_heads) for t in (q, k, v))
    scale = 1.0 / math.sqrt(Q.shape[-1])
    scores = np.where(mask, (Q @ K.transpose(0, 1, 3, 2)) * scale, NEG_INF)
    A = softmax(scores)
    O = _merge_heads(A @ V)
    out, _ = linear_forward(O, p["Wo"], p["bo"])
    return out, (xq, xkv, Q, K, V, A, O, scale, n_heads)


def attention_backward(dout, cache, p):
    """Returns ``(dxq, dxkv, grads)``; for self-attention add the two."""
    xq, xkv, Q, K, V, A, O, scale, n_heads = cache
    g = {}
    dO, g["Wo"], g["bo"] = linear_backward(dout, O, p["Wo"])
    dO = _split_heads(dO, n_heads)
    dA = dO @ V.transpose(0, 1, 3, 2)
    dV = A.transpose(0, 1, 3, 2) @ dO
    dS = A * (dA - (dA * A).sum(axis=-1, keepdims=True)) * scale
    dQ = dS @ K
    dK = dS.transpose(0, 1, 3, 2) @ Q
    dxq, g["Wq"], g["bq"] = linear_backward(_merge_heads(dQ), xq, p["Wq"])
    dxk, g["Wk"], g["bk"] = linear_backward(_merge_heads(dK), xkv, p["Wk"])
    dxv, g["Wv"], g["bv"] = linear_backward(_merge_heads(dV), xkv, p["Wv"])
    return dxq, dxk + dxv, g


def feedforward_forward(x, p):
    h, c1 = linear_forward(x, p["W1"], p["b1"])
    a, cg = gelu_forward(h)
    y, c2 = linear_forward(a, p["W2"], p["b2"])
    return y, (c1, cg, c2)


def feedforward_backward(dy, cache, p):
    c1, cg, c2 = cache
    g = {}
    da, g["W2"], g["b2"] = linear_backward(dy, c2, p["W2"])
    dh = gelu_backward(da, cg)
    dx, g["W1"], g["b1"] = linear_backward(dh, c1, p["W1"])
    return dx, g
