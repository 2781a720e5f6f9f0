"""Small dense networks with hand-written forward and backward passes.

Weights are (in_dim, out_dim); rows of a batch multiply from the left,
y = act(x @ W + b).  Everything is float64.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import Rng

ACTIVATIONS = ("identity", "relu", "tanh", "sigmoid")


def _act(name, z):
    if name == "identity":
        return z
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "tanh":
        return np.tanh(z)
    if name == "sigmoid":
        return 1.0 / (1.0 + np.exp(-z))
    raise ValueError(f"unknown activation {name!r}")


def _act_deriv(name, z):
    # derivative as a function of the pre-activation z
    if name == "identity":
        return np.ones_like(z)
    if name == "relu":
        return (z > 0.0).astype(np.float64)
    if name == "tanh":
        t = np.tanh(z)
        return 1.0 - t * t
    if name == "sigmoid":
        s = 1.0 / (1.0 + np.exp(-z))
        return s * (1.0 - s)
    raise ValueError(f"unknown activation {name!r}")


@dataclass
class Layer:
    w: np.ndarray
    b: np.ndarray
    act: str


@dataclass
class Mlp:
    layers: list

    @property
    def in_dim(self) -> int:
        return self.layers[0].w.shape[0]

    @property
    def out_dim(self) -> int:
        return self.layers[-1].w.shape[1]

    def forward(self, x):
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        y = x[None, :] if single else x
        if y.shape[1] != self.in_dim:
            raise ValueError(f"input dim {y.shape[1]}, network expects {self.in_dim}")
        for layer in self.layers:
            y = _act(layer.act, y @ layer.w + layer.b)
        return y[0] if single else y

    def params(self):
        out = []
        for layer in self.layers:
            out.append(layer.w)
            out.append(layer.b)
        return out

    def set_params(self, params):
        for i, layer in enumerate(self.layers):
            layer.w = params[2 * i]
            layer.b = params[2 * i + 1]

    def jacobian(self, x):
        """(out_dim, in_dim) Jacobian at a single input, via backprop."""
        x = np.asarray(x, dtype=np.float64)
        X = np.repeat(x[None, :], self.out_dim, axis=0)
        _, cache = forward_cached(self, X)
        seed = np.eye(self.out_dim)
        _, dx = backward(self, cache, seed)
        return dx


def build_mlp(dims, acts, rng: Rng) -> Mlp:
    """He-normal init for relu layers, Xavier-normal otherwise; zero biases."""
    if len(acts) != len(dims) - 1:
        raise ValueError("need one activation per layer")
    layers = []
    for i, act in enumerate(acts):
        fan_in, fan_out = dims[i], dims[i + 1]
        if act == "relu":
            std = np.sqrt(2.0 / fan_in)
        else:
            std = np.sqrt(2.0 / (fan_in + fan_out))
        w = std * rng.normals(fan_in * fan_out).reshape(fan_in, fan_out)
        layers.append(Layer(w, np.zeros(fan_out), act))
    return Mlp(layers)


def forward_cached(net: Mlp, X):
    """Forward pass keeping layer inputs and pre-activations for backprop."""
    X = np.asarray(X, dtype=np.float64)
    cache = []
    y = X
    for layer in net.layers:
        z = y @ layer.w + layer.b
        cache.append((y, z))
        y = _act(layer.act, z)
    return y, cache


def backward(net: Mlp, cache, d_out):
    """Gradients of a scalar loss given d(loss)/d(output).

    Returns (grads, d_input) with grads ordered like Mlp.params().
    """
    grads = [None] * (2 * len(net.layers))
    dy = np.asarray(d_out, dtype=np.float64)
    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        x, z = cache[i]
        dz = dy * _act_deriv(layer.act, z)
        grads[2 * i] = x.T @ dz
        grads[2 * i + 1] = dz.sum(axis=0)
        dy = dz @ layer.w.T
    return grads, dy


def check_finite(net: Mlp, where: str):
    for i, layer in enumerate(net.layers):
        if not (np.all(np.isfinite(layer.w)) and np.all(np.isfinite(layer.b))):
            raise FloatingPointError(f"non-finite parameters in layer {i} after {where}")
