"""Adversarial training where the generator consumes anchor codings.

The generator maps an m-dimensional sum-to-one coding straight to data
space; the discriminator scores data-space points.  One discriminator
ascent step alternates with one generator descent step:

    J_D = mean phi(D(x)) + mean phi(1 - D(G(g)))     (ascend in D)
    J_G = mean phi(1 - D(G(g)))                       (descend in G)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..lcc.core import AnchorSet
from ..lcc.sampling import SamplerConfig, neighbor_table, _draw_on_neighborhood
from ..rng import Rng
from .adam import AdamState, adam_step, init_adam
from .net import Mlp, backward, build_mlp, check_finite, forward_cached

EPS_PHI = 1e-7


@dataclass
class MeasuringFunction:
    """phi applied to discriminator scores; "log" clamps its argument to
    [EPS_PHI, 1 - EPS_PHI] before the log."""

    kind: str = "log"

    def __post_init__(self):
        if self.kind not in ("log", "identity"):
            raise ValueError(f"phi must be 'log' or 'identity', got {self.kind!r}")

    def value(self, t):
        if self.kind == "identity":
            return t
        return np.log(np.clip(t, EPS_PHI, 1.0 - EPS_PHI))

    def deriv(self, t):
        if self.kind == "identity":
            return np.ones_like(t)
        inside = (t > EPS_PHI) & (t < 1.0 - EPS_PHI)
        return np.where(inside, 1.0 / np.clip(t, EPS_PHI, 1.0 - EPS_PHI), 0.0)


@dataclass
class GanModel:
    generator: Mlp
    discriminator: Mlp
    phi: MeasuringFunction
    gen_state: AdamState
    disc_state: AdamState
    lr: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999


class GanDivergedError(Exception):
    pass


def build_gan(
    data_dim: int,
    m: int,
    phi: str = "log",
    hidden: int = 128,
    lr: float = 2e-4,
    beta1: float = 0.5,
    beta2: float = 0.999,
    generator_output: str = "identity",
    seed: int = 0,
) -> GanModel:
    rng = Rng(seed)
    measuring = MeasuringFunction(phi)
    gen = build_mlp([m, hidden, hidden, data_dim], ["relu", "relu", generator_output], rng)
    disc_out = "sigmoid" if phi == "log" else "identity"
    disc = build_mlp([data_dim, hidden, hidden, 1], ["relu", "relu", disc_out], rng)
    return GanModel(
        gen, disc, measuring, init_adam(gen.params()), init_adam(disc.params()),
        lr=lr, beta1=beta1, beta2=beta2,
    )


def disc_objective_and_grads(gan: GanModel, reals, codings):
    """J_D and its gradient in the discriminator parameters."""
    n = reals.shape[0]
    fakes = gan.generator.forward(codings)
    score_r, cache_r = forward_cached(gan.discriminator, reals)
    score_f, cache_f = forward_cached(gan.discriminator, fakes)
    value = float(np.mean(gan.phi.value(score_r)) + np.mean(gan.phi.value(1.0 - score_f)))
    d_r = gan.phi.deriv(score_r) / n
    d_f = -gan.phi.deriv(1.0 - score_f) / codings.shape[0]
    grads_r, _ = backward(gan.discriminator, cache_r, d_r)
    grads_f, _ = backward(gan.discriminator, cache_f, d_f)
    return value, [a + b for a, b in zip(grads_r, grads_f)]


def gen_objective_and_grads(gan: GanModel, codings):
    """J_G and its gradient in the generator parameters (discriminator frozen)."""
    n = codings.shape[0]
    fakes, cache_g = forward_cached(gan.generator, codings)
    score_f, cache_d = forward_cached(gan.discriminator, fakes)
    value = float(np.mean(gan.phi.value(1.0 - score_f)))
    d_f = -gan.phi.deriv(1.0 - score_f) / n
    _, d_fakes = backward(gan.discriminator, cache_d, d_f)
    grads, _ = backward(gan.generator, cache_g, d_fakes)
    return value, grads


def _sample_coding_batch(table, m, config: SamplerConfig, rng: Rng, n: int):
    G = np.empty((n, m))
    for i in range(n):
        center = rng.randint(m)
        G[i] = _draw_on_neighborhood(table[center], m, config, rng).weights
    return G


def train_gan(
    data,
    anchors: AnchorSet,
    sampler_config: SamplerConfig,
    gan: GanModel,
    iters: int,
    batch: int = 64,
    seed: int = 0,
):
    """Runs the alternating updates in place; returns (gan, trace) where
    trace[i] = (d_objective, g_objective) as evaluated before each update."""
    X = np.asarray(data, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("data must be a nonempty (n, dim) array")
    if X.shape[1] != gan.discriminator.in_dim:
        raise ValueError("data dim does not match the discriminator input")
    if anchors.m != gan.generator.in_dim:
        raise ValueError("anchor count does not match the generator input")
    n = X.shape[0]
    rng = Rng(seed)
    table = neighbor_table(anchors, sampler_config.d)
    trace = []
    for it in range(iters):
        codings = _sample_coding_batch(table, anchors.m, sampler_config, rng, batch)
        idx = np.minimum((rng.uniforms(batch) * n).astype(np.int64), n - 1)
        d_val, d_grads = disc_objective_and_grads(gan, X[idx], codings)
        if not np.isfinite(d_val):
            raise GanDivergedError(f"non-finite discriminator objective at iteration {it}")
        new_p, _ = adam_step(
            gan.discriminator.params(), [-g for g in d_grads], gan.disc_state,
            lr=gan.lr, beta1=gan.beta1, beta2=gan.beta2,
        )
        gan.discriminator.set_params(new_p)
        check_finite(gan.discriminator, f"iteration {it}")

        codings = _sample_coding_batch(table, anchors.m, sampler_config, rng, batch)
        g_val, g_grads = gen_objective_and_grads(gan, codings)
        if not np.isfinite(g_val):
            raise GanDivergedError(f"non-finite generator objective at iteration {it}")
        new_p, _ = adam_step(
            gan.generator.params(), g_grads, gan.gen_state,
            lr=gan.lr, beta1=gan.beta1, beta2=gan.beta2,
        )
        gan.generator.set_params(new_p)
        check_finite(gan.generator, f"iteration {it}")
        trace.append((d_val, g_val))
    return gan, trace
