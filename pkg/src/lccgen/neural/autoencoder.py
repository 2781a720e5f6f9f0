"""Autoencoder training: embeds data into the latent space anchors live in."""

from __future__ import annotations

import numpy as np

from ..rng import Rng
from .adam import adam_step, init_adam
from .net import Mlp, build_mlp, backward, check_finite, forward_cached


class TrainingDivergedError(Exception):
    pass


def reconstruction_mse(encoder: Mlp, decoder: Mlp, data) -> float:
    """Mean over all entries of the squared reconstruction error."""
    X = np.asarray(data, dtype=np.float64)
    diff = decoder.forward(encoder.forward(X)) - X
    return float(np.mean(diff * diff))


def ae_loss_and_grads(encoder: Mlp, decoder: Mlp, batch):
    X = np.asarray(batch, dtype=np.float64)
    z, enc_cache = forward_cached(encoder, X)
    xhat, dec_cache = forward_cached(decoder, z)
    diff = xhat - X
    loss = float(np.mean(diff * diff))
    d_xhat = 2.0 * diff / diff.size
    dec_grads, dz = backward(decoder, dec_cache, d_xhat)
    enc_grads, _ = backward(encoder, enc_cache, dz)
    return loss, enc_grads, dec_grads


def train_autoencoder(
    data,
    latent_dim: int,
    hidden: int = 64,
    epochs: int = 20,
    batch: int = 64,
    lr: float = 2e-4,
    activation: str = "tanh",
    seed: int = 0,
):
    """Returns (encoder, decoder, per-epoch loss history).

    Hidden layers use `activation`, outputs are linear; `activation="identity"`
    gives a purely linear autoencoder.
    """
    X = np.asarray(data, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("data must be a nonempty (n, dim) array")
    n, dim = X.shape
    rng = Rng(seed)
    encoder = build_mlp([dim, hidden, latent_dim], [activation, "identity"], rng)
    decoder = build_mlp([latent_dim, hidden, dim], [activation, "identity"], rng)
    enc_state = init_adam(encoder.params())
    dec_state = init_adam(decoder.params())
    history = []
    for epoch in range(epochs):
        order = np.argsort(rng.uniforms(n), kind="stable")
        for start in range(0, n, batch):
            idx = order[start : start + batch]
            loss, enc_grads, dec_grads = ae_loss_and_grads(encoder, decoder, X[idx])
            if not np.isfinite(loss):
                raise TrainingDivergedError(f"non-finite loss at epoch {epoch}")
            new_p, _ = adam_step(encoder.params(), enc_grads, enc_state, lr=lr)
            encoder.set_params(new_p)
            new_p, _ = adam_step(decoder.params(), dec_grads, dec_state, lr=lr)
            decoder.set_params(new_p)
            check_finite(encoder, f"epoch {epoch}")
            check_finite(decoder, f"epoch {epoch}")
        history.append(reconstruction_mse(encoder, decoder, X))
    return encoder, decoder, history
