from .adam import AdamState, adam_step, init_adam
from .autoencoder import TrainingDivergedError, reconstruction_mse, train_autoencoder
from .gan import (
    EPS_PHI,
    GanDivergedError,
    GanModel,
    MeasuringFunction,
    build_gan,
    disc_objective_and_grads,
    gen_objective_and_grads,
    train_gan,
)
from .net import ACTIVATIONS, Layer, Mlp, backward, build_mlp, forward_cached
