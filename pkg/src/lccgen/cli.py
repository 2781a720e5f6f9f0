"""Batch pipeline driver.

Each subcommand reads the config (flags override file keys), consumes the
artifacts earlier stages left in the output directory, and writes its own
artifacts there.  A single --seed drives every stage deterministically:
the data seed is the base itself, and each stage derives its own stream.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .bounds import (
    mixing_gap,
    random_affine,
    random_configuration,
    random_quadratic,
    tangent_mixing_gap,
)
from .config import ConfigError, apply_overrides, load_config
from .datasets import make_ring, make_swiss_roll, load_mnist_idx
from .lcc.core import AnchorSet, LccConfig, learn_anchors
from .lcc.sampling import SamplerConfig, interpolate, sample_coding, sample_coding_pair
from .metrics import median_pairwise_distance, mmd2, pearson_nn
from .neural.autoencoder import train_autoencoder
from .neural.gan import build_gan, train_gan
from .rng import Rng, stage_seed
from .serialize import (
    anchors_to_csv,
    codings_to_csv,
    fmt_float,
    kv_to_csv,
    load_anchors,
    matrix_to_csv,
    load_model,
    save_anchors,
    save_model,
    scatter_image,
    tile_images,
    write_pgm,
)

_TAG_AE, _TAG_LCC, _TAG_GAN_INIT, _TAG_GAN_TRAIN = 1, 2, 3, 4
_TAG_SAMPLE, _TAG_INTERP, _TAG_VERIFY, _TAG_EVAL, _TAG_HELDOUT = 5, 6, 7, 8, 9


class CliError(Exception):
    pass


def _dataset(cfg, seed):
    d = cfg["data"]
    kind = d["kind"]
    if kind == "ring":
        return make_ring(d["n"], d["radius"], d["noise_sigma"], seed)
    if kind == "swiss_roll":
        return make_swiss_roll(d["n"], d["noise_sigma"], seed)
    if kind == "mnist":
        if not d["images"]:
            raise ConfigError("missing config key [data] images (required for kind=mnist)")
        return load_mnist_idx(
            d["images"],
            d["labels"] or None,
            limit=d["limit"] or None,
            downsample_to=d["downsample"] or None,
        )
    raise ConfigError(f"unknown config value [data] kind={kind!r}")


def _need(path, producer):
    if not os.path.exists(path):
        raise CliError(f"missing artifact {path}; run `lccgen {producer}` first")
    return path


def _loss_csv(path, header, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i, row in enumerate(rows):
            cells = [str(i)] + [fmt_float(v) for v in row]
            fh.write(",".join(cells) + "\n")


def cmd_train_ae(cfg, base_seed, out):
    data = _dataset(cfg, base_seed)
    a = cfg["autoencoder"]
    encoder, decoder, history = train_autoencoder(
        data.samples,
        latent_dim=a["latent_dim"],
        hidden=a["hidden"],
        epochs=a["epochs"],
        batch=a["batch"],
        lr=a["lr"],
        activation=a["activation"],
        seed=stage_seed(base_seed, _TAG_AE),
    )
    save_model(os.path.join(out, "ae_encoder.bin"), encoder)
    save_model(os.path.join(out, "ae_decoder.bin"), decoder)
    _loss_csv(os.path.join(out, "ae_losses.csv"), ["epoch", "loss"], [(v,) for v in history])
    print(f"train-ae: {len(history)} epochs, final loss "
          f"{history[-1]:.6g}" if history else "train-ae: 0 epochs")
    return 0


def cmd_learn_lcc(cfg, base_seed, out):
    data = _dataset(cfg, base_seed)
    encoder = load_model(_need(os.path.join(out, "ae_encoder.bin"), "train-ae"))
    embeddings = encoder.forward(data.samples)
    c = cfg["lcc"]
    lcc_cfg = LccConfig(
        m=c["m"], d=c["d"], q=c["q"], l_h=c["l_h"], l_q=c["l_q"],
        coding_tol=c["coding_tol"], anchor_tol=c["anchor_tol"],
        max_outer_iters=c["max_outer_iters"], seed=stage_seed(base_seed, _TAG_LCC),
    )
    trace = []
    anchors, codings = learn_anchors(embeddings, lcc_cfg, trace=trace)
    save_anchors(os.path.join(out, "anchors.bin"), anchors)
    anchors_to_csv(os.path.join(out, "anchors.csv"), anchors)
    codings_to_csv(os.path.join(out, "codings.csv"), codings)
    _loss_csv(os.path.join(out, "lcc_objective.csv"), ["iter", "objective"],
              [(v,) for v in trace])
    print(f"learn-lcc: m={anchors.m} d_b={anchors.d_b}, "
          f"objective {trace[0]:.6g} -> {trace[-1]:.6g} in {len(trace)} iters"
          if trace else "learn-lcc: 0 iterations")
    return 0


def cmd_train_gan(cfg, base_seed, out):
    data = _dataset(cfg, base_seed)
    anchors = load_anchors(_need(os.path.join(out, "anchors.bin"), "learn-lcc"))
    g = cfg["gan"]
    gan = build_gan(
        data.data_dim, anchors.m, phi=g["phi"], hidden=g["hidden"], lr=g["lr"],
        beta1=g["beta1"], beta2=g["beta2"], generator_output=g["generator_output"],
        seed=stage_seed(base_seed, _TAG_GAN_INIT),
    )
    sampler = SamplerConfig(d=cfg["sampler"]["d"], seed=stage_seed(base_seed, _TAG_GAN_TRAIN),
                            min_abs_sum=cfg["sampler"]["min_abs_sum"])
    gan, trace = train_gan(
        data.samples, anchors, sampler, gan, iters=g["iters"], batch=g["batch"],
        seed=sampler.seed,
    )
    save_model(os.path.join(out, "generator.bin"), gan.generator)
    save_model(os.path.join(out, "discriminator.bin"), gan.discriminator)
    _loss_csv(os.path.join(out, "gan_losses.csv"), ["iter", "d_loss", "g_loss"], trace)
    if trace:
        print(f"train-gan: {len(trace)} iters, d={trace[-1][0]:.4f} g={trace[-1][1]:.4f}")
    else:
        print("train-gan: 0 iterations")
    return 0


def cmd_sample(cfg, base_seed, out, n, generator_path=None):
    anchors = load_anchors(_need(os.path.join(out, "anchors.bin"), "learn-lcc"))
    sampler = SamplerConfig(d=cfg["sampler"]["d"], seed=stage_seed(base_seed, _TAG_SAMPLE),
                            min_abs_sum=cfg["sampler"]["min_abs_sum"])
    rng = Rng(sampler.seed)
    codings = [sample_coding(anchors, sampler, rng) for _ in range(n)]
    codings_to_csv(os.path.join(out, "codings_sampled.csv"), codings)
    wrote = ["codings_sampled.csv"]
    gen_file = generator_path or os.path.join(out, "generator.bin")
    if generator_path or os.path.exists(gen_file):
        generator = load_model(gen_file)
        G = np.stack([c.weights for c in codings])
        outputs = generator.forward(G)
        matrix_to_csv(os.path.join(out, "sampled_outputs.csv"), outputs)
        wrote.append("sampled_outputs.csv")
    print(f"sample: {n} codings -> {', '.join(wrote)}")
    return 0


def cmd_interpolate(cfg, base_seed, out, steps, generator_path=None):
    anchors = load_anchors(_need(os.path.join(out, "anchors.bin"), "learn-lcc"))
    generator = load_model(
        _need(generator_path or os.path.join(out, "generator.bin"), "train-gan")
    )
    sampler = SamplerConfig(d=cfg["sampler"]["d"], seed=stage_seed(base_seed, _TAG_INTERP),
                            min_abs_sum=cfg["sampler"]["min_abs_sum"])
    rng = Rng(sampler.seed)
    a, b = sample_coding_pair(anchors, sampler, rng)
    path = interpolate(a, b, steps)
    codings_to_csv(os.path.join(out, "interp_codings.csv"), path)
    G = np.stack([c.weights for c in path])
    matrix_to_csv(os.path.join(out, "interp_outputs.csv"), generator.forward(G))
    print(f"interpolate: {steps} steps along one neighborhood")
    return 0


def cmd_verify_bounds(cfg, base_seed, out, cases):
    rng = Rng(stage_seed(base_seed, _TAG_VERIFY))
    rows = []
    violations = 0
    for case in range(cases):
        dim = 2 + rng.randint(3)
        k = 1 + rng.randint(3)
        m = 4 + rng.randint(5)
        d = 2 + rng.randint(min(3, m - 1))
        anchors, coding, h, radius = random_configuration(rng, dim, m, d)
        for kind, gen in (("affine", random_affine(rng, dim, k)),
                          ("quadratic", random_quadratic(rng, dim, k))):
            consts = gen.constants(radius)
            for order, fn in ((1, mixing_gap), (2, tangent_mixing_gap)):
                lhs, rhs = fn(gen, coding, anchors, h, consts)
                ok = lhs <= rhs + 1e-10
                violations += 0 if ok else 1
                rows.append((case, kind, order, lhs, rhs, rhs - lhs, int(ok)))
    with open(os.path.join(out, "bounds.csv"), "w", newline="\n") as fh:
        fh.write("case,kind,order,lhs,rhs,margin,ok\n")
        for case, kind, order, lhs, rhs, margin, ok in rows:
            fh.write(f"{case},{kind},{order},{fmt_float(lhs)},{fmt_float(rhs)},"
                     f"{fmt_float(margin)},{ok}\n")
    print(f"verify-bounds: {cases} configurations, {len(rows)} checks, "
          f"{violations} violations")
    return 0 if violations == 0 else 1


def cmd_eval(cfg, base_seed, out):
    data = _dataset(cfg, base_seed)
    anchors = load_anchors(_need(os.path.join(out, "anchors.bin"), "learn-lcc"))
    generator = load_model(_need(os.path.join(out, "generator.bin"), "train-gan"))
    e = cfg["eval"]
    d = cfg["data"]
    sampler = SamplerConfig(d=cfg["sampler"]["d"], seed=stage_seed(base_seed, _TAG_EVAL),
                            min_abs_sum=cfg["sampler"]["min_abs_sum"])
    rng = Rng(sampler.seed)
    codings = [sample_coding(anchors, sampler, rng) for _ in range(e["n_generated"])]
    generated = generator.forward(np.stack([c.weights for c in codings]))
    if d["kind"] == "ring":
        held = make_ring(e["n_heldout"], d["radius"], d["noise_sigma"],
                         stage_seed(base_seed, _TAG_HELDOUT)).samples
    elif d["kind"] == "swiss_roll":
        held = make_swiss_roll(e["n_heldout"], d["noise_sigma"],
                               stage_seed(base_seed, _TAG_HELDOUT)).samples
    else:
        held = data.samples[: e["n_heldout"]]
    bandwidth = e["bandwidth"] if e["bandwidth"] > 0 else median_pairwise_distance(held)
    score = mmd2(generated, held, bandwidth)
    probe = min(100, len(generated))
    positive = 0
    for i in range(probe):
        _, dist = pearson_nn(generated[i], data.samples)
        positive += 1 if dist > 0.0 else 0
    matrix_to_csv(os.path.join(out, "samples.csv"), generated)
    kv_to_csv(os.path.join(out, "metrics.csv"), [
        ("mmd2", score),
        ("bandwidth", bandwidth),
        ("pearson_positive_fraction", positive / probe),
    ])
    side = int(round(np.sqrt(data.data_dim)))
    if data.data_dim == 2:
        write_pgm(os.path.join(out, "grid.pgm"), scatter_image(generated))
    elif side * side == data.data_dim:
        write_pgm(os.path.join(out, "grid.pgm"), tile_images(generated[:64], 8))
    else:
        write_pgm(os.path.join(out, "grid.pgm"),
                  scatter_image(generated[:, :2]))
    print(f"eval: mmd2={score:.6g} bandwidth={bandwidth:.6g} "
          f"pearson>0 for {positive}/{probe}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="lccgen", description=__doc__)
    p.add_argument("--config", help="INI config file; defaults cover every key")
    p.add_argument("--seed", type=int, help="base seed overriding [data] seed")
    p.add_argument("--out", help="output directory overriding [output] dir")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("train-ae", help="train the autoencoder on the configured data")
    lcc = sub.add_parser("learn-lcc", help="learn anchors and codings on embeddings")
    lcc.add_argument("--m", type=int, help="anchor count override")
    lcc.add_argument("--q", type=int, help="locality exponent override (2 or 3)")
    gan = sub.add_parser("train-gan", help="adversarial training on anchor codings")
    gan.add_argument("--iters", type=int, help="iteration override")
    gan.add_argument("--phi", help="measuring function override (log or identity)")
    samp = sub.add_parser("sample", help="draw codings (and outputs when a generator exists)")
    samp.add_argument("--n", type=int, default=100, help="number of codings (default 100)")
    samp.add_argument("--d", type=int, help="neighborhood size override")
    samp.add_argument("--generator", help="generator checkpoint path")
    inter = sub.add_parser("interpolate", help="linear path between two local codings")
    inter.add_argument("--steps", type=int, default=10, help="path length (default 10)")
    inter.add_argument("--generator", help="generator checkpoint path")
    ver = sub.add_parser("verify-bounds", help="numerical check of the coding bounds")
    ver.add_argument("--cases", type=int, help="number of random configurations")
    sub.add_parser("eval", help="two-sample metrics and an image grid for the generator")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        overrides = [("output", "dir", args.out)]
        if args.command == "learn-lcc":
            overrides += [("lcc", "m", args.m), ("lcc", "q", args.q)]
        if args.command == "train-gan":
            overrides += [("gan", "iters", args.iters), ("gan", "phi", args.phi)]
        if args.command == "sample" and args.d is not None:
            overrides.append(("sampler", "d", args.d))
        apply_overrides(cfg, overrides)
        base_seed = args.seed if args.seed is not None else cfg["data"]["seed"]
        out = cfg["output"]["dir"]
        os.makedirs(out, exist_ok=True)
        if args.command == "train-ae":
            return cmd_train_ae(cfg, base_seed, out)
        if args.command == "learn-lcc":
            return cmd_learn_lcc(cfg, base_seed, out)
        if args.command == "train-gan":
            return cmd_train_gan(cfg, base_seed, out)
        if args.command == "sample":
            return cmd_sample(cfg, base_seed, out, args.n, args.generator)
        if args.command == "interpolate":
            return cmd_interpolate(cfg, base_seed, out, args.steps, args.generator)
        if args.command == "verify-bounds":
            cases = args.cases if args.cases is not None else cfg["eval"]["cases"]
            return cmd_verify_bounds(cfg, base_seed, out, cases)
        if args.command == "eval":
            return cmd_eval(cfg, base_seed, out)
        raise CliError(f"unknown command {args.command!r}")
    except (CliError, ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
