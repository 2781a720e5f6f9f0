"""File formats for pipeline artifacts.

Anchor sets ("LCCA"): magic, u32 LE d_b, u32 LE m, then m*d_b float64 LE in
column-major order (one anchor after another).

Network checkpoints ("LCCN"): magic, u32 LE layer count, then per layer
u32 LE rows, u32 LE cols, one activation tag byte (0 identity, 1 relu,
2 tanh, 3 sigmoid), rows*cols float64 LE weights row-major, cols float64 LE
biases.

CSV floats are written with repr-faithful %.17g so reruns are byte-identical.
"""

from __future__ import annotations

import struct

import numpy as np

from .lcc.core import AnchorSet, Coding
from .neural.net import ACTIVATIONS, Layer, Mlp

ANCHOR_MAGIC = b"LCCA"
MODEL_MAGIC = b"LCCN"
_ACT_TAGS = {"identity": 0, "relu": 1, "tanh": 2, "sigmoid": 3}
_TAG_ACTS = {v: k for k, v in _ACT_TAGS.items()}


class FormatError(Exception):
    pass


def fmt_float(x: float) -> str:
    return "%.17g" % x


def save_anchors(path, anchors: AnchorSet) -> None:
    with open(path, "wb") as fh:
        fh.write(ANCHOR_MAGIC)
        fh.write(struct.pack("<II", anchors.d_b, anchors.m))
        fh.write(np.ascontiguousarray(anchors.anchors.T, dtype="<f8").tobytes())


def load_anchors(path) -> AnchorSet:
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:4] != ANCHOR_MAGIC:
        raise FormatError(f"{path}: bad magic {buf[:4]!r} at byte offset 0")
    if len(buf) < 12:
        raise FormatError(f"{path}: truncated header at byte offset {len(buf)}")
    d_b, m = struct.unpack("<II", buf[4:12])
    need = 12 + 8 * d_b * m
    if len(buf) < need:
        raise FormatError(f"{path}: truncated at byte offset {len(buf)} (expected {need})")
    flat = np.frombuffer(buf, dtype="<f8", count=d_b * m, offset=12)
    return AnchorSet(flat.reshape(m, d_b).T.copy())


def anchors_to_csv(path, anchors: AnchorSet) -> None:
    """One anchor per row."""
    with open(path, "w", newline="\n") as fh:
        for j in range(anchors.m):
            fh.write(",".join(fmt_float(x) for x in anchors.anchors[:, j]) + "\n")


def save_model(path, net: Mlp) -> None:
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<I", len(net.layers)))
        for layer in net.layers:
            rows, cols = layer.w.shape
            fh.write(struct.pack("<II", rows, cols))
            fh.write(struct.pack("B", _ACT_TAGS[layer.act]))
            fh.write(np.ascontiguousarray(layer.w, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(layer.b, dtype="<f8").tobytes())


def load_model(path) -> Mlp:
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:4] != MODEL_MAGIC:
        raise FormatError(f"{path}: bad magic {buf[:4]!r} at byte offset 0")
    off = 4
    if len(buf) < off + 4:
        raise FormatError(f"{path}: truncated header at byte offset {len(buf)}")
    (n_layers,) = struct.unpack_from("<I", buf, off)
    off += 4
    layers = []
    for i in range(n_layers):
        if len(buf) < off + 9:
            raise FormatError(f"{path}: truncated layer {i} header at byte offset {len(buf)}")
        rows, cols = struct.unpack_from("<II", buf, off)
        tag = buf[off + 8]
        off += 9
        if tag not in _TAG_ACTS:
            raise FormatError(f"{path}: unknown activation tag {tag} at byte offset {off - 1}")
        need = off + 8 * (rows * cols + cols)
        if len(buf) < need:
            raise FormatError(f"{path}: truncated at byte offset {len(buf)} (expected {need})")
        w = np.frombuffer(buf, dtype="<f8", count=rows * cols, offset=off).reshape(rows, cols)
        off += 8 * rows * cols
        b = np.frombuffer(buf, dtype="<f8", count=cols, offset=off)
        off += 8 * cols
        layers.append(Layer(w.copy(), b.copy(), _TAG_ACTS[tag]))
    return Mlp(layers)


def codings_to_csv(path, codings) -> None:
    """One coding per row as comma-separated index:weight support pairs."""
    with open(path, "w", newline="\n") as fh:
        for c in codings:
            cells = [f"{int(j)}:{fmt_float(c.weights[j])}" for j in c.support]
            fh.write(",".join(cells) + "\n")


def codings_from_csv(path, m: int):
    out = []
    with open(path) as fh:
        for line_no, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            w = np.zeros(m)
            for cell in line.split(","):
                idx, _, val = cell.partition(":")
                try:
                    w[int(idx)] = float(val)
                except (ValueError, IndexError) as exc:
                    raise FormatError(f"{path}: bad cell {cell!r} on line {line_no + 1}") from exc
            out.append(Coding(w))
    return out


def matrix_to_csv(path, rows, header=None) -> None:
    with open(path, "w", newline="\n") as fh:
        if header:
            fh.write(",".join(header) + "\n")
        for row in np.atleast_2d(np.asarray(rows, dtype=np.float64)):
            fh.write(",".join(fmt_float(x) for x in row) + "\n")


def kv_to_csv(path, pairs) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("name,value\n")
        for name, value in pairs:
            fh.write(f"{name},{fmt_float(float(value))}\n")


def write_pgm(path, image: np.ndarray) -> None:
    """Binary 8-bit grayscale PGM."""
    img = np.asarray(image)
    if img.ndim != 2 or img.dtype != np.uint8:
        raise ValueError("image must be a 2-D uint8 array")
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (img.shape[1], img.shape[0]))
        fh.write(img.tobytes())


def to_gray(values: np.ndarray) -> np.ndarray:
    """Map [-1, 1] floats to uint8 pixels."""
    return np.clip(np.rint((np.asarray(values) + 1.0) * 127.5), 0, 255).astype(np.uint8)


def tile_images(samples: np.ndarray, grid_cols: int) -> np.ndarray:
    """Tile (n, k*k) samples in [-1, 1] into one uint8 image grid."""
    n, dim = samples.shape
    k = int(round(np.sqrt(dim)))
    if k * k != dim:
        raise ValueError(f"samples of dim {dim} are not square images")
    rows = (n + grid_cols - 1) // grid_cols
    canvas = np.zeros((rows * (k + 1) + 1, grid_cols * (k + 1) + 1), dtype=np.uint8)
    for i in range(n):
        r, c = divmod(i, grid_cols)
        tile = to_gray(samples[i].reshape(k, k))
        canvas[r * (k + 1) + 1 : r * (k + 1) + 1 + k, c * (k + 1) + 1 : c * (k + 1) + 1 + k] = tile
    return canvas


def scatter_image(points: np.ndarray, size: int = 64) -> np.ndarray:
    """Rasterize 2-D points into a density image (uint8), for eyeballing."""
    p = np.asarray(points, dtype=np.float64)
    if p.ndim != 2 or p.shape[1] != 2:
        raise ValueError("scatter_image needs (n, 2) points")
    lo = p.min(axis=0)
    hi = p.max(axis=0)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    ij = np.minimum(((p - lo) / span * size).astype(np.int64), size - 1)
    img = np.zeros((size, size))
    np.add.at(img, (size - 1 - ij[:, 1], ij[:, 0]), 1.0)
    top = img.max()
    if top > 0:
        img = img / top
    return np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
