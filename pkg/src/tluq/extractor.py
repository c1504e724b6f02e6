"""Frozen convolutional feature extraction.

Architectures are sequential chains of ``conv``, ``relu``, ``maxpool`` and
``gap`` (global average pool) layers. ``drop_final_pool`` skips the chain's
last layer when it is a pooling layer, so the classifier sees the full last
feature map instead of a pooled summary.

Weights live in a :class:`WeightStore` and are never written during
extraction. The on-disk FZWT container (little-endian)::

    b"FZWT" | u32 version (=1) | u32 tensor count
    per tensor: u16 name length | UTF-8 name | u8 dtype | u8 rank
                | rank x u32 dims | raw IEEE-754 payload

dtype code 0 is float32 and 1 is float64. A conv layer with weight name
``w`` reads ``w/kernel`` shaped ``(out, in, kh, kw)`` and ``w/bias`` shaped
``(out,)``.

Architecture text format, one directive per line, ``#`` starts a comment::

    name vgg16
    input 224 224 3
    drop_final_pool true
    conv out=64 kernel=3 stride=1 padding=1 weights=block1_conv1
    relu
    maxpool size=2 stride=2
    gap

A spec with no layers and a ``features C H W`` line is a metadata-only
preset: its feature count is known but it cannot be executed.

Pixels are scaled to [0, 1] by the image's maximum value with no mean
subtraction; grayscale images are replicated to three channels.
"""

from __future__ import annotations

import hashlib
import io
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .rng import Rng
from .tensor import ShapeError, conv2d, global_avgpool, maxpool2d, relu

MAGIC = b"FZWT"
VERSION = 1
DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
DTYPE_CODES = {np.dtype("float32"): 0, np.dtype("float64"): 1}

LAYER_KINDS = ("conv", "relu", "maxpool", "gap")


class FormatError(ValueError):
    """Malformed binary container; carries the byte offset and the field being read."""

    def __init__(self, message: str, offset: int | None = None, field: str | None = None):
        where = []
        if field is not None:
            where.append(f"field {field}")
        if offset is not None:
            where.append(f"offset {offset}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.offset = offset
        self.field = field


class ExtractionError(ValueError):
    pass


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    out_channels: int = 0
    kernel: int = 0
    stride: int = 1
    padding: int = 0
    size: int = 0
    weight_name: str | None = None

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise ValueError(f"unknown layer kind {self.kind!r}")
        if self.kind == "conv":
            if self.out_channels < 1 or self.kernel < 1 or self.stride < 1 or self.padding < 0:
                raise ValueError(f"invalid conv parameters: {self}")
            if not self.weight_name:
                raise ValueError("conv layer needs a weight name")
        if self.kind == "maxpool" and (self.size < 1 or self.stride < 1):
            raise ValueError(f"invalid maxpool parameters: {self}")


@dataclass(frozen=True)
class ArchitectureSpec:
    name: str
    input_size: tuple[int, int]
    layers: tuple[LayerSpec, ...] = ()
    drop_final_pool: bool = True
    in_channels: int = 3
    # (channels, height, width) of the emitted map, for metadata-only presets
    feature_shape: tuple[int, int, int] | None = None

    @property
    def executable(self) -> bool:
        return len(self.layers) > 0

    def active_layers(self) -> tuple[LayerSpec, ...]:
        layers = self.layers
        if self.drop_final_pool and layers and layers[-1].kind in ("maxpool", "gap"):
            layers = layers[:-1]
        return layers

    def output_shape(self) -> tuple[int, int, int]:
        """Shape ``(c, h, w)`` of the final feature map, by shape arithmetic alone."""
        if not self.executable:
            if self.feature_shape is None:
                raise ValueError(f"architecture {self.name!r} has neither layers nor a feature shape")
            return self.feature_shape
        c, (h, w) = self.in_channels, self.input_size
        for idx, layer in enumerate(self.active_layers()):
            if layer.kind == "conv":
                h = (h + 2 * layer.padding - layer.kernel) // layer.stride + 1
                w = (w + 2 * layer.padding - layer.kernel) // layer.stride + 1
                c = layer.out_channels
            elif layer.kind == "maxpool":
                if layer.size > min(h, w):
                    raise ShapeError(f"layer {idx}: pool window {layer.size} exceeds {h}x{w} map")
                h = (h - layer.size) // layer.stride + 1
                w = (w - layer.size) // layer.stride + 1
            elif layer.kind == "gap":
                h = w = 1
            if h < 1 or w < 1:
                raise ShapeError(f"layer {idx}: feature map collapses to {h}x{w}")
        return c, h, w

    @property
    def n_features(self) -> int:
        c, h, w = self.output_shape()
        return c * h * w


class WeightStore:
    """Named float tensors; read-only by convention once built."""

    def __init__(self, tensors: dict[str, np.ndarray] | None = None):
        self.tensors: dict[str, np.ndarray] = {}
        for name, arr in (tensors or {}).items():
            self.add(name, arr)

    def add(self, name: str, arr) -> None:
        if name in self.tensors:
            raise ValueError(f"duplicate tensor name {name!r}")
        arr = np.asarray(arr)
        if arr.dtype not in DTYPE_CODES:
            arr = arr.astype(np.float32)
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        self.tensors[name] = arr

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self.tensors

    def __len__(self) -> int:
        return len(self.tensors)

    def __iter__(self):
        return iter(self.tensors)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightStore) or list(self.tensors) != list(other.tensors):
            return False
        return all(
            a.dtype == b.dtype and a.shape == b.shape and a.tobytes() == b.tobytes()
            for a, b in zip(self.tensors.values(), other.tensors.values())
        )

    def digest(self) -> str:
        h = hashlib.sha256()
        for name, arr in self.tensors.items():
            h.update(name.encode())
            h.update(str(arr.dtype).encode())
            h.update(repr(arr.shape).encode())
            h.update(arr.tobytes())
        return h.hexdigest()


def write_tensors(buf: io.BufferedIOBase, tensors: dict[str, np.ndarray]) -> None:
    """Tensor records in FZWT framing (count, then name/dtype/rank/dims/payload per tensor)."""
    buf.write(struct.pack("<I", len(tensors)))
    for name, arr in tensors.items():
        raw = name.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise ValueError(f"tensor name too long: {name[:40]}...")
        arr = np.asarray(arr)
        code = DTYPE_CODES.get(arr.dtype)
        if code is None:
            raise ValueError(f"tensor {name!r} has unsupported dtype {arr.dtype}")
        buf.write(struct.pack("<H", len(raw)))
        buf.write(raw)
        buf.write(struct.pack("<BB", code, arr.ndim))
        buf.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        buf.write(np.ascontiguousarray(arr, dtype=DTYPES[code]).tobytes())


class _Reader:
    def __init__(self, data: bytes, offset: int = 0):
        self.data = data
        self.pos = offset

    def take(self, n: int, field: str) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError(f"truncated payload: need {n} bytes, {len(self.data) - self.pos} left",
                              self.pos, field)
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str, field: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), field))


def read_tensors(reader: _Reader) -> dict[str, np.ndarray]:
    (count,) = reader.unpack("<I", "tensor count")
    tensors: dict[str, np.ndarray] = {}
    for i in range(count):
        start = reader.pos
        (name_len,) = reader.unpack("<H", f"tensor[{i}].name_length")
        try:
            name = reader.take(name_len, f"tensor[{i}].name").decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError(f"tensor name is not UTF-8: {exc}", start + 2, f"tensor[{i}].name") from None
        if name in tensors:
            raise FormatError(f"duplicate tensor name {name!r}", start, f"tensor[{i}].name")
        code, rank = reader.unpack("<BB", f"tensor[{i}].dtype")
        if code not in DTYPES:
            raise FormatError(f"unknown dtype code {code}", reader.pos - 2, f"tensor[{i}].dtype")
        dims = reader.unpack(f"<{rank}I", f"tensor[{i}].dims")
        dtype = DTYPES[code]
        count_values = int(np.prod(dims, dtype=np.int64)) if rank else 1
        payload = reader.take(count_values * dtype.itemsize, f"tensor[{i}].payload")
        arr = np.frombuffer(payload, dtype=dtype).reshape(dims).astype(dtype.newbyteorder("="))
        tensors[name] = arr
    return tensors


def save_weights(store: WeightStore, path) -> None:
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<I", VERSION))
    write_tensors(buf, store.tensors)
    Path(path).write_bytes(buf.getvalue())


def load_weights(path) -> WeightStore:
    data = Path(path).read_bytes()
    reader = _Reader(data)
    magic = reader.take(4, "magic")
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}", 0, "magic")
    (version,) = reader.unpack("<I", "version")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", 4, "version")
    tensors = read_tensors(reader)
    if reader.pos != len(data):
        raise FormatError(f"{len(data) - reader.pos} trailing bytes after last tensor", reader.pos, "eof")
    return WeightStore(tensors)


# ---------------------------------------------------------------- architectures

def vgg16_layers() -> tuple[LayerSpec, ...]:
    layers = []
    for block, (width, depth) in enumerate([(64, 2), (128, 2), (256, 3), (512, 3), (512, 3)], start=1):
        for i in range(1, depth + 1):
            layers.append(LayerSpec("conv", out_channels=width, kernel=3, stride=1, padding=1,
                                    weight_name=f"block{block}_conv{i}"))
            layers.append(LayerSpec("relu"))
        layers.append(LayerSpec("maxpool", size=2, stride=2))
    layers.append(LayerSpec("gap"))
    return tuple(layers)


PRESETS: dict[str, ArchitectureSpec] = {
    "vgg16": ArchitectureSpec("vgg16", (224, 224), vgg16_layers(), drop_final_pool=True),
    "resnet50": ArchitectureSpec("resnet50", (224, 224), feature_shape=(2048, 7, 7)),
    "densenet121": ArchitectureSpec("densenet121", (224, 224), feature_shape=(1024, 7, 7)),
    "inceptionresnetv2": ArchitectureSpec("inceptionresnetv2", (299, 299), feature_shape=(1536, 8, 8)),
}


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_architecture(text: str) -> ArchitectureSpec:
    name, input_size, in_channels, drop, feature_shape = "custom", None, 3, True, None
    layers = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        try:
            if head == "name":
                name = rest[0]
            elif head == "input":
                h, w = int(rest[0]), int(rest[1])
                in_channels = int(rest[2]) if len(rest) > 2 else 3
                input_size = (h, w)
            elif head == "drop_final_pool":
                drop = _parse_bool(rest[0])
            elif head == "features":
                feature_shape = tuple(int(v) for v in rest[:3])
            elif head in LAYER_KINDS:
                kw = dict(item.split("=", 1) for item in rest)
                if head == "conv":
                    layers.append(LayerSpec("conv", out_channels=int(kw["out"]), kernel=int(kw["kernel"]),
                                            stride=int(kw.get("stride", 1)), padding=int(kw.get("padding", 0)),
                                            weight_name=kw["weights"]))
                elif head == "maxpool":
                    size = int(kw.get("size", 2))
                    layers.append(LayerSpec("maxpool", size=size, stride=int(kw.get("stride", size))))
                else:
                    layers.append(LayerSpec(head))
            else:
                raise ValueError(f"unknown directive {head!r}")
        except (IndexError, KeyError, ValueError) as exc:
            raise ValueError(f"architecture line {lineno}: {exc}") from None
    if input_size is None:
        raise ValueError("architecture has no 'input' line")
    return ArchitectureSpec(name, input_size, tuple(layers), drop, in_channels, feature_shape)


def format_architecture(arch: ArchitectureSpec) -> str:
    lines = [f"name {arch.name}", f"input {arch.input_size[0]} {arch.input_size[1]} {arch.in_channels}",
             f"drop_final_pool {'true' if arch.drop_final_pool else 'false'}"]
    if arch.feature_shape is not None:
        lines.append("features " + " ".join(str(v) for v in arch.feature_shape))
    for layer in arch.layers:
        if layer.kind == "conv":
            lines.append(f"conv out={layer.out_channels} kernel={layer.kernel} stride={layer.stride} "
                         f"padding={layer.padding} weights={layer.weight_name}")
        elif layer.kind == "maxpool":
            lines.append(f"maxpool size={layer.size} stride={layer.stride}")
        else:
            lines.append(layer.kind)
    return "\n".join(lines) + "\n"


def load_architecture(name_or_path: str) -> ArchitectureSpec:
    if name_or_path.lower() in PRESETS:
        return PRESETS[name_or_path.lower()]
    return parse_architecture(Path(name_or_path).read_text(encoding="utf-8"))


def random_weights(arch: ArchitectureSpec, seed: int) -> WeightStore:
    """Seeded He-normal float32 weights with zero biases, for testing without pretrained files."""
    rng = Rng(seed)
    store = WeightStore()
    c = arch.in_channels
    for layer in arch.layers:
        if layer.kind != "conv":
            continue
        fan_in = c * layer.kernel * layer.kernel
        shape = (layer.out_channels, c, layer.kernel, layer.kernel)
        store.add(f"{layer.weight_name}/kernel",
                  rng.normal(shape, scale=np.sqrt(2.0 / fan_in)).astype(np.float32))
        store.add(f"{layer.weight_name}/bias", np.zeros(layer.out_channels, dtype=np.float32))
        c = layer.out_channels
    return store


# ---------------------------------------------------------------- forward pass

def _forward(x: np.ndarray, arch: ArchitectureSpec, weights: WeightStore) -> np.ndarray:
    for idx, layer in enumerate(arch.active_layers()):
        try:
            if layer.kind == "conv":
                kname, bname = f"{layer.weight_name}/kernel", f"{layer.weight_name}/bias"
                for name in (kname, bname):
                    if name not in weights:
                        raise ExtractionError(f"layer {idx} ({layer.kind}): missing weight {name!r}")
                kernel = weights[kname]
                expected = (layer.out_channels, x.shape[1], layer.kernel, layer.kernel)
                if kernel.shape != expected:
                    raise ExtractionError(f"layer {idx} (conv): kernel {kname!r} has shape {kernel.shape}, "
                                          f"expected {expected}")
                bias = weights[bname]
                if bias.shape != (layer.out_channels,):
                    raise ExtractionError(f"layer {idx} (conv): bias {bname!r} has shape {bias.shape}, "
                                          f"expected ({layer.out_channels},)")
                x = conv2d(x, kernel, bias, layer.stride, layer.padding)
            elif layer.kind == "relu":
                x = relu(x)
            elif layer.kind == "maxpool":
                x = maxpool2d(x, layer.size, layer.stride)
            else:
                x = global_avgpool(x)
        except ShapeError as exc:
            raise ExtractionError(f"layer {idx} ({layer.kind}): {exc}") from None
    return x


def extract_features(images, arch: ArchitectureSpec, weights: WeightStore, batch_size: int = 8) -> np.ndarray:
    """Run the frozen chain over ``images (n, c, h, w)``; row i is image i's flattened last feature map."""
    if not arch.executable:
        raise ExtractionError(f"architecture {arch.name!r} is metadata-only; ingest its features from CSV")
    x = np.asarray(images, dtype=np.float64)
    if x.ndim != 4:
        raise ExtractionError(f"images must be (n, c, h, w), got shape {x.shape}")
    if x.shape[2:] != tuple(arch.input_size) or x.shape[1] != arch.in_channels:
        raise ExtractionError(f"images are {x.shape[1]}x{x.shape[2]}x{x.shape[3]}, architecture "
                              f"{arch.name!r} expects {arch.in_channels}x{arch.input_size[0]}x{arch.input_size[1]}")
    n_features = arch.n_features
    out = np.empty((x.shape[0], n_features))
    for start in range(0, x.shape[0], batch_size):
        fmap = _forward(x[start:start + batch_size], arch, weights)
        out[start:start + batch_size] = fmap.reshape(fmap.shape[0], -1)
    return out


# ---------------------------------------------------------------- images

def _resize_axis(n_in: int, n_out: int):
    # half-pixel centres, clamped at the borders
    src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    src = np.clip(src, 0.0, n_in - 1)
    lo = np.floor(src).astype(int)
    hi = np.minimum(lo + 1, n_in - 1)
    return lo, hi, src - lo


def preprocess(image, target: tuple[int, int], maxval: float | None = None, channels: int = 3) -> np.ndarray:
    """Bilinear resize to ``target`` and scale to [0, 1]; returns a ``(channels, h, w)`` array.

    ``image`` is ``(h, w)`` grayscale or ``(h, w, c)`` with one or three
    channels. Grayscale is replicated when ``channels`` is 3; a colour image
    fed to a one-channel network is averaged. ``maxval`` defaults to 255 for
    integer images and 1 otherwise.
    """
    if channels not in (1, 3):
        raise ValueError(f"channels must be 1 or 3, got {channels}")
    img = np.asarray(image)
    if img.ndim not in (2, 3) or min(img.shape[:2]) < 1 or img.size == 0:
        raise ValueError(f"image must be a non-empty (h, w) or (h, w, c) grid, got shape {img.shape}")
    if maxval is None:
        maxval = 255.0 if np.issubdtype(img.dtype, np.integer) else 1.0
    img = img.astype(np.float64) / float(maxval)
    if img.ndim == 2:
        img = img[:, :, None]
    if img.shape[2] not in (1, 3):
        raise ValueError(f"expected 1 or 3 channels, got {img.shape[2]}")
    if img.shape[2] != channels:
        img = np.repeat(img, 3, axis=2) if channels == 3 else img.mean(axis=2, keepdims=True)
    th, tw = target
    y0, y1, fy = _resize_axis(img.shape[0], th)
    x0, x1, fx = _resize_axis(img.shape[1], tw)
    fy, fx = fy[:, None, None], fx[None, :, None]
    top = img[y0][:, x0] * (1 - fx) + img[y0][:, x1] * fx
    bottom = img[y1][:, x0] * (1 - fx) + img[y1][:, x1] * fx
    out = top * (1 - fy) + bottom * fy
    return np.ascontiguousarray(out.transpose(2, 0, 1))


def _pnm_tokens(data: bytes, count: int, pos: int):
    tokens = []
    while len(tokens) < count:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise FormatError("unexpected end of PNM header", pos, "header")
        tokens.append(data[start:pos])
    return tokens, pos


def read_pnm(path) -> tuple[np.ndarray, int]:
    """Minimal PGM/PPM reader (P2, P3, P5, P6). Returns ``(pixels, maxval)``."""
    data = Path(path).read_bytes()
    magic = data[:2]
    if magic not in (b"P2", b"P3", b"P5", b"P6"):
        raise FormatError(f"unsupported PNM magic {magic!r}", 0, "magic")
    (w, h, maxval), pos = _pnm_tokens(data, 3, 2)
    w, h, maxval = int(w), int(h), int(maxval)
    if w < 1 or h < 1:
        raise ValueError(f"image {path} has a zero dimension ({w}x{h})")
    channels = 3 if magic in (b"P3", b"P6") else 1
    n = w * h * channels
    if magic in (b"P2", b"P3"):
        values, _ = _pnm_tokens(data, n, pos)
        pixels = np.array([int(v) for v in values], dtype=np.int64)
    else:
        pos += 1  # single whitespace after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = n * dtype.itemsize
        if len(data) - pos < need:
            raise FormatError("truncated PNM raster", pos, "raster")
        pixels = np.frombuffer(data[pos:pos + need], dtype=dtype).astype(np.int64)
    shape = (h, w) if channels == 1 else (h, w, 3)
    return pixels.reshape(shape), maxval


def write_pnm(path, pixels, maxval: int = 255) -> None:
    """Binary PGM (2-D input) or PPM (h, w, 3 input)."""
    px = np.asarray(pixels)
    magic = b"P5" if px.ndim == 2 else b"P6"
    h, w = px.shape[:2]
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    header = magic + f"\n{w} {h}\n{maxval}\n".encode()
    Path(path).write_bytes(header + px.astype(dtype).tobytes())
