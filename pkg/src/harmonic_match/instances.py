"""Matching instances: channel specs, synthetic pairs, landmark files, JSON documents."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .features import (
    LandmarkSet,
    complement_similarity,
    delaunay_channel,
    distance_channel,
    distance_scales,
    frobenius_normalized,
    shape_context_channel,
    uninformative_channel,
)
from .fourier import GraphChannel
from .permutations import Permutation

CHANNEL_KINDS = ("delaunay", "dist<k>", "shape", "uninf<k>")
_TOKEN = re.compile(r"^(delaunay|shape|dist|uninf)(\d*)$")


class ChannelSpecError(ValueError):
    pass


class LandmarkFormatError(ValueError):
    pass


@dataclass
class MatchingInstance:
    """A graph pair given as D aligned adjacency channels per graph."""

    channels_G: list[GraphChannel]
    channels_Gp: list[GraphChannel]
    ground_truth: Permutation | None = None
    metadata: dict = field(default_factory=dict)
    # memoised channel transforms and bound caches; not part of the document
    _memo: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.channels_G) != len(self.channels_Gp) or not self.channels_G:
            raise ValueError(
                f"need the same nonzero number of channels per graph, got {len(self.channels_G)} and {len(self.channels_Gp)}"
            )
        n = self.channels_G[0].n
        for a, b in zip(self.channels_G, self.channels_Gp):
            if a.label != b.label:
                raise ValueError(f"channel labels disagree: {a.label!r} vs {b.label!r}")
            if a.n != n or b.n != n:
                raise ValueError("all channels must share the vertex count")
        if self.ground_truth is not None and self.ground_truth.n != n:
            raise ValueError(f"ground truth in S_{self.ground_truth.n} for graphs on {n} vertices")

    @property
    def n(self) -> int:
        return self.channels_G[0].n

    @property
    def D(self) -> int:
        return len(self.channels_G)

    @property
    def labels(self) -> list[str]:
        return [c.label for c in self.channels_G]

    def with_ground_truth(self, sigma: Permutation) -> MatchingInstance:
        """Copy carrying ``sigma`` as ground truth; memoised transforms are shared."""
        out = MatchingInstance(self.channels_G, self.channels_Gp, sigma, dict(self.metadata))
        out._memo = self._memo
        return out

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "D": self.D,
            "labels": self.labels,
            "channels_G": [c.A.tolist() for c in self.channels_G],
            "channels_Gp": [c.A.tolist() for c in self.channels_Gp],
            "sigma_star": None if self.ground_truth is None else list(self.ground_truth.images),
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> MatchingInstance:
        labels = doc["labels"]
        G = [GraphChannel(np.asarray(A, dtype=float), lab) for A, lab in zip(doc["channels_G"], labels)]
        Gp = [GraphChannel(np.asarray(A, dtype=float), lab) for A, lab in zip(doc["channels_Gp"], labels)]
        inst = cls(G, Gp, Permutation(doc["sigma_star"]) if doc.get("sigma_star") else None, dict(doc.get("metadata", {})))
        if inst.n != doc["n"] or inst.D != doc["D"]:
            raise ValueError("instance document header disagrees with its matrices")
        return inst


def save_instance(inst: MatchingInstance, path) -> None:
    Path(path).write_text(json.dumps(inst.to_dict()))


def load_instance(path) -> MatchingInstance:
    return MatchingInstance.from_dict(json.loads(Path(path).read_text()))


# --- channel specs ----------------------------------------------------------


def parse_channel_spec(spec: str | Sequence[str]) -> list[tuple[str, int]]:
    """Parse ``"delaunay,dist5,uninf3"`` into ``[("delaunay", 1), ("dist", 5), ("uninf", 3)]``.

    ``dist`` alone means five scales; ``uninf`` alone means one channel.
    """
    tokens = spec.split(",") if isinstance(spec, str) else list(spec)
    out = []
    for tok in (t.strip().lower() for t in tokens):
        if not tok:
            continue
        m = _TOKEN.match(tok)
        if not m:
            raise ChannelSpecError(f"unknown channel {tok!r}; valid channels: {', '.join(CHANNEL_KINDS)}")
        kind, count = m.group(1), m.group(2)
        if kind in ("delaunay", "shape") and count:
            raise ChannelSpecError(f"channel {kind!r} takes no count; valid channels: {', '.join(CHANNEL_KINDS)}")
        k = int(count) if count else (5 if kind == "dist" else 1)
        if k < 1:
            raise ChannelSpecError(f"channel count must be positive in {tok!r}")
        out.append((kind, k))
    if not out:
        raise ChannelSpecError(f"empty channel spec; valid channels: {', '.join(CHANNEL_KINDS)}")
    return out


def channel_labels(spec) -> list[str]:
    labels = []
    for kind, k in parse_channel_spec(spec):
        if kind in ("delaunay", "shape"):
            labels.append(kind)
        else:
            labels.extend(f"{kind}{j}" for j in range(k))
    return labels


def build_channels(L: LandmarkSet, spec, rng: np.random.Generator) -> list[GraphChannel]:
    """Similarity channels for one landmark set, each scaled to unit Frobenius norm."""
    out = []
    for kind, k in parse_channel_spec(spec):
        if kind == "delaunay":
            out.append(delaunay_channel(L, "delaunay"))
        elif kind == "shape":
            out.append(complement_similarity(shape_context_channel(L, label="shape")))
        elif kind == "dist":
            for j, s in enumerate(distance_scales(L, k)):
                out.append(distance_channel(L, s, f"dist{j}"))
        else:
            for j in range(k):
                out.append(uninformative_channel(L.n, rng, f"uninf{j}"))
    return [frobenius_normalized(c) for c in out]


# --- synthetic pairs --------------------------------------------------------


def apply_transform(points: np.ndarray, rotation: float = 0.0, shear: float = 0.0, translation=(0.0, 0.0)) -> np.ndarray:
    """Rotate, then shear horizontally (x += shear * y), then translate."""
    c, s = np.cos(rotation), np.sin(rotation)
    R = np.array([[c, -s], [s, c]])
    S = np.array([[1.0, shear], [0.0, 1.0]])
    return points @ (S @ R).T + np.asarray(translation, dtype=float)


def synthesize_pair(
    base,
    rotation: float = 0.0,
    shear: float = 0.0,
    translation=(0.0, 0.0),
    noise: float = 0.0,
    channels="delaunay,dist5",
    seed=0,
    permute: bool = True,
    target=None,
) -> MatchingInstance:
    """Build a graph pair from ``base`` and a transformed, noisy, reordered copy.

    ``noise`` is the Gaussian standard deviation as a fraction of the base
    diameter. ``target`` replaces the transformed copy when given (used for
    frame pairs). Vertex i of G corresponds to vertex ``sigma*(i)`` of G'.
    """
    base = base if isinstance(base, LandmarkSet) else LandmarkSet(base)
    if base.n < 2:
        raise ValueError("a matching instance needs at least 2 landmarks")
    parse_channel_spec(channels)
    rng = np.random.default_rng(seed)
    if target is None:
        moved = apply_transform(base.points, rotation, shear, translation)
    else:
        target = target if isinstance(target, LandmarkSet) else LandmarkSet(target)
        if target.n != base.n:
            raise ValueError("frames must carry the same landmarks")
        moved = target.points.copy()
    if noise:
        moved = moved + rng.normal(scale=noise * base.diameter(), size=moved.shape)
    order = rng.permutation(base.n) if permute else np.arange(base.n)
    placed = np.empty_like(moved)
    placed[order] = moved
    sigma_star = Permutation.from_zero_based(order)
    G = build_channels(base, channels, rng)
    Gp = build_channels(LandmarkSet(placed), channels, rng)
    meta = {
        "rotation": rotation,
        "shear": shear,
        "translation": list(map(float, translation)),
        "noise": noise,
        "channels": channels if isinstance(channels, str) else ",".join(channels),
        "seed": seed if isinstance(seed, (int, list)) else None,
        "normalization": "frobenius",
        "similarity": {c.label: _similarity_kind(c.label) for c in G},
        "frame": base.frame_id,
    }
    return MatchingInstance(G, Gp, sigma_star, meta)


def _similarity_kind(label: str) -> str:
    if label == "shape":
        return "max-complement of chi2 distance"
    if label.startswith("dist"):
        return "gaussian kernel"
    if label == "delaunay":
        return "0/1 edges"
    return "uniform noise"


def random_landmarks(n: int, rng: np.random.Generator, frame_id: str = "") -> LandmarkSet:
    return LandmarkSet(rng.uniform(0.0, 1.0, size=(n, 2)), frame_id)


def make_shear_suite(
    n: int,
    offsets: Sequence[float],
    count: int,
    channels="delaunay,dist5,uninf3",
    noise: float = 0.02,
    seed: int = 0,
) -> dict[float, list[MatchingInstance]]:
    """Synthetic instances per shear offset, each from a fresh random landmark set."""
    out = {}
    for oi, offset in enumerate(offsets):
        insts = []
        for c in range(count):
            rng = np.random.default_rng([seed, oi, c])
            base = random_landmarks(n, rng, f"rand-{oi}-{c}")
            inst = synthesize_pair(base, shear=offset, noise=noise, channels=channels, seed=int(rng.integers(2**31)))
            inst.metadata["offset"] = offset
            insts.append(inst)
        out[offset] = insts
    return out


# --- landmark files ---------------------------------------------------------


def load_landmarks(path) -> list[LandmarkSet]:
    """Read ``frame <id> <n>`` blocks followed by n ``x y`` lines."""
    lines = Path(path).read_text().splitlines()
    frames = []
    pos = 0
    while pos < len(lines):
        line = lines[pos].strip()
        if not line:
            pos += 1
            continue
        parts = line.split()
        if len(parts) != 3 or parts[0] != "frame":
            raise LandmarkFormatError(f"line {pos + 1}: expected 'frame <id> <n>', got {line!r}")
        frame_id = parts[1]
        try:
            count = int(parts[2])
        except ValueError:
            raise LandmarkFormatError(f"line {pos + 1}: point count {parts[2]!r} is not an integer") from None
        if count < 0:
            raise LandmarkFormatError(f"line {pos + 1}: negative point count")
        pts = []
        for k in range(count):
            lineno = pos + 2 + k
            if lineno > len(lines):
                raise LandmarkFormatError(
                    f"frame {frame_id}: expected {count} points, file ended after {len(pts)} (line {lineno})"
                )
            fields = lines[lineno - 1].split()
            if len(fields) != 2:
                raise LandmarkFormatError(
                    f"frame {frame_id}: line {lineno}: expected 'x y', got {lines[lineno - 1].strip()!r} "
                    f"({len(pts)} of {count} points read)"
                )
            try:
                pts.append([float(fields[0]), float(fields[1])])
            except ValueError:
                raise LandmarkFormatError(f"frame {frame_id}: line {lineno}: non-numeric coordinate") from None
        frames.append(LandmarkSet(np.asarray(pts, dtype=float).reshape(count, 2), frame_id))
        pos += 1 + count
    return frames


def write_landmarks(frames: Sequence[LandmarkSet], path) -> None:
    out = []
    for L in frames:
        out.append(f"frame {L.frame_id or len(out)} {L.n}")
        out.extend(f"{x!r} {y!r}" for x, y in L.points.tolist())
    Path(path).write_text("\n".join(out) + "\n")


def make_offset_suite(frames: Sequence[LandmarkSet], offset: int, channels="delaunay,dist5", seed: int = 0) -> list[MatchingInstance]:
    """Pair frame t with frame t + offset; landmarks are index-aligned across frames."""
    if offset < 0 or offset >= len(frames):
        raise ValueError(f"offset {offset} needs at least {offset + 1} frames, got {len(frames)}")
    out = []
    for t in range(len(frames) - offset):
        inst = synthesize_pair(frames[t], target=frames[t + offset], channels=channels, seed=[seed, offset, t])
        inst.metadata.update({"offset": offset, "frames": [frames[t].frame_id, frames[t + offset].frame_id]})
        out.append(inst)
    return out
