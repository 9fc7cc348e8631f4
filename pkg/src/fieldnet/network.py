"""Three-layer recognition network with field-derived first-layer weights.

Layer 1 holds one neuron per ordered reference pair (k, k1): its weight
table is the pair's potential difference and its weighted threshold is
``Wh1 = -(Sw_k + Sw_k1)/2``, the negated midpoint of the neuron's
responses to its own two references.  A first-layer neuron fires when
``state + Wh1 >= 0``, meaning "the input is closer to reference k than
to k1".

Layer 2 has one neuron per reference; it counts the fires of the N-1
pair neurons (k, *) and fires only on a full sweep (count >= N-1).
Layer 3 has one neuron per class; it counts the firing references of its
class and fires when any did.  Strict classification returns the unique
firing class, or REJECTED; argmax mode falls back to the class of the
reference with the highest win count.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import backends
from .errors import ArchiveError, BuildError, ConfigMismatchError
from .field import (DistanceKernel, PhysicalConfig, build_kernel,
                    potential_table, potential_table_fast)
from .mnist_io import GRID, BinaryImage

REJECTED = -1

CELLS = GRID * GRID
ARCHIVE_MAGIC = b"FNET1\x00"


@dataclass(frozen=True)
class PairNeuron:
    """First-layer neuron comparing reference k against reference k1."""

    k: int
    k1: int
    weights: np.ndarray   # (28, 28) volts
    wh1: float            # weighted threshold, volts


@dataclass(frozen=True)
class ForwardTrace:
    """Layer-by-layer record of one classification."""

    first_layer: dict    # (k, k1) -> (state, fired)
    second_layer: dict   # k -> (count, fired)
    third_layer: dict    # digit -> (votes, fired)
    decision: int        # digit, or REJECTED


def neuron_state(neuron: PairNeuron, x: BinaryImage) -> float:
    """Weighted sum of the neuron's table over the input's white pixels."""
    return float(neuron.weights.ravel()[x.active_flat].sum())


def compute_threshold(state_k: float, state_k1: float) -> float:
    """Weighted threshold: negated midpoint of the two self-responses."""
    return -(state_k + state_k1) / 2.0


def first_layer_fire(neuron: PairNeuron, x: BinaryImage) -> int:
    """1 iff the input is closer to reference k than to k1 (ties fire)."""
    return int(neuron_state(neuron, x) + neuron.wh1 >= 0)


def _pair_index(k: int, k1: int, n: int) -> int:
    # k-major enumeration of ordered pairs, k1 skipping the diagonal
    return k * (n - 1) + (k1 if k1 < k else k1 - 1)


class Network:
    """Immutable network over N references.

    Weight rows are stored as a dense (N*(N-1), 784) float64 matrix in
    k-major pair order, with the flat threshold vector aligned to it.
    """

    def __init__(self, refs, cfg: PhysicalConfig, pot: np.ndarray,
                 weight_rows: np.ndarray, wh1_flat: np.ndarray):
        self.refs = list(refs)                       # [(digit, BinaryImage)]
        self.cfg = cfg
        self.pot = pot                               # (N, 784)
        self.weight_rows = weight_rows               # (N(N-1), 784)
        self.wh1_flat = wh1_flat                     # (N(N-1),)
        self.n_refs = len(self.refs)
        self.b2 = self.n_refs - 1
        self.class_groups: dict[int, list[int]] = {}
        for i, (digit, _) in enumerate(self.refs):
            self.class_groups.setdefault(int(digit), []).append(i)
        self.ref_digits = np.array([d for d, _ in self.refs], dtype=np.int64)

    @property
    def n_neurons(self) -> int:
        return self.n_refs * (self.n_refs - 1)

    def pairs(self):
        n = self.n_refs
        for k in range(n):
            for k1 in range(n):
                if k1 != k:
                    yield k, k1

    def neuron(self, k: int, k1: int) -> PairNeuron:
        n = self.n_refs
        if not (0 <= k < n and 0 <= k1 < n) or k == k1:
            raise BuildError(f"no neuron ({k}, {k1}) in a {n}-reference network")
        p = _pair_index(k, k1, n)
        return PairNeuron(k, k1, self.weight_rows[p].reshape(GRID, GRID),
                          float(self.wh1_flat[p]))

    def wh1(self, k: int, k1: int) -> float:
        return float(self.wh1_flat[_pair_index(k, k1, self.n_refs)])

    # -- forward pass ----------------------------------------------------

    def states_block(self, images: list[BinaryImage],
                     backend: str | None = None) -> np.ndarray:
        """First-layer states for a block of inputs, (B, n_neurons)."""
        idx_flat = np.concatenate([im.active_flat for im in images]) \
            if images else np.empty(0, dtype=np.int64)
        offsets = np.zeros(len(images) + 1, dtype=np.int64)
        np.cumsum([im.count() for im in images], out=offsets[1:])
        return backends.masked_row_sums(self.weight_rows, idx_flat,
                                        offsets, backend=backend)

    def win_counts_block(self, states: np.ndarray) -> np.ndarray:
        """Second-layer counts, (B, N), from a block of first-layer states."""
        fires = (states + self.wh1_flat[None, :]) >= 0
        return fires.reshape(-1, self.n_refs, self.n_refs - 1).sum(axis=2)

    def decide_counts(self, counts: np.ndarray, mode: str = "strict") -> np.ndarray:
        """Decisions, (B,), from second-layer counts (REJECTED = -1)."""
        if mode not in ("strict", "argmax"):
            raise ValueError(f"unknown mode {mode!r}")
        wins = counts >= self.b2
        decisions = np.full(len(counts), REJECTED, dtype=np.int64)
        for i in range(len(counts)):
            classes = np.unique(self.ref_digits[wins[i]])
            if len(classes) == 1:
                decisions[i] = classes[0]
            elif mode == "argmax":
                decisions[i] = self.ref_digits[int(np.argmax(counts[i]))]
        return decisions


def second_layer(net: Network, k: int, x: BinaryImage) -> tuple[int, int]:
    """Win count of reference k on input x, and its full-sweep fire bit."""
    states = net.states_block([x])
    counts = net.win_counts_block(states)
    count = int(counts[0, k])
    return count, int(count >= net.b2)


def third_layer(net: Network, digit: int, x: BinaryImage) -> tuple[int, int]:
    """Vote count of a class on input x, and its fire bit (votes > 0)."""
    counts = net.win_counts_block(net.states_block([x]))
    wins = counts[0] >= net.b2
    votes = int(sum(wins[i] for i in net.class_groups.get(digit, ())))
    return votes, int(votes > 0)


def classify(net: Network, x: BinaryImage, mode: str = "strict") -> int:
    """Digit decision for one input; REJECTED when strict mode has no
    unique firing class."""
    counts = net.win_counts_block(net.states_block([x]))
    return int(net.decide_counts(counts, mode=mode)[0])


def forward_trace(net: Network, x: BinaryImage) -> ForwardTrace:
    """Full layer-by-layer trace of a strict-mode classification."""
    states = net.states_block([x])[0]
    fires = (states + net.wh1_flat) >= 0
    first = {}
    for k, k1 in net.pairs():
        p = _pair_index(k, k1, net.n_refs)
        first[(k, k1)] = (float(states[p]), int(fires[p]))
    counts = net.win_counts_block(states[None, :])[0]
    second = {k: (int(counts[k]), int(counts[k] >= net.b2))
              for k in range(net.n_refs)}
    third = {}
    for digit, members in sorted(net.class_groups.items()):
        votes = int(sum(second[k][1] for k in members))
        third[digit] = (votes, int(votes > 0))
    decision = int(net.decide_counts(counts[None, :])[0])
    return ForwardTrace(first, second, third, decision)


def zero_layer_table(ref: BinaryImage, cfg: PhysicalConfig) -> np.ndarray:
    """Per-reference weight table of the (dump-only) zero-layer variant."""
    return potential_table(ref, cfg)


# -- construction ---------------------------------------------------------

def _assemble(refs, cfg, pot) -> Network:
    """Pair rows and thresholds from the reference potential tables.

    Deterministic given (refs, pot): growing a network recomputes old
    rows from unchanged potential tables, so they stay bit-identical.
    """
    n = len(refs)
    rows = np.empty((n * (n - 1), CELLS))
    wh1 = np.empty(n * (n - 1))
    acts = [img.active_flat for _, img in refs]
    p = 0
    for k in range(n):
        for k1 in range(n):
            if k1 == k:
                continue
            row = pot[k] - pot[k1]
            rows[p] = row
            wh1[p] = compute_threshold(float(row[acts[k]].sum()),
                                       float(row[acts[k1]].sum()))
            p += 1
    return Network(refs, cfg, pot, rows, wh1)


def build_network(refs, cfg: PhysicalConfig,
                  kernel: DistanceKernel | None = None) -> Network:
    """Build the full network for an ordered list of (digit, image) refs."""
    refs = [(int(d), img) for d, img in refs]
    if len(refs) < 2:
        raise BuildError(f"need at least 2 references, got {len(refs)}")
    for i, (d, img) in enumerate(refs):
        if not 0 <= d <= 9:
            raise BuildError(f"reference {i} has digit {d} outside 0-9")
        for j in range(i + 1, len(refs)):
            if refs[j][0] == d and refs[j][1] == img:
                raise BuildError(f"duplicate reference at positions {i} and {j}")
    if kernel is None:
        kernel = build_kernel(cfg)
    elif kernel.cfg != cfg:
        raise ConfigMismatchError("kernel was built from a different config")
    pot = np.empty((len(refs), CELLS))
    for i, (_, img) in enumerate(refs):
        pot[i] = potential_table_fast(img, kernel).ravel()
    return _assemble(refs, cfg, pot)


def add_reference(net: Network, digit: int, img: BinaryImage) -> Network:
    """Grow the network by one reference.

    Existing potential tables are reused, so every preexisting pair
    neuron keeps a bit-identical weight table and threshold; only the 2N
    new pair neurons are computed fresh.
    """
    digit = int(digit)
    if not 0 <= digit <= 9:
        raise BuildError(f"digit {digit} outside 0-9")
    for d, existing in net.refs:
        if d == digit and existing == img:
            raise BuildError("duplicate reference")
    kernel = build_kernel(net.cfg)
    pot = np.vstack([net.pot, potential_table_fast(img, kernel).ravel()])
    return _assemble(net.refs + [(digit, img)], net.cfg, pot)


# -- serialization --------------------------------------------------------

def save_network(net: Network, path) -> None:
    """Write a deterministic, self-describing binary archive."""
    acts = [img.active_flat for _, img in net.refs]
    offsets = np.zeros(len(acts) + 1, dtype=np.int64)
    np.cumsum([len(a) for a in acts], out=offsets[1:])
    arrays = [
        ("ref_active_flat", np.concatenate(acts) if acts else
         np.empty(0, dtype=np.int64)),
        ("ref_active_offsets", offsets),
        ("potential_tables", net.pot),
        ("weight_rows", net.weight_rows),
        ("thresholds", net.wh1_flat),
    ]
    header = {
        "format": "fieldnet-network",
        "version": 1,
        "config": net.cfg.as_dict(),
        "n_refs": net.n_refs,
        "ref_digits": [int(d) for d, _ in net.refs],
        "pair_order": "k-major",
        "arrays": [{"name": name, "dtype": arr.dtype.str,
                    "shape": list(arr.shape)} for name, arr in arrays],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    with open(path, "wb") as f:
        f.write(ARCHIVE_MAGIC)
        f.write(len(blob).to_bytes(8, "little"))
        f.write(blob)
        for _, arr in arrays:
            f.write(np.ascontiguousarray(arr).tobytes())


def load_network(path) -> Network:
    """Read an archive written by :func:`save_network`."""
    data = Path(path).read_bytes()
    if data[:len(ARCHIVE_MAGIC)] != ARCHIVE_MAGIC:
        raise ArchiveError(f"{path}: not a fieldnet network archive")
    pos = len(ARCHIVE_MAGIC)
    hlen = int.from_bytes(data[pos:pos + 8], "little")
    pos += 8
    try:
        header = json.loads(data[pos:pos + hlen])
    except ValueError as exc:
        raise ArchiveError(f"{path}: bad archive header: {exc}")
    pos += hlen
    if header.get("format") != "fieldnet-network":
        raise ArchiveError(f"{path}: unknown archive format")
    arrays = {}
    for meta in header["arrays"]:
        dtype = np.dtype(meta["dtype"])
        shape = tuple(meta["shape"])
        n_bytes = dtype.itemsize * int(np.prod(shape)) if shape else dtype.itemsize
        if pos + n_bytes > len(data):
            raise ArchiveError(f"{path}: archive truncated in {meta['name']}")
        arrays[meta["name"]] = np.frombuffer(
            data[pos:pos + n_bytes], dtype=dtype).reshape(shape).copy()
        pos += n_bytes
    cfg = PhysicalConfig(**header["config"])
    offsets = arrays["ref_active_offsets"]
    flat = arrays["ref_active_flat"]
    refs = []
    for i, digit in enumerate(header["ref_digits"]):
        mask = np.zeros(CELLS, dtype=bool)
        mask[flat[offsets[i]:offsets[i + 1]]] = True
        refs.append((int(digit), BinaryImage(mask.reshape(GRID, GRID))))
    n = header["n_refs"]
    if len(refs) != n:
        raise ArchiveError(f"{path}: reference count mismatch")
    net = Network(refs, cfg, arrays["potential_tables"],
                  arrays["weight_rows"], arrays["thresholds"])
    if net.weight_rows.shape != (n * (n - 1), CELLS):
        raise ArchiveError(f"{path}: weight matrix shape mismatch")
    return net
