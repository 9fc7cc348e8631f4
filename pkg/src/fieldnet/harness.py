"""Reference selection, whole-dataset evaluation, reports, and sweeps."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import backends
from .errors import DatasetError, FieldNetError, SelectionError
from .field import PhysicalConfig
from .mnist_io import DatasetIndex, binarize
from .network import REJECTED, Network, build_network


@dataclass(frozen=True)
class ReferenceSpec:
    """Ordered reference entries as (digit, class-ordinal) pairs."""

    entries: tuple[tuple[int, int], ...]
    seed: int | None = None

    def __post_init__(self):
        seen = set()
        for digit, ordinal in self.entries:
            if not 0 <= digit <= 9:
                raise SelectionError(f"digit {digit} outside 0-9")
            if ordinal < 0:
                raise SelectionError(f"negative ordinal {ordinal}")
            if (digit, ordinal) in seen:
                raise SelectionError(f"duplicate entry {digit},{ordinal}")
            seen.add((digit, ordinal))

    def to_file(self, path) -> None:
        lines = ["# fieldnet reference spec: digit,class-ordinal per line"]
        if self.seed is not None:
            lines.append(f"# seed {self.seed}")
        lines += [f"{d},{o}" for d, o in self.entries]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def from_file(cls, path) -> "ReferenceSpec":
        entries = []
        for ln, raw in enumerate(Path(path).read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                digit_s, ordinal_s = line.split(",")
                entries.append((int(digit_s), int(ordinal_s)))
            except ValueError:
                raise SelectionError(f"{path}:{ln}: bad entry {raw!r}")
        return cls(tuple(entries))

    def resolve(self, index: DatasetIndex) -> list[int]:
        """Dataset positions for all entries."""
        return [index.resolve_class_ordinal(d, o) for d, o in self.entries]


def select_references(labels: np.ndarray, per_class: int,
                      seed: int) -> ReferenceSpec:
    """Seeded balanced selection: per_class draws per digit, uniform
    without replacement, ordered by digit then draw order.

    Draws are prefixes of one per-class permutation, so selections with
    the same seed nest across per_class sizes (growing a reference base
    keeps the smaller base intact, matching cascade network growth).
    """
    if per_class < 1:
        raise SelectionError(f"per_class must be >= 1, got {per_class}")
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    entries = []
    for digit in range(10):
        n = int((labels == digit).sum())
        if n < per_class:
            raise SelectionError(
                f"class {digit} has {n} images, fewer than {per_class}")
        order = rng.permutation(n)
        entries += [(digit, int(o)) for o in order[:per_class]]
    return ReferenceSpec(tuple(entries), seed=seed)


def references_from_spec(spec: ReferenceSpec, images: np.ndarray,
                         labels: np.ndarray, threshold: int = 150):
    """Materialize (digit, BinaryImage) pairs for a reference spec."""
    index = DatasetIndex.from_labels(labels)
    return [(d, binarize(images[index.resolve_class_ordinal(d, o)], threshold))
            for d, o in spec.entries]


@dataclass
class EvalReport:
    """Per-digit and overall recognition counts, Tables-style."""

    per_digit_correct: list[int]          # s_j
    per_digit_total: list[int]            # i_j
    rejects: int
    mode: str = "strict"

    @property
    def total_images(self) -> int:
        return sum(self.per_digit_total)

    @property
    def total_correct(self) -> int:
        return sum(self.per_digit_correct)

    @staticmethod
    def _pct(correct: int, total: int) -> int:
        # integer percent, half rounded up, exact in integer arithmetic
        if total == 0:
            return 0
        return (200 * correct + total) // (2 * total)

    @property
    def per_digit_percent(self) -> list[int]:
        return [self._pct(s, i) for s, i in
                zip(self.per_digit_correct, self.per_digit_total)]

    @property
    def overall_percent(self) -> int:
        return self._pct(self.total_correct, self.total_images)

    def totals_row(self) -> str:
        return f"{self.total_images}, {self.total_correct}, {self.overall_percent}%"

    def to_csv(self) -> str:
        lines = ["digit,correct,total,percent"]
        for d in range(10):
            lines.append(f"{d},{self.per_digit_correct[d]},"
                         f"{self.per_digit_total[d]},{self.per_digit_percent[d]}")
        lines.append(f"total,{self.total_correct},{self.total_images},"
                     f"{self.overall_percent}")
        lines.append(f"rejects,{self.rejects},,")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "EvalReport":
        rows = text.strip().splitlines()
        correct = [0] * 10
        total = [0] * 10
        rejects = 0
        for row in rows[1:]:
            head, *rest = row.split(",")
            if head == "total":
                continue
            if head == "rejects":
                rejects = int(rest[0])
                continue
            correct[int(head)] = int(rest[0])
            total[int(head)] = int(rest[1])
        return cls(correct, total, rejects)

    def to_json(self) -> str:
        doc = {
            "mode": self.mode,
            "per_digit": [
                {"digit": d, "correct": self.per_digit_correct[d],
                 "total": self.per_digit_total[d],
                 "percent": self.per_digit_percent[d]}
                for d in range(10)
            ],
            "total": {"images": self.total_images,
                      "correct": self.total_correct,
                      "percent": self.overall_percent},
            "rejects": self.rejects,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        doc = json.loads(text)
        correct = [0] * 10
        total = [0] * 10
        for row in doc["per_digit"]:
            correct[row["digit"]] = row["correct"]
            total[row["digit"]] = row["total"]
        return cls(correct, total, doc["rejects"], doc.get("mode", "strict"))


def evaluate(net: Network, images: np.ndarray, labels: np.ndarray,
             mode: str = "strict", chunk: int = 512,
             backend: str | None = None) -> EvalReport:
    """Classify every image and tally per-digit correct counts.

    A REJECTED decision is never correct.  Deterministic for a fixed
    network, dataset, and backend.
    """
    images = np.asarray(images)
    labels = np.asarray(labels)
    if len(images) != len(labels):
        raise DatasetError(
            f"{len(images)} images vs {len(labels)} labels")
    thr = net.cfg.bin_threshold
    correct = [0] * 10
    total = [0] * 10
    rejects = 0
    for d in range(10):
        total[d] = int((labels == d).sum())
    for start in range(0, len(images), chunk):
        block = images[start:start + chunk]
        masks = (block.reshape(len(block), -1) > thr)
        counts_per_img = masks.sum(axis=1)
        offsets = np.zeros(len(block) + 1, dtype=np.int64)
        np.cumsum(counts_per_img, out=offsets[1:])
        idx_flat = np.flatnonzero(masks.ravel()).astype(np.int64)
        idx_flat -= np.repeat(np.arange(len(block), dtype=np.int64) * masks.shape[1],
                              counts_per_img)
        states = backends.masked_row_sums(net.weight_rows, idx_flat,
                                          offsets, backend=backend)
        decisions = net.decide_counts(net.win_counts_block(states), mode=mode)
        lab = labels[start:start + chunk]
        rejects += int((decisions == REJECTED).sum())
        for d in range(10):
            correct[d] += int(((decisions == lab) & (lab == d)).sum())
    return EvalReport(correct, total, rejects, mode=mode)


def sweep(parameter: str, values, *, images: np.ndarray, labels: np.ndarray,
          base_cfg: PhysicalConfig, seed: int = 0, per_class: int = 3,
          ref_spec: ReferenceSpec | None = None, mode: str = "strict"):
    """Build + evaluate once per parameter value.

    ``parameter`` is one of ``d2``, ``q``, ``per_class``.  The reference
    set is held fixed across physical-parameter sweeps; a ``per_class``
    sweep reselects with the fixed seed (selections nest).  Per-value
    errors are captured in the result list instead of aborting.
    """
    if parameter not in ("d2", "q", "per_class"):
        raise ValueError(f"unknown sweep parameter {parameter!r}")
    if len(values) == 0:
        raise ValueError("no sweep values given")
    results = []
    for value in values:
        try:
            if parameter == "per_class":
                spec = select_references(labels, int(value), seed)
                cfg = base_cfg
            else:
                spec = ref_spec if ref_spec is not None else \
                    select_references(labels, per_class, seed)
                if parameter == "d2":
                    cfg = PhysicalConfig(coulomb_k=base_cfg.coulomb_k,
                                         charge=base_cfg.charge,
                                         pixel_pitch=base_cfg.pixel_pitch,
                                         plane_gap=float(value),
                                         bin_threshold=base_cfg.bin_threshold)
                else:
                    cfg = PhysicalConfig(coulomb_k=base_cfg.coulomb_k,
                                         charge=float(value),
                                         pixel_pitch=base_cfg.pixel_pitch,
                                         plane_gap=base_cfg.plane_gap,
                                         bin_threshold=base_cfg.bin_threshold)
            refs = references_from_spec(spec, images, labels, cfg.bin_threshold)
            net = build_network(refs, cfg)
            results.append((value, evaluate(net, images, labels, mode=mode)))
        except FieldNetError as exc:
            results.append((value, exc))
    return results
