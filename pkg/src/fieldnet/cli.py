"""Command-line interface.

Subcommands: ``build``, ``eval``, ``dump-weights``, ``add-refs``,
``sweep``.  Every command is deterministic given its flags and input
files; all randomness flows from ``--seed``.  Failures exit nonzero with
a single ``error: <Class>: <message>`` line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import FieldNetError, SelectionError
from .field import (PhysicalConfig, pair_weight_table, table_to_csv,
                    table_to_pgm)
from .harness import (EvalReport, ReferenceSpec, evaluate,
                      references_from_spec, select_references, sweep)
from .mnist_io import binarize, load_idx_images, load_idx_labels, resolve_name
from .network import (add_reference, build_network, load_network,
                      neuron_state, save_network, zero_layer_table)


def _add_data_args(p):
    p.add_argument("--images", required=True, help="IDX image file (.gz ok)")
    p.add_argument("--labels", required=True, help="IDX label file (.gz ok)")


def _add_physics_args(p):
    p.add_argument("--q", type=float, default=1e-9, help="charge per white pixel, C")
    p.add_argument("--d1-cm", type=float, default=2.0, help="grid pitch, cm")
    p.add_argument("--d2-cm", type=float, default=4.0,
                   help="image-to-sensor distance, cm")
    p.add_argument("--coulomb-k", type=float, default=8.9875e9,
                   help="Coulomb constant, V*m/C")
    p.add_argument("--bin-threshold", type=int, default=150,
                   help="white-pixel intensity threshold (strictly above)")


def _add_ref_args(p):
    p.add_argument("--per-class", type=int, default=None,
                   help="references per digit (seeded random selection)")
    p.add_argument("--seed", type=int, default=0, help="selection seed")
    p.add_argument("--ref-spec", default=None,
                   help="reference spec file (digit,ordinal lines)")


def _cfg_from_args(args) -> PhysicalConfig:
    return PhysicalConfig.from_cm(args.d1_cm, args.d2_cm,
                                  coulomb_k=args.coulomb_k, charge=args.q,
                                  bin_threshold=args.bin_threshold)


def _ref_spec_from_args(args, labels) -> ReferenceSpec:
    if args.ref_spec is not None and args.per_class is not None:
        raise SelectionError("give either --ref-spec or --per-class, not both")
    if args.ref_spec is not None:
        return ReferenceSpec.from_file(args.ref_spec)
    per_class = args.per_class if args.per_class is not None else 3
    return select_references(labels, per_class, args.seed)


def _write_report(report: EvalReport, out_dir: Path, stem: str = "report"):
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{stem}.csv").write_text(report.to_csv())
    (out_dir / f"{stem}.json").write_text(report.to_json())


def cmd_build(args) -> int:
    images = load_idx_images(args.images)
    labels = load_idx_labels(args.labels)
    cfg = _cfg_from_args(args)
    spec = _ref_spec_from_args(args, labels)
    refs = references_from_spec(spec, images, labels, cfg.bin_threshold)
    net = build_network(refs, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_network(net, out / "network.fnet")
    manifest = {
        "config": cfg.as_dict(),
        "seed": spec.seed,
        "references": [{"digit": d, "ordinal": o} for d, o in spec.entries],
        "n_refs": net.n_refs,
        "n_neurons": net.n_neurons,
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"built network: {net.n_refs} references, {net.n_neurons} neurons")
    print(f"archive: {out / 'network.fnet'}")
    return 0


def cmd_eval(args) -> int:
    net = load_network(args.archive)
    images = load_idx_images(args.images)
    labels = load_idx_labels(args.labels)
    report = evaluate(net, images, labels, mode=args.mode)
    _write_report(report, Path(args.out))
    print(report.totals_row())
    return 0


def cmd_dump_weights(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.archive:
        net = load_network(args.archive)
        k, k1 = (int(v) for v in args.pair.split(","))
        neuron = net.neuron(k, k1)
        pair_tbl = neuron.weights
        wh1 = neuron.wh1
        name_a, name_b = f"ref{k}", f"ref{k1}"
        zero_a = net.pot[k].reshape(28, 28)
        zero_b = net.pot[k1].reshape(28, 28)
    else:
        images = load_idx_images(args.images)
        labels = load_idx_labels(args.labels)
        cfg = _cfg_from_args(args)
        name_a, name_b = args.pair.split(",")
        img_a = binarize(images[resolve_name(name_a, labels)], cfg.bin_threshold)
        img_b = binarize(images[resolve_name(name_b, labels)], cfg.bin_threshold)
        zero_a = zero_layer_table(img_a, cfg)
        zero_b = zero_layer_table(img_b, cfg)
        pair_tbl = pair_weight_table(img_a, img_b, cfg)
        sum_a = float(pair_tbl.ravel()[img_a.active_flat].sum())
        sum_b = float(pair_tbl.ravel()[img_b.active_flat].sum())
        wh1 = -(sum_a + sum_b) / 2.0
    for name, tbl in ((name_a, zero_a), (name_b, zero_b),
                      (f"pair_{name_a}_{name_b}", pair_tbl)):
        safe = name.replace(",", "_")
        (out / f"{safe}.csv").write_text(table_to_csv(tbl))
        (out / f"{safe}.pgm").write_bytes(table_to_pgm(tbl))
    (out / "wh1.txt").write_text(f"Wh1 = {wh1!r}\n")
    print(f"Wh1 = {wh1}")
    return 0


def cmd_add_refs(args) -> int:
    net = load_network(args.archive)
    images = load_idx_images(args.images)
    labels = load_idx_labels(args.labels)
    additions = ReferenceSpec.from_file(args.ref_spec)
    refs = references_from_spec(additions, images, labels,
                                net.cfg.bin_threshold)
    for digit, img in refs:
        net = add_reference(net, digit, img)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_network(net, out / "network.fnet")
    manifest = {
        "config": net.cfg.as_dict(),
        "added": [{"digit": d, "ordinal": o} for d, o in additions.entries],
        "n_refs": net.n_refs,
        "n_neurons": net.n_neurons,
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"grown network: {net.n_refs} references, {net.n_neurons} neurons")
    return 0


def cmd_sweep(args) -> int:
    images = load_idx_images(args.images)
    labels = load_idx_labels(args.labels)
    cfg = _cfg_from_args(args)
    values = [float(v) for v in args.values.split(",")]
    ref_spec = ReferenceSpec.from_file(args.ref_spec) if args.ref_spec else None
    per_class = args.per_class if args.per_class is not None else 3
    results = sweep(args.parameter, values, images=images, labels=labels,
                    base_cfg=cfg, seed=args.seed, per_class=per_class,
                    ref_spec=ref_spec, mode=args.mode)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["value,images,correct,percent"]
    for value, res in results:
        if isinstance(res, EvalReport):
            _write_report(res, out, stem=f"report_{args.parameter}_{value:g}")
            lines.append(f"{value:g},{res.total_images},{res.total_correct},"
                         f"{res.overall_percent}")
            print(f"{args.parameter}={value:g}: {res.totals_row()}")
        else:
            lines.append(f"{value:g},error,{type(res).__name__},")
            print(f"{args.parameter}={value:g}: error: {res}")
    (out / "sweep.csv").write_text("\n".join(lines) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fieldnet",
        description="electrostatic-weight digit recognition pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build and archive a network")
    _add_data_args(p)
    _add_physics_args(p)
    _add_ref_args(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("eval", help="evaluate an archived network")
    p.add_argument("--archive", required=True)
    _add_data_args(p)
    p.add_argument("--mode", choices=("strict", "argmax"), default="strict")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("dump-weights",
                       help="dump zero-layer/pair weight tables (CSV + PGM)")
    p.add_argument("--archive", default=None,
                   help="dump from an archive (--pair is then 'k,k1' indices)")
    p.add_argument("--pair", required=True,
                   help="'0_157,1_46' image names, or 'k,k1' with --archive")
    p.add_argument("--images", default=None)
    p.add_argument("--labels", default=None)
    _add_physics_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dump_weights)

    p = sub.add_parser("add-refs", help="grow an archived network")
    p.add_argument("--archive", required=True)
    _add_data_args(p)
    p.add_argument("--ref-spec", required=True,
                   help="spec file with the references to add")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_add_refs)

    p = sub.add_parser("sweep", help="build+evaluate over a parameter range")
    _add_data_args(p)
    _add_physics_args(p)
    _add_ref_args(p)
    p.add_argument("--parameter", choices=("d2", "q", "per_class"),
                   required=True)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--mode", choices=("strict", "argmax"), default="strict")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FieldNetError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
