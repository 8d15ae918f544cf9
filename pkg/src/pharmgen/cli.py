"""Command line interface: one executable over the whole pipeline.

Exit codes: 0 success, 1 usage error, 2 data error. All randomness sits
behind --seed; --json switches to machine-readable output. A JSON config
file (--config) supplies defaults that explicit flags override.
"""

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .checkpoint import FORMAT_VERSION, load_checkpoint
from .errors import PharmgenError
from .matching import match_score
from .metrics import diversity, novelty_rate, uniqueness_rate, validity_rate
from .molgraph import canonical_hash, check_validity
from .pharmacophore import (
    hypothesis_from_json, hypothesis_to_json, pharmacophore_from_json,
    pharmacophore_to_json, perceive_features, sample_hypothesis, FeatureType,
)
from .sampling import batch_report, largest_fragment, sample
from .sdf import parse_sdf, serialize_sdf
from .synth import dataset_manifest, gen_synthetic
from .training import TrainConfig, train
from .diffusion import DEFAULT_NU, build_schedule, build_transition_kit, forward_noise


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(1)


def _read_mols(path):
    if path == "-":
        return parse_sdf(sys.stdin.buffer.read())
    with open(path, "rb") as fh:
        return parse_sdf(fh.read())


def _merge_config(args, argv):
    """Config-file values fill in any flag not given explicitly on the line."""
    if getattr(args, "config", None):
        with open(args.config) as fh:
            defaults = json.load(fh)
        explicit = {a.split("=", 1)[0].lstrip("-").replace("-", "_")
                    for a in argv if a.startswith("--")}
        for key, value in defaults.items():
            attr = key.replace("-", "_")
            if hasattr(args, attr) and attr not in explicit:
                setattr(args, attr, value)
    return args


def cmd_gen_data(args):
    mols = gen_synthetic(args.seed, args.count, (args.min, args.max))
    with open(args.out, "wb") as fh:
        fh.write(serialize_sdf(mols))
    manifest = dataset_manifest(args.seed, args.count, (args.min, args.max))
    with open(args.out + ".manifest.json", "w") as fh:
        fh.write(manifest)
    if args.json:
        print(json.dumps({"out": args.out, "count": args.count}))
    else:
        print(f"wrote {args.count} molecules to {args.out}")
    return 0


def cmd_featurize(args):
    mols = _read_mols(args.mol)
    records = []
    for i, m in enumerate(mols):
        groups = perceive_features(m)
        rec = {"index": i, "name": m.name,
               "features": [{"type": FeatureType(t).name, "members": members}
                            for t, members in groups]}
        records.append(rec)
        if args.hyp_out and i == args.record:
            hyp, gp = sample_hypothesis(m, seed=args.seed, groups=groups)
            with open(args.hyp_out, "w") as fh:
                fh.write(hypothesis_to_json(hyp, tol=args.tol))
            if args.pharm_out:
                with open(args.pharm_out, "w") as fh:
                    fh.write(pharmacophore_to_json(gp))
    print(json.dumps(records, indent=None if args.json else 2))
    return 0


def cmd_noise_demo(args):
    mols = _read_mols(args.mol)
    from .diffusion import marginals_from_dataset
    sched = build_schedule(args.T, DEFAULT_NU)
    kit = build_transition_kit(sched, marginals_from_dataset(mols))
    rng = np.random.default_rng(args.seed)
    rows = []
    for t in sorted({1, args.T // 4, args.T // 2, 3 * args.T // 4, args.T}):
        noisy = forward_noise(mols[0], t, sched, kit, rng)
        flips = float(np.mean(np.argmax(noisy.atom_types, -1)
                              != np.argmax(mols[0].atom_types, -1)))
        rows.append({"t": t,
                     "alpha_bar_coords": sched.alpha_bar["coords"][t],
                     "atom_flip_rate": flips,
                     "coord_rms": float(np.sqrt(np.mean(noisy.coords ** 2)))})
    print(json.dumps(rows, indent=None if args.json else 2))
    return 0


def cmd_train(args):
    mols = _read_mols(args.data)
    from .errors import TooFewFeatures
    dataset = []
    for i, m in enumerate(mols):
        try:
            _, gp = sample_hypothesis(m, seed=args.seed + i)
        except TooFewFeatures:
            gp = None
        dataset.append((m, gp))
    config = TrainConfig(epochs=args.epochs, batch_size=args.batch_size,
                         learning_rate=args.learning_rate, seed=args.seed,
                         T=args.T, layers=args.layers, width=args.width,
                         dropout=args.dropout)
    progress = None if args.json else (
        lambda epoch, total: print(f"epoch {epoch}: loss {total:.4f}", file=sys.stderr))
    _, history, _ = train(config, dataset, checkpoint_path=args.out,
                          log_path=args.log, progress=progress)
    if args.json:
        print(json.dumps({"out": args.out, "initial_loss": history[0],
                          "final_loss": history[-1]}))
    else:
        print(f"checkpoint written to {args.out} (final loss {history[-1]:.4f})")
    return 0


def cmd_sample(args):
    params, header = load_checkpoint(args.ckpt)
    gp = None
    if args.pharm:
        with open(args.pharm) as fh:
            gp = pharmacophore_from_json(fh.read())
    n_atoms = "auto" if args.n_atoms == "auto" else int(args.n_atoms)

    if args.threads > 1:
        def one(i):
            return sample(params, header, gp=gp, n_atoms=n_atoms, count=1,
                          seed=args.seed + i)[0]
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            mols = list(pool.map(one, range(args.count)))
    else:
        mols = sample(params, header, gp=gp, n_atoms=n_atoms,
                      count=args.count, seed=args.seed)
    if args.fragment:
        mask = gp.mask_indices if gp is not None else None
        mols = [largest_fragment(m, mask)[0] for m in mols]
    with open(args.out, "wb") as fh:
        fh.write(serialize_sdf(mols))

    report = None
    if args.hyp:
        with open(args.hyp) as fh:
            hyp, tol = hypothesis_from_json(fh.read())
        report = batch_report(mols, hypothesis=hyp, tol=tol)
    else:
        report = batch_report(mols)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(report.to_json())
    print(report.to_json() if args.json else
          f"wrote {len(mols)} molecules to {args.out}")
    return 0


def cmd_match(args):
    mols = _read_mols(args.mol)
    with open(args.hyp) as fh:
        hyp, tol = hypothesis_from_json(fh.read())
    if args.tol is not None:
        tol = args.tol

    def score(m):
        return match_score(m, hyp, tol=tol)

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            results = list(pool.map(score, mols))
    else:
        results = [score(m) for m in mols]
    rows = [{"index": i, "name": m.name, "ms": r.ms,
             "matched_pairs": r.matched_pairs, "total_pairs": r.total_pairs,
             "mapping": r.mapping}
            for i, (m, r) in enumerate(zip(mols, results))]
    out = rows[0] if len(rows) == 1 else rows
    print(json.dumps(out, indent=None if args.json else 2))
    return 0


def cmd_eval(args):
    mols = _read_mols(args.samples)
    doc = {"count": len(mols), "validity": validity_rate(mols)}
    if any(check_validity(m) for m in mols):
        doc["uniqueness"] = uniqueness_rate(mols)
        if args.train:
            train_hashes = {canonical_hash(m) for m in _read_mols(args.train)}
            doc["novelty"] = novelty_rate(mols, train_hashes)
        try:
            doc["diversity"] = diversity(mols)
        except PharmgenError:
            pass
    if args.hyp:
        with open(args.hyp) as fh:
            hyp, tol = hypothesis_from_json(fh.read())
        report = batch_report(mols, hypothesis=hyp, tol=tol)
        doc.update(ms_mean=report.ms_mean, pmr=report.pmr)
        doc["ms_ge_0.8"] = report.ms_ge_0_8
    print(json.dumps(doc, indent=None if args.json else 2))
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(doc, fh, indent=2)
    return 0


def build_parser():
    parser = _Parser(prog="pharmgen")
    parser.add_argument("--version", action="version",
                        version=f"pharmgen checkpoint-format {FORMAT_VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--json", action="store_true")
        p.add_argument("--config", default=None)
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1)

    p = sub.add_parser("gen-data", help="generate a synthetic SDF dataset")
    common(p)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--min", type=int, default=6)
    p.add_argument("--max", type=int, default=16)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen_data, _required=["count", "out"])

    p = sub.add_parser("featurize", help="perceive features / extract a hypothesis")
    common(p)
    p.add_argument("--mol", default=None)
    p.add_argument("--record", type=int, default=0)
    p.add_argument("--tol", type=float, default=1.0)
    p.add_argument("--hyp-out", default=None)
    p.add_argument("--pharm-out", default=None)
    p.set_defaults(func=cmd_featurize, _required=["mol"])

    p = sub.add_parser("noise-demo", help="show forward-noising statistics")
    common(p)
    p.add_argument("--mol", default=None)
    p.add_argument("--T", type=int, default=500)
    p.set_defaults(func=cmd_noise_demo, _required=["mol"])

    p = sub.add_parser("train", help="train a denoiser checkpoint")
    common(p)
    p.add_argument("--data", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--log", default=None)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--learning-rate", type=float, default=3e-4)
    p.add_argument("--T", type=int, default=500)
    p.add_argument("--layers", type=int, default=4)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--dropout", type=float, default=0.1)
    p.set_defaults(func=cmd_train, _required=["data", "out"])

    p = sub.add_parser("sample", help="generate molecules from a checkpoint")
    common(p)
    p.add_argument("--ckpt", default=None)
    p.add_argument("--pharm", default=None, help="pharmacophore graph JSON")
    p.add_argument("--hyp", default=None, help="hypothesis JSON (for the report)")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--n-atoms", default="auto")
    p.add_argument("--fragment", action="store_true",
                   help="keep only the largest connected fragment")
    p.add_argument("--out", default=None)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_sample, _required=["ckpt", "out"])

    p = sub.add_parser("match", help="score molecules against a hypothesis")
    common(p)
    p.add_argument("--mol", default=None, help="SDF path, or - for stdin")
    p.add_argument("--hyp", default=None)
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=cmd_match, _required=["mol", "hyp"])

    p = sub.add_parser("eval", help="compute generation metrics over an SDF")
    common(p)
    p.add_argument("--samples", default=None)
    p.add_argument("--train", default=None)
    p.add_argument("--hyp", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval, _required=["samples"])
    return parser


def main(argv=None):
    parser = build_parser()
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    args = parser.parse_args(argv)
    args = _merge_config(args, argv)
    missing = [n for n in getattr(args, "_required", [])
               if getattr(args, n, None) is None]
    if missing:
        parser.error("the following arguments are required: "
                     + ", ".join("--" + n.replace("_", "-") for n in missing))
    try:
        return args.func(args)
    except (PharmgenError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
