"""Command-line entry point.

Subcommands::

    rsabench synth     --out DIR [--seed N] ...
    rsabench rsm       --manifest FILE --id ID [--condition C] --out DIR [--svg]
    rsabench benchmark --manifest FILE --out DIR [--k 3.1] [--jobs N] [--svg]

Exit codes: 0 success, 1 computation error (degenerate data), 2 usage or
input error. Errors are printed to stderr as one JSON line,
``{"error": <type>, "message": <text>}``.
"""

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

from .benchmark import RunConfig, SynthOptions, format_table, process_file, run_benchmark, write_synthetic_dataset
from .errors import InputError, RsaError, UnknownId
from .figures import render_heatmap
from .io import load_manifest, write_rsm, write_score_report
from .pipeline import DEFAULT_K, Z_AXES, rsm_to_rdm
from .scoring import CEILING_METRICS, CONDITIONS, NO_REPORT, mean_rsm

log = logging.getLogger("rsabench")


def _pipeline_flags(p):
    p.add_argument("--manifest", required=True, type=Path, help="dataset manifest JSON")
    p.add_argument("--out", required=True, type=Path, help="output directory")
    p.add_argument("--k", type=float, default=DEFAULT_K, help="responsiveness threshold in SDs (default %(default)s)")
    p.add_argument("--z-axis", choices=Z_AXES, default="per-feature")
    p.add_argument("--svg", action="store_true", help="also write SVG heatmaps")


def build_parser():
    parser = argparse.ArgumentParser(prog="rsabench", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rsm", help="compute the RSM of one subject or model")
    _pipeline_flags(p)
    p.add_argument("--id", required=True, dest="target", help="subject or model id")
    p.add_argument("--condition", choices=CONDITIONS, default=NO_REPORT, help="condition, for subjects")

    p = sub.add_parser("benchmark", help="score every model under every condition")
    _pipeline_flags(p)
    p.add_argument("--ceiling-metric", choices=CEILING_METRICS, default="spearman")
    p.add_argument("--jobs", type=int, default=1, help="worker threads")
    p.add_argument("--seed", type=int, default=None, help="seed recorded in provenance (synthetic data)")
    p.add_argument("--run-label", default=None, help="label recorded in provenance")

    p = sub.add_parser("synth", help="write a synthetic planted-geometry dataset")
    d = SynthOptions()
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--n-subjects", type=int, default=d.n_subjects)
    p.add_argument("--n-stimuli", type=int, default=d.n_stimuli)
    p.add_argument("--n-features", type=int, default=d.n_features)
    p.add_argument("--noise-sd", type=float, default=d.noise_sd)
    p.add_argument("--n-random-models", type=int, default=d.n_random_models)
    p.add_argument("--responsive-fraction", type=float, default=d.responsive_fraction)
    p.add_argument("--responsive-offset", type=float, default=d.responsive_offset)
    p.add_argument("--identical-subjects", action="store_true", help="every subject gets the same activations")
    return parser


def cmd_rsm(args):
    manifest = load_manifest(args.manifest)
    config = RunConfig(k=args.k, z_axis=args.z_axis)
    subject = manifest.subject(args.target)
    model = manifest.model(args.target)
    if subject is not None:
        if args.condition not in subject.conditions:
            raise UnknownId(f"subject {args.target!r} has no {args.condition!r} recording")
        path = subject.conditions[args.condition]
        stem = f"rsm_{args.target}_{args.condition}"
        label = f"subject {args.target!r} ({args.condition})"
    elif model is not None:
        path = model.path
        stem = f"rsm_{args.target}"
        label = f"model {args.target!r}"
    else:
        raise UnknownId(f"no subject or model with id {args.target!r}")
    rsm, mask = process_file(manifest, path, config, label)
    write_rsm(rsm, args.out / f"{stem}.csv")
    if args.svg:
        svg = render_heatmap(rsm_to_rdm(rsm), manifest.stimuli, title=f"{label} RDM")
        (args.out / f"{stem}.svg").write_text(svg, encoding="utf-8")
    s = mask.summary()
    print(f"{label}: {rsm.n}x{rsm.n} RSM from {s['n_kept']} of {s['n_features']} features"
          + (" (selection fallback)" if s["fallback"] else ""))
    return 0


def cmd_benchmark(args):
    manifest = load_manifest(args.manifest)
    config = RunConfig(
        k=args.k, z_axis=args.z_axis, ceiling_metric=args.ceiling_metric,
        jobs=args.jobs, seed=args.seed, run_label=args.run_label,
    )
    result = run_benchmark(manifest, config)
    write_score_report(result.report, args.out / "report.json")
    if args.svg:
        figures = args.out / "figures"
        figures.mkdir(parents=True, exist_ok=True)
        for cond, subjects in result.subject_rsms.items():
            rdm = rsm_to_rdm(mean_rsm(subjects))
            svg = render_heatmap(rdm, manifest.stimuli, title=f"subject mean RDM ({cond})")
            (figures / f"brain_{cond}.svg").write_text(svg, encoding="utf-8")
        for mid, rsm in result.model_rsms.items():
            svg = render_heatmap(rsm_to_rdm(rsm), manifest.stimuli, title=f"{mid} RDM")
            (figures / f"model_{mid}.svg").write_text(svg, encoding="utf-8")
    print(format_table(result.report))
    return 0


def cmd_synth(args):
    opts = SynthOptions(
        seed=args.seed, n_subjects=args.n_subjects, n_stimuli=args.n_stimuli,
        n_features=args.n_features, noise_sd=args.noise_sd, n_random_models=args.n_random_models,
        responsive_fraction=args.responsive_fraction, responsive_offset=args.responsive_offset,
        identical_subjects=args.identical_subjects,
    )
    if opts.n_subjects < 1 or opts.n_stimuli < 3 or opts.n_features < 1:
        raise InputError("need n-subjects >= 1, n-stimuli >= 3, n-features >= 1")
    manifest = write_synthetic_dataset(args.out, opts)
    print(f"wrote {args.out / 'manifest.json'}: {len(manifest.subjects)} subjects, {len(manifest.models)} models")
    return 0


COMMANDS = {"rsm": cmd_rsm, "benchmark": cmd_benchmark, "synth": cmd_synth}


def _report_error(exc):
    print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    with warnings.catch_warnings():
        warnings.simplefilter("default")
        try:
            return COMMANDS[args.command](args)
        except InputError as exc:
            _report_error(exc)
            return 2
        except RsaError as exc:
            _report_error(exc)
            return 1
        except OSError as exc:
            _report_error(exc)
            return 2


if __name__ == "__main__":
    sys.exit(main())
