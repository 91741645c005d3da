"""Batch CLI: copy-spelling simulation, decoder benchmarks, dataset stats,
layout export, and the live session service."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .decoders import (
    FBDSP,
    FBECCA,
    FBSCCA,
    FBTRCA,
    evaluate_accuracy,
    fbdsp_train,
    fbtrca_train,
    make_ecca_model,
    make_scca_model,
)
from .dialogue import bundled_dataset_path, dataset_stats, load_dataset
from .errors import SpellerError
from .keyboard import build_layout
from .service import ServiceConfig, serve_sessions
from .signals import SynthConfig, default_mixing, preprocess, synth_trial
from .simulate import MODES, SimConfig, TimeModel, aggregate, run_copy_task
from .suggest import LlmConfig, LlmSuggester, OracleProfile, load_lexicon_tsv


def _bundled_lexicon_path() -> Path:
    return Path(__file__).parent / "data" / "wordfreq.tsv"


def _parse_profile(text: str) -> OracleProfile:
    w, s = text.split(",")
    return OracleProfile(float(w), float(s))


def cmd_simulate(args) -> int:
    items = load_dataset(args.dataset)
    modes = [m.strip() for m in args.modes.split(",")]
    bad = [m for m in modes if m not in MODES]
    if bad:
        raise SpellerError(f"unknown mode(s) {bad}; choose from {MODES}")

    lexicon = load_lexicon_tsv(args.lexicon)
    llm = None
    if "llm" in modes:
        from .suggest import TrieSuggester
        llm = LlmSuggester(LlmConfig(), fallback=TrieSuggester(lexicon))
    per_mode = {}
    per_mode_results = {}
    for mode in modes:
        cfg = SimConfig(
            accuracy_p=args.p,
            mode=mode,
            time=TimeModel(),
            seed=args.seed,
            monte_carlo_runs=args.runs,
            oracle_profile=_parse_profile(args.profile),
            oracle_profile_mt=_parse_profile(args.profile_mt) if args.profile_mt else None,
        )
        per_mode_results[mode] = run_copy_task(items, cfg, lexicon=lexicon,
                                               llm_suggester=llm)
        per_mode[mode] = per_mode_results[mode]

    metrics = aggregate(per_mode, items)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.csv").write_text(metrics.to_csv())
    (out / "report.json").write_text(json.dumps(metrics.to_dicts(), indent=2))
    if args.traces:
        with (out / "traces.jsonl").open("w") as fh:
            for mode, by_item in per_mode_results.items():
                for i, runs in by_item.items():
                    for r, res in enumerate(runs):
                        fh.write(json.dumps({
                            "mode": mode, "item": i, "run": r,
                            "keystrokes": res.keystrokes, "time_s": res.time_s,
                            "completed": res.completed, "aborted": res.aborted,
                            "trace": [[s.buffer, s.key, s.was_error] for s in res.trace],
                        }) + "\n")
    print(metrics.to_csv(), end="")
    print(f"report written to {out}/report.csv", file=sys.stderr)
    return 0


_BENCH_TRAINERS = {
    FBSCCA: None,
    FBECCA: make_ecca_model,
    FBDSP: fbdsp_train,
    FBTRCA: fbtrca_train,
}


def cmd_decode_bench(args) -> int:
    layout = build_layout()
    classes = list(range(1, args.classes + 1))
    methods = [m.strip().upper() for m in args.methods.split(",")]
    bad = [m for m in methods if m not in _BENCH_TRAINERS]
    if bad:
        raise SpellerError(f"unknown method(s) {bad}")

    rows = []
    for subject in range(args.subjects):
        mixing = default_mixing(9, 5, seed=args.seed + 1000 * subject)
        synth = SynthConfig(snr_db=args.snr, mixing=mixing)
        rng = np.random.default_rng((args.seed, subject))

        def make(klass_list, n_each):
            trials, labels = [], []
            for c in klass_list:
                for _ in range(n_each):
                    t = synth_trial(layout.key(c).stimulus, synth,
                                    seed=int(rng.integers(2**31)))
                    trials.append(preprocess(t))
                    labels.append(c)
            return trials, labels

        train, train_y = make(classes, args.train_trials)
        test, test_y = [], []
        for _ in range(args.test_trials):
            c = int(rng.integers(0, len(classes)))
            t, y = make([classes[c]], 1)
            test.append(t[0])
            test_y.append(y[0])

        accs = {}
        for method in methods:
            if method == FBSCCA:
                model = make_scca_model(n_samples=test[0].n_samples)
            elif method == FBECCA:
                model = make_ecca_model(train, train_y)
            elif method == FBDSP:
                model = fbdsp_train(train, train_y)
            else:
                model = fbtrca_train(train, train_y)
            accs[method] = 100.0 * evaluate_accuracy(model, test, test_y)
        rows.append(accs)
        print(f"s{subject + 1:02d}: "
              + "  ".join(f"{m}={accs[m]:.2f}%" for m in methods), file=sys.stderr)

    lines = ["subject," + ",".join(methods)]
    for i, accs in enumerate(rows):
        lines.append(f"s{i + 1:02d}," + ",".join(f"{accs[m]:.2f}" for m in methods))
    avg = {m: np.mean([r[m] for r in rows]) for m in methods}
    lines.append("Avg," + ",".join(f"{avg[m]:.2f}" for m in methods))
    csv_text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(csv_text)
    print(csv_text, end="")
    return 0


def cmd_dataset_stats(args) -> int:
    items = load_dataset(args.dataset)
    stats = dataset_stats(items)
    csv_text = stats.to_csv()
    if args.out:
        Path(args.out).write_text(csv_text)
    print(csv_text, end="")
    return 0


def cmd_layout(args) -> int:
    text = build_layout().to_json()
    if args.out:
        Path(args.out).write_text(text)
    print(text)
    return 0


def cmd_serve(args) -> int:
    cfg = ServiceConfig.from_ini(args.config) if args.config else ServiceConfig()
    if args.port is not None:
        cfg.port = args.port
    if args.http_port is not None:
        cfg.http_port = args.http_port
    if args.mode:
        cfg.suggester = args.mode
    if args.seed is not None:
        cfg.seed = args.seed
    if args.static_root:
        cfg.static_root = Path(args.static_root)
    serve_sessions(cfg)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spellerkit",
                                     description="SSVEP speller engine tools")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="pseudo-online copy-spelling evaluation")
    sim.add_argument("--dataset", default=str(bundled_dataset_path()))
    sim.add_argument("--modes", default="naive,dwg,oracle",
                     help="comma list from naive,dwg,llm,oracle")
    sim.add_argument("--p", type=float, default=1.0, help="decoding accuracy")
    sim.add_argument("--runs", type=int, default=1, help="Monte Carlo runs per item")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--profile", default="1,3", help="oracle word,sentence thresholds")
    sim.add_argument("--profile-mt", default=None,
                     help="oracle thresholds for multi-turn items")
    sim.add_argument("--lexicon", default=str(_bundled_lexicon_path()))
    sim.add_argument("--out", default="reports")
    sim.add_argument("--traces", action="store_true", help="dump full traces")
    sim.set_defaults(func=cmd_simulate)

    bench = sub.add_parser("decode-bench", help="decoder accuracy benchmark")
    bench.add_argument("--subjects", type=int, default=3)
    bench.add_argument("--classes", type=int, default=40)
    bench.add_argument("--snr", type=float, default=-15.0)
    bench.add_argument("--train-trials", type=int, default=5)
    bench.add_argument("--test-trials", type=int, default=60)
    bench.add_argument("--methods", default="FBSCCA,FBECCA,FBDSP,FBTRCA")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--out", default=None)
    bench.set_defaults(func=cmd_decode_bench)

    stats = sub.add_parser("dataset-stats", help="dataset summary table")
    stats.add_argument("--dataset", default=str(bundled_dataset_path()))
    stats.add_argument("--out", default=None)
    stats.set_defaults(func=cmd_dataset_stats)

    layout = sub.add_parser("layout", help="export the 40-key layout as JSON")
    layout.add_argument("--out", default=None)
    layout.set_defaults(func=cmd_layout)

    serve = sub.add_parser("serve", help="run the live session service")
    serve.add_argument("--config", default=None, help="INI config file")
    serve.add_argument("--port", type=int, default=None)
    serve.add_argument("--http-port", type=int, default=None)
    serve.add_argument("--mode", default=None, choices=["none", "trie", "llm"])
    serve.add_argument("--seed", type=int, default=None)
    serve.add_argument("--static-root", default=None)
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SpellerError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
