"""Operator entry point: build indexes, run ad-hoc queries, benchmark, serve.

Exit codes: 0 success, 1 usage error, 2 data error. Every command accepts
``--format json`` for machine-readable output.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from . import evaluation, index_store, rank
from .errors import ApirecError
from .quality import DEFAULT_RUBRIC, load_rubric

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--features", default="tree,text,fuzzy",
                        help="comma list drawn from tree,text,fuzzy")
    parser.add_argument("--tree-feat", default="ppmi", choices=rank.TREE_FEATURIZATIONS)
    parser.add_argument("--text-feat", default="tfidf", choices=rank.TEXT_FEATURIZATIONS)
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON file with a full fusion config (overrides the flags)")


def _fusion_config(args: argparse.Namespace) -> rank.FusionConfig:
    if args.config is not None:
        return rank.FusionConfig.from_dict(json.loads(args.config.read_text(encoding="utf-8")))
    enabled = tuple(f for f in args.features.split(",") if f)
    return rank.FusionConfig(
        enabled_features=enabled,
        tree_featurization=args.tree_feat,
        text_featurization=args.text_feat,
    )


def _emit(payload: dict[str, Any], as_json: bool, text: str) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True) if as_json else text)


def _cmd_index(args: argparse.Namespace) -> int:
    config = index_store.BuildConfig(
        min_df_tree=args.min_df_tree,
        min_df_keyword=args.min_df_keyword,
        ppmi_tree=not args.no_ppmi_tree,
        ppmi_keyword=not args.no_ppmi_keyword,
    )
    rubric = load_rubric(args.rubric) if args.rubric else DEFAULT_RUBRIC
    index = index_store.build_index(args.corpus_dir, config, rubric=rubric,
                                    embeddings_sidecar=args.embeddings)
    index_store.save_index(index, args.out)
    stats = index.stats()
    _emit({"index_dir": str(args.out), **stats}, args.format == "json",
          "indexed {endpoints} endpoints ({ingest[files_parsed]} files parsed, "
          "{ingest[files_skipped]} skipped) -> {out}\n"
          "tree vocabulary: {tree_vocab_size} tokens, keyword vocabulary: {keyword_vocab_size} tokens"
          .format(out=args.out, **stats))
    return EXIT_OK


def _format_results_table(results: Sequence[rank.RankedResult]) -> str:
    lines = [f"{'rank':>4}  {'id':>6}  {'probability':>11}  {'raw':>7}  breakdown  name"]
    for pos, r in enumerate(results, start=1):
        breakdown = " ".join(f"{k}={v:.3f}" for k, v in r.feature_breakdown.items())
        lines.append(f"{pos:>4}  {r.endpoint_id:>6}  {r.normalized_probability:>11.6f}  "
                     f"{r.raw_score:>7.4f}  {breakdown}  {r.name}")
    return "\n".join(lines)


def _cmd_query(args: argparse.Namespace) -> int:
    index = index_store.load_index(args.index)
    config = _fusion_config(args)
    draft = evaluation.parse_draft(Path(args.draft).read_text(encoding="utf-8"))
    results = rank.rank_endpoints(draft, index, config, top_k=args.top_k)
    payload = {
        "query_name": draft.endpoint_name,
        "results": [
            {
                "endpoint_id": r.endpoint_id,
                "name": r.name,
                "normalized_probability": r.normalized_probability,
                "raw_score": r.raw_score,
                "feature_breakdown": r.feature_breakdown,
            }
            for r in results
        ],
    }
    _emit(payload, args.format == "json", _format_results_table(results))
    return EXIT_OK


def _cmd_evaluate(args: argparse.Namespace) -> int:
    index = index_store.load_index(args.index)
    config = _fusion_config(args)
    lexicon = evaluation.load_synonym_lexicon(args.lexicon) if args.lexicon else None
    metrics, logs = evaluation.run_retrieval_benchmark(
        index, config, n_queries=args.n, mode=args.mode, seed=args.seed, lexicon=lexicon)
    if args.log:
        evaluation.write_query_logs(logs, args.log)
    payload = {
        "mode": args.mode,
        "n_queries": len(logs),
        "seed": args.seed,
        "features": list(config.enabled_features),
        "tree_featurization": config.tree_featurization,
        "text_featurization": config.text_featurization,
        "recall_at": {str(k): v for k, v in metrics.recall_at.items()},
    }
    table = (f"{args.mode} retrieval over {len(logs)} queries (seed {args.seed})\n"
             f"{'features':<20} {'tree':<8} {'text':<8} "
             + " ".join(f"R@{k}" for k in sorted(metrics.recall_at)) + "\n"
             f"{'+'.join(config.enabled_features):<20} {config.tree_featurization:<8} "
             f"{config.text_featurization:<8} "
             + " ".join(f"{metrics.recall_at[k]:.3f}" for k in sorted(metrics.recall_at)))
    _emit(payload, args.format == "json", table)
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from . import service

    host, _, port = args.listen.rpartition(":")
    app = service.create_app_from_path(args.index, top_k_max=args.top_k_max, ui_dir=args.ui)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="info")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="apirec",
                                     description="OpenAPI 2.0 endpoint recommendation engine")
    parser.add_argument("--format", choices=("text", "json"), default="text")
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="build an index from a directory of specs")
    p_index.add_argument("corpus_dir", type=Path)
    p_index.add_argument("--out", type=Path, required=True)
    p_index.add_argument("--min-df-tree", type=int, default=10)
    p_index.add_argument("--min-df-keyword", type=int, default=15)
    p_index.add_argument("--no-ppmi-tree", action="store_true")
    p_index.add_argument("--no-ppmi-keyword", action="store_true")
    p_index.add_argument("--embeddings", type=Path, default=None,
                         help="sidecar of dense text embeddings (JSON lines)")
    p_index.add_argument("--rubric", type=Path, default=None,
                         help="quality rubric override file")
    p_index.add_argument("--jobs", type=int, default=None,
                         help="accepted for symmetry; the build is single-pass")
    p_index.set_defaults(func=_cmd_index)

    p_query = sub.add_parser("query", help="rank endpoints against a draft file")
    p_query.add_argument("--index", type=Path, required=True)
    p_query.add_argument("draft", type=Path)
    p_query.add_argument("--top-k", type=int, default=10)
    _add_config_flags(p_query)
    p_query.set_defaults(func=_cmd_query)

    p_eval = sub.add_parser("evaluate", help="run a masked/mangled retrieval benchmark")
    p_eval.add_argument("--index", type=Path, required=True)
    p_eval.add_argument("--mode", choices=("masked", "mangled"), default="masked")
    p_eval.add_argument("--n", type=int, default=1000)
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--lexicon", type=Path, default=None)
    p_eval.add_argument("--log", type=Path, default=None,
                        help="write per-query results to this file (JSON lines)")
    p_eval.add_argument("--jobs", type=int, default=None,
                        help="accepted for symmetry; queries run sequentially")
    _add_config_flags(p_eval)
    p_eval.set_defaults(func=_cmd_evaluate)

    p_serve = sub.add_parser("serve", help="serve the HTTP API over a loaded index")
    p_serve.add_argument("--index", type=Path, required=True)
    p_serve.add_argument("--listen", default="127.0.0.1:8080")
    p_serve.add_argument("--top-k-max", type=int, default=100)
    p_serve.add_argument("--ui", type=Path, default=None,
                         help="directory of static UI assets to serve at /")
    p_serve.set_defaults(func=_cmd_serve)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except ApirecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
