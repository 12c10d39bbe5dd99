"""Operator command line: init, ingest, query, trace, subcluster,
export-signpost, serve.

Exit codes: 0 success, 1 user error, 2 internal error. WEBMAP_DATA_DIR
overrides the configured data_dir; --seed overrides the configured seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from urllib.parse import quote

from .config import DEFAULT_CONFIG_TEXT, EngineConfig
from .errors import NoMatch, WebMapError
from .overlay import resolve_query, save_cluster_file
from .pipeline import EngineState, ingest, load_state
from .subcluster import attach_subclusters, doc_feature_vector, median_bandwidth, subcluster_documents


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit(2); we map to 1
        raise _UsageError(f"{message}\n\n{self.format_usage()}")


def build_parser() -> _Parser:
    parser = _Parser(prog="webmap", description=__doc__)
    parser.add_argument("--config", default="webmap.json",
                        help="engine config file (default: ./webmap.json)")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the configured seed")
    # the same flags are accepted after the subcommand; SUPPRESS keeps a
    # child's unset default from clobbering a value parsed at the root
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)

    sub = parser.add_subparsers(dest="command")

    sub.add_parser("init", help="write a default config file", parents=[common])

    sub.add_parser("ingest", help="run the full pipeline into data_dir",
                   parents=[common])

    query = sub.add_parser("query", help="resolve a query against the map",
                           parents=[common])
    query.add_argument("text")
    query.add_argument("--peer", default=None, help="peer whose graph resolves the query")

    trace = sub.add_parser("trace", help="trace a topic back along document links",
                           parents=[common])
    trace.add_argument("doc_id")
    trace.add_argument("--depth", type=int, default=5)

    subc = sub.add_parser("subcluster", help="re-run density subclustering for one cluster",
                          parents=[common])
    subc.add_argument("--cluster", required=True, metavar="TRC")
    subc.add_argument("--peer", default=None)

    export = sub.add_parser("export-signpost", help="export a cluster's signpost files",
                            parents=[common])
    export.add_argument("--cluster", required=True, metavar="TRC")
    export.add_argument("--peer", default=None)
    export.add_argument("--out", default=None, help="output directory (default: signpost-<trc>)")

    serve = sub.add_parser("serve", help="serve the read-only HTTP API",
                           parents=[common])
    serve.add_argument("--port", type=int, default=8337)
    serve.add_argument("--host", default="127.0.0.1")
    return parser


def _load_config(args) -> EngineConfig:
    config = EngineConfig.load(args.config)
    if args.seed is not None:
        config.seed = args.seed
    return config


def _load_state(args) -> EngineState:
    config = _load_config(args)
    state = load_state(config.resolved_data_dir())
    if args.seed is not None:
        state.config.seed = args.seed
        state.provider = state.config.provider()
    return state


def _find_cluster(state: EngineState, trc: str, peer: str | None):
    hosts = state.overlay.lookup_cluster(trc)
    if not hosts:
        raise WebMapError(f"no cluster file for {trc!r}")
    host = peer if peer else min(hosts)
    if host not in hosts:
        raise WebMapError(f"cluster {trc!r} is not hosted on peer {host!r}")
    return state.overlay.fetch_cluster(host, trc)


def cmd_init(args) -> int:
    path = Path(args.config)
    if path.exists():
        print(f"refusing to overwrite existing {path}", file=sys.stderr)
        return 1
    path.write_text(DEFAULT_CONFIG_TEXT, encoding="utf-8")
    print(f"wrote {path}")
    return 0


def cmd_ingest(args) -> int:
    config = _load_config(args)
    report = ingest(config)
    print(json.dumps(report.to_dict(), indent=2))
    return 0


def cmd_query(args) -> int:
    state = _load_state(args)
    try:
        result = resolve_query(
            state.overlay, args.text, state.provider,
            state.config.selector(), peer_id=args.peer,
        )
    except NoMatch as err:
        print(f"no match: {err}", file=sys.stderr)
        if err.suggestion:
            print(f"nearest cluster: {err.suggestion}", file=sys.stderr)
        return 1
    print(f"cluster: {result.trc} (host {result.peer_id})")
    for entry, score in result.documents:
        print(f"  {score:+.4f}  {entry.doc_id}  {entry.title}  {entry.url}")
    if result.related_clusters:
        related = ", ".join(f"{r.trc}@{r.peer_id}" for r in result.related_clusters)
        print(f"related clusters: {related}")
    return 0


def cmd_trace(args) -> int:
    state = _load_state(args)
    chain = state.trace(args.doc_id, args.depth)
    overlaps = {
        (l.from_doc, l.to_doc): l.overlap_score for l in state.all_doc_links()
    }
    print(chain[0])
    for a, b in zip(chain, chain[1:]):
        print(f"  -> {b}  (overlap {overlaps[(a, b)]:.2f})")
    return 0


def cmd_subcluster(args) -> int:
    config = _load_config(args)
    state = _load_state(args)
    cluster = _find_cluster(state, args.cluster, args.peer)
    docs = [
        state.overlay.peers[entry.owner_peer].documents[entry.doc_id]
        for entry in sorted(cluster.docs)
    ]
    data_dir = config.resolved_data_dir()
    if not docs:
        attach_subclusters(cluster, [])
        save_cluster_file(data_dir, cluster)
        print(f"cluster {cluster.trc!r}: no documents, subclusters cleared")
        return 0
    settings = state.config.subcluster
    if settings.h is not None:
        bandwidth = settings.h
    else:
        points = [doc_feature_vector(state.provider, d) for d in docs]
        bandwidth = median_bandwidth(points)
    run = subcluster_documents(
        state.provider, docs, settings.mean_shift_config(bandwidth)
    )
    attach_subclusters(cluster, run.records)
    save_cluster_file(data_dir, cluster)
    _update_reclustering(data_dir, f"{cluster.peer_id}/{cluster.trc}",
                         run.reclustering_queue)
    print(f"cluster {cluster.trc!r}: bandwidth {run.bandwidth:.4f}")
    for record in run.records:
        flag = " outlier" if record.outlier else ""
        print(f"  {record.subcluster_id}: {sorted(record.doc_ids)} "
              f"density {record.mode_density:.4f}{flag}")
    if run.reclustering_queue:
        print(f"re-clustering queue: {sorted(run.reclustering_queue)}")
    return 0


def _update_reclustering(data_dir: Path, key: str, queue: set[str]) -> None:
    path = data_dir / "reclustering.json"
    current = {}
    if path.is_file():
        current = json.loads(path.read_text(encoding="utf-8"))
    if queue:
        current[key] = sorted(queue)
    else:
        current.pop(key, None)
    if current:
        path.write_text(
            json.dumps(current, ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )
    elif path.is_file():
        path.unlink()


def cmd_export_signpost(args) -> int:
    state = _load_state(args)
    cluster = _find_cluster(state, args.cluster, args.peer)
    out_dir = Path(args.out) if args.out else Path(f"signpost-{quote(args.cluster, safe='')}")
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for entry in sorted(cluster.docs):
        signpost = state.signposts.get(entry.doc_id)
        if signpost is None:
            continue
        path = out_dir / f"{quote(entry.doc_id, safe='')}.json"
        path.write_text(
            json.dumps(
                {
                    "doc_id": signpost["doc_id"],
                    "authorities": signpost["authorities"],
                    "hubs": signpost["hubs"],
                },
                ensure_ascii=False, indent=2,
            ) + "\n",
            encoding="utf-8",
        )
        written.append(path)
    links = state.doc_links.get(f"{cluster.peer_id}/{cluster.trc}", [])
    links_path = out_dir / "doclinks.json"
    links_path.write_text(
        json.dumps(
            [
                {"from": l.from_doc, "to": l.to_doc, "overlap": l.overlap_score}
                for l in sorted(links, key=lambda l: (l.from_doc, l.to_doc))
            ],
            ensure_ascii=False, indent=2,
        ) + "\n",
        encoding="utf-8",
    )
    written.append(links_path)
    for path in written:
        print(path)
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    config = _load_config(args)
    serve(config.resolved_data_dir(), host=args.host, port=args.port)
    return 0


_COMMANDS = {
    "init": cmd_init,
    "ingest": cmd_ingest,
    "query": cmd_query,
    "trace": cmd_trace,
    "subcluster": cmd_subcluster,
    "export-signpost": cmd_export_signpost,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(str(err), file=sys.stderr)
        return 1
    if not args.command:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except WebMapError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except Exception as err:  # anything unexpected is an internal error
        print(f"internal error: {err!r}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
