"""Engine configuration and corpus input.

One human-editable JSON file carries every hyperparameter (seed, s, t,
approach, k, theta, bandwidth, outlier thresholds, peer layout). Unknown
keys and out-of-range values are rejected at load. All relative paths are
resolved against the config file's directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .embedding import (
    DEFAULT_CONTEXT_WEIGHT,
    DEFAULT_DIMENSION,
    EmbeddingProvider,
    FileProvider,
    StubProvider,
)
from .errors import ConfigError
from .proxgraph import DEFAULT_STOPWORDS, ProxGraphConfig, TermSelector
from .signpost import (
    DEFAULT_LINK_THETA,
    DEFAULT_MAX_ITER,
    DEFAULT_MIN_ASSN,
    DEFAULT_TOL,
    DEFAULT_TOP_K,
)
from .subcluster import MeanShiftConfig


def _require_keys(section: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {unknown}")


@dataclass
class EmbeddingSettings:
    kind: str = "stub"
    dimension: int = DEFAULT_DIMENSION
    context_weight: float = DEFAULT_CONTEXT_WEIGHT
    vector_file: str | None = None

    def validate(self) -> None:
        if self.kind not in ("stub", "file"):
            raise ConfigError(f"embedding.kind must be 'stub' or 'file', got {self.kind!r}")
        if self.kind == "file" and not self.vector_file:
            raise ConfigError("embedding.kind 'file' requires embedding.vector_file")
        if self.dimension < 2:
            raise ConfigError("embedding.dimension must be >= 2")
        if self.context_weight < 0:
            raise ConfigError("embedding.context_weight must be >= 0")


@dataclass
class SignpostSettings:
    k: int = DEFAULT_TOP_K
    theta: float = DEFAULT_LINK_THETA
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    d_min: float = DEFAULT_MIN_ASSN

    def validate(self) -> None:
        if self.k < 1:
            raise ConfigError("signpost.k must be >= 1")
        if not 0.0 <= self.theta <= 1.0:
            raise ConfigError("signpost.theta must lie in [0, 1]")
        if self.tol <= 0:
            raise ConfigError("signpost.tol must be > 0")
        if self.max_iter < 1:
            raise ConfigError("signpost.max_iter must be >= 1")
        if self.d_min < 0:
            raise ConfigError("signpost.d_min must be >= 0")


@dataclass
class SubclusterSettings:
    h: float | None = None  # None = median pairwise distance per run
    epsilon: float = 1e-5
    max_iter: int = 500
    merge_radius: float | None = None
    min_pts: int = 2
    tau: float = 0.05

    def validate(self) -> None:
        try:
            MeanShiftConfig(
                h=self.h if self.h is not None else 1.0,
                epsilon=self.epsilon,
                max_iter=self.max_iter,
                merge_radius=self.merge_radius,
                min_pts=self.min_pts,
                tau=self.tau,
            )
        except ValueError as err:
            raise ConfigError(f"subcluster: {err}") from err
        if self.h is not None and self.h <= 0:
            raise ConfigError("subcluster.h must be > 0 when given")

    def mean_shift_config(self, bandwidth: float) -> MeanShiftConfig:
        return MeanShiftConfig(
            h=bandwidth,
            epsilon=self.epsilon,
            max_iter=self.max_iter,
            merge_radius=self.merge_radius,
            min_pts=self.min_pts,
            tau=self.tau,
        )


@dataclass
class PeerSpec:
    peer_id: str
    corpus: list[str] = field(default_factory=list)


@dataclass
class EngineConfig:
    seed: int = 42
    data_dir: str = "data"
    embedding: EmbeddingSettings = field(default_factory=EmbeddingSettings)
    proxgraph_s: float = 0.5
    proxgraph_t: int | None = None
    approach: str = "B"
    stopwords: list[str] | None = None  # None = built-in default list
    allowlist_file: str | None = None
    signpost: SignpostSettings = field(default_factory=SignpostSettings)
    subcluster: SubclusterSettings = field(default_factory=SubclusterSettings)
    peers: list[PeerSpec] = field(default_factory=list)
    base_dir: Path = field(default_factory=Path.cwd)

    # -- construction ---------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path) -> "EngineConfig":
        _require_keys(
            data,
            {"seed", "data_dir", "embedding", "proxgraph", "selector",
             "signpost", "subcluster", "peers"},
            "config",
        )
        cfg = cls(base_dir=base_dir)
        cfg.seed = data.get("seed", cfg.seed)
        if not isinstance(cfg.seed, int):
            raise ConfigError("seed must be an integer")
        cfg.data_dir = data.get("data_dir", cfg.data_dir)

        emb = data.get("embedding", {})
        _require_keys(emb, {"kind", "dimension", "context_weight", "vector_file"},
                      "embedding")
        cfg.embedding = EmbeddingSettings(
            kind=emb.get("kind", "stub"),
            dimension=emb.get("dimension", DEFAULT_DIMENSION),
            context_weight=emb.get("context_weight", DEFAULT_CONTEXT_WEIGHT),
            vector_file=emb.get("vector_file"),
        )
        cfg.embedding.validate()

        prox = data.get("proxgraph", {})
        _require_keys(prox, {"s", "t", "approach"}, "proxgraph")
        cfg.proxgraph_s = prox.get("s", cfg.proxgraph_s)
        t = prox.get("t", cfg.proxgraph_t)
        if t == "unbounded":
            t = None
        cfg.proxgraph_t = t
        cfg.approach = prox.get("approach", cfg.approach)

        selector = data.get("selector", {})
        _require_keys(selector, {"stopwords", "allowlist_file"}, "selector")
        stopwords = selector.get("stopwords")
        if stopwords is not None and not isinstance(stopwords, list):
            raise ConfigError("selector.stopwords must be a list or null")
        cfg.stopwords = stopwords
        cfg.allowlist_file = selector.get("allowlist_file")

        sig = data.get("signpost", {})
        _require_keys(sig, {"k", "theta", "tol", "max_iter", "d_min"}, "signpost")
        cfg.signpost = SignpostSettings(
            k=sig.get("k", DEFAULT_TOP_K),
            theta=sig.get("theta", DEFAULT_LINK_THETA),
            tol=sig.get("tol", DEFAULT_TOL),
            max_iter=sig.get("max_iter", DEFAULT_MAX_ITER),
            d_min=sig.get("d_min", DEFAULT_MIN_ASSN),
        )
        cfg.signpost.validate()

        sub = data.get("subcluster", {})
        _require_keys(
            sub, {"h", "epsilon", "max_iter", "merge_radius", "min_pts", "tau"},
            "subcluster",
        )
        cfg.subcluster = SubclusterSettings(
            h=sub.get("h"),
            epsilon=sub.get("epsilon", 1e-5),
            max_iter=sub.get("max_iter", 500),
            merge_radius=sub.get("merge_radius"),
            min_pts=sub.get("min_pts", 2),
            tau=sub.get("tau", 0.05),
        )
        cfg.subcluster.validate()

        peers = data.get("peers", [])
        seen = set()
        for spec in peers:
            _require_keys(spec, {"peer_id", "corpus"}, "peers[]")
            peer_id = spec.get("peer_id", "")
            if not peer_id:
                raise ConfigError("peers[].peer_id must be non-empty")
            if peer_id in seen:
                raise ConfigError(f"duplicate peer_id {peer_id!r}")
            seen.add(peer_id)
            corpus = spec.get("corpus", [])
            if not isinstance(corpus, list):
                raise ConfigError("peers[].corpus must be a list of paths/globs")
            cfg.peers.append(PeerSpec(peer_id=peer_id, corpus=list(corpus)))

        # exercises ProxGraphConfig range checks early
        try:
            cfg.prox_config()
        except ValueError as err:
            raise ConfigError(f"proxgraph: {err}") from err
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "EngineConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as err:
            raise ConfigError(f"config file {path} is not valid JSON: {err}") from err
        return cls.from_dict(data, base_dir=path.resolve().parent)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "data_dir": str(self.resolved_data_dir()),
            "embedding": {
                "kind": self.embedding.kind,
                "dimension": self.embedding.dimension,
                "context_weight": self.embedding.context_weight,
                "vector_file": (
                    str(self.resolve(self.embedding.vector_file))
                    if self.embedding.vector_file
                    else None
                ),
            },
            "proxgraph": {
                "s": self.proxgraph_s,
                "t": self.proxgraph_t,
                "approach": self.approach,
            },
            "selector": {
                "stopwords": self.stopwords,
                "allowlist_file": (
                    str(self.resolve(self.allowlist_file))
                    if self.allowlist_file
                    else None
                ),
            },
            "signpost": {
                "k": self.signpost.k,
                "theta": self.signpost.theta,
                "tol": self.signpost.tol,
                "max_iter": self.signpost.max_iter,
                "d_min": self.signpost.d_min,
            },
            "subcluster": {
                "h": self.subcluster.h,
                "epsilon": self.subcluster.epsilon,
                "max_iter": self.subcluster.max_iter,
                "merge_radius": self.subcluster.merge_radius,
                "min_pts": self.subcluster.min_pts,
                "tau": self.subcluster.tau,
            },
            "peers": [
                {
                    "peer_id": spec.peer_id,
                    "corpus": [str(self.resolve(c)) for c in spec.corpus],
                }
                for spec in self.peers
            ],
        }

    # -- derived objects --------------------------------------------------

    def resolve(self, path: str | Path) -> Path:
        path = Path(path)
        return path if path.is_absolute() else self.base_dir / path

    def resolved_data_dir(self) -> Path:
        import os

        override = os.environ.get("WEBMAP_DATA_DIR")
        if override:
            return Path(override).resolve()
        return self.resolve(self.data_dir)

    def provider(self) -> EmbeddingProvider:
        if self.embedding.kind == "file":
            return FileProvider.load(self.resolve(self.embedding.vector_file))
        return StubProvider(
            seed=self.seed,
            dimension=self.embedding.dimension,
            context_weight=self.embedding.context_weight,
        )

    def selector(self) -> TermSelector:
        stopwords = (
            DEFAULT_STOPWORDS if self.stopwords is None
            else frozenset(w.lower() for w in self.stopwords)
        )
        allowlist = None
        if self.allowlist_file:
            allowlist = TermSelector.from_allowlist_file(
                self.resolve(self.allowlist_file)
            ).allowlist
        return TermSelector(stopwords=stopwords, allowlist=allowlist)

    def prox_config(self) -> ProxGraphConfig:
        return ProxGraphConfig(
            s=self.proxgraph_s,
            t=self.proxgraph_t,
            approach=self.approach,
            selector=self.selector(),
        )


DEFAULT_CONFIG_TEXT = json.dumps(
    {
        "seed": 42,
        "data_dir": "data",
        "embedding": {
            "kind": "stub",
            "dimension": DEFAULT_DIMENSION,
            "context_weight": DEFAULT_CONTEXT_WEIGHT,
            "vector_file": None,
        },
        "proxgraph": {"s": 0.5, "t": None, "approach": "B"},
        "selector": {"stopwords": None, "allowlist_file": None},
        "signpost": {
            "k": DEFAULT_TOP_K,
            "theta": DEFAULT_LINK_THETA,
            "tol": DEFAULT_TOL,
            "max_iter": DEFAULT_MAX_ITER,
            "d_min": DEFAULT_MIN_ASSN,
        },
        "subcluster": {
            "h": None,
            "epsilon": 1e-5,
            "max_iter": 500,
            "merge_radius": None,
            "min_pts": 2,
            "tau": 0.05,
        },
        "peers": [{"peer_id": "p1", "corpus": ["corpus/*.jsonl"]}],
    },
    indent=2,
) + "\n"


@dataclass(frozen=True)
class CorpusRecord:
    id: str
    url: str
    title: str
    text: str


@dataclass
class CorpusLoadResult:
    records: list[CorpusRecord]
    errors: list[str]


def load_corpus(spec: PeerSpec, config: EngineConfig) -> CorpusLoadResult:
    """Read a peer's corpus: JSONL record files and/or directories of .txt
    files (filename stem becomes the id, first line the title). Unreadable
    inputs are recorded and skipped."""
    records: list[CorpusRecord] = []
    errors: list[str] = []
    seen_ids: set[str] = set()

    def add(record: CorpusRecord, source: str) -> None:
        if not record.id:
            errors.append(f"{source}: record with empty id skipped")
            return
        if record.id in seen_ids:
            errors.append(f"{source}: duplicate doc id {record.id!r} skipped")
            return
        seen_ids.add(record.id)
        records.append(record)

    paths: list[Path] = []
    for pattern in spec.corpus:
        resolved = config.resolve(pattern)
        if resolved.exists():
            paths.append(resolved)
            continue
        matches = sorted(resolved.parent.glob(resolved.name))
        if not matches:
            errors.append(f"{pattern}: no files matched")
        paths.extend(matches)

    for path in paths:
        if path.is_dir():
            for txt in sorted(path.glob("*.txt")):
                _load_txt(txt, add, errors)
        elif path.suffix == ".txt":
            _load_txt(path, add, errors)
        else:
            try:
                with open(path, "r", encoding="utf-8") as fh:
                    for lineno, line in enumerate(fh, start=1):
                        line = line.strip()
                        if not line:
                            continue
                        try:
                            entry = json.loads(line)
                            add(
                                CorpusRecord(
                                    id=str(entry["id"]),
                                    url=str(entry.get("url", "")),
                                    title=str(entry.get("title", "")),
                                    text=str(entry["text"]),
                                ),
                                f"{path}:{lineno}",
                            )
                        except (json.JSONDecodeError, KeyError) as err:
                            errors.append(f"{path}:{lineno}: bad record ({err})")
            except OSError as err:
                errors.append(f"{path}: unreadable ({err})")
    return CorpusLoadResult(records=records, errors=errors)


def _load_txt(path: Path, add, errors: list[str]) -> None:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        errors.append(f"{path}: unreadable ({err})")
        return
    first_line = text.strip().splitlines()[0].strip() if text.strip() else ""
    add(
        CorpusRecord(id=path.stem, url=f"file://{path}", title=first_line, text=text),
        str(path),
    )
