"""Per-commit analysis pipeline.

Two passes over the walked history.  Pass one follows the depth-first
commit order, keeps the call graph in step (checkpointing at forks and
restoring before sibling branches), diffs every changed source file, and
records raw per-function measurements: weighted edit size, the four
complexity metrics of the version the developer faced, call-graph impact
at the commit's own snapshot, and dependence-graph reach ratios.  Pass two
fits the per-metric normalization over the whole run and fuses the raw
records into function scores and commit values.  Splitting the passes
keeps normalization (and therefore every score) reproducible: a re-run on
the same history yields identical numbers.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

from .astdiff import FILE_SCOPE, DeltaWeights, delta_ast, diff_file_pair
from .callgraph import (
    CallGraph,
    CheckpointStore,
    FunctionId,
    backward_propagate,
    inter_impact,
    pagerank,
)
from .complexity import compute_raw
from .config import AnalysisConfig
from .errors import ParseError
from .pdg import build_pdg, cdg_impact, changed_pdg_nodes, ddg_impact, impact_range
from .repo import (
    CommitRecord,
    VersionTree,
    changed_files,
    first_parent_children,
    open_repository,
    walk_commits,
)
from .scoring import (
    BoxCoxParams,
    combine_complexity,
    commit_cvalue,
    fit_boxcox,
    function_score,
    normalize,
)
from .syntax import extract_functions, language_for_path, parse_source

logger = logging.getLogger(__name__)

_METRICS = ("loc", "cc", "hv", "pcom", "ip", "ddg", "cdg")


@dataclass
class FunctionRecord:
    """One function's raw and fused measurements in one commit."""

    commit_id: str
    function: str
    file: str | None
    delta_ast: float
    is_function: bool = True      # False for the synthetic file-scope unit
    loc: int | None = None
    cc: int | None = None
    hv: float | None = None
    pcom: float | None = None
    ip: float = 0.0
    ddg: float = 0.0
    cdg: float = 0.0
    # fused in pass two
    loc_n: float = 0.0
    cc_n: float = 0.0
    hv_n: float = 0.0
    pcom_n: float = 0.0
    ip_n: float = 0.0
    ddg_n: float = 0.0
    cdg_n: float = 0.0
    cm: float = 1.0
    ir: float = 1.0
    score: float = 0.0

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "commit_id", "function", "file", "delta_ast", "is_function",
            "loc", "cc", "hv", "pcom", "ip", "ddg", "cdg",
            "loc_n", "cc_n", "hv_n", "pcom_n", "ip_n", "ddg_n", "cdg_n",
            "cm", "ir", "score")}

    @classmethod
    def from_dict(cls, d: dict) -> "FunctionRecord":
        return cls(**d)


@dataclass
class CommitResult:
    id: str
    author_email: str
    author_name: str
    author_is_bot: bool
    timestamp: int
    bulk: bool = False
    delta_ast_total: float = 0.0
    cvalue: float = 0.0
    records: list[FunctionRecord] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "id": self.id, "author_email": self.author_email,
            "author_name": self.author_name, "author_is_bot": self.author_is_bot,
            "timestamp": self.timestamp, "bulk": self.bulk,
            "delta_ast_total": self.delta_ast_total, "cvalue": self.cvalue,
            "functions": [r.to_dict() for r in self.records],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CommitResult":
        out = cls(id=d["id"], author_email=d["author_email"],
                  author_name=d["author_name"], author_is_bot=d["author_is_bot"],
                  timestamp=d["timestamp"], bulk=d["bulk"],
                  delta_ast_total=d["delta_ast_total"], cvalue=d["cvalue"])
        out.records = [FunctionRecord.from_dict(r) for r in d["functions"]]
        return out


@dataclass
class AnalysisRun:
    repository: str
    config: dict
    commits: list[CommitResult] = field(default_factory=list)
    developers: list = field(default_factory=list)
    boxcox: dict[str, BoxCoxParams] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    commit_times: dict[str, float] = field(default_factory=dict)
    checkpoint_restores: int = 0

    SCHEMA_VERSION = 1

    def to_dict(self, include_timings: bool = False) -> dict:
        d = {
            "schema_version": self.SCHEMA_VERSION,
            "repository": self.repository,
            "config": self.config,
            "commits": [c.to_dict() for c in self.commits],
            "developers": [dev.to_dict() for dev in self.developers],
            "boxcox": {m: p.to_dict() for m, p in sorted(self.boxcox.items())},
        }
        if include_timings:
            d["timings"] = dict(self.timings)
            d["commit_times"] = dict(self.commit_times)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisRun":
        from .report import DeveloperReport

        run = cls(repository=d["repository"], config=d["config"])
        run.commits = [CommitResult.from_dict(c) for c in d["commits"]]
        run.developers = [DeveloperReport.from_dict(x) for x in d.get("developers", [])]
        run.boxcox = {m: BoxCoxParams.from_dict(p) for m, p in d.get("boxcox", {}).items()}
        run.timings = d.get("timings", {})
        run.commit_times = d.get("commit_times", {})
        return run

    def save(self, path: str | Path):
        Path(path).write_text(
            json.dumps(self.to_dict(), sort_keys=True, indent=0) + "\n",
            encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "AnalysisRun":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass
class PipelineState:
    """Mutable walk state shared across per-commit analysis calls."""

    tree: VersionTree
    config: AnalysisConfig
    graph: CallGraph = field(default_factory=CallGraph)
    weights: DeltaWeights = field(default_factory=DeltaWeights)
    timings: dict[str, float] = field(default_factory=dict)

    def add_time(self, stage: str, seconds: float):
        self.timings[stage] = self.timings.get(stage, 0.0) + seconds


def _parse_or_none(text: str | None, path: str):
    if text is None:
        return None
    language = language_for_path(path)
    if language is None:
        return None
    try:
        return parse_source(text, language, path=path)
    except ParseError as exc:
        logger.warning("skipping %s: parse error at %s", path, exc.position)
        return None


def analyze_commit(commit: CommitRecord, state: PipelineState) -> CommitResult:
    """Raw-metric phase for one commit; the call graph must currently hold
    the commit's first-parent snapshot and is advanced to the commit."""
    cfg = state.config
    result = CommitResult(
        id=commit.id,
        author_email=commit.author.email,
        author_name=commit.author.display_name,
        author_is_bot=commit.author.is_bot,
        timestamp=commit.timestamp,
    )

    t0 = time.perf_counter()
    changes = changed_files(commit, state.tree)
    state.add_time("ingest", time.perf_counter() - t0)
    result.bulk = len(changes) > cfg.bulk_file_threshold

    # diff every parseable source file
    per_file = []
    t0 = time.perf_counter()
    for change in changes:
        if language_for_path(change.path) is None:
            continue
        before_text = change.before_content if change.kind != "added" else ""
        after_text = change.after_content if change.kind != "deleted" else ""
        before = _parse_or_none(before_text if before_text is not None else None,
                                change.path)
        after = _parse_or_none(after_text if after_text is not None else None,
                               change.path)
        if before is None or after is None:
            continue
        _, actions, changesets = diff_file_pair(
            before, after, similarity_threshold=cfg.diff_similarity_threshold,
            blacklist=cfg.blacklist_patterns)
        if changesets:
            per_file.append((change, before, after, changesets))
    state.add_time("diff", time.perf_counter() - t0)

    t0 = time.perf_counter()
    state.graph.update(changes)
    state.add_time("graph", time.perf_counter() - t0)

    if not per_file:
        return result

    t0 = time.perf_counter()
    ranks = pagerank(state.graph, damping=cfg.graph_damping, tol=cfg.graph_tol,
                     max_iter=cfg.graph_max_iter)
    impact = backward_propagate(state.graph, ranks, decay=cfg.graph_decay)
    state.add_time("rank", time.perf_counter() - t0)

    t0 = time.perf_counter()
    for change, before, after, changesets in per_file:
        before_units = {u.qualified_name: u for u in extract_functions(before)}
        after_units = {u.qualified_name: u for u in extract_functions(after)}
        for cs in changesets:
            qname, file = cs.function
            delta = delta_ast(cs, state.weights)
            record = FunctionRecord(commit_id=commit.id, function=qname,
                                    file=file, delta_ast=delta)
            if qname == FILE_SCOPE:
                record.is_function = False
                result.records.append(record)
                continue
            bu = before_units.get(qname)
            au = after_units.get(qname)
            unit, unit_tree = (bu, before) if bu is not None else (au, after)
            if unit is not None:
                raw = compute_raw(unit, unit_tree)
                record.loc, record.cc = raw.loc, raw.cc
                record.hv, record.pcom = raw.hv, raw.pcom
            record.ip = inter_impact(impact, FunctionId(qname, change.path))
            if bu is not None and au is not None:
                pdg_before = build_pdg(bu)
                pdg_after = build_pdg(au)
                changed = changed_pdg_nodes(pdg_before, pdg_after, cs)
                record.ddg = ddg_impact(pdg_after, changed)
                record.cdg = cdg_impact(pdg_after, changed)
            result.records.append(record)
    state.add_time("pdg", time.perf_counter() - t0)

    result.delta_ast_total = sum(r.delta_ast for r in result.records)
    return result


def _fit_all(records, cfg: AnalysisConfig) -> dict[str, BoxCoxParams]:
    populations = {m: [] for m in _METRICS}
    for r in records:
        if not r.is_function:
            continue
        if r.loc is not None:
            populations["loc"].append(float(r.loc))
            populations["cc"].append(float(r.cc))
            populations["hv"].append(float(r.hv))
            populations["pcom"].append(float(r.pcom))
        populations["ip"].append(r.ip)
        populations["ddg"].append(r.ddg)
        populations["cdg"].append(r.cdg)
    return {
        m: fit_boxcox(values, lambda_min=cfg.normalize_lambda_min,
                      lambda_max=cfg.normalize_lambda_max,
                      step=cfg.normalize_lambda_step,
                      min_samples=cfg.normalize_min_samples)
        for m, values in populations.items()
    }


def _fuse(run: AnalysisRun):
    params = run.boxcox
    for commit in run.commits:
        for r in commit.records:
            if not r.is_function:
                r.cm, r.ip_n, r.ir = 1.0, 0.0, 1.0
                r.score = function_score(r.delta_ast, r.cm, r.ip_n, r.ir)
                continue
            if r.loc is not None:
                r.loc_n = normalize(float(r.loc), params["loc"])
                r.cc_n = normalize(float(r.cc), params["cc"])
                r.hv_n = normalize(float(r.hv), params["hv"])
                r.pcom_n = normalize(float(r.pcom), params["pcom"])
                r.cm = combine_complexity(r.loc_n, r.cc_n, r.hv_n, r.pcom_n)
            else:
                r.cm = 1.0
            r.ip_n = normalize(r.ip, params["ip"])
            r.ddg_n = normalize(r.ddg, params["ddg"])
            r.cdg_n = normalize(r.cdg, params["cdg"])
            r.ir = impact_range(r.ddg, r.cdg)
            r.score = function_score(r.delta_ast, r.cm, r.ip_n, r.ir)
        commit.cvalue = commit_cvalue([r.score for r in commit.records])


def analyze_repository(path: str, config: AnalysisConfig | None = None) -> AnalysisRun:
    """Analyze a repository end to end; see the module doc for the phases."""
    cfg = config or AnalysisConfig()
    weights = DeltaWeights(add=cfg.ast_add, update=cfg.ast_update,
                           move=cfg.ast_move, delete=cfg.ast_delete,
                           name_only_factor=cfg.ast_name_factor)

    t_start = time.perf_counter()
    tree = open_repository(path, branch=cfg.branch, bot_patterns=cfg.bot_patterns)
    order = walk_commits(tree)
    children = first_parent_children(tree)

    cache_root = None
    checkpoint_dir = None
    if cfg.cache_dir:
        repo_hash = hashlib.sha1(str(Path(path).resolve()).encode()).hexdigest()[:16]
        cache_root = Path(cfg.cache_dir) / repo_hash
        cache_root.mkdir(parents=True, exist_ok=True)
        checkpoint_dir = cache_root / "graph-checkpoints"
    store = CheckpointStore(checkpoint_dir)

    state = PipelineState(tree=tree, config=cfg, weights=weights)
    run = AnalysisRun(repository=str(path), config=cfg.to_dict())

    fork_ids = {cid for cid, kids in children.items() if len(kids) > 1}
    previous: str | None = None
    for commit in order:
        t_commit = time.perf_counter()
        first_parent = commit.parent_ids[0] if commit.parent_ids else None
        if first_parent is None:
            if previous is not None:
                state.graph = CallGraph()
        elif first_parent != previous:
            state.graph = store.restore(first_parent)
        result = analyze_commit(commit, state)
        if commit.id in fork_ids:
            store.checkpoint(state.graph, commit.id)
        run.commits.append(result)
        run.commit_times[commit.id] = time.perf_counter() - t_commit
        previous = commit.id

    run.checkpoint_restores = store.restores

    if cache_root is not None:
        with open(cache_root / "raw-metrics.jsonl", "w", encoding="utf-8") as fh:
            for commit in run.commits:
                for record in commit.records:
                    fh.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")

    t0 = time.perf_counter()
    all_records = [r for c in run.commits for r in c.records]
    run.boxcox = _fit_all(all_records, cfg)
    state.add_time("fit", time.perf_counter() - t0)

    if cache_root is not None:
        (cache_root / "boxcox-params.json").write_text(
            json.dumps({m: p.to_dict() for m, p in sorted(run.boxcox.items())},
                       sort_keys=True, indent=2), encoding="utf-8")

    t0 = time.perf_counter()
    _fuse(run)
    state.add_time("fuse", time.perf_counter() - t0)

    from .report import aggregate_by_developer

    run.developers = aggregate_by_developer(run)
    state.add_time("total", time.perf_counter() - t_start)
    run.timings = dict(state.timings)
    return run


def timing_report(run: AnalysisRun) -> dict:
    """Wall-clock per stage plus per-commit durations."""
    return {
        "stages": dict(run.timings),
        "per_commit": dict(run.commit_times),
        "commits": len(run.commits),
    }
