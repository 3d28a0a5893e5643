"""Project call graph: incremental maintenance, PageRank, decay propagation.

The graph is stored per file: each source file owns its function nodes and
the call sites found in their bodies.  Call sites keep the callee's dotted
name, so resolution can be redone selectively -- when a commit changes a
file, only that file's sites plus the sites elsewhere whose callee name
gained or lost a definition are re-resolved.  This keeps the incremental
update equal to a full rebuild while touching a fraction of the work.

Resolution is heuristic name matching (no type inference): first functions
in the caller's own file whose qualified name ends with the callee's dotted
path, then project-wide suffix matches, else a synthetic ``external:`` node.

Function importance combines two passes: plain PageRank, where a function
called by many accrues rank, then a backward propagation that walks callee
subtrees and feeds decayed leaf rank back up the call chain, so mid-chain
functions outrank both bare utilities and entry points.  Cycles are handled
by condensing strongly connected components; the mass a component receives
is split equally among its members.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import ParseError, UnknownCheckpoint
from .syntax import (
    SyntaxTree,
    callee_segments,
    extract_functions,
    language_for_path,
    parse_source,
)

logger = logging.getLogger(__name__)

EXTERNAL_PREFIX = "external:"


class FunctionId(NamedTuple):
    name: str
    file: str

    @property
    def external(self) -> bool:
        return self.name.startswith(EXTERNAL_PREFIX)


@dataclass
class CallSite:
    caller: FunctionId
    dotted: str
    simple: str


def _strip_signature(qualified: str) -> str:
    idx = qualified.find("(")
    return qualified if idx < 0 else qualified[:idx]


def _simple_name(qualified: str) -> str:
    return _strip_signature(qualified).rsplit(".", 1)[-1]


def _callee_name(segments: list[str]) -> str | None:
    """Trailing run of plain name segments, dropping this/super/expression parts."""
    cleaned: list[str] = []
    for seg in segments:
        if seg in ("this", "super", "<expr>"):
            cleaned = []
        else:
            cleaned.append(seg)
    return ".".join(cleaned) if cleaned else None


def _type_simple(label: str) -> str:
    """Strip generics/arrays from a type label: ``pkg.Foo<Bar>[]`` -> ``pkg.Foo``."""
    base = label.split("<", 1)[0].replace("[]", "")
    return base


def extract_call_sites(tree: SyntaxTree, units) -> list[CallSite]:
    """Call sites of every named unit, lambdas merged into their enclosing
    function, nested named declarations excluded (they are their own units)."""
    named = [u for u in units if "$lambda" not in u.qualified_name]
    sites = []
    for unit in named:
        fid = FunctionId(unit.qualified_name, tree.path or "")

        def walk(node, at_root):
            if not at_root and node.kind in ("method_decl", "constructor_decl"):
                return
            if node.kind == "call_expr":
                name = _callee_name(callee_segments(node.children[0]))
                if name:
                    sites.append(CallSite(fid, name, name.rsplit(".", 1)[-1]))
            elif node.kind == "new_expr":
                name = _type_simple(node.children[0].label)
                if name:
                    sites.append(CallSite(fid, name, name.rsplit(".", 1)[-1]))
            for child in node.children:
                walk(child, False)

        walk(unit.body, True)
    return sites


class CallGraph:
    """Directed caller -> callee graph with per-file ownership."""

    def __init__(self):
        self.functions_by_file: dict[str, list[FunctionId]] = {}
        self.call_sites: dict[str, list[CallSite]] = {}
        self.resolutions: dict[str, list[tuple[FunctionId, ...]]] = {}
        self.stale_files: set[str] = set()
        self._simple_index: dict[str, set[FunctionId]] = {}

    # -- node bookkeeping ----------------------------------------------------

    def _index_add(self, fid: FunctionId):
        simple = _simple_name(fid.name)
        self._simple_index.setdefault(simple, set()).add(fid)

    def _index_remove(self, fid: FunctionId):
        simple = _simple_name(fid.name)
        bucket = self._simple_index.get(simple)
        if bucket is not None:
            bucket.discard(fid)
            if not bucket:
                del self._simple_index[simple]

    def add_file(self, path: str, tree: SyntaxTree):
        units = extract_functions(tree)
        named = [u for u in units if "$lambda" not in u.qualified_name]
        fids = [FunctionId(u.qualified_name, path) for u in named]
        self.functions_by_file[path] = fids
        for fid in fids:
            self._index_add(fid)
        self.call_sites[path] = extract_call_sites(tree, units)
        self.stale_files.discard(path)

    def remove_file(self, path: str):
        for fid in self.functions_by_file.pop(path, []):
            self._index_remove(fid)
        self.call_sites.pop(path, None)
        self.resolutions.pop(path, None)
        self.stale_files.discard(path)

    # -- resolution ------------------------------------------------------------

    def _suffix_matches(self, candidates, dotted: str):
        parts = dotted.split(".")
        if len(parts) == 1:
            return sorted(candidates)
        out = []
        for fid in candidates:
            qparts = _strip_signature(fid.name).split(".")
            if qparts[-len(parts):] == parts:
                out.append(fid)
        return sorted(out)

    def _resolve_site(self, site: CallSite) -> tuple[FunctionId, ...]:
        local = [fid for fid in self.functions_by_file.get(site.caller.file, ())
                 if _simple_name(fid.name) == site.simple]
        matches = self._suffix_matches(local, site.dotted)
        if not matches:
            project = self._simple_index.get(site.simple, ())
            matches = self._suffix_matches(project, site.dotted)
        if not matches:
            matches = [FunctionId(EXTERNAL_PREFIX + site.dotted, "")]
        return tuple(matches)

    def resolve_file(self, path: str):
        self.resolutions[path] = [self._resolve_site(s)
                                  for s in self.call_sites.get(path, [])]

    def resolve_all(self):
        self.resolutions = {}
        for path in self.call_sites:
            self.resolve_file(path)

    def reresolve_names(self, names: set[str], skip_files: set[str]):
        """Re-resolve sites outside ``skip_files`` whose callee simple name
        gained or lost a definition."""
        if not names:
            return
        for path, sites in self.call_sites.items():
            if path in skip_files:
                continue
            res = self.resolutions.get(path)
            if res is None or len(res) != len(sites):
                self.resolve_file(path)
                continue
            for i, site in enumerate(sites):
                if site.simple in names:
                    res[i] = self._resolve_site(site)

    # -- views -------------------------------------------------------------------

    @property
    def nodes(self) -> set[FunctionId]:
        out = set()
        for fids in self.functions_by_file.values():
            out.update(fids)
        for res in self.resolutions.values():
            for targets in res:
                for t in targets:
                    if t.external:
                        out.add(t)
        return out

    @property
    def edges(self) -> set[tuple[FunctionId, FunctionId]]:
        out = set()
        for path, res in self.resolutions.items():
            sites = self.call_sites.get(path, [])
            for site, targets in zip(sites, res):
                for t in targets:
                    out.add((site.caller, t))
        return out

    def adjacency(self) -> dict[FunctionId, list[FunctionId]]:
        adj: dict[FunctionId, set[FunctionId]] = {fid: set() for fid in self.nodes}
        for src, dst in self.edges:
            adj.setdefault(src, set()).add(dst)
            adj.setdefault(dst, set())
        return {fid: sorted(adj[fid]) for fid in adj}

    def structure(self):
        """Canonical (nodes, edges) pair for structural comparison."""
        return (tuple(sorted(self.nodes)), tuple(sorted(self.edges)))

    def __eq__(self, other):
        if not isinstance(other, CallGraph):
            return NotImplemented
        return self.structure() == other.structure()

    def __hash__(self):
        return hash(self.structure())

    # -- serialization -------------------------------------------------------------

    def to_payload(self) -> dict:
        return {
            "version": 1,
            "files": {
                path: {
                    "functions": [list(fid) for fid in self.functions_by_file.get(path, [])],
                    "sites": [[list(s.caller), s.dotted, s.simple]
                              for s in self.call_sites.get(path, [])],
                    "resolutions": [[list(t) for t in targets]
                                    for targets in self.resolutions.get(path, [])],
                }
                for path in sorted(set(self.functions_by_file) | set(self.call_sites))
            },
            "stale": sorted(self.stale_files),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "CallGraph":
        graph = cls()
        for path, entry in payload["files"].items():
            fids = [FunctionId(*f) for f in entry["functions"]]
            graph.functions_by_file[path] = fids
            for fid in fids:
                graph._index_add(fid)
            graph.call_sites[path] = [
                CallSite(FunctionId(*c), dotted, simple)
                for c, dotted, simple in entry["sites"]
            ]
            graph.resolutions[path] = [
                tuple(FunctionId(*t) for t in targets)
                for targets in entry["resolutions"]
            ]
        graph.stale_files = set(payload.get("stale", ()))
        return graph

    # -- incremental update -----------------------------------------------------------

    def update(self, changes) -> "CallGraph":
        """Apply one commit's file changes; result equals a full rebuild.

        Only source files with a registered grammar adapter participate.
        A file that fails to parse loses its prior nodes and is flagged
        stale until a later change fixes it.
        """
        affected: set[str] = set()
        touched_files: set[str] = set()

        def removed_names(path):
            return {_simple_name(fid.name) for fid in self.functions_by_file.get(path, ())}

        for change in changes:
            paths = [change.path]
            if change.kind == "renamed" and change.old_path:
                paths.append(change.old_path)
            for path in list(paths):
                if language_for_path(path) is None:
                    paths.remove(path)
            if not paths:
                continue
            if change.kind == "renamed" and change.old_path \
                    and language_for_path(change.old_path) is not None:
                affected.update(removed_names(change.old_path))
                self.remove_file(change.old_path)
            if language_for_path(change.path) is None:
                continue
            affected.update(removed_names(change.path))
            self.remove_file(change.path)
            touched_files.add(change.path)
            if change.kind == "deleted" or change.after_content is None:
                continue
            language = language_for_path(change.path)
            try:
                tree = parse_source(change.after_content, language, path=change.path)
            except ParseError as exc:
                logger.warning("skipping %s: parse error at %s", change.path, exc.position)
                self.stale_files.add(change.path)
                continue
            self.add_file(change.path, tree)
            affected.update(_simple_name(fid.name)
                            for fid in self.functions_by_file[change.path])

        for path in touched_files:
            if path in self.call_sites:
                self.resolve_file(path)
        self.reresolve_names(affected, skip_files=touched_files)
        return self


def build_call_graph(files) -> CallGraph:
    """Full build from {path: source_text} (or (path, text) pairs)."""
    graph = CallGraph()
    items = files.items() if hasattr(files, "items") else files
    for path, text in sorted(items):
        language = language_for_path(path)
        if language is None or text is None:
            continue
        try:
            tree = parse_source(text, language, path=path)
        except ParseError as exc:
            logger.warning("skipping %s: parse error at %s", path, exc.position)
            graph.stale_files.add(path)
            continue
        graph.add_file(path, tree)
    graph.resolve_all()
    return graph


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

@dataclass
class GraphCheckpoint:
    commit_id: str
    payload: dict


class CheckpointStore:
    """Keeps frozen graph states keyed by commit id, optionally on disk."""

    def __init__(self, directory: str | Path | None = None):
        self.directory = Path(directory) if directory else None
        if self.directory:
            self.directory.mkdir(parents=True, exist_ok=True)
        self._memory: dict[str, GraphCheckpoint] = {}
        self.restores = 0

    def checkpoint(self, graph: CallGraph, commit_id: str) -> GraphCheckpoint:
        cp = GraphCheckpoint(commit_id, graph.to_payload())
        self._memory[commit_id] = cp
        if self.directory:
            path = self.directory / f"{commit_id}.json"
            path.write_text(json.dumps(cp.payload, sort_keys=True), encoding="utf-8")
        return cp

    def restore(self, commit_id: str) -> CallGraph:
        cp = self._memory.get(commit_id)
        if cp is None and self.directory:
            path = self.directory / f"{commit_id}.json"
            if path.exists():
                cp = GraphCheckpoint(commit_id, json.loads(path.read_text(encoding="utf-8")))
        if cp is None:
            raise UnknownCheckpoint(commit_id)
        self.restores += 1
        return CallGraph.from_payload(cp.payload)

    def discard(self, commit_id: str):
        self._memory.pop(commit_id, None)


# ---------------------------------------------------------------------------
# importance scores
# ---------------------------------------------------------------------------

@dataclass
class ImpactScores:
    map_pr: dict[FunctionId, float] = field(default_factory=dict)
    map_tmp: dict[FunctionId, float] = field(default_factory=dict)
    map_out: dict[FunctionId, float] = field(default_factory=dict)


def pagerank(graph: CallGraph, damping: float = 0.85, tol: float = 1e-8,
             max_iter: int = 200) -> dict[FunctionId, float]:
    """Power-iteration PageRank; a function called by many accrues rank.

    Dangling functions (no outgoing calls) spread their rank uniformly.
    Scores sum to 1.  If the iteration fails to reach ``tol`` a warning is
    logged and the best iterate is returned.
    """
    adj = graph.adjacency()
    ids = sorted(adj)
    n = len(ids)
    if n == 0:
        return {}
    index = {fid: i for i, fid in enumerate(ids)}
    src, dst = [], []
    out_degree = np.zeros(n)
    for fid, callees in adj.items():
        i = index[fid]
        out_degree[i] = len(callees)
        for callee in callees:
            src.append(i)
            dst.append(index[callee])
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    dangling = out_degree == 0
    safe_deg = np.where(dangling, 1.0, out_degree)

    rank = np.full(n, 1.0 / n)
    converged = False
    for _ in range(max_iter):
        contrib = np.zeros(n)
        if len(src):
            np.add.at(contrib, dst, rank[src] / safe_deg[src])
        dangling_mass = rank[dangling].sum()
        new_rank = (1.0 - damping) / n + damping * (contrib + dangling_mass / n)
        if np.abs(new_rank - rank).sum() < tol:
            rank = new_rank
            converged = True
            break
        rank = new_rank
    if not converged:
        logger.warning("pagerank did not converge to %.1e in %d iterations",
                       tol, max_iter)
    return {fid: float(rank[index[fid]]) for fid in ids}


def _tarjan_scc(adj: dict) -> list[list]:
    """Iterative Tarjan; components in reverse topological order."""
    index_of, low, on_stack = {}, {}, set()
    stack, components = [], []
    counter = [0]

    for start in sorted(adj):
        if start in index_of:
            continue
        work = [(start, iter(adj[start]))]
        index_of[start] = low[start] = counter[0]
        counter[0] += 1
        stack.append(start)
        on_stack.add(start)
        while work:
            node, it = work[-1]
            advanced = False
            for child in it:
                if child not in index_of:
                    index_of[child] = low[child] = counter[0]
                    counter[0] += 1
                    stack.append(child)
                    on_stack.add(child)
                    work.append((child, iter(adj[child])))
                    advanced = True
                    break
                if child in on_stack:
                    low[node] = min(low[node], index_of[child])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index_of[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                components.append(comp)
    return components


def backward_propagate(graph: CallGraph, map_pr: dict[FunctionId, float],
                       decay: float = 0.5) -> ImpactScores:
    """Backward weight propagation with decay over the call graph.

    Leaves keep their own rank as propagated mass; every other function
    accumulates decayed mass from its callees, so rank concentrated in
    deep utility leaves flows back toward the middle of the call chain.
    Cycles are condensed; a component's mass is split equally among its
    members, and the final score of every function is its rank plus the
    propagated mass.
    """
    adj = graph.adjacency()
    components = _tarjan_scc(adj)
    comp_of = {}
    for ci, comp in enumerate(components):
        for node in comp:
            comp_of[node] = ci

    comp_children: list[set[int]] = [set() for _ in components]
    for src_node, callees in adj.items():
        ci = comp_of[src_node]
        for dst_node in callees:
            cj = comp_of[dst_node]
            if ci != cj:
                comp_children[ci].add(cj)

    comp_pr = [sum(map_pr.get(n, 0.0) for n in comp) for comp in components]

    # memoized post-order over the condensation (a DAG)
    comp_tmp = [None] * len(components)

    def compute(ci):
        order = []
        seen = set()
        stack = [(ci, False)]
        while stack:
            c, processed = stack.pop()
            if processed:
                order.append(c)
                continue
            if c in seen or comp_tmp[c] is not None:
                continue
            seen.add(c)
            stack.append((c, True))
            for child in comp_children[c]:
                if comp_tmp[child] is None and child not in seen:
                    stack.append((child, False))
        for c in order:
            if comp_tmp[c] is not None:
                continue
            children = comp_children[c]
            if not children:
                comp_tmp[c] = comp_pr[c]
            else:
                comp_tmp[c] = sum(comp_tmp[child] * decay for child in sorted(children))

    for ci in range(len(components)):
        if comp_tmp[ci] is None:
            compute(ci)

    scores = ImpactScores()
    for ci, comp in enumerate(components):
        share = comp_tmp[ci] / len(comp)
        for node in comp:
            pr = map_pr.get(node, 0.0)
            scores.map_pr[node] = pr
            scores.map_tmp[node] = share
            scores.map_out[node] = pr + share
    return scores


def inter_impact(scores: ImpactScores, function: FunctionId) -> float:
    """Raw inter-function impact; 0 for functions absent from the graph."""
    return scores.map_out.get(function, 0.0)
