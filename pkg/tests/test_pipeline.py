import json

import pytest

from devcontrib.callgraph import build_call_graph
from devcontrib.config import AnalysisConfig
from devcontrib.pipeline import AnalysisRun, analyze_repository, timing_report
from devcontrib.repo import open_repository, walk_commits

BASE_JAVA = """
class Service {
    int handle(int k) {
        int out = transform(k);
        return out;
    }
    int transform(int k) {
        return k * 2;
    }
}
"""


def test_empty_repository_yields_empty_run(make_repo):
    repo = make_repo()
    run = analyze_repository(repo.path)
    assert run.commits == []
    assert run.developers == []


def test_single_commit_adding_one_function(make_repo):
    repo = make_repo()
    repo.commit("init", 1000, {"One.java": "class One { int f() { return 1; } }"})
    run = analyze_repository(repo.path)
    assert len(run.commits) == 1
    commit = run.commits[0]
    assert len(commit.records) == 1
    assert commit.cvalue > 0.0


def test_comment_only_commit_scores_zero(make_repo):
    repo = make_repo()
    repo.commit("init", 1000, {"Service.java": BASE_JAVA})
    repo.commit("comments", 2000, {"Service.java": BASE_JAVA.replace(
        "int out = transform(k);",
        "// delegate to the doubling helper\n        int out = transform(k);")})
    run = analyze_repository(repo.path)
    assert run.commits[1].cvalue == 0.0
    assert run.commits[1].delta_ast_total == 0.0


def test_rename_only_commit_is_heavily_discounted(make_repo):
    repo = make_repo()
    repo.commit("init", 1000, {"Service.java": BASE_JAVA})
    repo.commit("rename", 2000, {"Service.java": BASE_JAVA.replace("out", "result")})
    repo.commit("fresh", 3000, {"Service.java": BASE_JAVA.replace(
        "out", "result").replace("return k * 2;", "return k * 2 + offset(k);")})
    run = analyze_repository(repo.path)
    rename_commit, fresh_commit = run.commits[1], run.commits[2]
    assert 0.0 < rename_commit.delta_ast_total <= 0.01 * fresh_commit.delta_ast_total \
        or rename_commit.delta_ast_total < fresh_commit.delta_ast_total * 0.05


def test_fork_checkpoints_and_restores(make_repo):
    repo = make_repo()
    repo.commit("base", 1000, {"Service.java": BASE_JAVA})
    repo.branch("side")
    repo.commit("side1", 2000, {"Extra.java": "class Extra { void e() { } }"})
    repo.checkout("main")
    repo.commit("main1", 3000, {"Service.java": BASE_JAVA.replace(
        "k * 2", "k * 3")})
    repo.branch("third")
    repo.commit("third1", 4000, {"Third.java": "class Third { void t() { } }"})
    repo.checkout("main")
    repo.commit("main2", 5000, {"Note.txt": "doc"})

    run = analyze_repository(repo.path)
    assert len(run.commits) == 5
    # two forks (base and main1), one extra branch each -> two restores
    assert run.checkpoint_restores == 2


def test_pipeline_graph_matches_full_rebuild_at_every_commit(make_repo):
    repo = make_repo()
    repo.commit("base", 1000, {
        "A.java": "class A { void f() { g(); } void g() { } }",
        "B.java": "class B { void h() { f(); } }",
    })
    repo.branch("side")
    repo.commit("side1", 2000, {"A.java": "class A { void f() { } }"})
    repo.commit("side2", 2500, remove=["B.java"])
    repo.checkout("main")
    repo.commit("main1", 3000, {"C.java": "class C { void k() { h(); } }"})
    repo.commit("main2", 3500, rename={"B.java": "Renamed.java"})

    from devcontrib.callgraph import CallGraph, CheckpointStore
    from devcontrib.repo import changed_files, first_parent_children

    tree = open_repository(repo.path)
    order = walk_commits(tree)
    children = first_parent_children(tree)
    store = CheckpointStore()
    graph = CallGraph()
    previous = None
    for commit in order:
        first = commit.parent_ids[0] if commit.parent_ids else None
        if first is None:
            if previous is not None:
                graph = CallGraph()
        elif first != previous:
            graph = store.restore(first)
        graph.update(changed_files(commit, tree))
        if len(children.get(commit.id, [])) > 1:
            store.checkpoint(graph, commit.id)
        snapshot = {p: t for p, t in repo.snapshots[commit.id].items()
                    if t is not None}
        rebuilt = build_call_graph(snapshot)
        assert graph.structure() == rebuilt.structure(), commit.id
        previous = commit.id


def test_determinism_two_runs_identical(make_repo):
    repo = make_repo()
    repo.commit("init", 1000, {"Service.java": BASE_JAVA})
    repo.commit("edit", 2000, {"Service.java": BASE_JAVA.replace(
        "k * 2", "k * 2 + 1")})
    run1 = analyze_repository(repo.path)
    run2 = analyze_repository(repo.path)
    doc1 = json.dumps(run1.to_dict(), sort_keys=True)
    doc2 = json.dumps(run2.to_dict(), sort_keys=True)
    assert doc1 == doc2


def test_run_roundtrips_through_json(make_repo, tmp_path):
    repo = make_repo()
    repo.commit("init", 1000, {"Service.java": BASE_JAVA})
    run = analyze_repository(repo.path)
    path = tmp_path / "run.json"
    run.save(path)
    loaded = AnalysisRun.load(path)
    assert loaded.to_dict() == run.to_dict()


def test_bulk_flag(make_repo):
    repo = make_repo()
    files = {f"F{i}.java": f"class F{i} {{ void m() {{ }} }}" for i in range(6)}
    repo.commit("big", 1000, files)
    cfg = AnalysisConfig(bulk_file_threshold=5)
    run = analyze_repository(repo.path, cfg)
    assert run.commits[0].bulk


def test_parse_error_degrades_to_file_skip(make_repo):
    repo = make_repo()
    repo.commit("init", 1000, {
        "Good.java": "class Good { void g() { } }",
        "Bad.java": "class Bad { void broken( {",
    })
    repo.commit("edit", 2000, {"Good.java": "class Good { void g() { x(); } }"})
    run = analyze_repository(repo.path)
    assert len(run.commits) == 2
    assert run.commits[1].cvalue > 0.0


def test_timing_report_structure(make_repo):
    repo = make_repo()
    repo.commit("init", 1000, {"Service.java": BASE_JAVA})
    repo.commit("edit", 2000, {"Service.java": BASE_JAVA.replace("k * 2", "k + 9")})
    run = analyze_repository(repo.path)
    report = timing_report(run)
    assert report["commits"] == 2
    assert set(report["per_commit"]) == {c.id for c in run.commits}
    assert all(v >= 0 for v in report["per_commit"].values())
    assert report["stages"]["total"] > 0


def test_cache_directory_layout(make_repo, tmp_path):
    repo = make_repo()
    repo.commit("base", 1000, {"Service.java": BASE_JAVA})
    repo.branch("side")
    repo.commit("side", 2000, {"Extra.java": "class Extra { void e() { } }"})
    repo.checkout("main")
    repo.commit("main", 3000, {"Note.txt": "x"})
    cache = tmp_path / "cache"
    run = analyze_repository(repo.path, AnalysisConfig(cache_dir=str(cache)))
    roots = list(cache.iterdir())
    assert len(roots) == 1
    root = roots[0]
    assert (root / "raw-metrics.jsonl").exists()
    assert (root / "boxcox-params.json").exists()
    assert (root / "graph-checkpoints").is_dir()
    assert list((root / "graph-checkpoints").glob("*.json"))
    params = json.loads((root / "boxcox-params.json").read_text())
    assert set(params) == {"loc", "cc", "hv", "pcom", "ip", "ddg", "cdg"}
