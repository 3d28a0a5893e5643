import numpy as np
import pytest

from devcontrib.astdiff import diff_file_pair
from devcontrib.pdg import (
    FunctionPDG,
    PDGNode,
    build_pdg,
    cdg_impact,
    changed_pdg_nodes,
    ddg_impact,
    impact_range,
)
from devcontrib.syntax import extract_functions, parse_source


def _pdg(src, index=0):
    tree = parse_source(src, "java")
    return build_pdg(extract_functions(tree)[index])


def test_single_def_use_edge():
    pdg = _pdg("class C { void m() { int a = 1; int b = a; } }")
    assert (0, 1) in pdg.ddg_edges


def test_if_body_control_dependent_on_predicate():
    pdg = _pdg("class C { void m(int p) { if (p > 0) { a(); b(); } } }")
    assert (0, 1) in pdg.cdg_edges and (0, 2) in pdg.cdg_edges


def test_fixture_with_seven_known_def_use_pairs():
    src = """
    class C {
        int m(int p) {
            int a = 1;
            int b = a;
            int c = a + b;
            int d = c;
            c = d + b;
            return c;
        }
    }
    """
    pdg = _pdg(src)
    # hand-enumerated def-use pairs:
    # a@0 -> b@1, a@0 -> c@2, b@1 -> c@2, c@2 -> d@3,
    # d@3 -> c@4, b@1 -> c@4, c@4 -> return@5
    expected = {(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (1, 4), (4, 5)}
    assert pdg.ddg_edges == expected


def test_every_edge_endpoint_is_a_node():
    src = """
    class C {
        int m(int p) {
            int acc = 0;
            for (int i = 0; i < p; i++) {
                acc = acc + i;
                if (acc > 10) {
                    break;
                }
            }
            return acc;
        }
    }
    """
    pdg = _pdg(src)
    ids = set(pdg.node_ids())
    assert len(ids) >= 1
    for a, b in pdg.ddg_edges | pdg.cdg_edges:
        assert a in ids and b in ids


def test_ddg_impact_boundaries():
    pdg = _pdg("class C { void m() { int a = 1; int b = a; int c = b; } }")
    assert ddg_impact(pdg, set()) == 0.0
    assert ddg_impact(pdg, set(pdg.node_ids())) == 1.0


def test_five_node_chain_middle_change_reaches_all():
    src = """
    class C { void m() {
        int a = 1;
        int b = a;
        int c = b;
        int d = c;
        int e = d;
    } }
    """
    pdg = _pdg(src)
    assert len(pdg.nodes) == 5
    assert ddg_impact(pdg, {2}) == 1.0


def test_cdg_impact_straight_line_zero():
    pdg = _pdg("class C { void m() { int a = 1; int b = a; } }")
    assert cdg_impact(pdg, {0}) == 0.0


def test_cdg_impact_predicate_controlling_four_of_ten():
    # 10 nodes total; the if-header controls 3 statements, so the affected
    # set is the header plus its 3 dependents: 4 of 10.
    src = """
    class C { void m(int p) {
        int a = 1;
        int b = 2;
        int c = 3;
        if (p > 0) {
            x();
            y();
            z();
        }
        int d = 4;
        int e = 5;
        int f = 6;
    } }
    """
    pdg = _pdg(src)
    assert len(pdg.nodes) == 10
    header = next(n.id for n in pdg.nodes if n.kind == "if_stmt")
    assert cdg_impact(pdg, {header}) == pytest.approx(0.4)


def test_cdg_impact_predicate_controlling_everything():
    src = """
    class C { void m(int p) {
        if (p > 0) {
            x();
            y();
            z();
        }
    } }
    """
    pdg = _pdg(src)
    header = next(n.id for n in pdg.nodes if n.kind == "if_stmt")
    assert cdg_impact(pdg, {header}) == 1.0


def test_cdg_single_statement_branch_does_not_qualify():
    pdg = _pdg("class C { void m(int p) { if (p > 0) { x(); } } }")
    header = next(n.id for n in pdg.nodes if n.kind == "if_stmt")
    assert cdg_impact(pdg, {header}) == 0.0


def test_impact_range_examples():
    assert impact_range(0.0, 0.0) == 1.0
    assert impact_range(1.0, 1.0) == 3.0
    assert impact_range(0.25, 0.0) == 1.5


def test_impacts_monotone_in_changed_set():
    rng = np.random.RandomState(21)
    pdg = _random_pdg(rng, 14)
    ids = pdg.node_ids()
    changed = set()
    last_d, last_c = 0.0, 0.0
    for nid in rng.permutation(ids):
        changed.add(int(nid))
        d = ddg_impact(pdg, changed)
        c = cdg_impact(pdg, changed)
        assert d >= last_d - 1e-15
        assert c >= last_c - 1e-15
        last_d, last_c = d, c


def _random_pdg(rng, max_nodes=20):
    n = int(rng.randint(1, max_nodes + 1))
    nodes = [PDGNode(i, "stmt", (i * 10, i * 10 + 5)) for i in range(n)]
    ddg = {(int(rng.randint(n)), int(rng.randint(n)))
           for _ in range(int(rng.randint(0, 3 * n)))}
    cdg = {(int(rng.randint(n)), int(rng.randint(n)))
           for _ in range(int(rng.randint(0, 2 * n)))}
    ddg = {(a, b) for a, b in ddg if a != b}
    cdg = {(a, b) for a, b in cdg if a != b}
    return FunctionPDG(nodes=nodes, ddg_edges=ddg, cdg_edges=cdg)


def _bfs(adjacency, starts):
    seen = set(starts)
    frontier = list(starts)
    while frontier:
        node = frontier.pop()
        for nxt in adjacency.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


def test_reachability_matches_bfs_oracle():
    rng = np.random.RandomState(33)
    for _ in range(200):
        pdg = _random_pdg(rng)
        ids = pdg.node_ids()
        k = int(rng.randint(0, len(ids) + 1))
        changed = set(int(x) for x in rng.choice(ids, size=k, replace=False)) if k else set()

        fwd = {a: set() for a in ids}
        bwd = {a: set() for a in ids}
        for a, b in pdg.ddg_edges:
            fwd[a].add(b)
            bwd[b].add(a)
        expected_ddg = (len(_bfs(fwd, changed) | _bfs(bwd, changed)) / len(ids)
                        if changed else 0.0)
        assert ddg_impact(pdg, changed) == pytest.approx(expected_ddg)

        csucc = {a: set() for a in ids}
        for a, b in pdg.cdg_edges:
            csucc[a].add(b)
        qualifying = {c for c in changed if len(csucc[c]) > 1}
        expected_set = _bfs(csucc, qualifying) if qualifying else set()
        expected_cdg = len(expected_set) / len(ids) if expected_set else 0.0
        assert cdg_impact(pdg, changed) == pytest.approx(expected_cdg)


def test_deleted_statement_maps_to_next_survivor():
    before_src = """
    class C { void m() {
        one();
        two();
        three();
    } }
    """
    after_src = before_src.replace("        two();\n", "")
    before = parse_source(before_src, "java", path="C.java")
    after = parse_source(after_src, "java", path="C.java")
    _, _, changesets = diff_file_pair(before, after)
    cs = next(c for c in changesets if c.function[0] == "C.m()")
    pdg_before = build_pdg(extract_functions(before)[0])
    pdg_after = build_pdg(extract_functions(after)[0])
    changed = changed_pdg_nodes(pdg_before, pdg_after, cs)
    after_nodes = sorted(pdg_after.nodes, key=lambda n: n.span)
    three = next(n.id for n in after_nodes
                 if "three" in after.source_text[n.span[0]:n.span[1]])
    assert changed == {three}


def test_new_function_changed_set_covers_inserted_statement():
    before_src = "class C { void m() { one(); } }"
    after_src = "class C { void m() { one(); extra(); } }"
    before = parse_source(before_src, "java", path="C.java")
    after = parse_source(after_src, "java", path="C.java")
    _, _, changesets = diff_file_pair(before, after)
    cs = changesets[0]
    pdg_before = build_pdg(extract_functions(before)[0])
    pdg_after = build_pdg(extract_functions(after)[0])
    changed = changed_pdg_nodes(pdg_before, pdg_after, cs)
    assert len(changed) == 1
    assert changed_pdg_nodes(pdg_before, pdg_after,
                             type(cs)(cs.function, [])) == set()


def test_ir_bounds_on_random_instances():
    rng = np.random.RandomState(55)
    for _ in range(200):
        pdg = _random_pdg(rng)
        ids = pdg.node_ids()
        k = int(rng.randint(0, len(ids) + 1))
        changed = set(int(x) for x in rng.choice(ids, size=k, replace=False)) if k else set()
        ir = impact_range(ddg_impact(pdg, changed), cdg_impact(pdg, changed))
        assert 1.0 <= ir <= 3.0
