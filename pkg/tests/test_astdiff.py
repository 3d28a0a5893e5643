import numpy as np
import pytest

from devcontrib.astdiff import (
    FILE_SCOPE,
    DeltaWeights,
    EditAction,
    FunctionChangeSet,
    apply_edit_script,
    delta_ast,
    diff_file_pair,
    edit_script,
    group_by_function,
    map_trees,
)
from devcontrib.syntax import SyntaxNode, SyntaxTree, extract_functions, parse_source

BASE = """
class C {
    int add(int a, int b) {
        int sum = a + b;
        return sum;
    }
    void run(int n) {
        prepare(n);
        validate(n, n + 1);
        finish(n);
    }
}
"""


def _diff(before_src, after_src):
    before = parse_source(before_src, "java", path="C.java")
    after = parse_source(after_src, "java", path="C.java")
    mapping = map_trees(before, after)
    script = edit_script(mapping, before, after)
    return before, after, mapping, script


def test_identical_trees_total_mapping_empty_script():
    before, after, mapping, script = _diff(BASE, BASE)
    assert len(mapping) == sum(1 for _ in before.root.walk())
    assert script == []
    assert apply_edit_script(before, after, mapping, script)


def test_disjoint_trees_empty_mapping():
    a = SyntaxTree(SyntaxNode("alpha", children=[SyntaxNode("beta", label="x")]), "a")
    b = SyntaxTree(SyntaxNode("gamma", children=[SyntaxNode("delta", label="y")]), "b")
    assert len(map_trees(a, b)) == 0


def test_rename_maps_everything_as_update():
    before, after, mapping, script = _diff(BASE, BASE.replace("sum", "total"))
    assert len(mapping) == sum(1 for _ in before.root.walk())
    assert {a.kind for a in script} == {"update"}
    assert all(a.subtree.kind == "identifier" for a in script)
    assert all(a.only_name_or_modifier for a in script)
    assert all(a.subtree_depth == 1 for a in script)
    assert apply_edit_script(before, after, mapping, script)


def test_new_function_single_insert_with_subtree_depth():
    added = BASE[:BASE.rfind("}")] + """    int mul(int a, int b) {
        if (a > 0) {
            return a * b;
        }
        return 0;
    }
}
"""
    before, after, mapping, script = _diff(BASE, added)
    inserts = [a for a in script if a.kind == "insert"]
    assert len(inserts) == 1
    method = next(u for u in extract_functions(after)
                  if u.qualified_name == "C.mul(int,int)")
    assert inserts[0].subtree is method.body
    assert inserts[0].subtree_depth == method.body.height
    assert not inserts[0].only_name_or_modifier
    assert apply_edit_script(before, after, mapping, script)


def test_statement_move_attributed_to_both_functions():
    moved = BASE.replace("        validate(n, n + 1);\n", "")
    moved = moved.replace("        int sum = a + b;",
                          "        int sum = a + b;\n        validate(n, n + 1);")
    before, after, mapping, script = _diff(BASE, moved)
    moves = [a for a in script if a.kind == "move"]
    assert len(moves) == 1
    changesets = group_by_function(script, extract_functions(before),
                                   extract_functions(after), file="C.java")
    holders = {cs.function[0] for cs in changesets
               if any(a.kind == "move" for a in cs.actions)}
    assert holders == {"C.add(int,int)", "C.run(int)"}
    assert apply_edit_script(before, after, mapping, script)


def test_sibling_reorder_is_a_move():
    reordered = BASE.replace(
        "        prepare(n);\n        validate(n, n + 1);\n        finish(n);",
        "        finish(n);\n        prepare(n);\n        validate(n, n + 1);")
    before, after, mapping, script = _diff(BASE, reordered)
    assert {a.kind for a in script} == {"move"}
    assert apply_edit_script(before, after, mapping, script)


def test_comment_only_change_empty_script():
    commented = BASE.replace("int sum = a + b;",
                             "/* accumulate */ int sum = a + b; // done")
    _, _, _, script = _diff(BASE, commented)
    assert script == []


def test_whitespace_only_change_empty_script():
    spaced = BASE.replace("int sum = a + b;", "int  sum  =  a  +  b ;")
    spaced = spaced.replace("    void run", "\n\n      void run")
    _, _, _, script = _diff(BASE, spaced)
    assert script == []


def test_log_statement_insert_is_blacklisted_and_scores_zero():
    logged = BASE.replace("        return sum;",
                          '        log.debug("sum " + sum);\n        return sum;')
    before, after, mapping, script = _diff(BASE, logged)
    assert len(script) == 1
    assert script[0].kind == "insert"
    assert script[0].blacklisted
    changesets = group_by_function(script, extract_functions(before),
                                   extract_functions(after), file="C.java")
    assert delta_ast(changesets[0]) == 0.0


def test_annotation_insert_is_modifier_only():
    annotated = BASE.replace("    int add", "    @Deprecated\n    int add")
    _, _, _, script = _diff(BASE, annotated)
    assert len(script) == 1
    assert script[0].kind == "insert"
    assert script[0].only_name_or_modifier


def test_group_by_function_partition_preserves_actions():
    edited = BASE.replace("int sum = a + b;", "int sum = a * b;")
    edited = edited.replace("prepare(n);", "prepare(n + 2);")
    before, after, mapping, script = _diff(BASE, edited)
    changesets = group_by_function(script, extract_functions(before),
                                   extract_functions(after), file="C.java")
    assert {cs.function[0] for cs in changesets} == {"C.add(int,int)", "C.run(int)"}
    assert sum(len(cs.actions) for cs in changesets) == len(script)


def test_import_edit_goes_to_file_scope():
    before_src = "import java.util.List;\n" + BASE
    after_src = "import java.util.Map;\n" + BASE
    before, after, mapping, script = _diff(before_src, after_src)
    changesets = group_by_function(script, extract_functions(before),
                                   extract_functions(after), file="C.java")
    assert [cs.function[0] for cs in changesets] == [FILE_SCOPE]


# ---------------------------------------------------------------------------
# weighted edit size
# ---------------------------------------------------------------------------

def _action(kind, depth, name_only=False, blacklisted=False):
    return EditAction(kind=kind, subtree=SyntaxNode("x"), subtree_depth=depth,
                      only_name_or_modifier=name_only, blacklisted=blacklisted)


def test_delta_empty_changeset_zero():
    assert delta_ast(FunctionChangeSet(("m", "f"), [])) == 0.0


def test_delta_single_insert_depth_four():
    cs = FunctionChangeSet(("m", "f"), [_action("insert", 4)])
    assert delta_ast(cs) == 4.0


def test_delta_mixed_example():
    cs = FunctionChangeSet(("m", "f"), [
        _action("delete", 3), _action("move", 2), _action("update", 1, name_only=True),
    ])
    assert delta_ast(cs) == pytest.approx(0.24, abs=1e-12)


def test_delta_additive_over_disjoint_changesets():
    rng = np.random.RandomState(7)
    kinds = ["insert", "update", "delete", "move"]
    a = [_action(kinds[rng.randint(4)], int(rng.randint(1, 9)),
                 bool(rng.rand() < .3), bool(rng.rand() < .2)) for _ in range(20)]
    b = [_action(kinds[rng.randint(4)], int(rng.randint(1, 9)),
                 bool(rng.rand() < .3), bool(rng.rand() < .2)) for _ in range(15)]
    da = delta_ast(FunctionChangeSet(("m", "f"), a))
    db = delta_ast(FunctionChangeSet(("m", "f"), b))
    dab = delta_ast(FunctionChangeSet(("m", "f"), a + b))
    assert dab == pytest.approx(da + db, rel=1e-12)


def test_delta_kind_ordering_for_fixed_subtree():
    w = DeltaWeights()
    for depth in (1, 3, 7):
        d = delta_ast(FunctionChangeSet(("m", "f"), [_action("delete", depth)]), w)
        m = delta_ast(FunctionChangeSet(("m", "f"), [_action("move", depth)]), w)
        i = delta_ast(FunctionChangeSet(("m", "f"), [_action("insert", depth)]), w)
        assert d <= m <= i
        assert d == pytest.approx(0.01 * i, rel=1e-12)
        assert m == pytest.approx(0.1 * i, rel=1e-12)


def test_delta_homogeneous_in_weights():
    rng = np.random.RandomState(11)
    kinds = ["insert", "update", "delete", "move"]
    actions = [_action(kinds[rng.randint(4)], int(rng.randint(1, 9)),
                       bool(rng.rand() < .3)) for _ in range(30)]
    cs = FunctionChangeSet(("m", "f"), actions)
    base = DeltaWeights()
    for c in (0.5, 2.0, 10.0):
        scaled = DeltaWeights(add=base.add * c, update=base.update * c,
                              move=base.move * c, delete=base.delete * c,
                              name_only_factor=base.name_only_factor)
        assert delta_ast(cs, scaled) == pytest.approx(c * delta_ast(cs, base),
                                                      rel=1e-12)


def test_rename_update_uses_name_factor_exactly():
    # rename-only change vs the same-depth plain update (a literal tweak)
    _, _, _, rename_script = _diff(
        "class C { void m() { int alpha = 1; } }",
        "class C { void m() { int beta = 1; } }")
    _, _, _, literal_script = _diff(
        "class C { void m() { int alpha = 1; } }",
        "class C { void m() { int alpha = 2; } }")
    assert [a.kind for a in rename_script] == ["update"]
    assert [a.kind for a in literal_script] == ["update"]
    cs_rename = FunctionChangeSet(("m", "f"), rename_script)
    cs_literal = FunctionChangeSet(("m", "f"), literal_script)
    assert delta_ast(cs_rename) == pytest.approx(0.01 * delta_ast(cs_literal),
                                                 rel=1e-12)


def test_apply_script_on_varied_edits():
    variants = [
        BASE.replace("a + b", "a - b"),
        BASE.replace("int sum = a + b;", "int sum = a + b;\n        audit(sum);"),
        BASE.replace("        prepare(n);\n", ""),
        BASE.replace("validate(n, n + 1)", "validate(n, n + 2, true)"),
        BASE.replace("void run(int n)", "void run(int n, int m)"),
        BASE[:BASE.rfind("}")] + "    void extra() { helper(); }\n}\n",
    ]
    for after_src in variants:
        before, after, mapping, script = _diff(BASE, after_src)
        assert apply_edit_script(before, after, mapping, script), after_src
