import math

import pytest

from devcontrib.complexity import (
    comment_percentage,
    compute_raw,
    cyclomatic,
    halstead_volume,
    loc,
)
from devcontrib.syntax import FunctionUnit, extract_functions, parse_source


def _unit(src, index=0):
    tree = parse_source(src, "java")
    return extract_functions(tree)[index], tree


def test_loc_one_line_function():
    unit, tree = _unit("class C { int one() { return 1; } }")
    assert loc(unit, tree) == 1


def test_loc_counts_physical_lines_including_blanks():
    src = """class C {
    void m() {
        int a = 1;

        int b = 2;

        int c = 3;

        int d = 4;
        use(a, b, c, d);
    }
}"""
    unit, tree = _unit(src)
    # span covers 10 physical lines, 3 of them blank
    assert loc(unit, tree) == 10


def test_loc_fixture_of_known_line_count():
    body_lines = [f"        int v{i} = {i};" for i in range(40)]
    src = "class C {\n    void m() {\n" + "\n".join(body_lines) + "\n    }\n}"
    unit, tree = _unit(src)
    assert loc(unit, tree) == 42


def test_cc_straight_line():
    unit, _ = _unit("class C { void m() { int a = 1; int b = a; use(b); } }")
    assert cyclomatic(unit) == 1


def test_cc_single_if():
    unit, _ = _unit("class C { void m(int p) { if (p > 0) { use(p); } } }")
    assert cyclomatic(unit) == 2


def test_cc_if_with_shortcircuit_plus_loop():
    src = """
    class C {
        void m(int a, int b) {
            if (a > 0 && b > 0) {
                use(a);
            }
            for (int i = 0; i < a; i++) {
                use(i);
            }
        }
    }
    """
    unit, _ = _unit(src)
    assert cyclomatic(unit) == 4


def test_cc_counts_cases_catches_and_ternary():
    src = """
    class C {
        int m(int k) {
            switch (k) {
                case 0:
                    return 1;
                case 1:
                    return 2;
                default:
                    break;
            }
            try {
                run(k);
            } catch (RuntimeException e) {
                reset();
            }
            return k > 0 ? k : -k;
        }
    }
    """
    unit, _ = _unit(src)
    # 1 + case0 + case1 + catch + ternary (default label not a decision)
    assert cyclomatic(unit) == 5


def test_hv_empty_body_zero():
    unit, tree = _unit("class C { void m() { } }")
    assert halstead_volume(unit, tree) == 0.0


def test_hv_hand_counted_example():
    # body "a = b + c": operators {=, +} N1=2; operands {a, b, c} N2=3
    unit, tree = _unit("class C { void m() { a = b + c; } }")
    assert halstead_volume(unit, tree) == pytest.approx(5 * math.log2(5), rel=1e-12)


def test_hv_duplicating_statement_doubles_volume():
    one, tree1 = _unit("class C { void m() { a = b + c; } }")
    two, tree2 = _unit("class C { void m() { a = b + c; a = b + c; } }")
    v1 = halstead_volume(one, tree1)
    v2 = halstead_volume(two, tree2)
    assert v2 == pytest.approx(2 * v1, rel=1e-12)


def test_hv_call_parentheses_counted_once_per_call():
    # operators: ()x2, =; operands: r, f, g, x -> N=8 eta=7... hand count:
    # tokens r = f ( g ( x ) ) -> operators {=, ()x2} N1=3 eta1=2
    # operands {r, f, g, x} N2=4 eta2=4
    unit, tree = _unit("class C { void m() { r = f(g(x)); } }")
    assert halstead_volume(unit, tree) == pytest.approx(7 * math.log2(6), rel=1e-12)


def test_pcom_zero_without_comments():
    unit, tree = _unit("class C { void m() { int a = 1; } }")
    assert comment_percentage(unit, tree) == 0.0


def test_pcom_three_of_twelve():
    lines = ["class C {", "    void m() {"]
    lines += ["        /* alpha", "           beta", "           gamma */"]
    lines += [f"        int v{i} = {i};" for i in range(7)]
    lines += ["    }"]
    src = "\n".join(lines) + "\n}"
    unit, tree = _unit(src)
    assert loc(unit, tree) == 12
    assert comment_percentage(unit, tree) == pytest.approx(0.25)


def test_pcom_full_comment_function():
    src = "class C {\n    void m() { /* a\n b\n c */ }\n}"
    unit, tree = _unit(src)
    assert comment_percentage(unit, tree) == 1.0


def test_metrics_bounds_and_comment_insertion_invariance():
    before_src = """
    class C {
        int m(int p) {
            int a = 1;
            if (p > a) {
                a = p;
            }
            return a;
        }
    }
    """
    after_src = before_src.replace("int a = 1;", "// pick the larger value\n            int a = 1;")
    before, btree = _unit(before_src)
    after, atree = _unit(after_src)
    raw_before = compute_raw(before, btree)
    raw_after = compute_raw(after, atree)
    assert raw_before.cc == raw_after.cc
    assert raw_before.hv == raw_after.hv
    assert raw_after.loc == raw_before.loc + 1
    assert raw_after.pcom > raw_before.pcom
    assert raw_before.cc >= 1 and raw_before.hv >= 0 and 0 <= raw_before.pcom <= 1
    assert raw_before.loc >= 1
