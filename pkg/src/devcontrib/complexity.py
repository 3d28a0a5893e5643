"""Per-function understandability metrics: LOC, CC, Halstead volume, PCom.

Halstead token classification (this table defines the HV values and must
stay in sync with the implementation below):

* operators: keyword tokens, operator tokens (``=``, ``+``, ``&&``, ...),
  and call parentheses -- every ``(`` directly following an identifier,
  ``this`` or ``super`` counts as one occurrence of the ``()`` operator;
* operands: identifier tokens and literal tokens (numbers, strings, chars,
  ``true``/``false``/``null``);
* all other punctuation (``;`` ``,`` ``.`` ``{}`` ``[]`` ``@`` and grouping
  parentheses) is counted as neither.

Volume is measured over the function's body block and is
``N * log2(eta)`` with ``N`` the total operator+operand occurrences and
``eta`` the distinct count; an empty or one-token-kind body has volume 0.

Cyclomatic complexity uses the strict variant: 1 plus one point per
``if``, loop header (``for``/``while``/``do``), ``case`` label, ``catch``
clause, conditional (ternary) expression, and each short-circuit ``&&`` or
``||`` operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .syntax import FunctionUnit, SyntaxTree, _tokenize, comment_metrics


@dataclass
class ComplexityRaw:
    loc: int
    cc: int
    hv: float
    pcom: float


_DECISION_KINDS = {
    "if_stmt", "while_stmt", "do_stmt", "for_stmt", "foreach_stmt",
    "case_label", "catch_clause", "ternary_expr",
}


def loc(function: FunctionUnit, tree: SyntaxTree) -> int:
    """Physical lines intersecting the function span (blanks included)."""
    start, end = function.span
    if end <= start:
        return 0
    return tree.line_of(max(start, end - 1)) - tree.line_of(start) + 1


def cyclomatic(function: FunctionUnit) -> int:
    """1 + decision points over the function body."""
    points = 0
    for node in function.body.walk():
        if node.kind in _DECISION_KINDS:
            points += 1
        elif node.kind == "binary_expr" and node.label in ("&&", "||"):
            points += 1
    return 1 + points


def _body_span(function: FunctionUnit) -> tuple[int, int]:
    """Span of the function's body block (or lambda body); empty if none."""
    node = function.body
    if node.kind in ("method_decl", "constructor_decl"):
        block = next((c for c in node.children if c.kind == "block"), None)
        return block.span if block is not None else (node.start, node.start)
    if node.kind == "lambda_expr":
        return node.children[1].span
    return node.span


def halstead_volume(function: FunctionUnit, tree: SyntaxTree) -> float:
    """N * log2(eta) over the body's tokens, per the table in the module doc.

    Abstract/empty bodies have volume 0.
    """
    start, end = _body_span(function)
    snippet = tree.source_text[start:end]
    try:
        tokens, _ = _tokenize(snippet)
    except Exception:
        return 0.0
    operators: dict[str, int] = {}
    operands: dict[str, int] = {}
    prev = None
    for tok in tokens:
        if tok.type == "eof":
            break
        if tok.type in ("ident",):
            operands[tok.text] = operands.get(tok.text, 0) + 1
        elif tok.type in ("int", "float", "string", "char", "literal_word"):
            operands[tok.text] = operands.get(tok.text, 0) + 1
        elif tok.type == "keyword":
            operators[tok.text] = operators.get(tok.text, 0) + 1
        elif tok.type == "op":
            operators[tok.text] = operators.get(tok.text, 0) + 1
        elif tok.type == "punct" and tok.text == "(" and prev is not None and (
                prev.type == "ident" or (prev.type == "keyword"
                                         and prev.text in ("this", "super"))):
            operators["()"] = operators.get("()", 0) + 1
        prev = tok
    n_total = sum(operators.values()) + sum(operands.values())
    eta = len(operators) + len(operands)
    if eta <= 1:
        return 0.0
    return n_total * math.log2(eta)


def comment_percentage(function: FunctionUnit, tree: SyntaxTree) -> float:
    """Fraction of the function's physical lines touched by comments."""
    comment_lines, total_lines = comment_metrics(tree, function.span)
    if total_lines == 0:
        return 0.0
    return comment_lines / total_lines


def compute_raw(function: FunctionUnit, tree: SyntaxTree) -> ComplexityRaw:
    return ComplexityRaw(
        loc=loc(function, tree),
        cc=cyclomatic(function),
        hv=halstead_volume(function, tree),
        pcom=comment_percentage(function, tree),
    )
