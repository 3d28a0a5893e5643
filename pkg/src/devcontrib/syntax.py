"""Language-neutral syntax-tree model plus a built-in Java-like grammar adapter.

The tree model is deliberately small: every node has a ``kind`` tag, an
optional ``label`` (identifier text, literal text, operator symbol, ...),
an ordered child list and a source span.  Comments never enter the tree;
they are collected on the side so that comment edits produce no tree edits
while comment-line counting stays possible.

Grammar adapters are registered per language id / file extension.  The
shipped adapter parses a Java-like language: classes, interfaces, fields,
methods, constructors, the usual statement forms, operator-precedence
expressions, generics in type position, annotations and lambdas.  It is a
source-level parser with no name resolution; anything it cannot parse
raises :class:`~devcontrib.errors.ParseError` and the caller skips the file.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .config import DEFAULT_BLACKLIST
from .errors import ParseError


# ---------------------------------------------------------------------------
# tree model
# ---------------------------------------------------------------------------

class SyntaxNode:
    """One node of a parsed tree."""

    __slots__ = ("kind", "label", "children", "start", "end", "parent",
                 "_height", "_struct_hash")

    def __init__(self, kind, label=None, children=None, start=0, end=0):
        self.kind = kind
        self.label = label
        self.children = children if children is not None else []
        self.start = start
        self.end = end
        self.parent = None
        self._height = None
        self._struct_hash = None

    @property
    def is_leaf(self):
        return not self.children

    @property
    def span(self):
        return (self.start, self.end)

    @property
    def height(self):
        """Subtree depth: 1 for a leaf, 1 + max over children otherwise."""
        if self._height is None:
            if self.children:
                self._height = 1 + max(c.height for c in self.children)
            else:
                self._height = 1
        return self._height

    @property
    def struct_hash(self):
        """Hash of (kind, label, child structure); equal for isomorphic subtrees."""
        if self._struct_hash is None:
            self._struct_hash = hash(
                (self.kind, self.label, tuple(c.struct_hash for c in self.children))
            )
        return self._struct_hash

    def walk(self):
        """Yield this node and all descendants, pre-order."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def descendants(self):
        for child in self.children:
            yield from child.walk()

    def leaves(self):
        for node in self.walk():
            if node.is_leaf:
                yield node

    def ancestors(self):
        node = self.parent
        while node is not None:
            yield node
            node = node.parent

    def isomorphic_to(self, other):
        if self.struct_hash != other.struct_hash:
            return False
        if self.kind != other.kind or self.label != other.label:
            return False
        if len(self.children) != len(other.children):
            return False
        return all(a.isomorphic_to(b) for a, b in zip(self.children, other.children))

    def __repr__(self):
        lbl = f" {self.label!r}" if self.label is not None else ""
        return f"<{self.kind}{lbl} [{self.start}:{self.end}] h={self.height}>"


@dataclass
class Comment:
    start: int
    end: int
    text: str


class SyntaxTree:
    """A parsed file: root node, raw source, and out-of-tree comments."""

    def __init__(self, root: SyntaxNode, source_text: str, comments=None,
                 language: str = "java", path: str | None = None):
        self.root = root
        self.source_text = source_text
        self.comments = comments or []
        self.language = language
        self.path = path
        self._line_starts = None
        for node in root.walk():
            for child in node.children:
                child.parent = node

    @property
    def line_starts(self):
        if self._line_starts is None:
            starts = [0]
            for i, ch in enumerate(self.source_text):
                if ch == "\n":
                    starts.append(i + 1)
            self._line_starts = starts
        return self._line_starts

    def line_of(self, offset: int) -> int:
        """0-based line index containing the character offset."""
        import bisect
        return bisect.bisect_right(self.line_starts, offset) - 1


@dataclass
class FunctionUnit:
    """One method/constructor/lambda extracted from a tree."""

    qualified_name: str
    span: tuple[int, int]
    body: SyntaxNode
    file: str | None = None

    @property
    def key(self):
        return (self.qualified_name, self.file)


class NodeCategory(enum.Enum):
    NAME_BEARING = "NameBearing"
    MODIFIER = "Modifier"
    COMMENT = "Comment"
    LOG_STATEMENT = "LogStatement"
    OTHER = "Other"


# ---------------------------------------------------------------------------
# lexer
# ---------------------------------------------------------------------------

_KEYWORDS = {
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char",
    "class", "const", "continue", "default", "do", "double", "else", "enum",
    "extends", "final", "finally", "float", "for", "goto", "if", "implements",
    "import", "instanceof", "int", "interface", "long", "native", "new",
    "package", "private", "protected", "public", "return", "short", "static",
    "strictfp", "super", "switch", "synchronized", "this", "throw", "throws",
    "transient", "try", "void", "volatile", "while",
}

_PRIMITIVES = {"boolean", "byte", "char", "short", "int", "long", "float", "double", "void"}

_MODIFIER_KEYWORDS = {
    "public", "private", "protected", "static", "final", "abstract",
    "synchronized", "native", "transient", "volatile", "strictfp", "default",
}

_OPERATORS = [
    ">>>=", ">>=", "<<=", ">>>", "...", "->", "::", "==", "!=", "<=", ">=",
    "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
    "<<", ">>", "=", "+", "-", "*", "/", "%", "<", ">", "!", "~", "&", "|",
    "^", "?", ":",
]

_PUNCT = set("(){}[];,.@")

_ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="}


@dataclass
class _Token:
    type: str          # ident / keyword / int / float / string / char / op / punct / eof
    text: str
    start: int
    end: int


def _tokenize(text: str):
    """Return (tokens, comments).  Raises ParseError on malformed literals."""
    tokens = []
    comments = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r\n\f":
            i += 1
            continue
        if ch == "/" and i + 1 < n and text[i + 1] == "/":
            j = text.find("\n", i)
            j = n if j < 0 else j
            comments.append(Comment(i, j, text[i:j]))
            i = j
            continue
        if ch == "/" and i + 1 < n and text[i + 1] == "*":
            j = text.find("*/", i + 2)
            if j < 0:
                raise ParseError("unterminated block comment", position=i)
            comments.append(Comment(i, j + 2, text[i:j + 2]))
            i = j + 2
            continue
        if ch.isalpha() or ch == "_" or ch == "$":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] in "_$"):
                j += 1
            word = text[i:j]
            if word in ("true", "false", "null"):
                tokens.append(_Token("literal_word", word, i, j))
            elif word in _KEYWORDS:
                tokens.append(_Token("keyword", word, i, j))
            else:
                tokens.append(_Token("ident", word, i, j))
            i = j
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            is_float = False
            if text[j] == "0" and j + 1 < n and text[j + 1] in "xX":
                j += 2
                while j < n and (text[j] in "0123456789abcdefABCDEF_"):
                    j += 1
            else:
                while j < n and (text[j].isdigit() or text[j] == "_"):
                    j += 1
                if j < n and text[j] == ".":
                    is_float = True
                    j += 1
                    while j < n and (text[j].isdigit() or text[j] == "_"):
                        j += 1
                if j < n and text[j] in "eE":
                    is_float = True
                    j += 1
                    if j < n and text[j] in "+-":
                        j += 1
                    while j < n and text[j].isdigit():
                        j += 1
            if j < n and text[j] in "lLfFdD":
                if text[j] in "fFdD":
                    is_float = True
                j += 1
            tokens.append(_Token("float" if is_float else "int", text[i:j], i, j))
            i = j
            continue
        if ch == '"':
            j = i + 1
            while j < n and text[j] != '"':
                if text[j] == "\\":
                    j += 1
                j += 1
            if j >= n:
                raise ParseError("unterminated string literal", position=i)
            tokens.append(_Token("string", text[i:j + 1], i, j + 1))
            i = j + 1
            continue
        if ch == "'":
            j = i + 1
            while j < n and text[j] != "'":
                if text[j] == "\\":
                    j += 1
                j += 1
            if j >= n:
                raise ParseError("unterminated char literal", position=i)
            tokens.append(_Token("char", text[i:j + 1], i, j + 1))
            i = j + 1
            continue
        matched = False
        for op in _OPERATORS:
            if text.startswith(op, i):
                tokens.append(_Token("op", op, i, i + len(op)))
                i += len(op)
                matched = True
                break
        if matched:
            continue
        if ch in _PUNCT:
            tokens.append(_Token("punct", ch, i, i + 1))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", position=i)
    tokens.append(_Token("eof", "", n, n))
    return tokens, comments


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

class _Parser:
    """Recursive-descent parser for the Java-like grammar."""

    def __init__(self, text: str):
        self.text = text
        self.tokens, self.comments = _tokenize(text)
        self.pos = 0

    # -- token helpers ------------------------------------------------------

    def peek(self, offset=0) -> _Token:
        idx = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[idx]

    def at(self, text: str) -> bool:
        return self.peek().text == text and self.peek().type in ("keyword", "op", "punct")

    def at_ident(self) -> bool:
        return self.peek().type == "ident"

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.type != "eof":
            self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.peek()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text!r}", position=tok.start)
        return self.advance()

    def error(self, message: str):
        raise ParseError(message, position=self.peek().start)

    def node(self, kind, children, start, end, label=None):
        return SyntaxNode(kind, label=label, children=children, start=start, end=end)

    def leaf(self, kind, tok: _Token, label=None):
        return SyntaxNode(kind, label=label if label is not None else tok.text,
                          start=tok.start, end=tok.end)

    # -- entry --------------------------------------------------------------

    def parse_compilation_unit(self) -> SyntaxNode:
        start = self.peek().start
        children = []
        if self.at("package"):
            children.append(self.parse_package())
        while self.at("import"):
            children.append(self.parse_import())
        while not self.peek().type == "eof":
            children.append(self.parse_type_declaration())
        end = children[-1].end if children else start
        return self.node("compilation_unit", children, start, end)

    def parse_package(self):
        start = self.expect("package").start
        name = self.parse_dotted_name()
        end = self.expect(";").end
        return self.node("package_decl", [], start, end, label=name)

    def parse_import(self):
        start = self.expect("import").start
        if self.at("static"):
            self.advance()
        name = self.parse_dotted_name()
        if self.at("."):
            self.advance()
            self.expect("*")
            name += ".*"
        end = self.expect(";").end
        return self.node("import_decl", [], start, end, label=name)

    def parse_dotted_name(self) -> str:
        parts = [self.advance().text]
        while self.at(".") and self.peek(1).type == "ident":
            self.advance()
            parts.append(self.advance().text)
        return ".".join(parts)

    # -- modifiers / annotations --------------------------------------------

    def parse_modifiers(self):
        nodes = []
        while True:
            tok = self.peek()
            if tok.text == "@" and self.peek(1).type == "ident" \
                    and self.peek(1).text != "interface":
                nodes.append(self.parse_annotation())
            elif tok.type == "keyword" and tok.text in _MODIFIER_KEYWORDS:
                # 'default' doubles as a switch label; only a modifier before members
                nodes.append(self.leaf("modifier", self.advance()))
            else:
                break
        return nodes

    def parse_annotation(self):
        start = self.expect("@").start
        name = self.parse_dotted_name()
        end = self.tokens[self.pos - 1].end
        if self.at("("):
            depth = 0
            while True:
                tok = self.advance()
                if tok.type == "eof":
                    self.error("unterminated annotation arguments")
                if tok.text == "(":
                    depth += 1
                elif tok.text == ")":
                    depth -= 1
                    if depth == 0:
                        end = tok.end
                        break
        label = "".join(self.text[start:end].split())
        return SyntaxNode("annotation", label=label, start=start, end=end)

    # -- types ---------------------------------------------------------------

    def try_parse_type(self):
        """Parse a type reference; returns a leaf node or None (position restored)."""
        save = self.pos
        tok = self.peek()
        start = tok.start
        if tok.type == "keyword" and tok.text in _PRIMITIVES:
            self.advance()
        elif tok.type == "ident":
            self.advance()
            while self.at(".") and self.peek(1).type == "ident":
                self.advance()
                self.advance()
            if self.at("<") and not self._skip_type_arguments():
                self.pos = save
                return None
        else:
            return None
        while self.at("[") and self.peek(1).text == "]":
            self.advance()
            self.advance()
        end = self.tokens[self.pos - 1].end
        label = "".join(self.text[start:end].split())
        return SyntaxNode("type", label=label, start=start, end=end)

    def _skip_type_arguments(self) -> bool:
        """Consume a balanced ``<...>`` group of type tokens; False if not one."""
        save = self.pos
        depth = 0
        while True:
            tok = self.peek()
            if tok.type == "eof":
                self.pos = save
                return False
            if tok.text == "<":
                depth += 1
            elif tok.text == ">":
                depth -= 1
                if depth == 0:
                    self.advance()
                    return True
            elif tok.text == ">>":
                depth -= 2
                if depth <= 0:
                    self.advance()
                    if depth < 0:
                        self.pos = save
                        return False
                    return True
            elif tok.text == ">>>":
                depth -= 3
                if depth <= 0:
                    self.advance()
                    if depth < 0:
                        self.pos = save
                        return False
                    return True
            elif tok.type in ("ident", "keyword") or tok.text in (",", ".", "?", "[", "]", "&"):
                if tok.type == "keyword" and tok.text not in _PRIMITIVES \
                        and tok.text not in ("extends", "super"):
                    self.pos = save
                    return False
            else:
                self.pos = save
                return False
            self.advance()

    def parse_type(self):
        t = self.try_parse_type()
        if t is None:
            self.error("expected a type")
        return t

    # -- type declarations ----------------------------------------------------

    def parse_type_declaration(self):
        start = self.peek().start
        mods = self.parse_modifiers()
        if mods:
            start = mods[0].start
        if self.at("class") or self.at("interface") or self.at("enum"):
            return self.parse_class_like(mods, start)
        self.error("expected a class or interface declaration")

    def parse_class_like(self, mods, start):
        kw = self.advance().text
        kind = {"class": "class_decl", "interface": "interface_decl", "enum": "enum_decl"}[kw]
        name_tok = self.peek()
        if name_tok.type != "ident":
            self.error("expected a type name")
        name = self.leaf("identifier", self.advance())
        children = list(mods) + [name]
        if self.at("<"):
            if not self._skip_type_arguments():
                self.error("malformed type parameters")
        if self.at("extends"):
            self.advance()
            children.append(self.parse_type())
            while self.at(","):
                self.advance()
                children.append(self.parse_type())
        if self.at("implements"):
            self.advance()
            children.append(self.parse_type())
            while self.at(","):
                self.advance()
                children.append(self.parse_type())
        if kind == "enum_decl":
            body = self.parse_enum_body()
        else:
            body = self.parse_class_body()
        children.append(body)
        return self.node(kind, children, start, body.end)

    def parse_enum_body(self):
        start = self.expect("{").start
        children = []
        while self.at_ident():
            const = self.leaf("enum_constant", self.advance())
            if self.at("("):
                depth = 0
                while True:
                    tok = self.advance()
                    if tok.type == "eof":
                        self.error("unterminated enum constant arguments")
                    if tok.text == "(":
                        depth += 1
                    elif tok.text == ")":
                        depth -= 1
                        if depth == 0:
                            const.end = tok.end
                            break
            children.append(const)
            if self.at(","):
                self.advance()
        if self.at(";"):
            self.advance()
            while not self.at("}") and self.peek().type != "eof":
                children.append(self.parse_member())
        end = self.expect("}").end
        return self.node("class_body", children, start, end)

    def parse_class_body(self):
        start = self.expect("{").start
        children = []
        while not self.at("}") and self.peek().type != "eof":
            children.append(self.parse_member())
        end = self.expect("}").end
        return self.node("class_body", children, start, end)

    def parse_member(self):
        start = self.peek().start
        if self.at(";"):
            tok = self.advance()
            return self.node("empty_decl", [], tok.start, tok.end)
        mods = self.parse_modifiers()
        if mods:
            start = mods[0].start
        if self.at("class") or self.at("interface") or self.at("enum"):
            return self.parse_class_like(mods, start)
        if self.at("{"):  # initializer block (possibly static)
            block = self.parse_block()
            return self.node("initializer", mods + [block], start, block.end)
        if self.at("<"):
            if not self._skip_type_arguments():
                self.error("malformed method type parameters")
        # constructor: Name (
        if self.at_ident() and self.peek(1).text == "(":
            name = self.leaf("identifier", self.advance())
            return self.finish_method(mods, None, name, start, kind="constructor_decl")
        rtype = self.parse_type()
        if not self.at_ident():
            self.error("expected a member name")
        name = self.leaf("identifier", self.advance())
        if self.at("("):
            return self.finish_method(mods, rtype, name, start, kind="method_decl")
        return self.finish_field(mods, rtype, name, start)

    def finish_method(self, mods, rtype, name, start, kind):
        params = self.parse_param_list()
        children = list(mods)
        if rtype is not None:
            children.append(rtype)
        children.extend([name, params])
        if self.at("throws"):
            tstart = self.advance().start
            throws = [self.parse_type()]
            while self.at(","):
                self.advance()
                throws.append(self.parse_type())
            children.append(self.node("throws_clause", throws, tstart, throws[-1].end))
        if self.at(";"):
            end = self.advance().end
        else:
            body = self.parse_block()
            children.append(body)
            end = body.end
        return self.node(kind, children, start, end)

    def parse_param_list(self):
        start = self.expect("(").start
        params = []
        while not self.at(")"):
            pstart = self.peek().start
            pmods = self.parse_modifiers()
            ptype = self.parse_type()
            if self.at("..."):
                self.advance()
                ptype.label += "..."
            pname = self.leaf("identifier", self.advance()) if self.at_ident() \
                else self.error("expected a parameter name")
            while self.at("[") and self.peek(1).text == "]":
                self.advance()
                self.advance()
            params.append(self.node("param", pmods + [ptype, pname], pstart, pname.end))
            if self.at(","):
                self.advance()
            elif not self.at(")"):
                self.error("expected ',' or ')' in parameter list")
        end = self.expect(")").end
        return self.node("param_list", params, start, end)

    def finish_field(self, mods, ftype, first_name, start):
        declarators = [self.parse_var_declarator(first_name)]
        while self.at(","):
            self.advance()
            if not self.at_ident():
                self.error("expected a field name")
            declarators.append(self.parse_var_declarator(self.leaf("identifier", self.advance())))
        end = self.expect(";").end
        return self.node("field_decl", mods + [ftype] + declarators, start, end)

    def parse_var_declarator(self, name_leaf):
        children = [name_leaf]
        while self.at("[") and self.peek(1).text == "]":
            self.advance()
            self.advance()
        if self.at("="):
            self.advance()
            children.append(self.parse_variable_init())
        end = children[-1].end
        return self.node("var_declarator", children, name_leaf.start, end)

    def parse_variable_init(self):
        if self.at("{"):
            return self.parse_array_init()
        return self.parse_expression()

    def parse_array_init(self):
        start = self.expect("{").start
        items = []
        while not self.at("}"):
            items.append(self.parse_variable_init())
            if self.at(","):
                self.advance()
            elif not self.at("}"):
                self.error("expected ',' or '}' in array initializer")
        end = self.expect("}").end
        return self.node("array_init", items, start, end)

    # -- statements ------------------------------------------------------------

    def parse_block(self):
        start = self.expect("{").start
        stmts = []
        while not self.at("}") and self.peek().type != "eof":
            stmts.append(self.parse_statement())
        end = self.expect("}").end
        return self.node("block", stmts, start, end)

    def parse_statement(self):
        tok = self.peek()
        if tok.text == "{":
            return self.parse_block()
        if tok.text == ";":
            t = self.advance()
            return self.node("empty_stmt", [], t.start, t.end)
        if tok.type == "keyword":
            kw = tok.text
            if kw == "if":
                return self.parse_if()
            if kw == "while":
                return self.parse_while()
            if kw == "do":
                return self.parse_do()
            if kw == "for":
                return self.parse_for()
            if kw == "switch":
                return self.parse_switch()
            if kw == "try":
                return self.parse_try()
            if kw == "return":
                start = self.advance().start
                children = []
                if not self.at(";"):
                    children.append(self.parse_expression())
                end = self.expect(";").end
                return self.node("return_stmt", children, start, end)
            if kw == "throw":
                start = self.advance().start
                expr = self.parse_expression()
                end = self.expect(";").end
                return self.node("throw_stmt", [expr], start, end)
            if kw in ("break", "continue"):
                start = self.advance().start
                children = []
                if self.at_ident():
                    children.append(self.leaf("identifier", self.advance()))
                end = self.expect(";").end
                return self.node(f"{kw}_stmt", children, start, end)
            if kw == "synchronized":
                start = self.advance().start
                self.expect("(")
                expr = self.parse_expression()
                self.expect(")")
                body = self.parse_block()
                return self.node("synchronized_stmt", [expr, body], start, body.end)
            if kw == "assert":
                start = self.advance().start
                children = [self.parse_expression()]
                if self.at(":"):
                    self.advance()
                    children.append(self.parse_expression())
                end = self.expect(";").end
                return self.node("assert_stmt", children, start, end)
        decl = self.try_parse_local_var_decl()
        if decl is not None:
            return decl
        start = self.peek().start
        expr = self.parse_expression()
        end = self.expect(";").end
        return self.node("expr_stmt", [expr], start, end)

    def try_parse_local_var_decl(self):
        save = self.pos
        start = self.peek().start
        mods = []
        while self.at("final") or (self.at("@") and self.peek(1).type == "ident"):
            if self.at("final"):
                mods.append(self.leaf("modifier", self.advance()))
            else:
                mods.append(self.parse_annotation())
        vtype = self.try_parse_type()
        if vtype is None or not self.at_ident():
            self.pos = save
            return None
        nxt = self.peek(1).text
        if nxt not in ("=", ";", ",", "["):
            self.pos = save
            return None
        declarators = [self.parse_var_declarator(self.leaf("identifier", self.advance()))]
        while self.at(","):
            self.advance()
            if not self.at_ident():
                self.pos = save
                return None
            declarators.append(self.parse_var_declarator(self.leaf("identifier", self.advance())))
        if not self.at(";"):
            self.pos = save
            return None
        end = self.advance().end
        return self.node("local_var_decl", mods + [vtype] + declarators, start, end)

    def parse_if(self):
        start = self.expect("if").start
        self.expect("(")
        cond = self.parse_expression()
        self.expect(")")
        then = self.parse_statement()
        children = [cond, then]
        end = then.end
        if self.at("else"):
            self.advance()
            otherwise = self.parse_statement()
            children.append(otherwise)
            end = otherwise.end
        return self.node("if_stmt", children, start, end)

    def parse_while(self):
        start = self.expect("while").start
        self.expect("(")
        cond = self.parse_expression()
        self.expect(")")
        body = self.parse_statement()
        return self.node("while_stmt", [cond, body], start, body.end)

    def parse_do(self):
        start = self.expect("do").start
        body = self.parse_statement()
        self.expect("while")
        self.expect("(")
        cond = self.parse_expression()
        self.expect(")")
        end = self.expect(";").end
        return self.node("do_stmt", [body, cond], start, end)

    def parse_for(self):
        start = self.expect("for").start
        self.expect("(")
        # enhanced for: [final] Type name : expr
        save = self.pos
        fmods = []
        while self.at("final"):
            fmods.append(self.leaf("modifier", self.advance()))
        vtype = self.try_parse_type()
        if vtype is not None and self.at_ident() and self.peek(1).text == ":":
            name = self.leaf("identifier", self.advance())
            self.advance()  # ':'
            iterable = self.parse_expression()
            self.expect(")")
            body = self.parse_statement()
            return self.node("foreach_stmt", fmods + [vtype, name, iterable, body],
                             start, body.end)
        self.pos = save
        children = []
        if not self.at(";"):
            init = self.try_parse_local_var_decl()
            if init is not None:
                # local-var path consumed the ';'
                children.append(init)
            else:
                children.append(self.parse_expression())
                while self.at(","):
                    self.advance()
                    children.append(self.parse_expression())
                self.expect(";")
        else:
            self.advance()
        if not self.at(";"):
            cond_expr = self.parse_expression()
            children.append(self.node("for_condition", [cond_expr],
                                      cond_expr.start, cond_expr.end))
        self.expect(";")
        if not self.at(")"):
            upd = [self.parse_expression()]
            while self.at(","):
                self.advance()
                upd.append(self.parse_expression())
            children.extend(upd)
        self.expect(")")
        body = self.parse_statement()
        children.append(body)
        return self.node("for_stmt", children, start, body.end)

    def parse_switch(self):
        start = self.expect("switch").start
        self.expect("(")
        selector = self.parse_expression()
        self.expect(")")
        self.expect("{")
        groups = []
        while not self.at("}") and self.peek().type != "eof":
            gstart = self.peek().start
            labels = []
            while self.at("case") or self.at("default"):
                if self.at("case"):
                    lstart = self.advance().start
                    lexpr = self.parse_expression()
                    lend = self.expect(":").end
                    labels.append(self.node("case_label", [lexpr], lstart, lend))
                else:
                    lstart = self.advance().start
                    lend = self.expect(":").end
                    labels.append(self.node("default_label", [], lstart, lend))
            if not labels:
                self.error("expected 'case' or 'default' in switch body")
            stmts = []
            while not (self.at("case") or self.at("default") or self.at("}")):
                stmts.append(self.parse_statement())
            gend = stmts[-1].end if stmts else labels[-1].end
            groups.append(self.node("switch_group", labels + stmts, gstart, gend))
        end = self.expect("}").end
        return self.node("switch_stmt", [selector] + groups, start, end)

    def parse_try(self):
        start = self.expect("try").start
        children = []
        if self.at("("):  # try-with-resources
            rstart = self.advance().start
            resources = []
            while not self.at(")"):
                rdecl_start = self.peek().start
                rmods = self.parse_modifiers()
                rtype = self.parse_type()
                rname = self.leaf("identifier", self.advance()) if self.at_ident() \
                    else self.error("expected a resource name")
                self.expect("=")
                rexpr = self.parse_expression()
                resources.append(self.node("resource", rmods + [rtype, rname, rexpr],
                                           rdecl_start, rexpr.end))
                if self.at(";"):
                    self.advance()
            rend = self.expect(")").end
            children.append(self.node("resource_spec", resources, rstart, rend))
        body = self.parse_block()
        children.append(body)
        end = body.end
        while self.at("catch"):
            cstart = self.advance().start
            self.expect("(")
            cmods = self.parse_modifiers()
            ctypes = [self.parse_type()]
            while self.at("|"):
                self.advance()
                ctypes.append(self.parse_type())
            cname = self.leaf("identifier", self.advance()) if self.at_ident() \
                else self.error("expected an exception name")
            self.expect(")")
            cbody = self.parse_block()
            children.append(self.node("catch_clause", cmods + ctypes + [cname, cbody],
                                      cstart, cbody.end))
            end = cbody.end
        if self.at("finally"):
            fstart = self.advance().start
            fbody = self.parse_block()
            children.append(self.node("finally_clause", [fbody], fstart, fbody.end))
            end = fbody.end
        return self.node("try_stmt", children, start, end)

    # -- expressions ------------------------------------------------------------

    def parse_expression(self):
        return self.parse_assignment()

    def parse_assignment(self):
        lhs = self.parse_ternary()
        tok = self.peek()
        if tok.type == "op" and tok.text in _ASSIGN_OPS:
            op = self.advance().text
            rhs = self.parse_assignment()
            return self.node("assign_expr", [lhs, rhs], lhs.start, rhs.end, label=op)
        return lhs

    def parse_ternary(self):
        cond = self.parse_binary(0)
        if self.at("?"):
            self.advance()
            then = self.parse_expression()
            self.expect(":")
            otherwise = self.parse_ternary()
            return self.node("ternary_expr", [cond, then, otherwise],
                             cond.start, otherwise.end)
        return cond

    _BINARY_LEVELS = [
        ("||",),
        ("&&",),
        ("|",),
        ("^",),
        ("&",),
        ("==", "!="),
        ("<", ">", "<=", ">=", "instanceof"),
        ("<<", ">>", ">>>"),
        ("+", "-"),
        ("*", "/", "%"),
    ]

    def parse_binary(self, level):
        if level >= len(self._BINARY_LEVELS):
            return self.parse_unary()
        ops = self._BINARY_LEVELS[level]
        left = self.parse_binary(level + 1)
        while True:
            tok = self.peek()
            if tok.text in ops and tok.type in ("op", "keyword"):
                if tok.text == "instanceof":
                    self.advance()
                    rtype = self.parse_type()
                    left = self.node("instanceof_expr", [left, rtype],
                                     left.start, rtype.end)
                    continue
                op = self.advance().text
                right = self.parse_binary(level + 1)
                left = self.node("binary_expr", [left, right], left.start, right.end,
                                 label=op)
            else:
                return left

    def parse_unary(self):
        tok = self.peek()
        if tok.type == "op" and tok.text in ("+", "-", "!", "~", "++", "--"):
            op = self.advance()
            operand = self.parse_unary()
            return self.node("unary_expr", [operand], op.start, operand.end, label=op.text)
        # unambiguous cast: ( primitive-type ) operand
        if tok.text == "(" and self.peek(1).type == "keyword" \
                and self.peek(1).text in _PRIMITIVES:
            save = self.pos
            start = self.advance().start
            ctype = self.try_parse_type()
            if ctype is not None and self.at(")"):
                self.advance()
                operand = self.parse_unary()
                return self.node("cast_expr", [ctype, operand], start, operand.end)
            self.pos = save
        return self.parse_postfix()

    def parse_postfix(self):
        expr = self.parse_primary()
        while True:
            tok = self.peek()
            if tok.text == "." and self.peek(1).type == "ident":
                self.advance()
                name = self.leaf("identifier", self.advance())
                expr = self.node("field_access", [expr, name], expr.start, name.end)
                continue
            if tok.text == "(" and expr.kind in ("identifier", "field_access"):
                args, end = self.parse_arguments()
                expr = self.node("call_expr", [expr] + args, expr.start, end)
                continue
            if tok.text == "[":
                self.advance()
                index = self.parse_expression()
                end = self.expect("]").end
                expr = self.node("array_access", [expr, index], expr.start, end)
                continue
            if tok.text == "::" and self.peek(1).type in ("ident", "keyword"):
                self.advance()
                name = self.leaf("identifier", self.advance())
                expr = self.node("method_ref", [expr, name], expr.start, name.end)
                continue
            if tok.type == "op" and tok.text in ("++", "--"):
                op = self.advance()
                expr = self.node("postfix_expr", [expr], expr.start, op.end, label=op.text)
                continue
            return expr

    def parse_arguments(self):
        self.expect("(")
        args = []
        while not self.at(")"):
            args.append(self.parse_expression())
            if self.at(","):
                self.advance()
            elif not self.at(")"):
                self.error("expected ',' or ')' in argument list")
        end = self.expect(")").end
        return args, end

    def parse_primary(self):
        tok = self.peek()
        if tok.type in ("int", "float", "string", "char", "literal_word"):
            return self.leaf("literal", self.advance())
        if tok.type == "ident":
            if self.peek(1).text == "->":
                return self.parse_lambda_single(self.advance())
            return self.leaf("identifier", self.advance())
        if tok.text == "this":
            t = self.advance()
            node = SyntaxNode("this_expr", label="this", start=t.start, end=t.end)
            if self.at("("):
                args, end = self.parse_arguments()
                return self.node("call_expr", [node] + args, node.start, end)
            return node
        if tok.text == "super":
            t = self.advance()
            node = SyntaxNode("super_expr", label="super", start=t.start, end=t.end)
            if self.at("("):
                args, end = self.parse_arguments()
                return self.node("call_expr", [node] + args, node.start, end)
            return node
        if tok.text == "new":
            return self.parse_creator()
        if tok.text == "(":
            if self._lambda_ahead():
                return self.parse_lambda_parenthesized()
            start = self.advance().start
            inner = self.parse_expression()
            end = self.expect(")").end
            return self.node("paren_expr", [inner], start, end)
        self.error(f"unexpected token {tok.text!r} in expression")

    def _lambda_ahead(self) -> bool:
        """From a '(' token, check whether the balanced group is lambda params."""
        depth = 0
        i = self.pos
        while i < len(self.tokens):
            t = self.tokens[i]
            if t.text == "(":
                depth += 1
            elif t.text == ")":
                depth -= 1
                if depth == 0:
                    nxt = self.tokens[i + 1] if i + 1 < len(self.tokens) else None
                    return nxt is not None and nxt.text == "->"
            elif t.type == "eof":
                return False
            i += 1
        return False

    def parse_lambda_single(self, name_tok):
        param = self.node("param", [self.leaf("identifier", name_tok)],
                          name_tok.start, name_tok.end)
        params = self.node("param_list", [param], name_tok.start, name_tok.end)
        self.expect("->")
        body = self.parse_lambda_body()
        return self.node("lambda_expr", [params, body], name_tok.start, body.end)

    def parse_lambda_parenthesized(self):
        start = self.expect("(").start
        params = []
        while not self.at(")"):
            pstart = self.peek().start
            ptype = None
            if self.peek(1).type == "ident":  # typed parameter
                ptype = self.try_parse_type()
            if not self.at_ident():
                self.error("expected a lambda parameter name")
            pname = self.leaf("identifier", self.advance())
            kids = ([ptype] if ptype is not None else []) + [pname]
            params.append(self.node("param", kids, pstart, pname.end))
            if self.at(","):
                self.advance()
        pend = self.expect(")").end
        plist = self.node("param_list", params, start, pend)
        self.expect("->")
        body = self.parse_lambda_body()
        return self.node("lambda_expr", [plist, body], start, body.end)

    def parse_lambda_body(self):
        if self.at("{"):
            return self.parse_block()
        return self.parse_expression()

    def parse_creator(self):
        start = self.expect("new").start
        ctype = self.parse_type()
        if self.at("["):
            dims = []
            end = ctype.end
            while self.at("["):
                self.advance()
                if not self.at("]"):
                    dims.append(self.parse_expression())
                end = self.expect("]").end
            children = [ctype] + dims
            if self.at("{"):
                init = self.parse_array_init()
                children.append(init)
                end = init.end
            return self.node("array_new", children, start, end)
        args, end = self.parse_arguments()
        children = [ctype] + args
        if self.at("{"):  # anonymous class body
            body = self.parse_class_body()
            children.append(body)
            end = body.end
        return self.node("new_expr", children, start, end)


# ---------------------------------------------------------------------------
# adapters and public operations
# ---------------------------------------------------------------------------

def _parse_java(text: str, path: str | None = None) -> SyntaxTree:
    parser = _Parser(text)
    root = parser.parse_compilation_unit()
    return SyntaxTree(root, text, comments=parser.comments, language="java", path=path)


_ADAPTERS = {"java": _parse_java}
_EXTENSION_MAP = {".java": "java"}


def register_adapter(language: str, parse_fn, extensions=()):
    """Register a grammar adapter: parse_fn(text, path) -> SyntaxTree."""
    _ADAPTERS[language] = parse_fn
    for ext in extensions:
        _EXTENSION_MAP[ext] = language


def language_for_path(path: str) -> str | None:
    for ext, lang in _EXTENSION_MAP.items():
        if path.endswith(ext):
            return lang
    return None


def parse_source(text: str, language: str = "java", path: str | None = None) -> SyntaxTree:
    """Parse source text with the registered adapter for ``language``."""
    if language not in _ADAPTERS:
        raise ParseError(f"no grammar adapter registered for {language!r}")
    return _ADAPTERS[language](text, path)


def extract_functions(tree: SyntaxTree) -> list[FunctionUnit]:
    """All method/constructor/lambda units in the tree, in source order.

    Qualified names carry the container path and parameter-type signature,
    e.g. ``Outer.Inner.run(int,String)``; lambdas get synthesized names
    ``<enclosing>$lambdaN`` numbered per enclosing function.
    """
    units = []

    def method_signature(node):
        name = None
        params = None
        for child in node.children:
            if child.kind == "identifier" and name is None:
                name = child.label
            elif child.kind == "param_list":
                params = child
        types = []
        if params is not None:
            for p in params.children:
                tleaf = next((c for c in p.children if c.kind == "type"), None)
                types.append(tleaf.label if tleaf is not None else "var")
        return f"{name}({','.join(types)})"

    def visit(node, containers, enclosing, lambda_counter):
        if node.kind in ("class_decl", "interface_decl", "enum_decl"):
            name = next((c.label for c in node.children if c.kind == "identifier"), "?")
            containers = containers + [name]
            for child in node.children:
                visit(child, containers, None, lambda_counter)
            return
        if node.kind in ("method_decl", "constructor_decl"):
            qname = ".".join(containers + [method_signature(node)])
            units.append(FunctionUnit(qname, (node.start, node.end), node, tree.path))
            counter = {"n": 0}
            for child in node.children:
                visit(child, containers, qname, counter)
            return
        if node.kind == "lambda_expr" and enclosing is not None:
            qname = f"{enclosing}$lambda{lambda_counter['n']}"
            lambda_counter["n"] += 1
            units.append(FunctionUnit(qname, (node.start, node.end), node, tree.path))
            for child in node.children:
                visit(child, containers, qname, lambda_counter)
            return
        for child in node.children:
            visit(child, containers, enclosing, lambda_counter)

    visit(tree.root, [], None, {"n": 0})
    units.sort(key=lambda u: u.span)
    return units


def callee_segments(callee: SyntaxNode) -> list[str]:
    """Flatten a call's callee expression into dotted-name segments.

    Non-name parts (call results, parenthesized expressions) become the
    placeholder ``<expr>`` which never matches a blacklist pattern.
    """
    if callee.kind == "identifier":
        return [callee.label]
    if callee.kind in ("this_expr", "super_expr"):
        return [callee.label]
    if callee.kind == "field_access":
        left = callee_segments(callee.children[0])
        return left + [callee.children[1].label]
    return ["<expr>"]


def matches_blacklist(segments, patterns) -> bool:
    """True when a callee's dotted name matches one of the patterns.

    A pattern matches if it equals any single segment (``log`` matches
    ``log.debug``) or if its own dotted segments are a prefix of the callee
    (``System.out`` matches ``System.out.println``).
    """
    for pattern in patterns:
        parts = pattern.split(".")
        if len(parts) == 1:
            if pattern in segments:
                return True
        elif segments[: len(parts)] == parts:
            return True
    return False


def is_log_call_statement(node: SyntaxNode, blacklist=DEFAULT_BLACKLIST) -> bool:
    if node.kind != "expr_stmt" or not node.children:
        return False
    expr = node.children[0]
    if expr.kind != "call_expr":
        return False
    return matches_blacklist(callee_segments(expr.children[0]), blacklist)


def classify_node(node: SyntaxNode, blacklist=DEFAULT_BLACKLIST) -> NodeCategory:
    """Coarse node category used by edit-weighting.

    Identifier leaves are name-bearing; modifiers and annotations form the
    modifier class; call statements whose callee matches the blacklist are
    log statements; everything else is Other.  Comments never appear in the
    tree, so the Comment category is never returned here.
    """
    if node.kind == "identifier":
        return NodeCategory.NAME_BEARING
    if node.kind in ("modifier", "annotation"):
        return NodeCategory.MODIFIER
    if is_log_call_statement(node, blacklist):
        return NodeCategory.LOG_STATEMENT
    return NodeCategory.OTHER


def comment_metrics(tree: SyntaxTree, span: tuple[int, int]) -> tuple[int, int]:
    """(comment_lines, total_lines) over the physical lines covered by span."""
    start, end = span
    if end <= start:
        return (0, 0)
    first = tree.line_of(start)
    last = tree.line_of(max(start, end - 1))
    total = last - first + 1
    starts = tree.line_starts
    text_len = len(tree.source_text)

    def line_range(idx):
        s = starts[idx]
        e = starts[idx + 1] if idx + 1 < len(starts) else text_len
        return s, e

    comment_lines = 0
    for idx in range(first, last + 1):
        ls, le = line_range(idx)
        if any(c.start < le and ls < c.end for c in tree.comments):
            comment_lines += 1
    return (comment_lines, total)
