"""Tree differencing: node mapping, edit scripts, and the weighted edit size.

Matching follows the classic two-phase scheme used by modern AST differs:
a greedy top-down pass maps isomorphic subtrees from the largest down, then
a bottom-up pass maps container nodes whose mapped-descendant overlap (dice
coefficient) clears a threshold.  A final recovery pass aligns leftover
children inside mapped containers so single-token edits (renames, literal
tweaks) surface as updates instead of delete/insert pairs.

The edit script uses subtree-granular actions: a maximal unmapped subtree
becomes one insert or delete, a mapped pair with a changed label becomes an
update, and a mapped subtree whose parent or sibling rank changed becomes a
move.  Each action records the changed-subtree depth and the flags that
drive the weighting: whether the change touches only name/modifier nodes,
and whether it sits inside a blacklisted (logging/print) statement.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .config import DEFAULT_BLACKLIST
from .syntax import (
    FunctionUnit,
    NodeCategory,
    SyntaxNode,
    SyntaxTree,
    classify_node,
    is_log_call_statement,
)

FILE_SCOPE = "<file-scope>"


@dataclass
class DeltaWeights:
    """Weights for edit-action kinds and the name-only discount."""

    add: float = 1.0
    update: float = 1.0
    move: float = 0.1
    delete: float = 0.01
    name_only_factor: float = 0.01

    def for_kind(self, kind: str) -> float:
        return {"insert": self.add, "update": self.update,
                "move": self.move, "delete": self.delete}[kind]


@dataclass
class EditAction:
    """One tree edit.

    ``subtree`` is the changed-subtree root on the side the change lives on
    (after-side for insert/update/move targets, before-side for deletes).
    ``dst_parent``/``dst_index`` address the after-tree landing slot and are
    used when replaying a script.
    """

    kind: str                      # insert | update | delete | move
    subtree: SyntaxNode
    subtree_depth: int
    only_name_or_modifier: bool = False
    blacklisted: bool = False
    before_node: SyntaxNode | None = None
    after_node: SyntaxNode | None = None
    dst_parent: SyntaxNode | None = None
    dst_index: int | None = None


@dataclass
class FunctionChangeSet:
    """All edit actions attributed to one function (or the file scope)."""

    function: tuple[str, str | None]   # (qualified_name, file)
    actions: list[EditAction] = field(default_factory=list)

    @property
    def qualified_name(self):
        return self.function[0]


class NodeMapping:
    """Partial one-to-one mapping between before- and after-tree nodes."""

    def __init__(self):
        self.b2a: dict[SyntaxNode, SyntaxNode] = {}
        self.a2b: dict[SyntaxNode, SyntaxNode] = {}

    def add(self, b: SyntaxNode, a: SyntaxNode):
        self.b2a[b] = a
        self.a2b[a] = b

    def add_isomorphic(self, b: SyntaxNode, a: SyntaxNode):
        """Map two isomorphic subtrees node-for-node."""
        stack = [(b, a)]
        while stack:
            nb, na = stack.pop()
            self.add(nb, na)
            stack.extend(zip(nb.children, na.children))

    def has_before(self, node):
        return node in self.b2a

    def has_after(self, node):
        return node in self.a2b

    def __len__(self):
        return len(self.b2a)


# ---------------------------------------------------------------------------
# matching
# ---------------------------------------------------------------------------

def _lcs_pairs(xs, ys, key):
    """Longest common subsequence of xs/ys under key equality; returns pairs."""
    n, m = len(xs), len(ys)
    if n == 0 or m == 0:
        return []
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            if key(xs[i]) == key(ys[j]):
                table[i][j] = table[i + 1][j + 1] + 1
            else:
                table[i][j] = max(table[i + 1][j], table[i][j + 1])
    pairs = []
    i = j = 0
    while i < n and j < m:
        if key(xs[i]) == key(ys[j]):
            pairs.append((xs[i], ys[j]))
            i += 1
            j += 1
        elif table[i + 1][j] >= table[i][j + 1]:
            i += 1
        else:
            j += 1
    return pairs


def _top_down(before_root, after_root, mapping, min_height):
    open_b = [before_root]
    open_a = [after_root]
    while open_b and open_a:
        hb = max(n.height for n in open_b)
        ha = max(n.height for n in open_a)
        if min(hb, ha) < min_height:
            break
        if hb > ha:
            open_b = _expand(open_b, hb)
            continue
        if ha > hb:
            open_a = _expand(open_a, ha)
            continue
        level_b = [n for n in open_b if n.height == hb]
        level_a = [n for n in open_a if n.height == hb]
        by_hash = {}
        for a in level_a:
            by_hash.setdefault(a.struct_hash, []).append(a)
        matched_b, matched_a = set(), set()
        for b in level_b:
            candidates = by_hash.get(b.struct_hash, [])
            for a in candidates:
                if a in matched_a:
                    continue
                if b.isomorphic_to(a):
                    mapping.add_isomorphic(b, a)
                    matched_b.add(b)
                    matched_a.add(a)
                    break
        open_b = _expand(open_b, hb, matched=matched_b)
        open_a = _expand(open_a, hb, matched=matched_a)


def _expand(nodes, height, matched=()):
    """Drop matched nodes at ``height``, descend into unmatched ones."""
    out = []
    for n in nodes:
        if n.height != height:
            out.append(n)
        elif n not in matched:
            out.extend(n.children)
    return out


def _bottom_up(before_root, after_root, mapping, threshold):
    desc_count = {}
    for root in (before_root, after_root):
        for node in root.walk():
            desc_count[node] = sum(1 for _ in node.descendants())

    post = []

    def postorder(n):
        for c in n.children:
            postorder(c)
        post.append(n)

    postorder(before_root)
    a_positions = {n: i for i, n in enumerate(after_root.walk())}

    for b in post:
        if mapping.has_before(b) or b.is_leaf:
            continue
        common = {}
        for d in b.descendants():
            partner = mapping.b2a.get(d)
            if partner is None:
                continue
            for anc in partner.ancestors():
                if not mapping.has_after(anc) and anc.kind == b.kind:
                    common[anc] = common.get(anc, 0) + 1
        best, best_key = None, None
        for cand, cnt in common.items():
            dice = 2.0 * cnt / (desc_count[b] + desc_count[cand]) \
                if (desc_count[b] + desc_count[cand]) else 0.0
            key = (dice, -a_positions[cand])
            if dice > threshold and (best_key is None or key > best_key):
                best, best_key = cand, key
        if best is not None:
            mapping.add(b, best)
    if not mapping.has_before(before_root) and not mapping.has_after(after_root) \
            and before_root.kind == after_root.kind:
        mapping.add(before_root, after_root)


def _recover(mapping):
    """Align unmapped children inside mapped containers.

    Three alignment passes per container, strongest key first: identical
    subtrees, then same kind+label, then same kind.  Pairs from the weaker
    passes are pushed back on the worklist so their children align too.
    """
    work = list(mapping.b2a.items())
    while work:
        b, a = work.pop()
        ub = [c for c in b.children if not mapping.has_before(c)]
        ua = [c for c in a.children if not mapping.has_after(c)]
        if not ub or not ua:
            continue
        for key, whole_subtree in (
            (lambda n: (n.kind, n.label, n.struct_hash), True),
            (lambda n: (n.kind, n.label), False),
            (lambda n: n.kind, False),
        ):
            pairs = _lcs_pairs(ub, ua, key)
            for pb, pa in pairs:
                if whole_subtree and pb.isomorphic_to(pa):
                    mapping.add_isomorphic(pb, pa)
                else:
                    mapping.add(pb, pa)
                    work.append((pb, pa))
            ub = [c for c in ub if not mapping.has_before(c)]
            ua = [c for c in ua if not mapping.has_after(c)]
            if not ub or not ua:
                break


def map_trees(before: SyntaxTree, after: SyntaxTree,
              similarity_threshold: float = 0.5, min_height: int = 2) -> NodeMapping:
    """Two-phase greedy match between two trees of the same grammar."""
    mapping = NodeMapping()
    _top_down(before.root, after.root, mapping, min_height)
    _bottom_up(before.root, after.root, mapping, similarity_threshold)
    _recover(mapping)
    return mapping


# ---------------------------------------------------------------------------
# edit script
# ---------------------------------------------------------------------------

def _unmapped_height(node, is_mapped):
    """Subtree depth counting only the unmapped portion under ``node``."""
    best = 0
    for c in node.children:
        if not is_mapped(c):
            h = _unmapped_height(c, is_mapped)
            if h > best:
                best = h
    return 1 + best


def _unmapped_portion_nodes(node, is_mapped):
    yield node
    for c in node.children:
        if not is_mapped(c):
            yield from _unmapped_portion_nodes(c, is_mapped)


def _only_names_or_modifiers(nodes, blacklist):
    saw = False
    for n in nodes:
        saw = True
        if classify_node(n, blacklist) not in (NodeCategory.NAME_BEARING,
                                               NodeCategory.MODIFIER):
            return False
    return saw


def _inside_log_statement(node, blacklist):
    n = node
    while n is not None:
        if is_log_call_statement(n, blacklist):
            return True
        n = n.parent
    return False


def _child_index(node):
    return node.parent.children.index(node) if node.parent is not None else 0


def edit_script(mapping: NodeMapping, before: SyntaxTree, after: SyntaxTree,
                blacklist=DEFAULT_BLACKLIST) -> list[EditAction]:
    """Derive subtree-granular edit actions from a node mapping.

    Applying the script to the before tree (see :func:`apply_edit_script`)
    yields a tree isomorphic to the after tree.
    """
    actions = []

    # deletes: maximal unmapped before subtrees
    for node in before.root.walk():
        if mapping.has_before(node):
            continue
        if node.parent is None or mapping.has_before(node.parent):
            portion = list(_unmapped_portion_nodes(node, mapping.has_before))
            actions.append(EditAction(
                kind="delete",
                subtree=node,
                subtree_depth=_unmapped_height(node, mapping.has_before),
                only_name_or_modifier=_only_names_or_modifiers(portion, blacklist),
                blacklisted=_inside_log_statement(node, blacklist),
                before_node=node,
            ))

    # inserts: maximal unmapped after subtrees
    for node in after.root.walk():
        if mapping.has_after(node):
            continue
        if node.parent is None or mapping.has_after(node.parent):
            portion = list(_unmapped_portion_nodes(node, mapping.has_after))
            actions.append(EditAction(
                kind="insert",
                subtree=node,
                subtree_depth=_unmapped_height(node, mapping.has_after),
                only_name_or_modifier=_only_names_or_modifiers(portion, blacklist),
                blacklisted=_inside_log_statement(node, blacklist),
                after_node=node,
                dst_parent=node.parent,
                dst_index=_child_index(node),
            ))

    # updates and cross-parent moves over mapped pairs
    order_moved = _order_moves(mapping)
    for b, a in mapping.b2a.items():
        if b.label != a.label:
            cls = classify_node(a, blacklist)
            actions.append(EditAction(
                kind="update",
                subtree=a,
                subtree_depth=1,
                only_name_or_modifier=a.is_leaf and cls in (
                    NodeCategory.NAME_BEARING, NodeCategory.MODIFIER),
                blacklisted=_inside_log_statement(a, blacklist)
                or _inside_log_statement(b, blacklist),
                before_node=b,
                after_node=a,
            ))
        cross = False
        if b.parent is not None and a.parent is not None:
            cross = mapping.b2a.get(b.parent) is not a.parent
        elif (b.parent is None) != (a.parent is None):
            cross = True
        if cross or (b, a) in order_moved:
            portion = list(a.walk())
            actions.append(EditAction(
                kind="move",
                subtree=a,
                subtree_depth=a.height,
                only_name_or_modifier=_only_names_or_modifiers(portion, blacklist),
                blacklisted=_inside_log_statement(a, blacklist)
                or _inside_log_statement(b, blacklist),
                before_node=b,
                after_node=a,
                dst_parent=a.parent,
                dst_index=_child_index(a),
            ))

    actions.sort(key=_action_sort_key)
    return actions


def _order_moves(mapping):
    """Mapped pairs that changed sibling rank under the same mapped parent."""
    moved = set()
    for pb, pa in mapping.b2a.items():
        if pb.is_leaf:
            continue
        stay_b = [c for c in pb.children
                  if mapping.has_before(c) and mapping.b2a[c].parent is pa]
        if len(stay_b) < 2:
            continue
        partners_in_b_order = [mapping.b2a[c] for c in stay_b]
        partners_in_a_order = [c for c in pa.children if c in set(partners_in_b_order)]
        kept = {pair[0] for pair in _lcs_pairs(partners_in_b_order,
                                               partners_in_a_order, key=id)}
        for c in stay_b:
            a = mapping.b2a[c]
            if a not in kept:
                moved.add((c, a))
    return moved


def _action_sort_key(action):
    node = action.after_node if action.after_node is not None else action.before_node
    rank = {"delete": 0, "update": 1, "move": 2, "insert": 3}[action.kind]
    return (node.start, node.end, rank)


# ---------------------------------------------------------------------------
# script replay (used to verify script correctness)
# ---------------------------------------------------------------------------

class _WorkNode:
    __slots__ = ("kind", "label", "children", "parent")

    def __init__(self, kind, label):
        self.kind = kind
        self.label = label
        self.children = []
        self.parent = None


def _copy_tree(node):
    w = _WorkNode(node.kind, node.label)
    for c in node.children:
        cw = _copy_tree(c)
        cw.parent = w
        w.children.append(cw)
    return w


def _detach(w):
    if w.parent is not None:
        w.parent.children.remove(w)
        w.parent = None


def _shape_equal(w, node):
    if w.kind != node.kind or w.label != node.label:
        return False
    if len(w.children) != len(node.children):
        return False
    return all(_shape_equal(cw, cn) for cw, cn in zip(w.children, node.children))


def apply_edit_script(before: SyntaxTree, after: SyntaxTree,
                      mapping: NodeMapping, actions: list[EditAction]) -> bool:
    """Replay the script on a copy of the before tree; True if the result
    is isomorphic to the after tree (kinds, labels, child order)."""
    work_of_before = {}

    def build(node):
        w = _copy_tree(node)
        for wn, bn in _zip_walk(w, node):
            work_of_before[bn] = wn
        return w

    def _zip_walk(w, n):
        yield w, n
        for cw, cn in zip(w.children, n.children):
            yield from _zip_walk(cw, cn)

    root = build(before.root)
    work_of_after = {}

    for act in actions:
        if act.kind == "update":
            work_of_before[act.before_node].label = act.after_node.label

    for act in actions:
        if act.kind == "delete":
            _detach(work_of_before[act.before_node])
        elif act.kind == "move":
            _detach(work_of_before[act.before_node])

    # placements in after coordinates, parents before children
    depth_of = {}
    for i, n in enumerate(after.root.walk()):
        depth_of[n] = len(list(n.ancestors()))
    placements = [a for a in actions if a.kind in ("insert", "move")]
    placements.sort(key=lambda a: (depth_of[a.after_node], a.dst_index))

    def materialize(after_node):
        w = _WorkNode(after_node.kind, after_node.label)
        work_of_after[after_node] = w
        for c in after_node.children:
            if mapping.has_after(c):
                continue  # arrives via its own move action
            cw = materialize(c)
            cw.parent = w
            w.children.append(cw)
        return w

    def working_parent(after_parent):
        if after_parent in work_of_after:
            return work_of_after[after_parent]
        b = mapping.a2b.get(after_parent)
        return work_of_before.get(b) if b is not None else None

    incoming = {}
    for act in placements:
        if act.kind == "insert":
            w = materialize(act.after_node)
        else:
            w = work_of_before[act.before_node]
            work_of_after[act.after_node] = w
        incoming.setdefault(act.dst_parent, []).append((act.dst_index, w))

    for after_parent in sorted(incoming, key=lambda n: depth_of.get(n, 0)):
        parent_w = working_parent(after_parent)
        if parent_w is None:
            return False
        for idx, w in sorted(incoming[after_parent], key=lambda t: t[0]):
            pos = min(idx, len(parent_w.children))
            parent_w.children.insert(pos, w)
            w.parent = parent_w

    if mapping.has_after(after.root):
        result_root = work_of_before[mapping.a2b[after.root]]
    else:
        result_root = work_of_after.get(after.root)
        if result_root is None:
            return False
    return _shape_equal(result_root, after.root)


# ---------------------------------------------------------------------------
# grouping and the weighted edit size
# ---------------------------------------------------------------------------

def _containing_function(units, start, end):
    best = None
    for u in units:
        if u.span[0] <= start and end <= u.span[1]:
            if best is None or (u.span[1] - u.span[0]) < (best.span[1] - best.span[0]):
                best = u
    return best


def group_by_function(actions, functions_before, functions_after,
                      file: str | None = None) -> list[FunctionChangeSet]:
    """Partition actions by the innermost function containing each change.

    A move crossing function boundaries lands in both the source and the
    target changeset.  Actions outside every function are grouped under the
    synthetic file-scope unit.
    """
    sets: dict[tuple, FunctionChangeSet] = {}

    def key_for(unit):
        if unit is None:
            return (FILE_SCOPE, file)
        return (unit.qualified_name, unit.file if unit.file is not None else file)

    def put(unit_key, action):
        cs = sets.get(unit_key)
        if cs is None:
            cs = sets[unit_key] = FunctionChangeSet(unit_key)
        cs.actions.append(action)

    for act in actions:
        targets = []
        if act.kind == "delete":
            node = act.before_node
            targets.append(key_for(_containing_function(functions_before,
                                                        node.start, node.end)))
        elif act.kind in ("insert", "update"):
            node = act.after_node if act.after_node is not None else act.subtree
            targets.append(key_for(_containing_function(functions_after,
                                                        node.start, node.end)))
        else:  # move: charge source and target
            src = _containing_function(functions_before, act.before_node.start,
                                       act.before_node.end)
            dst = _containing_function(functions_after, act.after_node.start,
                                       act.after_node.end)
            targets.append(key_for(src))
            dst_key = key_for(dst)
            if dst_key != targets[0]:
                targets.append(dst_key)
        for t in targets:
            put(t, act)

    return [sets[k] for k in sorted(sets, key=lambda k: (k[0], k[1] or ""))]


def delta_ast(changeset: FunctionChangeSet, weights: DeltaWeights | None = None) -> float:
    """Weighted syntax edit size of one function's changeset.

    Sum over actions of kind-weight x subtree-depth, discounted by the
    name-only factor and zeroed for blacklisted (logging) subtrees.
    """
    weights = weights or DeltaWeights()
    total = 0.0
    for act in changeset.actions:
        if act.blacklisted:
            continue
        term = weights.for_kind(act.kind) * act.subtree_depth
        if act.only_name_or_modifier:
            term = term * weights.name_only_factor
        total += term
    return total


def diff_file_pair(before: SyntaxTree, after: SyntaxTree,
                   similarity_threshold: float = 0.5,
                   blacklist=DEFAULT_BLACKLIST):
    """Convenience wrapper: match, script, and group one file pair.

    Returns (mapping, actions, changesets).
    """
    from .syntax import extract_functions

    mapping = map_trees(before, after, similarity_threshold=similarity_threshold)
    actions = edit_script(mapping, before, after, blacklist=blacklist)
    changesets = group_by_function(actions, extract_functions(before),
                                   extract_functions(after),
                                   file=after.path or before.path)
    return mapping, actions, changesets
