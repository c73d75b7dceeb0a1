"""Per-callable program dependence graph.

Node 0 is the callable entry; statements follow in preorder. Edge kinds:

* ``ControlDep`` – entry/compound header to each direct child statement.
* ``DataDep`` – classical dependences. ``flow`` edges come from reaching
  definitions; ``anti``/``output`` edges order reads and writes of mutables.
  Message output is modelled as a read-modify-write of a pseudo variable
  named ``<trace>`` so emitters stay ordered.
* ``QubitOrder`` – two statements touching conflicting qubit references where
  at least one applies a gate, measurement, reset or operation call.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..syntax import ast as A
from ..syntax.printer import stmt_header
from .index import Path, format_path, iter_statements
from .qubits import QubitRef, conflicts, qubit_refs
from .safety import is_operation_call
from .symbols import SymbolTable

TRACE = -1


@dataclass
class PdgNode:
    id: int
    path: Path | None
    stmt: A.Node | None
    text: str
    touched: list[QubitRef] = field(default_factory=list)
    quantum: bool = False
    uses: set[int] = field(default_factory=set)
    defs: set[int] = field(default_factory=set)
    writes: set[int] = field(default_factory=set)  # `set` targets (subset of defs)


@dataclass(frozen=True)
class PdgEdge:
    src: int
    dst: int
    kind: str
    label: str = ""


@dataclass
class Pdg:
    callable: str
    nodes: list[PdgNode]
    edges: list[PdgEdge]
    children: dict[int, list[int]] = field(default_factory=dict)

    def node_at(self, path) -> PdgNode:
        for n in self.nodes[1:]:
            if n.path == tuple(path):
                return n
        raise KeyError(f"no statement at {format_path(path)}")

    def edges_of_kind(self, kind: str) -> list[PdgEdge]:
        return [e for e in self.edges if e.kind == kind]

    def subtree(self, nid: int) -> set[int]:
        out = {nid}
        stack = [nid]
        while stack:
            for c in self.children.get(stack.pop(), ()):
                out.add(c)
                stack.append(c)
        return out

    def blocking_edge(self, a_path, b_path) -> PdgEdge | None:
        """First non-control edge linking the subtrees of two sibling statements."""
        sa = self.subtree(self.node_at(a_path).id)
        sb = self.subtree(self.node_at(b_path).id)
        for e in self.edges:
            if e.kind == "ControlDep":
                continue
            if (e.src in sa and e.dst in sb) or (e.src in sb and e.dst in sa):
                return e
        return None

    def has_path(self, a: int, b: int) -> bool:
        succ: dict[int, list[int]] = {}
        for e in self.edges:
            succ.setdefault(e.src, []).append(e.dst)
        seen, stack = {a}, [a]
        while stack:
            for n in succ.get(stack.pop(), ()):
                if n == b:
                    return True
                if n not in seen:
                    seen.add(n)
                    stack.append(n)
        return False

    def to_text(self) -> str:
        lines = [f'n{n.id} "{_escape(n.text)}"' for n in self.nodes]
        lines += [f"e {e.src} {e.dst} {e.kind}" for e in self.edges]
        return "\n".join(lines) + "\n"

    def to_dot(self) -> str:
        styles = {"ControlDep": "solid", "DataDep": "dashed", "QubitOrder": "bold"}
        lines = [f'digraph "{_escape(self.callable)}" {{', "    node [shape=box];"]
        for n in self.nodes:
            lines.append(f'    n{n.id} [label="{_escape(n.text)}"];')
        for e in self.edges:
            label = e.kind if not e.label else f"{e.kind}: {e.label}"
            lines.append(f'    n{e.src} -> n{e.dst} [label="{_escape(label)}", style={styles[e.kind]}];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def header_exprs(s) -> list:
    if isinstance(s, (A.Let, A.Mutable, A.Set, A.Return)):
        return [s.value]
    if isinstance(s, A.CallStmt):
        return [s.expr]
    if isinstance(s, A.Using):
        return [] if s.size is None else [s.size]
    if isinstance(s, A.For):
        return [s.range]
    if isinstance(s, A.If):
        return [s.cond, *(e.cond for e in s.elifs)]
    return []


def message_emitters(table: SymbolTable) -> set[str]:
    """Qualified names of callables that may (transitively) emit a Message."""
    calls: dict[str, set[str]] = {}
    direct: set[str] = set()
    for q, sym in table.callables.items():
        c = sym.decl
        calls[q] = set()
        for node in c.body.walk():
            if isinstance(node, A.Call):
                if node.callee == "Message":
                    direct.add(q)
                target = table.symbol_of(node)
                if target is not None:
                    calls[q].add(target.qualified)
            elif isinstance(node, A.Ident):
                target = table.symbol_of(node)
                if target is not None and target.kind == "callable":
                    calls[q].add(target.qualified)
    emit = set(direct)
    changed = True
    while changed:
        changed = False
        for q, callees in calls.items():
            if q not in emit and callees & emit:
                emit.add(q)
                changed = True
    return emit


def statement_facts(s, table: SymbolTable, emitters: set[str]) -> tuple:
    """(uses, defs, writes, touched qubits, quantum?) for a statement header."""
    uses: set[int] = set()
    touched: list[QubitRef] = []
    quantum = False
    emits = False
    for e in header_exprs(s):
        touched.extend(qubit_refs(e, table))
        for node in e.walk():
            if isinstance(node, A.Ident):
                sym = table.symbol_of(node)
                if sym is None:
                    continue
                if sym.kind == "callable":
                    if sym.qualified in emitters:
                        emits = True
                    if sym.decl.is_operation:
                        quantum = True
                elif not (sym.type is not None and sym.type.is_quantum):
                    uses.add(sym.id)
            elif isinstance(node, (A.Call, A.ControlledApply)):
                if is_operation_call(node, table):
                    quantum = True
                if isinstance(node, A.Call):
                    if node.callee == "Message":
                        emits = True
                    sym = table.symbol_of(node)
                    if sym is not None and sym.qualified in emitters:
                        emits = True
    defs: set[int] = set()
    writes: set[int] = set()
    if isinstance(s, (A.Let, A.Mutable, A.For)):
        defs.add(table.refs[id(s)])
    elif isinstance(s, A.Set):
        sid = table.refs[id(s)]
        defs.add(sid)
        writes.add(sid)
    if emits:
        uses.add(TRACE)
        defs.add(TRACE)
        writes.add(TRACE)
    return uses, defs, writes, touched, quantum


def build_pdg(callable_, table: SymbolTable) -> Pdg:
    """Build the dependence graph of one callable of ``table.program``."""
    c = _table_callable(callable_, table)
    ns = table.namespace_of.get(id(c), "")
    emitters = message_emitters(table)
    params = ", ".join(f"{p.name} : {p.type}" for p in c.params)
    entry = PdgNode(0, None, None, f"{c.kind} {c.name}({params}) : {c.return_type}")
    nodes = [entry]
    by_stmt: dict[int, int] = {}
    children: dict[int, list[int]] = {0: []}
    for ref in iter_statements(c.body):
        uses, defs, writes, touched, quantum = statement_facts(ref.stmt, table, emitters)
        n = PdgNode(len(nodes), ref.path, ref.stmt, stmt_header(ref.stmt), touched, quantum,
                    uses, defs, writes)
        nodes.append(n)
        by_stmt[id(ref.stmt)] = n.id
        parent = 0 if ref.parent is None else by_stmt[id(ref.parent)]
        children.setdefault(parent, []).append(n.id)
    edges: list[PdgEdge] = []
    seen: set[tuple] = set()

    def add(src: int, dst: int, kind: str, label: str = "") -> None:
        key = (src, dst, kind, label)
        if src != dst and key not in seen:
            seen.add(key)
            edges.append(PdgEdge(src, dst, kind, label))

    for parent, kids in children.items():
        for k in kids:
            add(parent, k, "ControlDep")

    def name(sid: int) -> str:
        return "<trace>" if sid == TRACE else table.symbols[sid].name

    # flow dependences: reaching definitions over the structured control flow
    def flow(block: A.Block, state: dict[int, frozenset]) -> dict[int, frozenset]:
        for s in block.stmts:
            n = nodes[by_stmt[id(s)]]
            for u in sorted(n.uses):
                for d in sorted(state.get(u, ())):
                    add(d, n.id, "DataDep", name(u))
            if isinstance(s, A.If):
                outs = [flow(b, dict(state)) for b in s.blocks()]
                if s.else_ is None:
                    outs.append(state)
                state = _join(outs)
            elif isinstance(s, A.For):
                state = dict(state)
                for d in n.defs:
                    state[d] = frozenset({n.id})
                loop_in = state
                while True:
                    out = flow(s.body, dict(loop_in))
                    nxt = _join([state, out])
                    if nxt == loop_in:
                        break
                    loop_in = nxt
                state = loop_in
            elif isinstance(s, A.Using):
                state = flow(s.body, dict(state))
            else:
                state = dict(state)
                for d in n.defs:
                    state[d] = frozenset({n.id})
        return state

    flow(c.body, {})

    stmts = nodes[1:]
    for i, a in enumerate(stmts):
        for b in stmts[i + 1:]:
            for x in sorted(a.uses & b.writes):
                add(a.id, b.id, "DataDep", name(x))
            for x in sorted(((a.defs & b.writes) | (a.writes & b.defs)) - {TRACE}):
                add(a.id, b.id, "DataDep", name(x))
            if (a.quantum or b.quantum) and a.touched and b.touched:
                for x in a.touched:
                    hit = next((y for y in b.touched if conflicts(x, y)), None)
                    if hit is not None:
                        add(a.id, b.id, "QubitOrder", table.symbols[x.binding].name)
                        break
    edges.sort(key=lambda e: (e.src, e.dst, e.kind, e.label))
    return Pdg(f"{ns}.{c.name}", nodes, edges, children)


def _join(states: list[dict[int, frozenset]]) -> dict[int, frozenset]:
    out: dict[int, frozenset] = {}
    for st in states:
        for k, v in st.items():
            out[k] = out.get(k, frozenset()) | v
    return out


def _table_callable(callable_, table: SymbolTable) -> A.Callable:
    if isinstance(callable_, str):
        return table.lookup(callable_).decl
    if id(callable_) in table.namespace_of:
        return callable_
    for ns, c in table.program.callables():
        if c.name == callable_.name and c == callable_:
            return c
    raise KeyError(f"callable {callable_.name!r} is not part of the resolved program")


__all__ = ["Pdg", "PdgEdge", "PdgNode", "build_pdg", "message_emitters", "TRACE"]
