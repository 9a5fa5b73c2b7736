"""Context construction around a target logging statement.

Three kinds of context are built: the enclosing function source (direct),
bounded backward/forward statement paths on the CFG (control flow), and
backward def-use slices for every variable referenced by the logging call
(data flow), optionally expanded one level into resolved project callees.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .log_extractor import LogStatement, log_argument_variables
from .source_model import (
    CallGraph,
    ControlFlowGraph,
    FunctionDecl,
    Statement,
    build_cfg,
)

DEFAULT_MAX_PATH_LEN = 10
DEFAULT_CALLEE_DEPTH = 1

_CONSTANT_KINDS = ("num", "str", "char")


@dataclass
class FlowPaths:
    backward: list[str]
    forward: list[str]
    limit: int


@dataclass
class DataFlowSlice:
    variable: str
    chain: list[tuple[str, int]]  # (statement text, line)
    source_kind: str  # constant | parameter | call_return | field | unknown


@dataclass
class ContextBundle:
    direct: str
    flows: Optional[FlowPaths]
    slices: list[DataFlowSlice]
    callee_expansions: dict[str, str] = field(default_factory=dict)


def direct_context(stmt: LogStatement) -> str:
    """Verbatim text of the enclosing function, signature included."""
    return stmt.enclosing_function.text


def _node_text(node: Statement) -> str:
    return node.head_text if node.head_text else node.text


def bounded_walk(cfg: ControlFlowGraph, start: int, limit: int, direction: str) -> list[int]:
    """Breadth-first node walk from `start` (exclusive), truncated to `limit`.

    Neighbor order follows edge insertion order, which puts then-branches
    before else-branches; the visit sequence is independent of `limit`, so
    walks for smaller limits are prefixes of walks for larger ones.
    """
    adjacency = cfg.predecessors if direction == "backward" else cfg.successors
    visited: set[int] = {start}
    order: list[int] = []
    frontier = [n for n in adjacency.get(start, []) if n != start]
    while frontier and len(order) < limit:
        next_frontier: list[int] = []
        for node in frontier:
            if node in visited:
                continue
            visited.add(node)
            order.append(node)
            if len(order) >= limit:
                break
            next_frontier.extend(adjacency.get(node, []))
        frontier = next_frontier
    return order


def control_flow_context(stmt: LogStatement, max_path_len: int = DEFAULT_MAX_PATH_LEN) -> FlowPaths:
    """Bounded backward/forward statement paths around the logging call.

    The backward list is reported in execution order (it ends at a statement
    immediately preceding the log); the forward list starts at a statement
    immediately following it.
    """
    if max_path_len < 1:
        raise ValueError("path length limit must be >= 1")
    cfg = build_cfg(stmt.enclosing_function)
    start = cfg.index_of(stmt.statement)
    back_nodes = bounded_walk(cfg, start, max_path_len, "backward")
    fwd_nodes = bounded_walk(cfg, start, max_path_len, "forward")
    backward = [_node_text(cfg.nodes[i]) for i in reversed(back_nodes)]
    forward = [_node_text(cfg.nodes[i]) for i in fwd_nodes]
    return FlowPaths(backward=backward, forward=forward, limit=max_path_len)


# ---------------------------------------------------------------------------
# Backward data-flow slicing


def reaching_definitions(cfg: ControlFlowGraph) -> dict[int, set[tuple[str, int]]]:
    """Classic worklist analysis; IN sets of (variable, defining node) pairs.

    Definitions inside loop bodies flow around back edges, so any definition
    in a loop body may reach uses after it.
    """
    n = len(cfg.nodes)
    gen: list[set[tuple[str, int]]] = []
    kill_vars: list[set[str]] = []
    for i, node in enumerate(cfg.nodes):
        gen.append({(v, i) for v in node.defs})
        kill_vars.append(set(node.defs))
    in_sets: list[set[tuple[str, int]]] = [set() for _ in range(n)]
    out_sets: list[set[tuple[str, int]]] = [set() for _ in range(n)]
    worklist = list(range(n))
    while worklist:
        i = worklist.pop(0)
        new_in: set[tuple[str, int]] = set()
        for p in cfg.predecessors.get(i, []):
            new_in |= out_sets[p]
        new_out = {pair for pair in new_in if pair[0] not in kill_vars[i]} | gen[i]
        changed = new_out != out_sets[i]
        in_sets[i] = new_in
        out_sets[i] = new_out
        if changed:
            for s in cfg.successors.get(i, []):
                if s not in worklist:
                    worklist.append(s)
    return {i: in_sets[i] for i in range(n)}


def _statement_source_kind(node: Statement) -> Optional[str]:
    """Terminal classification for a defining statement, if it is a source."""
    if node.calls:
        return "call_return"
    if node.kind in ("declaration", "assignment"):
        text = node.text
        if "=" in text:
            rhs = text.split("=", 1)[1]
            if "this." in rhs:
                return "field"
        if not node.traced_uses:
            return "constant"
    return None


class _Slicer:
    def __init__(
        self,
        cfg: ControlFlowGraph,
        function: FunctionDecl,
        call_graph: Optional[CallGraph],
        callee_depth: int,
        expansions: dict[str, str],
    ):
        self.cfg = cfg
        self.function = function
        self.call_graph = call_graph
        self.callee_depth = callee_depth
        self.expansions = expansions
        self.reach = reaching_definitions(cfg)

    def slice_variable(self, variable: str, at_node: int) -> DataFlowSlice:
        chain: list[tuple[str, int]] = []
        chain_nodes: set[tuple[str, int]] = set()  # (function name, node index)
        visited: set[tuple[str, int]] = set()
        source_kind = ""

        def visit(var: str, node_idx: int) -> None:
            nonlocal source_kind
            defs = sorted(
                (i for v, i in self.reach.get(node_idx, set()) if v == var),
                reverse=True,  # nearest (textually latest) definition first
            )
            if not defs:
                if var in self.function.parameter_names:
                    source_kind = source_kind or "parameter"
                elif f"this.{var}" in self.function.text:
                    source_kind = source_kind or "field"
                else:
                    source_kind = source_kind or "unknown"
                return
            for def_idx in defs:
                key = (var, def_idx)
                if key in visited:
                    continue
                visited.add(key)
                node = self.cfg.nodes[def_idx]
                chain_key = (self.function.qualified_name, def_idx)
                if chain_key not in chain_nodes:
                    chain_nodes.add(chain_key)
                    chain.append((node.text.strip(), node.line))
                terminal = _statement_source_kind(node)
                if terminal == "call_return":
                    source_kind = "call_return"
                    self._expand_callee(node, chain, chain_nodes)
                    continue
                if terminal is not None:
                    source_kind = terminal
                    continue
                for used in sorted(node.traced_uses):
                    visit(used, def_idx)

        visit(variable, at_node)
        if not source_kind:
            source_kind = "unknown"
        return DataFlowSlice(variable=variable, chain=chain, source_kind=source_kind)

    def _expand_callee(
        self,
        node: Statement,
        chain: list[tuple[str, int]],
        chain_nodes: set[tuple[str, int]],
    ) -> None:
        if self.callee_depth <= 0 or self.call_graph is None:
            return
        for call in node.calls:
            callee = self.call_graph.resolve(call.name, call.arity)
            if callee is None or callee.qualified_name == self.function.qualified_name:
                continue
            site = f"{self.function.qualified_name}:{call.line}"
            self.expansions.setdefault(site, callee.text)
            sub_cfg = build_cfg(callee)
            sub = _Slicer(
                sub_cfg, callee, self.call_graph, self.callee_depth - 1, self.expansions
            )
            for idx, stmt in enumerate(sub_cfg.nodes):
                if stmt.kind != "return":
                    continue
                for used in sorted(stmt.traced_uses):
                    piece = sub.slice_variable(used, idx)
                    for text, line in piece.chain:
                        chain_key = (callee.qualified_name, text, line)
                        if chain_key not in chain_nodes:
                            chain_nodes.add(chain_key)
                            chain.append((text, line))


def data_flow_context(
    stmt: LogStatement,
    callee_depth: int = DEFAULT_CALLEE_DEPTH,
    call_graph: Optional[CallGraph] = None,
    expansions: Optional[dict[str, str]] = None,
) -> list[DataFlowSlice]:
    """Backward def-use slice per variable referenced by the logging call.

    Walks reaching definitions in reverse until a data source: constant
    assignment, parameter, field read, or call return. Resolved project
    calls are expanded into `expansions` while callee_depth > 0.
    """
    if callee_depth < 0:
        raise ValueError("callee_depth must be >= 0")
    cfg = build_cfg(stmt.enclosing_function)
    at_node = cfg.index_of(stmt.statement)
    slicer = _Slicer(
        cfg,
        stmt.enclosing_function,
        call_graph,
        callee_depth,
        expansions if expansions is not None else {},
    )
    return [slicer.slice_variable(v, at_node) for v in log_argument_variables(stmt)]


def build_bundle(
    stmt: LogStatement,
    max_path_len: int = DEFAULT_MAX_PATH_LEN,
    callee_depth: int = DEFAULT_CALLEE_DEPTH,
    call_graph: Optional[CallGraph] = None,
) -> ContextBundle:
    """All three context kinds for one logging statement."""
    expansions: dict[str, str] = {}
    slices = data_flow_context(
        stmt, callee_depth=callee_depth, call_graph=call_graph, expansions=expansions
    )
    return ContextBundle(
        direct=direct_context(stmt),
        flows=control_flow_context(stmt, max_path_len),
        slices=slices,
        callee_expansions=expansions,
    )


def bundle_to_dict(bundle: ContextBundle) -> dict:
    return {
        "direct": bundle.direct,
        "flows": {
            "backward": bundle.flows.backward,
            "forward": bundle.flows.forward,
            "limit": bundle.flows.limit,
        }
        if bundle.flows
        else None,
        "slices": [
            {
                "variable": s.variable,
                "chain": [[text, line] for text, line in s.chain],
                "source_kind": s.source_kind,
            }
            for s in bundle.slices
        ],
        "callee_expansions": dict(sorted(bundle.callee_expansions.items())),
    }


def bundle_from_dict(data: dict) -> ContextBundle:
    flows = None
    if data.get("flows"):
        flows = FlowPaths(
            backward=list(data["flows"]["backward"]),
            forward=list(data["flows"]["forward"]),
            limit=int(data["flows"]["limit"]),
        )
    return ContextBundle(
        direct=data.get("direct", ""),
        flows=flows,
        slices=[
            DataFlowSlice(
                variable=s["variable"],
                chain=[(c[0], int(c[1])) for c in s["chain"]],
                source_kind=s["source_kind"],
            )
            for s in data.get("slices", [])
        ],
        callee_expansions=dict(data.get("callee_expansions", {})),
    )
