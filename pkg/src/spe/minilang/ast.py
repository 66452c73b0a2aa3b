"""AST and scope structures for MiniC.

Nodes use identity equality so they can serve as dictionary keys (the
interpreter keys frames by VarDecl, the renderer accepts per-node name
overrides). Structural comparison goes through `structurally_equal`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

INT = "int"
UINT = "uint"
BASE_TYPES = (INT, UINT)

INT_MIN = -(2 ** 31)
INT_MAX = 2 ** 31 - 1
UINT_MAX = 2 ** 32 - 1

#: Scope id of the file-level (global) scope; always the root of the tree.
GLOBAL_SCOPE = 0


def c_div(a: int, b: int) -> int:
    """C division: truncates toward zero. Caller checks b != 0."""
    q = abs(a) // abs(b)
    return -q if (a < 0) != (b < 0) else q


def c_mod(a: int, b: int) -> int:
    """C remainder, satisfying a == c_div(a, b) * b + c_mod(a, b)."""
    return a - c_div(a, b) * b


@dataclass(eq=False)
class VarDecl:
    name: str
    type: str  # INT or UINT
    scope_id: int
    init: Optional[int] = None  # folded constant, already range-checked
    is_param: bool = False


@dataclass
class ScopeNode:
    id: int
    parent: Optional[int]  # None only for the global scope
    kind: str  # "global" | "function" | "block"
    decls: list[VarDecl] = field(default_factory=list)


@dataclass
class ScopeTree:
    nodes: dict[int, ScopeNode]

    def node(self, scope_id: int) -> ScopeNode:
        return self.nodes[scope_id]

    def chain(self, scope_id: int) -> list[int]:
        """Scope ids from the global root down to scope_id, inclusive."""
        path = []
        cur: Optional[int] = scope_id
        while cur is not None:
            path.append(cur)
            cur = self.nodes[cur].parent
        path.reverse()
        return path

    def depth(self, scope_id: int) -> int:
        return len(self.chain(scope_id)) - 1


# --- Expressions ---------------------------------------------------------


@dataclass(eq=False)
class Num:
    value: int
    type: str


@dataclass(eq=False)
class Var:
    decl: VarDecl

    @property
    def type(self) -> str:
        return self.decl.type

    @property
    def name(self) -> str:
        return self.decl.name


@dataclass(eq=False)
class Unary:
    op: str  # "-" | "!"
    operand: "Expr"
    type: str


@dataclass(eq=False)
class Binary:
    op: str  # + - * / % == != < <= > >= && ||
    left: "Expr"
    right: "Expr"
    type: str


@dataclass(eq=False)
class Call:
    name: str
    args: list["Expr"]
    type: str


Expr = Union[Num, Var, Unary, Binary, Call]


# --- Statements ----------------------------------------------------------


@dataclass(eq=False)
class Assign:
    target: Var
    value: Expr


@dataclass(eq=False)
class If:
    cond: Expr
    then: "Block"
    orelse: Optional["Block"] = None


@dataclass(eq=False)
class While:
    cond: Expr
    body: "Block"


@dataclass(eq=False)
class Return:
    value: Expr


@dataclass(eq=False)
class Printf:
    arg: Expr
    newline: bool = False  # True for the "%d\n" form


@dataclass(eq=False)
class CallStmt:
    call: Call


@dataclass(eq=False)
class Block:
    scope_id: int
    decls: list[VarDecl]
    stmts: list["Stmt"]


Stmt = Union[Assign, If, While, Return, Printf, CallStmt, Block]


@dataclass(eq=False)
class Function:
    name: str
    ret_type: str
    params: list[VarDecl]
    body: Block
    # Parameters share the body's scope, as in C: `int f(int x) { int x; }`
    # is a redeclaration error.
    scope_id: int


@dataclass(eq=False)
class Program:
    globals: list[VarDecl]
    functions: list[Function]
    scopes: ScopeTree

    def main_function(self) -> Function:
        for f in self.functions:
            if f.name == "main":
                return f
        raise LookupError("program has no main function")

    def function(self, name: str) -> Function:
        for f in self.functions:
            if f.name == name:
                return f
        raise LookupError(f"no function named {name!r}")


# --- Structural comparison -----------------------------------------------
#
# Scope ids are allocated in source order by the parser, so two programs
# parsed from equivalent sources carry identical ids and the ids can take
# part in the comparison directly.


def _decl_key(d: VarDecl) -> tuple:
    return (d.name, d.type, d.scope_id, d.init, d.is_param)


def _expr_key(e: Expr) -> tuple:
    if isinstance(e, Num):
        return ("num", e.type, e.value)
    if isinstance(e, Var):
        return ("var", _decl_key(e.decl))
    if isinstance(e, Unary):
        return ("unary", e.op, e.type, _expr_key(e.operand))
    if isinstance(e, Binary):
        return ("binary", e.op, e.type, _expr_key(e.left), _expr_key(e.right))
    if isinstance(e, Call):
        return ("call", e.name, e.type, tuple(_expr_key(a) for a in e.args))
    raise TypeError(f"not an expression: {e!r}")


def _stmt_key(s: Stmt) -> tuple:
    if isinstance(s, Assign):
        return ("assign", _expr_key(s.target), _expr_key(s.value))
    if isinstance(s, If):
        return (
            "if",
            _expr_key(s.cond),
            _block_key(s.then),
            _block_key(s.orelse) if s.orelse is not None else None,
        )
    if isinstance(s, While):
        return ("while", _expr_key(s.cond), _block_key(s.body))
    if isinstance(s, Return):
        return ("return", _expr_key(s.value))
    if isinstance(s, Printf):
        return ("printf", s.newline, _expr_key(s.arg))
    if isinstance(s, CallStmt):
        return ("callstmt", _expr_key(s.call))
    if isinstance(s, Block):
        return _block_key(s)
    raise TypeError(f"not a statement: {s!r}")


def _block_key(b: Block) -> tuple:
    return (
        "block",
        b.scope_id,
        tuple(_decl_key(d) for d in b.decls),
        tuple(_stmt_key(s) for s in b.stmts),
    )


def program_key(p: Program) -> tuple:
    """A hashable value that identifies p up to structural equality."""
    return (
        tuple(_decl_key(d) for d in p.globals),
        tuple(
            (
                f.name,
                f.ret_type,
                tuple(_decl_key(d) for d in f.params),
                _block_key(f.body),
            )
            for f in p.functions
        ),
    )


def structurally_equal(p: Program, q: Program) -> bool:
    return program_key(p) == program_key(q)
