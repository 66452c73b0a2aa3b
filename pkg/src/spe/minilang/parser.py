"""Parser and semantic checks for MiniC.

One translation unit per call. The parser enforces the rules that keep
enumeration sound and the rendered output acceptable to a conforming C
compiler without diagnostics:

- declarations precede statements in every block (C89), and global
  declarations precede the first function definition;
- initializers are constant expressions, folded here with exact big-int
  arithmetic and range-checked against the declared type;
- no implicit int/unsigned mixing: both operands of an arithmetic or
  comparison operator, and both sides of an assignment, must have the
  same type (conditions and logical operators accept either type);
- printf takes exactly "%d" or "%d\\n" and an int argument;
- a value-returning function's body must end with a return statement,
  so no control path can fall off the end;
- exactly one main, with zero parameters, returning int.

Functions may be called before their definition; prototypes are accepted
and checked for consistency but not stored in the AST.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .ast import (
    GLOBAL_SCOPE,
    INT,
    INT_MAX,
    UINT,
    UINT_MAX,
    Assign,
    Binary,
    Block,
    Call,
    CallStmt,
    Expr,
    Function,
    If,
    Num,
    Printf,
    Program,
    Return,
    ScopeNode,
    ScopeTree,
    Unary,
    Var,
    VarDecl,
    While,
    c_div,
    c_mod,
)

# Stable error kinds, part of the public contract.
E_SYNTAX = "syntax"
E_DECL_AFTER_STMT = "decl_after_stmt"
E_INIT_NOT_CONST = "init_not_const"
E_UNDECLARED = "undeclared"
E_TYPE = "type"
E_DUPLICATE = "duplicate"
E_NO_MAIN = "no_main"
E_BAD_PRINTF = "bad_printf"
E_MISSING_RETURN = "missing_return"
E_RANGE = "range"


class ParseError(Exception):
    def __init__(self, kind: str, message: str, line: int = 0, col: int = 0):
        loc = f"{line}:{col}: " if line else ""
        super().__init__(f"{loc}{message}")
        self.kind = kind
        self.message = message
        self.line = line
        self.col = col


# All of C's keywords are reserved so rendered variants never collide
# with them, even though MiniC only uses a handful.
KEYWORDS = frozenset(
    """
    auto break case char const continue default do double else enum extern
    float for goto if inline int long register restrict return short signed
    sizeof static struct switch typedef union unsigned void volatile
    """.split()
)

_PUNCT2 = ("==", "!=", "<=", ">=", "&&", "||")
_PUNCT1 = set("(){};,=+-*/%<>!")

_REL_OPS = ("<", "<=", ">", ">=")


@dataclass
class _Token:
    kind: str  # "ident" | "num" | "str" | "punct" | "eof"
    text: str
    value: object
    line: int
    col: int


def _lex(src: str) -> list[_Token]:
    toks: list[_Token] = []
    i, line, col = 0, 1, 1
    n = len(src)

    def err(msg: str) -> None:
        raise ParseError(E_SYNTAX, msg, line, col)

    while i < n:
        ch = src[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            j = src.find("\n", i)
            if j == -1:
                j = n
            directive = "".join(src[i:j].split())
            if directive != "#include<stdio.h>":
                err(f"unsupported preprocessor directive: {src[i:j].strip()!r}")
            col += j - i
            i = j
            continue
        if src.startswith("//", i):
            j = src.find("\n", i)
            i = j if j != -1 else n
            continue
        if src.startswith("/*", i):
            j = src.find("*/", i + 2)
            if j == -1:
                err("unterminated comment")
            seg = src[i : j + 2]
            if "\n" in seg:
                line += seg.count("\n")
                col = len(seg) - seg.rfind("\n")
            else:
                col += len(seg)
            i = j + 2
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            text = src[i:j]
            toks.append(_Token("ident", text, text, line, col))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and src[j].isdigit():
                j += 1
            value = int(src[i:j])
            unsigned = j < n and src[j] in "uU"
            if unsigned:
                j += 1
            if j < n and (src[j].isalnum() or src[j] == "_" or src[j] == "."):
                err("malformed number literal")
            toks.append(_Token("num", src[i:j], (value, unsigned), line, col))
            col += j - i
            i = j
            continue
        if ch == '"':
            j = i + 1
            buf = []
            while j < n and src[j] != '"':
                if src[j] == "\\":
                    if j + 1 < n and src[j + 1] == "n":
                        buf.append("\n")
                        j += 2
                    else:
                        err("unsupported escape in string literal")
                elif src[j] == "\n":
                    err("unterminated string literal")
                else:
                    buf.append(src[j])
                    j += 1
            if j >= n:
                err("unterminated string literal")
            toks.append(_Token("str", src[i : j + 1], "".join(buf), line, col))
            col += j + 1 - i
            i = j + 1
            continue
        two = src[i : i + 2]
        if two in _PUNCT2:
            toks.append(_Token("punct", two, two, line, col))
            i += 2
            col += 2
            continue
        if ch in _PUNCT1:
            toks.append(_Token("punct", ch, ch, line, col))
            i += 1
            col += 1
            continue
        err(f"unexpected character {ch!r}")
    toks.append(_Token("eof", "", None, line, col))
    return toks


class _FuncSig:
    __slots__ = ("ret_type", "param_types", "defined", "line", "col")

    def __init__(self, ret_type: str, param_types: tuple, line: int, col: int):
        self.ret_type = ret_type
        self.param_types = param_types
        self.defined = False
        self.line = line
        self.col = col


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.toks = tokens
        self.pos = 0
        self.scopes: dict[int, ScopeNode] = {
            GLOBAL_SCOPE: ScopeNode(GLOBAL_SCOPE, None, "global")
        }
        self._next_scope = GLOBAL_SCOPE + 1
        self.sigs: dict[str, _FuncSig] = {}
        self.called: dict[str, _Token] = {}
        # Environment: stack of (scope_id, {name: decl}), innermost last.
        self.env: list[tuple[int, dict[str, VarDecl]]] = []
        self.cur_ret: Optional[str] = None

    # -- token plumbing ----------------------------------------------

    def cur(self) -> _Token:
        return self.toks[self.pos]

    def advance(self) -> _Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def at_punct(self, text: str) -> bool:
        t = self.cur()
        return t.kind == "punct" and t.text == text

    def take_punct(self, text: str) -> bool:
        if self.at_punct(text):
            self.pos += 1
            return True
        return False

    def expect_punct(self, text: str) -> _Token:
        if not self.at_punct(text):
            t = self.cur()
            self.fail(E_SYNTAX, f"expected {text!r}, found {t.text or t.kind!r}", t)
        return self.advance()

    def at_word(self, word: str) -> bool:
        t = self.cur()
        return t.kind == "ident" and t.text == word

    def take_word(self, word: str) -> bool:
        if self.at_word(word):
            self.pos += 1
            return True
        return False

    def at_type(self) -> bool:
        return self.at_word("int") or self.at_word("unsigned")

    def fail(self, kind: str, message: str, tok: Optional[_Token] = None) -> None:
        t = tok or self.cur()
        raise ParseError(kind, message, t.line, t.col)

    def expect_name(self, what: str) -> _Token:
        t = self.cur()
        if t.kind != "ident":
            self.fail(E_SYNTAX, f"expected {what}, found {t.text or t.kind!r}")
        if t.text in KEYWORDS:
            self.fail(E_SYNTAX, f"keyword {t.text!r} cannot be used as {what}")
        return self.advance()

    # -- scopes and resolution -----------------------------------------

    def new_scope(self, parent: int, kind: str) -> ScopeNode:
        node = ScopeNode(self._next_scope, parent, kind)
        self._next_scope += 1
        self.scopes[node.id] = node
        return node

    def resolve(self, tok: _Token) -> VarDecl:
        for _, frame in reversed(self.env):
            d = frame.get(tok.text)
            if d is not None:
                return d
        if tok.text in self.sigs:
            self.fail(E_TYPE, f"function {tok.text!r} used as a variable", tok)
        self.fail(E_UNDECLARED, f"undeclared identifier {tok.text!r}", tok)
        raise AssertionError  # unreachable

    # -- types, declarators, constant folding ----------------------------

    def parse_type(self) -> str:
        if self.take_word("int"):
            return INT
        if self.take_word("unsigned"):
            self.take_word("int")  # "unsigned int" == "unsigned"
            return UINT
        t = self.cur()
        self.fail(E_SYNTAX, f"expected a type, found {t.text or t.kind!r}")
        raise AssertionError

    def parse_declarators(self, base: str, scope: ScopeNode, first: _Token) -> list[VarDecl]:
        """Parse `name [= const] (, name [= const])* ;` after the type."""
        decls = []
        name_tok = first
        while True:
            init = None
            if self.take_punct("="):
                init = self.fold_const(base, name_tok)
            frame = self.env[-1][1]
            if name_tok.text in frame:
                self.fail(
                    E_DUPLICATE,
                    f"{name_tok.text!r} already declared in this scope",
                    name_tok,
                )
            d = VarDecl(name_tok.text, base, scope.id, init)
            frame[name_tok.text] = d
            scope.decls.append(d)
            decls.append(d)
            if self.take_punct(","):
                name_tok = self.expect_name("a variable name")
                continue
            self.expect_punct(";")
            return decls

    def fold_const(self, target_type: str, name_tok: _Token) -> int:
        value = self._const_add()
        lo, hi = (0, UINT_MAX) if target_type == UINT else (-(INT_MAX + 1), INT_MAX)
        if not lo <= value <= hi:
            self.fail(
                E_RANGE,
                f"initializer value {value} out of range for {target_type!r}",
                name_tok,
            )
        return value

    def _const_add(self) -> int:
        v = self._const_mul()
        while True:
            if self.take_punct("+"):
                v = v + self._const_mul()
            elif self.take_punct("-"):
                v = v - self._const_mul()
            else:
                return v

    def _const_mul(self) -> int:
        v = self._const_unary()
        while True:
            if self.take_punct("*"):
                v = v * self._const_unary()
            elif self.at_punct("/") or self.at_punct("%"):
                op = self.advance()
                rhs = self._const_unary()
                if rhs == 0:
                    self.fail(E_RANGE, "division by zero in constant initializer", op)
                v = c_div(v, rhs) if op.text == "/" else c_mod(v, rhs)
            else:
                return v

    def _const_unary(self) -> int:
        if self.take_punct("-"):
            return -self._const_unary()
        return self._const_primary()

    def _const_primary(self) -> int:
        t = self.cur()
        if t.kind == "num":
            self.advance()
            return t.value[0]
        if self.take_punct("("):
            v = self._const_add()
            self.expect_punct(")")
            return v
        if t.kind == "ident" and t.text not in KEYWORDS:
            self.fail(
                E_INIT_NOT_CONST,
                f"initializers must be constant expressions, found {t.text!r}",
                t,
            )
        self.fail(E_SYNTAX, f"expected a constant expression, found {t.text or t.kind!r}")
        raise AssertionError

    # -- expressions ------------------------------------------------------

    def parse_expr(self) -> Expr:
        return self._parse_lor()

    def _parse_lor(self) -> Expr:
        e = self._parse_land()
        while self.at_punct("||"):
            self.advance()
            r = self._parse_land()
            e = Binary("||", e, r, INT)
        return e

    def _parse_land(self) -> Expr:
        e = self._parse_eq()
        while self.at_punct("&&"):
            self.advance()
            r = self._parse_eq()
            e = Binary("&&", e, r, INT)
        return e

    def _parse_eq(self) -> Expr:
        e = self._parse_rel()
        while self.at_punct("==") or self.at_punct("!="):
            op = self.advance()
            r = self._parse_rel()
            self._check_same_type(op, e, r)
            e = Binary(op.text, e, r, INT)
        return e

    def _parse_rel(self) -> Expr:
        e = self._parse_add()
        while any(self.at_punct(o) for o in _REL_OPS):
            op = self.advance()
            r = self._parse_add()
            self._check_same_type(op, e, r)
            e = Binary(op.text, e, r, INT)
        return e

    def _parse_add(self) -> Expr:
        e = self._parse_mul()
        while self.at_punct("+") or self.at_punct("-"):
            op = self.advance()
            r = self._parse_mul()
            self._check_same_type(op, e, r)
            e = Binary(op.text, e, r, e.type)
        return e

    def _parse_mul(self) -> Expr:
        e = self._parse_unary()
        while self.at_punct("*") or self.at_punct("/") or self.at_punct("%"):
            op = self.advance()
            r = self._parse_unary()
            self._check_same_type(op, e, r)
            e = Binary(op.text, e, r, e.type)
        return e

    def _check_same_type(self, op: _Token, left: Expr, right: Expr) -> None:
        if left.type != right.type:
            self.fail(
                E_TYPE,
                f"operands of {op.text!r} must have the same type "
                f"({left.type} vs {right.type})",
                op,
            )

    def _parse_unary(self) -> Expr:
        if self.at_punct("-"):
            self.advance()
            operand = self._parse_unary()
            return Unary("-", operand, operand.type)
        if self.at_punct("!"):
            self.advance()
            operand = self._parse_unary()
            return Unary("!", operand, INT)
        return self._parse_primary()

    def _parse_primary(self) -> Expr:
        t = self.cur()
        if self.take_punct("("):
            e = self.parse_expr()
            self.expect_punct(")")
            return e
        if t.kind == "num":
            self.advance()
            value, unsigned = t.value
            if unsigned:
                if value > UINT_MAX:
                    self.fail(E_RANGE, f"unsigned literal {t.text} out of range", t)
                return Num(value, UINT)
            if value > INT_MAX:
                self.fail(E_RANGE, f"int literal {t.text} out of range", t)
            return Num(value, INT)
        if t.kind == "ident":
            if t.text == "printf":
                self.fail(E_BAD_PRINTF, "printf is only allowed as a statement", t)
            if t.text in KEYWORDS:
                self.fail(E_SYNTAX, f"unexpected keyword {t.text!r}", t)
            self.advance()
            if self.at_punct("("):
                return self._parse_call(t)
            return Var(self.resolve(t))
        self.fail(E_SYNTAX, f"expected an expression, found {t.text or t.kind!r}")
        raise AssertionError

    def _parse_call(self, name_tok: _Token) -> Call:
        sig = self.sigs.get(name_tok.text)
        if sig is None:
            kind = E_TYPE if any(name_tok.text in f for _, f in self.env) else E_UNDECLARED
            what = "variable used as a function" if kind == E_TYPE else "undeclared function"
            self.fail(kind, f"{what}: {name_tok.text!r}", name_tok)
        self.expect_punct("(")
        args: list[Expr] = []
        if not self.at_punct(")"):
            while True:
                args.append(self.parse_expr())
                if not self.take_punct(","):
                    break
        self.expect_punct(")")
        if len(args) != len(sig.param_types):
            self.fail(
                E_TYPE,
                f"{name_tok.text!r} expects {len(sig.param_types)} argument(s), "
                f"got {len(args)}",
                name_tok,
            )
        for i, (a, pt) in enumerate(zip(args, sig.param_types)):
            if a.type != pt:
                self.fail(
                    E_TYPE,
                    f"argument {i + 1} of {name_tok.text!r} must be {pt}, got {a.type}",
                    name_tok,
                )
        self.called.setdefault(name_tok.text, name_tok)
        return Call(name_tok.text, args, sig.ret_type)

    # -- statements -------------------------------------------------------

    def parse_block_body(self, scope: ScopeNode, frame: dict) -> Block:
        """Parse `{ decls* stmts* }`; frame may be pre-seeded with params."""
        self.expect_punct("{")
        self.env.append((scope.id, frame))
        decls: list[VarDecl] = []
        while self.at_type():
            base = self.parse_type()
            name_tok = self.expect_name("a variable name")
            decls.extend(self.parse_declarators(base, scope, name_tok))
        stmts = []
        while not self.at_punct("}"):
            if self.at_type():
                self.fail(
                    E_DECL_AFTER_STMT,
                    "declarations must precede all statements in a block",
                )
            stmts.append(self.parse_stmt())
        self.expect_punct("}")
        self.env.pop()
        return Block(scope.id, decls, stmts)

    def parse_stmt(self):
        t = self.cur()
        if self.at_punct("{"):
            scope = self.new_scope(self.env[-1][0], "block")
            return self.parse_block_body(scope, {})
        if self.at_word("if"):
            self.advance()
            self.expect_punct("(")
            cond = self.parse_expr()
            self.expect_punct(")")
            then = self._parse_controlled_block()
            orelse = None
            if self.take_word("else"):
                orelse = self._parse_controlled_block()
            return If(cond, then, orelse)
        if self.at_word("while"):
            self.advance()
            self.expect_punct("(")
            cond = self.parse_expr()
            self.expect_punct(")")
            return While(cond, self._parse_controlled_block())
        if self.at_word("return"):
            self.advance()
            value = self.parse_expr()
            if value.type != self.cur_ret:
                self.fail(
                    E_TYPE,
                    f"return value must be {self.cur_ret}, got {value.type}",
                    t,
                )
            self.expect_punct(";")
            return Return(value)
        if self.at_word("printf"):
            return self._parse_printf()
        if t.kind == "ident" and t.text not in KEYWORDS:
            nxt = self.toks[self.pos + 1]
            if nxt.kind == "punct" and nxt.text == "(":
                self.advance()
                call = self._parse_call(t)
                self.expect_punct(";")
                return CallStmt(call)
            if nxt.kind == "punct" and nxt.text == "=":
                self.advance()
                self.advance()
                target = Var(self.resolve(t))
                value = self.parse_expr()
                if value.type != target.type:
                    self.fail(
                        E_TYPE,
                        f"cannot assign {value.type} to {target.type} "
                        f"variable {t.text!r}",
                        t,
                    )
                self.expect_punct(";")
                return Assign(target, value)
        self.fail(E_SYNTAX, f"expected a statement, found {t.text or t.kind!r}")
        raise AssertionError

    def _parse_controlled_block(self) -> Block:
        """Body of if/else/while: a block, or a single statement wrapped
        in a fresh (declaration-free) block."""
        if self.at_punct("{"):
            scope = self.new_scope(self.env[-1][0], "block")
            return self.parse_block_body(scope, {})
        scope = self.new_scope(self.env[-1][0], "block")
        self.env.append((scope.id, {}))
        stmt = self.parse_stmt()
        self.env.pop()
        return Block(scope.id, [], [stmt])

    def _parse_printf(self) -> Printf:
        t = self.advance()  # 'printf'
        self.expect_punct("(")
        fmt = self.cur()
        if fmt.kind != "str":
            self.fail(E_BAD_PRINTF, "printf needs a literal format string", fmt)
        if fmt.value not in ("%d", "%d\n"):
            self.fail(
                E_BAD_PRINTF,
                f'printf format must be "%d" or "%d\\n", found {fmt.text}',
                fmt,
            )
        self.advance()
        self.expect_punct(",")
        arg = self.parse_expr()
        if arg.type != INT:
            self.fail(E_BAD_PRINTF, '"%d" requires an int argument', t)
        self.expect_punct(")")
        self.expect_punct(";")
        return Printf(arg, newline=fmt.value.endswith("\n"))

    # -- top level ----------------------------------------------------------

    def parse_program(self) -> Program:
        globals_: list[VarDecl] = []
        functions: list[Function] = []
        pending: list[tuple[Function, int, dict]] = []
        seen_definition = False
        self.env.append((GLOBAL_SCOPE, {}))

        while self.cur().kind != "eof":
            start = self.cur()
            base = self.parse_type()
            name_tok = self.expect_name("a name")
            if self.at_punct("("):
                item = self._parse_function_header(base, name_tok)
                if item is not None:
                    fn, body_start, frame = item
                    functions.append(fn)
                    pending.append((fn, body_start, frame))
                    seen_definition = True
            else:
                if seen_definition:
                    self.fail(
                        E_DECL_AFTER_STMT,
                        "global declarations must precede all function definitions",
                        start,
                    )
                globals_.extend(
                    self.parse_declarators(base, self.scopes[GLOBAL_SCOPE], name_tok)
                )

        for fn, body_start, frame in pending:
            self.pos = body_start
            self.cur_ret = fn.ret_type
            fn.body = self.parse_block_body(self.scopes[fn.scope_id], frame)
            if not fn.body.stmts or not isinstance(fn.body.stmts[-1], Return):
                self.fail(
                    E_MISSING_RETURN,
                    f"function {fn.name!r} must end with a return statement",
                    self.toks[body_start],
                )

        self._check_main(functions)
        for name, tok in self.called.items():
            if not self.sigs[name].defined:
                self.fail(
                    E_UNDECLARED,
                    f"function {name!r} is declared but never defined",
                    tok,
                )
        return Program(globals_, functions, ScopeTree(self.scopes))

    def _parse_function_header(self, ret_type: str, name_tok: _Token):
        """Parse params and either a prototype (returns None) or a
        definition (returns (Function, body-start token index, frame))."""
        self.expect_punct("(")
        params: list[VarDecl] = []
        param_types: list[str] = []
        named = True
        if not self.take_punct(")"):
            if self.at_word("void") and self.toks[self.pos + 1].text == ")":
                self.advance()
                self.expect_punct(")")
            else:
                while True:
                    ptype = self.parse_type()
                    param_types.append(ptype)
                    if self.cur().kind == "ident" and self.cur().text not in KEYWORDS:
                        pname = self.advance()
                        params.append(VarDecl(pname.text, ptype, -1, is_param=True))
                    else:
                        named = False
                    if not self.take_punct(","):
                        break
                self.expect_punct(")")

        sig = self.sigs.get(name_tok.text)
        if sig is not None and (
            sig.ret_type != ret_type or sig.param_types != tuple(param_types)
        ):
            self.fail(
                E_TYPE,
                f"conflicting declaration of {name_tok.text!r} "
                f"(previous at {sig.line}:{sig.col})",
                name_tok,
            )
        if sig is None:
            sig = _FuncSig(ret_type, tuple(param_types), name_tok.line, name_tok.col)
            self.sigs[name_tok.text] = sig

        if self.take_punct(";"):  # prototype only
            return None

        if not self.at_punct("{"):
            self.fail(E_SYNTAX, "expected ';' or a function body")
        if sig.defined:
            self.fail(E_DUPLICATE, f"function {name_tok.text!r} already defined", name_tok)
        if not named or len(params) != len(param_types):
            self.fail(E_SYNTAX, "parameter names are required in a definition", name_tok)
        sig.defined = True

        scope = self.new_scope(GLOBAL_SCOPE, "function")
        frame: dict[str, VarDecl] = {}
        for p in params:
            if p.name in frame:
                self.fail(E_DUPLICATE, f"duplicate parameter {p.name!r}", name_tok)
            p.scope_id = scope.id
            frame[p.name] = p
            scope.decls.append(p)

        body_start = self.pos
        self._skip_braces()
        fn = Function(name_tok.text, ret_type, params, None, scope.id)  # type: ignore[arg-type]
        return fn, body_start, frame

    def _skip_braces(self) -> None:
        depth = 0
        while True:
            t = self.advance()
            if t.kind == "eof":
                raise ParseError(E_SYNTAX, "unexpected end of input in function body",
                                 t.line, t.col)
            if t.kind == "punct" and t.text == "{":
                depth += 1
            elif t.kind == "punct" and t.text == "}":
                depth -= 1
                if depth == 0:
                    return

    def _check_main(self, functions: list[Function]) -> None:
        main = None
        for f in functions:
            if f.name == "main":
                main = f
                break
        if main is None:
            raise ParseError(E_NO_MAIN, "program has no main function")
        if main.ret_type != INT or main.params:
            raise ParseError(
                E_TYPE, "main must take no parameters and return int"
            )


def parse(source: str) -> Program:
    """Parse MiniC source into a resolved Program.

    Raises ParseError (with .kind, .line, .col) on any syntax or
    semantic-rule violation.
    """
    return _Parser(_lex(source)).parse_program()
