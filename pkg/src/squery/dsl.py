"""Scenario language front end.

Parses indentation-structured scenario text into a checked AST.  The
language covers behavior definitions built from `do`, `do ... until`,
sequencing, and `try`/`interrupt when`, plus object declarations with
position/orientation specifiers and top-level `require` constraints.
Anything outside that fragment is rejected with a diagnostic rather
than silently accepted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import (
    ScenarioSyntaxError,
    SemanticError,
    UnsupportedFeatureError,
)

# ---------------------------------------------------------------------------
# tokens

_PUNCT = ("==", "!=", "<=", ">=", "(", ")", ",", ".", ":", "=", "<", ">",
          "+", "-", "*", "/")

_KEYWORDS = frozenset("""
    behavior do until try interrupt when require new with and or not
    at in on offset along by beyond visible from ahead of behind
    following for facing toward away apparently heading apparent
    distance angle to can see deg relative true false True False
""".split())

DIST_KINDS = ("Range", "Uniform", "Normal", "TruncatedNormal")

DEFAULT_PRIMITIVES = frozenset({
    "FollowLane", "LaneChange", "Stationary", "TurnLeft", "TurnRight",
    "Brake", "Accelerate", "Walk", "Stop", "Cross",
})

DEFAULT_CLASSES = frozenset({
    "Car", "Truck", "Bus", "Motorcycle", "Bicycle", "Pedestrian", "Object",
})


@dataclass(frozen=True)
class Token:
    kind: str          # NAME NUMBER PUNCT NEWLINE INDENT DEDENT EOF
    value: str
    line: int
    column: int


def _tokenize(source: str, filename: str | None) -> list[Token]:
    tokens: list[Token] = []
    indents = [0]
    lines = source.split("\n")
    for lineno, raw in enumerate(lines, start=1):
        body = raw.split("#", 1)[0].rstrip()
        if not body.strip():
            continue
        if "\t" in raw[: len(raw) - len(raw.lstrip())]:
            raise ScenarioSyntaxError("tabs are not allowed in indentation",
                                      lineno, 1, filename)
        indent = len(body) - len(body.lstrip(" "))
        if indent > indents[-1]:
            indents.append(indent)
            tokens.append(Token("INDENT", "", lineno, 1))
        else:
            while indent < indents[-1]:
                indents.pop()
                tokens.append(Token("DEDENT", "", lineno, 1))
            if indent != indents[-1]:
                raise ScenarioSyntaxError("inconsistent dedent", lineno,
                                          indent + 1, filename)
        col = indent
        text = body
        n = len(text)
        while col < n:
            ch = text[col]
            if ch == " ":
                col += 1
                continue
            if ch.isdigit() or (ch == "." and col + 1 < n and text[col + 1].isdigit()):
                start = col
                col += 1
                while col < n and (text[col].isdigit() or text[col] == "."):
                    col += 1
                if col < n and text[col] in "eE":
                    probe = col + 1
                    if probe < n and text[probe] in "+-":
                        probe += 1
                    if probe < n and text[probe].isdigit():
                        col = probe + 1
                        while col < n and text[col].isdigit():
                            col += 1
                num = text[start:col]
                try:
                    float(num)
                except ValueError:
                    raise ScenarioSyntaxError("bad number %r" % num, lineno,
                                              start + 1, filename) from None
                tokens.append(Token("NUMBER", num, lineno, start + 1))
                continue
            if ch.isalpha() or ch == "_":
                start = col
                while col < n and (text[col].isalnum() or text[col] == "_"):
                    col += 1
                tokens.append(Token("NAME", text[start:col], lineno, start + 1))
                continue
            for p in _PUNCT:
                if text.startswith(p, col):
                    tokens.append(Token("PUNCT", p, lineno, col + 1))
                    col += len(p)
                    break
            else:
                raise ScenarioSyntaxError("unexpected character %r" % ch,
                                          lineno, col + 1, filename)
        tokens.append(Token("NEWLINE", "", lineno, len(body) + 1))
    while len(indents) > 1:
        indents.pop()
        tokens.append(Token("DEDENT", "", len(lines), 1))
    tokens.append(Token("EOF", "", len(lines) + 1, 1))
    return tokens


# ---------------------------------------------------------------------------
# AST nodes

@dataclass
class Expr:
    pass


@dataclass
class Num(Expr):
    value: float


@dataclass
class BoolLit(Expr):
    value: bool


@dataclass
class VecLit(Expr):
    items: tuple[Expr, ...]


@dataclass
class NameRef(Expr):
    """Bare identifier; `kind` is fixed by the resolution pass."""
    name: str
    kind: str = "unresolved"   # object | region


@dataclass
class FieldRef(Expr):
    obj: str
    fld: str                   # lane | road | position | heading


@dataclass
class DistRef(Expr):
    """One syntactic occurrence of a distribution; uid identifies the
    occurrence so each is quantified as its own unobserved variable."""
    kind: str
    params: tuple[float, ...]
    uid: int = field(compare=False, default=-1)

    def support(self) -> tuple:
        if self.kind == "Range":
            return ("interval", self.params[0], self.params[1])
        if self.kind == "Uniform":
            return ("finite", self.params)
        if self.kind == "Normal":
            return ("interval", -math.inf, math.inf)
        return ("interval", self.params[2], self.params[3])


@dataclass
class Unary(Expr):
    op: str                    # - | not
    x: Expr


@dataclass
class Bin(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass
class Deg(Expr):
    x: Expr


@dataclass
class RelativeTo(Expr):
    x: Expr
    base: Expr


@dataclass
class DistanceTo(Expr):
    target: Expr
    source: Expr


@dataclass
class AngleTo(Expr):
    target: Expr
    source: Expr


@dataclass
class RelativeHeadingOf(Expr):
    x: Expr
    base: Expr


@dataclass
class ApparentHeadingOf(Expr):
    x: Expr
    base: Expr


@dataclass
class CanSee(Expr):
    viewer: Expr
    target: Expr


@dataclass
class InRegion(Expr):
    x: Expr
    region: Expr


@dataclass
class OffsetBy(Expr):
    base: Expr
    delta: Expr


@dataclass
class OffsetAlongBy(Expr):
    base: Expr
    direction: Expr
    delta: Expr


@dataclass
class VisibleRegion(Expr):
    region: Expr
    viewer: Expr
    negated: bool = False


@dataclass
class Stmt:
    pass


@dataclass
class DoStmt(Stmt):
    behavior: str
    until: Expr | None = None


@dataclass
class SeqStmt(Stmt):
    stmts: list[Stmt] = field(default_factory=list)


@dataclass
class TryStmt(Stmt):
    body: Stmt
    condition: Expr
    handler: Stmt


@dataclass
class Specifier:
    pass


@dataclass
class AtSpec(Specifier):
    pos: Expr


@dataclass
class InSpec(Specifier):
    region: Expr


@dataclass
class OnSpec(Specifier):
    region: Expr


@dataclass
class OffsetBySpec(Specifier):
    delta: Expr


@dataclass
class BeyondSpec(Specifier):
    ref: Expr
    amount: Expr
    source: Expr | None = None


@dataclass
class VisibleSpec(Specifier):
    viewer: Expr | None = None


@dataclass
class AheadOfSpec(Specifier):
    ref: Expr
    amount: Expr | None = None


@dataclass
class BehindSpec(Specifier):
    ref: Expr
    amount: Expr


@dataclass
class FollowingSpec(Specifier):
    lane: Expr
    amount: Expr
    source: Expr | None = None


@dataclass
class FacingSpec(Specifier):
    heading: Expr


@dataclass
class FacingTowardSpec(Specifier):
    point: Expr


@dataclass
class FacingAwaySpec(Specifier):
    point: Expr


@dataclass
class ApparentlyFacingSpec(Specifier):
    heading: Expr
    viewer: Expr | None = None


@dataclass
class WithAttr(Specifier):
    name: str
    value: Expr


@dataclass
class BehaviorDef:
    name: str
    body: Stmt
    line: int = 0


@dataclass
class ObjectDecl:
    name: str
    class_name: str
    specifiers: list[Specifier] = field(default_factory=list)
    behavior: str | None = None
    line: int = 0


@dataclass
class ScenarioAST:
    objects: list[ObjectDecl] = field(default_factory=list)
    behaviors: dict[str, BehaviorDef] = field(default_factory=dict)
    primitive_behaviors: set[str] = field(default_factory=set)
    requires: list[Expr] = field(default_factory=list)

    def object_names(self) -> list[str]:
        return [o.name for o in self.objects]


@dataclass(frozen=True)
class ParseOptions:
    classes: frozenset[str] = DEFAULT_CLASSES
    primitives: frozenset[str] = DEFAULT_PRIMITIVES


# ---------------------------------------------------------------------------
# parser

class _Parser:
    def __init__(self, tokens: list[Token], filename: str | None,
                 options: ParseOptions):
        self.toks = tokens
        self.pos = 0
        self.filename = filename
        self.options = options
        self.uid = 0

    # -- token plumbing

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "EOF":
            self.pos += 1
        return t

    def at(self, value: str) -> bool:
        t = self.peek()
        return t.kind in ("NAME", "PUNCT") and t.value == value

    def at_seq(self, *values: str) -> bool:
        return all(
            self.peek(i).kind in ("NAME", "PUNCT") and self.peek(i).value == v
            for i, v in enumerate(values))

    def accept(self, value: str) -> bool:
        if self.at(value):
            self.next()
            return True
        return False

    def expect(self, value: str, what: str | None = None) -> Token:
        t = self.peek()
        if not self.at(value):
            raise ScenarioSyntaxError(
                "expected %r%s, found %r" % (value,
                                             " (%s)" % what if what else "",
                                             t.value or t.kind),
                t.line, t.column, self.filename)
        return self.next()

    def expect_kind(self, kind: str) -> Token:
        t = self.peek()
        if t.kind != kind:
            raise ScenarioSyntaxError(
                "expected %s, found %r" % (kind.lower(), t.value or t.kind),
                t.line, t.column, self.filename)
        return self.next()

    def name_token(self, what: str) -> Token:
        t = self.peek()
        if t.kind != "NAME":
            raise ScenarioSyntaxError("expected %s, found %r" %
                                      (what, t.value or t.kind),
                                      t.line, t.column, self.filename)
        if t.value in _KEYWORDS:
            raise ScenarioSyntaxError(
                "keyword %r cannot be used as %s" % (t.value, what),
                t.line, t.column, self.filename)
        return self.next()

    def err(self, cls, message: str, tok: Token | None = None):
        t = tok or self.peek()
        raise cls(message, t.line, t.column, self.filename)

    # -- program

    def parse_program(self) -> ScenarioAST:
        ast = ScenarioAST()
        auto = 0
        while self.peek().kind != "EOF":
            t = self.peek()
            if t.kind == "NEWLINE":
                self.next()
                continue
            if t.kind in ("INDENT", "DEDENT"):
                self.err(ScenarioSyntaxError, "unexpected indentation")
            if self.at("behavior"):
                b = self.parse_behavior_def(ast)
                ast.behaviors[b.name] = b
            elif self.at("require"):
                self.next()
                ast.requires.append(self.parse_expr())
                self.end_line()
            elif self.at("new"):
                auto += 1
                ast.objects.append(self.parse_object_decl("obj%d" % auto, t))
            elif t.kind == "NAME" and self.peek(1).kind == "PUNCT" \
                    and self.peek(1).value == "=":
                if self.peek(2).kind == "NAME" and self.peek(2).value == "new":
                    name = self.name_token("object name").value
                    self.expect("=")
                    ast.objects.append(self.parse_object_decl(name, t))
                else:
                    self.err(UnsupportedFeatureError,
                             "variable assignment is not supported; only "
                             "`name = new Class ...` declarations may bind names",
                             t)
            else:
                self.err(ScenarioSyntaxError,
                         "expected a behavior definition, object declaration, "
                         "or require statement")
        if not ast.objects and not ast.behaviors:
            raise SemanticError("program declares no objects or behaviors",
                                1, 1, self.filename)
        self._resolve(ast)
        return ast

    def end_line(self):
        t = self.peek()
        if t.kind == "NEWLINE":
            self.next()
        elif t.kind not in ("EOF", "DEDENT"):
            self.err(ScenarioSyntaxError,
                     "unexpected %r at end of statement" % (t.value or t.kind))

    # -- behaviors

    def parse_behavior_def(self, ast: ScenarioAST) -> BehaviorDef:
        start = self.expect("behavior")
        name = self.name_token("behavior name").value
        if name in ast.behaviors:
            self.err(SemanticError, "behavior %r defined twice" % name, start)
        if name in self.options.primitives:
            self.err(SemanticError,
                     "behavior %r shadows a primitive behavior" % name, start)
        self.expect("(")
        if not self.at(")"):
            self.err(UnsupportedFeatureError,
                     "behavior parameters are not supported")
        self.expect(")")
        self.expect(":")
        body = self.parse_block()
        return BehaviorDef(name, body, line=start.line)

    def parse_block(self) -> Stmt:
        self.expect_kind("NEWLINE")
        self.expect_kind("INDENT")
        stmts: list[Stmt] = []
        while True:
            t = self.peek()
            if t.kind == "DEDENT":
                self.next()
                break
            if t.kind == "EOF":
                break
            if t.kind == "NEWLINE":
                self.next()
                continue
            stmts.append(self.parse_stmt())
        if not stmts:
            self.err(ScenarioSyntaxError, "empty block")
        return stmts[0] if len(stmts) == 1 else SeqStmt(stmts)

    def parse_stmt(self) -> Stmt:
        t = self.peek()
        if self.at("do"):
            self.next()
            name = self.name_token("behavior name").value
            if self.accept("("):
                self.expect(")")
            until = None
            if self.accept("until"):
                until = self.parse_expr()
            self.end_line()
            return DoStmt(name, until)
        if self.at("try"):
            self.next()
            self.expect(":")
            body = self.parse_block()
            handlers: list[tuple[Expr, Stmt]] = []
            while self.at("interrupt"):
                self.next()
                self.expect("when")
                cond = self.parse_expr()
                self.expect(":")
                handlers.append((cond, self.parse_block()))
            if not handlers:
                self.err(ScenarioSyntaxError,
                         "try block needs at least one `interrupt when` clause",
                         t)
            # later clauses take priority: they wrap earlier ones
            node: Stmt = body
            for cond, handler in handlers:
                node = TryStmt(node, cond, handler)
            return node
        if self.at("require"):
            self.err(UnsupportedFeatureError,
                     "require is only allowed at the top level "
                     "(it constrains the initial scene)")
        if t.kind == "NAME" and self.peek(1).kind == "PUNCT" \
                and self.peek(1).value == "=":
            self.err(UnsupportedFeatureError,
                     "variable assignment inside behaviors is not supported")
        for known in ("record", "terminate", "abort", "wait", "take"):
            if self.at(known):
                self.err(UnsupportedFeatureError,
                         "%r statements are not supported" % known)
        self.err(ScenarioSyntaxError,
                 "expected `do` or `try` statement, found %r" %
                 (t.value or t.kind))
        raise AssertionError  # unreachable

    # -- objects

    def parse_object_decl(self, name: str, start: Token) -> ObjectDecl:
        self.expect("new")
        cls = self.name_token("class name").value
        if cls not in self.options.classes:
            self.err(SemanticError,
                     "unknown object class %r (registered: %s)" %
                     (cls, ", ".join(sorted(self.options.classes))), start)
        decl = ObjectDecl(name, cls, line=start.line)
        if self.peek().kind not in ("NEWLINE", "EOF", "DEDENT"):
            while True:
                self.parse_specifier(decl)
                if not self.accept(","):
                    break
        self.end_line()
        return decl

    def parse_specifier(self, decl: ObjectDecl):
        t = self.peek()
        if self.accept("at"):
            decl.specifiers.append(AtSpec(self.parse_expr()))
        elif self.accept("in"):
            decl.specifiers.append(InSpec(self.parse_expr()))
        elif self.accept("on"):
            decl.specifiers.append(OnSpec(self.parse_expr()))
        elif self.at_seq("offset", "by"):
            self.next(), self.next()
            decl.specifiers.append(OffsetBySpec(self.parse_expr()))
        elif self.accept("beyond"):
            ref = self.parse_expr()
            self.expect("by")
            amount = self.parse_expr()
            source = self.parse_expr() if self.accept("from") else None
            decl.specifiers.append(BeyondSpec(ref, amount, source))
        elif self.accept("visible"):
            viewer = self.parse_expr() if self.accept("from") else None
            decl.specifiers.append(VisibleSpec(viewer))
        elif self.at_seq("ahead", "of"):
            self.next(), self.next()
            ref = self.parse_expr()
            amount = self.parse_expr() if self.accept("by") else None
            decl.specifiers.append(AheadOfSpec(ref, amount))
        elif self.accept("behind"):
            ref = self.parse_expr()
            self.expect("by")
            decl.specifiers.append(BehindSpec(ref, self.parse_expr()))
        elif self.accept("following"):
            lane = self.parse_expr()
            source = self.parse_expr() if self.accept("from") else None
            self.expect("for")
            decl.specifiers.append(FollowingSpec(lane, self.parse_expr(), source))
        elif self.at_seq("apparently", "facing"):
            self.next(), self.next()
            heading = self.parse_expr()
            viewer = self.parse_expr() if self.accept("from") else None
            decl.specifiers.append(ApparentlyFacingSpec(heading, viewer))
        elif self.accept("facing"):
            if self.accept("toward"):
                decl.specifiers.append(FacingTowardSpec(self.parse_expr()))
            elif self.at_seq("away", "from"):
                self.next(), self.next()
                decl.specifiers.append(FacingAwaySpec(self.parse_expr()))
            else:
                decl.specifiers.append(FacingSpec(self.parse_expr()))
        elif self.accept("with"):
            if self.accept("behavior"):
                if decl.behavior is not None:
                    self.err(SemanticError,
                             "object %r declares two behaviors" % decl.name, t)
                decl.behavior = self.name_token("behavior name").value
                if self.accept("("):
                    self.expect(")")
            else:
                attr = self.name_token("attribute name").value
                decl.specifiers.append(WithAttr(attr, self.parse_expr()))
        else:
            self.err(ScenarioSyntaxError,
                     "unknown specifier starting with %r" % (t.value or t.kind))

    # -- expressions

    def parse_expr(self) -> Expr:
        return self.parse_or()

    def parse_or(self) -> Expr:
        e = self.parse_and()
        while self.at("or"):
            self.next()
            e = Bin("or", e, self.parse_and())
        return e

    def parse_and(self) -> Expr:
        e = self.parse_not()
        while self.at("and"):
            self.next()
            e = Bin("and", e, self.parse_not())
        return e

    def parse_not(self) -> Expr:
        if self.at("not") and self.peek(1).value == "visible":
            # prefix region operator: `not visible R`
            self.next(), self.next()
            return VisibleRegion(self.parse_postfix(), NameRef("ego"), True)
        if self.accept("not"):
            return Unary("not", self.parse_not())
        return self.parse_cmp()

    def parse_cmp(self) -> Expr:
        e = self.parse_add()
        t = self.peek()
        if t.kind == "PUNCT" and t.value in ("<", "<=", ">", ">=", "==", "!="):
            self.next()
            return Bin(t.value, e, self.parse_add())
        if self.at("in"):
            self.next()
            return InRegion(e, self.parse_add())
        if self.at_seq("can", "see"):
            self.next(), self.next()
            return CanSee(e, self.parse_add())
        return e

    def parse_add(self) -> Expr:
        e = self.parse_mul()
        while self.peek().kind == "PUNCT" and self.peek().value in ("+", "-"):
            op = self.next().value
            e = Bin(op, e, self.parse_mul())
        return e

    def parse_mul(self) -> Expr:
        e = self.parse_unary()
        while self.peek().kind == "PUNCT" and self.peek().value in ("*", "/"):
            op = self.next().value
            e = Bin(op, e, self.parse_unary())
        return e

    def parse_unary(self) -> Expr:
        if self.peek().kind == "PUNCT" and self.peek().value == "-":
            self.next()
            return Unary("-", self.parse_unary())
        return self.parse_postfix()

    def parse_postfix(self) -> Expr:
        e = self.parse_prefix_op()
        while True:
            if self.at("deg"):
                self.next()
                e = Deg(e)
            elif self.at_seq("relative", "to"):
                self.next(), self.next()
                e = RelativeTo(e, self.parse_operand())
            elif self.at_seq("offset", "along"):
                self.next(), self.next()
                direction = self.parse_operand()
                self.expect("by")
                e = OffsetAlongBy(e, direction, self.parse_operand())
            elif self.at_seq("offset", "by"):
                self.next(), self.next()
                e = OffsetBy(e, self.parse_operand())
            elif self.at_seq("visible", "from"):
                self.next(), self.next()
                e = VisibleRegion(e, self.parse_operand(), False)
            elif self.at_seq("not", "visible", "from"):
                self.next(), self.next(), self.next()
                e = VisibleRegion(e, self.parse_operand(), True)
            else:
                return e

    def parse_operand(self) -> Expr:
        """Operand of a postfix operator: tight enough to avoid swallowing
        the rest of a comparison."""
        if self.peek().kind == "PUNCT" and self.peek().value == "-":
            self.next()
            return Unary("-", self.parse_operand())
        return self.parse_prefix_op()

    def parse_prefix_op(self) -> Expr:
        if self.at("distance"):
            self.next()
            source = self.parse_operand() if self.accept("from") else NameRef("ego")
            self.expect("to")
            return DistanceTo(self.parse_operand(), source)
        if self.at("angle"):
            self.next()
            source = self.parse_operand() if self.accept("from") else NameRef("ego")
            self.expect("to")
            return AngleTo(self.parse_operand(), source)
        if self.at_seq("relative", "heading", "of"):
            self.next(), self.next(), self.next()
            x = self.parse_operand()
            base = self.parse_operand() if self.accept("from") else NameRef("ego")
            return RelativeHeadingOf(x, base)
        if self.at_seq("apparent", "heading", "of"):
            self.next(), self.next(), self.next()
            x = self.parse_operand()
            base = self.parse_operand() if self.accept("from") else NameRef("ego")
            return ApparentHeadingOf(x, base)
        if self.at("visible") and not self.at_seq("visible", "from"):
            self.next()
            return VisibleRegion(self.parse_operand(), NameRef("ego"), False)
        return self.parse_primary()

    def parse_primary(self) -> Expr:
        t = self.peek()
        if t.kind == "NUMBER":
            self.next()
            return Num(float(t.value))
        if t.kind == "NAME" and t.value in ("true", "false", "True", "False"):
            self.next()
            return BoolLit(t.value.lower() == "true")
        if t.kind == "NAME" and t.value in DIST_KINDS:
            return self.parse_dist(t)
        if t.kind == "NAME":
            if t.value in _KEYWORDS:
                self.err(ScenarioSyntaxError,
                         "unexpected keyword %r in expression" % t.value)
            self.next()
            if self.at("("):
                self.err(UnsupportedFeatureError,
                         "function calls are not supported "
                         "(only %s distributions)" % ", ".join(DIST_KINDS), t)
            if self.accept("."):
                fld = self.expect_kind("NAME").value
                if fld not in ("lane", "road", "position", "heading"):
                    self.err(SemanticError, "unknown field %r" % fld, t)
                return FieldRef(t.value, fld)
            return NameRef(t.value)
        if t.kind == "PUNCT" and t.value == "(":
            self.next()
            first = self.parse_expr()
            if self.accept(","):
                items = [first, self.parse_expr()]
                if self.accept(","):
                    items.append(self.parse_expr())
                self.expect(")")
                return VecLit(tuple(items))
            self.expect(")")
            return first
        self.err(ScenarioSyntaxError,
                 "expected an expression, found %r" % (t.value or t.kind))
        raise AssertionError  # unreachable

    def parse_dist(self, t: Token) -> Expr:
        kind = self.next().value
        self.expect("(")
        params: list[float] = []
        while not self.at(")"):
            sign = -1.0 if self.accept("-") else 1.0
            num = self.expect_kind("NUMBER")
            params.append(sign * float(num.value))
            if not self.accept(","):
                break
        self.expect(")")
        arity = {"Range": (2, 2), "Uniform": (1, 99),
                 "Normal": (2, 2), "TruncatedNormal": (4, 4)}[kind]
        if not arity[0] <= len(params) <= arity[1]:
            self.err(SemanticError,
                     "%s takes %s parameters, got %d" %
                     (kind, "%d" % arity[0] if arity[0] == arity[1]
                      else "%d..%d" % arity, len(params)), t)
        if kind == "Range" and params[0] > params[1]:
            self.err(SemanticError, "Range lower bound exceeds upper", t)
        if kind in ("Normal", "TruncatedNormal") and params[1] <= 0:
            self.err(SemanticError, "%s needs a positive width" % kind, t)
        if kind == "TruncatedNormal" and params[2] > params[3]:
            self.err(SemanticError,
                     "TruncatedNormal lower bound exceeds upper", t)
        self.uid += 1
        return DistRef(kind, tuple(params), self.uid)

    # -- resolution and checking

    def _resolve(self, ast: ScenarioAST):
        objects = set(ast.object_names())
        if len(objects) != len(ast.objects):
            raise SemanticError("duplicate object name", 1, 1, self.filename)

        # collect referenced behaviors, classify primitives
        refs: list[tuple[str, str]] = []   # (behavior name, where)
        for o in ast.objects:
            if o.behavior:
                refs.append((o.behavior, "object %r" % o.name))

        def walk_stmt(s: Stmt, owner: str):
            if isinstance(s, DoStmt):
                refs.append((s.behavior, "behavior %r" % owner))
            elif isinstance(s, SeqStmt):
                for c in s.stmts:
                    walk_stmt(c, owner)
            elif isinstance(s, TryStmt):
                walk_stmt(s.body, owner)
                walk_stmt(s.handler, owner)

        for b in ast.behaviors.values():
            walk_stmt(b.body, b.name)
        for name, where in refs:
            if name in ast.behaviors:
                continue
            if name in self.options.primitives:
                ast.primitive_behaviors.add(name)
            else:
                raise SemanticError(
                    "undefined behavior %r referenced by %s "
                    "(not defined and not a registered primitive)" %
                    (name, where), 1, 1, self.filename)

        # behavior reference graph must be acyclic
        color: dict[str, int] = {}

        def visit(name: str, trail: list[str]):
            if color.get(name) == 2 or name not in ast.behaviors:
                return
            if color.get(name) == 1:
                raise SemanticError(
                    "recursive behavior: %s" % " -> ".join(trail + [name]),
                    1, 1, self.filename)
            color[name] = 1

            def inner(s: Stmt):
                if isinstance(s, DoStmt):
                    visit(s.behavior, trail + [name])
                elif isinstance(s, SeqStmt):
                    for c in s.stmts:
                        inner(c)
                elif isinstance(s, TryStmt):
                    inner(s.body)
                    inner(s.handler)

            inner(ast.behaviors[name].body)
            color[name] = 2

        for name in ast.behaviors:
            visit(name, [])

        # resolve names in expressions
        def resolve_expr(e: Expr, known: set[str], region_slot: bool = False):
            if isinstance(e, NameRef):
                if e.name in objects:
                    if e.name not in known:
                        raise SemanticError(
                            "object %r referenced before its declaration"
                            % e.name, 1, 1, self.filename)
                    e.kind = "object"
                elif e.name == "ego" and "ego" not in objects:
                    raise SemanticError(
                        "implicit reference needs an object named 'ego'",
                        1, 1, self.filename)
                elif region_slot or e.name == "road":
                    e.kind = "region"
                else:
                    raise SemanticError("undefined name %r" % e.name,
                                        1, 1, self.filename)
                return
            if isinstance(e, FieldRef):
                if e.obj not in objects:
                    raise SemanticError("undefined object %r" % e.obj,
                                        1, 1, self.filename)
                if e.obj not in known:
                    raise SemanticError(
                        "object %r referenced before its declaration" % e.obj,
                        1, 1, self.filename)
                return
            if isinstance(e, (Num, BoolLit, DistRef)):
                return
            if isinstance(e, VecLit):
                for c in e.items:
                    resolve_expr(c, known)
                return
            if isinstance(e, Unary):
                resolve_expr(e.x, known)
                return
            if isinstance(e, Bin):
                resolve_expr(e.left, known)
                resolve_expr(e.right, known)
                return
            if isinstance(e, Deg):
                resolve_expr(e.x, known)
                return
            if isinstance(e, RelativeTo):
                resolve_expr(e.x, known)
                resolve_expr(e.base, known)
                return
            if isinstance(e, (DistanceTo, AngleTo)):
                resolve_expr(e.target, known)
                resolve_expr(e.source, known)
                return
            if isinstance(e, (RelativeHeadingOf, ApparentHeadingOf)):
                resolve_expr(e.x, known)
                resolve_expr(e.base, known)
                return
            if isinstance(e, CanSee):
                resolve_expr(e.viewer, known)
                resolve_expr(e.target, known)
                return
            if isinstance(e, InRegion):
                resolve_expr(e.x, known)
                resolve_expr(e.region, known, region_slot=True)
                return
            if isinstance(e, OffsetBy):
                resolve_expr(e.base, known)
                resolve_expr(e.delta, known)
                return
            if isinstance(e, OffsetAlongBy):
                resolve_expr(e.base, known)
                resolve_expr(e.direction, known)
                resolve_expr(e.delta, known)
                return
            if isinstance(e, VisibleRegion):
                resolve_expr(e.region, known, region_slot=True)
                resolve_expr(e.viewer, known)
                return
            raise SemanticError("unexpected expression node %r" % e,
                                1, 1, self.filename)

        # specifiers see only previously declared objects
        seen: set[str] = set()
        for o in ast.objects:
            for sp in o.specifiers:
                for slot, region_slot in _spec_slots(sp):
                    if slot is not None:
                        resolve_expr(slot, seen, region_slot)
            seen.add(o.name)

        def resolve_stmt(s: Stmt):
            if isinstance(s, DoStmt):
                if s.until is not None:
                    resolve_expr(s.until, objects)
            elif isinstance(s, SeqStmt):
                for c in s.stmts:
                    resolve_stmt(c)
            elif isinstance(s, TryStmt):
                resolve_stmt(s.body)
                resolve_expr(s.condition, objects)
                resolve_stmt(s.handler)

        for b in ast.behaviors.values():
            resolve_stmt(b.body)
        for r in ast.requires:
            resolve_expr(r, objects)

        _typecheck(ast, self.filename)


def _spec_slots(sp: Specifier) -> list[tuple[Expr | None, bool]]:
    """(expression, is-region-slot) pairs for each specifier argument."""
    if isinstance(sp, AtSpec):
        return [(sp.pos, False)]
    if isinstance(sp, InSpec):
        return [(sp.region, True)]
    if isinstance(sp, OnSpec):
        return [(sp.region, True)]
    if isinstance(sp, OffsetBySpec):
        return [(sp.delta, False)]
    if isinstance(sp, BeyondSpec):
        return [(sp.ref, False), (sp.amount, False), (sp.source, False)]
    if isinstance(sp, VisibleSpec):
        return [(sp.viewer, False)]
    if isinstance(sp, AheadOfSpec):
        return [(sp.ref, False), (sp.amount, False)]
    if isinstance(sp, BehindSpec):
        return [(sp.ref, False), (sp.amount, False)]
    if isinstance(sp, FollowingSpec):
        return [(sp.lane, True), (sp.source, False), (sp.amount, False)]
    if isinstance(sp, FacingSpec):
        return [(sp.heading, False)]
    if isinstance(sp, FacingTowardSpec):
        return [(sp.point, False)]
    if isinstance(sp, FacingAwaySpec):
        return [(sp.point, False)]
    if isinstance(sp, ApparentlyFacingSpec):
        return [(sp.heading, False), (sp.viewer, False)]
    if isinstance(sp, WithAttr):
        return [(sp.value, False)]
    return []


# ---------------------------------------------------------------------------
# type checking

_SCALAR, _BOOL, _VEC, _REGION, _OBJ = "scalar", "bool", "vector", "region", "object"


def _typecheck(ast: ScenarioAST, filename: str | None):
    def ty(e: Expr) -> str:
        if isinstance(e, Num) or isinstance(e, DistRef):
            return _SCALAR
        if isinstance(e, BoolLit):
            return _BOOL
        if isinstance(e, VecLit):
            for c in e.items:
                want(c, _SCALAR, "vector component")
            return _VEC
        if isinstance(e, NameRef):
            return _OBJ if e.kind == "object" else _REGION
        if isinstance(e, FieldRef):
            return {"lane": _REGION, "road": _REGION,
                    "position": _VEC, "heading": _SCALAR}[e.fld]
        if isinstance(e, Unary):
            if e.op == "-":
                want(e.x, _SCALAR, "unary minus")
                return _SCALAR
            want(e.x, _BOOL, "not")
            return _BOOL
        if isinstance(e, Bin):
            if e.op in ("and", "or"):
                want(e.left, _BOOL, e.op)
                want(e.right, _BOOL, e.op)
                return _BOOL
            if e.op in ("+", "-", "*", "/"):
                want(e.left, _SCALAR, e.op)
                want(e.right, _SCALAR, e.op)
                return _SCALAR
            want(e.left, _SCALAR, e.op)
            want(e.right, _SCALAR, e.op)
            return _BOOL
        if isinstance(e, Deg):
            want(e.x, _SCALAR, "deg")
            return _SCALAR
        if isinstance(e, RelativeTo):
            want(e.x, _SCALAR, "relative to")
            if ty(e.base) not in (_SCALAR, _OBJ):
                fail("relative to needs a heading or object on the right")
            return _SCALAR
        if isinstance(e, (DistanceTo, AngleTo)):
            for side in (e.target, e.source):
                if ty(side) not in (_VEC, _OBJ):
                    fail("distance/angle operands must be positions or objects")
            return _SCALAR
        if isinstance(e, (RelativeHeadingOf, ApparentHeadingOf)):
            if ty(e.x) != _OBJ:
                fail("heading operators need an object operand")
            if ty(e.base) not in (_OBJ, _VEC):
                fail("heading operators need an object or position reference")
            return _SCALAR
        if isinstance(e, CanSee):
            if ty(e.viewer) != _OBJ:
                fail("`can see` needs an object viewer")
            if ty(e.target) not in (_OBJ, _VEC):
                fail("`can see` target must be an object or position")
            return _BOOL
        if isinstance(e, InRegion):
            if ty(e.x) not in (_OBJ, _VEC):
                fail("`in` needs a position or object on the left")
            if ty(e.region) != _REGION:
                fail("`in` needs a region on the right")
            return _BOOL
        if isinstance(e, OffsetBy):
            if ty(e.base) not in (_OBJ, _VEC):
                fail("offset base must be a position or object")
            want(e.delta, _VEC, "offset by")
            return _VEC
        if isinstance(e, OffsetAlongBy):
            if ty(e.base) not in (_OBJ, _VEC):
                fail("offset base must be a position or object")
            if ty(e.direction) not in (_SCALAR, _OBJ):
                fail("offset along needs a heading or object")
            want(e.delta, _VEC, "offset along by")
            return _VEC
        if isinstance(e, VisibleRegion):
            if ty(e.region) != _REGION:
                fail("visibility operator needs a region")
            if ty(e.viewer) not in (_OBJ, _VEC):
                fail("visibility viewer must be an object or position")
            return _REGION
        fail("unexpected expression node %r" % e)
        raise AssertionError

    def want(e: Expr, expected: str, op: str):
        got = ty(e)
        if got == expected:
            return
        if expected == _VEC and got == _OBJ:
            return     # objects coerce to their position
        fail("%s expects a %s operand, got %s" % (op, expected, got))

    def fail(msg: str):
        raise SemanticError(msg, 1, 1, filename)

    def check_bool(e: Expr, what: str):
        if ty(e) != _BOOL:
            fail("%s must be boolean" % what)

    def stmt(s: Stmt):
        if isinstance(s, DoStmt):
            if s.until is not None:
                check_bool(s.until, "until condition")
        elif isinstance(s, SeqStmt):
            for c in s.stmts:
                stmt(c)
        elif isinstance(s, TryStmt):
            stmt(s.body)
            check_bool(s.condition, "interrupt condition")
            stmt(s.handler)

    for b in ast.behaviors.values():
        stmt(b.body)
    for r in ast.requires:
        check_bool(r, "require expression")
    for o in ast.objects:
        for sp in o.specifiers:
            for slot, _ in _spec_slots(sp):
                if slot is not None:
                    ty(slot)
            if isinstance(sp, AtSpec):
                want(sp.pos, _VEC, "at")
            elif isinstance(sp, (InSpec, OnSpec)):
                if ty(sp.region) != _REGION:
                    fail("in/on expects a region")
            elif isinstance(sp, OffsetBySpec):
                want(sp.delta, _VEC, "offset by")
            elif isinstance(sp, (FacingSpec,)):
                want(sp.heading, _SCALAR, "facing")
            elif isinstance(sp, ApparentlyFacingSpec):
                want(sp.heading, _SCALAR, "apparently facing")
            elif isinstance(sp, (FacingTowardSpec, FacingAwaySpec)):
                pt = sp.point
                if ty(pt) not in (_VEC, _OBJ):
                    fail("facing toward/away needs a position")
            elif isinstance(sp, AheadOfSpec):
                if ty(sp.ref) != _OBJ:
                    fail("ahead of needs an object reference")
                if sp.amount is not None:
                    want(sp.amount, _SCALAR, "ahead of ... by")
            elif isinstance(sp, BehindSpec):
                if ty(sp.ref) != _OBJ:
                    fail("behind needs an object reference")
                want(sp.amount, _SCALAR, "behind ... by")
            elif isinstance(sp, BeyondSpec):
                if ty(sp.ref) not in (_OBJ, _VEC):
                    fail("beyond needs an object or position")
                want(sp.amount, _SCALAR, "beyond ... by")
                if sp.source is not None and ty(sp.source) not in (_OBJ, _VEC):
                    fail("beyond ... from needs an object or position")
            elif isinstance(sp, VisibleSpec):
                if sp.viewer is not None and ty(sp.viewer) != _OBJ:
                    fail("visible from needs an object viewer")
            elif isinstance(sp, FollowingSpec):
                if ty(sp.lane) != _REGION:
                    fail("following needs a lane region")
                want(sp.amount, _SCALAR, "following ... for")


# ---------------------------------------------------------------------------
# public entry points

def parse(source: str, filename: str | None = None,
          options: ParseOptions | None = None) -> ScenarioAST:
    """Parse scenario text into a checked AST.

    Raises ScenarioSyntaxError, UnsupportedFeatureError, or SemanticError
    with line/column information; never returns a partially built AST.
    """
    opts = options or ParseOptions()
    tokens = _tokenize(source, filename)
    return _Parser(tokens, filename, opts).parse_program()


def parse_file(path: str, options: ParseOptions | None = None) -> ScenarioAST:
    with open(path, "r", encoding="utf-8") as fh:
        return parse(fh.read(), filename=path, options=options)


# -- pretty printer

def _fmt_num(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


_PREC = {"or": 1, "and": 2, "not": 3, "cmp": 4, "add": 5, "mul": 6,
         "unary": 7, "post": 8, "atom": 9}


def _pp(e: Expr, parent: int = 0) -> str:
    def wrap(text: str, mine: int) -> str:
        return "(" + text + ")" if mine < parent else text

    if isinstance(e, Num):
        return _fmt_num(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, VecLit):
        return "(" + ", ".join(_pp(c) for c in e.items) + ")"
    if isinstance(e, NameRef):
        return e.name
    if isinstance(e, FieldRef):
        return "%s.%s" % (e.obj, e.fld)
    if isinstance(e, DistRef):
        return "%s(%s)" % (e.kind, ", ".join(_fmt_num(p) for p in e.params))
    if isinstance(e, Unary):
        if e.op == "-":
            return wrap("-" + _pp(e.x, _PREC["unary"]), _PREC["unary"])
        return wrap("not " + _pp(e.x, _PREC["not"]), _PREC["not"])
    if isinstance(e, Bin):
        if e.op in ("and", "or"):
            mine = _PREC[e.op]
            return wrap("%s %s %s" % (_pp(e.left, mine), e.op,
                                      _pp(e.right, mine + 1)), mine)
        if e.op in ("+", "-", "*", "/"):
            mine = _PREC["add"] if e.op in "+-" else _PREC["mul"]
            return wrap("%s %s %s" % (_pp(e.left, mine), e.op,
                                      _pp(e.right, mine + 1)), mine)
        mine = _PREC["cmp"]
        return wrap("%s %s %s" % (_pp(e.left, mine + 1), e.op,
                                  _pp(e.right, mine + 1)), mine)
    if isinstance(e, Deg):
        return wrap(_pp(e.x, _PREC["post"] + 1) + " deg", _PREC["post"])
    if isinstance(e, RelativeTo):
        return wrap("%s relative to %s" % (_pp(e.x, _PREC["post"]),
                                           _pp(e.base, _PREC["post"] + 1)),
                    _PREC["post"])
    if isinstance(e, DistanceTo):
        return "(distance from %s to %s)" % (_pp(e.source, _PREC["post"] + 1),
                                             _pp(e.target, _PREC["post"] + 1))
    if isinstance(e, AngleTo):
        return "(angle from %s to %s)" % (_pp(e.source, _PREC["post"] + 1),
                                          _pp(e.target, _PREC["post"] + 1))
    if isinstance(e, RelativeHeadingOf):
        return "(relative heading of %s from %s)" % (
            _pp(e.x, _PREC["post"] + 1), _pp(e.base, _PREC["post"] + 1))
    if isinstance(e, ApparentHeadingOf):
        return "(apparent heading of %s from %s)" % (
            _pp(e.x, _PREC["post"] + 1), _pp(e.base, _PREC["post"] + 1))
    if isinstance(e, CanSee):
        mine = _PREC["cmp"]
        return wrap("%s can see %s" % (_pp(e.viewer, mine + 1),
                                       _pp(e.target, mine + 1)), mine)
    if isinstance(e, InRegion):
        mine = _PREC["cmp"]
        return wrap("%s in %s" % (_pp(e.x, mine + 1),
                                  _pp(e.region, mine + 1)), mine)
    if isinstance(e, OffsetBy):
        return wrap("%s offset by %s" % (_pp(e.base, _PREC["post"]),
                                         _pp(e.delta, _PREC["post"] + 1)),
                    _PREC["post"])
    if isinstance(e, OffsetAlongBy):
        return wrap("%s offset along %s by %s" % (
            _pp(e.base, _PREC["post"]), _pp(e.direction, _PREC["post"] + 1),
            _pp(e.delta, _PREC["post"] + 1)), _PREC["post"])
    if isinstance(e, VisibleRegion):
        word = "not visible" if e.negated else "visible"
        if isinstance(e.viewer, NameRef) and e.viewer.name == "ego" \
                and e.viewer.kind in ("object", "unresolved"):
            return wrap("%s %s" % (word, _pp(e.region, _PREC["post"] + 1)),
                        _PREC["post"])
        return wrap("%s %s from %s" % (_pp(e.region, _PREC["post"]), word,
                                       _pp(e.viewer, _PREC["post"] + 1)),
                    _PREC["post"])
    raise ValueError("cannot print %r" % e)


def _pp_spec(sp: Specifier) -> str:
    if isinstance(sp, AtSpec):
        return "at %s" % _pp(sp.pos)
    if isinstance(sp, InSpec):
        return "in %s" % _pp(sp.region)
    if isinstance(sp, OnSpec):
        return "on %s" % _pp(sp.region)
    if isinstance(sp, OffsetBySpec):
        return "offset by %s" % _pp(sp.delta)
    if isinstance(sp, BeyondSpec):
        text = "beyond %s by %s" % (_pp(sp.ref), _pp(sp.amount))
        if sp.source is not None:
            text += " from %s" % _pp(sp.source)
        return text
    if isinstance(sp, VisibleSpec):
        return "visible" if sp.viewer is None else "visible from %s" % _pp(sp.viewer)
    if isinstance(sp, AheadOfSpec):
        text = "ahead of %s" % _pp(sp.ref)
        if sp.amount is not None:
            text += " by %s" % _pp(sp.amount)
        return text
    if isinstance(sp, BehindSpec):
        return "behind %s by %s" % (_pp(sp.ref), _pp(sp.amount))
    if isinstance(sp, FollowingSpec):
        text = "following %s" % _pp(sp.lane)
        if sp.source is not None:
            text += " from %s" % _pp(sp.source)
        return text + " for %s" % _pp(sp.amount)
    if isinstance(sp, FacingSpec):
        return "facing %s" % _pp(sp.heading)
    if isinstance(sp, FacingTowardSpec):
        return "facing toward %s" % _pp(sp.point)
    if isinstance(sp, FacingAwaySpec):
        return "facing away from %s" % _pp(sp.point)
    if isinstance(sp, ApparentlyFacingSpec):
        text = "apparently facing %s" % _pp(sp.heading)
        if sp.viewer is not None:
            text += " from %s" % _pp(sp.viewer)
        return text
    if isinstance(sp, WithAttr):
        return "with %s %s" % (sp.name, _pp(sp.value))
    raise ValueError("cannot print specifier %r" % sp)


def _pp_stmt(s: Stmt, indent: int, out: list[str]):
    pad = "    " * indent
    if isinstance(s, DoStmt):
        if s.until is None:
            out.append("%sdo %s" % (pad, s.behavior))
        else:
            out.append("%sdo %s until %s" % (pad, s.behavior, _pp(s.until)))
    elif isinstance(s, SeqStmt):
        for c in s.stmts:
            _pp_stmt(c, indent, out)
    elif isinstance(s, TryStmt):
        out.append("%stry:" % pad)
        _pp_stmt(s.body, indent + 1, out)
        out.append("%sinterrupt when %s:" % (pad, _pp(s.condition)))
        _pp_stmt(s.handler, indent + 1, out)
    else:
        raise ValueError("cannot print statement %r" % s)


def pretty(ast: ScenarioAST) -> str:
    """Render an AST back to canonical scenario text."""
    out: list[str] = []
    for b in ast.behaviors.values():
        out.append("behavior %s():" % b.name)
        _pp_stmt(b.body, 1, out)
        out.append("")
    for o in ast.objects:
        parts = ["new %s" % o.class_name]
        bits = [_pp_spec(sp) for sp in o.specifiers]
        if o.behavior:
            bits.append("with behavior %s" % o.behavior)
        decl = parts[0] + (" " + ", ".join(bits) if bits else "")
        out.append("%s = %s" % (o.name, decl))
    for r in ast.requires:
        out.append("require %s" % _pp(r))
    return "\n".join(out) + "\n"


# -- fragment checking

_EXPR_NODES = (Num, BoolLit, VecLit, NameRef, FieldRef, DistRef, Unary, Bin,
               Deg, RelativeTo, DistanceTo, AngleTo, RelativeHeadingOf,
               ApparentHeadingOf, CanSee, InRegion, OffsetBy, OffsetAlongBy,
               VisibleRegion)
_STMT_NODES = (DoStmt, SeqStmt, TryStmt)
_SPEC_NODES = (AtSpec, InSpec, OnSpec, OffsetBySpec, BeyondSpec, VisibleSpec,
               AheadOfSpec, BehindSpec, FollowingSpec, FacingSpec,
               FacingTowardSpec, FacingAwaySpec, ApparentlyFacingSpec,
               WithAttr)
_BIN_OPS = frozenset({"and", "or", "+", "-", "*", "/",
                      "<", "<=", ">", ">=", "==", "!="})


def fragment_check(ast: ScenarioAST,
                   options: ParseOptions | None = None) -> list[str]:
    """List every way the AST leaves the supported fragment.

    Parser output always yields an empty list; the walk exists so that
    programmatically built ASTs get the same vetting.
    """
    opts = options or ParseOptions()
    problems: list[str] = []

    def expr(e, where: str):
        if not isinstance(e, _EXPR_NODES):
            problems.append("%s: unsupported expression node %s" %
                            (where, type(e).__name__))
            return
        if isinstance(e, Bin) and e.op not in _BIN_OPS:
            problems.append("%s: unsupported operator %r" % (where, e.op))
        if isinstance(e, Unary) and e.op not in ("-", "not"):
            problems.append("%s: unsupported unary operator %r" % (where, e.op))
        if isinstance(e, DistRef) and e.kind not in DIST_KINDS:
            problems.append("%s: unsupported distribution %r" % (where, e.kind))
        for child in _expr_children(e):
            expr(child, where)

    def stmt(s, where: str):
        if not isinstance(s, _STMT_NODES):
            problems.append("%s: unsupported statement node %s" %
                            (where, type(s).__name__))
            return
        if isinstance(s, DoStmt):
            if s.behavior not in ast.behaviors \
                    and s.behavior not in opts.primitives \
                    and s.behavior not in ast.primitive_behaviors:
                problems.append("%s: undefined behavior %r" % (where, s.behavior))
            if s.until is not None:
                expr(s.until, where)
        elif isinstance(s, SeqStmt):
            for c in s.stmts:
                stmt(c, where)
        elif isinstance(s, TryStmt):
            stmt(s.body, where)
            expr(s.condition, where)
            stmt(s.handler, where)

    names = set()
    for o in ast.objects:
        if o.name in names:
            problems.append("object %r declared twice" % o.name)
        names.add(o.name)
        where = "object %r" % o.name
        for sp in o.specifiers:
            if not isinstance(sp, _SPEC_NODES):
                problems.append("%s: unsupported specifier node %s" %
                                (where, type(sp).__name__))
                continue
            for slot, _ in _spec_slots(sp):
                if slot is not None:
                    expr(slot, where)
        if o.behavior and o.behavior not in ast.behaviors \
                and o.behavior not in opts.primitives \
                and o.behavior not in ast.primitive_behaviors:
            problems.append("%s: undefined behavior %r" % (where, o.behavior))
    for b in ast.behaviors.values():
        stmt(b.body, "behavior %r" % b.name)
    for i, r in enumerate(ast.requires):
        expr(r, "require #%d" % (i + 1))
    return problems


def _expr_children(e: Expr) -> list[Expr]:
    if isinstance(e, VecLit):
        return list(e.items)
    if isinstance(e, Unary):
        return [e.x]
    if isinstance(e, Bin):
        return [e.left, e.right]
    if isinstance(e, Deg):
        return [e.x]
    if isinstance(e, RelativeTo):
        return [e.x, e.base]
    if isinstance(e, (DistanceTo, AngleTo)):
        return [e.target, e.source]
    if isinstance(e, (RelativeHeadingOf, ApparentHeadingOf)):
        return [e.x, e.base]
    if isinstance(e, CanSee):
        return [e.viewer, e.target]
    if isinstance(e, InRegion):
        return [e.x, e.region]
    if isinstance(e, OffsetBy):
        return [e.base, e.delta]
    if isinstance(e, OffsetAlongBy):
        return [e.base, e.direction, e.delta]
    if isinstance(e, VisibleRegion):
        return [e.region, e.viewer]
    return []
