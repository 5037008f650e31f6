"""Lexer and recursive-descent parser for PADL source text.

The accepted notation follows the textual layout of architectural
types: an ARCHI_TYPE header, an ARCHI_BEHAVIOR section made of
ARCHI_ELEM_TYPE blocks (BEHAVIOR equations plus INPUT_INTERACTIONS /
OUTPUT_INTERACTIONS with SYNC/SSYNC/ASYNC, UNI/AND/OR and DEP
qualifiers), an ARCHI_TOPOLOGY section (instances, architectural
interactions, attachments), and a closing END.

Keywords are case-sensitive.  Guards use a small expression language:
boolean and integer literals, parameters, ``x.success`` references,
comparisons, + and -, and the boolean connectives.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import model as m
from .diagnostics import Diagnostic, Loc, PadlError, Severity

_SECTION_KEYWORDS = {
    "ARCHI_TYPE",
    "ARCHI_BEHAVIOR",
    "ARCHI_ELEM_TYPE",
    "BEHAVIOR",
    "INPUT_INTERACTIONS",
    "OUTPUT_INTERACTIONS",
    "ARCHI_TOPOLOGY",
    "ARCHI_ELEM_INSTANCES",
    "ARCHI_INTERACTIONS",
    "ARCHI_ATTACHMENTS",
    "END",
}

_KEYWORDS = _SECTION_KEYWORDS | {
    "FROM",
    "TO",
    "SYNC",
    "SSYNC",
    "ASYNC",
    "UNI",
    "AND",
    "OR",
    "DEP",
    "choice",
    "cond",
    "stop",
    "void",
    "true",
    "false",
    "boolean",
    "int",
    "not",
    "and",
    "or",
}

_PUNCT = (
    "->",
    ":=",
    "..",
    "/=",
    "<=",
    ">=",
    "(",
    ")",
    "{",
    "}",
    ";",
    ",",
    ".",
    ":",
    "=",
    "<",
    ">",
    "+",
    "-",
)


@dataclass(frozen=True)
class Token:
    kind: str  # keyword text, punctuation text, "IDENT", "INT", "EOF"
    text: str
    loc: Loc


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        loc = Loc(line, col)
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            kind = word if word in _KEYWORDS else "IDENT"
            tokens.append(Token(kind, word, loc))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            tokens.append(Token("INT", source[i:j], loc))
            col += j - i
            i = j
            continue
        for punct in _PUNCT:
            if source.startswith(punct, i):
                tokens.append(Token(punct, punct, loc))
                i += len(punct)
                col += len(punct)
                break
        else:
            raise PadlError(
                [Diagnostic(Severity.ERROR, "E_LEX", f"unexpected character {ch!r}", loc)]
            )
    tokens.append(Token("EOF", "", Loc(line, col)))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token helpers ------------------------------------------------------

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, ahead: int = 1) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.cur
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def at(self, kind: str) -> bool:
        return self.cur.kind == kind

    def accept(self, kind: str) -> Token | None:
        if self.at(kind):
            return self.advance()
        return None

    def expect(self, kind: str, what: str | None = None) -> Token:
        if self.at(kind):
            return self.advance()
        want = what or f"'{kind}'"
        found = self.cur.text or "end of file"
        self.fail(f"expected {want}, found {found!r}", self.cur.loc)

    def fail(self, message: str, loc: Loc) -> None:
        raise PadlError([Diagnostic(Severity.ERROR, "E_SYNTAX", message, loc)])

    # -- grammar ------------------------------------------------------------

    def parse_description(self) -> m.ArchiDescription:
        head = self.expect("ARCHI_TYPE")
        name = self.expect("IDENT", "architectural type name").text
        params = self.parse_param_list(defaults_required=True)
        self.expect("ARCHI_BEHAVIOR")
        aets = []
        while self.at("ARCHI_ELEM_TYPE"):
            aets.append(self.parse_aet())
        self.expect("ARCHI_TOPOLOGY")
        self.expect("ARCHI_ELEM_INSTANCES")
        instances = self.parse_instances()
        self.expect("ARCHI_INTERACTIONS")
        archi = self.parse_archi_interactions()
        self.expect("ARCHI_ATTACHMENTS")
        attachments = self.parse_attachments()
        self.expect("END")
        self.expect("EOF", "end of file after END")
        return m.ArchiDescription(
            name=name,
            params=tuple(params),
            aets=tuple(aets),
            instances=tuple(instances),
            archi_interactions=tuple(archi),
            attachments=tuple(attachments),
            loc=head.loc,
        )

    def parse_param_list(self, defaults_required: bool) -> list[m.Param]:
        self.expect("(")
        params: list[m.Param] = []
        if self.accept("void"):
            self.expect(")")
            return params
        while True:
            params.append(self.parse_param(defaults_required))
            if not self.accept(","):
                break
        self.expect(")")
        return params

    def parse_param(self, default_required: bool) -> m.Param:
        loc = self.cur.loc
        ptype = self.parse_type()
        name = self.expect("IDENT", "parameter name").text
        default = None
        if self.accept(":="):
            default = self.parse_expr()
        if default_required and default is None:
            self.fail(f"parameter '{name}' needs a ':=' default value", loc)
        return m.Param(name=name, type=ptype, default=default, loc=loc)

    def parse_type(self) -> m.DataType:
        if self.accept("boolean"):
            return m.BoolType()
        tok = self.expect("int", "a type (boolean or int(lo..hi))")
        self.expect("(", "'(' with a declared range after 'int'")
        lo = self.parse_signed_int()
        self.expect("..")
        hi = self.parse_signed_int()
        self.expect(")")
        if lo > hi:
            self.fail(f"empty integer range {lo}..{hi}", tok.loc)
        return m.IntType(lo, hi)

    def parse_signed_int(self) -> int:
        sign = -1 if self.accept("-") else 1
        return sign * int(self.expect("INT").text)

    # -- AET ---------------------------------------------------------------

    def parse_aet(self) -> m.AetDef:
        head = self.expect("ARCHI_ELEM_TYPE")
        name = self.expect("IDENT", "AET name").text
        params = self.parse_param_list(defaults_required=False)
        self.expect("BEHAVIOR")
        equations = [self.parse_equation()]
        while self.accept(";"):
            equations.append(self.parse_equation())
        interactions: list[m.InteractionDecl] = []
        self.expect("INPUT_INTERACTIONS")
        interactions += self.parse_interaction_decls(m.Direction.INPUT)
        self.expect("OUTPUT_INTERACTIONS")
        interactions += self.parse_interaction_decls(m.Direction.OUTPUT)
        return m.AetDef(
            name=name,
            params=tuple(params),
            equations=tuple(equations),
            interactions=tuple(interactions),
            loc=head.loc,
        )

    def parse_equation(self) -> m.BehaviorEquation:
        name_tok = self.expect("IDENT", "equation name")
        self.expect("(")
        params: list[m.Param] = []
        if not self.accept("void"):
            while True:
                params.append(self.parse_param(default_required=False))
                if not self.accept(","):
                    break
        self.expect(";", "';' separating parameters from the (void) local part")
        self.expect("void", "'void' (local variables are not supported)")
        self.expect(")")
        self.expect("=")
        body = self.parse_body()
        return m.BehaviorEquation(
            name=name_tok.text, params=tuple(params), body=body, loc=name_tok.loc
        )

    def parse_body(self) -> m.ProcessBody:
        loc = self.cur.loc
        if self.accept("stop"):
            return m.Stop(loc=loc)
        if self.accept("choice"):
            return self.parse_choice(loc)
        name = self.expect("IDENT", "an action, invocation, 'stop', or 'choice'").text
        if self.at("("):
            return self.parse_invoke(name, loc)
        self.expect(".", "'.' after action prefix")
        return m.Prefix(action=name, cont=self.parse_body(), loc=loc)

    def parse_invoke(self, name: str, loc: Loc) -> m.Invoke:
        self.expect("(")
        args: list[m.Expr] = []
        if not self.at(")"):
            while True:
                args.append(self.parse_expr())
                if not self.accept(","):
                    break
        self.expect(")")
        return m.Invoke(equation=name, args=tuple(args), loc=loc)

    def parse_choice(self, loc: Loc) -> m.Choice:
        self.expect("{")
        branches = [self.parse_branch()]
        while self.accept(","):
            if self.at("}"):  # tolerate a trailing comma
                break
            branches.append(self.parse_branch())
        self.expect("}")
        return m.Choice(branches=tuple(branches), loc=loc)

    def parse_branch(self) -> m.Branch:
        loc = self.cur.loc
        guard = None
        if self.accept("cond"):
            self.expect("(")
            guard = self.parse_expr()
            self.expect(")")
            self.expect("->")
        body = self.parse_body()
        if isinstance(body, m.Invoke):
            self.fail("a choice branch must start with an action prefix, 'stop', or a nested choice", loc)
        return m.Branch(guard=guard, body=body, loc=loc)

    def parse_interaction_decls(self, direction: m.Direction) -> list[m.InteractionDecl]:
        decls: list[m.InteractionDecl] = []
        if self.accept("void"):
            return decls
        sync = m.Synchronicity.SYNC
        mult: m.Multiplicity | None = None
        while True:
            if self.cur.kind in ("SYNC", "SSYNC", "ASYNC"):
                sync = m.Synchronicity[self.advance().kind]
            if self.cur.kind in ("UNI", "AND", "OR"):
                mult = m.Multiplicity[self.advance().kind]
            if mult is None:
                self.fail("interaction declarations need a UNI/AND/OR qualifier", self.cur.loc)
            name_tok = self.expect("IDENT", "interaction name")
            dep_on = None
            if self.accept("DEP"):
                dep_on = self.expect("IDENT", "DEP target interaction").text
            decls.append(
                m.InteractionDecl(
                    name=name_tok.text,
                    direction=direction,
                    multiplicity=mult,
                    synchronicity=sync,
                    dep_on=dep_on,
                    loc=name_tok.loc,
                )
            )
            if self.accept(";"):
                if self.cur.kind in _SECTION_KEYWORDS:  # tolerate a trailing semicolon
                    break
                continue
            # A new qualifier group may start without a separator.
            if self.cur.kind in ("SYNC", "SSYNC", "ASYNC", "UNI", "AND", "OR"):
                continue
            break
        return decls

    # -- topology ------------------------------------------------------------

    def parse_instances(self) -> list[m.Instance]:
        instances: list[m.Instance] = []
        while True:
            name_tok = self.expect("IDENT", "instance name")
            self.expect(":")
            aet = self.expect("IDENT", "AET name").text
            self.expect("(")
            args: list[m.Expr] = []
            if not self.at(")") and not self.accept("void"):
                while True:
                    args.append(self.parse_expr())
                    if not self.accept(","):
                        break
            self.expect(")")
            instances.append(
                m.Instance(name=name_tok.text, aet=aet, args=tuple(args), loc=name_tok.loc)
            )
            if not self.accept(";"):
                break
            if self.cur.kind in _SECTION_KEYWORDS:
                break
        return instances

    def parse_archi_interactions(self) -> list[tuple[str, str]]:
        if self.accept("void"):
            return []
        result = []
        while True:
            aei = self.expect("IDENT", "AEI name").text
            self.expect(".")
            inter = self.expect("IDENT", "interaction name").text
            result.append((aei, inter))
            if not self.accept(";"):
                break
            if self.cur.kind in _SECTION_KEYWORDS:
                break
        return result

    def parse_attachments(self) -> list[m.Attachment]:
        if self.accept("void"):
            return []
        attachments: list[m.Attachment] = []
        while self.at("FROM"):
            loc = self.advance().loc
            from_aei = self.expect("IDENT", "AEI name").text
            self.expect(".")
            from_inter = self.expect("IDENT", "interaction name").text
            self.expect("TO")
            to_aei = self.expect("IDENT", "AEI name").text
            self.expect(".")
            to_inter = self.expect("IDENT", "interaction name").text
            attachments.append(
                m.Attachment(from_aei, from_inter, to_aei, to_inter, loc=loc)
            )
            if not self.accept(";"):
                break
        return attachments

    # -- expressions ---------------------------------------------------------

    def parse_expr(self) -> m.Expr:
        return self.parse_or()

    def parse_or(self) -> m.Expr:
        left = self.parse_and()
        while self.at("or"):
            loc = self.advance().loc
            left = m.Binary("or", left, self.parse_and(), loc=loc)
        return left

    def parse_and(self) -> m.Expr:
        left = self.parse_not()
        while self.at("and"):
            loc = self.advance().loc
            left = m.Binary("and", left, self.parse_not(), loc=loc)
        return left

    def parse_not(self) -> m.Expr:
        if self.at("not"):
            loc = self.advance().loc
            return m.Unary("not", self.parse_not(), loc=loc)
        return self.parse_comparison()

    def parse_comparison(self) -> m.Expr:
        left = self.parse_additive()
        if self.cur.kind in ("=", "/=", "<", "<=", ">", ">="):
            op = self.advance()
            return m.Binary(op.kind, left, self.parse_additive(), loc=op.loc)
        return left

    def parse_additive(self) -> m.Expr:
        left = self.parse_atom()
        while self.cur.kind in ("+", "-"):
            op = self.advance()
            left = m.Binary(op.kind, left, self.parse_atom(), loc=op.loc)
        return left

    def parse_atom(self) -> m.Expr:
        tok = self.cur
        if self.accept("true"):
            return m.BoolLit(True, loc=tok.loc)
        if self.accept("false"):
            return m.BoolLit(False, loc=tok.loc)
        if self.at("INT"):
            self.advance()
            return m.IntLit(int(tok.text), loc=tok.loc)
        if self.accept("-"):
            return m.Unary("-", self.parse_atom(), loc=tok.loc)
        if self.accept("("):
            inner = self.parse_expr()
            self.expect(")")
            return inner
        if self.at("IDENT"):
            self.advance()
            if self.at(".") and self.peek().text == "success":
                self.advance()
                self.advance()
                return m.SuccessVar(tok.text, loc=tok.loc)
            return m.Var(tok.text, loc=tok.loc)
        self.fail(f"expected an expression, found {tok.text!r}", tok.loc)


def parse(source: str, filename: str = "<input>") -> m.ArchiDescription:
    """Parse PADL source into an ArchiDescription.

    Raises PadlError with positioned diagnostics on lexical or
    syntactic problems; never raises anything else on malformed input.
    """
    try:
        tokens = tokenize(source)
        return _Parser(tokens).parse_description()
    except PadlError as err:
        err.filename = filename
        raise
