"""Static validation of parsed architectural descriptions.

Checks admissibility of the topology (attachments go from a local
output interaction to a local input interaction of another AEI, a
uni-interaction is attached at most once, and-/or-interactions attach
only to uni-interactions), DEP well-formedness, type correctness of
guards and invocations, and scoping of ``x.success`` reads.

All violations are collected before reporting, so a single run surfaces
every problem.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import model as m
from .diagnostics import Diagnostic, Loc, PadlError, Severity

_RESERVED_INSTANCE = re.compile(r"^(IAQ|OAQ)_\d+$")
RESERVED_QUEUE_AET = "Async_Queue_Type"


@dataclass
class ValidatedArchitecture:
    """A parsed description together with the lookup tables that the
    elaboration pipeline needs.  Construction goes through validate()."""

    description: m.ArchiDescription
    warnings: list[Diagnostic] = field(default_factory=list)

    def __post_init__(self) -> None:
        d = self.description
        self.aets: dict[str, m.AetDef] = {a.name: a for a in d.aets}
        self.instances: dict[str, m.Instance] = {i.name: i for i in d.instances}
        self.archi_interactions: set[tuple[str, str]] = set(d.archi_interactions)
        self.attachments_of: dict[tuple[str, str], list[m.Attachment]] = {}
        for att in d.attachments:
            self.attachments_of.setdefault(att.source, []).append(att)
            self.attachments_of.setdefault(att.target, []).append(att)

    def aet_of(self, aei: str) -> m.AetDef:
        return self.aets[self.instances[aei].aet]

    def interaction(self, aei: str, name: str) -> m.InteractionDecl | None:
        return self.aet_of(aei).interaction(name)

    def endpoints(self) -> list[tuple[str, str]]:
        result = []
        for inst in self.description.instances:
            for decl in self.aets[inst.aet].interactions:
                result.append((inst.name, decl.name))
        return result

    def attach_no(self, endpoint: tuple[str, str]) -> int:
        """Number of attachments involving an (aei, interaction) endpoint."""
        aei, inter = endpoint
        if aei not in self.instances or self.interaction(aei, inter) is None:
            raise ValueError(f"unknown endpoint {aei}.{inter}")
        return len(self.attachments_of.get(endpoint, []))


def attach_no(arch: ValidatedArchitecture, endpoint: tuple[str, str]) -> int:
    return arch.attach_no(endpoint)


# ---------------------------------------------------------------------------
# Constant evaluation (defaults and instance arguments)
# ---------------------------------------------------------------------------


def eval_const(expr: m.Expr, env: dict[str, bool | int]) -> bool | int:
    """Evaluate a constant expression; raises ValueError on unbound names."""
    if isinstance(expr, m.BoolLit):
        return expr.value
    if isinstance(expr, m.IntLit):
        return expr.value
    if isinstance(expr, m.Var):
        if expr.name not in env:
            raise ValueError(f"unbound name '{expr.name}'")
        return env[expr.name]
    if isinstance(expr, m.SuccessVar):
        raise ValueError("success variables are not constants")
    if isinstance(expr, m.Unary):
        val = eval_const(expr.operand, env)
        return (not val) if expr.op == "not" else -val
    if isinstance(expr, m.Binary):
        left = eval_const(expr.left, env)
        right = eval_const(expr.right, env)
        return _apply_binary(expr.op, left, right)
    raise ValueError(f"unsupported expression {expr!r}")


def _apply_binary(op: str, left, right):
    if op == "and":
        return bool(left) and bool(right)
    if op == "or":
        return bool(left) or bool(right)
    if op == "=":
        return left == right
    if op == "/=":
        return left != right
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    if op == ">=":
        return left >= right
    if op == "+":
        return left + right
    if op == "-":
        return left - right
    raise ValueError(f"unknown operator {op}")


# ---------------------------------------------------------------------------
# Type checking
# ---------------------------------------------------------------------------

_BOOL_OPS = {"and", "or"}
_CMP_OPS = {"=", "/=", "<", "<=", ">", ">="}
_ARITH_OPS = {"+", "-"}


class _Checker:
    def __init__(self, description: m.ArchiDescription):
        self.d = description
        self.diags: list[Diagnostic] = []

    def error(self, code: str, message: str, loc: Loc) -> None:
        self.diags.append(Diagnostic(Severity.ERROR, code, message, loc))

    def warn(self, code: str, message: str, loc: Loc) -> None:
        self.diags.append(Diagnostic(Severity.WARNING, code, message, loc))

    def type_of(self, expr: m.Expr, env: dict[str, m.DataType], ssync: set[str]) -> str | None:
        """Returns 'bool', 'int', or None after reporting a diagnostic."""
        if isinstance(expr, m.BoolLit):
            return "bool"
        if isinstance(expr, m.IntLit):
            return "int"
        if isinstance(expr, m.Var):
            if expr.name not in env:
                self.error("E_SCOPE", f"name '{expr.name}' is not in scope", expr.loc)
                return None
            return "bool" if isinstance(env[expr.name], m.BoolType) else "int"
        if isinstance(expr, m.SuccessVar):
            if expr.action not in ssync:
                self.error(
                    "E_SUCCESS_NOT_SSYNC",
                    f"'{expr.action}.success' is only available for semi-synchronous interactions",
                    expr.loc,
                )
            return "bool"
        if isinstance(expr, m.Unary):
            inner = self.type_of(expr.operand, env, ssync)
            want = "bool" if expr.op == "not" else "int"
            if inner is not None and inner != want:
                self.error("E_TYPE", f"operator '{expr.op}' expects a {want} operand", expr.loc)
            return want
        if isinstance(expr, m.Binary):
            lt = self.type_of(expr.left, env, ssync)
            rt = self.type_of(expr.right, env, ssync)
            if expr.op in _BOOL_OPS:
                for t in (lt, rt):
                    if t is not None and t != "bool":
                        self.error("E_TYPE", f"operator '{expr.op}' expects boolean operands", expr.loc)
                return "bool"
            if expr.op in _CMP_OPS:
                if lt is not None and rt is not None and lt != rt:
                    self.error("E_TYPE", f"comparison '{expr.op}' mixes {lt} and {rt}", expr.loc)
                return "bool"
            if expr.op in _ARITH_OPS:
                for t in (lt, rt):
                    if t is not None and t != "int":
                        self.error("E_TYPE", f"operator '{expr.op}' expects integer operands", expr.loc)
                return "int"
        return None


def validate(description: m.ArchiDescription) -> ValidatedArchitecture:
    """Validate a parsed description.

    Returns a ValidatedArchitecture (possibly with warnings) or raises
    PadlError carrying every diagnostic found.
    """
    ck = _Checker(description)
    d = description

    # Architectural-type parameters form the constant environment.
    at_env: dict[str, bool | int] = {}
    at_types: dict[str, m.DataType] = {}
    for p in d.params:
        if p.name in at_types:
            ck.error("E_DUP_PARAM", f"duplicate architectural parameter '{p.name}'", p.loc)
        at_types[p.name] = p.type
        if p.default is not None:
            try:
                at_env[p.name] = eval_const(p.default, dict(at_env))
            except ValueError as exc:
                ck.error("E_CONST", f"cannot evaluate default of '{p.name}': {exc}", p.loc)

    aets: dict[str, m.AetDef] = {}
    for aet in d.aets:
        if aet.name in aets:
            ck.error("E_DUP_AET", f"duplicate AET '{aet.name}'", aet.loc)
        aets[aet.name] = aet
        if aet.name == RESERVED_QUEUE_AET:
            ck.error("E_RESERVED_NAME", f"AET name '{RESERVED_QUEUE_AET}' is reserved", aet.loc)
        _validate_aet(ck, aet, at_types)

    instances: dict[str, m.Instance] = {}
    for inst in d.instances:
        if inst.name in instances:
            ck.error("E_DUP_INSTANCE", f"duplicate AEI '{inst.name}'", inst.loc)
        instances[inst.name] = inst
        if _RESERVED_INSTANCE.match(inst.name):
            ck.error("E_RESERVED_NAME", f"AEI name '{inst.name}' is reserved for implicit queues", inst.loc)
        aet = aets.get(inst.aet)
        if aet is None:
            ck.error("E_UNDEF_AET", f"AEI '{inst.name}' references unknown AET '{inst.aet}'", inst.loc)
            continue
        if len(inst.args) != len(aet.params):
            ck.error(
                "E_ARITY",
                f"AEI '{inst.name}' passes {len(inst.args)} parameters, "
                f"AET '{aet.name}' declares {len(aet.params)}",
                inst.loc,
            )
            continue
        for arg, formal in zip(inst.args, aet.params):
            try:
                value = eval_const(arg, at_env)
            except ValueError as exc:
                ck.error("E_CONST", f"parameter of '{inst.name}': {exc}", inst.loc)
                continue
            if isinstance(formal.type, m.BoolType) != isinstance(value, bool):
                ck.error("E_TYPE", f"parameter '{formal.name}' of '{inst.name}' has the wrong type", inst.loc)
            elif isinstance(formal.type, m.IntType) and not formal.type.lo <= value <= formal.type.hi:
                ck.error(
                    "E_RANGE",
                    f"parameter '{formal.name}' of '{inst.name}' is outside {formal.type.render()}",
                    inst.loc,
                )

    def interaction_of(aei: str, name: str) -> m.InteractionDecl | None:
        inst = instances.get(aei)
        if inst is None:
            return None
        aet = aets.get(inst.aet)
        return aet.interaction(name) if aet else None

    # Attachments: direction, distinct endpoints, multiplicity discipline.
    attached: set[tuple[str, str]] = set()
    seen_pairs: set[tuple[tuple[str, str], tuple[str, str]]] = set()
    counts: dict[tuple[str, str], list[m.Attachment]] = {}
    for att in d.attachments:
        ok = True
        for aei, inter in (att.source, att.target):
            if aei not in instances:
                ck.error("E_ATTACH_UNDEF", f"attachment references unknown AEI '{aei}'", att.loc)
                ok = False
            elif interaction_of(aei, inter) is None:
                ck.error("E_ATTACH_UNDEF", f"'{aei}' has no interaction '{inter}'", att.loc)
                ok = False
        if not ok:
            continue
        src = interaction_of(*att.source)
        dst = interaction_of(*att.target)
        if src.direction is not m.Direction.OUTPUT or dst.direction is not m.Direction.INPUT:
            ck.error(
                "E_ATTACH_DIR",
                "an attachment is admissible only from a local output interaction "
                "to a local input interaction",
                att.loc,
            )
        if att.from_aei == att.to_aei:
            ck.error("E_ATTACH_SELF", "an attachment must connect two distinct AEIs", att.loc)
        if src.multiplicity is not m.Multiplicity.UNI and dst.multiplicity is not m.Multiplicity.UNI:
            ck.error(
                "E_MULTI_TO_MULTI",
                "an and-/or-interaction can be attached to uni-interactions only",
                att.loc,
            )
        key = (att.source, att.target)
        if key in seen_pairs:
            ck.error("E_DUP_ATTACH", f"duplicate attachment {att.from_aei}.{att.from_interaction} "
                     f"-> {att.to_aei}.{att.to_interaction}", att.loc)
        seen_pairs.add(key)
        attached.add(att.source)
        attached.add(att.target)
        counts.setdefault(att.source, []).append(att)
        counts.setdefault(att.target, []).append(att)

    for endpoint, atts in counts.items():
        decl = interaction_of(*endpoint)
        if decl is None:
            continue
        if decl.multiplicity is m.Multiplicity.UNI and len(atts) > 1:
            ck.error(
                "E_UNI_FANOUT",
                f"uni-interaction {endpoint[0]}.{endpoint[1]} appears in {len(atts)} attachments",
                atts[1].loc,
            )
        if decl.multiplicity is m.Multiplicity.AND:
            partners = [a.to_aei if a.source == endpoint else a.from_aei for a in atts]
            if len(partners) != len(set(partners)):
                ck.error(
                    "E_AND_SAME_AEI",
                    f"and-interaction {endpoint[0]}.{endpoint[1]} is attached to the same AEI "
                    "more than once, which has no joint-synchronization reading",
                    atts[0].loc,
                )

    # DEP pairs need equal attachment counts and unambiguous partner pairing.
    for inst in d.instances:
        aet = aets.get(inst.aet)
        if aet is None:
            continue
        for decl in aet.interactions:
            if decl.dep_on is None:
                continue
            i_ep = (inst.name, decl.dep_on)
            o_ep = (inst.name, decl.name)
            i_atts = counts.get(i_ep, [])
            o_atts = counts.get(o_ep, [])
            if len(i_atts) != len(o_atts):
                ck.error(
                    "E_DEP_COUNT",
                    f"DEP pair {inst.name}.{decl.name}/{decl.dep_on} has "
                    f"{len(o_atts)} vs {len(i_atts)} attachments",
                    decl.loc,
                )
                continue
            i_partners = [a.from_aei for a in i_atts]
            o_partners = [a.to_aei for a in o_atts]
            if sorted(i_partners) != sorted(o_partners) or len(set(i_partners)) != len(i_partners):
                ck.error(
                    "E_DEP_PARTNERS",
                    f"DEP pair {inst.name}.{decl.name}/{decl.dep_on} must be attached, "
                    "once each, to the same partner AEIs",
                    decl.loc,
                )

    # Architectural interactions: declared endpoints, disjoint from attached ones.
    for aei, inter in d.archi_interactions:
        if aei not in instances or interaction_of(aei, inter) is None:
            ck.error("E_ARCHI_UNDEF", f"architectural interaction {aei}.{inter} is not declared", d.loc)
        elif (aei, inter) in attached:
            ck.error(
                "E_ARCHI_ATTACHED",
                f"architectural interaction {aei}.{inter} also occurs in an attachment",
                d.loc,
            )

    archi = set(d.archi_interactions)
    for inst in d.instances:
        aet = aets.get(inst.aet)
        if aet is None:
            continue
        for decl in aet.interactions:
            ep = (inst.name, decl.name)
            if ep not in attached and ep not in archi:
                ck.warn(
                    "W_UNATTACHED",
                    f"local interaction {inst.name}.{decl.name} is neither attached "
                    "nor architectural; it will act as a free local action",
                    decl.loc,
                )

    errors = [x for x in ck.diags if x.severity is Severity.ERROR]
    if errors:
        raise PadlError(ck.diags)
    return ValidatedArchitecture(description=d, warnings=ck.diags)


def _validate_aet(ck: _Checker, aet: m.AetDef, at_types: dict[str, m.DataType]) -> None:
    inter_by_name: dict[str, m.InteractionDecl] = {}
    for decl in aet.interactions:
        if decl.name in inter_by_name:
            ck.error("E_DUP_INTERACTION", f"duplicate interaction '{decl.name}' in AET '{aet.name}'", decl.loc)
        inter_by_name[decl.name] = decl
        if decl.name.endswith("_exception"):
            ck.error(
                "E_RESERVED_NAME",
                f"interaction name '{decl.name}' uses the reserved '_exception' suffix",
                decl.loc,
            )

    for decl in aet.interactions:
        if decl.dep_on is None:
            continue
        if decl.direction is not m.Direction.OUTPUT or decl.multiplicity is not m.Multiplicity.OR:
            ck.error("E_DEP_KIND", f"DEP is only allowed on output or-interactions ('{decl.name}')", decl.loc)
            continue
        target = inter_by_name.get(decl.dep_on)
        if target is None or target.direction is not m.Direction.INPUT \
                or target.multiplicity is not m.Multiplicity.OR:
            ck.error(
                "E_DEP_KIND",
                f"'{decl.name}' must DEP-depend on an input or-interaction of the same AET",
                decl.loc,
            )

    equations: dict[str, m.BehaviorEquation] = {}
    for eq in aet.equations:
        if eq.name in equations:
            ck.error("E_DUP_EQUATION", f"duplicate equation '{eq.name}' in AET '{aet.name}'", eq.loc)
        equations[eq.name] = eq

    first = aet.equations[0]
    for p in first.params:
        if p.default is None:
            ck.error(
                "E_INIT_DEFAULT",
                f"parameter '{p.name}' of the initial equation '{first.name}' needs a default",
                p.loc,
            )

    ssync_names = {
        decl.name
        for decl in aet.interactions
        if decl.synchronicity is m.Synchronicity.SSYNC
    }

    used_actions: set[str] = set()
    for eq in aet.equations:
        env: dict[str, m.DataType] = dict(at_types)
        seen_params: set[str] = set()
        for p in eq.params:
            if p.name in seen_params:
                ck.error("E_DUP_PARAM", f"duplicate parameter '{p.name}' in '{eq.name}'", p.loc)
            seen_params.add(p.name)
            env[p.name] = p.type
            if p.default is not None:
                try:
                    value = eval_const(p.default, {})
                except ValueError as exc:
                    ck.error("E_CONST", f"default of '{p.name}': {exc}", p.loc)
                    continue
                if isinstance(p.type, m.IntType) and isinstance(value, int) \
                        and not isinstance(value, bool) \
                        and not p.type.lo <= value <= p.type.hi:
                    ck.error("E_RANGE", f"default of '{p.name}' is outside {p.type.render()}", p.loc)
        _validate_body(ck, aet, eq.body, env, ssync_names, frozenset(), equations, used_actions)

    for decl in aet.interactions:
        if decl.name not in used_actions:
            ck.error(
                "E_UNUSED_INTERACTION",
                f"interaction '{decl.name}' never occurs in the behavior of AET '{aet.name}'",
                decl.loc,
            )


def _validate_body(
    ck: _Checker,
    aet: m.AetDef,
    body: m.ProcessBody,
    env: dict[str, m.DataType],
    ssync_names: set[str],
    have_success: frozenset[str],
    equations: dict[str, m.BehaviorEquation],
    used_actions: set[str],
) -> None:
    if isinstance(body, m.Stop):
        return
    if isinstance(body, m.Invoke):
        target = equations.get(body.equation)
        if target is None:
            ck.error("E_UNDEF_EQUATION", f"invocation of unknown equation '{body.equation}'", body.loc)
            return
        if len(body.args) != len(target.params):
            ck.error(
                "E_ARITY",
                f"'{body.equation}' expects {len(target.params)} arguments, got {len(body.args)}",
                body.loc,
            )
        for arg, formal in zip(body.args, target.params):
            _check_success_reads(ck, arg, have_success)
            t = ck.type_of(arg, env, ssync_names)
            want = "bool" if isinstance(formal.type, m.BoolType) else "int"
            if t is not None and t != want:
                ck.error("E_TYPE", f"argument for '{formal.name}' of '{body.equation}' must be {want}", body.loc)
        return
    if isinstance(body, m.Prefix):
        used_actions.add(body.action)
        nxt = have_success | {body.action} if body.action in ssync_names else have_success
        _validate_body(ck, aet, body.cont, env, ssync_names, nxt, equations, used_actions)
        return
    if isinstance(body, m.Choice):
        for branch in body.branches:
            if branch.guard is not None:
                _check_success_reads(ck, branch.guard, have_success)
                t = ck.type_of(branch.guard, env, ssync_names)
                if t is not None and t != "bool":
                    ck.error("E_TYPE", "guards must be boolean", branch.loc)
            _validate_body(ck, aet, branch.body, env, ssync_names, have_success, equations, used_actions)
        return


def _check_success_reads(ck: _Checker, expr: m.Expr, have: frozenset[str]) -> None:
    if isinstance(expr, m.SuccessVar):
        if expr.action not in have:
            ck.error(
                "E_SUCCESS_UNSET",
                f"'{expr.action}.success' is read before '{expr.action}' is executed "
                "on this path",
                expr.loc,
            )
    elif isinstance(expr, m.Unary):
        _check_success_reads(ck, expr.operand, have)
    elif isinstance(expr, m.Binary):
        _check_success_reads(ck, expr.left, have)
        _check_success_reads(ck, expr.right, have)
