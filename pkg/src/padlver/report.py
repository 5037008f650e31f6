"""Check reports: one data structure, two renderings (JSON and text).

The JSON document is versioned and deterministic: fields are sorted,
and timings can be dropped so identical runs produce identical bytes.
The text report is derived from the same data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

from .topology import ConditionRecord, DirectResult, ReductionResult

SCHEMA_VERSION = 1


@dataclass
class VerificationReport:
    architecture: str
    mode: str  # "reduce" | "direct" | "both"
    notion: str
    queue_capacity: int
    state_limit: int
    reduction: ReductionResult | None = None
    direct: DirectResult | None = None
    with_timings: bool = True

    @property
    def conclusion(self) -> str:
        """The overall verdict with the direct check, when it ran,
        taking precedence over an inconclusive or failed reduction."""
        statuses = []
        if self.reduction is not None:
            statuses.append(self.reduction.status)
        if self.direct is not None:
            statuses.append(self.direct.status)
        if not statuses:
            return "inconclusive"
        for definite in ("deadlock", "deadlock_free"):
            if definite in statuses:
                if "deadlock" in statuses and "deadlock_free" in statuses:
                    return "disagreement"
                return definite
        if "conditions_failed" in statuses:
            return "conditions_failed"
        return "inconclusive"

    @property
    def agreement(self) -> bool | None:
        if self.reduction is None or self.direct is None:
            return None
        if self.reduction.status not in ("deadlock_free", "deadlock"):
            return None
        if self.direct.status not in ("deadlock_free", "deadlock"):
            return None
        return self.reduction.status == self.direct.status

    def exit_code(self) -> int:
        conclusion = self.conclusion
        if conclusion == "deadlock_free":
            return 0
        if conclusion in ("deadlock", "conditions_failed", "disagreement"):
            return 1
        return 3

    # -- JSON ----------------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "schema_version": SCHEMA_VERSION,
            "architecture": self.architecture,
            "mode": self.mode,
            "deadlock_notion": self.notion,
            "queue_capacity": self.queue_capacity,
            "state_limit": self.state_limit,
            "conclusion": self.conclusion,
        }
        if self.agreement is not None:
            doc["agreement"] = self.agreement
        if self.reduction is not None:
            doc["reduction"] = self._reduction_dict(self.reduction)
        if self.direct is not None:
            doc["direct"] = self._direct_dict(self.direct)
        return doc

    def _maybe_time(self, doc: dict[str, Any], ms: float) -> None:
        if self.with_timings:
            doc["time_ms"] = round(ms, 3)

    def _reduction_dict(self, r: ReductionResult) -> dict[str, Any]:
        deco = r.decomposition
        doc: dict[str, Any] = {
            "status": r.status,
            "witness": r.witness,
            "aei_deadlock_free": dict(sorted(r.aei_deadlock_free.items())),
            "decomposition": {
                "cyclic_unions": [list(u) for u in deco.cyclic_unions],
                "frontiers": [list(f) for f in deco.frontiers],
                "stars": [
                    {"center": s.center, "border": list(s.border)} for s in deco.stars
                ],
                "acyclic_aeis": list(deco.acyclic_aeis),
            },
            "conditions": [self._condition_dict(c) for c in r.conditions],
        }
        self._maybe_time(doc, r.time_ms)
        return doc

    def _condition_dict(self, c: ConditionRecord) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "condition": c.condition,
            "subject": list(c.subject),
            "holds": c.holds,
            "checks": [],
        }
        if c.detail:
            doc["detail"] = c.detail
        for o in c.outcomes:
            entry: dict[str, Any] = {
                "kind": o.kind,
                "subject": list(o.subject),
                "partner": o.partner,
                "equivalent": o.equivalent,
                "lhs_states": o.lhs_states,
                "rhs_states": o.rhs_states,
            }
            if o.formula_text is not None:
                entry["distinguishing_formula"] = o.formula_text
            if o.saturated:
                entry["queue_capacity_saturated"] = True
            self._maybe_time(entry, o.time_ms)
            doc["checks"].append(entry)
        return doc

    def _direct_dict(self, d: DirectResult) -> dict[str, Any]:
        doc: dict[str, Any] = {"status": d.status, "states": d.states}
        if d.trace is not None:
            doc["trace"] = d.trace
        if d.saturated:
            doc["queue_capacity_saturated"] = True
        if d.detail:
            doc["detail"] = d.detail
        self._maybe_time(doc, d.time_ms)
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    # -- text ----------------------------------------------------------------

    def to_text(self) -> str:
        doc = self.to_dict()
        lines = [
            f"architecture: {doc['architecture']}",
            f"mode: {doc['mode']}   deadlock notion: {doc['deadlock_notion']}   "
            f"queue capacity: {doc['queue_capacity']}",
        ]
        red = doc.get("reduction")
        if red is not None:
            deco = red["decomposition"]
            lines.append("topological reduction:")
            for u, f in zip(deco["cyclic_unions"], deco["frontiers"]):
                lines.append(
                    f"  cyclic union {{{', '.join(u)}}} with frontier {{{', '.join(f)}}}"
                )
            for s in deco["stars"]:
                lines.append(
                    f"  star centered on {s['center']} with border "
                    f"{{{', '.join(s['border'])}}}"
                )
            for c in red["conditions"]:
                holds = {True: "holds", False: "FAILS", None: "not evaluated"}[c["holds"]]
                lines.append(
                    f"  condition {c['condition']} on ({', '.join(c['subject'])}): {holds}"
                )
                for chk in c["checks"]:
                    verdict = "passes" if chk["equivalent"] else "fails"
                    lines.append(
                        f"    {chk['kind']} of {chk['partner']} "
                        f"[{chk['lhs_states']} vs {chk['rhs_states']} states]: {verdict}"
                    )
                    if chk.get("distinguishing_formula"):
                        lines.append(
                            f"      distinguishing formula: {chk['distinguishing_formula']}"
                        )
                    if chk.get("queue_capacity_saturated"):
                        lines.append(
                            "      note: a bounded queue reached capacity; consider "
                            "re-running with a larger --queue-capacity"
                        )
                if c.get("detail"):
                    lines.append(f"    limit: {c['detail']}")
            free = ", ".join(
                name for name, ok in red["aei_deadlock_free"].items() if ok
            )
            lines.append(f"  deadlock-free AEIs in isolation: {free or 'none'}")
            lines.append(
                f"  reduction status: {red['status']}"
                + (f" (because so is {red['witness']} on its own)" if red.get("witness") else "")
            )
        direct = doc.get("direct")
        if direct is not None:
            lines.append(
                f"direct model check: {direct['status']} "
                f"({direct['states']} states)"
            )
            if direct.get("trace") is not None:
                shown = " . ".join(direct["trace"]) or "(initial state)"
                lines.append(f"  counterexample trace: {shown}")
            if direct.get("queue_capacity_saturated"):
                lines.append(
                    "  note: a bounded queue reached capacity; consider re-running "
                    "with a larger --queue-capacity"
                )
        if doc.get("agreement") is not None:
            lines.append(
                "reduction and direct check "
                + ("agree" if doc["agreement"] else "DISAGREE")
            )
        lines.append(f"conclusion: {doc['conclusion']}")
        return "\n".join(lines) + "\n"
