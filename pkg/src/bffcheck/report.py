"""The full check: well-formedness, simple types, tiers and size-change."""
from __future__ import annotations

from dataclasses import dataclass

from .parser import parse_program
from .sct import ScpVerdict, check_scps
from .syntax import check_well_formed, normalize
from .tiers import NOT_SAFE, SAFE0, ProcTyping, SafeReport, check_safe
from .words import DEFAULT_REGISTRY, OperatorRegistry

SAFE0_SCP = "SAFE₀∩SCP_S"
SAFE_SCP = "SAFE∩SCP_S"
SAFE_ONLY = "SAFE-only"
REJECTED = "rejected"
VERDICTS = (SAFE0_SCP, SAFE_SCP, SAFE_ONLY, REJECTED)


@dataclass
class CheckReport:
    file: str
    diagnostics: list
    safe: SafeReport | None = None
    scp: ScpVerdict | None = None
    verdict: str = REJECTED

    @property
    def well_formed(self) -> bool:
        return not self.diagnostics

    def to_json(self, annotate: bool = False) -> dict:
        out = {
            "file": self.file,
            "verdict": self.verdict,
            "simpleType": self.safe.simple_type if self.safe else None,
            "rank": self.safe.rank if self.safe else None,
            "procedures": [],
            "scp": [],
        }
        if self.diagnostics:
            out["diagnostics"] = list(self.diagnostics)
        if self.safe:
            for name, res in self.safe.procedures.items():
                if isinstance(res, ProcTyping):
                    entry = {"name": name, "gamma": dict(sorted(res.gamma.items())),
                             "triple": res.triple.as_list()}
                    if annotate:
                        entry["mode"] = res.mode
                        entry["loops"] = [{"loop": str(span), "rule": rule, "tier": k}
                                          for span, rule, k in res.loops]
                else:
                    entry = {"name": name, "unsat": True, "reason": res.reason}
                out["procedures"].append(entry)
            if self.safe.diagnostics:
                out["typeDiagnostics"] = list(self.safe.diagnostics)
        if self.scp:
            out["scp"] = [{"loop": lv.loop, "guardVar": lv.guard_var, "accepted": lv.accepted,
                           "reason": lv.reason} for lv in self.scp.loops]
        return out

    def to_text(self) -> str:
        lines = [f"{self.file}: {self.verdict}"]
        for d in self.diagnostics:
            lines.append(f"  error {d}")
        if self.safe:
            lines.append(f"  simple type: {self.safe.simple_type}")
            lines.append(f"  rank: {self.safe.rank}")
            for d in self.safe.diagnostics:
                lines.append(f"  type error: {d}")
            for name, res in self.safe.procedures.items():
                if isinstance(res, ProcTyping):
                    gamma = ", ".join(f"{x}:{k}" for x, k in sorted(res.gamma.items()))
                    t = res.triple
                    lines.append(f"  procedure {name}: ({t.k}, {t.kin}, {t.kout}) [{res.mode}] {{{gamma}}}")
                else:
                    lines.append(f"  procedure {name}: not tierable: {res.reason}")
        if self.scp:
            for lv in self.scp.loops:
                mark = "ok" if lv.accepted else "REJECTED"
                lines.append(f"  loop {lv.loop} on {lv.guard_var or '?'}: {mark} ({lv.reason})")
        return "\n".join(lines)


def final_verdict(safe: SafeReport, scp: ScpVerdict) -> str:
    if safe.verdict == NOT_SAFE:
        return REJECTED
    if not scp.accepted:
        return SAFE_ONLY
    return SAFE0_SCP if safe.verdict == SAFE0 else SAFE_SCP


def check_program(prg, file: str = "<input>", registry: OperatorRegistry = DEFAULT_REGISTRY,
                  kmax: int | None = None) -> CheckReport:
    diags = check_well_formed(prg, registry)
    if diags:
        return CheckReport(file, [str(d) for d in diags])
    prg = normalize(prg)
    safe = check_safe(prg, registry, kmax)
    scp = check_scps(prg, registry)
    return CheckReport(file, [], safe, scp, final_verdict(safe, scp))


def check_source(text: str, file: str = "<input>", registry: OperatorRegistry = DEFAULT_REGISTRY,
                 kmax: int | None = None) -> CheckReport:
    return check_program(parse_program(text), file, registry, kmax)


def meets_bar(verdict: str, require_rank0: bool = False) -> bool:
    return verdict == SAFE0_SCP or (verdict == SAFE_SCP and not require_rank0)
