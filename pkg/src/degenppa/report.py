"""Uniform result record for every numerical check."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one sampled or enumerated verification.

    worst_margin is the smallest slack seen (negative means a violation);
    witnesses carry enough of the offending inputs to replay them.
    """

    check_name: str
    n_samples: int
    n_violations: int
    worst_margin: float
    seed: int | None = None
    witnesses: tuple = ()
    notes: str = ""

    @property
    def clean(self) -> bool:
        return self.n_violations == 0

    def to_text(self) -> str:
        lines = [
            f"check {self.check_name}: "
            f"{'PASS' if self.clean else 'FAIL'} "
            f"({self.n_violations} violations / {self.n_samples} samples, "
            f"worst margin {self.worst_margin:.6g}"
            + (f", seed {self.seed}" if self.seed is not None else "")
            + ")"
        ]
        if self.notes:
            lines.append(f"  {self.notes}")
        for w in self.witnesses[:10]:
            lines.append(f"  witness: {w}")
        if len(self.witnesses) > 10:
            lines.append(f"  ... {len(self.witnesses) - 10} more witnesses")
        return "\n".join(lines)
