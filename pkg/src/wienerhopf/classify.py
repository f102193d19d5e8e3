"""Four-case decision procedure and the resulting solvability report.

The report applies the Fredholm dimension formulas
``dim ker = max(delta - kappa, 0)`` and ``dim coker = max(kappa - delta, 0)``
on the ``L^p`` / ``C^0`` branch, where ``delta = 0`` and ``kappa`` is the
index of the regular factor ``C`` in ``a = rho_plus * C``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Optional

import numpy as np

from .errors import IndexMismatch, VanishingSymbol
from .kernel import ConditionId, ConditionVerdict, MomentSet

if TYPE_CHECKING:
    from .symbol import WindingResult

REPORT_SCHEMA_VERSION = 1
DELTA = 0


class CaseLabel(str, Enum):
    CASE_I = "CaseI"
    CASE_II = "CaseII"
    CASE_III = "CaseIII"
    ALPHA_BETA = "AlphaBeta"
    UNCLASSIFIED = "Unclassified"


def _holds(verdicts, condition: ConditionId) -> bool:
    return any(v.condition is condition and v.holds for v in verdicts)


def classify(k1_verdicts: list[ConditionVerdict], moments: MomentSet,
             k0_data: Optional[tuple] = None, tol_zero: float = 1e-9,
             tol_positive: float = 1e-10) -> CaseLabel:
    """Pick the case from the condition verdicts and the moments of tilde K1.

    When ``k0_data = (verdicts, moments)`` is given and both K0 conditions
    hold, the K0 route wins; a symmetric K0 leaves the K1 positivity
    condition with equality and would otherwise be unclassifiable.
    """
    if k0_data is not None:
        k0_verdicts, _ = k0_data
        if _holds(k0_verdicts, ConditionId.ALPHA_SIGN) and _holds(k0_verdicts, ConditionId.BETA_MOMENTS):
            return CaseLabel.ALPHA_BETA
    if not (_holds(k1_verdicts, ConditionId.SIGN) and _holds(k1_verdicts, ConditionId.POSITIVITY)):
        return CaseLabel.UNCLASSIFIED
    nu0, nu1, nu2 = moments.nu0, moments.nu1, moments.nu2
    if nu0 is None or nu1 is None:
        return CaseLabel.UNCLASSIFIED
    band = tol_zero * max(1.0, abs(nu0))
    if any(v is not None and abs(np.imag(v)) > band for v in (nu0, nu1, nu2)):
        return CaseLabel.UNCLASSIFIED
    nu1 = float(np.real(nu1))
    if nu1 > band:
        return CaseLabel.CASE_I
    if nu1 < -band:
        return CaseLabel.CASE_II
    if moments.abs_finite[2] and nu2 is not None and float(np.real(nu2)) > tol_positive * max(1.0, abs(nu0)):
        return CaseLabel.CASE_III
    return CaseLabel.UNCLASSIFIED


# index of C in the factorization a = rho_plus * C used by the report
EXPECTED_KAPPA = {
    CaseLabel.CASE_I: 0,
    CaseLabel.CASE_II: -1,
    CaseLabel.CASE_III: -1,
    CaseLabel.ALPHA_BETA: -1,
}


@dataclass(frozen=True)
class SolvabilityReport:
    case: CaseLabel
    rho_plus: str
    rho_minus: str
    kappa: int
    dim_ker: int
    dim_coker: int
    solution_space: str
    f_condition: Optional[str]
    f_condition_space: Optional[str]
    homogeneous_note: str
    # the bracketed factor as printed with the opposite Cayley orientation
    kappa_printed_variant: Optional[int] = None
    notes: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["case"] = self.case.value
        d["notes"] = list(self.notes)
        d["schema_version"] = REPORT_SCHEMA_VERSION
        return d


F_CONDITION = "f ∈ Ē₊(1/(λ−i))"

_TEXT = {
    CaseLabel.CASE_I: dict(
        rho_plus="1/(λ+i)",
        solution_space="Ẽ₊(1/(λ+i))",
        f_condition=None,
        f_condition_space=None,
        homogeneous_note="only the trivial solution in Ẽ₊(1/(λ+i))",
        notes=(),
    ),
    CaseLabel.CASE_II: dict(
        rho_plus="1/(λ+i)",
        solution_space="Ẽ₊(1/(λ+i))",
        f_condition=F_CONDITION,
        f_condition_space="Ẽ₊(λ/(λ+i))",
        homogeneous_note="one linearly independent solution in Ẽ(λ/(λ+i)²) \\ Ẽ₊(λ/(λ+i))",
        notes=(
            "discrepancy: the derivation via a = 1/(λ+i)·c₁ with ind c₁ = -1 places the one "
            "linearly independent homogeneous solution in Ẽ₊(1/(λ+i))",
            "discrepancy: the derivation via a = 1/(λ−i)·[((λ−i)/(λ+i))c₁] with index 0 gives "
            "φ ∈ E₊ when f ∈ Ē₊(1/(λ−i)), not Ẽ₊(λ/(λ+i))",
        ),
    ),
    CaseLabel.CASE_III: dict(
        rho_plus="λ/(λ+i)²",
        solution_space="Ẽ₊(λ/(λ+i)²)",
        f_condition=None,
        f_condition_space=None,
        homogeneous_note="one linearly independent solution in Ẽ₊(λ/(λ+i)²)",
        notes=(
            "discrepancy: the derivation places the homogeneous solution φ₀ in "
            "Ẽ(λ/(λ+i)²) \\ Ẽ₊(λ/(λ+i))",
            "derivation only: if f ∈ Ē₊(1/(λ−i)) then φ ∈ Ẽ₊(λ/(λ+i))",
            "bracket orientation: a = ρ₊·C holds for C = ((λ+i)/(λ−i))c₁; the printed "
            "((λ−i)/(λ+i))c₁ has the index reported as kappa_printed_variant",
        ),
    ),
    CaseLabel.ALPHA_BETA: dict(
        rho_plus="1/(λ+i)²",
        solution_space="Ẽ(1/(λ+i)²)",
        f_condition=F_CONDITION,
        f_condition_space="Ẽ₊(1/(λ+i))",
        homogeneous_note="one linearly independent solution in Ẽ(1/(λ+i)²) \\ Ẽ₊(1/(λ+i))",
        notes=(
            "with f ∈ Ē₊(1/(λ−i)) the homogeneous equation has only the trivial solution "
            "in Ẽ₊(1/(λ+i))",
            "bracket orientation: a = ρ₊·C holds for C = ((λ+i)/(λ−i))e; the printed "
            "((λ−i)/(λ+i))e has the index reported as kappa_printed_variant",
        ),
    ),
}


def dimensions(kappa: int, delta: int = DELTA) -> tuple[int, int]:
    return max(delta - kappa, 0), max(kappa - delta, 0)


def solvability_report(case: CaseLabel, winding: "WindingResult", nonvanishing: ConditionVerdict,
                       printed_variant: Optional["WindingResult"] = None) -> SolvabilityReport:
    """Assemble the report for a classified kernel.

    ``winding`` is the index of C in ``a = rho_plus * C``; it must agree with
    the case, otherwise :class:`IndexMismatch` is raised.
    """
    case = CaseLabel(case)
    if case is CaseLabel.UNCLASSIFIED:
        raise ValueError("no solvability report for an unclassified kernel")
    if not nonvanishing.holds:
        raise VanishingSymbol(f"regular factor comes within {nonvanishing.margin:.3g} of zero")
    kappa = EXPECTED_KAPPA[case]
    if winding.index != kappa:
        raise IndexMismatch(f"{case.value} needs index {kappa}, computed {winding.index}")
    dim_ker, dim_coker = dimensions(kappa)
    return SolvabilityReport(
        case=case,
        rho_minus="1",
        kappa=kappa,
        dim_ker=dim_ker,
        dim_coker=dim_coker,
        kappa_printed_variant=None if printed_variant is None else printed_variant.index,
        **_TEXT[case],
    )
