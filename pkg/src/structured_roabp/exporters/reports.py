"""Report models for the CLI; JSON keys are camelCase."""

import logging
from pathlib import Path
from typing import Sequence

from pydantic import BaseModel, ConfigDict
from pydantic.alias_generators import to_camel

from ..core.convert import ConversionReport, OperatorSummary, VerificationReport
from ..core.dualspace import DualBasis
from ..core.matring import MatrixRing, VarietyPoint
from ..core.roabp import NisanProfile
from ..core.waring import WaringDecomposition
from .json_codec import ComplexValue, PolyDoc, ScalarDoc, dump_scalar, to_document

logger = logging.getLogger(__name__)


class ReportModel(BaseModel):
    model_config = ConfigDict(alias_generator=to_camel, populate_by_name=True)

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)

    def write(self, path: Path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json(), encoding='utf-8')
        logger.info('Wrote %s', path)


class ProfileEntry(ReportModel):
    order: list[int]
    ranks: list[int]
    size: int
    width: int


class AnalyzeReport(ReportModel):
    source_kind: str
    n: int
    degree: int
    individual_degrees: list[int]
    term_count: int
    dpd: int | None
    catalecticant_lower_bound: int | None
    profiles: list[ProfileEntry]
    min_width: int
    min_width_order: list[int]
    max_width: int
    max_width_order: list[int]


class DualSpaceEntry(ReportModel):
    point: list[tuple[float, float]]
    local_dim: int
    operators: list[PolyDoc]


class RingReport(ReportModel):
    w: int
    r: int
    normal_set: list[list[int]]
    border: list[PolyDoc]
    variety: list[list[tuple[float, float]]]
    local_dims: list[int]
    dual_spaces: list[DualSpaceEntry]
    psi_condition: float


class WaringTermEntry(ReportModel):
    weight: ScalarDoc
    form: list[ScalarDoc]
    constant: ScalarDoc
    power: int


class WaringReport(ReportModel):
    terms: list[WaringTermEntry]


class VerificationModel(ReportModel):
    trials: int
    max_residual: float
    tol: float
    passed: bool
    worst_point: list[ScalarDoc] | None = None


class OperatorEntry(ReportModel):
    point: int
    index: int
    operator: PolyDoc
    degree: int
    weight: ComplexValue
    decomposition_size: int
    decomposition: WaringReport
    plan_size: int
    dpd: int | None
    lower_bound: int | None


class ConversionReportModel(ReportModel):
    input_width: int
    r: int
    m: int
    variety_size: int
    local_dims: list[int]
    plan_sizes: list[int]
    decomposition_sizes: list[int]
    operators: list[OperatorEntry]
    output_width: int
    uniform_bound: int
    accounting_bound: int
    d_prime: int
    psi_condition: float
    verification: VerificationModel | None = None


def _coords(point: VarietyPoint) -> list[tuple[float, float]]:
    return [(x.real, x.imag) for x in point.coords]


def profile_entries(profiles: Sequence[NisanProfile]) -> list[ProfileEntry]:
    return [
        ProfileEntry(order=list(p.order), ranks=list(p.ranks), size=p.size, width=p.width)
        for p in profiles
    ]


def ring_report(ring: MatrixRing, db: DualBasis) -> RingReport:
    spaces = [
        DualSpaceEntry(
            point=_coords(s.point),
            local_dim=s.local_dim,
            operators=[to_document(op.op_poly) for op in s.basis],
        )
        for s in db.spaces
    ]
    return RingReport(
        w=ring.w,
        r=ring.r,
        normal_set=[list(a) for a in ring.normal_set],
        border=[to_document(g) for g in ring.border_basis()],
        variety=[_coords(s.point) for s in db.spaces],
        local_dims=[s.local_dim for s in db.spaces],
        dual_spaces=spaces,
        psi_condition=db.condition,
    )


def waring_report(dec: WaringDecomposition) -> WaringReport:
    return WaringReport(
        terms=[
            WaringTermEntry(
                weight=dump_scalar(t.weight),
                form=[dump_scalar(c) for c in t.form],
                constant=dump_scalar(t.constant),
                power=t.power,
            )
            for t in dec.terms
        ]
    )


def verification_model(v: VerificationReport) -> VerificationModel:
    return VerificationModel(
        trials=v.trials,
        max_residual=v.max_residual,
        tol=v.tol,
        passed=v.passed,
        worst_point=None if v.worst_point is None else [dump_scalar(x) for x in v.worst_point],
    )


def _operator_entry(s: OperatorSummary) -> OperatorEntry:
    return OperatorEntry(
        point=s.point,
        index=s.index,
        operator=to_document(s.op_poly),
        degree=s.degree,
        weight=ComplexValue(re=s.weight.real, im=s.weight.imag),
        decomposition_size=s.decomposition_size,
        decomposition=waring_report(s.decomposition),
        plan_size=s.plan_size,
        dpd=s.dpd,
        lower_bound=s.lower_bound,
    )


def conversion_report_model(report: ConversionReport) -> ConversionReportModel:
    return ConversionReportModel(
        input_width=report.input_width,
        r=report.r,
        m=report.m,
        variety_size=report.variety_size,
        local_dims=list(report.local_dims),
        plan_sizes=list(report.plan_sizes),
        decomposition_sizes=list(report.decomposition_sizes),
        operators=[_operator_entry(s) for s in report.operators],
        output_width=report.output_width,
        uniform_bound=report.uniform_bound,
        accounting_bound=report.accounting_bound,
        d_prime=report.d_prime,
        psi_condition=report.psi_condition,
        verification=None if report.verification is None else verification_model(report.verification),
    )
