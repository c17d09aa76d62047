import json
import logging
from fractions import Fraction
from functools import singledispatch
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, NonNegativeInt

from ..core.errors import InvalidParameterError
from ..core.exactnum import format_rational, qmatrix, qrows
from ..core.poly import Poly, Scalar, clean_scalar
from ..core.roabp import CommRoabp, DiagRoabp, Roabp

logger = logging.getLogger(__name__)


class ComplexValue(BaseModel):
    re: float
    im: float


ScalarDoc = int | str | ComplexValue | float
Coeffs = list[ScalarDoc]


class TermDoc(BaseModel):
    exp: list[NonNegativeInt]
    coeff: ScalarDoc


class PolyDoc(BaseModel):
    kind: Literal['poly'] = 'poly'
    vars: NonNegativeInt
    terms: list[TermDoc]


class RoabpDoc(BaseModel):
    kind: Literal['roabp'] = 'roabp'
    n: NonNegativeInt
    d: NonNegativeInt
    order: list[NonNegativeInt]
    # layers[i][row][col] holds ascending coefficients of a univariate entry
    layers: list[list[list[Coeffs]]]
    u: Coeffs
    c: Coeffs


class CommDoc(BaseModel):
    kind: Literal['comm'] = 'comm'
    n: NonNegativeInt
    d: NonNegativeInt
    w: NonNegativeInt
    # A[i][j] is the coefficient matrix of x_i^j, as nested rows
    A: list[list[list[Coeffs]]]
    b: Coeffs
    c: Coeffs


class DiagDoc(BaseModel):
    kind: Literal['diag'] = 'diag'
    n: NonNegativeInt
    d: NonNegativeInt
    w: NonNegativeInt
    rows: list[list[Coeffs]]
    weights: Coeffs


DOCUMENT_MODELS: dict[str, type[BaseModel]] = {
    'poly': PolyDoc,
    'roabp': RoabpDoc,
    'comm': CommDoc,
    'diag': DiagDoc,
}


def parse_scalar(value: ScalarDoc) -> Scalar:
    """ints and 'p/q' strings become Fractions; {re, im} objects and floats become complex."""
    if isinstance(value, ComplexValue):
        return complex(value.re, value.im)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError:
            raise InvalidParameterError(f'Not a rational number: {value!r}')
    return clean_scalar(value)


def dump_scalar(value: Any) -> ScalarDoc:
    value = clean_scalar(value)
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else format_rational(value)
    return ComplexValue(re=value.real, im=value.imag)


def _parse_list(values: Coeffs) -> list[Scalar]:
    return [parse_scalar(v) for v in values]


def _dump_list(values: Any) -> Coeffs:
    return [dump_scalar(v) for v in values]


def _dump_univariate(p: Poly) -> Coeffs:
    return _dump_list(p.coefficient((j,)) for j in range(max(p.degree(), 0) + 1))


def _parse_univariate(coeffs: Coeffs) -> Poly:
    return Poly.univariate(_parse_list(coeffs))


@singledispatch
def to_document(obj: Any) -> BaseModel:
    raise TypeError(f'No JSON document format for {type(obj).__name__}.')


@to_document.register
def _(obj: Poly) -> PolyDoc:
    return PolyDoc(
        vars=obj.nvars,
        terms=[TermDoc(exp=list(e), coeff=dump_scalar(c)) for e, c in obj.sorted_terms()],
    )


@to_document.register
def _(obj: Roabp) -> RoabpDoc:
    return RoabpDoc(
        n=obj.n,
        d=obj.d,
        order=list(obj.order),
        layers=[[[_dump_univariate(e) for e in row] for row in layer] for layer in obj.layers],
        u=_dump_list(obj.u),
        c=_dump_list(obj.c),
    )


@to_document.register
def _(obj: CommRoabp) -> CommDoc:
    return CommDoc(
        n=obj.n,
        d=obj.d,
        w=obj.w,
        A=[[[_dump_list(row) for row in qrows(m)] for m in mats] for mats in obj.coeff_matrices],
        b=_dump_list(obj.b),
        c=_dump_list(obj.c),
    )


@to_document.register
def _(obj: DiagRoabp) -> DiagDoc:
    return DiagDoc(
        n=obj.n,
        d=obj.d,
        w=obj.w,
        rows=[[_dump_univariate(e) for e in row] for row in obj.rows],
        weights=_dump_list(obj.weights),
    )


def _rational_list(values: Coeffs, what: str) -> list[Fraction]:
    parsed = _parse_list(values)
    if not all(isinstance(v, Fraction) for v in parsed):
        raise InvalidParameterError(f'{what} must be rational.')
    return parsed


def from_document(doc: BaseModel) -> Poly | Roabp | CommRoabp | DiagRoabp:
    match doc:
        case PolyDoc():
            return Poly(doc.vars, {tuple(t.exp): parse_scalar(t.coeff) for t in doc.terms})
        case RoabpDoc():
            layers = tuple(
                tuple(tuple(_parse_univariate(e) for e in row) for row in layer)
                for layer in doc.layers
            )
            return Roabp(
                doc.n, doc.d, tuple(doc.order), layers,
                tuple(_rational_list(doc.u, 'u')), tuple(_rational_list(doc.c, 'c')),
            )
        case CommDoc():
            mats = tuple(
                tuple(
                    qmatrix([_rational_list(row, 'Coefficient matrices') for row in m], doc.w)
                    for m in layer
                )
                for layer in doc.A
            )
            return CommRoabp(
                doc.n, doc.d, doc.w, mats,
                tuple(_rational_list(doc.b, 'b')), tuple(_rational_list(doc.c, 'c')),
            )
        case DiagDoc():
            rows = tuple(tuple(_parse_univariate(e) for e in row) for row in doc.rows)
            return DiagRoabp(doc.n, doc.d, doc.w, rows, tuple(_parse_list(doc.weights)))
    raise TypeError(f'Unknown document model {type(doc).__name__}.')


def sniff_kind(data: dict[str, Any]) -> str:
    """Document kind from the 'kind' field, or from the keys when it is absent."""
    if kind := data.get('kind'):
        if kind not in DOCUMENT_MODELS:
            raise InvalidParameterError(f'Unknown document kind {kind!r}.')
        return kind
    for key, kind in (('terms', 'poly'), ('A', 'comm'), ('rows', 'diag'), ('layers', 'roabp')):
        if key in data:
            return kind
    raise InvalidParameterError('Cannot tell the document kind from its keys.')


def parse_document(text: str) -> Poly | Roabp | CommRoabp | DiagRoabp:
    data = json.loads(text)
    if not isinstance(data, dict):
        raise InvalidParameterError('A document must be a JSON object.')
    model = DOCUMENT_MODELS[sniff_kind(data)]
    return from_document(model.model_validate(data))


def load_document(path: Path) -> Poly | Roabp | CommRoabp | DiagRoabp:
    logger.info('Reading %s', path)
    return parse_document(Path(path).read_text(encoding='utf-8'))


def dump_document(obj: Any) -> str:
    return to_document(obj).model_dump_json(indent=2)


def write_document(obj: Any, path: Path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_document(obj), encoding='utf-8')
    logger.info('Wrote %s', path)
