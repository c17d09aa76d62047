import json
from fractions import Fraction

import pytest
from pydantic import ValidationError

from conftest import esym
from structured_roabp.core.convert import convert_comm
from structured_roabp.core.dualspace import build_dual_basis
from structured_roabp.core.errors import InvalidParameterError
from structured_roabp.core.matring import build_ring
from structured_roabp.core.poly import Poly
from structured_roabp.core.roabp import (
    comm_to_roabp,
    construct_esym_comm,
    construct_esym_diag,
    construct_power_comm,
    expand,
)
from structured_roabp.core.waring import monomial_waring
from structured_roabp.exporters.json_codec import (
    ComplexValue,
    dump_document,
    dump_scalar,
    load_document,
    parse_document,
    parse_scalar,
    sniff_kind,
    write_document,
)
from structured_roabp.exporters.reports import (
    ConversionReportModel,
    RingReport,
    conversion_report_model,
    ring_report,
    waring_report,
)


def test_scalars():
    assert dump_scalar(Fraction(4, 2)) == 2
    assert dump_scalar(Fraction(-3, 4)) == '-3/4'
    assert dump_scalar(complex(1, -2)) == ComplexValue(re=1.0, im=-2.0)
    assert parse_scalar('5/10') == Fraction(1, 2)
    assert parse_scalar(7) == Fraction(7)
    assert parse_scalar(ComplexValue(re=0.5, im=1)) == complex(0.5, 1)
    with pytest.raises(InvalidParameterError):
        parse_scalar('one half')


@pytest.mark.parametrize(
    'data, kind',
    [
        ({'vars': 1, 'terms': []}, 'poly'),
        ({'A': [], 'b': [], 'c': []}, 'comm'),
        ({'rows': [], 'weights': []}, 'diag'),
        ({'layers': [], 'u': [], 'c': []}, 'roabp'),
        ({'kind': 'diag', 'terms': []}, 'diag'),
    ],
)
def test_sniff_kind(data, kind):
    assert sniff_kind(data) == kind


def test_sniff_kind_rejects_unknown_documents():
    with pytest.raises(InvalidParameterError):
        sniff_kind({'kind': 'circuit'})
    with pytest.raises(InvalidParameterError):
        sniff_kind({'foo': 1})


@pytest.mark.parametrize(
    'obj',
    [
        esym(3, 2),
        construct_esym_comm(4, 2),
        construct_power_comm(2, 3),
        construct_esym_diag(3, 1),
        comm_to_roabp(construct_power_comm(2, 2)),
    ],
)
def test_documents_preserve_the_computed_polynomial(obj):
    assert expand(parse_document(dump_document(obj))) == expand(obj)


def test_complex_diagonal_roabp_document():
    dr, _ = convert_comm(construct_esym_comm(3, 2))
    data = json.loads(dump_document(dr))
    assert data['kind'] == 'diag'
    assert isinstance(data['weights'][0], dict)
    restored = parse_document(json.dumps(data))
    assert restored.w == dr.w


def test_hand_written_documents_without_kind():
    text = json.dumps({'vars': 2, 'terms': [{'exp': [1, 1], 'coeff': '1/2'}, {'exp': [0, 0], 'coeff': 3}]})
    assert parse_document(text) == Poly(2, {(1, 1): Fraction(1, 2), (0, 0): 3})


def test_malformed_documents():
    with pytest.raises(json.JSONDecodeError):
        parse_document('{"vars": 1,')
    with pytest.raises(InvalidParameterError):
        parse_document('[1, 2]')
    with pytest.raises(ValidationError):
        parse_document(json.dumps({'kind': 'poly', 'vars': 1, 'terms': [{'exp': [-1], 'coeff': 1}]}))


def test_comm_documents_need_rational_matrices():
    data = json.loads(dump_document(construct_esym_comm(2, 1)))
    data['b'][0] = {'re': 1.0, 'im': 1.0}
    with pytest.raises(InvalidParameterError):
        parse_document(json.dumps(data))


def test_write_and_load(tmp_path):
    path = tmp_path / 'nested' / 'esym.json'
    write_document(construct_esym_comm(4, 2), path)
    assert expand(load_document(path)) == esym(4, 2)


def test_ring_report_uses_camel_case_keys(nilpotent_2):
    ring = build_ring([nilpotent_2])
    report = ring_report(ring, build_dual_basis(ring))
    data = json.loads(report.to_json())
    assert data['normalSet'] == [[0], [1]]
    assert data['localDims'] == [2]
    assert len(data['variety']) == 1
    assert RingReport.model_validate_json(report.to_json()).local_dims == [2]


def test_conversion_report_round_trip():
    _, report = convert_comm(construct_esym_comm(4, 2))
    model = conversion_report_model(report)
    restored = ConversionReportModel.model_validate_json(model.to_json())
    assert restored.output_width == report.output_width
    assert restored.verification.passed


def test_waring_report():
    data = json.loads(waring_report(monomial_waring((1, 1))).to_json())
    assert [term['weight'] for term in data['terms']] == ['1/4', '-1/4']
    assert data['terms'][0]['power'] == 2
