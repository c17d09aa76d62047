import json

import pytest

from conftest import esym, power_sum
from structured_roabp.args import parse_args
from structured_roabp.core.poly import Poly
from structured_roabp.core.roabp import expand
from structured_roabp.exporters.json_codec import load_document, write_document
from structured_roabp.main import EXIT_FAILED, EXIT_INPUT, EXIT_OK, main


@pytest.fixture
def esym_comm(tmp_path):
    path = tmp_path / 'esym.json'
    assert main(['construct', 'esym', '4', '2', '--out', str(path)]) == EXIT_OK
    return path


def test_parse_args_defaults():
    args = parse_args(['convert', '--in', 'a.json'])
    assert args.command == 'convert'
    assert args.seed is None
    assert not args.rationalize
    args = parse_args(['analyze', '--in', 'a.json', '--order', '2,0,1'])
    assert args.order == [2, 0, 1]


def test_construct_writes_the_family(esym_comm, tmp_path):
    assert expand(load_document(esym_comm)) == esym(4, 2)
    diag = tmp_path / 'power.json'
    assert main(['construct', 'power', '3', '2', 'diag', '--out', str(diag)]) == EXIT_OK
    assert expand(load_document(diag)) == power_sum(3, 2)


def test_construct_rejects_bad_parameters(tmp_path):
    assert main(['construct', 'esym', '2', '3', '--out', str(tmp_path / 'x.json')]) == EXIT_INPUT
    assert main(['construct', 'random', '2', '2', 'diag', '--out', str(tmp_path / 'y.json')]) == EXIT_INPUT


def test_analyze(esym_comm, tmp_path):
    out = tmp_path / 'analyze.json'
    assert main(['analyze', '--in', str(esym_comm), '--orders', 'all', '--out', str(out)]) == EXIT_OK
    report = json.loads(out.read_text())
    assert report['sourceKind'] == 'CommRoabp'
    assert len(report['profiles']) == 24
    assert report['minWidth'] == report['maxWidth'] == 3
    assert report['dpd'] == 6
    assert report['catalecticantLowerBound'] == 2


def test_ring(esym_comm, tmp_path):
    out = tmp_path / 'ring.json'
    assert main(['ring', '--in', str(esym_comm), '--out', str(out)]) == EXIT_OK
    report = json.loads(out.read_text())
    assert report['normalSet'] == [[0], [1], [2]]
    assert report['localDims'] == [3]


def test_convert_and_verify(esym_comm, tmp_path):
    out = tmp_path / 'esym.diag.json'
    assert main(['convert', '--in', str(esym_comm), '--out', str(out), '--rationalize']) == EXIT_OK
    report = json.loads(out.with_suffix('.report.json').read_text())
    assert report['verification']['passed']
    assert report['outputWidth'] == 5
    assert expand(load_document(out)) == esym(4, 2)

    check = tmp_path / 'verify.json'
    assert main(['verify', '--in', str(esym_comm), str(out), '--out', str(check)]) == EXIT_OK
    assert json.loads(check.read_text())['passed']


def test_verify_reports_a_mismatch(esym_comm, tmp_path):
    other = tmp_path / 'power.json'
    write_document(power_sum(4, 2), other)
    assert main(['verify', '--in', str(esym_comm), str(other), '--trials', '5']) == EXIT_FAILED


def test_input_errors(tmp_path):
    broken = tmp_path / 'broken.json'
    broken.write_text('{"kind": "comm", ')
    assert main(['convert', '--in', str(broken)]) == EXIT_INPUT
    assert main(['ring', '--in', str(tmp_path / 'missing.json')]) == EXIT_INPUT

    poly = tmp_path / 'poly.json'
    write_document(esym(3, 2), poly)
    assert main(['convert', '--in', str(poly), '--out', str(tmp_path / 'out.json')]) == EXIT_INPUT


def test_verify_interpolated_construction(tmp_path):
    comm, diag = tmp_path / 'comm.json', tmp_path / 'diag.json'
    assert main(['construct', 'esym', '5', '3', 'comm', '--out', str(comm)]) == EXIT_OK
    assert main(['construct', 'esym', '5', '3', 'diag', '--out', str(diag)]) == EXIT_OK
    assert main(['verify', '--in', str(comm), str(diag)]) == EXIT_OK


def test_analyze_every_order_of_a_product(tmp_path):
    poly, out = tmp_path / 'product.json', tmp_path / 'product.analyze.json'
    write_document(Poly.monomial((1,) * 5), poly)
    assert main(['analyze', '--in', str(poly), '--orders', 'all', '--out', str(out)]) == EXIT_OK
    report = json.loads(out.read_text())
    assert len(report['profiles']) == 120
    assert report['maxWidth'] == 1


def test_analyze_with_a_given_order(esym_comm, tmp_path, monkeypatch):
    monkeypatch.setenv('SROABP_SEED', '11')
    out = tmp_path / 'ordered.json'
    assert main(['analyze', '--in', str(esym_comm), '--order', '3,1,0,2', '--out', str(out)]) == EXIT_OK
    report = json.loads(out.read_text())
    assert [entry['order'] for entry in report['profiles']] == [[3, 1, 0, 2]]
    assert report['minWidth'] == 3


def test_analyze_rejects_a_bad_order(esym_comm):
    assert main(['analyze', '--in', str(esym_comm), '--order', '0,0,1,2']) == EXIT_INPUT


def test_convert_report_carries_the_decompositions(esym_comm, tmp_path):
    out = tmp_path / 'esym.diag.json'
    assert main(['convert', '--in', str(esym_comm), '--out', str(out)]) == EXIT_OK
    report = json.loads(out.with_suffix('.report.json').read_text())
    for operator in report['operators']:
        assert len(operator['decomposition']['terms']) == operator['decompositionSize']
