import xml.etree.ElementTree as ET

import pytest

from braidforce import braid_core as bc
from braidforce.cli import render_svg, run

from conftest import FIXTURES


def call(capsys, *argv: str) -> tuple[int, str, str]:
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_word(capsys):
    code, out, _ = call(capsys, 'word', '--input', str(FIXTURES / 'b_1221.braid'))
    assert code == 0 and out.strip() == '1 2 2 1'


def test_colored_word(capsys):
    code, out, _ = call(capsys, 'word', '--input', str(FIXTURES / 'one_free.braid'))
    assert code == 0 and 'red=' in out


def test_validate(capsys):
    assert call(capsys, 'validate', '--input', str(FIXTURES / 'b_1221.braid'))[:2] == (0, 'ok\n')


def test_index(capsys):
    code, out, _ = call(capsys, 'index', '--input', str(FIXTURES / 'one_free.braid'))
    assert code == 0 and 'P_t = t\n' in out
    code, out, _ = call(capsys, 'index', '--word', str(FIXTURES / 'twist_pair.word'), '--coeff', 'z2')
    assert code == 0 and 'P_t = t\n' in out and 'Z/2' in out


def test_flags(capsys):
    code, out, _ = call(capsys, 'flags', '--input', str(FIXTURES / 'one_free.braid'))
    assert code == 0 and 'proper: true' in out and 'bounded: true' in out


def test_conjugacy(capsys):
    code, out, _ = call(capsys, 'conjugacy', '--word', 'm=3: 1 2 2 1')
    assert code == 0 and out.startswith('members: 4')
    code, out, _ = call(capsys, 'conjugacy', '--word', 'm=3: 2 1 2; red={2}', '--other', 'm=3: 1 2 2; red={3}')
    assert out.strip() == 'true'


def test_force_refusal_exit_code(capsys, tmp_path):
    rep = tmp_path / 'report.txt'
    code, out, _ = call(capsys, 'force', '--skeleton', 'm=2: 1 1', '--colored', 'm=3: 1 1; red={3}',
                        '--report', str(rep))
    assert code == 1 and 'refused: cylindrical-class' in out
    assert rep.read_text() == out


def test_force_word(capsys):
    code, out, _ = call(capsys, 'force', '--skeleton', str(FIXTURES / 'twist_pair_skeleton.word'),
                        '--colored', str(FIXTURES / 'twist_pair.word'))
    assert code == 0 and 'lower_bound: 1' in out


def test_normalize(capsys):
    code, out, _ = call(capsys, 'normalize', '--input', str(FIXTURES / 'one_free.braid'))
    b, colors = bc.parse_braid(out)
    assert code == 0 and 'red' in colors
    assert all(v.denominator == 1 for row in b.rows() for v in row)
    code, out, _ = call(capsys, 'normalize', '--word', 'm=3: 1 2 1 2 1 2 1')
    assert 'full twists: 1' in out


def test_malformed_input(capsys):
    code, _, err = call(capsys, 'word', '--input', str(FIXTURES / 'malformed.braid'))
    assert code == 2 and err


def test_missing_file(capsys):
    assert call(capsys, 'word', '--input', str(FIXTURES / 'nope.braid'))[0] == 2


def test_unknown_flag(capsys):
    assert call(capsys, 'word', '--bogus')[0] == 2
    assert call(capsys, 'frobnicate')[0] == 2


def test_global_flags_either_side(capsys):
    a = call(capsys, '--coeff', 'z2', 'index', '--input', str(FIXTURES / 'one_free.braid'))
    b = call(capsys, 'index', '--input', str(FIXTURES / 'one_free.braid'), '--coeff', 'z2')
    assert a == b and 'Z/2' in a[1]


def test_domain_error_exit_code(capsys):
    code, _, err = call(capsys, 'index', '--word', 'm=3: 1 1 2 2; red={3}')
    assert code == 1 and 'improper' in err


def test_render(tmp_path, capsys):
    out = tmp_path / 'b.svg'
    assert call(capsys, 'render', '--input', str(FIXTURES / 'one_free.braid'), '--out', str(out))[0] == 0
    root = ET.fromstring(out.read_text())
    assert root.tag.endswith('svg')
    assert 'crimson' in out.read_text()


def test_render_empty():
    root = ET.fromstring(render_svg(None))
    assert len(list(root)) == 3


@pytest.mark.parametrize('name', ['b_1221.braid', 'b_2112.braid', 'b_free.braid', 'one_free.braid'])
def test_fixture_round_trip(name):
    b, colors = bc.parse_braid((FIXTURES / name).read_text())
    b2, colors2 = bc.parse_braid(bc.format_braid(b, colors))
    assert b2.rows() == b.rows() and colors2 == colors
