import pytest

from lab_utils import parse_list


def test_parse_list():
    assert parse_list('8') == (8,)
    assert parse_list('8,12,16,24') == (8, 12, 16, 24)
    assert parse_list(' 8 , 12 ,16') == (8, 12, 16)
    assert parse_list('0.5, 1.5, 1e-2', float) == (0.5, 1.5, 0.01)


@pytest.mark.parametrize('s', ['', '   ', '8,,12', '8 12', '8,', 'a', '8;12'])
def test_syntax_errors(s):
    with pytest.raises(ValueError):
        parse_list(s)


def test_kind_rejects_token():
    with pytest.raises(ValueError, match="Invalid value '1.5'"):
        parse_list('8,1.5')
