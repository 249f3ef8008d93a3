"""Parser for comma-separated lists of numbers on the command line."""

import logging
import re
import typing as T

_logger = logging.getLogger(__name__)


_LIST_TOKEN = re.compile(r'\s*(?:,\s*)?([+-]?(?:\d+\.?\d*(?:e[+-]?\d+)?|\.\d+(?:e[+-]?\d+)?))\s*',
                         flags=re.IGNORECASE)
"""Used only by :func:`_tokenize_list`."""


def _tokenize_list(s: str):
    # language=rst
    """Tokenizer for :func:`parse_list`.

    For each number found, this generator yields a tuple ``(token, pos)`` with
    the token string and the position at which it was found.

    Example::

        list(_tokenize_list('8, 12'))
        >>> [('8', 0), ('12', 1)]

    :raises: ValueError if a syntax error is detected.

    """
    pos = 0
    for match in _LIST_TOKEN.finditer(s):
        separated = ',' in match[0]
        if match.start() != pos or separated != (pos > 0):
            raise ValueError(f"Syntax error in list at '{s[pos:]}'")
        yield match[1], pos
        pos = match.end()
    if pos != len(s):
        raise ValueError(f"Syntax error in list at '{s[pos:]}'")


def parse_list(s: str, kind: T.Callable[[str], T.Any]=int) -> T.Tuple:
    # language=rst
    """Parses ``'8,12,16'`` into ``(8, 12, 16)``.

    Parameters:
        s: the list; whitespace around separators is allowed.
        kind: converts one token, e.g. :class:`int` or :class:`float`.

    :raises: ValueError for an empty list, a syntax error or a token that
        *kind* rejects.

    """
    if not s.strip():
        raise ValueError("empty list")
    values = []
    for token, pos in _tokenize_list(s):
        try:
            values.append(kind(token))
        except ValueError:
            raise ValueError(f"Invalid value '{token}' in list at position {pos}") from None
    return tuple(values)
