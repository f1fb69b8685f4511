from __future__ import annotations

import re
from dataclasses import dataclass

KEYWORDS = frozenset("""
    class enum public private protected int bool void auto string list return if else
    while for continue break switch case default try catch throw this true false
""".split())

PUNCTUATION = [
    "...", "->", "++", "&&", "||", "==", "!=", "<=", ">=",
    "+", "-", "*", "/", "=", "<", ">", "!", "&", "|", "?", ":", ";", ",", ".",
    "(", ")", "{", "}", "[", "]",
]

_PUNCT_RE = "|".join(re.escape(p) for p in PUNCTUATION)
_SPEC = [
    ("ws", r"[ \t\r]+"),
    ("nl", r"\n"),
    ("line_comment", r"//[^\n]*"),
    ("block_comment", r"/\*(?:.|\n)*?\*/"),
    ("ident", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("int", r"\d+"),
    ("string", r'"(?:[^"\\\n]|\\.)*"'),
    ("punct", _PUNCT_RE),
]
_MASTER = re.compile("|".join(f"(?P<{name}>{rx})" for name, rx in _SPEC))


class MooError(Exception):
    """Frontend diagnostic with a source position."""

    def __init__(self, message, line=0, col=0, filename="<input>"):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col
        self.filename = filename

    def __str__(self):
        return f"{self.filename}:{self.line}:{self.col}: {self.message}"


class LexError(MooError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # kw, ident, int, string, punct, eof
    text: str
    line: int
    col: int
    value: object = None

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def _unescape(body: str, line: int, col: int) -> str:
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            nxt = body[i + 1]
            mapped = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(nxt)
            if mapped is None:
                raise LexError(f"unknown escape sequence \\{nxt}", line, col + i + 1)
            out.append(mapped)
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def tokenize(source: str, filename: str = "<input>") -> list[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(source):
        m = _MASTER.match(source, pos)
        col = pos - line_start + 1
        if m is None:
            ch = source[pos]
            if ch == '"':
                raise LexError("unterminated string literal", line, col, filename)
            raise LexError(f"illegal character {ch!r}", line, col, filename)
        kind = m.lastgroup
        text = m.group()
        if kind == "punct" and source.startswith("/*", pos):
            raise LexError("unterminated block comment", line, col, filename)
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "block_comment":
            nls = text.count("\n")
            if nls:
                line += nls
                line_start = pos + text.rfind("\n") + 1
        elif kind == "ident":
            tokens.append(Token("kw" if text in KEYWORDS else "ident", text, line, col))
        elif kind == "int":
            tokens.append(Token("int", text, line, col, int(text)))
        elif kind == "string":
            tokens.append(Token("string", text, line, col, _unescape(text[1:-1], line, col)))
        elif kind == "punct":
            tokens.append(Token("punct", text, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens
