"""
Infrastructure Layer - Lexer

Turns proof-document text into tokens. Symbols are matched longest first so
that ghost delimiters (`/++`, `--/`), definition arrows (`::=`, `<->`) and
the dual marker (`^@`) are single tokens. Comments are `// ...` to the end of
the line and non-nesting `/* ... */`.
"""

import logging
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Optional

from src.domain.entities.source import SourceFile, SourceSpan
from src.domain.exceptions import ParseError

logger = logging.getLogger(__name__)


class TokenKind(str, Enum):
    IDENT = "identifier"
    KEYWORD = "keyword"
    NUMBER = "number"
    STRING = "string"
    SYMBOL = "symbol"
    EOF = "end of input"


KEYWORDS = frozenset({
    "for", "switch", "case", "note", "let", "using", "by", "print",
    "true", "false", "conclusion", "proves", "with",
})

# longest first
SYMBOLS = (
    "\\forall", "\\exists",
    "/++", "++/", "/--", "--/", "::=", "<->", "...",
    ":=", "->", "<=", ">=", "!=", "=>", "^@", "++",
    "(", ")", "{", "}", "[", "]", ";", ",", ":", "?", "!", "=", "<", ">",
    "+", "-", "*", "/", "^", "@", "'", "&", "|",
)

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER = re.compile(r"[0-9]+(\.[0-9]+)?")


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    span: SourceSpan

    @property
    def value(self) -> Fraction:
        return Fraction(self.text)

    def __str__(self) -> str:
        if self.kind == TokenKind.EOF:
            return "end of input"
        return f"'{self.text}'"


class Lexer:
    """Single-pass tokenizer over a SourceFile"""

    def __init__(self, source: SourceFile):
        self.source = source
        self.text = source.text
        self.pos = 0

    def _span(self, start: int, end: int) -> SourceSpan:
        begin = self.source.span_at(start)
        return SourceSpan(begin.file, begin.start, end, begin.line, begin.column)

    def _skip_trivia(self) -> None:
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if ch.isspace():
                self.pos += 1
            elif text.startswith("//", self.pos):
                newline = text.find("\n", self.pos)
                self.pos = len(text) if newline < 0 else newline + 1
            elif text.startswith("/*", self.pos):
                close = text.find("*/", self.pos + 2)
                if close < 0:
                    raise ParseError("unterminated comment", self._span(self.pos, self.pos + 2),
                                     expected=["*/"])
                self.pos = close + 2
            else:
                return

    def next_token(self) -> Token:
        self._skip_trivia()
        text = self.text
        start = self.pos
        if start >= len(text):
            return Token(TokenKind.EOF, "", self._span(start, start))

        ch = text[start]
        if ch == '"':
            close = text.find('"', start + 1)
            if close < 0:
                raise ParseError("unterminated string", self._span(start, start + 1), expected=['"'])
            self.pos = close + 1
            return Token(TokenKind.STRING, text[start + 1:close], self._span(start, self.pos))

        match = _NUMBER.match(text, start)
        if match:
            self.pos = match.end()
            return Token(TokenKind.NUMBER, match.group(0), self._span(start, self.pos))

        match = _IDENT.match(text, start)
        if match:
            self.pos = match.end()
            word = match.group(0)
            kind = TokenKind.KEYWORD if word in KEYWORDS else TokenKind.IDENT
            return Token(kind, word, self._span(start, self.pos))

        for symbol in SYMBOLS:
            if text.startswith(symbol, start):
                self.pos = start + len(symbol)
                return Token(TokenKind.SYMBOL, symbol, self._span(start, self.pos))

        raise ParseError(f"unexpected character {ch!r}", self._span(start, start + 1))

    def tokenize(self) -> List[Token]:
        tokens: List[Token] = []
        while True:
            token = self.next_token()
            tokens.append(token)
            if token.kind == TokenKind.EOF:
                break
        logger.debug("lexed %d tokens from %s", len(tokens), self.source.name)
        return tokens


def tokenize(source: SourceFile, base_offset: int = 0, text: Optional[str] = None) -> List[Token]:
    """
    Tokenize a document. With `text`, tokenize a fragment embedded in the
    document at `base_offset` (used for `proves` target strings).
    """
    if text is None:
        return Lexer(source).tokenize()
    fragment = SourceFile(source.name, text)
    tokens = Lexer(fragment).tokenize()
    return [_relocate(t, source, base_offset) for t in tokens]


def _relocate(token: Token, source: SourceFile, offset: int) -> Token:
    begin = source.span_at(offset + token.span.start)
    span = SourceSpan(begin.file, begin.start, offset + token.span.end, begin.line, begin.column)
    return Token(token.kind, token.text, span)
