"""
Application Layer - Metrics Service

Counts model and proof lines of a document from its token stream.

A line is counted when it holds a token other than grouping punctuation.
It is a proof line when it holds a proof-only construct: an assertion, a
`note`, a method, `using`, a forward ghost, a label, a `print` or a
command. Every other counted line is a model line.
"""

import logging
from collections import defaultdict
from typing import Dict, List, Optional

from src.domain.entities import SourceFile
from src.domain.entities.metrics import FileMetrics
from src.infrastructure.parsing.lexer import Token, TokenKind, tokenize

logger = logging.getLogger(__name__)

PUNCTUATION = frozenset({"{", "}", "(", ")", ";", ","})

PROOF_KEYWORDS = frozenset({"note", "using", "by", "print", "conclusion", "proves"})

PROOF_SYMBOLS = frozenset({"/++", "++/", "..."})

# tokens after which `!` opens an assertion rather than negating a formula
_STATEMENT_START = frozenset({";", "{", "}", "=>", "/++", "/--", "&"})


def _is_assertion(tokens: List[Token], index: int) -> bool:
    if tokens[index].text != "!" or tokens[index].kind != TokenKind.SYMBOL:
        return False
    return index == 0 or tokens[index - 1].text in _STATEMENT_START


def _is_label(tokens: List[Token], index: int) -> bool:
    """`name:` or `name(params):` standing as its own statement"""
    token = tokens[index]
    if token.kind != TokenKind.IDENT:
        return False
    if index > 0 and tokens[index - 1].text not in _STATEMENT_START:
        return False
    position = index + 1
    if position < len(tokens) and tokens[position].text == "(":
        depth = 0
        while position < len(tokens):
            depth += {"(": 1, ")": -1}.get(tokens[position].text, 0)
            position += 1
            if depth == 0:
                break
    if position >= len(tokens) or tokens[position].text != ":":
        return False
    # `xSol: x' = ...` names an equation
    ahead = [t.text for t in tokens[position + 1:position + 3]]
    return not (len(ahead) == 2 and ahead[1] == "'")


class MetricsService:
    """Service measuring documents for the metrics report"""

    def measure(self, source: SourceFile) -> FileMetrics:
        tokens = [t for t in tokenize(source) if t.kind != TokenKind.EOF]
        lines: Dict[int, List[int]] = defaultdict(list)
        for index, token in enumerate(tokens):
            lines[token.span.line].append(index)

        counted = proof = using = 0
        for indices in lines.values():
            if all(tokens[i].text in PUNCTUATION for i in indices):
                continue
            counted += 1
            if any(self._proof_token(tokens, i) for i in indices):
                proof += 1
            if any(tokens[i].text == "using" for i in indices):
                using += 1
        metrics = FileMetrics(source.name, counted, counted - proof, proof, using)
        logger.debug("metrics of %s: %s", source.name, metrics)
        return metrics

    @staticmethod
    def _proof_token(tokens: List[Token], index: int) -> bool:
        token = tokens[index]
        if token.kind == TokenKind.KEYWORD and token.text in PROOF_KEYWORDS:
            return True
        if token.kind == TokenKind.SYMBOL and token.text in PROOF_SYMBOLS:
            return True
        return _is_assertion(tokens, index) or _is_label(tokens, index)

    def measure_all(self, sources: List[SourceFile], total_name: Optional[str] = "total") -> List[FileMetrics]:
        """Per-file metrics, followed by their sum when there is more than one file"""
        rows = [self.measure(s) for s in sources]
        if total_name is not None and len(rows) > 1:
            rows.append(FileMetrics(
                total_name,
                sum(r.counted for r in rows),
                sum(r.model for r in rows),
                sum(r.proof for r in rows),
                sum(r.using for r in rows),
            ))
        return rows
