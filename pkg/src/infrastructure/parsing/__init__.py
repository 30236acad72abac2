"""Surface syntax: lexer, recursive-descent parser and pretty printer"""

from .lexer import Token, TokenKind, tokenize
from .parser import (
    Parser,
    parse_document,
    parse_formula,
    parse_formula_text,
    parse_game,
    parse_term,
    parse_text,
)
from .printer import (
    format_number,
    print_command,
    print_formula,
    print_game,
    print_node,
    print_statement,
    print_statements,
    print_term,
)

__all__ = [
    "Token", "TokenKind", "tokenize",
    "Parser", "parse_document", "parse_formula", "parse_formula_text", "parse_game",
    "parse_term", "parse_text",
    "format_number", "print_command", "print_formula", "print_game", "print_node",
    "print_statement", "print_statements", "print_term",
]
