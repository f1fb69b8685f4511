"""MOO frontend: lexer, parser, printer and name resolution."""
from .lexer import LexError, MooError, Token, tokenize
from .parser import ParseError, parse_source, parse_translation_unit
from .printer import print_translation_unit
from .symbols import ProgramIndex, Scopes, SymbolError, SymbolTable, build_symbol_table

__all__ = [
    "LexError", "MooError", "ParseError", "ProgramIndex", "Scopes", "SymbolError",
    "SymbolTable", "Token", "build_symbol_table", "parse_source", "parse_translation_unit",
    "print_translation_unit", "tokenize",
]
