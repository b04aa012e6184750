"""Front end: syntax, parsing, printing and typing of the while-language."""
from .ast import Program
from .evaluate import ExprError
from .parser import ParseError, parse_expr, parse_program, parse_stmts, parse_type
from .printer import format_expr, format_program, format_stmt, format_value
from .typecheck import TypeCheckError, TypedProgram, check_assertion, typecheck

__all__ = [
    "Program", "ExprError", "ParseError", "parse_expr", "parse_program", "parse_stmts",
    "parse_type", "format_expr", "format_program", "format_stmt", "format_value",
    "TypeCheckError", "TypedProgram", "check_assertion", "typecheck",
]
