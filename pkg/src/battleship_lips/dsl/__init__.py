"""The Battleship question language: parsing, typing and evaluation."""
from .ast import (
    ANSWER_TYPES,
    App,
    Expr,
    FunctionOf,
    Ground,
    Lambda,
    Lit,
    SetOf,
    TypeTag,
    Var,
    ast_depth,
    ast_size,
    contains_lambda,
    pretty_print,
)
from .interpreter import Closure, DomainError, evaluate
from .parser import DSLError, ParseError, parse_program
from .primitives import PRIMITIVES, semantics_table
from .typecheck import TypeCheckError, infer, top_level_type, typecheck
from .vectorized import SpaceAnswers, evaluate_space

__all__ = [
    "ANSWER_TYPES", "App", "Closure", "DSLError", "DomainError", "Expr", "FunctionOf", "Ground",
    "Lambda", "Lit", "PRIMITIVES", "ParseError", "SetOf", "SpaceAnswers", "TypeCheckError",
    "TypeTag", "Var", "ast_depth", "ast_size", "contains_lambda", "evaluate", "evaluate_space",
    "infer", "parse_program", "pretty_print", "semantics_table", "top_level_type", "typecheck",
]
