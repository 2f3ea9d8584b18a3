"""Temporal monadic datalog: evaluation, rewriting and data-complexity analysis."""

from .core import (Program, Rule, TemporalAtom, TemporalDatabase, ParseError,
                   FragmentError, parse_program, parse_database, validate)

__all__ = ["Program", "Rule", "TemporalAtom", "TemporalDatabase", "ParseError",
           "FragmentError", "parse_program", "parse_database", "validate"]
