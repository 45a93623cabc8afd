"""Memory event structures, justification games and litmus checking."""

from .es import Action, Alphabet, EventStructure, default_alphabet, validate
from .game import enumerate_verdicts, well_justified
from .semantics import compile_program, program_semantics

__all__ = [
    "Action",
    "Alphabet",
    "EventStructure",
    "compile_program",
    "default_alphabet",
    "enumerate_verdicts",
    "program_semantics",
    "validate",
    "well_justified",
]

__version__ = "0.1.0"
