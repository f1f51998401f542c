"""Time-critical dynamic influence diagrams.

Model dynamic decision problems compactly (condensed form), expand them to
ordinary influence diagrams (deployed form), solve them exactly, coarsen
them along time and space abstraction axes, and pick which model in a suite
to use when deliberation itself costs utility.
"""

from .model import (
    CHANCE,
    DECISION,
    VALUE,
    INST,
    LAG,
    Arc,
    CondensedTdid,
    ModelError,
    ModelFormatError,
    TabularCpd,
    TemporalVariable,
    UtilityTable,
    parent_signature,
    parse,
    serialize,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "CHANCE",
    "DECISION",
    "VALUE",
    "INST",
    "LAG",
    "Arc",
    "CondensedTdid",
    "ModelError",
    "ModelFormatError",
    "TabularCpd",
    "TemporalVariable",
    "UtilityTable",
    "parent_signature",
    "parse",
    "serialize",
    "validate",
]
