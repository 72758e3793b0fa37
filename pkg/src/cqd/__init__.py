"""Chess endgame WDL tables with capture-quiet decomposition verification."""

__version__ = "0.1.0"

from .material import MaterialSignature, parse_signature  # noqa: E402
from .rules import Position  # noqa: E402
from .tablebase import Label, SubModelSet, WdlTable, load, save  # noqa: E402

__all__ = [
    "__version__", "MaterialSignature", "parse_signature", "Position",
    "Label", "SubModelSet", "WdlTable", "load", "save",
]
