from .fileformat import format_handlers  # noqa: F401

from .interface import (  # noqa: F401
    HelpAction,
    NumericRangeType,
    FileAccessType,
    DirectoryAccessType,
    NumericListType,
)
