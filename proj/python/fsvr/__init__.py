"""Two-stage stock forecasting: SOM-partitioned SVR with fuzzy-rule extraction.

Thin re-export of the compiled extension. Installed wheels carry the
extension inside this package; in-tree builds put it on sys.path instead.
"""

try:
    from ._fsvr import *  # noqa: F401,F403
    from ._fsvr import __doc__ as _core_doc
except ImportError:
    from _fsvr import *  # noqa: F401,F403
    from _fsvr import __doc__ as _core_doc

__all__ = [name for name in dir() if not name.startswith("_")]
