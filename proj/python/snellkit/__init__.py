"""Optimal stopping on finite chains and 1-d diffusions.

Everything lives in the compiled extension; this package just re-exports it.
`run_command(command, config_json)` drives the same engine as the CLI and
returns `(report_json, csv)`.
"""

from ._snellkit import *  # noqa: F401,F403
from ._snellkit import __version__  # noqa: F401
