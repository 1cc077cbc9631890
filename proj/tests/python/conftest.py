"""Make the built package importable when running pytest directly from the
source tree (ctest sets PYTHONPATH instead)."""

import sys
from pathlib import Path

_root = Path(__file__).resolve().parents[2]
# Staged build trees first; the plain source tree lacks the extension.
_candidates = sorted(_root.glob("build*/python")) + [_root / "python"]
for path in reversed(_candidates):
    if path.is_dir():
        sys.path.insert(0, str(path))
