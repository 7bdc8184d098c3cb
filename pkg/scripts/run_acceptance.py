"""Run the acceptance suite and show its PASS/FAIL lines."""

import subprocess
import sys
from pathlib import Path

root = Path(__file__).resolve().parents[1]
cmd = [sys.executable, "-m", "pytest", str(root / "tests" / "test_acceptance.py"), "-q", "-s"]
sys.exit(subprocess.call(cmd, cwd=root))
