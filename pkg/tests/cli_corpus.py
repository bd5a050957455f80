"""Golden CLI invocations shared by the CLI tests and the acceptance suite."""

import json
import subprocess
import sys
from pathlib import Path

# (name, argv, expected exit code)
CORPUS = [
    ("zeros", ["zeros", "--f", "z^2-0.25", "--region", "disk:0,1"], 0),
    ("green", ["green", "--z0", "0.2", "--h", "1/16", "--format", "csv"], 0),
    ("riesz", ["riesz", "--M", "logabs(blaschke(0.3; 0.5i))"], 0),
    ("blaschke", ["blaschke", "--zeros", "short.json", "--truncated", "--v", "loginv"], 2),
    ("implication", ["implication", "--zeros", "harmonic.json", "--truncated", "--M", "0", "--v", "loginv",
                     "--bound", "5"], 1),
    ("inequality-c", ["inequality-c", "--u", "abs(z)^2", "--M", "abs(z)^2", "--v", "loginv", "--z0", "0.1"], 0),
    ("identity", ["identity", "--M", "abs(z)^2", "--v", "power:2", "--d0", "0.75"], 0),
    ("l-bound", ["l-bound", "--u0", "0", "--f", "1", "--M", "0", "--z", "0.5", "--r", "0.6", "--eps", "0.5"], 3),
    ("validate-v", ["validate-v", "--v", "custom:neg.txt"], 1),
]


def write_inputs(directory):
    d = Path(directory)
    harmonic = [{"re": 1 - 1 / k, "im": 0.0} for k in range(2, 1001)]
    (d / "harmonic.json").write_text(json.dumps({"zeros": harmonic}))
    short = [{"re": 0.9, "im": 0.0}, {"re": 0.0, "im": 0.95}, {"re": -0.97, "im": 0.0}]
    (d / "short.json").write_text(json.dumps({"zeros": short}))
    (d / "neg.txt").write_text("-1")


def run_cli(argv, cwd):
    """Run the CLI in a fresh interpreter; returns ``(exit code, stdout bytes, stderr bytes)``."""
    proc = subprocess.run([sys.executable, "-m", "blaschke_lab", *argv], cwd=cwd, capture_output=True)
    return proc.returncode, proc.stdout, proc.stderr
