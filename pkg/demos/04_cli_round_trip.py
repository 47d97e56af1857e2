"""
Command-line round trip
=======================

Runs the ``tissueseg`` commands in a scratch directory: phantom, the three
classifiers, and evaluation of each against ground truth.
"""

# %%
import subprocess
import sys
import tempfile
from pathlib import Path

work = Path(tempfile.mkdtemp(prefix="tissueseg-"))


def run(*args):
    subprocess.run([sys.executable, "-m", "tissueseg", *args], cwd=work, check=True)


run("phantom", "--output", "head.pgm", "--seed", "0")
run("otsu", "--input", "head.pgm", "--output", "otsu.pgm")
run("bayes", "--input", "head.pgm", "--output", "bayes.pgm")
run("bayes-smooth", "--input", "head.pgm", "--output", "smooth.pgm", "--iterations", "5")

# %%
print((work / "otsu.txt").read_text())
print((work / "bayes.txt").read_text())
for name in ("otsu", "bayes", "smooth"):
    run("eval", "--truth", "head_truth.pgm", "--input", f"{name}.pgm", "--output", f"{name}.csv")
    print(name)
    print((work / f"{name}.csv").read_text())
print("outputs in", work)
