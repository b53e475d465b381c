"""
The command-line pipeline end to end
====================================

Write a synthetic data set in the input file formats, then run the
estimation, supply, shares and instrument-selection commands on it.
"""

# %%
import tempfile
from pathlib import Path

from tradeiv.cli import main

work = Path(tempfile.mkdtemp())
(work / "dgp.cfg").write_text("out = data\nseed = 11\ndgp.start = 2012-08\ndgp.n_months = 80\n")
main(["simulate", "--config", str(work / "dgp.cfg")])
print(sorted(p.name for p in (work / "data").iterdir()))

# %%
cfg = str(work / "data" / "config.cfg")
print((work / "data" / "config.cfg").read_text())
main(["estimate", "--config", cfg])

# %%
main(["supply", "--config", cfg])

# %%
main(["shares", "--config", cfg])
