# %% [markdown]
# # The command line
#
# Every capability is also reachable from the `sphaera` command.  This script
# calls the entry point in-process and writes artifacts to a temporary folder.

# %%
import json
import tempfile
from pathlib import Path

from sphaera.cli import main

out = Path(tempfile.mkdtemp())

# %%
main(["synth", "--seed", "7", "--L", "16", "--out", str(out)])
main(["evolve", "--coefficients", str(out / "coefficients.csv"), "--t", "0.5", "--L", "16", "--out", str(out)])
main(["spectrum", "--coefficients", str(out / "evolved_coefficients.csv"), "--out", str(out)])
print(sorted(p.name for p in out.iterdir()))
print((out / "spectrum.csv").read_text().splitlines()[:4])

# %%
code = main(["cov-check", "--t1", "0.5", "--t2", "0.5", "--N", "20000", "--out", str(out)])
print("exit", code, json.loads((out / "cov_check.json").read_text())["z_score"])

# %%
main(["verify-all", "--seed", "0", "--out", str(out)])
