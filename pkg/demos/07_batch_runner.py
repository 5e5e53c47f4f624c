# %% [markdown]
# The batch runner reads a JSON config, runs one suite and writes
# report.json plus CSV tables.  Same as `matrixbt --config ...` on the shell.

# %%
import json
from pathlib import Path

from matrixbt.cli import main

here = Path(__file__).parent
for name in ("theorem_ii", "uinvariant"):
    out = here / "out" / name
    code = main(["--config", str(here / "configs" / f"{name}.json"), "--out", str(out)])
    report = json.loads((out / "report.json").read_text())
    print(name, "exit", code, "pass", report["pass"])
    for table in sorted((out / "tables").glob("*.csv")):
        print(table.read_text())

# %% the sign probe, from flags only
main(["sign-probe", "--out", str(here / "out" / "sign")])
