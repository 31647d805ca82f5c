"""A short tour of the command line, run in-process."""
import io
import json
from contextlib import redirect_stdout

from qsphere.cli import main

runs = [
    ["verify", "relations", "--q", "0.5", "--ell", "2", "--cutoff", "6"],
    ["dimension-spectrum", "--ell", "2", "--torus-identity"],
    ["decay", "--q", "0.3", "--j", "1", "--cutoffs", "6,8"],
    ["cg-table", "--ell", "2", "--format", "csv"],
    ["verify", "relations", "--cutoff", "1"],
]
for argv in runs:
    print("$ qsphere", " ".join(argv), flush=True)
    code = main(argv)
    print(f"exit code {code}\n", flush=True)

# reports are plain JSON and easy to post-process
buf = io.StringIO()
with redirect_stdout(buf):
    main(["dimension-spectrum", "--ell", "1"])
rep = json.loads(buf.getvalue())
print("residues:", {r["pole"]: r["residue"] for r in rep["results"]})
