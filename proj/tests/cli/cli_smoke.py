"""End-to-end checks of the nptails command line.

usage: cli_smoke.py NPTAILS_BINARY SOURCE_DIR WORK_DIR
"""
import json
import os
import pathlib
import shutil
import subprocess
import sys

BIN, SRC, WORK = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
SCHEMAS = SRC / "schemas"
SMALL = SRC / "tests" / "cli" / "small_bump.json"
COLUMNS = "tau,u,v,r,phi,psi,Tpsi,T2psi,v2dvphi"
failures = []


def check(cond, what):
    print(("ok    " if cond else "FAIL  ") + what)
    if not cond:
        failures.append(what)


def run(*args, env=None):
    return subprocess.run([BIN, *map(str, args)], capture_output=True, text=True, env=env)


def validate(schema, *files):
    res = subprocess.run([sys.executable, str(SRC / "tests" / "cli" / "validate_json.py"), str(SCHEMAS),
                          schema, *map(str, files)], capture_output=True, text=True)
    check(res.returncode == 0, f"{schema} accepts {', '.join(pathlib.Path(f).name for f in files)}"
          + ("" if res.returncode == 0 else "\n" + res.stdout))


shutil.rmtree(WORK, ignore_errors=True)
WORK.mkdir(parents=True)

# model
res = run("model", "--config", SMALL, "--out", WORK / "model", "--points", 50)
check(res.returncode == 0, "model runs")
raw = (WORK / "model" / "model.csv").read_bytes()
check(raw.startswith(b"r,D,dD,rstar\n") and b"\r" not in raw, "model CSV header and line endings")
rows = [line.split(",") for line in raw.decode().splitlines()[1:]]
check(len(rows) == 50 and all(len(r) == 4 for r in rows), "model CSV shape")
check(all(x == "%.17g" % float(x) for r in rows for x in r), "model CSV uses 17 significant digits")

# constants
res = run("constants", "--config", SMALL, "--construct", "--out", WORK / "c")
check(res.returncode == 0, "constants --construct runs")
validate("npreport.schema.json", WORK / "c" / "npreport.json")
report = json.loads((WORK / "c" / "npreport.json").read_text())
check(report["inverted"][0]["k"] == 1 and report["inverted"][0]["method"] == "both", "NpReport carries I0^(1)")
chain = (WORK / "c" / "chain_1.csv").read_text().splitlines()
check(chain[0] == "v,phi" and len(chain) > 100, "constructed chain CSV")

# evolve: deterministic across repeated runs and thread counts
for name, threads in (("e1", 1), ("e2", 3)):
    res = run("evolve", "--config", SMALL, "--out", WORK / name, "--threads", threads)
    check(res.returncode == 0, f"evolve runs with {threads} thread(s)")
for curve in ("r10", "scri", "rstar-30"):
    a = (WORK / "e1" / f"{curve}.csv").read_bytes()
    b = (WORK / "e2" / f"{curve}.csv").read_bytes()
    check(a == b, f"{curve}.csv is bit-identical across runs")
    check(a.decode().splitlines()[0] == COLUMNS, f"{curve}.csv columns")
validate("diagnostics.schema.json", WORK / "e1" / "diagnostics.json")

# tail, from the evolve and constants outputs
shutil.copy(WORK / "c" / "npreport.json", WORK / "e1" / "npreport.json")
res = run("tail", "--config", SMALL, "--out", WORK / "e1")
check("scenario" in res.stdout and "r10_psi" in res.stdout, "tail prints a table")
fits = sorted((WORK / "e1").glob("tailfit_*.json"))
check(len(fits) >= 1, "tail writes TailFit JSON")
if fits:
    validate("tailfit.schema.json", *fits)
res = run("tail", "--csv", WORK / "e1" / "r10.csv", "--report", WORK / "e1" / "npreport.json",
          "--scenario", "interior_zeroNP", "--field", "Tpsi", "--k", 1, "--out", WORK / "single")
check(res.returncode == 0, "tail on a single CSV")
validate("tailfit.schema.json", WORK / "single" / "tailfit_r10_Tpsi.json")

# convergence
res = run("convergence", "--config", SMALL, "--levels", 2, "--out", WORK / "conv2")
check(res.returncode != 0 and "at least 3" in res.stderr, "two convergence levels are rejected")
res = run("convergence", "--config", SMALL, "--out", WORK / "conv", "--threads", 2)
check(res.returncode == 0, "convergence runs")
conv = json.loads((WORK / "conv" / "convergence.json").read_text())
grid = [f for f in conv["fields"] if f["curve"] == "grid"][0]
check(all(3.6 <= x <= 4.4 for x in grid["factors"]), f"grid factors {grid['factors']} in [3.6, 4.4]")
validate("convergence.schema.json", WORK / "conv" / "convergence.json")
validate("diagnostics.schema.json", WORK / "conv" / "convergence_diagnostics.json")

# failures
res = run("evolve", "--config", SMALL, "--out", WORK / "budget", "--budget-cells", 1000)
check(res.returncode == 2 and "BudgetExceeded" in res.stderr, "cell budget is enforced")
bad = json.loads(SMALL.read_text())
bad["observers"][1]["kind"] = "horizon"
(WORK / "bad.json").write_text(json.dumps(bad))
res = run("verify", "--config", WORK / "bad.json", "--out", WORK / "bad")
check(res.returncode == 2 and "SchemaError" in res.stderr and "/observers/1/kind" in res.stderr,
      "malformed config names the offending path")
bad = json.loads(SMALL.read_text())
bad["scenarios"][0]["curve"] = "r20"
(WORK / "bad2.json").write_text(json.dumps(bad))
res = run("evolve", "--config", WORK / "bad2.json", "--out", WORK / "bad")
check(res.returncode == 2 and "/scenarios/0/curve" in res.stderr, "dangling scenario curve is rejected")

# default output directory from the environment
env = dict(os.environ, NPTAILS_OUT=str(WORK / "from_env"))
res = run("model", "--config", SMALL, env=env)
check(res.returncode == 0 and (WORK / "from_env" / "model.csv").exists(), "NPTAILS_OUT sets the output directory")

# bundled Minkowski verification
res = run("verify", "--config", SRC / "configs" / "minkowski_huygens.json", "--out", WORK / "mink")
check(res.returncode == 0 and "verify: pass" in res.stdout, "minkowski_huygens verifies")
validate("verify.schema.json", WORK / "mink" / "verify.json")

validate("runconfig.schema.json", *sorted((SRC / "configs").glob("*.json")), SMALL)

print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
