"""End-to-end checks of the skewsn command-line tool: outputs, formats and exit codes."""

import csv
import json
import math
import pathlib
import subprocess
import sys

BIN, CONFIGS, OUT = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
failures = []


def run(*args):
    return subprocess.run([BIN, *args], capture_output=True, text=True)


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    if not cond:
        failures.append(what)


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# graphs at beta = 0.275: two 2000-row CSVs plus a pinching report with the config embedded
r = run("graphs", "--config", str(CONFIGS / "example1.json"), "--out", str(OUT / "g"))
check(r.returncode == 0, "graphs exits 0")
lower, upper = rows(OUT / "g" / "lower.csv"), rows(OUT / "g" / "upper.csv")
check(len(lower) == 2000 and len(upper) == 2000, "graphs writes 2000 rows per side")
check(list(upper[0].keys()) == ["theta1", "value", "escaped"], "graph CSV header")
check(all(float(u["value"]) >= float(l["value"]) for u, l in zip(upper, lower)), "upper above lower")
rep = json.loads((OUT / "g" / "pinching.json").read_text())
check(rep["n_samples"] == 2000 and "config" in rep and rep["config"]["beta"] == 0.275,
      "pinching JSON embeds the resolved config")
check(len(upper[1]["theta1"].replace("0.", "", 1).lstrip("0")) >= 16, "17 significant digits")

# beta = 1: everything escapes, warning on stderr, still exit 0
r = run("graphs", "--config", str(CONFIGS / "example1.json"), "--beta", "1", "--samples", "100",
        "--out", str(OUT / "g1"))
check(r.returncode == 0 and "warning" in r.stderr, "beta=1 warns and exits 0")
check(all(row["escaped"] == "1" and row["value"] == "" for row in rows(OUT / "g1" / "upper.csv")),
      "beta=1 upper graph fully escaped")

# 2D graphs at the M1 bifurcation: the gap minimum sits on M1
r = run("graphs", "--config", str(CONFIGS / "example2.json"), "--samples", "1600", "--depth", "2000",
        "--beta", "0.18556508", "--out", str(OUT / "g2"))
rep = json.loads((OUT / "g2" / "pinching.json").read_text())
am = rep["argmin"]
check(r.returncode == 0 and min(math.dist(am, p) for p in ([0.25, 0.25], [0.75, 0.75])) < 0.03,
      f"2D gap minimum near M1 (argmin {am})")

# betac restricted to M1
r = run("betac", "--config", str(CONFIGS / "example2.json"), "--restrict", "M1", "--tol", "1e-8",
        "--out", str(OUT / "b"))
res = json.loads(r.stdout) if r.returncode == 0 else {}
check(abs(res.get("beta_c", 0) - 0.1855650809) < 1e-6, "betac on M1 within 1e-6 of 0.1855650809")
check(res.get("restricted_to") == "M1" and "config" in res, "betac JSON fields")

# oracle
r = run("oracle", "--alpha", "100", "--offset", "1", "--out", str(OUT / "o"))
res = json.loads(r.stdout)
check(abs(res["beta_c_closed_form"] - 0.1855650809) < 1e-9, "oracle closed form")
check(abs(res["beta_c_newton"] - res["beta_c_closed_form"]) < 1e-12, "oracle Newton agrees")

# sweep over [0.26, 0.28]: 21 rows, gap decreasing while defined
r = run("sweep", "--config", str(CONFIGS / "example1.json"), "--beta-grid", "0.26", "0.28", "21",
        "--samples", "400", "--depth", "3000", "--lyap-steps", "3000", "--out", str(OUT / "s"))
sw = rows(OUT / "s" / "sweep.csv")
gaps = [float(x["min_gap"]) for x in sw if x["min_gap"]]
check(r.returncode == 0 and len(sw) == 21, "sweep writes 21 rows")
check(all(a > b for a, b in zip(gaps, gaps[1:])) and len(gaps) >= 15, "sweep gap decreasing")
check(sw[-1]["lambda_upper"] == "" and sw[-1]["fraction_bounded"] == "0", "empty cells past beta_c")

r = run("sweep", "--config", str(CONFIGS / "example1.json"), "--beta-grid", "0.26", "0.27", "3",
        "--samples", "50", "--depth", "500", "--format", "json", "--out", str(OUT / "sj"))
sj = json.loads((OUT / "sj" / "sweep.json").read_text())
check(len(sj["rows"]) == 3 and "config" in sj, "sweep JSON")

# lyap
r = run("lyap", "--config", str(CONFIGS / "example1.json"), "--beta", "0.2653743",
        "--out", str(OUT / "l"))
res = json.loads(r.stdout)
check(res["lambda_upper"] < -0.05 and res["lambda_lower"] > 0.05, "lyap signs")

# flowmap
r = run("flowmap", "--config", str(CONFIGS / "flow_quadratic.json"), "--out", str(OUT / "f"))
fm = rows(OUT / "f" / "flowmap.csv")
check(r.returncode == 0 and len(fm) == 16 * 41, "flowmap CSV rows")
check(all(float(x["deriv_x"]) > 0 for x in fm if x["deriv_x"]), "flowmap increasing")

# exit codes
check(run("graphs", "--beta", "abc").returncode == 2, "bad flag value exits 2")
check(run("betac", "--config", str(OUT / "missing.json")).returncode == 2, "missing config exits 2")
check(run("graphs", "--out", str(OUT / "x")).returncode == 2, "graphs without beta exits 2")
check(run("betac", "--restrict", "M1", "--out", str(OUT / "x")).returncode == 2,
      "restrict on a rotation base exits 2")
check(run("lyap", "--beta", "0.6", "--depth", "1000", "--out", str(OUT / "x")).returncode == 3,
      "escaped Lyapunov exits 3")
check(run("oracle", "--alpha", "0.5", "--out", str(OUT / "x")).returncode == 3,
      "oracle outside its domain exits 3")
bad_flow = OUT / "bad_flow.json"
bad_flow.parent.mkdir(parents=True, exist_ok=True)
bad_flow.write_text(json.dumps({"flow": {"field": "linear", "t0": 1.0, "rho_flow": 0.6}, "beta": 0.1}))
check(run("flowmap", "--config", str(bad_flow), "--out", str(OUT / "x")).returncode == 3,
      "flow without curvature exits 3")

print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
