"""A tour of the command-line interface over the bundled data files.

Every subcommand reads a JSON description of a complex, cell structure,
gluing, exact sequence, or Laurent operator and emits a canonical report
(deterministic bytes for identical jobs).  This script drives the CLI the
way a shell user would and prints the key line of each report.
"""

import json
import pathlib
import subprocess
import sys

DATA = pathlib.Path(__file__).resolve().parent / "data"


def run(*args):
    proc = subprocess.run([sys.executable, "-m", "torsionlab", *args, "--json"],
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main():
    report = run("torsion", str(DATA / "circle_lambda_-1.json"))
    print("torsion circle_lambda_-1.json")
    print(f"  torsion        = {report['torsion']:.12f}   (log 2)")
    print(f"  route residual = {report['route_residual']:.2e}")

    report = run("hodge", str(DATA / "interval_tau2.json"))
    print("hodge interval_tau2.json")
    for row in report["degrees"]:
        print(f"  degree {row['degree']}: vn_dim = {row['vn_dim']:g}, "
              f"harmonic = {row['harmonic_vn_dim']:g}")

    report = run("glue-check", str(DATA / "glue_circle.json"))
    print("glue-check glue_circle.json")
    print(f"  t_comb   = {report['t_comb']:.12f}")
    print(f"  residual = {report['residual']:.2e}")

    report = run("ses-check", str(DATA / "ses_split.json"))
    print("ses-check ses_split.json")
    print(f"  torsion_middle = {report['torsion_middle']:.12f}   (log 6)")
    print(f"  residual       = {report['residual']:.2e}")

    report = run("duality-check", str(DATA / "circle_z3.json"))
    print("duality-check circle_z3.json")
    print(f"  torsion  = {report['torsion']:.12f}   ((log 3)/3)")
    print(f"  residual = {report['residual']:.2e}")

    report = run("lueck", "--op", "2 - t - t^-1", "--levels", "2..64")
    print("lueck --op '2 - t - t^-1' --levels 2..64")
    for row in report["levels"][-3:]:
        print(f"  m = {row['m']:3d}: level log det = {row['log_det']:.12f}")
    print(f"  circle integral = {report['fourier_log_det']:.2e}")

    report = run("product", str(DATA / "acyclic_complex.json"),
                 str(DATA / "acyclic_complex.json"))
    print("product acyclic_complex.json x itself")
    print(f"  torsion of product = {report['torsion_product']:.12f}")
    print(f"  residual           = {report['residual']:.2e}")


if __name__ == "__main__":
    main()
