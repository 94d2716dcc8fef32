#!/usr/bin/env python3
"""Runs `tmpredict compare` and `sweep` on a small synthetic dataset and
validates both report.json files against schemas/report.schema.json.

Usage: check_report.py <tmpredict binary> <schema> <work dir>
"""

import json
import pathlib
import shutil
import subprocess
import sys

import jsonschema


def run(*args):
    subprocess.run(list(args), check=True, stdout=subprocess.DEVNULL)


def main():
    binary, schema_path, work = sys.argv[1:4]
    work = pathlib.Path(work)
    shutil.rmtree(work, ignore_errors=True)
    work.mkdir(parents=True)
    schema = json.loads(pathlib.Path(schema_path).read_text())
    jsonschema.Draft202012Validator.check_schema(schema)

    run(binary, "synth", "--out", str(work / "data"), "--seed", "2", "--nodes", "3", "--slots", "50")
    (work / "run.conf").write_text(
        "manifest = data/manifest.conf\nseed = 3\nwindow = 4\nsplit.test = 10\n"
        "lstm.hidden_dim = 6\nlstm.layers = 1\ntrain.epochs = 2\nreport.vectors = true\n"
    )
    conf = str(work / "run.conf")
    run(binary, "compare", "--config", conf, "--out", str(work / "compare"))
    run(binary, "sweep", "--config", conf, "--depths", "1,2", "--out", str(work / "sweep"))

    validator = jsonschema.Draft202012Validator(schema)
    failures = 0
    for sub in ("compare", "sweep"):
        report = json.loads((work / sub / "report.json").read_text())
        errors = sorted(validator.iter_errors(report), key=lambda e: list(e.path))
        for e in errors:
            print(f"{sub}: {'/'.join(map(str, e.path))}: {e.message}")
        failures += len(errors)
        print(f"{sub}/report.json: {'valid' if not errors else 'INVALID'}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
