#!/usr/bin/env python3
"""Runs the CLI offline and validates the JSON reports against the schema."""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema


def run(cli, *args, expect):
    proc = subprocess.run([cli, *args], capture_output=True, text=True)
    if proc.returncode != expect:
        sys.exit(f"{' '.join(args[:2])}: exit {proc.returncode}, wanted {expect}\n{proc.stderr}")


def cross_check(report):
    s = report["summary"]
    results = report["results"]
    assert s["results"] == len(results)
    assert s["failed"] == len(report["failures"])
    assert s["risky"] == sum(r["is_risky"] for r in results)
    assert s["risky"] + s["non_risky"] == s["results"]
    for r in results:
        assert r["is_risky"] == (r["final_verdict"] != "ENTAIL")
        n = len(r["suggestions"]["suggestions"])
        assert sum(r["verdict_tally"].values()) == n
        assert all(1 <= int(c) <= n for c in r["votes"])
        if r["votes"]:
            assert sum(r["votes"].values()) + r["votes_discarded"] == r["n_vote_samples"]
        for p in r["retrieved_pairs"]:
            assert p["pair"]["checkpoint_text"] == r["checkpoint"]["text"]


def main():
    cli, fixtures, schema_path = sys.argv[1], Path(sys.argv[2]), Path(sys.argv[3])
    schema = json.loads(schema_path.read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    conf = str(fixtures / "mock.conf")

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        kb = str(tmp / "kb")
        run(cli, "kb", "ingest", kb, "--kind", "clauses", "--config", conf,
            "--input", str(fixtures / "clauses_48.csv"), expect=0)
        run(cli, "kb", "ingest", kb, "--kind", "pairs", "--config", conf,
            "--input", str(fixtures / "pairs_8.csv"), expect=0)

        checkpoints = tmp / "checkpoints.csv"
        checkpoints.write_text((fixtures / "checkpoints.csv").read_text()
                               + "3,Is the retention percentage stated?,Payment\n")
        reports = [("ok.json", str(fixtures / "checkpoints.csv"), 0),
                   ("partial.json", str(checkpoints), 3)]
        for name, cps, code in reports:
            out = tmp / name
            run(cli, "identify", kb, "--checkpoints", cps, "--mode", "both", "--config", conf,
                "--output", str(out), "--seed", "7", expect=code)
            report = json.loads(out.read_text())
            errors = sorted(validator.iter_errors(report), key=lambda e: list(e.path))
            for e in errors:
                print(f"{name}: {'/'.join(map(str, e.path))}: {e.message}")
            if errors:
                sys.exit(1)
            cross_check(report)
            print(f"{name}: valid, {len(report['results'])} results, "
                  f"{len(report['failures'])} failures")


if __name__ == "__main__":
    main()
