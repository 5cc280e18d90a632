"""Stand-in for the differential oracle that speaks the verdict protocol.

It does not execute anything: stored traces are compared with themselves.
FAKE_ORACLE_MODE selects a behaviour: match (default), mismatch, garbage,
crash or short.
"""
import argparse
import json
import os
import sys


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("command", choices=["diff"])
    parser.add_argument("--dataset", required=True)
    parser.add_argument("--samples", type=int, required=True)
    parser.add_argument("--pool-exemplars", type=int, default=2)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    mode = os.environ.get("FAKE_ORACLE_MODE", "match")
    if mode == "crash":
        sys.exit(3)

    with open(args.dataset) as f:
        records = [json.loads(line) for line in f if line.strip()]
    instances = [r for r in records if r.get("type") != "header"][: args.samples]
    if mode == "short" and instances:
        instances = instances[:-1]

    checked = matched = 0
    for n, inst in enumerate(instances):
        exemplars = [("test", 0, inst["test"]["trace_lines"])]
        for i, ex in enumerate(inst["exemplars"][: args.pool_exemplars]):
            exemplars.append(("pool", i, ex["trace_lines"]))
        out = []
        for kind, index, lines in exemplars:
            ok = not (mode == "mismatch" and n == 0 and kind == "test")
            entry = {"kind": kind, "index": index, "match": ok, "divergence": None, "error": None}
            if not ok:
                entry["divergence"] = {"step": 2, "oracle": lines[2] + "0", "interpreter": lines[2]}
            checked += 1
            matched += ok
            out.append(entry)
        print(json.dumps({"type": "verdict", "instance_id": inst["id"], "exemplars": out}))
        if mode == "garbage":
            print("this is not json")
    rate = matched / checked if checked else 1.0
    print(json.dumps({"type": "summary", "samples": len(instances),
                      "exemplars_checked": checked, "matched": matched, "match_rate": rate}))


if __name__ == "__main__":
    main()
