"""Oneshot test worker: reads a point file, prints one response line.

With "--chatty" it prints extra log lines first; only the last line counts.
"""

import json
import sys


def main():
    path = sys.argv[-1]
    with open(path) as fh:
        doc = json.load(fh)
    if "--chatty" in sys.argv:
        print("starting up")
        print("loading data")
    val = sum(
        float(v) ** 2 for v in doc["x"].values()
        if isinstance(v, (int, float))
    )
    print(json.dumps({"objective": val}))


if __name__ == "__main__":
    main()
