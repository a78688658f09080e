#!/usr/bin/env python3
"""Convert the HIN-Datasets Yelp dump to the restruct dataset layout.

The dump holds tab-separated, 1-based .dat files:

    user_business.dat    user  business  rating
    user_user.dat        user  user      (weight)
    user_compliment.dat  user  compliment (weight)
    business_category.dat
    business_city.dat

The output directory receives 0-based rates.tsv, ratings.tsv, friend_of.tsv,
receives.tsv, belongs_to.tsv, located_in.tsv and node_counts.tsv, matching
data/yelp/schema.json.
"""

import argparse
import csv
import sys
from pathlib import Path

RELATIONS = {
    "rates": ("user_business.dat", "U", "B"),
    "friend_of": ("user_user.dat", "U", "U"),
    "receives": ("user_compliment.dat", "U", "O"),
    "belongs_to": ("business_category.dat", "B", "A"),
    "located_in": ("business_city.dat", "B", "I"),
}


def read_rows(path):
    with open(path, newline="") as f:
        for lineno, row in enumerate(csv.reader(f, delimiter="\t"), start=1):
            if not row or not row[0].strip():
                continue
            if len(row) < 2:
                sys.exit(f"{path}:{lineno}: expected at least two columns")
            src, dst = int(row[0]) - 1, int(row[1]) - 1
            if src < 0 or dst < 0:
                sys.exit(f"{path}:{lineno}: ids are expected to be 1-based")
            yield src, dst, row[2:]


def write_pairs(path, pairs):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, delimiter="\t", lineterminator="\n")
        w.writerows(sorted(pairs))


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("source", type=Path, help="directory with the .dat files")
    ap.add_argument("output", type=Path, help="directory to write the converted dataset to")
    args = ap.parse_args()

    args.output.mkdir(parents=True, exist_ok=True)
    counts = {t: 0 for t in "UBOAI"}
    for name, (filename, src_type, dst_type) in RELATIONS.items():
        pairs, ratings = set(), {}
        for src, dst, rest in read_rows(args.source / filename):
            pairs.add((src, dst))
            counts[src_type] = max(counts[src_type], src + 1)
            counts[dst_type] = max(counts[dst_type], dst + 1)
            if name == "rates":
                if not rest:
                    sys.exit(f"{filename}: rating column missing for ({src + 1}, {dst + 1})")
                ratings[(src, dst)] = int(float(rest[0]))
        write_pairs(args.output / f"{name}.tsv", pairs)
        if name == "rates":
            write_pairs(args.output / "ratings.tsv", [(s, d, r) for (s, d), r in ratings.items()])
        print(f"{name}: {len(pairs)} pairs")

    with open(args.output / "node_counts.tsv", "w") as f:
        for t, n in counts.items():
            f.write(f"{t}\t{n}\n")
    print("nodes: " + ", ".join(f"{t}={n}" for t, n in counts.items()))


if __name__ == "__main__":
    main()
