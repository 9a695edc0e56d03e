"""Download the UCI Mushroom and Adult datasets as headered CSV files.

The raw UCI files have no header row and (for Adult) assorted whitespace
and formatting quirks; this script normalizes both into the shape the
shipped schemas in configs/ expect. Network access required.
"""

import argparse
import sys
import urllib.request
from pathlib import Path

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"

MUSHROOM_COLUMNS = [
    "class",
    "cap-shape",
    "cap-surface",
    "cap-color",
    "bruises",
    "odor",
    "gill-attachment",
    "gill-spacing",
    "gill-size",
    "gill-color",
    "stalk-shape",
    "stalk-root",
    "stalk-surface-above-ring",
    "stalk-surface-below-ring",
    "stalk-color-above-ring",
    "stalk-color-below-ring",
    "veil-type",
    "veil-color",
    "ring-number",
    "ring-type",
    "spore-print-color",
    "population",
    "habitat",
]

ADULT_COLUMNS = [
    "age",
    "workclass",
    "fnlwgt",
    "education",
    "education-num",
    "marital-status",
    "occupation",
    "relationship",
    "race",
    "sex",
    "capital-gain",
    "capital-loss",
    "hours-per-week",
    "native-country",
    "income",
]


def fetch_text(url: str) -> str:
    print(f"fetching {url}")
    with urllib.request.urlopen(url) as resp:
        return resp.read().decode("utf-8", errors="replace")


def write_mushroom(dest: Path) -> None:
    text = fetch_text(f"{UCI}/mushroom/agaricus-lepiota.data")
    lines = [",".join(MUSHROOM_COLUMNS)]
    for line in text.splitlines():
        line = line.strip()
        if line:
            lines.append(line)
    out = dest / "mushroom.csv"
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {out} ({len(lines) - 1} rows)")


def adult_rows(text: str) -> list[str]:
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("|"):
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != len(ADULT_COLUMNS):
            continue
        # the test split suffixes labels with a period
        fields[-1] = fields[-1].rstrip(".")
        rows.append(",".join(fields))
    return rows


def write_adult(dest: Path) -> None:
    rows = adult_rows(fetch_text(f"{UCI}/adult/adult.data"))
    rows += adult_rows(fetch_text(f"{UCI}/adult/adult.test"))
    out = dest / "adult.csv"
    out.write_text(",".join(ADULT_COLUMNS) + "\n" + "\n".join(rows) + "\n", encoding="utf-8")
    print(f"wrote {out} ({len(rows)} rows)")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--dest", default="data", help="output directory (default: data/)"
    )
    parser.add_argument(
        "--only",
        choices=("mushroom", "adult"),
        default=None,
        help="fetch a single dataset",
    )
    args = parser.parse_args(argv)
    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)
    if args.only in (None, "mushroom"):
        write_mushroom(dest)
    if args.only in (None, "adult"):
        write_adult(dest)
    return 0


if __name__ == "__main__":
    sys.exit(main())
