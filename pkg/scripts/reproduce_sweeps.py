"""Backoff sweeps for the built-in scenarios, written as one CSV per scenario."""

import argparse
from pathlib import Path

from ctmn import scenarios
from ctmn.cli import main


def run(out_dir: Path, points: int) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for sid in scenarios.ScenarioId:
        path = out_dir / f"sweep_{sid.value}.csv"
        main(["sweep", "--scenario", sid.value, "--points", str(points), "--output", str(path)])
        print(f"wrote {path}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("results"))
    parser.add_argument("--points", type=int, default=50)
    args = parser.parse_args()
    run(args.out, args.points)
