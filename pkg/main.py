#!/usr/bin/env python3
"""
Pipeline runner.

    ./main.py --list                 list the walkthrough steps
    ./main.py --all                  run every step into --out
    ./main.py --step 4               run one step
    ./main.py analyze series.csv ... any symchaos subcommand, passed through
"""

import argparse
import sys
from pathlib import Path

from scripts import make_fixtures
from symchaos.cli import EXIT_OK, EXIT_WINDOWS, main as cli_main
from symchaos.config import FIXTURES_DIR, REFERENCE_MODEL_PATH

SUBCOMMANDS = {"analyze", "identify", "generate", "sweep", "compare"}


def pipeline_steps(out: Path):
    fx = FIXTURES_DIR
    return [
        ("Write CSV fixtures", ["fixtures"]),
        ("Tent-map sweep (robust reference)",
         ["sweep", "--family", "tent", "--lo", "1.1", "--hi", "1.9", "--steps", "81", "-o", str(out / "tent_sweep.csv")]),
        ("Logistic-map sweep (periodic windows)",
         ["sweep", "--family", "logistic", "--lo", "3.8", "--hi", "3.9", "--steps", "101", "--iters", "100000",
          "-o", str(out / "logistic_sweep.csv")]),
        ("Analyze the Henon series",
         ["analyze", str(fx / "henon.csv"), "-o", str(out / "henon_report.json"),
          "--divergence-out", str(out / "henon_divergence.csv")]),
        ("Generate from the bundled model",
         ["generate", str(REFERENCE_MODEL_PATH), "--steps", "10000", "--modulator", "p:0;breaks:2500,5000,7500;q:1,0.5,1.5,1",
          "-o", str(out / "generated.csv"), "--states-out", str(out / "states.json")]),
        ("Identify the model back from its states",
         ["identify", str(out / "states.json"), "-o", str(out / "identified_model.json")]),
        ("Compare the Henon series with the logistic series",
         ["compare", str(fx / "henon.csv"), str(fx / "logistic.csv"), "-o", str(out / "comparison.json")]),
    ]


def run_step(index, title, argv):
    print(f"\n▶️ Step {index}: {title}")
    if argv == ["fixtures"]:
        sys.argv = ["make_fixtures"]
        make_fixtures.main()
        return EXIT_OK
    return cli_main(argv)


def main():
    if len(sys.argv) > 1 and sys.argv[1] in SUBCOMMANDS:
        return cli_main(sys.argv[1:])

    parser = argparse.ArgumentParser(description="symchaos pipeline runner")
    parser.add_argument("--list", action="store_true", help="List the steps")
    parser.add_argument("--all", action="store_true", help="Run every step")
    parser.add_argument("--step", type=int, help="Run a single step")
    parser.add_argument("--from-step", type=int, default=1)
    parser.add_argument("--to-step", type=int, default=None)
    parser.add_argument("--out", type=Path, default=Path("output"), help="Directory for step outputs")
    args = parser.parse_args()

    steps = pipeline_steps(args.out)
    if args.list or not (args.all or args.step or args.to_step):
        for i, (title, _) in enumerate(steps, 1):
            print(f"{i}. {title}")
        return EXIT_OK

    args.out.mkdir(parents=True, exist_ok=True)
    if args.step:
        first = last = args.step
    else:
        first, last = args.from_step, args.to_step or len(steps)

    for i in range(first, last + 1):
        title, argv = steps[i - 1]
        code = run_step(i, title, argv)
        # a sweep that finds windows is an expected outcome in this walkthrough
        if code not in (EXIT_OK, EXIT_WINDOWS):
            print(f"❌ Step {i} failed with exit code {code}")
            return code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
