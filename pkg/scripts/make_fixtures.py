import argparse
from pathlib import Path

import numpy as np
import pandas as pd

from symchaos.config import FIXTURES_DIR
from symchaos.maps import henon_orbit, logistic_orbit


def logistic_fixture(n=5000, r=4.0, x0=0.3, n_transient=100):
    return logistic_orbit(r, x0, n, n_transient)


def henon_fixture(n=5000):
    return henon_orbit(n)


def sine_fixture(n=2000, omega=0.1):
    # irrational period: no sample repeats exactly
    return np.sin(omega * np.arange(n))


def write_series(values, path: Path, with_time=False):
    """One value per line, or (t, value) rows with a header when with_time is set."""
    path.parent.mkdir(parents=True, exist_ok=True)
    if with_time:
        frame = pd.DataFrame({"t": np.arange(values.size), "value": values})
        frame.to_csv(path, index=False, float_format="%.17g")
    else:
        pd.DataFrame({"value": values}).to_csv(path, index=False, header=False, float_format="%.17g")


def main():
    parser = argparse.ArgumentParser(description="Write CSV series fixtures")
    parser.add_argument("--output", type=Path, default=FIXTURES_DIR, help="Directory for the fixture CSVs")
    parser.add_argument("--length", type=int, default=5000, help="Samples per chaotic series")
    args = parser.parse_args()

    written = {
        "logistic.csv": logistic_fixture(args.length),
        "henon.csv": henon_fixture(args.length),
        "sine.csv": sine_fixture(),
    }
    for name, values in written.items():
        write_series(values, args.output / name)
    write_series(written["logistic.csv"], args.output / "logistic_timed.csv", with_time=True)

    print(f"✅ Wrote {len(written) + 1} fixtures to {args.output}")


if __name__ == "__main__":
    main()
