"""Print the eight single-photon detection branches for one configuration."""

import argparse

from stochamp.amplifier import AmplifierConfig, enumerate_single_photon_branches


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--r", type=float, default=0.4)
    args = ap.parse_args()

    branches, other = enumerate_single_photon_branches(AmplifierConfig.symmetric(args.alpha, args.r))
    print(f"{'state':>5} {'QND':>3} {'PD1':>3} {'PD2':>3} {'P':>11} {'|<a>|':>7} {'1-F':>10}")
    for i, b in enumerate(branches, 1):
        print(f"{i:>5} {b.qnd:>3} {b.pd1:>3} {b.pd2:>3} {b.probability:11.4e} {b.amplitude:7.4f} {b.fidelity_deficit:10.3e}")
    print(f"{'other':>5} {'':>11} {other:11.4e}")


if __name__ == "__main__":
    main()
