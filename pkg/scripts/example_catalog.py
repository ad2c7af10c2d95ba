"""Level sets r = const of dr^2 + sin^2 r dphi^2 + (1 + eps cos 4r)^2 dtheta^2.

Prints the type of each level set (sign of its second fundamental form) and
the minimum scalar curvature over a band, for a few values of eps.
"""

import argparse

from collar.cli import render_text
from collar.pipeline import verify_examples


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.0025, 0.005, 0.01, 0.02])
    args = ap.parse_args()
    for eps in args.eps:
        print(render_text(verify_examples(eps=eps)))


if __name__ == "__main__":
    main()
