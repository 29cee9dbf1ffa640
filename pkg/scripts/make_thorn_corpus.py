#!/usr/bin/env python3
"""Write a synthetic thorn source tree plus manifest to a directory.

Usage:
    python3 scripts/make_thorn_corpus.py /tmp/corpus            # 135 thorns
    python3 scripts/make_thorn_corpus.py /tmp/fixture --closure # 20 thorns
"""

import argparse

from fluidtag import corpus


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("target", help="directory to write the tree into")
    parser.add_argument("--closure", action="store_true",
                        help="write the 20-thorn dependency fixture instead")
    parser.add_argument("--seed", type=int, default=2718)
    args = parser.parse_args()

    specs = corpus.closure_specs() if args.closure else corpus.toolkit_specs(args.seed)
    manifest = corpus.write_corpus(args.target, specs)
    print(f"wrote {len(specs)} thorns under {args.target}")
    print(f"manifest: {manifest}")


if __name__ == "__main__":
    main()
