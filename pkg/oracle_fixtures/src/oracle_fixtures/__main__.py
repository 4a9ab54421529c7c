"""CLI: `python -m oracle_fixtures generate|verify [--out DIR] [--data CSV]`."""
import argparse
import sys

from . import DEFAULT_DATA, generate_all, verify


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="oracle-fixtures")
    parser.add_argument("command", choices=("generate", "verify"))
    parser.add_argument("--out", default="fixtures")
    parser.add_argument("--data", default=DEFAULT_DATA)
    args = parser.parse_args(argv)
    try:
        if args.command == "generate":
            for path in generate_all(args.out, args.data):
                print(f"wrote {path}")
            return 0
        drifted = verify(args.out, args.data)
    except Exception as exc:  # any reference failure must exit nonzero
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if drifted:
        for name in drifted:
            print(f"drift: {name}", file=sys.stderr)
        return 1
    print("fixtures clean")
    return 0


if __name__ == "__main__":
    sys.exit(main())
