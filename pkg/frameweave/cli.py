import argparse
import logging
import sys
from typing import Optional, Sequence

from dotenv import load_dotenv

from .config import ALLOWED_COMMANDS, load_config
from .errors import FrameweaveError
from .orchestrator import STATUS_ERROR, run


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="frameweave",
        description="Frame bounds, weaving certificates and reconstruction experiments.",
        epilog="commands: " + ", ".join(sorted(ALLOWED_COMMANDS)),
    )
    # validated against ALLOWED_COMMANDS by load_config so unknown commands exit 1
    ap.add_argument("command", type=str)
    ap.add_argument("--config", type=str, default=None)
    ap.add_argument("--out", type=str, default=None)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--grid", type=int, default=None)
    ap.add_argument("--verbose", "-v", action="store_true")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> None:
    load_dotenv()

    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on bad usage; 2 is reserved for "not certified"
        raise SystemExit(STATUS_ERROR if e.code else 0)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        cfg = load_config(args.command, args.config, out=args.out, seed=args.seed, grid=args.grid)
        outcome = run(cfg)
    except FrameweaveError as e:
        print(f"error: {e}", file=sys.stderr)
        raise SystemExit(STATUS_ERROR)

    print(outcome.summary)
    raise SystemExit(outcome.status)
