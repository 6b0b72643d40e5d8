"""Command line entry point for the scoring sidecar."""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .scoring import DEFAULT_MODEL, MlmScorer, SidecarConfig, StubScorer
from .serve import serve


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="erseg-sidecar",
        description="Serve masked-LM punctuation gap scores over stdin/stdout.",
    )
    parser.add_argument("--version", action="version",
                        version=f"erseg-sidecar {__version__}")
    parser.add_argument("--model", default=DEFAULT_MODEL,
                        help="fill-mask model identifier")
    parser.add_argument("--punct", default=". , ; : ! ?",
                        help="space-separated punctuation symbols to sum over")
    parser.add_argument("--device", default=None,
                        help="inference device, e.g. cpu or cuda:0")
    parser.add_argument("--batch-size", type=int, default=16)
    parser.add_argument("--stub", action="store_true",
                        help="serve formula scores instead of model scores")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.stub:
        scorer = StubScorer()
    else:
        try:
            config = SidecarConfig(
                model=args.model,
                punct=tuple(args.punct.split()),
                device=args.device,
                batch_size=args.batch_size,
            )
            scorer = MlmScorer(config)
        except Exception as exc:
            # the peer reads stdout: report the load failure in-protocol
            sys.stdout.write(json.dumps(
                {"type": "error", "id": None,
                 "message": f"model load failed: {exc}"}
            ) + "\n")
            sys.stdout.flush()
            print(f"error: {exc}", file=sys.stderr)
            return 2
    return serve(sys.stdin, sys.stdout, scorer)


if __name__ == "__main__":
    raise SystemExit(main())
