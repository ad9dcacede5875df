"""Batch command-line front-end.

The CLI is a thin client of the FastAPI service: each command builds a JSON
request and posts it to the app, in-process by default (no server needed) or
to a remote instance given ``--server`` / the ``CHAOS_BOUNDS_SERVER``
environment variable.  Exit codes: 0 success, 2 validation error, 3 numeric
failure, 64 unknown command.

JSON output is key-sorted, so byte-identical runs follow from identical
flags and seed once ``--no-meta`` drops the timestamp.  CSV column orders are
fixed per command (see ``_CSV_COLUMNS``).
"""

from __future__ import annotations

import argparse
import asyncio
import csv
import io
import json
import os
import sys

import httpx

COMMANDS = ("norm", "bound", "tail", "exp-bound", "poly", "empirical", "check", "report")

USAGE = """usage: chaos-bounds <command> [flags]

commands:
  norm       one mixed-norm estimate for a partition pair (--pair "P'|P")
  bound      structural moment sums (--side upper|lower|both|special|lq)
  tail       tail exponents for a grid of thresholds (--t ...)
  exp-bound  structural sum for exponential chaoses (lq spaces, q >= 2)
  poly       polynomial pipeline (--what bounds|expand|gradients)
  empirical  Monte-Carlo moment estimates (--sampler, --p, --samples)
  check      diagnostics: --what decoupling|hypercontractivity|alpha-plus|sandwich
  report     everything for one tensor, as a single document

common flags: --tensor PATH --poly PATH --pair STR --p F [F ...] --q F --K F
  --t F [F ...] --seed N --samples N --restarts N --out PATH
  --format json|csv --no-meta --server URL
"""

_CSV_COLUMNS = {
    "norm": ["value", "restarts_used", "saa_samples", "eval_samples", "stderr"],
    "bound": ["p", "side", "partition", "power", "value", "stderr"],
    "exp-bound": ["p", "side", "partition", "power", "value", "stderr"],
    "tail": ["t", "side", "partition", "value"],
    "empirical": ["p", "value", "ci_low", "ci_high", "samples", "seed"],
    "check": ["what", "key", "value"],
}


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgError(message)


def _build_parser(command: str) -> _Parser:
    p = _Parser(prog=f"chaos-bounds {command}", add_help=True)
    p.add_argument("--tensor", help="path to a tensor JSON file")
    p.add_argument("--poly", help="path to a polynomial JSON file")
    p.add_argument("--pair", help="partition pair string, e.g. \"{1}|{2},{3}\"")
    p.add_argument("--p", type=float, nargs="+", default=None)
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--K", type=float, default=None)
    p.add_argument("--t", type=float, nargs="+", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--saa-samples", type=int, default=256)
    p.add_argument("--eval-samples", type=int, default=4096)
    p.add_argument("--side", default="both",
                   choices=["upper", "lower", "both", "special", "lq"])
    p.add_argument("--what", default=None)
    p.add_argument("--sampler", default="decoupled",
                   choices=["decoupled", "undecoupled", "exponential", "exponential-gg"])
    p.add_argument("--calibration", type=float, default=1.0)
    p.add_argument("--full-m", action="store_true")
    p.add_argument("--bootstrap", action="store_true",
                   help="bootstrap intervals instead of CLT (heavy tails)")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", default="json", choices=["json", "csv"])
    p.add_argument("--no-meta", action="store_true")
    p.add_argument("--server", default=None, help="remote service URL")
    return p


def _load_json(path: str, kind: str) -> dict:
    if path is None:
        raise _ArgError(f"--{kind} is required for this command")
    if not os.path.exists(path):
        raise _ArgError(f"{kind} file not found: {path}")
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise _ArgError(f"cannot parse {path}: {exc}") from exc


def _optimizer(args) -> dict:
    return {
        "restarts": args.restarts,
        "saa_samples": args.saa_samples,
        "eval_samples": args.eval_samples,
        "seed": args.seed,
    }


def _build_request(command: str, args) -> tuple[str, dict]:
    if command == "norm":
        if not args.pair:
            raise _ArgError("--pair is required for norm")
        return "/norm", {
            "tensor": _load_json(args.tensor, "tensor"),
            "pair": args.pair,
            "config": _optimizer(args),
        }
    if command == "bound":
        body = {
            "tensor": _load_json(args.tensor, "tensor"),
            "p": args.p or [2.0],
            "side": args.side,
            "calibration": args.calibration,
            "config": _optimizer(args),
        }
        if args.q is not None:
            body["q"] = args.q
        if args.K is not None:
            body["K"] = args.K
        return "/bound", body
    if command == "tail":
        if not args.t:
            raise _ArgError("--t is required for tail")
        return "/tail", {
            "tensor": _load_json(args.tensor, "tensor"),
            "t": args.t,
            "config": _optimizer(args),
        }
    if command == "exp-bound":
        body = {
            "tensor": _load_json(args.tensor, "tensor"),
            "p": args.p or [2.0],
            "full_m": args.full_m,
            "config": _optimizer(args),
        }
        if args.q is not None:
            body["q"] = args.q
        return "/exp-bound", body
    if command == "poly":
        body = {
            "poly": _load_json(args.poly, "poly"),
            "what": args.what or "bounds",
            "p": args.p or [2.0],
            "t": args.t or [],
            "config": _optimizer(args),
        }
        if args.q is not None:
            body["q"] = args.q
        if args.K is not None:
            body["K"] = args.K
        return "/poly", body
    if command == "empirical":
        return "/empirical", {
            "tensor": _load_json(args.tensor, "tensor"),
            "sampler": args.sampler,
            "p": args.p or [2.0],
            "samples": args.samples,
            "seed": args.seed,
            "bootstrap": args.bootstrap,
        }
    if command == "check":
        if args.what not in ("decoupling", "hypercontractivity", "alpha-plus", "sandwich"):
            raise _ArgError(
                "--what must be decoupling, hypercontractivity, alpha-plus or sandwich"
            )
        return "/check", {
            "tensor": _load_json(args.tensor, "tensor"),
            "what": args.what,
            "p": (args.p or [2.0])[0],
            "q": args.q if args.q is not None else 4.0,
            "samples": args.samples,
            "seed": args.seed,
            "config": _optimizer(args),
        }
    # report
    return "/report", {
        "tensor": _load_json(args.tensor, "tensor"),
        "p": args.p or [2.0, 4.0],
        "t": args.t or [],
        "samples": args.samples,
        "seed": args.seed,
        "calibration": args.calibration,
        "config": _optimizer(args),
    }


def _post(path: str, body: dict, server: str | None) -> httpx.Response:
    server = server or os.environ.get("CHAOS_BOUNDS_SERVER")
    if server:
        with httpx.Client(base_url=server, timeout=600.0) as client:
            return client.post(path, json=body)

    async def go():
        from .service import app

        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport,
                                     base_url="http://chaos-bounds",
                                     timeout=600.0) as client:
            return await client.post(path, json=body)

    return asyncio.run(go())


def _csv_rows(command: str, payload: dict) -> list[list]:
    if command == "norm":
        return [[payload[c] for c in _CSV_COLUMNS["norm"]]]
    if command in ("bound", "exp-bound"):
        rows = []
        for rep in payload["reports"]:
            for term in rep["terms"]:
                rows.append([rep["p"], rep["side"], term["label"], term["power"],
                             term["value"], term["stderr"]])
        return rows
    if command == "tail":
        rows = []
        for entry in payload["tails"]:
            for side in ("upper", "lower"):
                rep = entry[side]
                for term in rep["terms"]:
                    rows.append([entry["t"], side, term["label"], term["value"]])
                rows.append([entry["t"], side, "min", rep["exponent"]])
                if side == "upper":
                    rows.append([entry["t"], side, "threshold", rep["threshold"]])
        return rows
    if command == "empirical":
        return [
            [m["p"], m["value"], m["ci_low"], m["ci_high"], m["samples"], payload["seed"]]
            for m in payload["moments"]
        ]
    if command == "check":
        return [[payload["what"], k, v] for k, v in sorted(payload["result"].items())]
    raise _ArgError(f"csv output is not supported for {command}; use --format json")


def _render(command: str, payload: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"
    rows = _csv_rows(command, payload)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_CSV_COLUMNS[command])
    writer.writerows(rows)
    return buf.getvalue()


def run(argv) -> int:
    argv = list(argv)
    if not argv or argv[0] in ("-h", "--help"):
        sys.stdout.write(USAGE)
        return 0 if argv else 64
    command, rest = argv[0], argv[1:]
    if command not in COMMANDS:
        sys.stderr.write(f"unknown command: {command}\n\n{USAGE}")
        return 64
    try:
        args = _build_parser(command).parse_args(rest)
        path, body = _build_request(command, args)
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    except _ArgError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    try:
        resp = _post(path, body, args.server)
    except httpx.HTTPError as exc:
        sys.stderr.write(f"error: service unreachable: {exc}\n")
        return 3
    if resp.status_code != 200:
        try:
            detail = resp.json()
        except ValueError:
            detail = {"error": {"type": "unknown", "message": resp.text}}
        err = detail.get("error", {})
        kind = err.get("type", "validation" if resp.status_code == 422 else "numeric")
        message = err.get("message") or json.dumps(detail.get("detail", detail))
        sys.stderr.write(f"error ({kind}): {message}\n")
        return 2 if kind == "validation" else 3
    payload = resp.json()
    if args.no_meta:
        payload.pop("meta", None)
    try:
        text = _render(command, payload, args.format)
    except _ArgError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
