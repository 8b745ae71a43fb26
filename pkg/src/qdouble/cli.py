"""Command-line client for the experiment service.

By default requests go to the app in-process; ``--url`` sends them to a
running server instead (start one with ``qdl serve``).

Exit codes: 0 every check passed, 1 a check failed, 2 configuration error,
3 support budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings

from pydantic import ValidationError

from .harness import dumps
from .service.schemas import ExperimentConfig

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_BUDGET = 0, 1, 2, 3


def _common(p):
    p.add_argument("--config", metavar="FILE", help="JSON experiment config")
    p.add_argument("--out", metavar="FILE", help="write the report here instead of stdout")
    p.add_argument("--seed", type=int, metavar="N")
    p.add_argument("--support-cap", type=int, metavar="N", dest="support_cap")
    p.add_argument("--tolerance", type=float, metavar="X")
    p.add_argument("--url", help="base URL of a running service")


def build_parser():
    parser = argparse.ArgumentParser(prog="qdl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("vacuum", help="vacuum dimension on tori")
    p.add_argument("--group")
    p.add_argument("--torus", action="append", metavar="WxH")
    p = sub.add_parser("projectors", help="D(G) projector family and Peter-Weyl maps")
    p.add_argument("--group", action="append")
    p = sub.add_parser("ribbon-basis", help="group basis, deformation, commutation, W algebra")
    p.add_argument("--group", help="group for the basis orthogonality check")
    p.add_argument("--n-states", type=int, dest="n_states")
    p = sub.add_parser("braid", help="toric braiding phase")
    p.add_argument("--n", type=int)
    p.add_argument("--i", type=int)
    p.add_argument("--j", type=int)
    p.add_argument("--toric-suite", action="store_true", dest="toric_suite",
                   help="also run the Fourier reduction and walkthrough checks")
    p = sub.add_parser("teleport", help="toric and block teleportation")
    p.add_argument("--n", type=int, action="append")
    p.add_argument("--group", action="append")
    p = sub.add_parser("logical-qubit", help="D(S3) logical qubit")
    p.add_argument("--n-states", type=int, dest="n_states")
    p = sub.add_parser("hopf-verify", help="D(H) checks for a Hopf algebra")
    p.add_argument("--instance", action="append")
    p.add_argument("--quick", action="store_true", default=None)
    sub.add_parser("all", help="the acceptance suite")
    for name, p in sub.choices.items():
        _common(p)
    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


# flag name -> (params key, transform)
_PARAM_FLAGS = {
    "vacuum": {"group": ("group", None), "torus": ("tori", None)},
    "projectors": {"group": ("groups", None)},
    "ribbon-basis": {"group": ("basis_groups", lambda g: [g]), "n_states": ("n_states", None)},
    "braid": {"n": ("n", None), "i": ("i", None), "j": ("j", None),
              "toric_suite": ("toric_suite", lambda v: v or None)},
    "teleport": {"n": ("toric_n", None), "group": ("groups", None)},
    "logical-qubit": {"n_states": ("n_states", None)},
    "hopf-verify": {"instance": ("instances", None), "quick": ("quick", None)},
    "all": {},
}


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def load_config(args) -> ExperimentConfig:
    raw = {}
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(EXIT_CONFIG, f"cannot read config: {exc}") from None
        if not isinstance(raw, dict):
            raise CliError(EXIT_CONFIG, "config must be a JSON object")
        raw.pop("subcommand", None)
    for key in ("seed", "support_cap", "tolerance"):
        value = getattr(args, key)
        if value is not None:
            raw[key] = value
    params = dict(raw.get("params") or {})
    for flag, (key, fn) in _PARAM_FLAGS[args.command].items():
        value = getattr(args, flag, None)
        if fn is not None and value is not None:
            value = fn(value)
        if value is not None:
            params[key] = value
    raw["params"] = params
    try:
        config = ExperimentConfig.model_validate(raw)
        config.validated_params(args.command)
    except (ValidationError, ValueError) as exc:
        raise CliError(EXIT_CONFIG, f"invalid config: {exc}") from None
    return config


def check_threads():
    value = os.environ.get("QDL_THREADS")
    if value is None:
        return
    if not value.isdigit() or int(value) < 1:
        raise CliError(EXIT_CONFIG, f"QDL_THREADS must be a positive integer, got {value!r}")


def post(command, config: ExperimentConfig, url=None):
    body = config.model_dump(mode="json")
    if url:
        import httpx
        resp = httpx.post(f"{url.rstrip('/')}/run/{command}", json=body, timeout=None)
    else:
        with warnings.catch_warnings():
            # starlette nags about its httpx backend; it works fine here
            warnings.simplefilter("ignore")
            from fastapi.testclient import TestClient

        from .service.app import app
        with TestClient(app) as client:
            resp = client.post(f"/run/{command}", json=body)
    payload = resp.json()
    if resp.status_code == 200:
        return payload
    kind = payload.get("error") if isinstance(payload, dict) else None
    detail = payload.get("detail") if isinstance(payload, dict) else payload
    code = {"budget": EXIT_BUDGET, "check": EXIT_FAIL}.get(kind, EXIT_CONFIG)
    raise CliError(code, f"{kind or resp.status_code}: {detail}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        import uvicorn

        from .service.app import app
        uvicorn.run(app, host=args.host, port=args.port)
        return EXIT_OK
    try:
        check_threads()
        config = load_config(args)
        report = post(args.command, config, args.url)
    except CliError as exc:
        print(f"qdl: {exc}", file=sys.stderr)
        return exc.code
    text = dumps(report)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for rec in report["checks"]:
        mark = "PASS" if rec["passed"] else "FAIL"
        print(f"{mark} {rec['name']} dev={rec['max_deviation']:.3e}", file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
