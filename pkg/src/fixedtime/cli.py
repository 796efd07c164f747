"""Command-line client for the redesign service.

The CLI talks to the HTTP API. Without ``--server`` it mounts the service
in-process (same endpoints, no socket); with ``--server URL`` it targets a
running instance. ``--serve`` starts the service under uvicorn.

Exit codes: 0 success / all checks passed, 1 a verification check failed,
2 usage, schema or domain errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

__all__ = ["main"]

_SUITES = ("profiles", "equivalence", "ubst", "gains", "lyapunov", "lemma4", "all")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fixedtime",
        description="Prescribed settling-time redesign: run bundled examples, "
                    "custom scenarios and verification suites.",
    )
    mode = ap.add_mutually_exclusive_group(required=True)
    mode.add_argument("--example", type=int, choices=(1, 2, 3),
                      help="run a bundled reproduction scenario")
    mode.add_argument("--scenario", metavar="PATH",
                      help="run a scenario JSON file")
    mode.add_argument("--verify", choices=_SUITES, metavar="SUITE",
                      help="run a verification suite "
                           f"({', '.join(_SUITES)})")
    mode.add_argument("--differentiate", metavar="CSV",
                      help="batch-differentiate a t,y CSV file "
                           "(needs --scenario-config)")
    mode.add_argument("--serve", action="store_true",
                      help="start the HTTP service")
    ap.add_argument("--noise", action="store_true",
                    help="add the bundled measurement noise to the example run")
    ap.add_argument("--scenario-config", metavar="PATH",
                    help="differentiator-mode scenario JSON for --differentiate")
    ap.add_argument("--out", metavar="DIR", default=".",
                    help="output directory (default: current directory)")
    ap.add_argument("--h", type=float, default=None, help="override the base step")
    ap.add_argument("--stride", type=int, default=None, help="override the output stride")
    ap.add_argument("--horizon", type=float, default=None, help="override the horizon")
    ap.add_argument("--server", metavar="URL", default=None,
                    help="target a running service instead of in-process execution")
    ap.add_argument("--port", type=int, default=8000, help="port for --serve")
    ap.add_argument("--host", default="127.0.0.1", help="bind address for --serve")
    return ap


class _Client:
    """Minimal HTTP client; embedded ASGI transport unless --server is given."""

    def __init__(self, server: str | None):
        if server is None:
            from fastapi.testclient import TestClient

            from .service import app
            self._client = TestClient(app)
        else:
            import httpx
            self._client = httpx.Client(base_url=server, timeout=None)

    def post(self, path: str, payload: dict) -> dict:
        resp = self._client.post(path, json=payload)
        if resp.status_code != 200:
            try:
                detail = resp.json().get("detail", resp.text)
            except Exception:
                detail = resp.text
            raise _RequestFailed(resp.status_code, detail)
        return resp.json()


class _RequestFailed(Exception):
    def __init__(self, status: int, detail):
        super().__init__(f"HTTP {status}: {detail}")
        self.status = status
        self.detail = detail


def _write(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_run(out_dir: str, name: str, body: dict) -> None:
    _write(os.path.join(out_dir, f"{name}.csv"), body["csv"])
    _write(os.path.join(out_dir, f"{name}_report.json"),
           json.dumps(body["report"], indent=2, sort_keys=True) + "\n")
    _write(os.path.join(out_dir, f"{name}_scenario.json"),
           json.dumps(body["scenario"], indent=2) + "\n")
    print(f"wrote {name}.csv, {name}_report.json, {name}_scenario.json in {out_dir}")


def _overrides(args) -> dict:
    out = {}
    for key in ("h", "stride", "horizon"):
        value = getattr(args, key)
        if value is not None:
            out[key] = value
    return out


def _print_suite(report: dict, indent: str = "") -> None:
    if "suites" in report:
        for sub in report["suites"]:
            _print_suite(sub, indent)
        return
    for check in report["checks"]:
        mark = "PASS" if check["passed"] else "FAIL"
        print(f"{indent}[{mark}] {report['suite']}::{check['name']}")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.serve:
        import uvicorn

        from .service import app
        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    try:
        client = _Client(args.server)
        if args.example is not None:
            payload = {"example": args.example, "noise": args.noise, **_overrides(args)}
            body = client.post("/examples/run", payload)
            name = f"example{args.example}" + ("_noisy" if args.noise else "")
            _dump_run(args.out, name, body)
            return 0
        if args.scenario is not None:
            with open(args.scenario) as fh:
                scenario = json.load(fh)
            for key, value in _overrides(args).items():
                if key == "stride":
                    scenario["stride"] = value
                elif key == "horizon":
                    scenario["horizon"] = value
                else:
                    scenario.setdefault("step", {})["h"] = value
            body = client.post("/simulate", {"scenario": scenario})
            _dump_run(args.out, scenario.get("name", "scenario"), body)
            return 0
        if args.differentiate is not None:
            if not args.scenario_config:
                print("--differentiate needs --scenario-config", file=sys.stderr)
                return 2
            with open(args.scenario_config) as fh:
                scenario = json.load(fh)
            with open(args.differentiate) as fh:
                csv_text = fh.read()
            body = client.post("/differentiate", {"scenario": scenario, "csv": csv_text})
            name = scenario.get("name", "differentiate")
            _write(os.path.join(args.out, f"{name}_estimates.csv"), body["csv"])
            _write(os.path.join(args.out, f"{name}_report.json"),
                   json.dumps(body["report"], indent=2, sort_keys=True) + "\n")
            print(f"wrote {name}_estimates.csv, {name}_report.json in {args.out}")
            return 0
        body = client.post("/verify", {"suite": args.verify})
        _print_suite(body["report"])
        _write(os.path.join(args.out, f"verify_{args.verify}.json"),
               json.dumps(body["report"], indent=2, sort_keys=True) + "\n")
        print(f"wrote verify_{args.verify}.json in {args.out}")
        return 0 if body["passed"] else 1
    except _RequestFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
