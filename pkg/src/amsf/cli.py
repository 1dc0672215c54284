"""Thin command-line client for the fusion service.

Talks to an in-process copy of the service by default; pass --server URL to
target a running instance instead. Exit codes: 0 success, 1 config error,
2 I/O error, 3 numeric failure.

    amsf run --config cfg.ini [--out DIR] [--seed N]
    amsf ablate --config cfg.ini [--out DIR] [--seed N]
    amsf encode --prompt "mosaic art style" --out styles.emb
    amsf inspect styles.emb
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

import httpx

EXIT_CODES = {"config": 1, "io": 2, "numeric": 3}


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; 2 is reserved for I/O here.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CODES["config"])


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=300.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient
    from .service.app import app
    return TestClient(app)


def _post(client: httpx.Client, path: str, payload: dict) -> tuple[int, dict]:
    try:
        resp = client.post(path, json=payload)
    except httpx.HTTPError as exc:
        print(f"error (io): {exc}", file=sys.stderr)
        return EXIT_CODES["io"], {}
    if resp.status_code == 200:
        return 0, resp.json()
    try:
        body = resp.json()
    except ValueError:
        body = {}
    kind = body.get("error_kind")
    message = body.get("message") or json.dumps(body.get("detail")) or resp.text
    if kind not in EXIT_CODES:
        kind = "config" if resp.status_code in (400, 422) else "io"
    print(f"error ({kind}): {message}", file=sys.stderr)
    return EXIT_CODES[kind], {}


def _fmt(values) -> str:
    return ", ".join(f"{v:.4f}" for v in values)


def _cmd_run(client, args) -> int:
    code, summary = _post(client, "/experiments/run", {
        "config_path": args.config, "out_dir": args.out, "seed": args.seed,
    })
    if code:
        return code
    print(f"wrote {summary['trajectory_csv']}")
    print(f"wrote {summary['output_dir']}/summary.json")
    print(f"styles: {', '.join(summary['styles'])}")
    print(f"alignment: {_fmt(summary['per_style_alignment'])} "
          f"(HM {summary['harmonic_mean']:.4f})")
    if summary["mean_weights"] is not None:
        print(f"mean weights: {_fmt(summary['mean_weights'])} "
              f"subject {summary['mean_subject_weight']:.4f}")
    return 0


def _cmd_ablate(client, args) -> int:
    code, result = _post(client, "/experiments/ablate", {
        "config_path": args.config, "out_dir": args.out, "seed": args.seed,
    })
    if code:
        return code
    print(f"wrote {result['output_dir']}/ablation.json")
    for arm, record in result["arms"].items():
        print(f"{arm}: HM={record['harmonic_mean']:.4f} "
              f"alignment=[{_fmt(record['per_style_alignment'])}] "
              f"subject_rows={record['subject_rows']} "
              f"subject_mass={record['subject_attention_mass']:.4f}")
    return 0


def _cmd_encode(client, args) -> int:
    code, result = _post(client, "/embeddings/encode", {
        "prompt": args.prompt, "out_path": args.out, "name": args.name,
        "dim": args.dim, "tokens": args.tokens, "seed": args.seed,
    })
    if code:
        return code
    print(f"wrote {result['path']} "
          f"({result['name']}: {result['rows']}x{result['cols']} {result['kind']})")
    return 0


def _cmd_inspect(client, args) -> int:
    code, result = _post(client, "/embeddings/inspect", {"path": args.path})
    if code:
        return code
    print(f"{result['path']}: {len(result['records'])} record(s)")
    for record in result["records"]:
        print(f"  {record['name']}  {record['kind']}  "
              f"{record['rows']}x{record['cols']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="amsf", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--server", default=None,
                        help="base URL of a running service "
                             "(default: in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a fusion experiment")
    run_p.add_argument("--config", required=True, help="experiment config file")
    run_p.add_argument("--out", default=None, help="output directory")
    run_p.add_argument("--seed", type=int, default=None, help="base seed override")
    run_p.set_defaults(func=_cmd_run)

    ablate_p = sub.add_parser("ablate", help="run the four-arm ablation suite")
    ablate_p.add_argument("--config", required=True, help="experiment config file")
    ablate_p.add_argument("--out", default=None, help="output directory")
    ablate_p.add_argument("--seed", type=int, default=None, help="base seed override")
    ablate_p.set_defaults(func=_cmd_ablate)

    encode_p = sub.add_parser("encode", help="toy-encode a prompt to an "
                                             "embedding interchange file")
    encode_p.add_argument("--prompt", required=True)
    encode_p.add_argument("--out", required=True, help="output embedding file")
    encode_p.add_argument("--name", default=None, help="record name (default: prompt)")
    encode_p.add_argument("--dim", type=int, default=32)
    encode_p.add_argument("--tokens", type=int, default=4)
    encode_p.add_argument("--seed", type=int, default=0)
    encode_p.set_defaults(func=_cmd_encode)

    inspect_p = sub.add_parser("inspect", help="validate and describe an "
                                               "embedding interchange file")
    inspect_p.add_argument("path", help="embedding file")
    inspect_p.set_defaults(func=_cmd_inspect)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    with _client(args.server) as client:
        return args.func(client, args)


if __name__ == "__main__":
    sys.exit(main())
