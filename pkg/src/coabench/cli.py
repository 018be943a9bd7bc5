"""Command-line entry point.

Subcommands: encrypt, attack, evaluate, report (full pipeline), keyspace.
Exit codes: 0 success, 1 configuration error, 2 data error, 3 numerical
divergence during training.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__, kernels, pipeline
from .blockwise import keyspace_blockwise_bits, keyspace_blockwise_exact
from .errors import ConfigError, DataError, MissingN, NumericalDivergence
from .keyspace import crossover_int, crossover_real
from .pixelwise import keyspace_pixelwise_bits, keyspace_pixelwise_exact


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="coabench", description=__doc__)
    p.add_argument("--version", action="version", version=f"coabench {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add_pipeline_cmd(name, help_text):
        c = sub.add_parser(name, help=help_text)
        c.add_argument("--config", required=True, help="experiment config JSON")
        c.add_argument("--out", default="out", help="output directory")
        c.add_argument(
            "--seed-override",
            action="append",
            default=[],
            metavar="NAME=VALUE",
            help="override seeds.cipher / seeds.split / seeds.training",
        )
        c.add_argument("--fr-bits", type=int, default=None, help="override FR bit count L")
        c.add_argument(
            "--fr-leading-bit",
            choices=("0", "1", "both"),
            default=None,
            help="override FR target leading bit",
        )
        return c

    add_pipeline_cmd("encrypt", "encrypt the configured dataset, write key record")
    add_pipeline_cmd("attack", "run the configured attack on encrypted images")
    add_pipeline_cmd("evaluate", "score reconstructions, write report JSON+CSV")
    add_pipeline_cmd("report", "full encrypt -> attack -> evaluate pipeline")

    k = sub.add_parser("keyspace", help="print exact and log2 key-space sizes")
    k.add_argument("--scheme", required=True, choices=("pixelwise", "blockwise"))
    k.add_argument(
        "--n",
        default=None,
        help="pixel count for the pixel-wise scheme; accepts N or WxH",
    )
    return p


def _parse_n(value: str) -> int:
    if "x" in value:
        w, _, h = value.partition("x")
        return int(w) * int(h)
    return int(value)


def cmd_keyspace(args) -> None:
    if args.scheme == "pixelwise":
        if args.n is None:
            raise MissingN("pixel-wise key space needs --n (pixel count or WxH)")
        try:
            n = _parse_n(args.n)
        except ValueError:
            raise ConfigError(f"--n must be an integer or WxH, got {args.n!r}") from None
        if n < 1:
            raise ConfigError("--n must be >= 1")
        bits = keyspace_pixelwise_bits(n)
        # the exact value can run to many thousands of digits
        sys.set_int_max_str_digits(max(sys.get_int_max_str_digits(), int(bits) // 3 + 64))
        print(f"scheme: pixelwise, n = {n}")
        print(f"log2 keys: {bits:.4f}")
        print(f"exact: {keyspace_pixelwise_exact(n)}")
    else:
        print("scheme: blockwise")
        print(f"log2 keys: {keyspace_blockwise_bits():.4f}")
        print(f"exact: {keyspace_blockwise_exact()}")
    print(f"crossover: pixel-wise overtakes block-wise at n = {crossover_real():.4f}")
    print(f"smallest integer n with pixel-wise >= block-wise: {crossover_int()}")


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "keyspace":
            cmd_keyspace(args)
            return 0
        cfg = pipeline.load_config(args.config)
        pipeline.apply_seed_overrides(cfg, args.seed_override)
        if getattr(args, "fr_bits", None) is not None or getattr(args, "fr_leading_bit", None):
            if cfg["attack"]["kind"] != "fr":
                raise ConfigError("--fr-* flags only apply to the fr attack")
            if args.fr_bits is not None:
                cfg["attack"]["bits"] = args.fr_bits
            if args.fr_leading_bit is not None:
                cfg["attack"]["leading_bit"] = (
                    "both" if args.fr_leading_bit == "both" else int(args.fr_leading_bit)
                )
            pipeline.validate_config(cfg)
        out = Path(args.out)
        if args.command == "encrypt":
            pipeline.run_encrypt(cfg, out)
            print(f"encrypted dataset written to {out} (kernels: {kernels.BACKEND})")
        elif args.command == "attack":
            meta = pipeline.run_attack(cfg, out)
            print(f"attack {meta.get('kind')} artifacts written to {out}")
        elif args.command == "evaluate":
            report = pipeline.run_evaluate(cfg, out)
            agg = report["aggregate"]
            print(
                f"evaluated {agg['count']} images: mean ssim {agg['ssim_mean']:.4f}, "
                f"mean mse {agg['mse_mean']:.2f}"
            )
        else:
            report = pipeline.run_report(cfg, out)
            agg = report["aggregate"]
            print(
                f"report written to {out}/report.json: mean ssim {agg['ssim_mean']:.4f} "
                f"over {agg['count']} images"
            )
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericalDivergence as exc:
        print(f"numerical divergence: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
