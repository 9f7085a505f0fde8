#!/usr/bin/env python3
"""
pfwgan command line.

    pfwgan train     --config run.json [--out DIR] [--seed N] [--deterministic] [--resume CKPT]
    pfwgan generate  --checkpoint CKPT --out synth.csv [--n N] [--seed N]
    pfwgan evaluate  --config run.json (--synth synth.csv | --checkpoint CKPT) [--real real.csv] [--plot-data]
    pfwgan plot-data REPORT [REPORT ...] --out DIR

Exit codes: 0 success, 1 unexpected error, 2 invalid configuration, 3 invalid data,
4 training fault, 5 I/O fault.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, NewType, Optional, Sequence, cast

from pfwgan.config import LoggingConfigMixin, RunConfig, load_config
from pfwgan.context import Context
from pfwgan.exceptions import ExitCode, PFWGANError, unexpected_error_handler
from pfwgan.pipeline import run_evaluate, run_generate, run_plot_data, run_train

__author__ = 'pfwgan'

logger = logging.getLogger(__name__)

Args = NewType('Args', argparse.Namespace)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='pfwgan', description='Privacy- and fairness-penalised tabular WGAN-GP')
    parser.add_argument('--debug', dest='debug', action='store_true', default=False, help='Enable debug logging')
    commands = parser.add_subparsers(dest='command', metavar='COMMAND')
    commands.required = True

    train = commands.add_parser('train', help='Train a generator from a run configuration')
    train.add_argument('--config', dest='config', type=Path, required=True, help='Run configuration (JSON or YAML)')
    train.add_argument('--out', dest='out', type=Path, default=None, help='Override the output directory')
    train.add_argument('--seed', dest='seed', type=int, default=None, help='Override the training seed')
    train.add_argument(
        '--deterministic', dest='deterministic', action='store_true', default=False, help='64-bit deterministic mode'
    )
    train.add_argument('--resume', dest='resume', type=Path, default=None, help='Continue from this checkpoint')

    generate = commands.add_parser('generate', help='Sample a synthetic CSV from a checkpoint')
    generate.add_argument('--checkpoint', dest='checkpoint', type=Path, required=True, help='Trained checkpoint')
    generate.add_argument('--out', dest='out', type=Path, required=True, help='Output CSV')
    generate.add_argument('--n', dest='n', type=int, default=None, help='Rows to generate (default: training size)')
    generate.add_argument('--seed', dest='seed', type=int, default=0, help='Sampling seed')
    generate.add_argument(
        '--deterministic', dest='deterministic', action='store_true', default=False, help='64-bit deterministic mode'
    )

    evaluate = commands.add_parser('evaluate', help='Evaluate synthetic data on utility, fairness and privacy')
    evaluate.add_argument('--config', dest='config', type=Path, required=True, help='Run configuration (JSON or YAML)')
    evaluate.add_argument('--synth', dest='synth', type=Path, default=None, help='Synthetic CSV to evaluate')
    evaluate.add_argument(
        '--checkpoint', dest='checkpoint', type=Path, default=None, help='Sample from this checkpoint'
    )
    evaluate.add_argument('--real', dest='real', type=Path, default=None, help='Override the real dataset path')
    evaluate.add_argument('--out', dest='out', type=Path, default=None, help='Override the output directory')
    evaluate.add_argument('--seed', dest='seed', type=int, default=None, help='Override the evaluation seed')
    evaluate.add_argument(
        '--deterministic', dest='deterministic', action='store_true', default=False, help='64-bit deterministic mode'
    )
    evaluate.add_argument(
        '--plot-data', dest='plot_data', action='store_true', default=False, help='Also write per-figure CSV files'
    )

    plot = commands.add_parser('plot-data', help='Merge evaluation reports into per-figure CSV files')
    plot.add_argument('reports', metavar='REPORT', type=Path, nargs='+', help='report.json files')
    plot.add_argument('--out', dest='out', type=Path, required=True, help='Output directory')
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> Args:
    return cast(Args, build_parser().parse_args(argv))


def _overrides(args: Args) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    if args.debug:
        overrides['debug'] = True
    if getattr(args, 'out', None) is not None:
        overrides['output_dir'] = str(args.out)
    if getattr(args, 'deterministic', False):
        overrides.setdefault('train', {})['deterministic'] = True
    seed = getattr(args, 'seed', None)
    if seed is not None and args.command == 'train':
        overrides.setdefault('train', {})['seed'] = seed
    return overrides


def make_context(args: Args) -> Context:
    if args.command in ('train', 'evaluate'):
        config = load_config(RunConfig, args.config, test_config=_overrides(args))
        if args.command == 'evaluate' and args.seed is not None:
            # the evaluation section may be spelled `eval` or `evaluation`, so set it on the parsed model
            config.evaluation.seed = args.seed
        return Context(config)
    return Context(LoggingConfigMixin(debug=args.debug), deterministic=getattr(args, 'deterministic', False))


def run(args: Args) -> List[Path]:
    ctx = make_context(args)
    if args.command == 'train':
        return [run_train(ctx, resume=args.resume)]
    if args.command == 'generate':
        return [run_generate(args.checkpoint, args.out, n=args.n, seed=args.seed)]
    if args.command == 'evaluate':
        return run_evaluate(ctx, synth=args.synth, checkpoint=args.checkpoint, real=args.real, plot=args.plot_data)
    return run_plot_data(args.reports, args.out)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parse_args(argv)
    try:
        paths = run(args)
    except PFWGANError as e:
        logger.error(f'{args.command} failed: {e.detail}')
        print(e.to_json(), file=sys.stderr)
        return e.exit_code
    except Exception as e:
        return unexpected_error_handler(e)
    for path in paths:
        print(path)
    return ExitCode.SUCCESS


if __name__ == '__main__':
    sys.exit(main())
