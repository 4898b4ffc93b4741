"""Argument parsing for the ``mfqe`` command line."""

import argparse
import sys
from typing import Tuple

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2

COMMANDS = (
    'analyze', 'label-pqf', 'extract-features', 'train-detector', 'detect', 'train-mfcnn',
    'enhance', 'evaluate', 'bdrate', 'benchmark', 'plot', 'make-fixture',
)


class UsageError(Exception):
    """Raised by the parser instead of exiting, carrying the usage text."""

    def __init__(self, message: str, usage: str):
        super().__init__(message)
        self.usage = usage


class Cli_Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors as exceptions (exit code 1)."""

    def error(self, message: str):
        raise UsageError(message, self.format_usage())


def resolution(value: str) -> Tuple[int, int]:
    """Parse ``WIDTHxHEIGHT``."""
    try:
        width, height = (int(part) for part in value.lower().split('x'))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WIDTHxHEIGHT, got {value!r}")
    if width <= 0 or height <= 0:
        raise argparse.ArgumentTypeError(f"resolution must be positive, got {value!r}")
    return width, height


def _size(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--w', '--width', dest='width', type=int, help='frame width (defaults to video.width)')
    parser.add_argument('--h', '--height', dest='height', type=int, help='frame height (defaults to video.height)')


def build_parser() -> Cli_Parser:
    """Build the top-level parser with one subparser per command."""
    parser = Cli_Parser(
        prog='mfqe',
        description='Multi-frame quality enhancement of compressed video.',
        epilog='Exit codes: 0 success, 1 invalid input or usage, 2 runtime failure.',
    )
    parser.add_argument('--config', help='YAML run configuration (default: $MFQE_CONFIG)')
    parser.add_argument('--seed', type=int, help='seed for every stochastic step')
    parser.add_argument('--log-level', choices=('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'),
                        type=str.upper, help='logging level (default: $MFQE_LOG_LEVEL or logging.level)')
    parser.add_argument('--device', help="torch device, e.g. 'cpu' or 'cuda:0'")
    parser.add_argument('--format', dest='output_format', choices=('text', 'yaml'), default='text',
                        help='report format on standard output')

    commands = parser.add_subparsers(dest='command', metavar='COMMAND')
    commands.required = True

    cmd = commands.add_parser('analyze', help='quality fluctuation and frame correlation of a compressed clip')
    cmd.add_argument('--raw', required=True)
    cmd.add_argument('--comp', required=True)
    _size(cmd)
    cmd.add_argument('--metric', choices=('PSNR', 'SSIM'), type=str.upper, default='PSNR')
    cmd.add_argument('--max-lag', type=int, default=10)

    cmd = commands.add_parser('label-pqf', help='write ground-truth PQF labels from the PSNR curve')
    cmd.add_argument('--raw', required=True)
    cmd.add_argument('--comp', required=True)
    _size(cmd)
    cmd.add_argument('--out', required=True, help='annotation file (frame_index,prob,label)')

    cmd = commands.add_parser('extract-features', help='write the 38-value detector features per frame')
    cmd.add_argument('--comp', required=True)
    cmd.add_argument('--meta', required=True)
    _size(cmd)
    cmd.add_argument('--out', required=True)
    cmd.add_argument('--workers', type=int)

    cmd = commands.add_parser('train-detector', help='train one PQF detector checkpoint')
    cmd.add_argument('--raw', required=True, nargs='+')
    cmd.add_argument('--comp', required=True, nargs='+')
    cmd.add_argument('--meta', required=True, nargs='+')
    _size(cmd)
    cmd.add_argument('--out', required=True, help='detector checkpoint')
    cmd.add_argument('--qp-tag', type=int, help='QP this detector is trained for')
    cmd.add_argument('--epochs', type=int)

    cmd = commands.add_parser('detect', help='annotate PQFs of a compressed clip')
    cmd.add_argument('--comp', required=True)
    cmd.add_argument('--meta', required=True)
    _size(cmd)
    cmd.add_argument('--detector', required=True)
    cmd.add_argument('--out', required=True, help='annotation file')
    cmd.add_argument('--raw', help='score the detection against ground truth from this raw clip')
    cmd.add_argument('--no-postprocess', action='store_true')

    cmd = commands.add_parser('train-mfcnn', help='train the non-PQF and PQF MF-CNNs')
    cmd.add_argument('--raw', required=True, nargs='+')
    cmd.add_argument('--comp', required=True, nargs='+')
    cmd.add_argument('--annotation', nargs='+', help='PQF labels per clip (default: ground truth)')
    _size(cmd)
    cmd.add_argument('--out-np', help='non-PQF model checkpoint')
    cmd.add_argument('--out-pqf', help='PQF model checkpoint')
    cmd.add_argument('--trace-prefix', help='write <prefix>_<target>.csv loss traces')
    cmd.add_argument('--stage1-max-steps', type=int)
    cmd.add_argument('--stage2-steps', type=int)
    cmd.add_argument('--batch-size', type=int)
    cmd.add_argument('--patch', type=int)

    cmd = commands.add_parser('enhance', help='enhance a compressed clip')
    cmd.add_argument('--comp', required=True)
    cmd.add_argument('--meta')
    _size(cmd)
    cmd.add_argument('--detector')
    cmd.add_argument('--mfcnn-np', required=True)
    cmd.add_argument('--mfcnn-pqf', required=True)
    cmd.add_argument('--out', required=True, help='enhanced YUV file')
    cmd.add_argument('--annotation', help='use these PQF labels instead of running the detector')
    cmd.add_argument('--annotation-out', help='write the labels that were used')
    cmd.add_argument('--raw', help='raw clip, for ground-truth labels')
    cmd.add_argument('--reference-mode', choices=('pqf', 'neighbor'))
    cmd.add_argument('--label-source', choices=('detector', 'ground_truth'))

    cmd = commands.add_parser('evaluate', help='delta PSNR/SSIM and fluctuation report')
    cmd.add_argument('--raw', required=True)
    cmd.add_argument('--comp', required=True)
    cmd.add_argument('--enhanced', required=True)
    _size(cmd)
    cmd.add_argument('--annotation', help='PQF labels used for enhancement (default: ground truth)')
    cmd.add_argument('--gt-annotation', help='ground-truth labels for detector scoring')

    cmd = commands.add_parser('bdrate', help='Bjontegaard delta rate between two RD curves')
    cmd.add_argument('--anchor', required=True, help='qp,rate,psnr file')
    cmd.add_argument('--test', required=True, help='qp,rate,psnr file')

    cmd = commands.add_parser('benchmark', help='enhancement throughput and model size')
    cmd.add_argument('--mfcnn-np')
    cmd.add_argument('--mfcnn-pqf')
    cmd.add_argument('--resolution', type=resolution, nargs='+', default=[(416, 240)])
    cmd.add_argument('--repeats', type=int)
    cmd.add_argument('--warmup', type=int)
    cmd.add_argument('--frames', type=int)

    cmd = commands.add_parser('plot', help='render curves, summaries, loss traces and motion fields')
    cmd.add_argument('--out-dir', required=True)
    cmd.add_argument('--raw')
    cmd.add_argument('--comp')
    cmd.add_argument('--enhanced')
    cmd.add_argument('--annotation')
    _size(cmd)
    cmd.add_argument('--trace', nargs='+', help='loss trace CSV files')
    cmd.add_argument('--mv', help='motion field file (two float32 planes)')
    cmd.add_argument('--max-lag', type=int, default=10)

    cmd = commands.add_parser('make-fixture', help='write a synthetic raw/comp/meta clip')
    cmd.add_argument('--out-dir', required=True)
    cmd.add_argument('--frames', type=int, default=10)
    _size(cmd)

    return parser


def print_usage_error(error: UsageError) -> None:
    sys.stderr.write(error.usage)
    sys.stderr.write(f"error: {error}\n")
