#!/usr/bin/env python3
"""
Link Simulator CLI
Runs Monte Carlo sweeps, oracle self-checks and LDPC code generation
"""

import argparse
import os
import sys
from pathlib import Path
from typing import List, Optional

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from loguru import logger

from config.settings import SimConfig, SimPresets, runtime
from phasenoise.coding import generate_regular_code, save_alist
from phasenoise.errors import PhaseNoiseError
from phasenoise.harness import oracle_check, run_sweep
from utils.log_setup import configure_logging

# Column and row weights of the codegen rates
CODEGEN_RATES = {
    '1/2': (3, 6),
    '4/5': (3, 15),
}


def load_config(args: argparse.Namespace) -> SimConfig:
    """Config from --preset or --config, with --seed overriding the file"""
    if args.preset:
        config = SimPresets.get(args.preset)
    elif args.config:
        config = SimConfig.from_file(args.config)
    else:
        raise PhaseNoiseError("Either --config or --preset is required")
    return config.replace(seed=args.seed)


def cmd_sweep(args: argparse.Namespace, single_point: bool = False) -> int:
    config = load_config(args)
    if single_point and len(config.ebn0_db) > 1:
        logger.info(f"simulate runs the first grid point only ({config.ebn0_db[0]} dB)")
        config = config.replace(ebn0_db=config.ebn0_db[:1])
    result = run_sweep(config, threads=args.threads)

    out = Path(args.out)
    result.write_csv(out)
    result.write_metadata(result.metadata_path(out))

    print(f"Results written: {out}")
    for row in result.sorted_rows():
        flag = ' (partial)' if row.partial else ''
        print(
            f"  {row.detector:>14} | {row.ebn0_db:6.2f} dB | BER {row.ber:.3e} | SER {row.ser:.3e} "
            f"| FER {row.fer:.3e} | {row.frames} frames | {row.status}{flag}"
        )
    failed = [row for row in result.rows if row.status != 'ok']
    return 1 if failed or result.metadata.get('interrupted') else 0


def cmd_oracle(args: argparse.Namespace) -> int:
    reports = oracle_check(args.name, seed=args.seed or 0, grid_size=args.grid, trials=args.trials)
    for report in reports:
        print("\n".join(report.lines()))
    failed = [report.name for report in reports if not report.passed]
    if failed:
        print(f"Failed oracle checks: {', '.join(failed)}")
        return 1
    print(f"All {len(reports)} oracle check(s) passed")
    return 0


def cmd_codegen(args: argparse.Namespace) -> int:
    col_weight, row_weight = CODEGEN_RATES[args.rate]
    name = Path(args.out).stem
    matrix = generate_regular_code(args.length, col_weight, row_weight, seed=args.seed or 1, name=name)
    save_alist(matrix, args.out)
    rank = matrix.rank()
    print(f"Generated {name}: n={matrix.n}, m={matrix.m}, rank={rank}, rate={(matrix.n - rank) / matrix.n:.4f}")
    print(f"Saved to {args.out}")
    return 0


def cmd_presets(args: argparse.Namespace) -> int:
    for name in SimPresets.catalogue():
        config = SimPresets.get(name)
        coding = f"coded {config.code}" if config.coded else "uncoded"
        print(
            f"  {name:<20} {config.n_tx}x{config.n_rx} {config.constellation:<6} pilots {str(config.pilots):<14} "
            f"{coding:<26} Eb/N0 {config.ebn0_db}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='MIMO phase-noise link simulator')
    parser.add_argument('--log-level', default=runtime.log_level, help='stderr log level')
    parser.add_argument('--log-file', default=runtime.log_file, help='Optional DEBUG log file')
    commands = parser.add_subparsers(dest='command', required=True)

    for name, help_text in (('simulate', 'Run the first E_b/N_0 point of a config'),
                            ('sweep', 'Run the whole E_b/N_0 x detector grid')):
        command = commands.add_parser(name, help=help_text)
        source = command.add_mutually_exclusive_group(required=True)
        source.add_argument('--config', help='YAML or JSON config file')
        source.add_argument('--preset', choices=sorted(SimPresets.catalogue()), help='Named scenario')
        command.add_argument('--out', required=True, help='CSV output path; metadata goes next to it')
        command.add_argument('--seed', type=int, default=None, help='Master seed override')
        command.add_argument('--threads', type=int, default=None, help='Worker processes')

    oracle = commands.add_parser('oracle-check', help='Run a numerical self-check')
    oracle.add_argument('name', help="Oracle name or 'all'")
    oracle.add_argument('--seed', type=int, default=0)
    oracle.add_argument('--grid', type=int, default=None, help='Grid points per angle for the grid oracles')
    oracle.add_argument('--trials', type=int, default=None, help='Random frames or draws per oracle')

    codegen = commands.add_parser('codegen', help='Generate a regular LDPC code as an alist file')
    codegen.add_argument('--rate', choices=sorted(CODEGEN_RATES), required=True)
    codegen.add_argument('--length', type=int, required=True)
    codegen.add_argument('--out', required=True)
    codegen.add_argument('--seed', type=int, default=1)

    commands.add_parser('presets', help='List the named scenarios')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level, args.log_file)
    try:
        if args.command == 'simulate':
            return cmd_sweep(args, single_point=True)
        if args.command == 'sweep':
            return cmd_sweep(args)
        if args.command == 'oracle-check':
            return cmd_oracle(args)
        if args.command == 'codegen':
            return cmd_codegen(args)
        return cmd_presets(args)
    except PhaseNoiseError as exc:
        logger.error(str(exc))
        print(f"Error: {exc}")
        return 2


if __name__ == '__main__':
    sys.exit(main())
