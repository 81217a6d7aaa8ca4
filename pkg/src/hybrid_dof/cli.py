"""
Command-line interface.

    hybrid-dof dof --k 2 --m 2 --mp 4 --n 2 --np 2
    hybrid-dof simulate scenario.json --out rates.csv --summary summary.json
    hybrid-dof preset fig5 --out-dir results/

Exit codes: 0 success, 2 usage or validation error, 3 numerical
degradation (too many failed Monte-Carlo trials).
"""

import argparse
import io
import json
import logging
import os
import sys
from fractions import Fraction

from . import dof_calc
from .errors import InvalidArgumentError, SweepDegradedError
from .model import NetworkConfig, UserProfile
from .rate import estimate_dof, mc_sweep, resolve_scheme
from .scenario import Scenario, dump_scenario, load_scenario

log = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_DEGRADED = 0, 2, 3

PRESET_SNR_DB = list(range(0, 65, 5))
PRESET_TRIALS = 200
PRESET_SEED = 20160101
DEFAULT_WINDOW = (40.0, 60.0)


def _fmt(x):
    if isinstance(x, int):
        return str(x)
    return f"{x:.6g}"


def _frac(x):
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else str(x)


def _per_user(value, k, name):
    parts = [p for p in str(value).split(',') if p]
    try:
        nums = [int(p) for p in parts]
    except ValueError:
        raise InvalidArgumentError(f"--{name} expects integers, got {value!r}")
    if len(nums) == 1:
        return nums * k
    if len(nums) != k:
        raise InvalidArgumentError(
            f"--{name} needs 1 or {k} values, got {len(nums)}")
    return nums


def config_from_args(args):
    if args.k < 1:
        raise InvalidArgumentError("--k must be >= 1")
    cols = [_per_user(getattr(args, name), args.k, name)
            for name in ('m', 'mp', 'n', 'np')]
    return NetworkConfig(tuple(UserProfile(*vals) for vals in zip(*cols)))


def theoretical_bounds(cfg):
    """(lower, upper) sum DoF for any configuration we have results for."""
    if cfg.k <= 2:
        g = dof_calc.sum_dof(cfg)
        return g, g
    if not cfg.is_symmetric():
        raise InvalidArgumentError("K >= 3 bounds need a symmetric network")
    u = cfg.users[0]
    return dof_calc.dof_k_user_bounds(cfg.k, u.m_rf, u.m_ant, u.n_rf,
                                      u.n_ant)


def dof_report(cfg):
    lines = [f"K={cfg.k}"]
    if cfg.is_symmetric():
        u = cfg.users[0]
        lines.append(f"R={dof_calc.antenna_ratio(u.m_ant, u.n_ant)}")
    if cfg.k == 1:
        lines.append(f"dof={dof_calc.sum_dof(cfg)}")
    elif cfg.k == 2:
        alloc = dof_calc.alloc_two_user(cfg)
        lines.append(f"sum_dof={dof_calc.dof_two_user(cfg)}")
        lines.append(f"alloc d=({alloc.d1},{alloc.d2}) "
                     f"d11={alloc.d11} d10={alloc.d10} "
                     f"d22={alloc.d22} d20={alloc.d20}")
    else:
        lo, hi = theoretical_bounds(cfg)
        lines.append(f"lower={_frac(lo)} upper={_frac(hi)}")
        u = cfg.users[0]
        if cfg.k > dof_calc.antenna_ratio(u.m_ant, u.n_ant):
            # T is astronomically large; report the n -> inf limit only
            lim = dof_calc.extension_dof_limit(cfg.k, u.m_rf, u.m_ant,
                                               u.n_rf, u.n_ant)
            lines.append(f"extension_limit={_frac(lim)}")
    gain = dof_calc.hybrid_gain_ratio(cfg)
    lines.append("hybrid_gain_ratio="
                 + ("inf" if gain == dof_calc.INFINITE_GAIN else _frac(gain)))
    return "\n".join(lines)


def cmd_dof(args, out):
    cfg = config_from_args(args)
    out.write(dof_report(cfg) + "\n")
    return EXIT_OK


def table_csv(table, header_lines=()):
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    k = len(table.points[0].per_user_bits) if table.points else 0
    cols = (['snr_db', 'sum_rate_bits']
            + [f'rate_user_{i + 1}' for i in range(k)]
            + ['trials', 'failures'])
    buf.write(",".join(cols) + "\n")
    for p in table.points:
        row = ([_fmt(float(p.snr_db)), _fmt(p.sum_bits)]
               + [_fmt(x) for x in p.per_user_bits]
               + [_fmt(p.trials), _fmt(p.failures)])
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def summarize(scenario, table, window=DEFAULT_WINDOW):
    resolved = resolve_scheme(scenario.config, scenario.to_scheme())
    lo, hi = theoretical_bounds(resolved.config)
    try:
        slope = estimate_dof(table, window)
    except InvalidArgumentError:
        slope = None
    return {
        'estimated_dof': slope,
        'lower': _frac(lo), 'upper': _frac(hi),
        'lower_value': float(lo), 'upper_value': float(hi),
        'failure_fraction': table.failure_fraction,
        'scheme': resolved.kind, 'streams': list(resolved.streams),
        'slots': resolved.slots, 'window_db': list(window),
    }


def run_scenario(scenario, window=DEFAULT_WINDOW):
    """Run a sweep; returns ``(table, summary, degraded)``."""
    degraded = False
    try:
        table = mc_sweep(scenario.config, scenario.to_scheme(),
                         scenario.snr_db, scenario.trials, scenario.seed)
    except SweepDegradedError as exc:
        table, degraded = exc.table, True
        log.warning("%s", exc)
    return table, summarize(scenario, table, window), degraded


def _write(path, text):
    with open(path, 'w', encoding='utf-8', newline='\n') as fh:
        fh.write(text)


def cmd_simulate(args, out):
    scenario = load_scenario(args.scenario)
    window = tuple(float(x) for x in args.window.split(','))
    table, summary, degraded = run_scenario(scenario, window)
    csv_text = table_csv(table)
    if args.out:
        _write(args.out, csv_text)
    else:
        out.write(csv_text)
    summary_text = json.dumps(summary, sort_keys=True)
    if args.summary:
        _write(args.summary, summary_text + "\n")
    else:
        sys.stderr.write(summary_text + "\n")
    if degraded:
        sys.stderr.write("warning: more than 20% of trials failed; "
                         "CSV is partial\n")
        return EXIT_DEGRADED
    return EXIT_OK


# ---------------------------------------------------------------- presets

def preset_fig2():
    rows = []
    full = dof_calc.dof_two_user(NetworkConfig.symmetric(2, 2, 2, 2, 2))
    for m_ant in range(2, 9):
        cfg = NetworkConfig.symmetric(2, 2, m_ant, 2, m_ant)
        rows.append([m_ant, dof_calc.dof_two_user(cfg), full])
    return {'fig2.csv': (
        ["two-user, M1=M2=N1=N2=2, M'=N' swept"],
        ['m_ant', 'hybrid_dof', 'full_digital_dof'], rows)}


def preset_fig3():
    rows = []
    full = dof_calc.dof_k_user_bounds(3, 2, 2, 2, 2)
    for m_ant in range(2, 9):
        both = dof_calc.dof_k_user_bounds(3, 2, m_ant, 2, m_ant)
        tx = dof_calc.dof_k_user_bounds(3, 2, m_ant, 2, 2)
        rows.append([m_ant, *both, *tx, *full])
    return {'fig3.csv': (
        ["three-user, M=N=2; N'=M' and N'=2 curves"],
        ['m_ant', 'sym_lower', 'sym_upper', 'tx_only_lower', 'tx_only_upper',
         'full_digital_lower', 'full_digital_upper'], rows)}


def preset_fig6():
    rows = []
    for k in range(1, 11):
        rows.append([k, *dof_calc.dof_k_user_bounds(k, 2, 2, 2, 4),
                     *dof_calc.dof_k_user_bounds(k, 2, 2, 2, 8),
                     *dof_calc.dof_k_user_bounds(k, 2, 2, 2, 2)])
    return {'fig6.csv': (
        ["K-user, M=N=M'=2; N'=4, N'=8 and full digital"],
        ['k', 'np4_lower', 'np4_upper', 'np8_lower', 'np8_upper',
         'full_digital_lower', 'full_digital_upper'], rows)}


def _sweep_scenarios(name):
    if name == 'fig4':
        return [(f'fig4_mp{a}.csv', NetworkConfig.symmetric(2, 2, a, 2, a),
                 'auto') for a in (2, 3, 4)]
    return ([(f'fig5_mp{a}_np{a}.csv', NetworkConfig.symmetric(3, 2, a, 2, a),
              'auto') for a in (4, 6)]
            + [(f'fig5_mp{a}_np2.csv', NetworkConfig.symmetric(3, 2, a, 2, 2),
                'auto') for a in (4, 6)]
            + [('fig5_full_digital.csv',
                NetworkConfig.symmetric(3, 2, 4, 2, 4),
                'full_digital_baseline')])


PRESETS = ('fig2', 'fig3', 'fig4', 'fig5', 'fig6')


def cmd_preset(args, out):
    name = args.name
    if name not in PRESETS:
        raise InvalidArgumentError(
            f"unknown preset {name!r}; choose from {list(PRESETS)}")
    os.makedirs(args.out_dir, exist_ok=True)
    status = EXIT_OK
    if name in ('fig2', 'fig3', 'fig6'):
        builder = {'fig2': preset_fig2, 'fig3': preset_fig3,
                   'fig6': preset_fig6}[name]
        for fname, (header, cols, rows) in builder().items():
            lines = [f"# {h}" for h in header] + [",".join(cols)]
            lines += [",".join(_frac(x) for x in row) for row in rows]
            path = os.path.join(args.out_dir, fname)
            _write(path, "\n".join(lines) + "\n")
            out.write(path + "\n")
        return status
    summaries = {}
    for fname, cfg, scheme in _sweep_scenarios(name):
        scenario = Scenario(cfg, list(PRESET_SNR_DB), args.trials, args.seed,
                            scheme)
        table, summary, degraded = run_scenario(scenario)
        if degraded:
            status = EXIT_DEGRADED
        header = [f"scenario {dump_scenario(scenario)}",
                  f"summary {json.dumps(summary, sort_keys=True)}"]
        path = os.path.join(args.out_dir, fname)
        _write(path, table_csv(table, header))
        summaries[fname] = summary
        out.write(path + "\n")
    _write(os.path.join(args.out_dir, f'{name}_summary.json'),
           json.dumps(summaries, sort_keys=True, indent=2) + "\n")
    return status


def build_parser():
    parser = argparse.ArgumentParser(
        prog='hybrid-dof',
        description='Sum-DoF calculators and rate simulations for MIMO '
                    'interference channels with hybrid beamforming.')
    parser.add_argument('-v', '--verbose', action='store_true')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('dof', help='closed-form sum DoF of a configuration')
    p.add_argument('--k', type=int, required=True, help='number of users')
    for flag, what in (('m', 'transmit RF chains M'),
                       ('mp', "transmit antennas M'"),
                       ('n', 'receive RF chains N'),
                       ('np', "receive antennas N'")):
        p.add_argument(f'--{flag}', required=True,
                       help=f'{what}; one value or a comma list per user')
    p.set_defaults(func=cmd_dof)

    p = sub.add_parser('simulate', help='Monte-Carlo rate sweep')
    p.add_argument('scenario', help='scenario JSON file')
    p.add_argument('--out', help='CSV path (default: stdout)')
    p.add_argument('--summary', help='JSON summary path (default: stderr)')
    p.add_argument('--window', default='40,60',
                   help='SNR window in dB for the slope, "lo,hi"')
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser('preset', help='reproduce figure data')
    p.add_argument('name', help=f"one of {', '.join(PRESETS)}")
    p.add_argument('--out-dir', default='.')
    p.add_argument('--trials', type=int, default=PRESET_TRIALS)
    p.add_argument('--seed', type=int, default=PRESET_SEED)
    p.set_defaults(func=cmd_preset)
    return parser


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else
                        logging.WARNING, format='%(levelname)s: %(message)s')
    try:
        return args.func(args, out)
    except (InvalidArgumentError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
