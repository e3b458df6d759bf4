#!/usr/bin/env python3
"""
cvk command line interface: evaluate kernels and polynomials, run the
verification suites, sweep one parameter over a grid.
"""

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core.numerics import QuadratureSettings
from .core.special_functions import BParameter, gb, sb
from .errors import ConfigInvalid, CvkError, UsageError
from .kernels import confluent as cf
from .kernels import fusion as fu
from .utils.logging import setup_logging
from .verify.config import load_config
from .verify.suites import SUITES, run_suite

logger = logging.getLogger(__name__)

TARGETS = ("sb", "gb", "F", "Fren", "Ck", "CkRen", "ChatRen", "An", "Hn", "Jn")
FUSION_TARGETS = ("F", "Fren", "An")
CONFLUENT_TARGETS = ("Ck", "CkRen", "ChatRen", "Hn", "Jn")
SWEEPABLE = ("b", "theta0", "theta_t", "theta1", "theta_inf", "theta_star", "sigma_s", "sigma_t", "nu")

# golden evaluation point; sigma_s differs between the two kernel families
DEFAULTS = {"b": 0.7, "theta0": 0.3, "theta_t": -0.2, "theta1": 0.5, "theta_inf": 0.1, "theta_star": 0.4,
            "sigma_t": 0.6, "nu": 0.25, "k": 1, "n": 0, "z": 0j}
SIGMA_S_DEFAULT = {"fusion": 0.4, "confluent": 0.35}


def _json_default(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


def render_json(data, compact=False):
    """JSON text of a record or report; complex numbers become {re, im}"""
    layout = {"separators": (",", ":")} if compact else {"indent": 2}
    return json.dumps(data, default=_json_default, **layout)


def _complex_arg(text):
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _params(args, overrides=None):
    values = {name: getattr(args, name) for name in DEFAULTS}
    values["sigma_s"] = args.sigma_s
    values.update(overrides or {})
    for name, default in DEFAULTS.items():
        if values[name] is None:
            values[name] = default
    return values


def _fusion(v):
    sigma_s = v["sigma_s"] if v["sigma_s"] is not None else SIGMA_S_DEFAULT["fusion"]
    return fu.FusionParams.create(v["b"], v["theta0"], v["theta_t"], v["theta1"], v["theta_inf"],
                                  sigma_s, v["sigma_t"])


def _confluent(v):
    sigma_s = v["sigma_s"] if v["sigma_s"] is not None else SIGMA_S_DEFAULT["confluent"]
    return cf.ConfluentParams.create(v["b"], v["theta0"], v["theta_t"], v["theta_star"], v["nu"],
                                     sigma_s, int(v["k"]))


def evaluate(target, values, qs, rule="adaptive"):
    """(value, error estimate) of one target at the given parameter values"""
    if target in ("sb", "gb"):
        special = (sb if target == "sb" else gb)(values["z"], BParameter(values["b"]))
        if special.is_pole:
            raise UsageError(f"{target} has a pole of order {special.order} at z={values['z']}")
        return special.value, 0.0
    n = int(values["n"])
    if target == "An":
        return fu.aw_polynomial(n, _fusion(values)), 0.0
    if target == "Hn":
        return cf.hahn_polynomial(n, _confluent(values)), 0.0
    if target == "Jn":
        return cf.jacobi_polynomial(n, _confluent(values)), 0.0
    kernels = {
        "F": lambda: fu.fusion_kernel(_fusion(values), qs, rule=rule),
        "Fren": lambda: fu.fren(_fusion(values), qs, rule=rule),
        "Ck": lambda: cf.ck_kernel(_confluent(values), qs, rule=rule),
        "CkRen": lambda: cf.ck_ren(_confluent(values), qs, rule=rule),
        "ChatRen": lambda: cf.chat_ren(_confluent(values), qs, rule=rule),
    }
    if target not in kernels:
        raise UsageError(f"unknown target '{target}', expected one of {', '.join(TARGETS)}")
    result = kernels[target]()
    return result.value, result.quadrature_err


def _record(target, values, value, err):
    params = {k: v for k, v in values.items() if v is not None}
    return {"target": target, "params": params, "value": value, "err": err}


def cmd_eval(args):
    """Evaluate one target"""
    values = _params(args)
    value, err = evaluate(args.target, values, QuadratureSettings(), args.rule)
    if args.csv:
        writer = csv.writer(sys.stdout)
        writer.writerow(["target", "value_re", "value_im", "err"])
        writer.writerow([args.target, repr(value.real), repr(value.imag), repr(err)])
    else:
        print(render_json(_record(args.target, values, complex(value), err), args.compact))
    return 0


def cmd_sweep(args):
    """Vary one parameter over a grid, CSV to stdout"""
    if args.vary not in SWEEPABLE:
        raise UsageError(f"cannot vary '{args.vary}', expected one of {', '.join(SWEEPABLE)}")
    if args.steps < 2:
        raise UsageError(f"--steps must be >= 2, got {args.steps}")
    qs = QuadratureSettings()
    writer = csv.writer(sys.stdout)
    writer.writerow(["param", "value_re", "value_im", "err"])
    for point in np.linspace(args.start, args.stop, args.steps):
        values = _params(args, {args.vary: float(point)})
        try:
            value, err = evaluate(args.target, values, qs, args.rule)
        except CvkError as e:
            logger.warning("%s=%g skipped: %s", args.vary, point, e)
            value, err = complex("nan"), float("nan")
        writer.writerow([repr(float(point)), repr(value.real), repr(value.imag), repr(err)])
    return 0


def cmd_verify(args):
    """Run a verification suite and print (or write) its report"""
    overrides = {"seed": args.seed, "points": args.points, "n_max": args.n_max}
    config = load_config(args.config, overrides)
    report = run_suite(config, args.suite)
    result = report.validate()
    if not result.is_valid:
        print("❌ Report failed schema validation:", file=sys.stderr)
        for error in result.errors:
            print(f"  {error}", file=sys.stderr)
        return 1
    if args.output:
        report.write(Path(args.output))
    else:
        print(render_json(report.to_dict(), args.compact))
    summary = report.summary
    if report.failed:
        print(f"❌ {summary['failed']} check(s) failed, {summary['passed']} passed", file=sys.stderr)
    else:
        print(f"✅ All {summary['passed']} checks passed", file=sys.stderr)
    return report.exit_code()


def _add_point_arguments(parser):
    group = parser.add_argument_group("evaluation point (defaults: golden point)")
    group.add_argument('--b', type=float, help='b > 0 (default 0.7)')
    for name in ("theta0", "theta_t", "theta1", "theta_inf", "theta_star"):
        group.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float)
    for name in ("sigma_s", "sigma_t", "nu"):
        group.add_argument(f"--{name.replace('_', '-')}", dest=name, type=_complex_arg)
    group.add_argument('--k', type=int, help='confluent index k >= 1')
    group.add_argument('--n', type=int, help='polynomial degree')
    group.add_argument('--z', type=_complex_arg, help='argument of sb/gb')
    parser.add_argument('--rule', choices=('adaptive', 'fixed'), default='adaptive',
                        help='quadrature rule for kernel targets')


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cvk",
        description="Virasoro fusion and confluent kernels with their q-Askey limits",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  cvk eval sb --z 0 --b 0.7                  # s_b(0) = 1
  cvk eval Ck --k 2 --compact                # C_2 at the golden point
  cvk eval An --n 0 --csv                    # A_0 = 1 as a CSV row
  cvk verify qaskey --seed 7                 # recurrence and difference checks
  cvk verify all --output report.json        # full run, report written to disk
  cvk sweep Fren --vary sigma-t --from 0.1 --to 0.8 --steps 15
        """
    )

    parser.add_argument('--version', action='version', version=f'cvk {__version__}')
    parser.add_argument('-v', '--verbose', action='store_true', help='Debug logging on stderr')
    parser.add_argument('-q', '--quiet', action='store_true', help='Only errors on stderr')

    subparsers = parser.add_subparsers(dest='command', help='Available commands')

    # Eval command
    eval_parser = subparsers.add_parser('eval', help='Evaluate a kernel, special function or polynomial')
    eval_parser.add_argument('target', choices=TARGETS)
    _add_point_arguments(eval_parser)
    output = eval_parser.add_mutually_exclusive_group()
    output.add_argument('--json', action='store_true', help='JSON record (default)')
    output.add_argument('--csv', action='store_true', help='Single CSV row')
    eval_parser.add_argument('--compact', action='store_true', help='Output compact JSON')

    # Verify command
    verify_parser = subparsers.add_parser('verify', help='Run a verification suite')
    verify_parser.add_argument('suite', choices=SUITES + ('all',))
    verify_parser.add_argument('--config', type=Path, help='YAML configuration merged over the defaults')
    verify_parser.add_argument('--seed', type=int)
    verify_parser.add_argument('--points', type=int)
    verify_parser.add_argument('--n-max', dest='n_max', type=int)
    verify_parser.add_argument('--output', help='Write the report to this file instead of stdout')
    verify_parser.add_argument('--compact', action='store_true', help='Output compact JSON')

    # Sweep command
    sweep_parser = subparsers.add_parser('sweep', help='Vary one parameter, CSV output')
    sweep_parser.add_argument('target', choices=TARGETS)
    sweep_parser.add_argument('--vary', required=True, type=lambda s: s.replace('-', '_'))
    sweep_parser.add_argument('--from', dest='start', type=float, required=True)
    sweep_parser.add_argument('--to', dest='stop', type=float, required=True)
    sweep_parser.add_argument('--steps', type=int, default=11)
    _add_point_arguments(sweep_parser)

    return parser


def main(argv=None):
    """Main CLI entry point"""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return 2

    setup_logging(args.verbose, args.quiet)

    # Map commands to functions
    commands = {
        'eval': cmd_eval,
        'verify': cmd_verify,
        'sweep': cmd_sweep,
    }

    try:
        return commands[args.command](args)
    except KeyboardInterrupt:
        print("\nOperation cancelled by user", file=sys.stderr)
        return 130
    except (UsageError, ConfigInvalid) as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2
    except CvkError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())
