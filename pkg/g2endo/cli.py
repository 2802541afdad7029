"""Command-line entry point: g2endo <subcommand> ..."""

import argparse
import json
import logging
import sys

from g2endo import CONVENTION_ID, SCHEMA_VERSION, __version__
from g2endo.analysis.covers import (
    conjugate_cover,
    independence,
    load_cover,
    map_degree,
    pullback_differential,
    solve_target,
    verify_cover,
)
from g2endo.analysis.finitefield import CurveModel, frobenius_table
from g2endo.analysis.moduli import humbert_membership, igusa_clebsch, load_humbert_equation
from g2endo.analysis.qforms import deduce_qm_ring, required_queries
from g2endo.config import load_settings, override
from g2endo.errors import G2EndoError, InconclusiveError
from g2endo.logconfig import condense_log, setup_logging
from g2endo.report import ExitCode, analyze, load_data
from g2endo.survey import SurveyConfig, survey

logger = logging.getLogger(__name__)


def parse_coefficients(text):
    """'a0,a1,...' (optionally bracketed) -> list of ints, ascending in x."""
    text = text.strip().strip('[]()')
    try:
        return [int(c) for c in text.replace(' ', '').split(',') if c]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Expected comma-separated integers, got {text!r}")


def curve_from_args(curve, h=None):
    if h:
        return CurveModel.from_h_g(h, curve)
    return CurveModel.from_coeffs(curve)


def _emit(out, path=None):
    text = json.dumps(out, sort_keys=True, indent=2)
    if path:
        with open(path, 'w') as f:
            f.write(text + '\n')
        logger.info(f"Wrote {path}")
    else:
        print(text)


def cmd_analyze(args, settings):
    curve = curve_from_args(args.curve, args.h)
    report = analyze(curve, settings, args.data)
    _emit(report.to_dict(include_timings=args.timings), args.json)
    return report.exit_code


def cmd_survey(args, settings):
    config = SurveyConfig(
        box=args.box if args.box is not None else settings.box,
        a4_nonneg=not args.all_a4,
        b_irred=settings.b_irred,
        b_disc=settings.b_disc,
        sample=args.sample,
        seed=args.seed,
        workers=args.workers if args.workers is not None else settings.workers,
        data_dir=args.data or settings.data_dir,
    )
    result = survey(config, settings)
    if args.log:
        result.write_log(args.log)
    _emit({'schema': SCHEMA_VERSION, 'survey': result.table()}, args.json)
    return ExitCode.PROVEN


def cmd_frobenius_dump(args, settings):
    curve = curve_from_args(args.curve, args.h)
    table = frobenius_table(curve, args.bound, settings.workers, settings.max_prime)
    if args.json:
        _emit([fd.to_dict() for fd in table], args.json)
    else:
        print(f"{'p':>6} {'a':>6} {'b':>8} {'ordinary':>9} {'omega':>6}")
        for fd in table:
            print(f"{fd.p:>6} {fd.a:>6} {fd.b:>8} {str(fd.ordinary):>9} {str(fd.in_omega_prime):>6}")
    return ExitCode.PROVEN


def cmd_humbert_test(args, settings):
    eq = load_humbert_equation(args.eq)
    results = []
    for coeffs in args.curve:
        curve = CurveModel.from_coeffs(coeffs)
        try:
            membership = humbert_membership(igusa_clebsch(curve), eq, settings.tolerance, settings.dps)
            results.append({'curve': str(curve), 'discriminant': eq.discriminant,
                            'membership': membership.value, 'reliable': membership.reliable})
        except G2EndoError as e:
            logger.error(f"Error testing {curve} on H_{eq.discriminant}: {str(e)}")
            results.append({'curve': str(curve), 'discriminant': eq.discriminant, 'error': str(e)})
    _emit(results, args.json)
    if any('error' in r for r in results):
        return ExitCode.ERROR
    return ExitCode.PROVEN if all(r['reliable'] for r in results) else ExitCode.HEURISTIC


def _parse_answers(text):
    answers = {}
    for item in text.split(','):
        if not item.strip():
            continue
        d, _, value = item.partition(':')
        answers[int(d)] = value.strip().lower() in ('1', 'on', 'true', 'yes')
    return answers


def cmd_qm_certify(args, settings):
    queries = required_queries(args.d1, args.d2)
    out = {'d1': args.d1, 'd2': args.d2, 'queries': queries}
    if args.answers:
        oracle = _parse_answers(args.answers)
    elif args.curve and args.data:
        data = load_data(args.data)
        point = igusa_clebsch(CurveModel.from_coeffs(args.curve))

        def oracle(d):
            result = data.humbert.membership(point, d, settings.tolerance, settings.dps)
            return None if result is None else result.is_on
    else:
        _emit(out, args.json)
        return ExitCode.PROVEN

    try:
        out['order'] = deduce_qm_ring(args.d1, args.d2, oracle).to_dict()
        code = ExitCode.PROVEN
    except InconclusiveError as e:
        logger.error(f"Error deducing QM order for ({args.d1}, {args.d2}): {str(e)}")
        out['survivors'] = e.survivors
        code = ExitCode.INCONCLUSIVE
    _emit(out, args.json)
    return code


def cmd_cover_verify(args, settings):
    f, cover = load_cover(args.map)
    out = {'map': args.map, 'verified': verify_cover(f, cover)}
    target = solve_target(f, cover.field, cover.w_num, cover.w_den, cover.r_num, cover.r_den)
    out['solved_target'] = None if target is None else [str(c) for c in target]
    if out['verified']:
        out['degree'] = map_degree(f, cover)
        pullback = pullback_differential(f, cover)
        out['pullback'] = [str(c) for c in pullback]
        if cover.field.degree == 2:
            conj = conjugate_cover(cover)
            conj_f = f.map_coeffs(lambda c: c.conjugate())
            if verify_cover(conj_f, conj):
                other = pullback_differential(conj_f, conj)
                out['conjugate_pullback'] = [str(c) for c in other]
                out['independent'] = independence(pullback, other)
    _emit(out, args.json)
    return ExitCode.PROVEN if out['verified'] else ExitCode.ERROR


def cmd_condense_log(args, settings):
    before, after, backup = condense_log(args.file)
    print(f"Condensed {args.file}: {before} -> {after} lines (backup {backup})")
    return ExitCode.PROVEN


def build_parser():
    parser = argparse.ArgumentParser(
        prog='g2endo', description="Geometric endomorphism rings of genus-2 Jacobians over Q",
    )
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__} ({CONVENTION_ID})")
    parser.add_argument('--config', help='INI settings file (default ~/.g2endo.ini)')
    parser.add_argument('--log-file', help='Condensed log file')
    parser.add_argument('--verbose', action='store_true', help='Debug output on the console')
    subparsers = parser.add_subparsers(dest='command', required=True)

    analyze_parser = subparsers.add_parser('analyze', help='Classify the endomorphism ring of one curve')
    analyze_parser.add_argument('--curve', type=parse_coefficients, required=True,
                                help='Coefficients a0,...,a6 of f (or of g with --h)')
    analyze_parser.add_argument('--h', type=parse_coefficients, help='h for models y^2 + h(x) y = g(x)')
    analyze_parser.add_argument('--B-irred', dest='b_irred', type=int)
    analyze_parser.add_argument('--B-disc', dest='b_disc', type=int)
    analyze_parser.add_argument('--data', help='Directory with humbert/ and cm/ data files')
    analyze_parser.add_argument('--json', help='Write the report here instead of stdout')
    analyze_parser.add_argument('--timings', action='store_true', help='Include stage timings')
    analyze_parser.set_defaults(func=cmd_analyze)

    survey_parser = subparsers.add_parser('survey', help='Classify a box of quintic models')
    survey_parser.add_argument('--box', type=int)
    survey_parser.add_argument('--all-a4', action='store_true', help='Allow negative a4')
    survey_parser.add_argument('--sample', type=int)
    survey_parser.add_argument('--seed', type=int, default=0)
    survey_parser.add_argument('--workers', type=int)
    survey_parser.add_argument('--B-irred', dest='b_irred', type=int)
    survey_parser.add_argument('--B-disc', dest='b_disc', type=int)
    survey_parser.add_argument('--data')
    survey_parser.add_argument('--log', help='Per-curve JSON-lines log')
    survey_parser.add_argument('--json')
    survey_parser.set_defaults(func=cmd_survey)

    dump_parser = subparsers.add_parser('frobenius-dump', help='Frobenius data up to a prime bound')
    dump_parser.add_argument('--curve', type=parse_coefficients, required=True)
    dump_parser.add_argument('--h', type=parse_coefficients)
    dump_parser.add_argument('--bound', type=int, default=67)
    dump_parser.add_argument('--json')
    dump_parser.set_defaults(func=cmd_frobenius_dump)

    humbert_parser = subparsers.add_parser('humbert-test', help='Test curves against one Humbert equation')
    humbert_parser.add_argument('--eq', required=True, help='Humbert equation file')
    humbert_parser.add_argument('--curve', type=parse_coefficients, action='append', required=True)
    humbert_parser.add_argument('--json')
    humbert_parser.set_defaults(func=cmd_humbert_test)

    qm_parser = subparsers.add_parser('qm-certify', help='Deduce a quaternionic order from memberships')
    qm_parser.add_argument('--d1', type=int, required=True)
    qm_parser.add_argument('--d2', type=int, required=True)
    qm_parser.add_argument('--answers', help="Membership answers 'D:on,D:off,...'")
    qm_parser.add_argument('--curve', type=parse_coefficients)
    qm_parser.add_argument('--data')
    qm_parser.add_argument('--json')
    qm_parser.set_defaults(func=cmd_qm_certify)

    cover_parser = subparsers.add_parser('cover-verify', help='Verify a map to an elliptic curve')
    cover_parser.add_argument('--map', required=True, help='Cover map file')
    cover_parser.add_argument('--json')
    cover_parser.set_defaults(func=cmd_cover_verify)

    condense_parser = subparsers.add_parser('condense-log', help='Condense an existing log file')
    condense_parser.add_argument('--file', required=True)
    condense_parser.set_defaults(func=cmd_condense_log)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    settings = load_settings(args.config)
    settings = override(
        settings,
        b_irred=getattr(args, 'b_irred', None),
        b_disc=getattr(args, 'b_disc', None),
        log_file=args.log_file,
    )
    if args.command != 'condense-log':
        setup_logging(settings.log_file, args.verbose)

    try:
        return args.func(args, settings)
    except G2EndoError as e:
        logger.error(f"Error running {args.command}: {str(e)}")
        return ExitCode.ERROR


if __name__ == '__main__':
    sys.exit(main())
