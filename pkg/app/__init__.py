import json
import os
import sys

import click
from flask import Flask

from .config import config
from .extensions import db

FORMAT_CHOICES = click.Choice(['ci2', 'ci3', 'ci4', 'gr25', 'p2p2'])


def create_app(config_name=None):
    """Application factory."""
    if config_name is None:
        config_name = os.environ.get('FLASK_CONFIG', 'default')

    app = Flask(__name__)
    app.config.from_object(config[config_name])

    # Initialize extensions
    db.init_app(app)

    # Create database tables
    with app.app_context():
        db.create_all()

    # Add CLI commands
    register_cli(app)

    return app


def _banner(title: str):
    print("=" * 70)
    print(title)
    print("=" * 70)


def _search_config(app, **overrides):
    from .utils.search import SearchConfig
    try:
        return SearchConfig.from_app_config(app.config, **overrides)
    except ValueError as e:
        raise click.BadParameter(str(e))


def _family(text: str):
    from .utils.formats import parse_family
    try:
        return parse_family(text)
    except ValueError as e:
        raise click.BadParameter(str(e))


def register_cli(app):
    """Register CLI commands."""

    @app.cli.command('init-db')
    def init_db():
        """Initialize the database."""
        db.create_all()
        print('Database tables created.')

    @app.cli.command('search')
    @click.option('--format', 'format_name', type=FORMAT_CHOICES, required=True)
    @click.option('--max-weight-sum', type=int, default=None, help='Bound W on the ambient weight sum')
    @click.option('--filter', 'filter_mode', type=click.Choice(['k0', 'k2', 'all']), default=None)
    @click.option('--plurigenus-depth', type=int, default=None)
    @click.option('--seed', type=int, default=None)
    @click.option('--prime', type=int, default=None, help='Field characteristic, 0 for QQ')
    @click.option('--qs', 'qs_mode', type=click.Choice(['off', 'strata', 'full']), default=None)
    @click.option('--budget-spairs', type=int, default=None)
    @click.option('--budget-seconds', type=float, default=None)
    @click.option('--workers', type=int, default=None)
    @click.option('--out', 'output_dir', default=None)
    @click.option('--resume', is_flag=True, default=None)
    def search(**options):
        """Run the census pipeline for one format."""
        from .utils.census_store import run_stored_census
        from .utils.report import census_report

        if not options.get('resume'):
            options.pop('resume', None)
        search_config = _search_config(app, **options)
        _banner(f"Census {search_config.run_key}")
        result, paths = run_stored_census(search_config, run_type='cli')
        stats = result.stats()
        print(f"Families: {stats['families']}")
        print(f"Accepted: {stats['accepted']}")
        print(f"Rejected: {stats['rejected']}")
        for reason, count in stats['rejections'].items():
            print(f"  - {reason}: {count}")
        report = census_report(result.records, search_config).get(search_config.format_name)
        if report:
            print(f"h0(-lK)=0 for l<=1..4: {report['h0_zero']}")
            print(f"Quasismooth verified: {report['qs']}")
        print(f"Records: {paths['records']}")
        if result.errors:
            print(f"\nERRORS ({len(result.errors)}):")
            for error in result.errors[:20]:
                print(f"  - {error}")
        print("=" * 70)
        sys.exit(result.exit_code)

    @app.cli.command('verify')
    @click.argument('record_file', type=click.Path(exists=True, dir_okay=False))
    @click.option('--qs', 'qs_mode', type=click.Choice(['off', 'strata', 'full']), default='off')
    @click.option('--budget-seconds', type=float, default=None)
    def verify(record_file, qs_mode, budget_seconds):
        """Recompute baskets (and optionally certificates) of a record file."""
        from .utils.basket import basket_for
        from .utils.cas import Budget
        from .utils.quasismooth import REFUTED, ci_quasismooth_general, verify_quasismooth
        from .utils.report import read_records

        records = read_records(record_file)
        seconds = budget_seconds or app.config['CENSUS_BUDGET_SECONDS']
        _banner(f"Verifying {len(records)} records from {record_file}")
        mismatches, refuted = 0, 0
        for record in records:
            family = _family(record['key'])
            budget = Budget(app.config['CENSUS_BUDGET_SPAIRS'], seconds)
            report = basket_for(family, record['seed'], record['p'], budget,
                                app.config['CENSUS_RETRIES'], app.config['CENSUS_EXTRA_TERMS'])
            if str(report.basket) != record['basket']['basket']:
                mismatches += 1
                print(f"MISMATCH {record['key']}: {report.basket} != {record['basket']['basket']}")
            if qs_mode != 'off':
                budget = Budget(app.config['CENSUS_BUDGET_SPAIRS'], seconds)
                if family.kind == 'CI':
                    certificate = ci_quasismooth_general(family, record['seed'], record['p'], budget, mode=qs_mode)
                else:
                    certificate = verify_quasismooth(family, record['seed'], record['p'], budget, mode=qs_mode,
                                                     extra_terms=app.config['CENSUS_EXTRA_TERMS'])
                if certificate.status == REFUTED:
                    refuted += 1
                    print(f"REFUTED {record['key']}: {certificate.witness}")
        print(f"Basket mismatches: {mismatches}")
        print(f"Refuted: {refuted}")
        print("=" * 70)
        sys.exit(1 if mismatches else 2 if refuted else 0)

    @app.cli.command('hilbert')
    @click.argument('family_text')
    @click.option('--plurigenus-depth', type=int, default=None)
    def hilbert(family_text, plurigenus_depth):
        """Print the Hilbert series data of a family."""
        from .utils.hilbert import compute_family_series
        from .utils.series import SeriesError

        family = _family(family_text)
        depth = plurigenus_depth or app.config['CENSUS_PLURIGENUS_DEPTH']
        try:
            series = compute_family_series(family, depth)
        except SeriesError as e:
            print(f"ERROR: {e}", file=sys.stderr)
            sys.exit(1)
        print(f"Family: {family}")
        print(f"Numerator: {series.hs.numerator}")
        print(f"Denominator: {list(series.hs.denominator_exponents)}")
        print(f"h0(-lK), l=1..{depth}: {series.h0}")
        print(f"Vanishing depth: {series.vanishing_depth}")

    @app.cli.command('basket')
    @click.argument('family_text')
    @click.option('--seed', type=int, default=None)
    @click.option('--prime', type=int, default=None)
    @click.option('--json', 'as_json', is_flag=True, help='Print the full report as JSON')
    def basket(family_text, seed, prime, as_json):
        """Compute the basket of the general member of a family."""
        from .utils.basket import BasketError, basket_for
        from .utils.cas import BudgetExceeded, CasError

        family = _family(family_text)
        search_config = _search_config(app, seed=seed, prime=prime)
        try:
            report = basket_for(family, search_config.seed, search_config.prime, search_config.budget(),
                                search_config.retries, search_config.extra_terms)
        except (BasketError, CasError) as e:
            print(f"ERROR: {e}", file=sys.stderr)
            sys.exit(3 if isinstance(e, BudgetExceeded) else 1)
        if as_json:
            print(json.dumps(report.to_dict(), sort_keys=True, indent=2))
            return
        print(f"Family: {family}")
        print(f"Basket: {report.basket}")
        print(f"Method: {report.method}")
        print(f"Wellformed: {report.wellformed}  Isolated: {report.isolated}  Terminal: {report.terminal}")

    @app.cli.command('qs')
    @click.argument('family_text', required=False)
    @click.option('--model', 'model_path', type=click.Path(exists=True, dir_okay=False), default=None)
    @click.option('--mode', type=click.Choice(['strata', 'full']), default='full')
    @click.option('--seed', type=int, default=None)
    @click.option('--prime', type=int, default=None)
    def qs(family_text, model_path, mode, seed, prime):
        """Quasismoothness certificate of a general member or an explicit model."""
        from .utils.cas import load_model
        from .utils.quasismooth import REFUTED, ci_quasismooth_general, verify_quasismooth, verify_system

        if not family_text and not model_path:
            raise click.UsageError('give a FAMILY or --model PATH')
        search_config = _search_config(app, seed=seed, prime=prime)
        if model_path:
            with open(model_path, 'r', encoding='utf-8') as f:
                system = load_model(f.read(), search_config.prime)
            certificate = verify_system(system, search_config.budget(), mode)
        else:
            family = _family(family_text)
            if family.kind == 'CI':
                certificate = ci_quasismooth_general(family, search_config.seed, search_config.prime,
                                                     search_config.budget(), mode=mode)
            else:
                certificate = verify_quasismooth(family, search_config.seed, search_config.prime,
                                                 search_config.budget(), mode=mode,
                                                 extra_terms=search_config.extra_terms)
        print(json.dumps(certificate.to_dict(), sort_keys=True, indent=2))
        if certificate.status == REFUTED:
            sys.exit(2)

    @app.cli.command('report')
    @click.argument('record_file', type=click.Path(exists=True, dir_okay=False))
    @click.option('--out', 'output_dir', default=None, help='Write the summary CSVs here')
    @click.option('--filter', 'filter_mode', type=click.Choice(['k0', 'k2', 'all']), default='all',
                  show_default=True, help='Filter the records were written under')
    def report(record_file, output_dir, filter_mode):
        """Summary tables of a record file."""
        from .utils.report import (
            census_report, combined_summary_frame, compare_with_published,
            empty_summary_frame, read_records,
        )

        records = read_records(record_file)
        summary = census_report(records, filter_mode=filter_mode)
        empty = empty_summary_frame(summary)
        combined = combined_summary_frame(summary)
        _banner(f"Census summary of {len(records)} records")
        print(empty.to_string())
        print()
        print(combined.to_string(index=False))
        notes = compare_with_published(summary)
        if notes:
            print(f"\nDIFFERENCES FROM PUBLISHED TABLES ({len(notes)}):")
            for note in notes:
                print(f"  - {note}")
        if output_dir:
            os.makedirs(output_dir, exist_ok=True)
            stem = os.path.splitext(os.path.basename(record_file))[0]
            empty.to_csv(os.path.join(output_dir, f"{stem}_empty_summary.csv"))
            combined.to_csv(os.path.join(output_dir, f"{stem}_combined_summary.csv"), index=False)
            print(f"\nSummaries written to {output_dir}")
        print("=" * 70)


# Import models to ensure they are registered with SQLAlchemy
from . import models
