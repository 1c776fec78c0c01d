#!/usr/bin/env python3
"""
Census job for fanosearch

Runs the full pipeline for one format up to a weight bound, stores every
family outcome in the database and exports the record file and summaries.
Long runs can be interrupted and continued with --resume.

Usage:
    python run_census.py --format ci2
    python run_census.py --format gr25 --max-weight-sum 70 --workers 8 --qs full

Cron setup (resumes an unfinished run every night at 2 AM):
    0 2 * * * cd /path/to/app && python run_census.py --format p2p2 --resume >> logs/census.log 2>&1

Exit codes:
    0 clean completion, 1 runner failure, 2 some accepted family is not
    quasismooth, 3 some computation ran out of budget
"""

import os
import sys
import argparse
import logging
from datetime import datetime

# Add the app directory to the path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))


def main():
    parser = argparse.ArgumentParser(description='Census of isolated terminal Fano 4-folds')
    parser.add_argument('--format', dest='format_name', required=True,
                        choices=['ci2', 'ci3', 'ci4', 'gr25', 'p2p2'])
    parser.add_argument('--max-weight-sum', type=int, help='Bound W on the ambient weight sum')
    parser.add_argument('--filter', dest='filter_mode', choices=['k0', 'k2', 'all'])
    parser.add_argument('--plurigenus-depth', type=int)
    parser.add_argument('--seed', type=int)
    parser.add_argument('--prime', type=int, help='Field characteristic, 0 for QQ')
    parser.add_argument('--qs', dest='qs_mode', choices=['off', 'strata', 'full'])
    parser.add_argument('--budget-spairs', type=int)
    parser.add_argument('--budget-seconds', type=float)
    parser.add_argument('--workers', type=int)
    parser.add_argument('--out', dest='output_dir')
    parser.add_argument('--resume', action='store_true', default=None, help='Skip families already stored')
    args = parser.parse_args()

    logging.basicConfig(level=logging.INFO, format='%(asctime)s %(levelname)s %(name)s: %(message)s')

    # Import after setting up path
    from app import create_app
    from app.utils.census_store import run_stored_census
    from app.utils.search import SearchConfig

    app = create_app()

    with app.app_context():
        try:
            config = SearchConfig.from_app_config(app.config, **vars(args))
        except ValueError as e:
            print(f"ERROR: {e}", file=sys.stderr)
            return 1

        print("=" * 70)
        print(f"Starting census {config.run_key}")
        print(f"Time: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
        print("=" * 70)

        try:
            result, paths = run_stored_census(config, run_type='scheduled')

            stats = result.stats()
            print("\n" + "=" * 70)
            print("CENSUS COMPLETE")
            print("=" * 70)
            print(f"Families enumerated: {stats['families']}")
            print(f"Accepted: {stats['accepted']}")
            print(f"Rejected: {stats['rejected']}")
            print(f"Refuted: {stats['refuted']}")
            print(f"Budget exhausted: {stats['budget_exhausted']}")
            print(f"Records: {paths['records']}")
            print(f"Time elapsed: {result.elapsed_seconds:.1f} seconds")

            if result.errors:
                print(f"\nWARNINGS/ERRORS ({len(result.errors)}):")
                for error in result.errors:
                    print(f"  - {error}")

            print("=" * 70)

            if result.exit_code:
                return result.exit_code
            return 1 if result.errors else 0

        except Exception as e:
            print(f"\nERROR: Census failed: {e}", file=sys.stderr)
            import traceback
            traceback.print_exc()
            return 1


if __name__ == '__main__':
    sys.exit(main())
