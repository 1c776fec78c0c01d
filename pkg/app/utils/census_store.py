"""
Database persistence for census runs.

Family outcomes are committed in small batches as they arrive, so an interrupted run can
be resumed: families already stored under the same run key are skipped.
Must be used inside an application context.
"""

import logging
from typing import Dict, Optional

from ..extensions import db
from ..models import CensusRun, FamilyOutcome
from .report import export_census
from .search import run_census

logger = logging.getLogger(__name__)


class CensusStore:
    """Outcome store for one run key."""

    def __init__(self, config, run_type: str = 'manual', commit_every: int = 100):
        self.config = config
        self.run_type = run_type
        self.commit_every = commit_every
        self.run: Optional[CensusRun] = None
        self._pending = 0

    def start(self) -> CensusRun:
        """Reuse the latest run with this key when resuming, else open a new one."""
        run = None
        if self.config.resume:
            run = (CensusRun.query.filter_by(run_key=self.config.run_key)
                   .order_by(CensusRun.started_at.desc()).first())
        if run is None:
            run = CensusRun(run_key=self.config.run_key, run_type=self.run_type,
                            format_name=self.config.format_name,
                            max_weight_sum=self.config.max_weight_sum, config=self.config.to_dict())
            db.session.add(run)
        else:
            logger.info(f"Resuming census run {run.id} ({run.status})")
            run.status = 'running'
        db.session.commit()
        self.run = run
        return run

    def completed(self) -> Dict[str, Dict]:
        """Outcomes already stored for the current run, by family key."""
        if self.run is None:
            return {}
        return {row.family_key: row.to_dict() for row in self.run.outcomes}

    def save(self, outcome: Dict) -> None:
        if self.run is None:
            raise RuntimeError("CensusStore.start() must be called before save()")
        rejection = outcome.get('rejection') or {}
        row = FamilyOutcome.query.filter_by(run_id=self.run.id, family_key=outcome['key']).first()
        if row is None:
            row = FamilyOutcome(run_id=self.run.id, family_key=outcome['key'])
            db.session.add(row)
        row.accepted = outcome['accepted']
        row.stage = rejection.get('stage')
        row.reason = rejection.get('reason')
        row.record = outcome.get('record')
        row.rejection = outcome.get('rejection')
        row.error = outcome.get('error')
        row.timings = outcome.get('timings')
        self._pending += 1
        if self._pending >= self.commit_every:
            self.flush()

    def flush(self) -> None:
        if self._pending:
            db.session.commit()
            self._pending = 0

    def finish(self, result) -> CensusRun:
        self.flush()
        stats = result.stats()
        stats['exit_code'] = result.exit_code
        self.run.mark_completed(stats)
        logger.info(f"Census run {self.run.id} completed: {stats['accepted']} accepted")
        return self.run

    def fail(self, error_message: str) -> None:
        try:
            db.session.rollback()
            if self.run is not None:
                self.run.mark_failed(error_message)
        except Exception as e:
            logger.error(f"Could not mark census run as failed: {e}")


def run_stored_census(config, run_type: str = 'manual', progress=None):
    """
    Run a census with every outcome persisted, then export records and summaries.

    Returns:
        (CensusResult, exported paths)
    """
    store = CensusStore(config, run_type=run_type)
    store.start()
    try:
        result = run_census(config, store=store, progress=progress)
    except Exception as e:
        store.fail(str(e))
        raise
    store.finish(result)
    paths = export_census(result.records, config.output_dir, config)
    return result, paths
