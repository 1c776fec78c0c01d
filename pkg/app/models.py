from datetime import datetime
from typing import Dict

from .extensions import db


class CensusRun(db.Model):
    """One census run of a format up to a weight bound."""
    __tablename__ = 'census_runs'

    id = db.Column(db.Integer, primary_key=True)
    run_key = db.Column(db.String(255), nullable=False, index=True)
    run_type = db.Column(db.String(50), default='manual')  # 'manual', 'cli', 'scheduled'
    format_name = db.Column(db.String(10), nullable=False)  # 'ci2', 'ci3', 'ci4', 'gr25', 'p2p2'
    max_weight_sum = db.Column(db.Integer, nullable=False)
    started_at = db.Column(db.DateTime, default=datetime.utcnow)
    completed_at = db.Column(db.DateTime, nullable=True)
    status = db.Column(db.String(20), default='running')  # 'running', 'completed', 'failed'
    duration_seconds = db.Column(db.Float, nullable=True)

    # Statistics
    families = db.Column(db.Integer, default=0)
    accepted = db.Column(db.Integer, default=0)
    rejected = db.Column(db.Integer, default=0)
    refuted = db.Column(db.Integer, default=0)
    errors_count = db.Column(db.Integer, default=0)
    exit_code = db.Column(db.Integer, nullable=True)

    # Details
    config = db.Column(db.JSON, default=dict)
    error_message = db.Column(db.Text, nullable=True)
    details = db.Column(db.JSON, nullable=True)

    outcomes = db.relationship('FamilyOutcome', backref='run', lazy='dynamic',
                               cascade='all, delete-orphan')

    def mark_completed(self, stats: Dict = None):
        """Mark the run as completed with statistics."""
        self.completed_at = datetime.utcnow()
        self.duration_seconds = (self.completed_at - self.started_at).total_seconds()
        self.status = 'completed'

        if stats:
            self.families = stats.get('families', 0)
            self.accepted = stats.get('accepted', 0)
            self.rejected = stats.get('rejected', 0)
            self.refuted = stats.get('refuted', 0)
            self.errors_count = stats.get('errors_count', 0)
            self.exit_code = stats.get('exit_code')
            self.details = stats.get('rejections')

        db.session.commit()

    def mark_failed(self, error_message: str):
        """Mark the run as failed with error message."""
        self.completed_at = datetime.utcnow()
        self.duration_seconds = (self.completed_at - self.started_at).total_seconds()
        self.status = 'failed'
        self.error_message = error_message
        db.session.commit()

    def __repr__(self):
        return f'<CensusRun {self.run_key}: {self.status} at {self.started_at}>'


class FamilyOutcome(db.Model):
    """Pipeline outcome of one family within a run."""
    __tablename__ = 'family_outcomes'

    id = db.Column(db.Integer, primary_key=True)
    run_id = db.Column(db.Integer, db.ForeignKey('census_runs.id', ondelete='CASCADE'), nullable=False)
    family_key = db.Column(db.String(255), nullable=False, index=True)
    accepted = db.Column(db.Boolean, default=False)
    stage = db.Column(db.String(30), nullable=True)  # rejecting stage
    reason = db.Column(db.String(50), nullable=True)
    record = db.Column(db.JSON, nullable=True)
    rejection = db.Column(db.JSON, nullable=True)
    error = db.Column(db.Text, nullable=True)
    timings = db.Column(db.JSON, nullable=True)
    computed_at = db.Column(db.DateTime, default=datetime.utcnow)

    __table_args__ = (db.UniqueConstraint('run_id', 'family_key', name='unique_run_family'),)

    def to_dict(self) -> Dict:
        """Same shape as search.process_family returns."""
        return {
            'key': self.family_key,
            'accepted': bool(self.accepted),
            'record': self.record,
            'rejection': self.rejection,
            'error': self.error,
            'timings': self.timings or {},
        }

    def __repr__(self):
        return f'<FamilyOutcome {self.family_key}: {"accepted" if self.accepted else self.reason}>'
