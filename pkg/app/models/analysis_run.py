from datetime import datetime
from app import db


class AnalysisRun(db.Model):
    """Record of an executed analysis (region sweep, basin estimate or index table).

    ``parameters`` holds the inputs exactly as given on the command line and
    ``summary`` a compact JSON-safe result (counts, fractions, indices).
    """

    __tablename__ = 'analysis_runs'

    KINDS = ('regions', 'basin', 'indices')

    id = db.Column(db.Integer, primary_key=True)
    kind = db.Column(db.String(20), nullable=False, index=True)
    parameters = db.Column(db.JSON, nullable=False, default=dict)
    summary = db.Column(db.JSON, nullable=False, default=dict)
    created_at = db.Column(db.DateTime, default=datetime.utcnow, nullable=False, index=True)

    def __init__(self, kind, parameters=None, summary=None):
        if kind not in self.KINDS:
            raise ValueError(f"Unknown analysis kind: {kind}")
        self.kind = kind
        self.parameters = parameters or {}
        self.summary = summary or {}

    def __repr__(self):
        return f'<AnalysisRun {self.id} {self.kind}>'

    def to_dict(self):
        return {
            'id': self.id,
            'kind': self.kind,
            'parameters': self.parameters,
            'summary': self.summary,
            'created_at': self.created_at.isoformat() if self.created_at else None,
        }
