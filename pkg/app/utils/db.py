from typing import Optional, Dict, Any
from flask import current_app
from sqlalchemy.exc import SQLAlchemyError
from app import db


def safe_commit(action: Optional[str] = None, context: Optional[Dict[str, Any]] = None) -> bool:
    """Commit the current session; on failure roll back, log and return False."""
    try:
        db.session.commit()
        return True
    except SQLAlchemyError as e:
        db.session.rollback()
        if action:
            current_app.logger.exception(
                "Database commit failed during %s | context=%s | error=%s", action, context or {}, e
            )
        else:
            current_app.logger.exception("Database commit failed: %s", e)
        return False


def record_run(kind: str, parameters: Dict[str, Any], summary: Dict[str, Any]):
    """Store an analysis run; returns the saved record or None if the commit failed."""
    from app.models import AnalysisRun

    run = AnalysisRun(kind, parameters=parameters, summary=summary)
    db.session.add(run)
    if not safe_commit('record_run', {'kind': kind}):
        return None
    return run
