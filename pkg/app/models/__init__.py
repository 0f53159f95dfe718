from .analysis_run import AnalysisRun

__all__ = [
    "AnalysisRun",
]
