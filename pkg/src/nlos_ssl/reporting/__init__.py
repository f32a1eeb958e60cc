from .aggregator import FrameRecord, ResultsAggregator, RunReport, RunSummary, improvement_percent
from .reporter import RunReporter

__all__ = ["FrameRecord", "ResultsAggregator", "RunReport", "RunReporter", "RunSummary", "improvement_percent"]
