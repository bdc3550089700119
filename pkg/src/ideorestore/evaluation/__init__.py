from .metrics import MetricSummary, rank_of_truth, rank_to_metrics
from .harness import (
    EvalReport,
    ImageOnlyPredictor,
    RestorerPredictor,
    SweepResult,
    TextOnlyPredictor,
    evaluate,
    format_report_table,
    mask_area_sweep,
    multi_mask_table,
    write_report_jsonl,
)

__all__ = [
    "MetricSummary",
    "rank_of_truth",
    "rank_to_metrics",
    "EvalReport",
    "ImageOnlyPredictor",
    "RestorerPredictor",
    "SweepResult",
    "TextOnlyPredictor",
    "evaluate",
    "format_report_table",
    "mask_area_sweep",
    "multi_mask_table",
    "write_report_jsonl",
]
