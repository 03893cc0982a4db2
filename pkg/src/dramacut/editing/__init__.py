from dramacut.editing.baseline import Mode, end2end_edit, spans_to_cuts
from dramacut.editing.boundaries import ending_candidates, filter_boundaries, opening_candidates
from dramacut.editing.highlights import merge_highlight_clips, score_scenes
from dramacut.editing.pipeline import EditOptions, EditRun, edit, run_edit
from dramacut.editing.rules import Audience, HighlightRuleSet, Rule, builtin_rules, load_rules, save_rules
from dramacut.editing.windows import (
    apply_prune_decisions,
    dedup_windows,
    enumerate_windows,
    prune_window,
    splice,
)

__all__ = [
    "Audience",
    "EditOptions",
    "EditRun",
    "HighlightRuleSet",
    "Mode",
    "Rule",
    "apply_prune_decisions",
    "builtin_rules",
    "dedup_windows",
    "edit",
    "end2end_edit",
    "ending_candidates",
    "enumerate_windows",
    "filter_boundaries",
    "load_rules",
    "merge_highlight_clips",
    "opening_candidates",
    "prune_window",
    "run_edit",
    "save_rules",
    "score_scenes",
    "spans_to_cuts",
    "splice",
]
