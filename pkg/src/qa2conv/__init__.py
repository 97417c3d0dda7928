"""qa2conv: turn single-turn extractive QA datasets into multi-turn
conversational QA datasets, with scoring, dedup, knowledge-graph ordering,
question rewriting, and evaluation utilities."""

__version__ = "0.1.0"
