"""Instruction-dataset production pipeline for low-resource languages.

The package covers the full loop: French seed instructions, target-language
drafts, retrieval- and rule-grounded automated checking with three-way
triage, human review round-trips, agreement statistics, dataset analytics
and production-cost modelling.
"""

__version__ = "0.1.0"
