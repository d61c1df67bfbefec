"""Chronic shelter-use prediction pipeline.

Event-record ingestion, chronic labeling, 90-day feature extraction, three
classifiers (threshold, logistic regression, MLP), stratified k-fold
evaluation with cohort access-history reports, and a seeded synthetic cohort
generator.
"""

from shelterkit._core import *  # noqa: F401,F403
from shelterkit._core import __version__  # noqa: F401
