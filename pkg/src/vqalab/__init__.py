"""No-reference video quality research workbench.

Subpackages cover raw video ingestion, content-diversity statistics,
natural-scene-statistics features, subjective score recovery, a
correlation-based benchmark harness, the mixture-of-experts quality model,
and the subjective-study service.
"""

__version__ = "0.1.0"
