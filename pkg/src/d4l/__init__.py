"""d4l: logging-code defect analysis toolkit.

Parses Java sources, extracts logging statements with their surrounding
control/data-flow context, detects defects with static rules or taxonomy
guided LLM prompting, and scores predictions against labeled datasets.
"""

__version__ = "0.1.0"
