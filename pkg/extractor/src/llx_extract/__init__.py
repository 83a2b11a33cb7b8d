"""Front end that turns annotated experiment scripts into llx-cfir/1 documents."""

from .extract import ExtractionConfig, ExtractionWarning, UnsupportedConstructError, extract, load_config

__version__ = "0.1.0"
