"""
vqasieve: predicate-sieved generation of visual question answering datasets
from annotated scenes.
"""

__version__ = "0.1.0"
