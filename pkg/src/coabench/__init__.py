"""coabench: learnable image encryption schemes, ciphertext-only attacks
against them, and the metrics to score what the attacks recover."""

__version__ = "0.1.0"
