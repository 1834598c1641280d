"""Compiler and verifier for high-level string-to-string for-programs."""

__version__ = "0.1.0"

#: Reserved letter standing for "any character outside the support".
BLANK = chr(0xE000)
