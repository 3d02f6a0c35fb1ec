"""Lets `python -m digit_forensics` behave like the console script."""
from .cli import run

run()
