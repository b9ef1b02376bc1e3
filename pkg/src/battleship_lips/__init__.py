"""Language-informed program sampling for Battleship questions."""

__version__ = "0.1.0"
