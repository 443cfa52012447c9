"""Two-type Richardson competition on graphs with engineered coexistence regions."""
__version__ = "0.1.0"
