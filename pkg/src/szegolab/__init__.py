"""szegolab - non-smooth functional calculus and Szego-type trace asymptotics."""

__version__ = "0.1.0"
