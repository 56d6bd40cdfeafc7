"""Exchange-only qubit gate compilation: basis, model, sequences, optimizers and noise."""

__version__ = "0.1.0"
