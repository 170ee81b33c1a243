"""plrmc - periodic locally reversible Pauli measurement circuits"""

__version__ = "0.1.0"
