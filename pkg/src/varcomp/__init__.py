"""Variational completion of systems of differential equations."""
