"""Cantor ultrametric constructions."""
