"""Mecanismos scv de dos ganadores en espacio euclídeo."""
