"""Servicios: instancias, verificadores, claims y experimentos."""
