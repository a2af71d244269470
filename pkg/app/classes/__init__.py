"""Clases de dominio: geometría, elecciones, mecanismos e informes."""
