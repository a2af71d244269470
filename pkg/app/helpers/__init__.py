"""Utilidades: formato numérico y ficheros de instancia."""
