class ScvError(ValueError):
    """Base de los errores de validación del proyecto."""


class GeometryError(ScvError):
    """Puntos o conjuntos de candidatos inválidos (dimensiones, duplicados, no finitos)."""


class ProfileError(ScvError):
    """Elecciones, perfiles de ubicación o familias de perfiles inválidos."""


class MechanismError(ScvError):
    """Un mecanismo no admite la elección recibida o su salida no es una distribución."""


class VerificationError(ScvError):
    """Parámetros fuera de rango en los verificadores."""


class ConfigError(ScvError):
    """Configuración de experimento inválida (CLI / API)."""
