def format_float(value: float | None, digits: int = 12) -> str:
    """
    Devuelve el número con ``digits`` cifras significativas para las columnas del CSV.
    Ejemplo: format_float(7/3) -> "2.33333333333"; format_float(None) -> ""
    """
    if value is None:
        return ""
    return f"{value:.{digits}g}"
