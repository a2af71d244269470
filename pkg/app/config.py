import logging
import os
from dotenv import load_dotenv


# Detect the environment (development, production, etc.) and load the corresponding .env file
env = os.getenv("APP_ENV", "example") # Default to "example" if APP_ENV is not set
env_file = f".env.{env}" # e.g., .env.development, .env.production
_env_found = os.path.exists(env_file)
if _env_found:
    load_dotenv(env_file)
else:
    load_dotenv()


def _get_bool(name: str, default: bool) -> bool:
    value = os.getenv(name)
    if value is None:
        return default
    return value.strip().lower() in ("1", "true", "yes", "on")


# Configuración de logging para toda la aplicación
logging.basicConfig(
    level=getattr(logging, os.getenv("LOG_LEVEL", "WARNING").upper(), logging.WARNING), # Por defecto solo advertencias y errores
    format='%(asctime)s - %(levelname)s - %(message)s',
    handlers=[
        logging.FileHandler(os.getenv("LOG_FILE", "scv_harness.log")), # Guarda en archivo
        logging.StreamHandler()                # Muestra en pantalla (stderr, stdout queda libre para CSV/JSON)
    ],
    force=True  # Sobrescribe la configuración de otras librerías
)

if not _env_found:
    # No se imprime: stdout lleva la salida de los comandos
    logging.getLogger(__name__).info(f"{env_file} no encontrado. Se usa el .env por defecto si existe.")


class Config:
    # Tolerancias numéricas
    TOLERANCE = float(os.getenv("TOLERANCE", 1e-9)) # Empates de distancia, normalización y violaciones SP
    DISTINCT_TOLERANCE = float(os.getenv("DISTINCT_TOLERANCE", 1e-12)) # Candidatos distintos y OPT nulo

    # Reproducibilidad
    SEED = int(os.getenv("SEED", 42))

    # Verificación de strategy-proofness
    SP_MAX_N = int(os.getenv("SP_MAX_N", 4))
    SP_GRID_STEP = float(os.getenv("SP_GRID_STEP", 0.05)) # Rejilla 1-D
    SP_ALPHA_STEP = float(os.getenv("SP_ALPHA_STEP", 0.1)) # Rejilla de alfas de los subespacios equidistantes
    SP_RANDOM_POINTS = int(os.getenv("SP_RANDOM_POINTS", 200))
    SP_MAX_EVALUATIONS = int(os.getenv("SP_MAX_EVALUATIONS", 5_000_000))

    # Búsqueda adversaria de distorsión
    SEARCH_GRID_STEP = float(os.getenv("SEARCH_GRID_STEP", 1.0))
    SEARCH_RANDOM_PROFILES = int(os.getenv("SEARCH_RANDOM_PROFILES", 200))
    SEARCH_EXHAUSTIVE_LIMIT = int(os.getenv("SEARCH_EXHAUSTIVE_LIMIT", 20_000))
    SEARCH_MAX_ROUNDS = int(os.getenv("SEARCH_MAX_ROUNDS", 8))
    SEARCH_ALPHA_STEP = float(os.getenv("SEARCH_ALPHA_STEP", 0.25)) # Rejilla de alfas más gruesa para la búsqueda

    # Límites de la enumeración exhaustiva de monotonía
    MONOTONE_MAX_N = int(os.getenv("MONOTONE_MAX_N", 20))
    MONOTONE_MAX_M = int(os.getenv("MONOTONE_MAX_M", 6))

    # Instancias
    DEFAULT_R = float(os.getenv("DEFAULT_R", 3.0)) # r por defecto de las instancias símplex

    # Barridos
    MAX_WORKERS = int(os.getenv("MAX_WORKERS", 1))
    SWEEP_TIMING = _get_bool("SWEEP_TIMING", False) # runtime_ms real rompe la salida byte a byte

    # Configuración de la aplicación
    APP_HOST = os.getenv("APP_HOST", "0.0.0.0")
    APP_PORT = int(os.getenv("APP_PORT", 8000))
