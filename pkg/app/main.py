# Primero loggeamos el inicio de la aplicación para confirmar que el logging funciona correctamente
import logging

from fastapi.concurrency import asynccontextmanager
from app.config import Config
# Importamos clases de la aplicación
from app.classes.exceptions import ScvError
from app.classes.mechanisms import list_mechanisms
from app.classes.reports import ClaimResult, DistortionReport, ExperimentConfig, RunResult, SPReport, SweepRow
from app.services.claims import CLAIMS, list_claims
from app.services.experiments import ExperimentService
from app.services.instances import FAMILIES, list_families

# librerias python
from pydantic import BaseModel, ValidationError
from fastapi import FastAPI, HTTPException
from typing import Any, Callable, List, Optional
import uvicorn


logger = logging.getLogger(__name__)
logger.info("API scv iniciada")

# 1. Recursos compartidos por las peticiones
app_resources = {}
# 2. Ciclo de vida
@asynccontextmanager
async def lifespan(app: FastAPI):
    # --- CÓDIGO AL ARRANCAR ---
    app_resources["service"] = ExperimentService()
    logger.info(f"Servicio de experimentos listo ({app_resources['service'].max_workers} procesos)")

    yield

    # --- CÓDIGO AL CERRAR ---
    app_resources.clear()

# 3. Pasamos el lifespan a la instancia de FastAPI
app = FastAPI(lifespan=lifespan, title="scv two-winner mechanisms")


# --- Modelos de Datos (Pydantic) ---
class InstanceQuery(BaseModel):
    instance: Optional[str] = None
    instance_file: Optional[str] = None
    mechanism: str
    n: Optional[int] = None
    sigma: Optional[float] = None
    r: Optional[float] = None
    m: Optional[int] = None
    seed: int = Config.SEED
    grid_step: Optional[float] = None
    params: dict[str, Any] = {}

class RunQuery(InstanceQuery):
    actions: Optional[List[int]] = None
    positions: Optional[List[List[float]]] = None

class SweepQuery(InstanceQuery):
    n_values: List[int] = []
    sigma_values: List[float] = []
    r_values: List[float] = []

class ClaimInfo(BaseModel):
    id: str
    summary: str


def _service() -> ExperimentService:
    service = app_resources.get("service")
    if not service:
        raise HTTPException(status_code=500, detail="Servicio no disponible")
    return service


def _execute(command: str, query: BaseModel, action: Callable[[ExperimentConfig], Any]) -> Any:
    """Builds the ExperimentConfig and maps domain errors to HTTP status codes."""
    try:
        config = ExperimentConfig(command=command, **query.model_dump())
        return action(config)
    except (ScvError, ValidationError) as e:
        logger.warning(f"{command}: {e}")
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Error en {command}: {e}")
        raise HTTPException(status_code=500, detail=str(e))


@app.get("/claims", response_model=List[ClaimInfo])
async def claims():
    """Claims reproducibles con `POST /reproduce/{claim_id}`."""
    return [ClaimInfo(id=claim_id, summary=CLAIMS[claim_id].summary) for claim_id in list_claims()]


@app.get("/families", response_model=List[str])
async def families():
    return list_families()


@app.get("/mechanisms", response_model=List[str])
async def mechanisms():
    return list_mechanisms()


@app.post("/run", response_model=RunResult)
def run(query: RunQuery):
    """Ejecuta un mecanismo; si hay posiciones devuelve costes, OPT y ratio."""
    return _execute("run", query, _service().run)


@app.post("/check-sp", response_model=SPReport)
def check_sp(query: InstanceQuery):
    return _execute("check-sp", query, _service().check_sp)


@app.post(
    "/distortion",
    response_model=DistortionReport,
    summary="Búsqueda adversaria de distorsión",
    description="""
    Busca el perfil de n votantes que maximiza E[SC]/OPT para el mecanismo en la instancia dada.
    El resultado es una cota inferior de la distorsión, junto con el perfil testigo.
    """
)
def distortion(query: InstanceQuery):
    return _execute("distortion", query, _service().distortion)


@app.post("/sweep", response_model=List[SweepRow])
def sweep(query: SweepQuery):
    return _execute("sweep", query, _service().sweep)


@app.post("/reproduce/{claim_id}", response_model=ClaimResult)
def reproduce(claim_id: str, params: Optional[dict[str, Any]] = None):
    """
    Reproduce un claim (o evalúa una familia de perfiles) por id.
    Los parámetros van en el cuerpo como objeto JSON, p. ej. {"n": [3, 4, 5]}.
    """
    if claim_id not in CLAIMS and claim_id not in FAMILIES:
        raise HTTPException(status_code=404, detail=f"Claim '{claim_id}' desconocido")
    try:
        config = ExperimentConfig(command="reproduce", claim_id=claim_id, params=params or {})
        return _service().reproduce(config)
    except (ScvError, ValidationError) as e:
        logger.warning(f"reproduce {claim_id}: {e}")
        raise HTTPException(status_code=400, detail=str(e))


if __name__ == "__main__":
    uvicorn.run(app, host=Config.APP_HOST, port=Config.APP_PORT)
