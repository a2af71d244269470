import json
import logging
import os
from typing import Optional, Sequence

from pydantic import BaseModel, ValidationError, model_validator

from app.classes.election import Election, LocationProfile
from app.classes.exceptions import ConfigError
from app.classes.geometry import CandidateSet

logger = logging.getLogger(__name__)


class InstanceDocument(BaseModel):
    """JSON instance format: dimension, candidates and optional actions / positions."""
    dimension: int
    candidates: list[list[float]]
    actions: Optional[list[int]] = None
    positions: Optional[list[list[float]]] = None

    @model_validator(mode="after")
    def _check_dimensions(self):
        if self.dimension < 1:
            raise ValueError(f"dimension={self.dimension} debe ser >= 1")
        rows = self.candidates + (self.positions or [])
        bad = [row for row in rows if len(row) != self.dimension]
        if bad:
            raise ValueError(f"coordenadas con dimensión distinta de {self.dimension}: {bad[:3]}")
        return self


def validate_path(path: str) -> None:
    if not path.lower().endswith(".json"):
        raise ConfigError("Error: Solo se admiten archivos JSON.")
    if not os.path.exists(path):
        raise ConfigError(f"Error: La ruta '{path}' no existe.")
    if not os.path.isfile(path):
        raise ConfigError(f"Error: '{path}' es un directorio.")
    if os.path.getsize(path) == 0:
        raise ConfigError(f"Error: El archivo '{path}' está vacío.")
    if not os.access(path, os.R_OK):
        raise ConfigError(f"Error: Sin permisos de lectura en '{path}'.")


def load_instance(path: str, actions: Optional[Sequence[int]] = None,
                  ) -> tuple[CandidateSet, Optional[Election], Optional[LocationProfile]]:
    """
    Reads an instance file. Actions refer to candidates in file order; when a 1-D file
    lists candidates out of order they are remapped to the sorted indices. ``actions``
    replaces the actions stored in the file and is remapped the same way.
    """
    validate_path(path)
    try:
        with open(path, encoding="utf-8") as f:
            document = InstanceDocument.model_validate(json.load(f))
    except json.JSONDecodeError as e:
        raise ConfigError(f"Error: JSON mal formado en '{path}': {e}")
    except ValidationError as e:
        raise ConfigError(f"Error: instancia inválida en '{path}': {e}")

    name = os.path.splitext(os.path.basename(path))[0]
    candidates = CandidateSet(document.candidates, name=name)

    raw_actions = document.actions if actions is None else list(actions)
    election = None
    if raw_actions is not None:
        order = {tuple(float(c) for c in row): k for k, row in enumerate(candidates.matrix.tolist(), start=1)}
        remap = {k: order[tuple(float(c) for c in row)] for k, row in enumerate(document.candidates, start=1)}
        if any(k != v for k, v in remap.items()):
            logger.warning(f"{path}: candidatos reordenados de izquierda a derecha; acciones reasignadas")
        bad = [a for a in raw_actions if a not in remap]
        if bad:
            raise ConfigError(f"Error: acciones fuera de rango [1, {candidates.m}]: {bad}.")
        election = Election(candidates, tuple(remap[a] for a in raw_actions))

    positions = LocationProfile.of(document.positions) if document.positions else None
    return candidates, election, positions


def dump_instance(path: str, candidates: CandidateSet, election: Election | None = None,
                  positions: LocationProfile | None = None) -> None:
    document = InstanceDocument(
        dimension=candidates.dimension,
        candidates=candidates.matrix.tolist(),
        actions=list(election.actions) if election else None,
        positions=positions.as_array().tolist() if positions else None,
    )
    with open(path, "w", encoding="utf-8") as f:
        f.write(document.model_dump_json(indent=2, exclude_none=True))
