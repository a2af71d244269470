import logging
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Any, Iterator, Mapping, Sequence, Union

import numpy as np
from scipy.spatial.distance import cdist, pdist

from app.classes.exceptions import GeometryError
from app.config import Config

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Point:
    """
    A location in d-dimensional Euclidean space (voters and candidates).
    One-dimensional locations are Points of dimension 1.
    """
    coords: tuple[float, ...]

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        if not coords:
            raise GeometryError("Error: un punto necesita al menos una coordenada.")
        if not all(math.isfinite(c) for c in coords):
            raise GeometryError(f"Error: coordenadas no finitas en {coords}.")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def of(cls, *coords: float) -> "Point":
        return cls(tuple(coords))

    @property
    def dimension(self) -> int:
        return len(self.coords)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)

    def __iter__(self) -> Iterator[float]:
        return iter(self.coords)

    def __repr__(self) -> str:
        return f"Point{self.coords}"


PointLike = Union[Point, Sequence[float], float]


def as_point(value: PointLike) -> Point:
    """Acepta Point, secuencia de coordenadas o un escalar (1-D)."""
    if isinstance(value, Point):
        return value
    if isinstance(value, (int, float)):
        return Point((float(value),))
    return Point(tuple(value))


def _check_dimensions(p: Point, q: Point) -> None:
    if p.dimension != q.dimension:
        raise GeometryError(f"Error: dimensiones distintas ({p.dimension} vs {q.dimension}).")


def distance(p: Point, q: Point) -> float:
    """Euclidean (L2) distance between two points of equal dimension."""
    _check_dimensions(p, q)
    return float(np.linalg.norm(p.as_array() - q.as_array()))


def midpoint(p: Point, q: Point) -> Point:
    _check_dimensions(p, q)
    return Point(tuple((a + b) / 2.0 for a, b in zip(p.coords, q.coords)))


class CandidateSet:
    """
    Ordered candidate locations y_1..y_m with the derived statistics d_min, d_max and sigma.

    Indices are 1-based (``cs[1]`` is y_1). One-dimensional sets are sorted ascending at
    construction so that leftmost/rightmost is index order.

    Attributes:
        points: tuple of candidate Points
        d_min / d_max: minimum and maximum pairwise distance
        sigma: d_max / d_min
        name / params: optional builtin label and its parameters (e.g. "simplex", {"m": 4, "r": 3})
    """
    def __init__(self, candidates: Sequence[PointLike], name: str = "custom",
                 params: Mapping[str, Any] | None = None):
        points = tuple(as_point(c) for c in candidates)
        if len(points) < 2:
            raise GeometryError(f"Error: se necesitan al menos 2 candidatos (recibidos {len(points)}).")
        dims = {p.dimension for p in points}
        if len(dims) != 1:
            raise GeometryError(f"Error: candidatos con dimensiones distintas {sorted(dims)}.")
        if points[0].dimension == 1:
            points = tuple(sorted(points, key=lambda p: p.coords[0]))

        self.points = points
        self.name = name
        self.params = dict(params or {})
        self.matrix = np.array([p.coords for p in points], dtype=float)

        # Distancias entre pares: d_min debe quedar lejos de 0 para que sigma tenga sentido
        pairwise = pdist(self.matrix)
        self.d_min = float(pairwise.min())
        self.d_max = float(pairwise.max())
        if self.d_min <= Config.DISTINCT_TOLERANCE:
            raise GeometryError("Error: hay candidatos duplicados (d_min = 0).")
        self.sigma = self.d_max / self.d_min

    # --- Metodos publicos ---
    @property
    def m(self) -> int:
        return len(self.points)

    @property
    def dimension(self) -> int:
        return self.points[0].dimension

    def __len__(self) -> int:
        return self.m

    def __getitem__(self, index: int) -> Point:
        if not 1 <= index <= self.m:
            raise IndexError(f"Candidato {index} fuera de rango [1, {self.m}].")
        return self.points[index - 1]

    def __iter__(self) -> Iterator[Point]:
        return iter(self.points)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CandidateSet) and self.points == other.points

    def __hash__(self) -> int:
        return hash(self.points)

    def __repr__(self) -> str:
        return f"CandidateSet({self.name}, m={self.m}, d={self.dimension}, sigma={self.sigma:.6g})"

    def indices(self) -> range:
        return range(1, self.m + 1)

    def pairs(self) -> list[tuple[int, int]]:
        """All unordered pairs (k, l), k < l, in lexicographic order."""
        return list(combinations(self.indices(), 2))

    def distances_from(self, points: Sequence[Point] | np.ndarray) -> np.ndarray:
        """Distance matrix (len(points) x m) from the given points to every candidate."""
        if isinstance(points, np.ndarray):
            array = np.atleast_2d(points)
        else:
            array = np.array([p.coords for p in points], dtype=float)
        if array.shape[1] != self.dimension:
            raise GeometryError(f"Error: dimensión {array.shape[1]} distinta de la del conjunto ({self.dimension}).")
        return cdist(array, self.matrix)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.matrix.min(axis=0), self.matrix.max(axis=0)


def sigma(cs: CandidateSet) -> float:
    """Max pairwise candidate distance over min pairwise candidate distance."""
    return cs.sigma
