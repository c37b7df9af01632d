# config.py
"""
JSON experiment configs and exchange documents, validated by pydantic before
any computation. Unknown keys are rejected everywhere.
"""
from typing import Any, Dict, List, Literal, Optional, Type, TypeVar

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from errors import ConfigError, SpectralError
import file_utils
from file_utils import load_json
from hermitian_core import HermitianMatrix, IndexSet
from random_models import (
    Family,
    GraphSpec,
    ModelSpec,
    SiteDistribution,
    SiteKind,
    block_hopping,
    default_hopping,
    grid_graph,
    path_graph,
)

ModelT = TypeVar("ModelT", bound=BaseModel)

UINT64_MAX = 2 ** 64 - 1


class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


# ---------- Exchange documents ----------

class MatrixDocument(Strict):
    dim: int = Field(ge=1)
    re: List[List[float]]
    im: Optional[List[List[float]]] = None

    @model_validator(mode="after")
    def check_shape(self):
        for name, rows in (("re", self.re), ("im", self.im)):
            if rows is None:
                continue
            if len(rows) != self.dim or any(len(r) != self.dim for r in rows):
                raise ValueError(f"{name} must be a {self.dim}x{self.dim} array")
        return self

    def to_matrix(self) -> HermitianMatrix:
        re = np.asarray(self.re, dtype=np.float64)
        im = np.zeros_like(re) if self.im is None else np.asarray(self.im, dtype=np.float64)
        m = re + 1j * im
        if not np.allclose(m, m.conj().T, rtol=0.0, atol=1e-12 * max(1.0, float(np.max(np.abs(m))))):
            raise ValueError("matrix is not Hermitian")
        return HermitianMatrix(m)

    @classmethod
    def from_matrix(cls, matrix: HermitianMatrix) -> "MatrixDocument":
        return cls(**matrix.to_document())


class GraphDocument(Strict):
    kind: Literal["path", "grid", "edges"]
    n: Optional[int] = Field(default=None, ge=1)
    nx: Optional[int] = Field(default=None, ge=1)
    ny: Optional[int] = Field(default=None, ge=1)
    vertices: Optional[int] = Field(default=None, ge=1)
    edges: Optional[List[List[int]]] = None
    max_degree: Optional[int] = Field(default=None, ge=0)

    @model_validator(mode="after")
    def check_kind_fields(self):
        required = {"path": ("n",), "grid": ("nx", "ny"), "edges": ("vertices",)}[self.kind]
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f"graph kind {self.kind!r} needs {', '.join(missing)}")
        if self.edges is not None and any(len(e) != 2 for e in self.edges):
            raise ValueError("edges must be vertex pairs")
        return self

    def to_graph(self) -> GraphSpec:
        if self.kind == "path":
            return path_graph(self.n)
        if self.kind == "grid":
            return grid_graph(self.nx, self.ny)
        return GraphSpec.from_edges(self.vertices, self.edges or [], self.max_degree)


class SiteDistributionDocument(Strict):
    kind: Literal["uniform_interval", "uniform_disc", "custom"]
    support_bound: float = Field(default=1.0, gt=0)
    regularity_alpha: float = Field(default=1.0, gt=0, le=1)
    density: Optional[List[float]] = None

    @model_validator(mode="after")
    def check_density(self):
        if (self.kind == "custom") != (self.density is not None):
            raise ValueError("density is required for, and only for, the custom kind")
        return self

    def to_distribution(self) -> SiteDistribution:
        density = None if self.density is None else np.asarray(self.density, dtype=np.float64)
        return SiteDistribution(SiteKind(self.kind), self.support_bound, self.regularity_alpha, density)


class ModelSpecDocument(Strict):
    family: Literal["anderson", "random_block", "bdg"]
    graph: GraphDocument
    site_dist: SiteDistributionDocument
    coupling: float = Field(default=1.0, ge=0)
    energy: float = 0.0
    block_size: Optional[int] = Field(default=None, ge=1)
    hopping: Optional[MatrixDocument] = None
    hopping_scale: float = 1.0

    def to_spec(self) -> ModelSpec:
        family = Family(self.family)
        graph = self.graph.to_graph()
        k = self.block_size or (2 if family == Family.BDG else 1)
        if self.hopping is not None:
            hopping = self.hopping.to_matrix()
        elif family == Family.RANDOM_BLOCK:
            hopping = block_hopping(graph, k)
        else:
            hopping = default_hopping(graph, family)
        return ModelSpec(
            graph=graph,
            family=family,
            site_dist=self.site_dist.to_distribution(),
            coupling=self.coupling,
            energy=self.energy,
            block_size=k,
            hopping=hopping.scaled(self.hopping_scale),
        )


# ---------- Command configs ----------

class MatrixSource(Strict):
    matrix: Optional[MatrixDocument] = None
    matrix_path: Optional[str] = None

    @model_validator(mode="after")
    def check_single_source(self):
        if (self.matrix is None) == (self.matrix_path is None):
            raise ValueError("give exactly one of matrix, matrix_path")
        return self

    def load_matrix(self) -> HermitianMatrix:
        if self.matrix is not None:
            return self.matrix.to_matrix()
        return file_utils.load_matrix(self.matrix_path)


class CountConfig(MatrixSource):
    eps: List[float] = Field(min_length=1)
    m: List[int] = Field(default_factory=lambda: [1])
    energy: float = 0.0

    @field_validator("eps")
    @classmethod
    def eps_positive(cls, values: List[float]) -> List[float]:
        for v in values:
            if not v > 0:
                raise ValueError(f"eps values must be positive, got {v}")
        return values

    @field_validator("m")
    @classmethod
    def m_positive(cls, values: List[int]) -> List[int]:
        if not values or any(v < 1 for v in values):
            raise ValueError("m values must be positive integers")
        return values


class WitnessConfig(MatrixSource):
    eps: float = Field(gt=0)
    m: int = Field(ge=1)
    K: Optional[float] = Field(default=None, gt=0)
    block: int = Field(default=1, ge=1)
    alpha: Optional[List[int]] = None
    beta: Optional[List[int]] = None

    @model_validator(mode="after")
    def check_pair(self):
        if (self.alpha is None) != (self.beta is None):
            raise ValueError("alpha and beta must be given together")
        return self

    def index_pair(self, n: int) -> Optional[tuple]:
        if self.alpha is None:
            return None
        return IndexSet.of(n, self.alpha), IndexSet.of(n, self.beta)


class ReduceConfig(Strict):
    b1: MatrixDocument
    b2: MatrixDocument
    eps: List[float] = Field(default_factory=list)

    @field_validator("eps")
    @classmethod
    def eps_in_range(cls, values: List[float]) -> List[float]:
        for v in values:
            if not 0 < v < 0.5:
                raise ValueError(f"eps values must lie in (0, 1/2), got {v}")
        return values


class ModelSource(Strict):
    spec: Optional[ModelSpecDocument] = None
    spec_path: Optional[str] = None
    trials: int = Field(default=10_000, ge=1)
    seed: int = Field(default=0, ge=0, le=UINT64_MAX)
    jobs: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def check_single_source(self):
        if (self.spec is None) == (self.spec_path is None):
            raise ValueError("give exactly one of spec, spec_path")
        return self

    def load_spec(self) -> ModelSpec:
        doc = self.spec
        if doc is None:
            doc = validate_document(ModelSpecDocument, load_json(self.spec_path), source=self.spec_path)
        return doc.to_spec()


class WegnerConfig(ModelSource):
    eps: List[float] = Field(min_length=1)
    m: List[int] = Field(default_factory=lambda: [1])
    alpha: Optional[float] = Field(default=None, gt=0)
    fit: bool = True
    minami: bool = False

    @field_validator("eps")
    @classmethod
    def eps_positive(cls, values: List[float]) -> List[float]:
        for v in values:
            if not v > 0:
                raise ValueError(f"eps values must be positive, got {v}")
        return values

    @field_validator("m")
    @classmethod
    def m_positive(cls, values: List[int]) -> List[int]:
        if not values or any(v < 1 for v in values):
            raise ValueError("m values must be positive integers")
        return values


class DetEventConfig(ModelSource):
    a: int
    delta: List[float] = Field(min_length=1)
    regularity_K: float = Field(default=1.0, gt=0)
    alpha: Optional[float] = Field(default=None, gt=0)

    @field_validator("a")
    @classmethod
    def shift_large(cls, value: int) -> int:
        if abs(value) < 3:
            raise ValueError(f"|a| must be at least 3, got {value}")
        return value

    @field_validator("delta")
    @classmethod
    def delta_positive(cls, values: List[float]) -> List[float]:
        for v in values:
            if not v > 0:
                raise ValueError(f"delta values must be positive, got {v}")
        return values


# ---------- Loading ----------

def _describe(exc: ValidationError, source: str) -> str:
    lines = []
    for err in exc.errors():
        where = ".".join(str(p) for p in err.get("loc", ())) or "<root>"
        lines.append(f"{source}: field {where}: {err.get('msg')}")
    return "\n".join(lines)


def validate_document(model: Type[ModelT], data: Any, source: str = "<config>") -> ModelT:
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_describe(exc, source)) from exc


def load_config(path: str, model: Type[ModelT], overrides: Optional[Dict[str, Any]] = None) -> ModelT:
    """Read a JSON config, apply non-None command-line overrides, then validate."""
    raw = load_json(path)
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top-level value must be an object")
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value
    return validate_document(model, raw, source=str(path))


def build_or_config_error(builder, source: str):
    """Run a document-to-domain conversion, reporting domain rejections as config errors."""
    try:
        return builder()
    except (SpectralError, ValueError) as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def dump_config(config: BaseModel) -> Dict[str, Any]:
    return config.model_dump(mode="json", exclude_none=True)
