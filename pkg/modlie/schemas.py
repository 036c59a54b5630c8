# modlie/schemas.py
"""
Pydantic models for every JSON document modlie reads or writes:
algebras, cocycles, fixture expectations and p|2p-maps.

A vector is written as a list of ``{"coef": <scalar text>, "k": <basis name>}``.
"""
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, field_validator


class TermModel(BaseModel):
    coef: str = "1"
    k: str

    @field_validator("coef", mode="before")
    @classmethod
    def _coef_as_text(cls, v):
        return str(v)


class BasisModel(BaseModel):
    name: str
    parity: Literal["even", "odd"] = "even"
    weight: Optional[List[int]] = None
    degree: Optional[int] = None


class BracketModel(BaseModel):
    i: str
    j: str
    value: List[TermModel] = Field(default_factory=list)


class ParametersModel(BaseModel):
    invertible: List[str] = Field(default_factory=list)
    even: List[str] = Field(default_factory=list)
    odd: List[str] = Field(default_factory=list)


class AlgebraModel(BaseModel):
    """Basis plus nonzero brackets of a Lie superalgebra"""

    name: Optional[str] = None
    p: int
    k: int = 1
    parameters: Optional[ParametersModel] = None
    basis: List[BasisModel]
    brackets: List[BracketModel] = Field(default_factory=list)


class CocycleModel(BaseModel):
    """Values of a 2-cocycle on basis pairs; the deform adds ``parameter * value``"""

    parameter: str = "lambda"
    parity: Literal["even", "odd"] = "even"
    degree: Optional[int] = None
    values: List[BracketModel] = Field(default_factory=list)


class ExpectModel(BaseModel):
    """Expected p|2p-map of a deform shipped with a fixture"""

    algebra: Optional[str] = None
    cocycle: Optional[str] = None
    modulo_center: bool = False
    center: List[List[TermModel]] = Field(default_factory=list)
    torus: Optional[List[str]] = None
    values: Dict[str, List[TermModel]] = Field(default_factory=dict)
    source: Optional[str] = None


class PMapModel(BaseModel):
    algebra: Optional[str] = None
    even: Dict[str, List[TermModel]] = Field(default_factory=dict)
    odd: Dict[str, List[TermModel]] = Field(default_factory=dict)
    center: List[List[TermModel]] = Field(default_factory=list)
    ambiguous: List[str] = Field(default_factory=list)
