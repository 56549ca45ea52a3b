"""Request and response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class FormulaRequest(BaseModel):
    formula: str


class VarsRequest(BaseModel):
    formula: str
    vars: list[str] | str = Field(description="ordered ambient variables, list or comma-separated")

    def var_list(self) -> list[str]:
        if isinstance(self.vars, str):
            return [v.strip() for v in self.vars.split(",") if v.strip()]
        return list(self.vars)


class ParseResponse(BaseModel):
    formula: str
    free_variables: list[str]


class QeResponse(BaseModel):
    formula: str


class SatResponse(BaseModel):
    closed: bool
    value: bool


class DecomposeRequest(VarsRequest):
    function_of: str | None = None


class DimResponse(BaseModel):
    dim: int | None
    empty: bool


class RectiPieceOut(BaseModel):
    piece: str
    map: dict
    inverse: dict
    l: int


class RectiResponse(BaseModel):
    pieces: list[RectiPieceOut]


class ClassifyResponse(BaseModel):
    dim: int
    map: dict
    inverse: dict | None
    injectivity: str
    surjectivity: str


class IsomorphicRequest(BaseModel):
    formula_x: str
    vars_x: list[str] | str
    formula_y: str
    vars_y: list[str] | str


class IsomorphicResponse(BaseModel):
    isomorphic: bool


class ElimImRequest(VarsRequest):
    out: str
    points: list[list[int]]


class ElimImResponse(BaseModel):
    codes: list[dict]
    equal: list[list[bool]]


class CheckRequest(BaseModel):
    kind: str = Field(description="partition | decompose | bijection")
    formula: str | None = None
    vars: list[str] | str | None = None
    pieces: list[str] | None = None
    map: dict | None = None
    source: str | None = None
    target: str | None = None
    radius: int = 15

    def var_list(self) -> list[str]:
        if self.vars is None:
            return []
        if isinstance(self.vars, str):
            return [v.strip() for v in self.vars.split(",") if v.strip()]
        return list(self.vars)


class CheckResponse(BaseModel):
    report: dict


class ErrorBody(BaseModel):
    kind: str
    message: str
    line: int | None = None
    column: int | None = None
