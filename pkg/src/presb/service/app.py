"""FastAPI service exposing the calculus.

All computation is pure and per-request; the service holds no state beyond
in-process memo tables, so any number of clients may share one instance.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..cells import cell_to_formula, decompose, decompose_function, decomposition_json
from ..classify import are_isomorphic as _are_isomorphic
from ..classify import classify as _classify
from ..dimension import dimension
from ..errors import ParseError, PresbError
from ..imaginaries import FiberCodeFamily, fibers_equal
from ..maps import input_names, map_from_json, map_json
from ..oracle import check_bijection_on_box, check_partition
from ..parser import parse, render
from ..qe import decide_sentence, eliminate_quantifiers, satisfiable
from ..recti import rectilinearize
from ..syntax import free_variables
from .models import (
    CheckRequest,
    CheckResponse,
    ClassifyResponse,
    DecomposeRequest,
    DimResponse,
    ElimImRequest,
    ElimImResponse,
    FormulaRequest,
    IsomorphicRequest,
    IsomorphicResponse,
    ParseResponse,
    QeResponse,
    RectiPieceOut,
    RectiResponse,
    SatResponse,
    VarsRequest,
)


def create_app() -> FastAPI:
    app = FastAPI(title="presb", description="Exact calculus for Presburger-definable sets")

    @app.exception_handler(ParseError)
    async def on_parse_error(request: Request, exc: ParseError):
        return JSONResponse(
            status_code=400,
            content={"kind": "syntax", "message": str(exc), "line": exc.line, "column": exc.column},
        )

    @app.exception_handler(PresbError)
    async def on_semantic_error(request: Request, exc: PresbError):
        return JSONResponse(status_code=400, content={"kind": "semantic", "message": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/parse", response_model=ParseResponse)
    def do_parse(req: FormulaRequest):
        f = parse(req.formula)
        return ParseResponse(formula=render(f), free_variables=free_variables(f))

    @app.post("/qe", response_model=QeResponse)
    def do_qe(req: FormulaRequest):
        return QeResponse(formula=render(eliminate_quantifiers(parse(req.formula))))

    @app.post("/sat", response_model=SatResponse)
    def do_sat(req: FormulaRequest):
        f = parse(req.formula)
        if free_variables(f):
            return SatResponse(closed=False, value=satisfiable(f))
        return SatResponse(closed=True, value=decide_sentence(f))

    @app.post("/decompose")
    def do_decompose(req: DecomposeRequest):
        f = parse(req.formula)
        names = req.var_list()
        if req.function_of is not None:
            dec = decompose_function(f, [v for v in names if v != req.function_of], req.function_of)
        else:
            dec = decompose(f, names)
        return decomposition_json(dec)

    @app.post("/dim", response_model=DimResponse)
    def do_dim(req: VarsRequest):
        d = dimension(parse(req.formula), req.var_list())
        return DimResponse(dim=d, empty=d is None)

    @app.post("/recti", response_model=RectiResponse)
    def do_recti(req: VarsRequest):
        pieces = rectilinearize(parse(req.formula), req.var_list())
        return RectiResponse(
            pieces=[
                RectiPieceOut(
                    piece=render(rp.piece),
                    map=map_json(rp.map),
                    inverse=map_json(rp.inverse),
                    l=rp.orthant_dim,
                )
                for rp in pieces
            ]
        )

    @app.post("/classify", response_model=ClassifyResponse)
    def do_classify(req: VarsRequest):
        names = req.var_list()
        cert = _classify(parse(req.formula), names)
        return ClassifyResponse(
            dim=cert.map.output_arity,
            map=map_json(cert.map),
            inverse=None if cert.inverse_map is None else map_json(cert.inverse_map),
            injectivity=render(cert.injectivity),
            surjectivity=render(cert.surjectivity),
        )

    @app.post("/isomorphic", response_model=IsomorphicResponse)
    def do_isomorphic(req: IsomorphicRequest):
        vx = req.vars_x if isinstance(req.vars_x, list) else [v.strip() for v in req.vars_x.split(",") if v.strip()]
        vy = req.vars_y if isinstance(req.vars_y, list) else [v.strip() for v in req.vars_y.split(",") if v.strip()]
        iso = _are_isomorphic(parse(req.formula_x), vx, parse(req.formula_y), vy)
        return IsomorphicResponse(isomorphic=iso)

    @app.post("/elim-im", response_model=ElimImResponse)
    def do_elim_im(req: ElimImRequest):
        names = req.var_list()
        fam = FiberCodeFamily(parse(req.formula), names, req.out)
        codes = [fam.code(tuple(p)) for p in req.points]
        equal = [[codes[i] == codes[j] for j in range(len(codes))] for i in range(len(codes))]
        return ElimImResponse(codes=[c.to_dict() for c in codes], equal=equal)

    @app.post("/check", response_model=CheckResponse)
    def do_check(req: CheckRequest):
        names = req.var_list()
        if req.kind == "partition":
            rep = check_partition(parse(req.formula), [parse(p) for p in req.pieces or []], names, req.radius)
        elif req.kind == "decompose":
            f = parse(req.formula)
            dec = decompose(f, names)
            pieces = [cell_to_formula(c, names) for c in dec.cells]
            rep = check_partition(f, pieces, names, req.radius)
        elif req.kind == "bijection":
            g = map_from_json(req.map or {})
            rep = check_bijection_on_box(
                g,
                parse(req.source or "true"),
                parse(req.target or "true"),
                req.radius,
                x_vars=input_names(g.input_arity),
                y_vars=input_names(g.output_arity),
            )
        else:
            raise ParseError(f"unknown check kind {req.kind!r}", 1, 1)
        return CheckResponse(report=rep.to_dict())

    return app


app = create_app()
