"""FastAPI application over the shared analysis handlers.

Route bodies only translate between wire models and plain Python; every
number on the wire is computed in posmap.analysis, which the command
line calls as well.  Malformed input maps to 400, analysis failures
(including a map that is not *-linear) to 422 with the deviation
diagnostics attached.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse

from .. import __version__, analysis
from ..errors import AnalysisError, NotStarLinear, ParseError
from ..mapmodel import MapSpec
from .schemas import (AnalyzeRequest, AnalyzeResponse, CensusResponse,
                      ConvertRequest, HealthResponse, HillRequest,
                      HillResponse, MapWire, RangeRequest, RangeResponse,
                      SourceRequest)


def _resolve(req: SourceRequest) -> MapSpec:
    return analysis.resolve_source(req.source, field=req.field,
                                   as_choi=req.choi, n=req.n)


def _not_star_linear(spec: MapSpec, tol: float) -> HTTPException:
    return HTTPException(
        status_code=422,
        detail={
            "message": "the map is not *-linear",
            "star_linear": analysis._star_section(spec, tol),
        },
    )


def create_app() -> FastAPI:
    app = FastAPI(
        title="posmap",
        version=__version__,
        description="Positivity structure of linear matrix maps.",
    )

    @app.exception_handler(ParseError)
    async def parse_error(request: Request, exc: ParseError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(AnalysisError)
    async def analysis_error(request: Request, exc: AnalysisError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/health", response_model=HealthResponse)
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/analyze", response_model=AnalyzeResponse,
              response_model_exclude_unset=True)
    def analyze(req: AnalyzeRequest):
        spec = _resolve(req)
        report = analysis.analyze_map(spec, tol=req.tol, seed=req.seed,
                                      budget=req.budget,
                                      max_selections=req.max_selections)
        if not report["star_linear"]["is_star_linear"]:
            raise HTTPException(
                status_code=422,
                detail={
                    "message": "the map is not *-linear",
                    "star_linear": report["star_linear"],
                },
            )
        return report

    @app.post("/convert", response_model=MapWire)
    def convert(req: ConvertRequest):
        return analysis.convert_map(_resolve(req), req.to)

    @app.post("/hill", response_model=HillResponse)
    def hill(req: HillRequest):
        spec = _resolve(req)
        try:
            return analysis.hill_summary(spec, tol=req.tol)
        except NotStarLinear:
            raise _not_star_linear(spec, req.tol)

    @app.post("/range", response_model=RangeResponse,
              response_model_exclude_unset=True)
    def range_(req: RangeRequest):
        return analysis.range_from_source(req.source, req.y,
                                          field=req.field, tol=req.tol,
                                          seed=req.seed, budget=req.budget)

    @app.get("/case2x2", response_model=CensusResponse)
    def case2x2():
        return analysis.census_2x2()

    return app
