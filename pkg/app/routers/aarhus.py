"""Tree-level gluing endpoints"""

from fastapi import APIRouter, HTTPException

from app.errors import TreeclaspError
from app.models.schemas import ErrorResponse, GlueRequest, InverseRequest, ZminRequest
from app.services.calculator import ClasperCalculator, dump

router = APIRouter(prefix="/api/v1/aarhus", tags=["Aarhus"])


@router.post("/zmin", responses={400: {"model": ErrorResponse}})
async def zmin(request: ZminRequest):
    """
    Leading tree term of the glued invariant for a pattern

    Runs the whole pipeline (clasper, surgery, certificate, sphere check,
    legged series, gluing) and compares the lowest nonvanishing degree
    with the pattern itself.
    """
    try:
        return ClasperCalculator().calculate_zmin(request.pattern, request.cap, request.route, request.oracle)
    except TreeclaspError as e:
        raise HTTPException(status_code=400, detail=str(e))


@router.post("/glue", responses={400: {"model": ErrorResponse}})
async def glue(request: GlueRequest):
    """Glue a strut-plus-forest series; `brute` uses the all-matchings oracle"""
    try:
        return dump(ClasperCalculator().glue(request.series, request.brute))
    except TreeclaspError as e:
        raise HTTPException(status_code=400, detail=str(e))


@router.post("/negative-inverse", responses={400: {"model": ErrorResponse}})
async def negative_inverse(request: InverseRequest):
    try:
        return ClasperCalculator().calculate_negative_inverse(request.matrix)
    except (TreeclaspError, ValueError) as e:
        raise HTTPException(status_code=400, detail=str(e))
