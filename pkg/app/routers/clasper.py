"""Pattern validation, clasper construction and null certificates"""

from typing import Optional

from fastapi import APIRouter, HTTPException

from app.errors import TreeclaspError
from app.models.schemas import ClasperSpecModel, ErrorResponse, PatternModel, SurgeryPresentationModel
from app.services.calculator import ClasperCalculator, dump

router = APIRouter(prefix="/api/v1/clasper", tags=["Clasper"])


@router.post("/validate", responses={400: {"model": ErrorResponse}})
async def validate(request: PatternModel):
    """
    Check that a tree is a pattern (or an n-pattern when `n` is set)

    Returns the chosen vertex or central edge and the branches it splits
    the tree into.
    """
    try:
        return dump(ClasperCalculator().validate(request))
    except TreeclaspError as e:
        raise HTTPException(status_code=400, detail=str(e))


@router.post("/build", responses={400: {"model": ErrorResponse}})
async def build(request: PatternModel, allow_non_null: bool = False):
    """
    Build the clasper for a pattern and compile it to a surgery presentation

    The presentation carries the null-homotopy certificate. Leaves that
    are not null-homologous are refused unless `allow_non_null` is set.
    """
    try:
        return dump(ClasperCalculator().build(request, allow_non_null))
    except TreeclaspError as e:
        raise HTTPException(status_code=400, detail=str(e))


@router.post("/compile", responses={400: {"model": ErrorResponse}})
async def compile_spec(request: ClasperSpecModel, allow_non_null: bool = False):
    """Compile a clasper given directly by shape, leaf words and linking;
    higher-degree shapes are edge-expanded first"""
    try:
        return dump(ClasperCalculator().build_spec(request, allow_non_null))
    except TreeclaspError as e:
        raise HTTPException(status_code=400, detail=str(e))


@router.post("/certify", responses={400: {"model": ErrorResponse}})
async def certify(request: SurgeryPresentationModel, level: int = 1):
    try:
        return dump(ClasperCalculator().certify(request, level))
    except TreeclaspError as e:
        raise HTTPException(status_code=400, detail=str(e))


@router.get("/catalog", responses={400: {"model": ErrorResponse}})
async def catalog(degree: int, colors: int, n: Optional[int] = None):
    """Every pattern of the given degree on `colors` colors, up to AS"""
    try:
        return ClasperCalculator().catalog(degree, colors, n)
    except TreeclaspError as e:
        raise HTTPException(status_code=400, detail=str(e))
